import itertools

import numpy as np
import pytest

from isofw.graphs import Permutation, WeightedGraph, apply_permutation, verify_isomorphism


def brute_isomorphisms(a: WeightedGraph, b: WeightedGraph) -> list[Permutation]:
    """Every P with P A = B P, by enumeration of all n! maps."""
    if a.n != b.n:
        return []
    return [p for p in (Permutation(np.array(m)) for m in itertools.permutations(range(a.n)))
            if verify_isomorphism(a, b, p)]


def brute_is_isomorphic(a: WeightedGraph, b: WeightedGraph) -> bool:
    if a.n != b.n:
        return False
    da, db = sorted(a.adj.sum(0)), sorted(b.adj.sum(0))
    if not np.allclose(da, db):
        return False
    for m in itertools.permutations(range(a.n)):
        if verify_isomorphism(a, b, Permutation(np.array(m))):
            return True
    return False


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def _random_graph(n, rng, weighted):
    upper = np.triu(rng.random((n, n)) < 0.5, 1).astype(float)
    if weighted:
        upper *= rng.integers(1, 4, (n, n))
    return WeightedGraph(upper + upper.T)


def _two_switch(g, rng):
    """Degree-preserving edge swap ab, cd -> ac, bd; None if no valid swap found."""
    adj = g.adj.copy()
    edges = [(i, j) for i in range(g.n) for j in range(i + 1, g.n) if adj[i, j]]
    for _ in range(50):
        if len(edges) < 2:
            return None
        (a, b), (c, d) = (edges[k] for k in rng.choice(len(edges), 2, replace=False))
        if len({a, b, c, d}) < 4 or adj[a, c] or adj[b, d] or adj[a, b] != adj[c, d]:
            continue
        w = adj[a, b]
        adj[a, b] = adj[b, a] = adj[c, d] = adj[d, c] = 0
        adj[a, c] = adj[c, a] = adj[b, d] = adj[d, b] = w
        return WeightedGraph(adj)
    return None


def _cospectral_pool(rng, tries=4000, size=20):
    """Non-isomorphic unweighted pairs with equal spectra, found by random search."""
    seen: dict = {}
    pool = []
    for _ in range(tries):
        n = int(rng.integers(5, 8))
        g = _random_graph(n, rng, False)
        key = (n, tuple(np.round(np.linalg.eigvalsh(g.adj), 6)))
        for h in seen.get(key, []):
            if not brute_is_isomorphic(g, h):
                pool.append((h, g))
                if len(pool) >= size:
                    return pool
                break
        else:
            seen.setdefault(key, []).append(g)
    return pool


def soundness_pairs(count: int, seed: int):
    """Mixed (a, b, weighted) pairs for the soundness sweep, n in 4..7."""
    rng = np.random.default_rng(seed)
    pool = _cospectral_pool(rng)
    out = []
    i = 0
    while len(out) < count:
        kind = i % 5
        weighted = bool((i // 5) % 2)
        i += 1
        n = int(rng.integers(4, 8))
        a = _random_graph(n, rng, weighted)
        if kind in (0, 1):
            b = a
        elif kind == 2:
            b = _random_graph(n, rng, weighted)
        elif kind == 3:
            b = _two_switch(a, rng)
            if b is None:
                continue
        else:
            if not pool:
                continue
            a, b = pool[int(rng.integers(len(pool)))]
            weighted = False
        p = Permutation.random(b.n, rng)
        out.append((a, apply_permutation(b, p), weighted))
    return out


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
