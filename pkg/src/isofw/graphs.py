"""Weighted undirected graphs, permutations, named generators and file I/O.

Vertices are 0-based everywhere inside the library. Files and printed
certificates use 1-based labels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

TOL_VERIFY = 1e-9

__all__ = [
    "GraphFormatError",
    "Permutation",
    "WeightedGraph",
    "apply_permutation",
    "from_edges",
    "generate",
    "graph_names",
    "read_graph",
    "verify_isomorphism",
    "write_graph",
]


class GraphFormatError(ValueError):
    """Raised for malformed graph input; carries the offending line number."""

    def __init__(self, message: str, lineno: int | None = None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    """Simple weighted undirected graph stored as a dense adjacency matrix."""

    adj: np.ndarray
    n: int = field(init=False)
    is_integer: bool = field(init=False)

    def __post_init__(self):
        a = np.array(self.adj, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"adjacency must be square, got shape {a.shape}")
        if a.shape[0] < 1:
            raise ValueError("graph needs at least one vertex")
        if not np.all(np.isfinite(a)):
            raise ValueError("adjacency contains non-finite weights")
        if np.any(np.diag(a) != 0):
            raise ValueError("self-loops are not supported")
        if not np.array_equal(a, a.T):
            raise ValueError("adjacency is not symmetric")
        a.setflags(write=False)
        object.__setattr__(self, "adj", a)
        object.__setattr__(self, "n", a.shape[0])
        object.__setattr__(self, "is_integer", bool(np.all(a == np.round(a))))

    def __eq__(self, other):
        if not isinstance(other, WeightedGraph):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.adj, other.adj)

    __hash__ = None

    def edges(self) -> list[tuple[int, int, float]]:
        """Edges as 0-based ``(i, j, w)`` triples with ``i < j``."""
        iu, ju = np.nonzero(np.triu(self.adj, 1))
        return [(int(i), int(j), float(self.adj[i, j])) for i, j in zip(iu, ju)]

    @property
    def num_edges(self) -> int:
        return int(np.count_nonzero(np.triu(self.adj, 1)))

    def degrees(self) -> np.ndarray:
        return np.count_nonzero(self.adj, axis=1)

    def is_regular(self) -> bool:
        rs = self.adj.sum(axis=1)
        return bool(np.allclose(rs, rs[0]))


@dataclass(frozen=True, eq=False)
class Permutation:
    """Bijection on ``{0, ..., n-1}``; ``map[j]`` is the image of vertex ``j``.

    The matrix form has ``P[i, j] = 1`` iff ``map[j] == i``.
    """

    map: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.map)
        if m.ndim != 1 or m.size == 0:
            raise ValueError("permutation must be a non-empty 1-d sequence")
        if not np.issubdtype(m.dtype, np.integer):
            if not np.all(m == np.round(m)):
                raise ValueError("permutation entries must be integers")
        m = m.astype(np.int64)
        if not np.array_equal(np.sort(m), np.arange(m.size)):
            raise ValueError("not a bijection on 0..n-1")
        m.setflags(write=False)
        object.__setattr__(self, "map", m)

    @property
    def n(self) -> int:
        return int(self.map.size)

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(np.arange(n))

    @classmethod
    def from_one_based(cls, images: Sequence[int]) -> "Permutation":
        return cls(np.asarray(images, dtype=np.int64) - 1)

    @classmethod
    def random(cls, n: int, rng: np.random.Generator) -> "Permutation":
        return cls(rng.permutation(n))

    @classmethod
    def from_matrix(cls, p: np.ndarray) -> "Permutation":
        p = np.asarray(p)
        if p.ndim != 2 or p.shape[0] != p.shape[1]:
            raise ValueError("permutation matrix must be square")
        if not (np.all((p == 0) | (p == 1)) and np.all(p.sum(0) == 1) and np.all(p.sum(1) == 1)):
            raise ValueError("not a permutation matrix")
        return cls(np.argmax(p, axis=0))

    def one_based(self) -> list[int]:
        return [int(v) + 1 for v in self.map]

    def inverse(self) -> "Permutation":
        inv = np.empty_like(self.map)
        inv[self.map] = np.arange(self.n)
        return Permutation(inv)

    def compose(self, other: "Permutation") -> "Permutation":
        """``self ∘ other``: apply ``other`` first."""
        return Permutation(self.map[other.map])

    def matrix(self) -> np.ndarray:
        p = np.zeros((self.n, self.n))
        p[self.map, np.arange(self.n)] = 1.0
        return p

    def __eq__(self, other):
        if not isinstance(other, Permutation):
            return NotImplemented
        return np.array_equal(self.map, other.map)

    def __hash__(self):
        return hash(self.map.tobytes())

    def __repr__(self):
        return f"Permutation({self.one_based()})"


def from_edges(n: int, edges: Iterable[Sequence[float]], one_based: bool = True) -> WeightedGraph:
    """Build a graph from ``(i, j)`` or ``(i, j, w)`` tuples."""
    a = np.zeros((n, n))
    off = 1 if one_based else 0
    for e in edges:
        i, j = int(e[0]) - off, int(e[1]) - off
        w = float(e[2]) if len(e) > 2 else 1.0
        if i == j:
            raise ValueError(f"self-loop at vertex {i + off}")
        a[i, j] = a[j, i] = w
    return WeightedGraph(a)


# Outer 5-cycle, spokes, inner pentagram.
_PETERSEN = [
    (1, 2), (2, 3), (3, 4), (4, 5), (5, 1), (1, 6), (2, 7), (3, 8),
    (4, 9), (5, 10), (6, 8), (6, 9), (7, 9), (7, 10), (8, 10),
]

# Strongly regular graph on 10 vertices, edges written with the displayed labels.
_FIG1B = [
    (3, 7), (7, 1), (1, 4), (4, 2), (2, 3), (3, 8), (7, 5), (1, 6),
    (4, 10), (2, 9), (8, 6), (8, 10), (5, 10), (5, 9), (6, 9),
]

_FRUCHT = [
    (1, 2), (2, 3), (3, 1), (4, 5), (5, 6), (6, 4), (8, 9), (9, 7),
    (7, 8), (9, 11), (6, 10), (3, 10), (12, 11), (10, 11), (4, 8),
    (7, 12), (12, 2), (1, 5),
]

# Cubic distance-regular graph, intersection array {3,2,2,2,1,1,1; 1,1,1,1,1,1,3}.
_BIGGS_SMITH = [
    (1, 2), (1, 17), (1, 102), (2, 3), (2, 26), (3, 4), (3, 67), (4, 5), (4, 21), (5,
    6), (5, 39), (6, 7), (6, 54), (7, 8), (7, 90), (8, 9), (8, 49), (9, 10), (9, 76),
    (10, 11), (10, 57), (11, 12), (11, 93), (12, 13), (12, 46), (13, 14), (13, 79), (14,
    15), (14, 35), (15, 16), (15, 29), (16, 17), (16, 64), (17, 18), (18, 19), (18, 84),
    (19, 20), (19, 78), (20, 21), (20, 48), (21, 22), (22, 23), (22, 43), (23, 24), (23,
    52), (24, 25), (24, 83), (25, 26), (25, 71), (26, 27), (27, 28), (27, 55), (28, 29),
    (28, 92), (29, 30), (30, 31), (30, 82), (31, 32), (31, 88), (32, 33), (32, 53), (33,
    34), (33, 41), (34, 35), (34, 61), (35, 36), (36, 37), (36, 56), (37, 38), (37,
    102), (38, 39), (38, 77), (39, 40), (40, 41), (40, 98), (41, 42), (42, 43), (42,
    80), (43, 44), (44, 45), (44, 69), (45, 46), (45, 60), (46, 47), (47, 48), (47, 65),
    (48, 49), (49, 50), (50, 51), (50, 86), (51, 52), (51, 59), (52, 53), (53, 54), (54,
    55), (55, 56), (56, 57), (57, 58), (58, 59), (58, 72), (59, 60), (60, 61), (61, 62),
    (62, 63), (62, 100), (63, 64), (63, 87), (64, 65), (65, 66), (66, 67), (66, 91),
    (67, 68), (68, 69), (68, 99), (69, 70), (70, 71), (70, 94), (71, 72), (72, 73), (73,
    74), (73, 101), (74, 75), (74, 85), (75, 76), (75, 96), (76, 77), (77, 78), (78,
    79), (79, 80), (80, 81), (81, 82), (81, 95), (82, 83), (83, 84), (84, 85), (85, 86),
    (86, 87), (87, 88), (88, 89), (89, 90), (89, 97), (90, 91), (91, 92), (92, 93), (93,
    94), (94, 95), (95, 96), (96, 97), (97, 98), (98, 99), (99, 100), (100, 101), (101,
    102)
]

_SQUARE_WEIGHTS = {
    "a": (1, 2, 3, 4),
    "b": (1, 2, 2, 2),
    "c": (1, 2, 1, 2),
    "d": (1, 1, 1, 1),
}

_FIXED = {
    "petersen": lambda: from_edges(10, _PETERSEN),
    "fig1b": lambda: from_edges(10, _FIG1B),
    "frucht": lambda: from_edges(12, _FRUCHT),
    "biggs_smith": lambda: from_edges(102, _BIGGS_SMITH),
}


def graph_names() -> list[str]:
    return sorted(list(_FIXED) + [f"square_{v}" for v in _SQUARE_WEIGHTS]
                  + ["paley", "cycle", "complete", "star"])


def _is_prime(q: int) -> bool:
    if q < 2:
        return False
    return all(q % p for p in range(2, math.isqrt(q) + 1))


def paley(q: int) -> WeightedGraph:
    if not (_is_prime(q) and q % 4 == 1):
        raise ValueError(f"Paley graph needs a prime q ≡ 1 (mod 4), got {q}")
    residues = {(x * x) % q for x in range(1, q)}
    a = np.zeros((q, q))
    for i in range(q):
        for j in range(q):
            if i != j and (i - j) % q in residues:
                a[i, j] = 1.0
    return WeightedGraph(a)


def square(variant: str) -> WeightedGraph:
    """4-cycle 1-2-3-4-1 with edge weights from the named pattern (a)-(d)."""
    try:
        w = _SQUARE_WEIGHTS[variant]
    except KeyError:
        raise ValueError(f"unknown square variant {variant!r}") from None
    return from_edges(4, [(1, 2, w[0]), (2, 3, w[1]), (3, 4, w[2]), (4, 1, w[3])])


def cycle(n: int) -> WeightedGraph:
    if n < 3:
        raise ValueError("cycle needs n >= 3")
    return from_edges(n, [(i, (i + 1) % n) for i in range(n)], one_based=False)


def complete(n: int) -> WeightedGraph:
    if n < 1:
        raise ValueError("complete graph needs n >= 1")
    return WeightedGraph(np.ones((n, n)) - np.eye(n))


def star(n: int) -> WeightedGraph:
    """Star on ``n`` vertices: vertex 1 joined to the other ``n - 1``."""
    if n < 2:
        raise ValueError("star needs n >= 2")
    return from_edges(n, [(0, j) for j in range(1, n)], one_based=False)


def generate(name: str, q: int | None = None, n: int | None = None,
             variant: str | None = None) -> WeightedGraph:
    """Return one of the named graphs.

    ``paley`` takes ``q``; ``cycle``, ``complete`` and ``star`` take ``n``;
    ``square`` takes ``variant`` (``a``-``d``) unless spelled ``square_a`` etc.
    """
    key = name.lower().replace("-", "_")
    if key in _FIXED:
        return _FIXED[key]()
    if key.startswith("square_"):
        return square(key.split("_", 1)[1])
    if key == "square":
        if variant is None:
            raise ValueError("square needs a variant a-d")
        return square(variant)
    if key == "paley":
        if q is None:
            raise ValueError("paley needs q")
        return paley(q)
    sized = {"cycle": cycle, "complete": complete, "star": star}
    if key in sized:
        if n is None:
            raise ValueError(f"{key} needs n")
        return sized[key](n)
    raise ValueError(f"unknown graph name {name!r}; choose from {', '.join(graph_names())}")


def apply_permutation(g: WeightedGraph, p: Permutation) -> WeightedGraph:
    """Relabel vertex ``j`` as ``p.map[j]``; the result is ``P A Pᵀ``."""
    if p.n != g.n:
        raise ValueError(f"permutation size {p.n} does not match graph size {g.n}")
    inv = p.inverse().map
    return WeightedGraph(g.adj[np.ix_(inv, inv)])


def verify_isomorphism(a: WeightedGraph, b: WeightedGraph, p: Permutation,
                       tol: float = TOL_VERIFY) -> bool:
    """True iff ``P A = B P``; exact for integer graphs, else entrywise within ``tol``."""
    if a.n != b.n or p.n != a.n:
        return False
    pulled = b.adj[np.ix_(p.map, p.map)]
    if a.is_integer and b.is_integer:
        return bool(np.array_equal(a.adj, pulled))
    return bool(np.max(np.abs(a.adj - pulled)) <= tol)


def _format_weight(w: float) -> str:
    if w == int(w) and abs(w) < 2**53:
        return str(int(w))
    return repr(float(w))


def write_graph(g: WeightedGraph, path: str | Path) -> None:
    edges = g.edges()
    lines = [f"{g.n} {len(edges)}"]
    lines += [f"{i + 1} {j + 1} {_format_weight(w)}" for i, j, w in edges]
    Path(path).write_text("\n".join(lines) + "\n")


def parse_graph(text: str) -> WeightedGraph:
    header = None
    a = None
    seen = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        if header is None:
            if len(tok) != 2:
                raise GraphFormatError("header must be 'n m'", lineno)
            try:
                n, m = int(tok[0]), int(tok[1])
            except ValueError:
                raise GraphFormatError("header must hold two integers", lineno) from None
            if n < 1 or m < 0:
                raise GraphFormatError("need n >= 1 and m >= 0", lineno)
            header = (n, m)
            a = np.zeros((n, n))
            written = np.zeros((n, n), dtype=bool)
            continue
        if len(tok) not in (2, 3):
            raise GraphFormatError("edge line must be 'i j' or 'i j w'", lineno)
        try:
            i, j = int(tok[0]), int(tok[1])
            w = float(tok[2]) if len(tok) == 3 else 1.0
        except ValueError:
            raise GraphFormatError(f"cannot parse edge {line!r}", lineno) from None
        n = header[0]
        if not (1 <= i <= n and 1 <= j <= n):
            raise GraphFormatError(f"vertex out of range 1..{n}", lineno)
        if i == j:
            raise GraphFormatError(f"self-loop at vertex {i}", lineno)
        if not math.isfinite(w):
            raise GraphFormatError("non-finite weight", lineno)
        i, j = i - 1, j - 1
        if written[i, j] and a[i, j] != w:
            raise GraphFormatError(f"asymmetric weights for edge ({i + 1}, {j + 1})", lineno)
        a[i, j] = a[j, i] = w
        written[i, j] = written[j, i] = True
        seen += 1
    if header is None:
        raise GraphFormatError("empty graph file")
    if seen != header[1]:
        raise GraphFormatError(f"header declares {header[1]} edges, found {seen}")
    return WeightedGraph(a)


def read_graph(path: str | Path) -> WeightedGraph:
    return parse_graph(Path(path).read_text())
