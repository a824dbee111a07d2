import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from isofw.lp import (
    INFEASIBLE,
    OPTIMAL,
    IterationLimitError,
    LinearProgram,
    SimplexOptions,
    UnboundedError,
    independent_rows,
)


def highs(c, E, e, G, h):
    return linprog(c, A_ub=-G, b_ub=-h, A_eq=E if len(E) else None,
                   b_eq=e if len(E) else None, bounds=[(None, None)] * len(c),
                   method="highs")


def random_lp(rng, degenerate=False, redundant=False):
    p = int(rng.integers(2, 10))
    m = int(rng.integers(p + 1, 30))
    q = int(rng.integers(0, p))
    G = rng.normal(size=(m, p))
    if degenerate:
        G = np.round(G)
    z0 = rng.normal(size=p)
    h = G @ z0 - rng.random(m) * (rng.random(m) < 0.5)  # many rows active at z0
    G = np.vstack([G, np.eye(p), -np.eye(p)])
    h = np.concatenate([h, z0 - 5, -z0 - 5])
    E = rng.normal(size=(q, p))
    e = E @ z0
    if redundant and q > 1:
        E = np.vstack([E, E[0] + E[1]])
        e = np.concatenate([e, [e[0] + e[1]]])
    return E, e, G, h, rng.normal(size=p)


@pytest.mark.parametrize("seed", range(60))
def test_matches_highs(seed):
    rng = np.random.default_rng(seed)
    E, e, G, h, c = random_lp(rng, degenerate=seed % 3 == 0, redundant=seed % 2 == 1)
    lp = LinearProgram(E, e, G, h)
    res = lp.solve(c)
    ref = highs(c, E, e, G, h)
    assert res.status == OPTIMAL and ref.status == 0
    assert abs(res.objective - ref.fun) <= 1e-6 * max(1, abs(ref.fun))
    assert lp.violation(res.z) <= 1e-7


@pytest.mark.parametrize("seed", range(30))
def test_infeasibility_agrees_with_highs(seed):
    rng = np.random.default_rng(1000 + seed)
    E, e, G, h, c = random_lp(rng)
    h = h.copy()
    h[0] += 1e3
    res = LinearProgram(E, e, G, h).solve(c)
    ref = highs(c, E, e, G, h)
    assert (res.status == INFEASIBLE) == (ref.status == 2)


def test_contradictory_equalities():
    E = np.array([[1.0, 1.0], [1.0, 1.0]])
    lp = LinearProgram(E, np.array([1.0, 2.0]), np.eye(2), np.zeros(2))
    assert not lp.consistent()
    assert lp.find_feasible().status == INFEASIBLE
    assert lp.solve(np.ones(2)).status == INFEASIBLE


def test_unbounded():
    lp = LinearProgram(np.zeros((0, 2)), np.zeros(0), np.eye(2), np.zeros(2))
    with pytest.raises(UnboundedError):
        lp.solve(np.array([-1.0, 0.0]))


def test_iteration_cap_is_distinct_error():
    rng = np.random.default_rng(7)
    E, e, G, h, c = random_lp(rng)
    lp = LinearProgram(E, e, G, h, SimplexOptions(max_pivots=1))
    with pytest.raises(IterationLimitError):
        lp.solve(c)


def test_independent_rows_drops_redundant():
    E = np.array([[1.0, 0, 0], [0, 1, 0], [1, 1, 0], [0, 0, 1]])
    keep = independent_rows(E)
    assert keep.size == 3
    assert np.linalg.matrix_rank(E[keep]) == 3
    assert independent_rows(np.zeros((2, 3))).size == 0


def test_warm_start_basis_reused():
    # unit square, minimize -x - y: optimum (1, 1)
    G = np.vstack([np.eye(2), -np.eye(2)])
    h = np.array([0.0, 0.0, -1.0, -1.0])
    lp = LinearProgram(np.zeros((0, 2)), np.zeros(0), G, h)
    first = lp.solve(np.array([-1.0, -1.0]))
    np.testing.assert_allclose(first.z, [1, 1])
    again = lp.solve(np.array([-1.0, -1.0]), start=first.z, basis=first.basis)
    assert again.pivots == 0
    np.testing.assert_allclose(again.z, [1, 1])


def test_degenerate_vertex_exact_after_cleanup():
    # Pyramid apex where four facets meet in 3-D: a degenerate vertex.
    G = np.array([[1.0, 0, -1], [-1, 0, -1], [0, 1, -1], [0, -1, -1], [0, 0, 1]])
    h = np.array([-1.0, -1, -1, -1, 0])
    lp = LinearProgram(np.zeros((0, 3)), np.zeros(0), G, h)
    res = lp.solve(np.array([0.0, 0.0, 1.0]))
    assert abs(res.z[2]) <= 1e-12 and lp.violation(res.z) == 0.0
    top = lp.solve(np.array([0.0, 0.0, -1.0]))
    np.testing.assert_allclose(top.z, [0, 0, 1], atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_property_optimal_vs_highs(seed):
    rng = np.random.default_rng(seed)
    E, e, G, h, c = random_lp(rng, degenerate=bool(seed % 2), redundant=True)
    lp = LinearProgram(E, e, G, h)
    res = lp.solve(c)
    ref = highs(c, E, e, G, h)
    assert abs(res.objective - ref.fun) <= 1e-6 * max(1, abs(ref.fun))
    assert lp.violation(res.z) <= 1e-7


def test_zero_variable_program():
    lp = LinearProgram(np.zeros((3, 0)), np.zeros(3), np.zeros((4, 0)), -np.ones(4))
    assert lp.dim == 0 and lp.free_dim == 0
    res = lp.solve(np.zeros(0))
    assert res.feasible and res.z.size == 0
    bad = LinearProgram(np.zeros((1, 0)), np.ones(1), np.zeros((1, 0)), np.zeros(1))
    assert not bad.find_feasible().feasible
