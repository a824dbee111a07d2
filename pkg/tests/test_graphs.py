import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from isofw.graphs import (
    GraphFormatError,
    Permutation,
    WeightedGraph,
    apply_permutation,
    generate,
    graph_names,
    parse_graph,
    read_graph,
    verify_isomorphism,
    write_graph,
)

from conftest import brute_isomorphisms


def to_nx(g: WeightedGraph) -> nx.Graph:
    h = nx.Graph()
    h.add_nodes_from(range(g.n))
    h.add_weighted_edges_from(g.edges())
    return h


@pytest.mark.parametrize("name,n,m,deg", [
    ("petersen", 10, 15, 3),
    ("fig1b", 10, 15, 3),
    ("frucht", 12, 18, 3),
    ("biggs_smith", 102, 153, 3),
])
def test_fixed_graph_counts(name, n, m, deg):
    g = generate(name)
    assert (g.n, g.num_edges) == (n, m)
    assert g.is_regular() and g.degrees()[0] == deg


def test_petersen_matches_networkx():
    assert nx.is_isomorphic(to_nx(generate("petersen")), nx.petersen_graph())


def test_frucht_matches_networkx():
    g = to_nx(generate("frucht"))
    assert nx.is_isomorphic(g, nx.frucht_graph())


def test_biggs_smith_intersection_array():
    g = to_nx(generate("biggs_smith"))
    assert nx.is_distance_regular(g)
    assert nx.intersection_array(g) == ([3, 2, 2, 2, 1, 1, 1], [1, 1, 1, 1, 1, 1, 3])


def test_fig1b_is_a_relabelled_petersen():
    assert nx.is_isomorphic(to_nx(generate("fig1b")), nx.petersen_graph())


def test_known_petersen_relabelling_certifies():
    p = Permutation.from_one_based([5, 10, 8, 3, 7, 9, 4, 6, 2, 1])
    assert verify_isomorphism(generate("petersen"), generate("fig1b"), p)


@pytest.mark.parametrize("q", [5, 13, 17, 29, 37])
def test_paley_regular(q):
    g = generate("paley", q=q)
    assert g.n == q
    assert g.is_regular() and g.degrees()[0] == (q - 1) // 2
    assert nx.is_strongly_regular(to_nx(g))


@pytest.mark.parametrize("q", [7, 11, 15, 21, 1])
def test_paley_rejects_bad_modulus(q):
    with pytest.raises(ValueError):
        generate("paley", q=q)


@pytest.mark.parametrize("variant,weights", [
    ("a", (1, 2, 3, 4)), ("b", (1, 2, 2, 2)), ("c", (1, 2, 1, 2)), ("d", (1, 1, 1, 1)),
])
def test_square_weights(variant, weights):
    g = generate("square", variant=variant)
    assert g == generate(f"square_{variant}")
    got = tuple(g.adj[i, j] for i, j in [(0, 1), (1, 2), (2, 3), (3, 0)])
    assert got == weights
    assert g.num_edges == 4


def test_small_families():
    assert generate("cycle", n=5).num_edges == 5
    assert generate("complete", n=6).num_edges == 15
    star = generate("star", n=5)
    assert sorted(star.degrees()) == [1, 1, 1, 1, 4]


def test_unknown_name():
    with pytest.raises(ValueError, match="unknown graph"):
        generate("dodecahedron")
    assert "petersen" in graph_names()


def test_square_a_vs_b_no_isomorphism():
    a, b = generate("square_a"), generate("square_b")
    assert brute_isomorphisms(a, b) == []


def test_square_a_relabelling():
    a = generate("square_a")
    p = Permutation.from_one_based([2, 4, 1, 3])
    b = apply_permutation(a, p)
    assert verify_isomorphism(a, b, p)
    assert brute_isomorphisms(a, b) == [p]


def test_apply_identity():
    g = generate("petersen")
    assert apply_permutation(g, Permutation.identity(10)) == g


def test_apply_size_mismatch():
    with pytest.raises(ValueError):
        apply_permutation(generate("petersen"), Permutation.identity(4))


def test_permutation_matrix_convention():
    p = Permutation.from_one_based([2, 3, 1])
    m = p.matrix()
    # p_ij = 1 iff pi(j) = i
    for j in range(3):
        assert m[p.map[j], j] == 1
    g = generate("cycle", n=3)
    b = apply_permutation(g, p)
    assert np.array_equal(m @ g.adj, b.adj @ m)
    assert Permutation.from_matrix(m) == p


def test_permutation_validation():
    with pytest.raises(ValueError):
        Permutation(np.array([0, 0, 1]))
    with pytest.raises(ValueError):
        Permutation.from_one_based([0, 1, 2])


def test_graph_validation():
    with pytest.raises(ValueError):
        WeightedGraph(np.array([[0, 1], [2, 0]]))
    with pytest.raises(ValueError):
        WeightedGraph(np.array([[1.0]]))
    with pytest.raises(ValueError):
        WeightedGraph(np.zeros((0, 0)))
    with pytest.raises(ValueError):
        WeightedGraph(np.array([[0, np.inf], [np.inf, 0]]))
    g = generate("petersen")
    with pytest.raises(ValueError):
        g.adj[0, 1] = 5


def test_verify_float_tolerance():
    a = WeightedGraph(np.array([[0, 0.5], [0.5, 0]]))
    b = WeightedGraph(np.array([[0, 0.5 + 1e-12], [0.5 + 1e-12, 0]]))
    assert not a.is_integer
    assert verify_isomorphism(a, b, Permutation.identity(2))
    c = WeightedGraph(np.array([[0, 0.5 + 1e-6], [0.5 + 1e-6, 0]]))
    assert not verify_isomorphism(a, c, Permutation.identity(2))


def test_verify_size_mismatch_is_false():
    assert not verify_isomorphism(generate("cycle", n=4), generate("cycle", n=5),
                                  Permutation.identity(4))


# --- file I/O ---------------------------------------------------------------

def test_parse_path_graph():
    g = parse_graph("3 2\n1 2 1\n2 3 1")
    assert np.array_equal(g.adj, [[0, 1, 0], [1, 0, 1], [0, 1, 0]])


def test_parse_comments_shorthand_and_floats():
    g = parse_graph("# header next\n\n3 2  # n m\n1 2\n2 3 0.25\n")
    assert g.adj[0, 1] == 1 and g.adj[1, 2] == 0.25 and not g.is_integer


@pytest.mark.parametrize("text,lineno", [
    ("3 1\n1 1 1", 2),
    ("3 1\n1 4 1", 2),
    ("3 2\n1 2 1\n2 1 3", 3),
    ("3 1\n1 2 x", 2),
    ("3\n1 2", 1),
    ("3 1\n1 2 3 4", 2),
])
def test_parse_errors_carry_line(text, lineno):
    with pytest.raises(GraphFormatError) as exc:
        parse_graph(text)
    assert exc.value.lineno == lineno
    assert f"line {lineno}" in str(exc.value)


def test_parse_self_loop_message():
    with pytest.raises(GraphFormatError, match="self-loop"):
        parse_graph("3 1\n1 1 1")


def test_parse_edge_count_mismatch():
    with pytest.raises(GraphFormatError, match="declares"):
        parse_graph("3 3\n1 2\n2 3")
    with pytest.raises(GraphFormatError):
        parse_graph("# nothing\n")


@pytest.mark.parametrize("name", ["petersen", "fig1b", "frucht", "square_a", "biggs_smith"])
def test_round_trip(tmp_path, name):
    g = generate(name)
    path = tmp_path / "g.txt"
    write_graph(g, path)
    h = read_graph(path)
    assert np.array_equal(g.adj, h.adj) and h.is_integer


def test_round_trip_float_weights(tmp_path):
    a = np.zeros((3, 3))
    a[0, 1] = a[1, 0] = 0.1
    a[1, 2] = a[2, 1] = 1 / 3
    g = WeightedGraph(a)
    write_graph(g, tmp_path / "f.txt")
    assert np.array_equal(read_graph(tmp_path / "f.txt").adj, a)


# --- properties -------------------------------------------------------------

@st.composite
def graph_and_perm(draw):
    n = draw(st.integers(1, 8))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    w = rng.integers(0, 3, size=(n, n)).astype(float)
    a = np.triu(w, 1)
    return WeightedGraph(a + a.T), Permutation.random(n, rng)


@settings(max_examples=100, deadline=None)
@given(graph_and_perm())
def test_permuted_graph_verifies(gp):
    g, p = gp
    b = apply_permutation(g, p)
    assert verify_isomorphism(g, b, p)
    assert apply_permutation(b, p.inverse()) == g


@settings(max_examples=50, deadline=None)
@given(graph_and_perm())
def test_write_read_lossless(tmp_path_factory, gp):
    g, _ = gp
    path = tmp_path_factory.mktemp("io") / "g.txt"
    write_graph(g, path)
    assert read_graph(path) == g


@settings(max_examples=30, deadline=None)
@given(st.sampled_from([5, 13, 17, 29, 37, 41]))
def test_paley_degree_property(q):
    assert set(generate("paley", q=q).degrees()) == {(q - 1) // 2}
