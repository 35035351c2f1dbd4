import itertools
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from graphpir.errors import GraphError, TooLargeError
from graphpir.graphcore import (
    FileAssignment,
    Graph,
    automorphism_group,
    basis_assignments,
    build_family,
    compose,
    find_hamiltonian_cycle,
    incidence_sums,
    is_hamiltonian_cycle,
    matching_number,
    max_degree,
    maximum_matching,
    parse_edge_list,
)


def brute_force_matching_number(g: Graph) -> int:
    """Largest vertex-disjoint edge subset, by enumerating all subsets."""
    best = 0
    for r in range(g.n_edges + 1):
        for subset in itertools.combinations(g.edges, r):
            ends = [v for e in subset for v in e]
            if len(ends) == len(set(ends)):
                best = max(best, r)
    return best


@st.composite
def small_graphs(draw, max_vertices=7, max_edges=None):
    n = draw(st.integers(2, max_vertices))
    pairs = list(itertools.combinations(range(1, n + 1), 2))
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True, max_size=max_edges))
    return Graph(n, tuple(chosen))


class TestFamilies:
    def test_star(self):
        g = build_family("star:5")
        assert (g.n_vertices, g.n_edges) == (5, 4)
        assert all(5 in e for e in g.edges)
        assert [g.edge(i) for i in range(1, 5)] == [(1, 5), (2, 5), (3, 5), (4, 5)]
        assert g.star_center() == 5

    def test_wheel(self):
        g = build_family("wheel:8")
        assert (g.n_vertices, g.n_edges) == (8, 14)
        assert g.degree(8) == 7
        assert all(g.degree(v) == 3 for v in range(1, 8))

    def test_complete_and_bipartite(self):
        assert build_family("complete:4").n_edges == 6
        g = build_family("kbipartite:3,4")
        assert (g.n_vertices, g.n_edges) == (7, 12)

    def test_cycle_edges(self):
        g = build_family("cycle:4")
        assert g.edges == ((1, 2), (2, 3), (3, 4), (1, 4))

    @pytest.mark.parametrize("spec", ["star:1", "cycle:2", "complete:1", "wheel:7", "wheel:2", "kbipartite:0,3",
                                      "kbipartite:3", "blob:3", "star", "star:x", "edges:1-1", "edges:1-2,2-1",
                                      "edges:12"])
    def test_bad_specs(self, spec):
        with pytest.raises(GraphError):
            build_family(spec)

    def test_edge_list_text_round_trip(self, tmp_path):
        g = build_family("wheel:6")
        path = tmp_path / "w.txt"
        path.write_text("# a wheel\n" + g.to_edge_list_text())
        h = build_family(f"file:{path}")
        assert h.edges == g.edges and h.n_vertices == g.n_vertices

    def test_header_sets_isolated_vertices(self):
        g = parse_edge_list("n 5\n1 2\n")
        assert g.n_vertices == 5 and g.degree(5) == 0

    @pytest.mark.parametrize("text", ["1 2 3\n", "1\n", "a b\n", "n\n", ""])
    def test_malformed_edge_lists(self, text):
        with pytest.raises(GraphError):
            parse_edge_list(text)

    def test_rejects_out_of_range_endpoint(self):
        with pytest.raises(GraphError):
            parse_edge_list("n 3\n1 4\n")


class TestGraph:
    def test_lookup_both_ways(self):
        g = build_family("complete:4")
        for k, (u, v) in enumerate(g.edges, start=1):
            assert g.edge_index(u, v) == g.edge_index(v, u) == k
        assert g.edge_index(1, 1) is None

    def test_incident_files_of_k3(self):
        g = build_family("complete:3")
        assert g.incident_files(1) == (1, 2)

    def test_relabel_of_automorphism_is_same_edge_set(self):
        g = build_family("cycle:5")
        h = g.relabel((2, 3, 4, 5, 1))
        assert set(h.edges) == set(g.edges)


class TestParameters:
    @pytest.mark.parametrize("spec,delta", [("star:5", 4), ("wheel:8", 7), ("kbipartite:3,4", 4), ("cycle:6", 2)])
    def test_max_degree(self, spec, delta):
        assert max_degree(build_family(spec)) == delta

    @pytest.mark.parametrize("spec,nu", [("star:3", 1), ("star:9", 1), ("kbipartite:3,4", 3), ("cycle:5", 2),
                                         ("wheel:8", 4), ("complete:5", 2)])
    def test_matching_number(self, spec, nu):
        assert matching_number(build_family(spec)) == nu

    def test_matching_is_a_matching(self):
        g = build_family("wheel:8")
        chosen = [g.edge(k) for k in maximum_matching(g)]
        ends = [v for e in chosen for v in e]
        assert len(ends) == len(set(ends))

    def test_matching_limit(self):
        with pytest.raises(TooLargeError):
            maximum_matching(build_family("complete:12"), edge_limit=20)

    @given(small_graphs(max_edges=6))
    def test_matching_matches_enumeration(self, g):
        assert matching_number(g) == brute_force_matching_number(g)

    @given(small_graphs())
    def test_matching_range(self, g):
        nu = matching_number(g)
        assert nu <= g.n_vertices // 2
        assert (nu >= 1) == (g.n_edges > 0)

    def test_incidence_sums(self):
        g = build_family("complete:3")
        assert incidence_sums(g, [1, 2, 4]) == [3, 5, 6]


class TestAutomorphisms:
    @pytest.mark.parametrize("spec,order,transitive", [("complete:3", 6, True), ("star:4", 6, False),
                                                       ("cycle:4", 8, True), ("cycle:5", 10, True),
                                                       ("wheel:6", 10, False), ("kbipartite:3,3", 72, True)])
    def test_group(self, spec, order, transitive):
        grp = automorphism_group(build_family(spec))
        assert len(grp) == order
        assert grp.vertex_transitive is transitive

    def test_limit(self):
        with pytest.raises(TooLargeError):
            automorphism_group(build_family("cycle:9"))

    @given(small_graphs(max_vertices=6))
    def test_group_axioms(self, g):
        grp = automorphism_group(g)
        identity = tuple(range(1, g.n_vertices + 1))
        assert identity in grp
        assert grp.is_closed()
        for f in grp:
            assert sorted(g.relabel(f).edges) == sorted(g.edges)
            inverse = tuple(sorted(range(1, g.n_vertices + 1), key=lambda v: f[v - 1]))
            assert compose(f, inverse) == identity


class TestHamiltonian:
    def test_cycle_is_its_own(self):
        g = build_family("cycle:5")
        cyc = find_hamiltonian_cycle(g)
        assert is_hamiltonian_cycle(g, cyc)

    def test_star_has_none(self):
        assert find_hamiltonian_cycle(build_family("star:4")) is None

    def test_complete(self):
        g = build_family("complete:4")
        assert is_hamiltonian_cycle(g, find_hamiltonian_cycle(g))

    def test_petersen_like_bipartite_unbalanced(self):
        assert find_hamiltonian_cycle(build_family("kbipartite:2,3")) is None

    @given(small_graphs(max_vertices=6))
    def test_output_is_valid(self, g):
        cyc = find_hamiltonian_cycle(g)
        if cyc is not None:
            assert sorted(cyc) == list(g.vertices())
            assert is_hamiltonian_cycle(g, cyc)


class TestFiles:
    def test_shape_checks(self):
        with pytest.raises(GraphError):
            FileAssignment(3, ((0, 1),))
        with pytest.raises(GraphError):
            FileAssignment(2, ((0, 2),))

    def test_local_view_of_k3_server(self):
        g = build_family("complete:3")
        files = FileAssignment.random(3, 4, random.Random(1))
        assert set(files.local(g, 1)) == {1, 2}

    def test_basis(self):
        labels = [label for label, _ in basis_assignments(4, 4)]
        assert len(labels) == 17 and labels[0] == "zero"

    def test_xor(self):
        rng = random.Random(5)
        a, b = FileAssignment.random(3, 5, rng), FileAssignment.random(3, 5, rng)
        assert a.xor(b).xor(b) == a
