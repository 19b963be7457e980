import numpy as np
import pytest

from webnav import (fit_power_law, generate_scale_free, load_edge_list,
                    write_edge_list)
from webnav.errors import ConfigurationError, DataError, ParseError


@pytest.fixture(scope="module")
def small_graph():
    return generate_scale_free(3000, 3, 2.1, seed=42)


class TestGenerate:
    def test_tree_growth_edge_count(self):
        # m=1 growth is a tree: n-1 undirected edges, 2(n-1) entries
        g = generate_scale_free(4, 1, gamma=2.5, seed=0)
        assert g.n == 4
        assert g.n_edges == 6

    def test_attachment_exponent_relation(self):
        # gamma = 1 + 1/a  =>  a = 1/(gamma-1); check via the degree tail of
        # a moderate instance (the full-scale check lives in acceptance)
        g = generate_scale_free(30_000, 3, 2.1, seed=5)
        fit = fit_power_law(g.degrees().tolist(), xmin=20)
        assert fit.alpha == pytest.approx(2.206, abs=1e-2)
        assert abs(fit.alpha - 2.1) < 0.25

    def test_symmetry_exhaustive(self, small_graph):
        assert small_graph.is_symmetric()

    def test_in_degree_equals_out_degree(self, small_graph):
        assert np.array_equal(small_graph.in_degrees(), small_graph.degrees())

    def test_no_dangling_nodes(self, small_graph):
        assert small_graph.degrees().min() >= 1

    def test_no_self_loops_or_duplicates(self, small_graph):
        for u in range(small_graph.n):
            nbrs = small_graph.out_neighbors(u)
            assert u not in nbrs
            assert len(set(nbrs.tolist())) == len(nbrs)

    def test_connected(self, small_graph):
        from scipy.sparse import csr_matrix
        from scipy.sparse.csgraph import connected_components
        n = small_graph.n
        src = np.repeat(np.arange(n), small_graph.degrees())
        adj = csr_matrix((np.ones(src.size), (src, small_graph.neighbors)),
                         shape=(n, n))
        n_comp, _ = connected_components(adj, directed=False)
        assert n_comp == 1

    def test_deterministic_for_seed(self):
        a = generate_scale_free(500, 2, 2.1, seed=9)
        b = generate_scale_free(500, 2, 2.1, seed=9)
        assert np.array_equal(a.offsets, b.offsets)
        assert np.array_equal(a.neighbors, b.neighbors)
        c = generate_scale_free(500, 2, 2.1, seed=10)
        assert not np.array_equal(a.neighbors, c.neighbors)

    def test_parameter_validation(self):
        with pytest.raises(ConfigurationError):
            generate_scale_free(3, 3, 2.1, seed=1)
        with pytest.raises(ConfigurationError):
            generate_scale_free(100, 3, 2.0, seed=1)
        with pytest.raises(ConfigurationError):
            generate_scale_free(100, 0, 2.1, seed=1)

    def test_out_neighbors_bounds(self, small_graph):
        with pytest.raises(IndexError):
            small_graph.out_neighbors(small_graph.n)
        with pytest.raises(IndexError):
            small_graph.out_degree(-1)


class TestEdgeListIO:
    def test_cycle_is_one_scc(self, tmp_path):
        path = tmp_path / "cycle.txt"
        path.write_text("0 1\n1 2\n2 0\n")
        g = load_edge_list(path)
        assert g.n == 3
        assert g.out_neighbors(0).tolist() == [1]

    def test_cycle_symmetrized(self, tmp_path):
        path = tmp_path / "cycle.txt"
        path.write_text("0 1\n1 2\n2 0\n")
        g = load_edge_list(path, symmetrize=True)
        assert g.out_neighbors(0).tolist() == [1, 2]
        assert g.is_symmetric()

    def test_single_edge_has_no_scc(self, tmp_path):
        path = tmp_path / "one.txt"
        path.write_text("0 1\n")
        with pytest.raises(DataError):
            load_edge_list(path, symmetrize=False)

    def test_single_edge_symmetrized_ok(self, tmp_path):
        path = tmp_path / "one.txt"
        path.write_text("0 1\n")
        g = load_edge_list(path, symmetrize=True)
        assert g.n == 2

    def test_comments_and_blanks_ignored(self, tmp_path):
        path = tmp_path / "c.txt"
        path.write_text("# a comment\n\n0 1\n1 0\n")
        assert load_edge_list(path).n == 2

    def test_malformed_line_reports_number(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("0 1\n1 0\nnot an edge\n")
        with pytest.raises(ParseError, match="line 3"):
            load_edge_list(path)

    def test_non_integer_rejected(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("0 x\n")
        with pytest.raises(ParseError, match="line 1"):
            load_edge_list(path)

    def test_scc_extraction_drops_appendage(self, tmp_path):
        # 0<->1<->2 strongly connected; 3 only reachable, not returning
        path = tmp_path / "scc.txt"
        path.write_text("0 1\n1 0\n1 2\n2 1\n2 3\n")
        g = load_edge_list(path)
        assert g.n == 3
        assert g.degrees().min() >= 1

    def test_ids_densified_in_order(self, tmp_path):
        path = tmp_path / "sparse.txt"
        path.write_text("10 20\n20 10\n20 30\n30 20\n")
        g = load_edge_list(path)
        assert g.n == 3
        # 10 -> 0, 20 -> 1, 30 -> 2
        assert g.out_neighbors(1).tolist() == [0, 2]

    def test_roundtrip_byte_identical(self, tmp_path):
        g = generate_scale_free(1000, 3, 2.1, seed=17)
        first = tmp_path / "first.txt"
        second = tmp_path / "second.txt"
        write_edge_list(g, first)
        reloaded = load_edge_list(first)
        write_edge_list(reloaded, second)
        assert first.read_bytes() == second.read_bytes()

    def test_duplicates_and_self_loops_dropped(self, tmp_path):
        path = tmp_path / "dup.txt"
        path.write_text("0 1\n0 1\n1 0\n1 1\n")
        g = load_edge_list(path)
        assert g.n == 2
        assert g.out_neighbors(0).tolist() == [1]

    def test_empty_file_rejected(self, tmp_path):
        path = tmp_path / "empty.txt"
        path.write_text("# nothing\n")
        with pytest.raises(DataError):
            load_edge_list(path)
