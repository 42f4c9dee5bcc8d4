import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import subspace_angles

from opennet.errors import UndefinedIndexError, ValidationError
from opennet.fixtures import load_fixture
from opennet.network import (
    UNREACHABLE,
    NetworkSpec,
    ShiftPolicy,
    build_adjacency,
    build_system,
    detect_dag,
    henrici_index,
    shortest_path_matrix,
    shortest_unweighted_path,
    stabilize,
    structural_report,
)

from conftest import chain_spec, random_network


class TestNetworkSpec:
    def test_duplicate_label(self):
        with pytest.raises(ValidationError, match="duplicate"):
            NetworkSpec(("a", "a"), (), (0,))

    def test_endpoint_out_of_range(self):
        with pytest.raises(ValidationError, match="outside"):
            NetworkSpec(("a", "b"), ((0, 2, 1.0),), (0,))

    def test_negative_weight(self):
        with pytest.raises(ValidationError):
            NetworkSpec(("a", "b"), ((0, 1, -1.0),), (0,))

    def test_empty_or_duplicate_inputs(self):
        with pytest.raises(ValidationError, match="empty"):
            NetworkSpec(("a", "b"), (), ())
        with pytest.raises(ValidationError, match="duplicates"):
            NetworkSpec(("a", "b"), (), (0, 0))

    def test_outputs_default_to_all(self):
        spec = NetworkSpec(("a", "b", "c"), (), (0,))
        assert spec.output_set == (0, 1, 2)


class TestAdjacency:
    def test_single_edge(self):
        spec = NetworkSpec(("0", "1"), ((0, 1, 2.5),), (0,))
        np.testing.assert_array_equal(build_adjacency(spec), [[0, 0], [2.5, 0]])

    def test_empty(self):
        spec = NetworkSpec(("a", "b", "c"), (), (0,))
        np.testing.assert_array_equal(build_adjacency(spec), np.zeros((3, 3)))

    def test_chain_subdiagonal(self):
        a0 = build_adjacency(chain_spec(5))
        np.testing.assert_array_equal(a0, np.eye(5, k=-1))

    def test_parallel_edges_summed_and_loops_on_diagonal(self):
        spec = NetworkSpec(("a", "b"), ((0, 1, 1.0), (0, 1, 0.5), (1, 1, 2.0)), (0,))
        np.testing.assert_array_equal(build_adjacency(spec), [[0, 0], [1.5, 2.0]])


class TestStabilize:
    def test_scalar(self):
        a, c, abscissa = stabilize(np.zeros((1, 1)))
        assert a.tolist() == [[-1.0]] and c == 1.0 and abscissa == -1.0

    def test_margin_1000(self):
        a, c, abscissa = stabilize(np.zeros((3, 3)), ShiftPolicy(1000.0))
        np.testing.assert_array_equal(a, -1000.0 * np.eye(3))
        assert abscissa == -1000.0

    def test_random_nonnegative(self, rng):
        a0 = rng.uniform(0, 1, (5, 5))
        a, c, _ = stabilize(a0)
        assert np.max(np.linalg.eigvals(a).real) == pytest.approx(-1.0, abs=1e-9)
        np.testing.assert_allclose(a, a0 - c * np.eye(5), rtol=0, atol=0)

    def test_chain_exact_abscissa(self):
        a, c, _ = stabilize(build_adjacency(chain_spec(6)))
        assert c == 1.0
        np.testing.assert_array_equal(np.diag(a), -np.ones(6))

    def test_errors(self):
        with pytest.raises(ValidationError):
            stabilize(np.array([[np.nan]]))
        with pytest.raises(ValidationError):
            ShiftPolicy(0.0)
        with pytest.raises(ValidationError):
            ShiftPolicy(-1.0)

    def test_eigenvectors_preserved(self, rng):
        for _ in range(20):
            a0 = rng.normal(size=(6, 6))
            a, c, _ = stabilize(a0)
            lam0, v0 = np.linalg.eig(a0)
            lam, v = np.linalg.eig(a)
            for k in range(6):
                j = np.argmin(np.abs(lam - (lam0[k] - c)))
                assert abs(lam[j] - (lam0[k] - c)) < 1e-9
                assert np.max(subspace_angles(v0[:, [k]], v[:, [j]])) < 1e-8

    def test_system_versors(self):
        spec = NetworkSpec(("a", "b", "c"), ((0, 1, 1.0),), (0, 2), (1,))
        sys = build_system(spec)
        assert sys.b_matrix.shape == (3, 2) and sys.c_matrix.shape == (1, 3)
        np.testing.assert_array_equal(sys.b_matrix.sum(axis=0), [1, 1])
        np.testing.assert_array_equal(sys.c_matrix.sum(axis=1), [1])
        assert set(np.unique(sys.b_matrix)) == {0.0, 1.0}
        assert not sys.a_matrix.flags.writeable


class TestHenrici:
    def test_symmetric(self, rng):
        m = rng.normal(size=(6, 6))
        assert henrici_index(m + m.T) == pytest.approx(0.0, abs=1e-10)

    def test_nilpotent(self):
        assert henrici_index(np.array([[0.0, 1.0], [0.0, 0.0]])) == 1.0

    def test_upper_triangular_example(self):
        # |A|_F^2 = 6, sum |lambda|^2 = 2
        assert henrici_index(np.array([[-1.0, 2.0], [0.0, -1.0]])) == pytest.approx(
            np.sqrt(4 / 6), rel=1e-12
        )

    def test_circulant_normal(self, rng):
        c = rng.uniform(size=7)
        circ = np.array([np.roll(c, k) for k in range(7)])
        assert henrici_index(circ) < 1e-10

    def test_zero_matrix(self):
        with pytest.raises(UndefinedIndexError):
            henrici_index(np.zeros((3, 3)))

    def test_matches_eigenvalue_definition(self, rng):
        for _ in range(50):
            a = rng.normal(size=(6, 6))
            lam = np.linalg.eigvals(a)
            direct = np.sqrt(np.sum(a * a) - np.sum(np.abs(lam) ** 2)) / np.linalg.norm(a)
            assert henrici_index(a) == pytest.approx(direct, rel=1e-8)

    def test_bounds_random(self, rng):
        for _ in range(1000):
            n = int(rng.integers(1, 8))
            a = rng.normal(size=(n, n)) * (rng.random((n, n)) < 0.6)
            if not np.any(a):
                continue
            assert 0.0 <= henrici_index(a) <= 1.0


class TestDag:
    def test_chain(self):
        ok, order = detect_dag(chain_spec(5))
        assert ok and order == (0, 1, 2, 3, 4)

    def test_two_cycle(self):
        spec = NetworkSpec(("a", "b"), ((0, 1, 1.0), (1, 0, 1.0)), (0,))
        assert detect_dag(spec) == (False, None)

    def test_self_loop_ignored(self):
        spec = NetworkSpec(("a", "b"), ((0, 0, 3.0), (0, 1, 1.0)), (0,))
        assert detect_dag(spec)[0]

    def test_fig4(self):
        assert detect_dag(load_fixture("fig4_dag"))[0]

    def test_order_triangularizes(self, rng):
        for _ in range(50):
            spec = random_network(rng, 8, dag=True)
            perm = rng.permutation(8)
            relabeled = NetworkSpec(
                spec.node_ids,
                tuple((int(perm[s]), int(perm[t]), w) for s, t, w in spec.edges),
                (0,),
            )
            ok, order = detect_dag(relabeled)
            assert ok
            a0 = build_adjacency(relabeled)[np.ix_(order, order)]
            assert not np.any(np.triu(a0, k=1))


class TestShortestPath:
    def test_chain(self):
        assert shortest_unweighted_path(chain_spec(6), 0, 5) == 5

    def test_fig5(self):
        spec = load_fixture("fig5_weighted")
        assert shortest_unweighted_path(spec, spec.index("in"), spec.index("out")) == 2

    def test_sink_unreachable(self):
        spec = chain_spec(3)
        assert shortest_unweighted_path(spec, 2, 0) == UNREACHABLE
        assert shortest_unweighted_path(spec, 2, 2) == 0

    def test_matrix(self):
        spec = chain_spec(4).with_roles((0, 1), (0, 3))
        np.testing.assert_array_equal(shortest_path_matrix(spec), [[0, UNREACHABLE], [3, 2]])

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 10_000), st.floats(0.01, 100.0))
    def test_weight_rescaling_invariant(self, seed, gamma):
        rng = np.random.default_rng(seed)
        spec = random_network(rng, 7, density=0.25)
        scaled = NetworkSpec(
            spec.node_ids, tuple((s, t, w * gamma) for s, t, w in spec.edges), spec.input_set
        )
        for s in range(7):
            for t in range(7):
                assert shortest_unweighted_path(spec, s, t) == shortest_unweighted_path(scaled, s, t)


def test_structural_report_chain():
    rep = structural_report(chain_spec(4))
    assert rep.is_dag and rep.henrici_index == 1.0
    assert rep.shortest_paths.tolist() == [[3]]
