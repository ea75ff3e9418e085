import numpy as np
import pytest

from fadin.discretization import DiscreteGrid, DiscretizedCounts
from fadin.errors import ConfigurationError, ResourceLimitError
from fadin.precompute import precompute, precompute_naive


def random_instance(rng, p=None, G=None, L=None):
    p = p or int(rng.integers(1, 4))
    G = G or int(rng.integers(20, 400))
    L = L or int(rng.integers(1, min(G, 20) + 1))
    delta = 0.1
    grid = DiscreteGrid(delta=delta, T=G * delta, W=L * delta)
    assert grid.G == G and grid.L == L
    z = rng.poisson(rng.uniform(0.05, 0.6), size=(p, G + 1))
    return DiscretizedCounts.from_dense(z), grid


class TestSingleEvent:
    def setup_method(self):
        z = np.zeros((1, 11), dtype=int)
        z[0, 5] = 1
        self.counts = DiscretizedCounts.from_dense(z)
        self.grid = DiscreteGrid(delta=1.0, T=10.0, W=6.0)

    @pytest.mark.parametrize("method", ["dense", "sparse"])
    def test_phi_g_single_shifted_copy(self, method):
        pre = precompute(self.counts, self.grid, method=method)
        # one event at bin 5: the shifted copy reaches the grid iff 5 + tau <= G
        expected = np.array([1.0 if 5 + tau <= 10 else 0.0 for tau in range(1, 7)])
        assert np.array_equal(pre.phi_g[0], expected)

    @pytest.mark.parametrize("method", ["dense", "sparse"])
    def test_psi_single_event_diagonal(self, method):
        pre = precompute(self.counts, self.grid, method=method)
        psi = pre.psi[0, 0]
        for tau in range(1, 7):
            for tau2 in range(1, 7):
                expected = 1.0 if tau == tau2 and 5 + tau <= 10 else 0.0
                assert psi[tau - 1, tau2 - 1] == expected


class TestOracleEquivalence:
    @pytest.mark.parametrize("method", ["dense", "sparse"])
    def test_matches_naive_exactly(self, method, rng):
        for _ in range(25):
            counts, grid = random_instance(rng)
            ref = precompute_naive(counts, grid)
            got = precompute(counts, grid, method=method)
            assert np.array_equal(ref.phi_g, got.phi_g)
            assert np.array_equal(ref.phi_ev, got.phi_ev)
            assert np.array_equal(ref.psi, got.psi)

    def test_dense_and_sparse_agree_on_larger_instance(self, rng):
        counts, grid = random_instance(rng, p=2, G=2000, L=40)
        dense = precompute(counts, grid, method="dense")
        sparse = precompute(counts, grid, method="sparse")
        assert np.array_equal(dense.phi_g, sparse.phi_g)
        assert np.array_equal(dense.phi_ev, sparse.phi_ev)
        assert np.array_equal(dense.psi_flat, sparse.psi_flat)


class TestInvariants:
    def test_psi_symmetry(self, rng):
        counts, grid = random_instance(rng, p=3, G=300, L=12)
        pre = precompute(counts, grid)
        psi = pre.psi
        assert np.array_equal(psi, np.transpose(psi, (1, 0, 3, 2)))
        assert np.array_equal(pre.psi_flat, pre.psi_flat.T)

    def test_phi_g_bounded_by_event_count(self, rng):
        counts, grid = random_instance(rng, p=2)
        pre = precompute(counts, grid)
        for j in range(2):
            assert np.all(pre.phi_g[j] >= 0)
            assert np.all(pre.phi_g[j] <= counts.n_events[j])

    def test_adding_an_event_never_decreases_entries(self, rng):
        counts, grid = random_instance(rng, p=2, G=150, L=10)
        z = counts.to_dense()
        before = precompute(counts, grid)
        z2 = z.copy()
        z2[0, 60] += 1
        after = precompute(DiscretizedCounts.from_dense(z2), grid)
        assert np.all(after.phi_g >= before.phi_g)
        assert np.all(after.phi_ev >= before.phi_ev)
        assert np.all(after.psi_flat >= before.psi_flat)


class TestGuards:
    def test_memory_cap(self):
        z = np.zeros((1, 20_001), dtype=int)
        z[0, 3] = 1
        counts = DiscretizedCounts.from_dense(z)
        grid = DiscreteGrid(delta=0.01, T=200.0, W=20.0)  # L = 2000
        with pytest.raises(ResourceLimitError):
            precompute(counts, grid, mem_cap_bytes=10_000_000)

    def test_support_longer_than_grid_rejected(self):
        z = np.zeros((1, 6), dtype=int)
        counts = DiscretizedCounts.from_dense(z)
        grid = DiscreteGrid(delta=1.0, T=5.0, W=9.0)
        with pytest.raises(ConfigurationError):
            precompute(counts, grid)

    def test_grid_mismatch_rejected(self, rng):
        counts, _ = random_instance(rng, p=1, G=100, L=5)
        other = DiscreteGrid(delta=0.1, T=20.0, W=0.5)
        with pytest.raises(ConfigurationError):
            precompute(counts, other)
