import numpy as np
import pytest

from fadin.discretization import (
    DiscreteGrid,
    DiscretizedCounts,
    dump_counts_csv,
    project,
    project_times,
)
from fadin.errors import ConfigurationError, DataError
from fadin.simulation import EventSequences


class TestGrid:
    def test_basic_sizes(self):
        grid = DiscreteGrid(delta=0.01, T=10.0, W=1.0)
        assert grid.G == 1000
        assert grid.L == 100
        assert grid.horizon == pytest.approx(10.0)

    def test_non_multiple_horizon_rejected(self):
        with pytest.raises(ConfigurationError):
            DiscreteGrid(delta=0.3, T=10.0, W=1.0)

    def test_support_shorter_than_step_rejected(self):
        with pytest.raises(ConfigurationError):
            DiscreteGrid(delta=0.2, T=10.0, W=0.1)

    def test_float_noise_in_ratio_is_absorbed(self):
        grid = DiscreteGrid(delta=0.1, T=1000.1, W=1.0)
        assert grid.G == 10001


class TestProjectTimes:
    def test_nearest_grid_point(self):
        grid = DiscreteGrid(delta=0.01, T=1.0, W=0.1)
        assert project_times(np.array([0.234]), grid)[0] == 23

    def test_half_tie_rounds_up(self):
        grid = DiscreteGrid(delta=0.01, T=1.0, W=0.1)
        assert project_times(np.array([0.235]), grid)[0] == 24

    def test_counts_accumulate_in_one_bin(self):
        grid = DiscreteGrid(delta=0.01, T=1.0, W=0.1)
        ev = EventSequences(events=[np.array([0.101, 0.1049])], T=1.0)
        counts = project(ev, grid)
        z = counts.to_dense()
        assert z[0, 10] == 2
        assert counts.n_total == 2

    def test_event_at_horizon_maps_to_last_bin(self):
        grid = DiscreteGrid(delta=0.25, T=1.0, W=0.5)
        assert project_times(np.array([1.0]), grid)[0] == grid.G

    def test_out_of_range_rejected(self):
        grid = DiscreteGrid(delta=0.25, T=1.0, W=0.5)
        with pytest.raises(DataError):
            project_times(np.array([1.5]), grid)
        with pytest.raises(DataError):
            project_times(np.array([-0.25]), grid)


class TestProjectProperties:
    def test_conservation_and_error_bound(self, rng):
        for _ in range(30):
            T = float(rng.integers(5, 50))
            delta = float(rng.choice([0.5, 0.25, 0.1, 0.05, 0.02]))
            grid = DiscreteGrid(delta=delta, T=T, W=2 * delta)
            times = np.sort(rng.uniform(0.0, T, size=rng.integers(1, 400)))
            ev = EventSequences(events=[times], T=T)
            counts = project(ev, grid)
            assert counts.n_events[0] == len(times)
            s = project_times(times, grid)
            assert np.all(np.abs(s * delta - times) <= delta / 2 + 1e-12)

    def test_refining_grid_never_increases_projection_error(self, rng):
        T = 16.0
        times = np.sort(rng.uniform(0.0, T, 300))
        for delta in (0.5, 0.25, 0.125):
            coarse = DiscreteGrid(delta=delta, T=T, W=1.0)
            fine = DiscreteGrid(delta=delta / 2, T=T, W=1.0)
            err_coarse = np.abs(project_times(times, coarse) * delta - times)
            err_fine = np.abs(project_times(times, fine) * (delta / 2) - times)
            assert np.all(err_fine <= err_coarse + 1e-12)


class TestCounts:
    def test_dense_round_trip(self, rng):
        z = rng.poisson(0.4, size=(3, 50))
        counts = DiscretizedCounts.from_dense(z)
        assert np.array_equal(counts.to_dense(), z)
        assert counts.p == 3
        assert np.array_equal(counts.n_events, z.sum(axis=1))

    def test_negative_counts_rejected(self):
        with pytest.raises(DataError):
            DiscretizedCounts.from_dense(np.array([[1, -1]]))

    def test_debug_dump(self, tmp_path):
        counts = DiscretizedCounts.from_dense(np.array([[0, 2, 0, 1]]))
        out = tmp_path / "z.csv"
        dump_counts_csv(counts, out)
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "process,s,count"
        assert lines[1:] == ["0,1,2", "0,3,1"]
