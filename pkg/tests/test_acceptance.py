"""End-to-end acceptance criteria.

Each test exercises one stated criterion at its stated tolerance and
records a PASS/FAIL line that pytest prints in its terminal summary.
The full set takes roughly half an hour on two laptop cores; the heavy
scenarios (3, 4, 5, 7) dominate.
"""

import time

import numpy as np
import pytest
from scipy.stats import kstest

from fadin.discretization import DiscreteGrid, project
from fadin.errors import FadinError
from fadin.experiments import (
    ExperimentSpec,
    bench_gradient_iteration,
    bench_precompute_scaling,
    median_errors_by,
    prop2_slopes,
    run_consistency,
    run_l2_vs_ll,
    run_prop2_rate,
    run_w_sensitivity,
    summarize_l2_vs_ll,
)
from fadin.kernels import FAMILIES, TruncatedExponential, TruncatedGaussian
from fadin.precompute import precompute
from fadin.simulation import EventSequences, HawkesModel, compensator_increments, simulate
from fadin.solver import (
    FitConfig,
    grad_eta,
    grad_ll_discrete,
    grad_mu,
    loss_l2,
    loss_l2_direct,
    loss_ll_discrete,
)

from conftest import record_acceptance


def random_feasible_kernel(family, rng, W):
    cls = FAMILIES[family]
    if family == "truncated_gaussian":
        return cls(
            alpha=rng.uniform(0.05, 0.9),
            m=rng.uniform(0.15, 0.85) * W,
            sigma=rng.uniform(0.08, 0.35) * W,
            W=W,
        )
    if family == "raised_cosine":
        sigma = rng.uniform(0.08, 0.35) * W
        return cls(
            alpha=rng.uniform(0.05, 0.9),
            u=rng.uniform(0.02, max(W - 2 * sigma - 0.02, 0.03)),
            sigma=sigma,
            W=W,
        )
    return cls(alpha=rng.uniform(0.05, 0.9), gamma=rng.uniform(0.4, 6.0), W=W)


def _verdict(num, name, ok, detail):
    line = f"criterion {num} ({name}): {'PASS' if ok else 'FAIL'} - {detail}"
    record_acceptance(line)
    return line


class TestCriterion1OracleEquivalence:
    def test_precomputed_loss_equals_direct_convolution(self):
        rng = np.random.default_rng(101)
        families = sorted(FAMILIES)
        t0 = time.perf_counter()
        worst = 0.0
        for trial in range(100):
            p = int(rng.integers(1, 4))
            G = int(rng.integers(60, 2001))
            L = int(rng.integers(2, min(G // 2, 50) + 1))
            delta = 0.05
            T, W = G * delta, L * delta
            grid = DiscreteGrid(delta=delta, T=T, W=W)
            events = EventSequences(
                events=[
                    np.sort(rng.uniform(0.0, T, size=rng.integers(5, 300)))
                    for _ in range(p)
                ],
                T=T,
            )
            counts = project(events, grid)
            family = families[trial % 3]
            model = HawkesModel(
                baseline=rng.uniform(0.1, 1.0, p),
                kernels=[
                    [random_feasible_kernel(family, rng, W) for _ in range(p)]
                    for _ in range(p)
                ],
            )
            method = "sparse" if trial % 2 else "dense"
            pre = precompute(counts, grid, method=method)
            a = loss_l2(model, pre, grid)
            b = loss_l2_direct(model, counts, grid)
            worst = max(worst, abs(a - b) / abs(b))
        elapsed = time.perf_counter() - t0
        ok = worst <= 1e-10 and elapsed < 60.0
        _verdict(
            1, "oracle equivalence", ok,
            f"worst rel diff {worst:.2e} over 100 instances in {elapsed:.1f}s",
        )
        assert worst <= 1e-10
        assert elapsed < 60.0


class TestCriterion2GradientCorrectness:
    def test_analytic_gradients_match_finite_differences(self):
        rng = np.random.default_rng(202)
        t0 = time.perf_counter()
        eps = 1e-6
        worst = 0.0

        def rel(a, b):
            return abs(a - b) / max(abs(a), abs(b), 1e-9)

        for family in sorted(FAMILIES):
            T, delta, W = 60.0, 0.05, 1.0
            grid = DiscreteGrid(delta=delta, T=T, W=W)
            sim_kernel = random_feasible_kernel(family, np.random.default_rng(1), W)
            sim_model = HawkesModel(
                baseline=np.array([0.7]),
                kernels=[[sim_kernel.with_params(
                    [0.4, *sim_kernel.params[1:]])]],
            )
            events = simulate(sim_model, T, seed=6)
            counts = project(events, grid)
            pre = precompute(counts, grid)
            for _ in range(50):
                mu = rng.uniform(0.2, 1.2, 1)
                kern = random_feasible_kernel(family, rng, W)
                model = HawkesModel(baseline=mu, kernels=[[kern]])
                gm = grad_mu(model, pre, grid)
                ge = grad_eta(model, pre, grid)
                gl_mu, gl_eta = grad_ll_discrete(model, counts, grid)

                up, dn = mu.copy(), mu.copy()
                up[0] += eps
                dn[0] -= eps
                fd = (
                    loss_l2(HawkesModel(up, [[kern]]), pre, grid)
                    - loss_l2(HawkesModel(dn, [[kern]]), pre, grid)
                ) / (2 * eps)
                worst = max(worst, rel(gm[0], fd))
                fd = (
                    loss_ll_discrete(HawkesModel(up, [[kern]]), counts, grid)
                    - loss_ll_discrete(HawkesModel(dn, [[kern]]), counts, grid)
                ) / (2 * eps)
                worst = max(worst, rel(gl_mu[0], fd))
                for q in range(kern.n_params):
                    pu, pd = kern.params, kern.params
                    pu[q] += eps
                    pd[q] -= eps
                    ku, kd = kern.with_params(pu), kern.with_params(pd)
                    fd = (
                        loss_l2(HawkesModel(mu, [[ku]]), pre, grid)
                        - loss_l2(HawkesModel(mu, [[kd]]), pre, grid)
                    ) / (2 * eps)
                    worst = max(worst, rel(ge[0][0][q], fd))
                    fd = (
                        loss_ll_discrete(HawkesModel(mu, [[ku]]), counts, grid)
                        - loss_ll_discrete(HawkesModel(mu, [[kd]]), counts, grid)
                    ) / (2 * eps)
                    worst = max(worst, rel(gl_eta[0][0][q], fd))
        elapsed = time.perf_counter() - t0
        ok = worst <= 1e-4 and elapsed < 120.0
        _verdict(
            2, "gradient correctness", ok,
            f"worst rel err {worst:.2e} over 50 points x 3 families in {elapsed:.1f}s",
        )
        assert worst <= 1e-4
        assert elapsed < 120.0


class TestCriterion3Consistency:
    def test_errors_fall_with_horizon_and_plateau_in_delta(self):
        spec = ExperimentSpec(
            scenario="consistency",
            family="truncated_gaussian",
            T_values=(1_000.0, 10_000.0, 100_000.0),
            deltas=(0.1, 0.01, 0.001),
            n_reps=20,
            seed=42,
        )
        rows = run_consistency(spec)
        med = median_errors_by(rows)
        e = {(T, d): med[(T, d)] for T in spec.T_values for d in spec.deltas}
        decreasing = (
            e[(1_000.0, 0.01)] > e[(10_000.0, 0.01)] > e[(100_000.0, 0.01)]
        )
        hi, lo = e[(100_000.0, 0.01)], e[(100_000.0, 0.001)]
        plateau = max(hi, lo) / min(hi, lo) < 2.0
        ok = decreasing and plateau
        _verdict(
            3, "consistency reproduction", ok,
            "median err at delta=0.01: "
            + " > ".join(f"{e[(T, 0.01)]:.4f}" for T in spec.T_values)
            + f"; plateau ratio {max(hi, lo) / min(hi, lo):.2f}",
        )
        assert decreasing
        assert plateau


class TestCriterion4Prop2Rate:
    def test_distance_to_fine_grid_reference_scales_linearly(self):
        spec = ExperimentSpec(
            scenario="prop2_rate",
            family="truncated_gaussian",
            T_values=(10_000.0,),
            deltas=(0.05, 0.02, 0.01, 0.005, 0.002),
            delta_ref=1e-4,
            n_reps=10,
            seed=7,
        )
        rows = run_prop2_rate(spec)
        slopes = prop2_slopes(rows)
        slope = float(np.median(slopes))
        ok = 0.5 <= slope <= 1.5
        _verdict(
            4, "linear bias rate", ok,
            f"median log-log slope {slope:.3f} over {len(slopes)} reps",
        )
        assert 0.5 <= slope <= 1.5


class TestCriterion5WSensitivity:
    def test_error_plateau_and_cost_growth_in_support_length(self):
        spec = ExperimentSpec(
            scenario="w_sensitivity",
            family="truncated_exponential",
            T_values=(10_000.0,),
            deltas=(0.01,),
            W_values=(1.0, 5.0, 10.0, 20.0, 50.0, 100.0),
            sim_W=50.0,
            n_reps=3,
            seed=11,
            fit={"step_decay": 0.03, "max_iter": 1200},
        )
        rows = run_w_sensitivity(spec)
        med_err = median_errors_by(rows, keys=("W",))
        times = {}
        for row in rows:
            times.setdefault(row["W"], []).append(row["fit_s"])
        med_time = {W: float(np.median(v)) for W, v in times.items()}
        ratio = med_err[(20.0,)] / med_err[(100.0,)]
        plateau = 0.8 <= ratio <= 1.2
        ws = sorted(med_time)
        monotone = all(
            med_time[b] >= 0.9 * med_time[a] for a, b in zip(ws[:-1], ws[1:])
        )
        ok = plateau and monotone
        _verdict(
            5, "support-length sensitivity", ok,
            f"err(W=20)/err(W=100) = {ratio:.3f}; fit seconds "
            + " -> ".join(f"{med_time[w]:.2f}" for w in ws),
        )
        assert plateau
        assert monotone


class TestCriterion6Complexity:
    def test_iteration_cost_free_of_event_count_and_precompute_linear_in_G(self):
        grad_rows = bench_gradient_iteration(
            [1_000.0, 100_000.0], delta=0.01, W=1.0, iters=60, seed=3
        )
        per_iter = {r["T"]: r["median_seconds"] for r in grad_rows}
        iter_ratio = per_iter[100_000.0] / per_iter[1_000.0]
        pre_rows = bench_precompute_scaling(
            [10_000, 100_000], delta=0.01, W=1.0, repeats=7, seed=3
        )
        pre = {r["G"]: r["median_seconds"] for r in pre_rows}
        pre_ratio = pre[100_000] / pre[10_000]
        ok = iter_ratio <= 2.0 and 8.0 <= pre_ratio <= 12.0
        _verdict(
            6, "complexity scaling", ok,
            f"grad-iteration time ratio (T 1e5/1e3) {iter_ratio:.2f}; "
            f"precompute ratio (G 1e5/1e4) {pre_ratio:.2f}",
        )
        assert iter_ratio <= 2.0
        assert 8.0 <= pre_ratio <= 12.0


class TestCriterion7L2VsLL:
    def test_least_squares_is_faster_with_comparable_errors(self):
        spec = ExperimentSpec(
            scenario="l2_vs_ll",
            family="truncated_exponential",
            T_values=(100_000.0,),
            deltas=(0.01,),
            n_reps=10,
            seed=23,
            fit={"step_size": 0.05, "step_decay": 0.01, "max_iter": 100},
        )
        rows = run_l2_vs_ll(spec)
        entry = summarize_l2_vs_ll(rows)[("truncated_exponential", 100_000.0)]
        ratio = entry["time_ratio"]
        ok = ratio >= 10.0 and entry["iqr_overlap"]
        _verdict(
            7, "l2 vs log-likelihood", ok,
            f"total-fit time ratio {ratio:.0f}x; "
            f"err IQR l2 [{entry['l2']['err_q25']:.3f}, {entry['l2']['err_q75']:.3f}] "
            f"ll [{entry['ll']['err_q25']:.3f}, {entry['ll']['err_q75']:.3f}]",
        )
        assert ratio >= 10.0
        assert entry["iqr_overlap"]


class TestCriterion8SimulatorSanity:
    def test_poisson_counts_branching_rate_and_time_rescaling(self):
        poisson = HawkesModel(
            baseline=np.array([1.1]),
            kernels=[[TruncatedGaussian(alpha=0.0, m=0.5, sigma=0.3, W=1.0)]],
        )
        counts = [simulate(poisson, 1_000.0, seed=s).n_total for s in range(20)]
        poisson_ok = abs(np.mean(counts) - 1_100.0) < 3.0 * np.sqrt(1_100.0)

        hawkes = HawkesModel(
            baseline=np.array([1.1]),
            kernels=[[TruncatedExponential(alpha=0.8, gamma=0.5, W=10.0)]],
        )
        ev = simulate(hawkes, 10_000.0, seed=3)
        rate = ev.n_total / ev.T
        rate_ok = abs(rate - 5.5) / 5.5 < 0.10

        ks_model = HawkesModel(
            baseline=np.array([1.0]),
            kernels=[[TruncatedGaussian(alpha=0.6, m=0.5, sigma=0.3, W=1.0)]],
        )
        ks_events = simulate(ks_model, 300.0, seed=5)
        increments = compensator_increments(ks_model, ks_events, 0)
        pvalue = kstest(increments, "expon").pvalue
        ks_ok = ks_events.n_total >= 500 and pvalue > 0.01

        ok = poisson_ok and rate_ok and ks_ok
        _verdict(
            8, "simulator sanity", ok,
            f"poisson mean {np.mean(counts):.0f}/1100; hawkes rate {rate:.2f}/5.5; "
            f"KS p={pvalue:.3f} on {ks_events.n_total} events",
        )
        assert poisson_ok
        assert rate_ok
        assert ks_ok
