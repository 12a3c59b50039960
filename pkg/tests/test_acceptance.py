"""Acceptance criteria, each run at its stated tolerance.

Every test appends one ``(criterion, passed, detail)`` line to
``ACCEPTANCE_LINES``; the conftest hook prints them after the session.
Heavy Monte-Carlo runs are module fixtures so that the cross-cutting
criteria (monotonicity, feasibility, factorization) see every solver output.
"""

import time
from dataclasses import dataclass, field

import numpy as np
import pytest

from hybridbf.baselines import fully_digital_capacity, identity_covariance_rate, point_to_point_capacity
from hybridbf.channel import sample_channel
from hybridbf.duality import mac_to_bc, verify_duality
from hybridbf.experiments import snr_to_power
from hybridbf.factorization import factor, rate_with_factors
from hybridbf.kernels import waterfill
from hybridbf.optimizer import SolveOptions, solve
from hybridbf.rates import SystemDims, mac_sum_rate, mac_user_rates
from helpers import ACCEPTANCE_LINES
from oracles import grid_search_simplex, log_sum_objective

SNR_GRID = (-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0)
N_SEEDS = 50
L_PATHS = 15


def record(name, ok, detail):
    ACCEPTANCE_LINES.append((name, bool(ok), detail))


@dataclass
class RunLog:
    """Solver outputs collected by one acceptance run."""

    solutions: list = field(default_factory=list)  # (H, dims, P, Solution)
    seconds: float = 0.0

    def add(self, H, dims, P, sol):
        self.solutions.append((H, dims, P, sol))


def sweep(dims: SystemDims):
    """Paired-seed sweep; rates[scheme] has shape (n_snr, N_SEEDS)."""
    log = RunLog()
    rates = {s: np.zeros((len(SNR_GRID), N_SEEDS)) for s in ("proposed", "identity_cov", "fully_digital")}
    t0 = time.perf_counter()
    for seed in range(N_SEEDS):
        H = sample_channel(dims.K, dims.N, dims.M, L_PATHS, seed).per_user
        for i, snr in enumerate(SNR_GRID):
            P = snr_to_power(snr)
            sol = solve(H, dims, P)
            log.add(H, dims, P, sol)
            rates["proposed"][i, seed] = sol.trace.outer_objective[-1]
            rates["identity_cov"][i, seed] = identity_covariance_rate(H, dims, P).sum_rate
            rates["fully_digital"][i, seed] = fully_digital_capacity(H, P).sum_rate
    log.seconds = time.perf_counter() - t0
    return rates, log


@pytest.fixture(scope="module")
def duality_run():
    rng = np.random.default_rng(2024)
    log = RunLog()
    worst_rate, worst_power, fails = 0.0, 0.0, 0
    t0 = time.perf_counter()
    for i in range(200):
        K = int(rng.integers(1, 5))
        d = int(rng.integers(1, 3))
        M = int(rng.integers(d, 5))
        N = int(rng.integers(K * d, 17))
        P = snr_to_power(float(rng.choice([0.0, 10.0, 20.0])))
        dims = SystemDims(K, N, M, d)
        H = sample_channel(K, N, M, L_PATHS, 10_000 + i).per_user
        sol = solve(H, dims, P, check_duality=False)
        log.add(H, dims, P, sol)
        rep = verify_duality(H, sol.V, sol.W, sol.Q, mac_to_bc(H, sol.V, sol.W, sol.Q))
        r_mac = mac_user_rates(H, sol.V, sol.W, sol.Q)
        rel = np.asarray(rep.per_user_rate_gap) / np.maximum(1.0, r_mac)
        worst_rate = max(worst_rate, float(rel.max()))
        worst_power = max(worst_power, rep.power_gap / P)
        fails += int(rel.max() > 1e-6 or rep.power_gap > 1e-7 * P)
    log.seconds = time.perf_counter() - t0
    return log, worst_rate, worst_power, fails


@pytest.fixture(scope="module")
def fig2_run():
    return sweep(SystemDims(K=1, N=16, M=3, d=2))


@pytest.fixture(scope="module")
def fig4_run():
    return sweep(SystemDims(K=4, N=16, M=4, d=1))


@pytest.fixture(scope="module")
def convergence_run():
    dims = SystemDims(K=4, N=16, M=4, d=1)
    P = snr_to_power(10.0)
    log = RunLog()
    t0 = time.perf_counter()
    for seed in range(100):
        H = sample_channel(dims.K, dims.N, dims.M, L_PATHS, seed).per_user
        log.add(H, dims, P, solve(H, dims, P, check_duality=False))
    log.seconds = time.perf_counter() - t0
    return log


def test_c1_duality_exactness(duality_run):
    log, worst_rate, worst_power, fails = duality_run
    ok = fails == 0 and log.seconds < 120
    record("1 duality exactness", ok,
           f"200 instances, {fails} violations, worst rel rate gap {worst_rate:.2e}, "
           f"worst power gap/P {worst_power:.2e}, {log.seconds:.1f}s")
    assert ok


def test_c4_waterfill_oracle():
    rng = np.random.default_rng(77)
    worst = 0.0
    t0 = time.perf_counter()
    for _ in range(100):
        n = int(rng.integers(1, 4))
        g = rng.uniform(0.05, 5.0, n)
        budget = float(rng.uniform(0.1, 5.0))
        ref = grid_search_simplex(log_sum_objective(g), n, budget, final_step=1e-4)
        worst = max(worst, float(np.max(np.abs(waterfill(g, budget) - ref))))
    secs = time.perf_counter() - t0
    ok = worst <= 1e-3 and secs < 60
    record("4 waterfilling oracle", ok, f"100 instances, worst component error {worst:.2e}, {secs:.1f}s")
    assert ok


def sandwich(name, rates, log):
    p, ic, fd = (rates[s] for s in ("proposed", "identity_cov", "fully_digital"))
    order_ok = bool(np.all(fd.mean(1) >= p.mean(1)) and np.all(p.mean(1) >= ic.mean(1)))
    diff = p - ic
    mean_diff = diff.mean(1)
    se = diff.std(1, ddof=1) / np.sqrt(N_SEEDS)
    hi = np.asarray(SNR_GRID) >= 0
    sig_ok = bool(np.all(mean_diff[hi] > 2 * se[hi]))
    ratio = np.min(mean_diff[hi] / np.maximum(se[hi], np.finfo(float).tiny))
    return order_ok, sig_ok, f"{name}: ordering {'ok' if order_ok else 'violated'}, min diff/SE at >=0 dB {ratio:.2f}"


def test_c5_sandwich(fig2_run, fig4_run):
    parts, ok = [], True
    for name, (rates, log) in (("fig2", fig2_run), ("fig4", fig4_run)):
        order_ok, sig_ok, detail = sandwich(name, rates, log)
        ok &= order_ok and sig_ok
        parts.append(detail)
    secs = fig2_run[1].seconds + fig4_run[1].seconds
    ok &= secs < 600
    record("5 sandwich bound", ok, "; ".join(parts) + f"; {secs:.1f}s")
    assert ok


def test_c6_high_snr_capacity(fig2_run):
    _, log = fig2_run
    gaps, limited = {}, {}
    for snr in (0.0, 20.0):
        P = snr_to_power(snr)
        rate, cap, cap_d = [], [], []
        for H, dims, P_run, sol in log.solutions:
            if P_run != P:
                continue
            rate.append(sol.trace.outer_objective[-1])
            cap.append(point_to_point_capacity(H[0], P))
            cap_d.append(point_to_point_capacity(H[0], P, streams=dims.d))
        rate, cap, cap_d = map(np.asarray, (rate, cap, cap_d))
        gaps[snr] = float(np.mean((cap - rate) / cap))
        limited[snr] = float(np.mean((cap_d - rate) / cap_d))
    ok = gaps[20.0] <= 0.05 and gaps[20.0] < gaps[0.0]
    record("6 high-SNR capacity approach", ok,
           f"mean gap to full capacity {gaps[0.0]:.1%} at 0 dB, {gaps[20.0]:.1%} at 20 dB "
           f"(limit 5%); gap to d-stream capacity {limited[20.0]:.1e} at 20 dB")
    assert ok


def test_c8_convergence_speed(convergence_run):
    hits = 0
    for *_, sol in convergence_run.solutions:
        obj = sol.trace.outer_objective
        final = obj[-1]
        at20 = obj[min(20, len(obj) - 1)]
        hits += int(abs(final - at20) <= 0.01 * abs(final))
    secs = convergence_run.seconds
    iters = [s.trace.iters_used for *_, s in convergence_run.solutions]
    ok = hits >= 90 and secs < 300
    record("8 convergence speed", ok,
           f"{hits}/100 seeds within 1% by iteration 20, median iterations {int(np.median(iters))}, {secs:.1f}s")
    assert ok


def all_solutions(*logs):
    for log in logs:
        yield from log.solutions


@pytest.fixture(scope="module")
def every_run(duality_run, fig2_run, fig4_run, convergence_run):
    return [duality_run[0], fig2_run[1], fig4_run[1], convergence_run]


def test_c2_monotone(every_run):
    n_steps, violations, worst = 0, 0, 0.0
    for *_, sol in all_solutions(*every_run):
        steps = np.diff(sol.trace.objective_per_iter)
        n_steps += steps.size
        violations += int(np.count_nonzero(steps < -1e-9))
        worst = max(worst, sol.trace.max_decrease())
    ok = violations == 0
    record("2 monotone convergence", ok, f"{n_steps} steps checked, {violations} violations, worst drop {worst:.1e}")
    assert ok


def test_c3_feasibility(every_run):
    worst_v = worst_w = worst_p = 0.0
    count = 0
    for _, dims, P, sol in all_solutions(*every_run):
        count += 1
        worst_v = max(worst_v, np.linalg.norm(sol.V.conj().T @ sol.V - np.eye(dims.Ns)))
        worst_w = max(worst_w, max(np.linalg.norm(w.conj().T @ w - np.eye(dims.d)) for w in sol.W))
        worst_p = max(worst_p, abs(sum(np.trace(q).real for q in sol.Q) - P) / P)
    ok = worst_v <= 1e-8 and worst_w <= 1e-8 and worst_p <= 1e-8
    record("3 feasibility", ok,
           f"{count} solutions, worst |V^HV-I| {worst_v:.1e}, |W^HW-I| {worst_w:.1e}, power {worst_p:.1e}")
    assert ok


def test_c7_factorization(every_run):
    worst_rec = worst_rate = 0.0
    count = 0
    for H, dims, P, sol in all_solutions(*every_run):
        count += 1
        fV = factor(sol.V, dims.n_rf_t)
        fW = [factor(w, dims.n_rf_r) for w in sol.W]
        worst_rec = max(worst_rec, np.linalg.norm(fV.reconstruct() - sol.V) / np.linalg.norm(sol.V))
        for f, w in zip(fW, sol.W):
            worst_rec = max(worst_rec, np.linalg.norm(f.reconstruct() - w) / np.linalg.norm(w))
        ref = mac_sum_rate(H, sol.V, sol.W, sol.Q)
        worst_rate = max(worst_rate, abs(rate_with_factors(H, fV, fW, sol.Q) - ref) / max(ref, 1e-300))
    ok = worst_rec <= 1e-8 and worst_rate <= 1e-6
    record("7 factorization exactness", ok,
           f"{count} solutions, worst rel reconstruction {worst_rec:.1e}, worst rel rate change {worst_rate:.1e}")
    assert ok


def test_c9_complexity_scaling():
    # informational: recorded, never fails the suite
    Ns_list = (8, 16, 32, 64)
    opts = SolveOptions(max_outer_iters=10, objective_tol=1e-300)
    per_iter = []
    for N in Ns_list:
        dims = SystemDims(K=4, N=N, M=4, d=1)
        H = sample_channel(4, N, 4, L_PATHS, 0).per_user
        P = snr_to_power(10.0)
        best = np.inf
        for _ in range(3):
            t0 = time.perf_counter()
            sol = solve(H, dims, P, opts, check_duality=False)
            best = min(best, (time.perf_counter() - t0) / max(sol.trace.iters_used, 1))
        per_iter.append(best)
    slope = float(np.polyfit(np.log(Ns_list), np.log(per_iter), 1)[0])
    ms = ", ".join(f"N={n}: {1e3 * t:.2f} ms" for n, t in zip(Ns_list, per_iter))
    record("9 complexity scaling (informational)", slope <= 3.5, f"log-log slope {slope:.2f} (limit 3.5); {ms}")
