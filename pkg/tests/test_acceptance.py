"""Exit criteria for the solver library, one test per criterion.

Each test prints a PASS/FAIL line; the lines are repeated in the pytest
terminal summary under "acceptance criteria".
"""
import time
from math import gamma as gamma_fn

import numpy as np
import pytest
from conftest import dense_toeplitz, record_criterion

from stfde.diagnostics import spectrum_diagnostics
from stfde.grunwald import FractionalOrders, GrunwaldTable, space_weights, time_weights
from stfde.krylov import SolverConfig
from stfde.operator import assemble_operator, assemble_rhs
from stfde.preconditioner import assemble_preconditioner, banded_lu
from stfde.problem import Grid, StfdeProblem, example1
from stfde.timestepper import march, stability_probe
from stfde.toeplitz import ToeplitzFactor

TABLE1_ERRORS = {16: 4.6312e-4, 32: 2.4162e-4, 64: 1.3320e-4, 128: 7.5522e-5}
TABLE1_PGMRES = {16: 3.063, 32: 3.938, 64: 4.063, 128: 5.055}
TABLE1_PCGNR = {16: 3.125, 32: 4.063, 64: 4.813, 128: 4.797}
TABLE3 = {
    16: {"A": 48.86, "PinvA": 1.05, "AtA": 2.39e3, "PtPinvAtA": 1.88},
    32: {"A": 162.84, "PinvA": 1.17, "AtA": 2.65e4, "PtPinvAtA": 20.65},
}
TABLE3_RTOL = {"A": 0.02, "PinvA": 0.02, "AtA": 0.05, "PtPinvAtA": 0.05}


@pytest.fixture(scope="module")
def example1_runs():
    """Example 1 marches shared by the error and iteration-count criteria."""
    p = example1()
    runs, elapsed = {}, {}
    for method in ("pgmres", "pcgnr", "gmres", "cgnr"):
        sizes = (16, 32, 64, 128) if method.startswith("p") else (128,)
        started = time.perf_counter()
        for m in sizes:
            runs[method, m] = march(p, Grid.for_problem(p, m, m), SolverConfig(method=method), ell=8)[1]
        elapsed[method] = time.perf_counter() - started
    return runs, elapsed


def random_problem(rng):
    orders = FractionalOrders(rng.uniform(0.05, 1.0), rng.uniform(0.05, 1.0), rng.uniform(1.05, 2.0))
    fields = []
    for _ in range(4):
        amp, p1, p2, dt = rng.uniform(0, 10), rng.uniform(0, 2), rng.uniform(0, 2), rng.uniform(0, 1)
        fields.append(lambda x, t, amp=amp, p1=p1, p2=p2, dt=dt: amp * (1 + dt * t) * x**p1 * (1 - x) ** p2)
    return StfdeProblem(orders=orders, a=0.0, b=1.0, T=rng.uniform(0.5, 2.0),
                        d_plus=fields[0], d_minus=fields[1], e_plus=fields[2], e_minus=fields[3])


def assembled(problem, m, k=1):
    grid = Grid.for_problem(problem, m, m)
    table = GrunwaldTable.build(problem.orders, m, m)
    return assemble_operator(problem, grid, table, k)


def criterion_problems(m, count=20):
    rng = np.random.default_rng(1000 + m)
    return [example1()] + [random_problem(rng) for _ in range(count)]


def test_criterion_01_fft_matvec_oracle():
    rng = np.random.default_rng(1)
    started = time.perf_counter()
    worst = 0.0
    for _ in range(200):
        size = int(rng.integers(2, 513))
        col, row = rng.standard_normal((2, size))
        row[0] = col[0]
        f = ToeplitzFactor(col, row)
        v = rng.standard_normal(size)
        dense = dense_toeplitz(col, row)
        scale = np.abs(dense).sum(1).max() * np.abs(v).max()
        g, gt = f.apply_pair(v)
        worst = max(worst, np.abs(f.apply(v) - dense @ v).max() / scale,
                    np.abs(g - dense @ v).max() / scale, np.abs(gt - dense.T @ v).max() / scale)
    elapsed = time.perf_counter() - started
    ok = worst <= 1e-12 and elapsed < 10
    record_criterion(1, ok, f"worst scaled error {worst:.2e} (<= 1e-12), {elapsed:.2f} s (< 10 s)")
    assert ok


def test_criterion_02_coefficient_properties():
    started = time.perf_counter()
    failures = []
    for alpha in (0.2, 0.5, 0.8, 1.0):
        a = time_weights(alpha, 10_001)
        steps = -np.diff(a)
        if a[0] != 1 or (alpha < 1 and not np.all(steps > 0)) or not np.all(steps >= 0):
            failures.append(f"a_j monotonicity alpha={alpha}")
        if alpha < 1:
            j = 10_000
            limit = 1.0 / (a[j] * j**alpha)
            if abs(limit * (1 - alpha) - 1) > 0.01:
                failures.append(f"a_j limit alpha={alpha}")
        elif np.any(a[1:] != 0):
            failures.append("a_j alpha=1")
    for s in (0.2, 0.5, 0.8, 1.0, 1.2, 1.5, 1.8, 2.0):
        g = space_weights(s, 10_001)
        partial = np.cumsum(g)
        integer = s in (1.0, 2.0)
        if s <= 1:
            signs = np.all(g[1:] < 0) if not integer else np.all(g[1:] <= 0)
            sums = np.all(partial > 0) if not integer else np.all(partial >= 0)
            mono = np.all(np.diff(partial) <= 0)
        else:
            rest = np.delete(g, 1)
            signs = g[1] == -s and (np.all(rest > 0) if not integer else np.all(rest >= 0))
            sums = np.all(partial[1:] < 0) if not integer else np.all(partial[1:] <= 0)
            mono = np.all(np.diff(partial[1:]) >= 0)
        if g[0] != 1 or not (signs and sums and mono):
            failures.append(f"sign/partial-sum pattern order={s}")
        if not integer:
            j = np.arange(10, 10_001)
            ratio = np.abs(g[10:]) * j ** (s + 1) * abs(gamma_fn(-s))
            if ratio.min() < 0.5 or ratio.max() > 2.0:
                failures.append(f"tail decay order={s}")
    elapsed = time.perf_counter() - started
    ok = not failures and elapsed < 5
    record_criterion(2, ok, f"{len(failures)} property failures {failures}, {elapsed:.2f} s (< 5 s)")
    assert ok


def test_criterion_03_m_matrix_certificates():
    failures = []
    for m in (8, 16, 32, 64, 128):
        for idx, problem in enumerate(criterion_problems(m)):
            op = assembled(problem, m)
            mats = [("I+A", op.to_dense())]
            mats += [(f"P_{ell}", assemble_preconditioner(op, ell).p.to_dense()) for ell in (2, 4, 8)]
            for name, a in mats:
                off = a - np.diag(np.diag(a))
                if not (np.all(np.diag(a) > 0) and off.max() <= 1e-14 and a.sum(1).min() >= 1 - 1e-10):
                    failures.append(f"m={m} problem={idx} {name}")
    ok = not failures
    record_criterion(3, ok, f"M-matrix structure of I+A and P_ell (ell=2,4,8), 105 problems: "
                            f"{len(failures)} failures {failures[:5]}")
    assert ok


def test_criterion_03_row_sum_preservation():
    worst = 0.0
    for m in (8, 16, 32, 64, 128):
        for problem in criterion_problems(m):
            op = assembled(problem, m)
            full = op.to_dense().sum(1)
            for ell in (2, 4, 8):
                p = assemble_preconditioner(op, ell).p.to_dense()
                worst = max(worst, np.abs(p.sum(1) - full).max())
    ok = worst <= 1e-14
    record_criterion(3, ok, f"row sums of P_ell equal those of I+A: worst per-row gap {worst:.3e} (<= 1e-14)")
    assert ok


def test_criterion_04_manufactured_solution_errors(example1_runs):
    runs, elapsed = example1_runs
    errors = {m: runs["pgmres", m].sup_error_final for m in TABLE1_ERRORS}
    rel = {m: abs(errors[m] / TABLE1_ERRORS[m] - 1) for m in errors}
    ratios = [errors[m] / errors[2 * m] for m in (16, 32, 64)]
    ok = (all(r <= 0.05 for r in rel.values()) and all(1.7 <= q <= 2.1 for q in ratios)
          and elapsed["pgmres"] < 120)
    detail = ", ".join(f"m={m}: {errors[m]:.4e} ({100 * rel[m]:.2f}%)" for m in errors)
    record_criterion(4, ok, f"{detail}; ratios {np.round(ratios, 3).tolist()}; "
                            f"PGMRES sweep {elapsed['pgmres']:.1f} s")
    assert ok


def test_criterion_05_iteration_counts(example1_runs):
    runs, _ = example1_runs
    pg = {m: runs["pgmres", m].avg_iterations for m in TABLE1_PGMRES}
    pc = {m: runs["pcgnr", m].avg_iterations for m in TABLE1_PCGNR}
    speed_gmres = runs["gmres", 128].avg_iterations / pg[128]
    speed_cgnr = runs["cgnr", 128].avg_iterations / pc[128]
    ok = (all(abs(pg[m] - TABLE1_PGMRES[m]) <= 1.0 for m in pg)
          and all(abs(pc[m] - TABLE1_PCGNR[m]) <= 1.0 for m in pc)
          and speed_gmres >= 10 and speed_cgnr >= 20)
    record_criterion(5, ok, f"PGMRES {[round(v, 3) for v in pg.values()]}, "
                            f"PCGNR {[round(v, 3) for v in pc.values()]}, "
                            f"speedups GMRES/PGMRES {speed_gmres:.1f} (>= 10), CGNR/PCGNR {speed_cgnr:.1f} (>= 20)")
    assert ok


def test_criterion_06_condition_numbers():
    p = example1()
    lines, ok = [], True
    for m, expected in TABLE3.items():
        got = spectrum_diagnostics(p, Grid.for_problem(p, m, m), ell=8, k=1).condition_numbers
        for tag, value in expected.items():
            good = abs(got[tag] / value - 1) <= TABLE3_RTOL[tag]
            ok &= good
            lines.append(f"m={m} {tag}={got[tag]:.4g}{'' if good else ' (!)'}")
    record_criterion(6, ok, "; ".join(lines))
    assert ok


def test_criterion_07_stability():
    p = example1()
    grid = Grid.for_problem(p, 32, 32)
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(10):
        e = rng.uniform(-1, 1, 31)
        e *= 1e-3 / np.abs(e).max()
        worst = max(worst, stability_probe(p, grid, SolverConfig(method="pgmres"), 8, e).max())
    ok = worst <= 1e-3 + 1e-9
    record_criterion(7, ok, f"max step difference {worst:.6e} (<= 1e-3 + 1e-9)")
    assert ok


def test_criterion_08_exact_preconditioner_limit():
    p = example1()
    grid = Grid.for_problem(p, 16, 16)
    counts = {}
    for ell in (14, 15, 16):
        _, rep = march(p, grid, SolverConfig(method="pgmres"), ell=ell)
        counts[ell] = [r.total_inner_iterations for r in rep.per_step]
    ok = all(all(c == 1 for c in cs) for cs in counts.values())
    record_criterion(8, ok, "inner iterations per step: "
                            + "; ".join(f"ell={ell}: max {max(cs)}, steps>1 {sum(c > 1 for c in cs)}"
                                        for ell, cs in counts.items()))
    assert ok


def _median_time(fn, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return float(np.median(times))


def test_criterion_09_complexity_proxy():
    p = example1()
    rng = np.random.default_rng(9)
    apply_t, lu_t = {}, {}
    ops = {m: assembled(p, m) for m in (2**12, 2**13)}
    pcs = {m: assemble_preconditioner(op, 8) for m, op in ops.items()}
    for m, op in ops.items():
        op.apply(rng.standard_normal(m - 1))
        banded_lu(pcs[m].p)
    # interleave sizes so background load affects both equally
    samples = {m: ([], []) for m in ops}
    for _ in range(5):
        for m, op in ops.items():
            v = rng.standard_normal(m - 1)
            samples[m][0].append(_median_time(lambda: op.apply(v), 15))
            samples[m][1].append(_median_time(lambda: banded_lu(pcs[m].p), 1))
    for m in ops:
        apply_t[m], lu_t[m] = np.median(samples[m][0]), np.median(samples[m][1])
    r_apply = apply_t[2**13] / apply_t[2**12]
    r_lu = lu_t[2**13] / lu_t[2**12]
    ok = r_apply <= 2.5 and r_lu <= 2.2
    record_criterion(9, ok, f"apply_system ratio {r_apply:.2f} (<= 2.5), banded LU ratio {r_lu:.2f} (<= 2.2)")
    assert ok


def test_criterion_10_rhs_formulations():
    p = example1()
    grid = Grid.for_problem(p, 32, 32)
    table = GrunwaldTable.build(p.orders, 32, 32)
    hist, _ = march(p, grid, SolverConfig(method="pgmres"))
    a, steps = table.a, hist.steps
    worst = 0.0
    for k in range(grid.n):
        f = np.zeros(31)
        regrouped = assemble_rhs(table, steps, f, 0.0, k)
        telescoped = steps[k].copy()
        for j in range(1, k + 1):
            telescoped -= a[j] * (steps[k - j + 1] - steps[k - j])
        worst = max(worst, np.abs(regrouped - telescoped).max() / np.abs(telescoped).max())
    ok = worst <= 1e-13
    record_criterion(10, ok, f"worst relative gap {worst:.2e} over {grid.n} steps (<= 1e-13)")
    assert ok
