"""Acceptance suite: one test per criterion, each printing a single pass/fail line."""

import io
import math
import time
from contextlib import redirect_stderr, redirect_stdout

import numpy as np
import pytest
from scipy import special

from parisian_ruin.asymptotics import (
    Case,
    classify,
    constant_case_i_ii,
    constant_case_iii,
    normal_survival,
)
from parisian_ruin.cli import main
from parisian_ruin.functionals import ParisianWindow, parisian
from parisian_ruin.kernels import (
    Family,
    KernelSpec,
    RiskModel,
    SelfSimilarClass,
    anchored,
    class_of,
    cov_eval,
    cov_matrix,
    derive_model,
    fbm,
    reversed_kernel,
    time_changed,
    verify_class,
)
from parisian_ruin.montecarlo import Budget, Drift, EstimateWithCI, PickandsTable, pickands_limit, pickands_mc
from parisian_ruin.montecarlo import pickands_samples, ruin_prob_sweep, scaling_check
from parisian_ruin.sampler import Grid, sample_fbm_circulant, sample_paths

FAMILY_DEFAULTS = [KernelSpec(f) for f in Family if f not in (Family.TIME_CHANGED, Family.ANCHORED,
                                                              Family.REVERSED, Family.ZERO)]
WRAPPED = [
    time_changed(KernelSpec(Family.WEIGHTED_FBM), 1.0 / 3.0),
    anchored(KernelSpec(Family.EXAMPLE31)),
    reversed_kernel(KernelSpec(Family.SUB_FBM)),
]


def test_criterion_1_kernel_correctness(criterion):
    start = time.perf_counter()
    pts = np.linspace(1 / 64, 1.0, 64)
    worst_eig, failures = math.inf, []
    for kern in FAMILY_DEFAULTS + WRAPPED[:1]:
        mat = cov_matrix(kern, pts)
        ratio = np.linalg.eigvalsh(mat).min() / np.trace(mat)
        worst_eig = min(worst_eig, ratio)
        report = verify_class(kern, class_of(kern), 1e-2)
        if ratio < -1e-8 or not report.passed:
            failures.append(kern.describe())
    elapsed = time.perf_counter() - start
    ok = not failures and elapsed < 10
    criterion(1, ok, f"{len(FAMILY_DEFAULTS) + 1} families, worst min-eig/trace {worst_eig:.2e}, "
                     f"failures {failures or 'none'}, {elapsed:.1f}s")
    assert ok


def test_criterion_2_sampler_fidelity(criterion):
    start = time.perf_counter()
    n = 200_000
    grid = Grid(np.arange(1, 17) / 16.0)
    worst_z, worst_name = 0.0, ""
    for kern in FAMILY_DEFAULTS + WRAPPED:
        x = sample_paths(kern, grid, n, seed=101).values
        prods = x[:, :, None] * x[:, None, :]
        emp = prods.mean(axis=0)
        se = prods.std(axis=0, ddof=1) / math.sqrt(n)
        exact = np.array([[cov_eval(kern, t, s) for s in grid.points] for t in grid.points])
        with np.errstate(invalid="ignore", divide="ignore"):
            z = np.where(se > 0, np.abs(emp - exact) / se, np.where(emp == exact, 0.0, np.inf))
        if z.max() > worst_z:
            worst_z, worst_name = float(z.max()), kern.describe()
    ugrid = Grid.uniform(1.0, 1 / 16)
    worst_fbm = 0.0
    for kappa in (0.5, 1.0, 1.5):
        a = sample_fbm_circulant(kappa, ugrid, n, seed=202).values[:, 1:]
        b = sample_paths(fbm(kappa), ugrid, n, seed=303).values[:, 1:]
        mean_z = np.abs(a.mean(0) - b.mean(0)) / np.hypot(a.std(0), b.std(0)) * math.sqrt(n)
        va, vb = (a**2).mean(0), (b**2).mean(0)
        var_se = np.hypot((a**2).std(0), (b**2).std(0)) / math.sqrt(n)
        worst_fbm = max(worst_fbm, float(mean_z.max()), float((np.abs(va - vb) / var_se).max()))
    elapsed = time.perf_counter() - start
    ok = worst_z <= 4 and worst_fbm <= 4 and elapsed < 120
    criterion(2, ok, f"worst covariance |z| {worst_z:.2f} ({worst_name}), circulant vs Cholesky |z| "
                     f"{worst_fbm:.2f}, {elapsed:.1f}s")
    assert ok


def _brute_force_all(values: np.ndarray):
    """Exhaustive range minima ``m[i, j] = min(values[:, i..j])`` by a double loop."""
    n = values.shape[1]
    m = np.full((values.shape[0], n, n), np.inf)
    for i in range(n):
        running = values[:, i].copy()
        for j in range(i, n):
            running = np.minimum(running, values[:, j])
            m[:, i, j] = running
    return m


def test_criterion_3_functional_oracle(criterion):
    rng = np.random.default_rng(2024)
    lengths = rng.integers(2, 65, size=1000)
    start = time.perf_counter()
    mismatches, combos = 0, 0
    for n in np.unique(lengths):
        k = int(np.count_nonzero(lengths == n))
        values = rng.standard_normal((k, n))
        values[: k // 2] = np.round(values[: k // 2])  # force ties
        grid = Grid.uniform((n - 1) / 8.0, 1 / 8.0)
        mins = _brute_force_all(values)
        for t_idx in range(1, n):
            for width in range(0, n - t_idx):
                got = parisian(values, grid, ParisianWindow(grid.points[t_idx], width / 8.0))
                ref = np.max(mins[:, np.arange(t_idx + 1), np.arange(t_idx + 1) + width], axis=1)
                mismatches += int(np.count_nonzero(got != ref))
                combos += k
    elapsed = time.perf_counter() - start
    ok = mismatches == 0 and elapsed < 5
    criterion(3, ok, f"{combos} path/window pairs, {mismatches} mismatches, {elapsed:.1f}s")
    assert ok


def test_criterion_4_classical_constants(criterion):
    start = time.perf_counter()
    h1 = pickands_limit(1.0, 0.0, grid_step=1 / 512, n_paths=200_000)
    h2 = pickands_limit(2.0, 0.0, grid_step=1 / 512, n_paths=200_000)
    elapsed = time.perf_counter() - start
    ok = 0.9 <= h1.value <= 1.1 and 0.50 <= h2.value <= 0.63 and elapsed < 1200
    criterion(4, ok, f"kappa=1: {h1.value:.4f} +/- {h1.std_error:.4f} (target 1); kappa=2: {h2.value:.4f} +/- "
                     f"{h2.std_error:.4f} (target {1 / math.sqrt(math.pi):.4f}), {elapsed:.0f}s")
    assert ok


def test_criterion_5_scaling_identity(criterion):
    start = time.perf_counter()
    kern = KernelSpec.of(Family.SUB_FBM, alpha=1.5)
    assert class_of(kern).c_Y == pytest.approx(1 / (2 - 2**0.5), rel=1e-15)
    reports = [scaling_check(kern, L, Budget()) for L in (0.0, 0.5)]
    elapsed = time.perf_counter() - start
    ok = all(abs(r.z_score) <= 3 for r in reports) and elapsed < 1800
    detail = "; ".join(f"L={r.L}: {r.lhs.value:.4f} vs {r.rhs.value:.4f}, z={r.z_score:+.2f}" for r in reports)
    criterion(5, ok, f"{detail}, {elapsed:.0f}s")
    assert ok


CLASSIFICATION_TABLE = [
    ("ex31", {"alpha": 1.5}, None, Case.III_DEGENERATE, 0.0, -2.0),
    ("ex32", {"alpha": 1.5}, None, Case.III, 0.0, -4 / 3),
    ("ex33", {"alpha": 3.0}, None, Case.III_DEGENERATE, 0.0, -1.0),
    ("ex34", {"a": 2.0, "kappa": 1.5}, None, Case.III_DEGENERATE, 0.0, -1.0),
    ("ex34", {"a": 2.0, "kappa": 1.0}, None, Case.III, 0.0, -1.0),
    ("ex34", {"a": 2.0, "kappa": 0.5}, 2 / 3, Case.II, 1.0, -2.0),
    ("ex34", {"a": 2.0, "kappa": 0.5}, 0.3, Case.II, 0.45, -4 / 3 - 0.3),
    ("ex34", {"a": 2.0, "kappa": 0.5}, 0.0, Case.III, 0.0, -4 / 3),
    ("ex35", {"alpha": 0.5}, None, Case.III_DEGENERATE, 0.0, -4 / 3),
    ("ex35", {"alpha": 1.0}, None, Case.III_DEGENERATE, 0.0, -1.0),
    ("ex35", {"alpha": 1.5}, None, Case.III_DEGENERATE, 0.0, -1.0),
    ("ex36", {"alpha": 1.5}, None, Case.III_DEGENERATE, 0.0, -2.0),
    ("ex36", {"alpha": 1.0}, None, Case.III, 0.0, -2.0),
    ("ex37", {"alpha": 1.5}, None, Case.III_DEGENERATE, 0.0, -2.0),
    ("ex37", {"alpha": 1.0}, None, Case.III, 0.0, -2.0),
]


def test_criterion_6_classification_table(criterion):
    start = time.perf_counter()
    wrong = []
    for example, params, eps, case, p, window in CLASSIFICATION_TABLE:
        r = classify(derive_model(example, params), eps)
        if r.case_label is not case or not math.isclose(r.p, p, rel_tol=1e-12, abs_tol=1e-15) or not math.isclose(
                r.window_exponent, window, rel_tol=1e-12):
            wrong.append((example, params, eps, r.case_label.value, r.p, r.window_exponent))
    elapsed = time.perf_counter() - start
    ok = not wrong and elapsed < 1
    criterion(6, ok, f"{len(CLASSIFICATION_TABLE)} rows, mismatches {wrong or 'none'}, {elapsed:.2f}s")
    assert ok


def test_criterion_7_degenerate_constant(criterion):
    rng = np.random.default_rng(77)
    start = time.perf_counter()
    worst = 0.0
    for i in range(100):
        beta, gamma = rng.uniform(0.2, 2.0), rng.uniform(0.1, 1.0)
        if i % 10 == 0:
            gamma = beta / 2.0  # both terms active
        alpha = min(beta, 2 * gamma) + rng.uniform(0.01, 1.0)
        b, d, L = rng.uniform(0.1, 3.0), rng.uniform(0.1, 3.0), rng.uniform(0.0, 3.0)
        m = RiskModel(fbm(1.0), 0.5, SelfSimilarClass(alpha, 1.0, 1.0), b, beta, d, gamma)
        assert classify(m).case_label is Case.III_DEGENERATE
        got = constant_case_iii(m, L).value
        expo = (-b * L**beta if beta <= 2 * gamma else 0.0) + (-d * L**gamma if 2 * gamma <= beta else 0.0)
        worst = max(worst, abs(got - math.exp(expo)) / math.exp(expo))
    ex31 = constant_case_iii(derive_model("ex31", {"alpha": 1.5, "d": 1.0}), 1.0).value
    elapsed = time.perf_counter() - start
    ok = worst <= 2 * np.finfo(float).eps and abs(ex31 - 0.12737) <= 1e-5 and elapsed < 1
    criterion(7, ok, f"worst relative deviation {worst:.1e}, Example 3.1 constant {ex31:.6f}, {elapsed:.2f}s")
    assert ok


def test_criterion_8_quadrature_oracle(criterion):
    rng = np.random.default_rng(88)
    start = time.perf_counter()
    worst, done = 0.0, 0
    while done < 20:
        kappa = rng.uniform(0.2, 2.0)
        alpha = rng.uniform(0.1, kappa)
        beta, gamma = rng.uniform(alpha, 3.0), rng.uniform(alpha / 2, 2.0)
        if not alpha < min(beta, 2 * gamma) or math.isclose(beta, 2 * gamma):
            continue
        m = RiskModel(fbm(1.0), rng.uniform(0.2, 2.0), SelfSimilarClass(alpha, kappa, rng.uniform(0.5, 2.0)),
                      rng.uniform(0.2, 2.0), beta, rng.uniform(0.2, 2.0), gamma)
        r = classify(m)
        assert r.case_label is Case.I
        H0 = rng.uniform(0.5, 2.0)
        table = PickandsTable(kappa, [0.0], [EstimateWithCI(H0, 0.0, 1, 1, 0.01, 0.0)], 4.0)
        got = constant_case_i_ii(m, r, 0.0, table).value
        k, e = (m.b, beta) if r.b_active else (m.d, gamma)
        s = alpha / kappa
        ref = (m.a * m.c_Y) ** (1 / kappa) * H0 * special.gamma(s / e) / (e * k ** (s / e))
        worst = max(worst, abs(got / ref - 1))
        done += 1
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-6 and elapsed < 10
    criterion(8, ok, f"20 case-I sets, worst relative error {worst:.1e}, {elapsed:.2f}s")
    assert ok


def test_criterion_9_end_to_end_trend(criterion, tmp_path):
    out = tmp_path / "validate.csv"
    argv = ["validate", "--example", "ex31", "--alpha", "1.5", "--u", "2.5,3,3.5", "--L", "0", "--n-paths",
            "10000000", "--graded", "0.125:1/1024,0.5:1/256,1:1/64", "-o", str(out)]
    start = time.perf_counter()
    with redirect_stdout(io.StringIO()), redirect_stderr(io.StringIO()):
        code = main(argv)
    elapsed = time.perf_counter() - start
    rows = [line.split(",") for line in out.read_text().splitlines()[1:]] if code == 0 else []
    ratios = [float(r[6]) for r in rows]
    for r in rows:
        assert float(r[5]) == normal_survival(float(r[0]))
    dev = [abs(x - 1) for x in ratios]
    ok = (code == 0 and len(ratios) == 3 and all(0.7 <= x <= 1.4 for x in ratios)
          and all(b <= a for a, b in zip(dev, dev[1:])) and elapsed < 3600)
    criterion(9, ok, f"ratios {[round(x, 4) for x in ratios]} at u = 2.5, 3, 3.5, {elapsed:.0f}s")
    assert ok


def test_criterion_10_monotonicity(criterion):
    start = time.perf_counter()
    model = derive_model("ex31", {"alpha": 1.5})
    us = [0.5, 1.0, 1.5, 2.0, 2.5]
    by_u = [e.value for e in ruin_prob_sweep(model, us, [0.05], 1.0, 100_000, 10, grid_step=1 / 256)]
    Ls = [0.0, 0.02, 0.05, 0.1, 0.2]
    by_L = [e.value for e in ruin_prob_sweep(model, [1.0] * 5, Ls, 1.0, 100_000, 10, grid_step=1 / 256)]
    ruin_ok = by_u == sorted(by_u, reverse=True) and by_L == sorted(by_L, reverse=True)

    T_vals, L_vals = [0.5, 1.0, 2.0, 4.0], [0.0, 0.25, 0.5, 1.0]
    pick_ok = True
    for kern in (fbm(1.0), KernelSpec.of(Family.SUB_FBM, alpha=1.5)):
        tensor, _, _ = pickands_samples(kern, Drift(0.3, 1.0), T_vals, L_vals, 1 / 128, 20_000, 11)
        means = tensor.mean(axis=0)
        pick_ok &= bool(np.all(np.diff(tensor, axis=1) >= 0) and np.all(np.diff(tensor, axis=2) <= 0))
        pick_ok &= bool(np.all(np.diff(means, axis=0) >= 0) and np.all(np.diff(means, axis=1) <= 0))

    shift_ok = True
    for c in (-1.0, 0.3, 2.5):
        base = pickands_mc(fbm(1.0), Drift(0.5, 1.0), 1.0, 0.25, 1 / 128, 20_000, 12)
        moved = pickands_mc(fbm(1.0), Drift(0.5, 1.0, shift=c), 1.0, 0.25, 1 / 128, 20_000, 12)
        shift_ok &= moved.value == base.value * math.exp(-c)
    elapsed = time.perf_counter() - start
    ok = ruin_ok and pick_ok and shift_ok and elapsed < 300
    criterion(10, ok, f"ruin in u and L: {ruin_ok}, Pickands in T and L: {pick_ok}, h-shift exact: {shift_ok}, "
                      f"{elapsed:.0f}s")
    assert ok
