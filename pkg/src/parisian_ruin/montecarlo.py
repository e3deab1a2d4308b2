"""Monte Carlo estimators: Parisian ruin probabilities and Parisian Pickands constants.

All estimators sample on one grid per call and evaluate every requested horizon
and window on the same paths, so comparisons across ``u``, ``T`` and ``L``
within a call use common random numbers and respect the pathwise orderings
exactly.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
from scipy import optimize

from .errors import ParameterError
from .functionals import ParisianWindow, ResolvedWindow, parisian_values, resolve_window, sliding_min
from .kernels import KernelSpec, RiskModel, class_of, fbm, variance
from .sampler import Grid, map_paths, path_source

DEFAULT_SEED = 20250101
DEFAULT_GRID_STEP = 1.0 / 512
DEFAULT_N_PATHS = 200_000
# Horizons T with T**kappa on this ladder; see pickands_limit_kernel.
DEFAULT_LADDER_SCALES = (1.0, 2.0, 4.0)
TRUNCATION_LEVEL = 40.0


@dataclass
class EstimateWithCI:
    value: float
    std_error: float
    n_samples: int
    seed: int
    grid_step: float
    effective_L: float
    notes: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.std_error >= 0:
            raise ParameterError(f"std_error={self.std_error!r} must be >= 0")
        if self.n_samples < 1:
            raise ParameterError(f"n_samples={self.n_samples!r} must be >= 1")

    def ci(self, z: float = 1.96) -> tuple[float, float]:
        return (self.value - z * self.std_error, self.value + z * self.std_error)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def scaled(self, factor: float) -> EstimateWithCI:
        return EstimateWithCI(self.value * factor, self.std_error * abs(factor), self.n_samples, self.seed,
                              self.grid_step, self.effective_L, dict(self.notes))


@dataclass(frozen=True)
class Drift:
    """Pickands drift ``h(t) = c_beta t**beta + c_gamma t**gamma + shift``.

    The constant ``shift`` never enters the path computation; estimates are
    multiplied by ``exp(-shift)`` instead, which keeps shifted and unshifted
    estimates in exact proportion.
    """

    c_beta: float = 0.0
    beta: float = 1.0
    c_gamma: float = 0.0
    gamma: float = 1.0
    shift: float = 0.0

    def __post_init__(self):
        if self.c_beta < 0 or self.c_gamma < 0:
            raise ParameterError("drift coefficients must be >= 0")
        if not (self.beta > 0 and self.gamma > 0):
            raise ParameterError("drift exponents must be > 0")

    @property
    def is_zero(self) -> bool:
        return self.c_beta == 0 and self.c_gamma == 0

    def shape(self, t) -> np.ndarray:
        """``h(t) - shift``."""
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        if self.c_beta:
            out = out + self.c_beta * t**self.beta
        if self.c_gamma:
            out = out + self.c_gamma * t**self.gamma
        return out

    def __call__(self, t) -> np.ndarray:
        return self.shape(t) + self.shift

    def shifted(self, c: float) -> Drift:
        return Drift(self.c_beta, self.beta, self.c_gamma, self.gamma, self.shift + c)

    def level_crossing(self, level: float) -> float | None:
        """Smallest ``t`` with ``h(t) - shift = level``; ``None`` when ``h`` is constant."""
        if self.is_zero:
            return None
        hi = 1.0
        while self.shape(hi) < level:
            hi *= 2.0
        return optimize.brentq(lambda t: float(self.shape(t)) - level, 0.0, hi, xtol=1e-12)


@dataclass
class Budget:
    """Monte Carlo budget shared by the Pickands estimators.

    ``T_ladder`` of ``None`` selects :func:`default_ladder`.
    """

    n_paths: int = DEFAULT_N_PATHS
    grid_step: float = DEFAULT_GRID_STEP
    seed: int = DEFAULT_SEED
    T_ladder: tuple[float, ...] | None = None
    workers: int | None = None

    def __post_init__(self):
        if self.n_paths < 1:
            raise ParameterError(f"n_paths={self.n_paths!r} must be >= 1")
        if not self.grid_step > 0:
            raise ParameterError(f"grid_step={self.grid_step!r} must be > 0")
        if self.T_ladder is not None:
            self.T_ladder = tuple(float(t) for t in self.T_ladder)


def default_ladder(kappa: float) -> tuple[float, ...]:
    """Horizons ``T`` with ``T**kappa`` on a doubling ladder.

    The second moment of the integrand grows like ``exp(2 T**kappa)``. For
    ``kappa > 1`` the finite-horizon slope bias is small (nil at ``kappa = 2``),
    so the ladder is shrunk by ``2**(1 - kappa)`` to keep the tail in check.
    """
    shrink = 2.0 ** -max(0.0, kappa - 1.0)
    return tuple((shrink * s) ** (1.0 / kappa) for s in DEFAULT_LADDER_SCALES)


def _mean_se(samples: np.ndarray) -> tuple[float, float]:
    n = samples.shape[0]
    mean = float(np.sum(samples) / n)
    if n < 2:
        return mean, 0.0
    return mean, float(np.std(samples, ddof=1) / math.sqrt(n))


def _functional_tensor(values: np.ndarray, grid: Grid, T_values: Sequence[float], L_values: Sequence[float]):
    """Parisian functionals of each row for all ``(T, L)``; shape ``(paths, len(T), len(L))``.

    On uniform grids each window width is processed once: the sliding minima are
    running-maximized and read off at every horizon.
    """
    m = values.shape[0]
    out = np.empty((m, len(T_values), len(L_values)))
    for j, L in enumerate(L_values):
        resolved = [resolve_window(grid, ParisianWindow(T, L)) for T in T_values]
        if grid.is_uniform:
            width = resolved[0].width
            n_max = max(r.n_starts for r in resolved)
            mins = values[:, :n_max] if width == 0 else sliding_min(values[:, : n_max + width], width + 1)
            running = np.maximum.accumulate(mins, axis=1)
            for i, r in enumerate(resolved):
                out[:, i, j] = running[:, r.n_starts - 1]
        else:
            for i, r in enumerate(resolved):
                out[:, i, j] = parisian_values(values, r)
    return out


def _effective_L(grid: Grid, T: float, L: float) -> float:
    return resolve_window(grid, ParisianWindow(T, L)).effective_L


def _sampling_grid(horizon: float, grid_step: float) -> Grid:
    return Grid.uniform(horizon, grid_step)


def pickands_samples(
    y_kernel: KernelSpec,
    drift: Drift,
    T_values: Sequence[float],
    L_values: Sequence[float],
    grid_step: float,
    n_paths: int,
    seed: int,
    workers: int | None = None,
    sample_horizon: float | None = None,
    method: str = "auto",
) -> tuple[np.ndarray, Grid, dict]:
    """Per-path Pickands integrands ``exp(Gamma_{T,L}(sqrt(2) Y - Var Y - h))`` before the shift factor.

    Returns the ``(n_paths, len(T), len(L))`` sample tensor, the sampling grid and
    sampler notes.
    """
    T_values = [float(t) for t in T_values]
    L_values = [float(x) for x in L_values]
    if not T_values or min(T_values) <= 0:
        raise ParameterError("horizons T must be > 0")
    if not L_values or min(L_values) < 0:
        raise ParameterError("windows L must be >= 0")
    horizon = max(T_values) + max(L_values)
    if sample_horizon is not None:
        if sample_horizon < horizon:
            raise ParameterError(f"sample_horizon={sample_horizon!r} is below T+L={horizon!r}")
        horizon = sample_horizon
    grid = _sampling_grid(horizon, grid_step)
    shift_free = np.asarray(variance(y_kernel, grid.points)) + drift.shape(grid.points)
    root2 = math.sqrt(2.0)
    source = path_source(y_kernel, grid, seed, method)

    def per_block(block):
        expo = root2 * block - shift_free
        return np.exp(_functional_tensor(expo, grid, T_values, L_values))

    samples = map_paths(source, n_paths, per_block, workers)
    notes = {"sampler": source.sampler_id.value, "jitter": source.jitter, "grid_points": len(grid)}
    return samples, grid, notes


def pickands_mc(
    y_kernel: KernelSpec,
    h: Drift,
    T: float,
    L: float,
    grid_step: float = DEFAULT_GRID_STEP,
    n_paths: int = DEFAULT_N_PATHS,
    seed: int = DEFAULT_SEED,
    workers: int | None = None,
    sample_horizon: float | None = None,
    method: str = "auto",
) -> EstimateWithCI:
    """Estimate ``H^{h}_{Y,T,L} = E sup_{t<=T} inf_{s<=L} exp(sqrt(2) Y(t+s) - Var Y(t+s) - h(t+s))``.

    ``Var Y`` is taken from the kernel exactly. Calls sharing ``seed``,
    ``grid_step`` and ``sample_horizon`` use common random numbers.
    """
    if not T > 0:
        raise ParameterError(f"T={T!r} must be > 0")
    if not L >= 0:
        raise ParameterError(f"L={L!r} must be >= 0")
    samples, grid, notes = pickands_samples(y_kernel, h, [T], [L], grid_step, n_paths, seed, workers,
                                            sample_horizon, method)
    mean, se = _mean_se(samples[:, 0, 0])
    factor = math.exp(-h.shift)
    notes.update({"T": T, "L_requested": L})
    return EstimateWithCI(mean * factor, se * factor, n_paths, seed, grid_step, _effective_L(grid, T, L), notes)


def _increment_limits(samples: np.ndarray, T_ladder: Sequence[float]) -> list[dict]:
    """Top-increment slope estimates for each window column of a ``(paths, T, L)`` tensor."""
    n = samples.shape[0]
    out = []
    for j in range(samples.shape[2]):
        incr, ses = [], []
        for k in range(1, len(T_ladder)):
            diff = (samples[:, k, j] - samples[:, k - 1, j]) / (T_ladder[k] - T_ladder[k - 1])
            mean, se = _mean_se(diff)
            incr.append(mean)
            ses.append(se)
        value, se = incr[-1], ses[-1]
        gap = abs(incr[-1] - incr[-2]) if len(incr) > 1 else 0.0
        flag = ""
        if len(incr) > 1:
            se_pair = math.hypot(ses[-1], ses[-2])
            if incr[-1] - incr[-2] > 3 * se_pair:
                flag = (f"increments increase beyond 3 SE ({incr[-2]!r} -> {incr[-1]!r}, SE {se_pair!r}); "
                        "horizons may be too short")
        else:
            flag = "single increment: no extrapolation-gap estimate"
        heights = [_mean_se(samples[:, k, j]) for k in range(len(T_ladder))]
        out.append({
            "value": value,
            "mc_se": se,
            "gap": gap,
            "std_error": math.hypot(se, gap),
            "increments": incr,
            "increment_se": ses,
            "H_T": [hgt[0] for hgt in heights],
            "H_T_se": [hgt[1] for hgt in heights],
            "flag": flag,
            "n": n,
        })
    return out


def _check_ladder(T_ladder: Sequence[float]) -> tuple[float, ...]:
    ladder = tuple(float(t) for t in T_ladder)
    if len(ladder) < 2 or any(b <= a for a, b in zip(ladder, ladder[1:])) or ladder[0] <= 0:
        raise ParameterError(f"T_ladder={ladder!r} must be increasing, positive, with >= 2 entries")
    return ladder


def pickands_limits_kernel(
    kernel: KernelSpec,
    L_values: Sequence[float],
    T_ladder: Sequence[float],
    grid_step: float,
    n_paths: int,
    seed: int,
    workers: int | None = None,
) -> list[EstimateWithCI]:
    """Per-unit-time limits ``lim_T H_{Y,T,L} / T`` for several windows from one set of paths.

    The slope is the top ladder increment ``(H_{T_K} - H_{T_{K-1}}) / (T_K - T_{K-1})``;
    its MC error comes from per-path differences. The change from the previous
    increment is added in quadrature as an extrapolation-error proxy.
    """
    ladder = _check_ladder(T_ladder)
    samples, grid, notes = pickands_samples(kernel, Drift(), ladder, L_values, grid_step, n_paths, seed, workers)
    results = []
    for L, info in zip(L_values, _increment_limits(samples, ladder)):
        note = dict(notes)
        note.update({
            "T_ladder": list(ladder),
            "increments": info["increments"],
            "increment_se": info["increment_se"],
            "H_T": info["H_T"],
            "H_T_se": info["H_T_se"],
            "mc_se": info["mc_se"],
            "extrapolation_gap": info["gap"],
            "extrapolation_note": info["flag"],
        })
        results.append(EstimateWithCI(info["value"], info["std_error"], n_paths, seed, grid_step,
                                      _effective_L(grid, ladder[-1], L), note))
    return results


def pickands_limit(
    kappa: float,
    L: float,
    T_ladder: Sequence[float] | None = None,
    grid_step: float = DEFAULT_GRID_STEP,
    n_paths: int = DEFAULT_N_PATHS,
    seed: int = DEFAULT_SEED,
    workers: int | None = None,
) -> EstimateWithCI:
    """Estimate the Parisian Pickands constant ``H_{kappa,L} = lim_T H_{kappa,T,L} / T`` of fBm.

    The default ladder is :func:`default_ladder`. The supremum has a tail
    close to ``1/x`` up to ``x ~ exp(T**kappa)``, so the per-path variance grows
    like ``exp(T**kappa)`` while the boundary bias of the increment decays at a
    comparable exponential rate; longer horizons lose more to noise than they gain.
    """
    ladder = default_ladder(kappa) if T_ladder is None else T_ladder
    return pickands_limits_kernel(fbm(kappa), [L], ladder, grid_step, n_paths, seed, workers)[0]


@dataclass
class PickandsTable:
    kappa: float
    L_values: list[float]
    H_values: list[EstimateWithCI]
    T_used: float
    extrapolation_note: str = ""
    raw_values: list[float] = field(default_factory=list)
    isotonic_correction: float = 0.0

    def __post_init__(self):
        if len(self.L_values) != len(self.H_values):
            raise ParameterError("PickandsTable lists must have equal length")
        if any(b <= a for a, b in zip(self.L_values, self.L_values[1:])):
            raise ParameterError("PickandsTable L_values must be strictly increasing")
        if any(not h.value > 0 for h in self.H_values):
            raise ParameterError("PickandsTable H values must be > 0")

    @property
    def values(self) -> np.ndarray:
        return np.array([h.value for h in self.H_values])

    @property
    def errors(self) -> np.ndarray:
        return np.array([h.std_error for h in self.H_values])

    def scaled(self, factor: float) -> PickandsTable:
        return PickandsTable(self.kappa, list(self.L_values), [h.scaled(factor) for h in self.H_values],
                             self.T_used, self.extrapolation_note, [v * factor for v in self.raw_values],
                             self.isotonic_correction * factor)

    def to_csv_rows(self) -> list[list[str]]:
        rows = [["L", "H", "std_error", "n_samples", "seed"]]
        for L, h in zip(self.L_values, self.H_values):
            rows.append([repr(float(L)), repr(float(h.value)), repr(float(h.std_error)), str(h.n_samples), str(h.seed)])
        return rows


def isotonic_nonincreasing(values: np.ndarray, errors: np.ndarray) -> np.ndarray:
    """Weighted pool-adjacent-violators fit, non-increasing, weights ``1/SE**2``."""
    values = np.asarray(values, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if values.size < 2 or np.all(np.diff(values) <= 0):
        return values.copy()
    positive = errors[errors > 0]
    floor = positive.min() if positive.size else 1.0
    weights = 1.0 / np.maximum(errors, floor * 1e-3) ** 2
    return optimize.isotonic_regression(values, weights=weights, increasing=False).x


def build_pickands_table(kappa: float, L_grid: Sequence[float], budget: Budget | None = None) -> PickandsTable:
    """Tabulate ``H_{kappa,L}`` on ``L_grid`` from one set of fBm paths, then make it non-increasing."""
    budget = budget or Budget()
    L_values = sorted(float(x) for x in L_grid)
    if not L_values or L_values[0] < 0:
        raise ParameterError("L_grid must be non-empty with L >= 0")
    if any(b <= a for a, b in zip(L_values, L_values[1:])):
        raise ParameterError("L_grid entries must be distinct")
    ladder = budget.T_ladder or default_ladder(kappa)
    raw = pickands_limits_kernel(fbm(kappa), L_values, ladder, budget.grid_step, budget.n_paths, budget.seed,
                                 budget.workers)
    raw_vals = np.array([r.value for r in raw])
    fitted = isotonic_nonincreasing(raw_vals, np.array([r.std_error for r in raw]))
    notes = sorted({r.notes["extrapolation_note"] for r in raw if r.notes["extrapolation_note"]})
    tiny = []
    for i, est in enumerate(raw):
        est.notes["raw_value"] = float(raw_vals[i])
        value = float(fitted[i])
        if not value > 0:
            # Noise can push a heavily damped window below zero; keep the table positive.
            value = max(est.std_error, np.finfo(float).tiny)
            tiny.append(L_values[i])
        est.value = value
    correction = float(np.max(np.abs(fitted - raw_vals)))
    if tiny:
        notes.append(f"non-positive estimates floored at their SE for L in {tiny}")
    return PickandsTable(kappa, L_values, raw, ladder[-1], "; ".join(notes), raw_vals.tolist(), correction)


@dataclass
class ScalingReport:
    lhs: EstimateWithCI
    rhs: EstimateWithCI
    combined_se: float
    z_score: float
    scale: float
    L: float

    def to_dict(self) -> dict:
        return {"lhs": self.lhs.to_dict(), "rhs": self.rhs.to_dict(), "combined_se": self.combined_se,
                "z_score": self.z_score, "scale": self.scale, "L": self.L}


def scaling_check(y_hat_kernel: KernelSpec, L: float, budget: Budget | None = None) -> ScalingReport:
    """Compare ``H_{Yhat,L}`` with ``s H_{kappa, s L}``, ``s = c**(1/kappa)``, for ``Yhat`` in ``S(kappa, kappa, c)``.

    The fBm side uses the budget's grid step and ladder; the ``Yhat`` side runs at
    both divided by ``s``, so that the two discretizations match after the scaling
    and its bias cancels in the comparison. The sides use seeds ``seed`` and
    ``seed + 1``.
    """
    budget = budget or Budget()
    cls = class_of(y_hat_kernel)
    if not math.isclose(cls.alpha, cls.kappa, rel_tol=1e-12):
        raise ParameterError(f"scaling check needs alpha == kappa, got alpha={cls.alpha!r}, kappa={cls.kappa!r}")
    if not L >= 0:
        raise ParameterError(f"L={L!r} must be >= 0")
    kappa = cls.kappa
    scale = cls.c_Y ** (1.0 / kappa)
    ladder = _check_ladder(budget.T_ladder or default_ladder(kappa))
    lhs = pickands_limits_kernel(y_hat_kernel, [L], [t / scale for t in ladder], budget.grid_step / scale,
                                 budget.n_paths, budget.seed, budget.workers)[0]
    rhs_raw = pickands_limits_kernel(fbm(kappa), [scale * L], ladder, budget.grid_step, budget.n_paths,
                                     budget.seed + 1, budget.workers)[0]
    rhs = rhs_raw.scaled(scale)
    combined = math.hypot(lhs.std_error, rhs.std_error)
    z = (lhs.value - rhs.value) / combined if combined > 0 else 0.0
    return ScalingReport(lhs, rhs, combined, z, scale, L)


# ---------------------------------------------------------------------------
# Ruin probability
# ---------------------------------------------------------------------------


def ruin_functionals(
    model: RiskModel,
    T: float,
    L_values: Sequence[float],
    n_paths: int,
    seed: int,
    grid: Grid | None = None,
    grid_step: float = DEFAULT_GRID_STEP,
    workers: int | None = None,
) -> tuple[np.ndarray, Grid, list[ResolvedWindow], dict]:
    """Per-path ``Gamma_{T,L}(X - d t**gamma)`` for each ``L``; shape ``(n_paths, len(L))``."""
    L_values = [float(x) for x in L_values]
    if not T > 0 or min(L_values) < 0:
        raise ParameterError("ruin window needs T > 0 and L >= 0")
    if grid is None:
        grid = _sampling_grid(T + max(L_values), grid_step)
    resolved = [resolve_window(grid, ParisianWindow(T, L)) for L in L_values]
    trend = model.d * grid.points**model.gamma
    source = path_source(model.x_kernel, grid, seed)

    def per_block(block):
        return _functional_tensor(block - trend, grid, [T], L_values)[:, 0, :]

    values = map_paths(source, n_paths, per_block, workers)
    notes = {"sampler": source.sampler_id.value, "jitter": source.jitter, "grid_points": len(grid)}
    return values, grid, resolved, notes


def _ruin_estimate(functional: np.ndarray, u: float, seed: int, grid: Grid, eff_L: float, notes: dict) -> EstimateWithCI:
    n = functional.shape[0]
    hits = int(np.count_nonzero(functional > u))
    p = hits / n
    se = math.sqrt(p * (1.0 - p) / n)
    note = dict(notes, u=u, hits=hits)
    if hits == 0:
        note["zero_hits"] = f"no ruin observed; one-sided 95% upper bound {-math.log(0.05) / n!r}"
    step = grid.step if grid.is_uniform else float(np.min(np.diff(grid.points)))
    return EstimateWithCI(p, se, n, seed, step, eff_L, note)


def ruin_prob_mc(
    model: RiskModel,
    u: float,
    window: ParisianWindow,
    n_paths: int,
    seed: int,
    grid: Grid | None = None,
    grid_step: float = DEFAULT_GRID_STEP,
    workers: int | None = None,
) -> EstimateWithCI:
    """Crude MC estimate of ``P(sup_{t<=T} inf_{s<=L} (X(t+s) - d (t+s)**gamma) > u)``."""
    if not u > 0:
        raise ParameterError(f"u={u!r} must be > 0")
    return ruin_prob_sweep(model, [u], [window.L], window.T, n_paths, seed, grid, grid_step, workers)[0]


def ruin_prob_sweep(
    model: RiskModel,
    u_values: Sequence[float],
    L_values: Sequence[float],
    T: float,
    n_paths: int,
    seed: int,
    grid: Grid | None = None,
    grid_step: float = DEFAULT_GRID_STEP,
    workers: int | None = None,
) -> list[EstimateWithCI]:
    """Ruin estimates for pairs ``(u_k, L_k)`` on common random numbers.

    ``L_values`` has one entry per ``u`` or a single entry shared by all.
    Thresholds are not restricted to ``u > 0`` here.
    """
    u_values = [float(u) for u in u_values]
    L_values = [float(x) for x in L_values]
    if len(L_values) == 1:
        L_values = L_values * len(u_values)
    if len(L_values) != len(u_values):
        raise ParameterError("L_values must have one entry per u or exactly one entry")
    distinct = sorted(set(L_values))
    values, grid, resolved, notes = ruin_functionals(model, T, distinct, n_paths, seed, grid, grid_step, workers)
    out = []
    for u, L in zip(u_values, L_values):
        j = distinct.index(L)
        note = dict(notes, T=T, L_requested=L)
        out.append(_ruin_estimate(values[:, j], u, seed, grid, resolved[j].effective_L, note))
    return out
