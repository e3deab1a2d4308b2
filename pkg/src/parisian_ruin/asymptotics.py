"""Deterministic side of the Parisian ruin asymptotics ``P(ruin) ~ c u**p Psi(u)``.

Covers the standard normal survival function, regime classification, the
window scaling ``L_u = L u**window_exponent``, and the constant ``c`` in each
regime: a quadrature over Pickands constants (cases I and II), a Pickands
constant with drift over an infinite horizon (case III), or a closed form
(degenerate case III).
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import asdict, dataclass, field
from enum import Enum

import numpy as np
from scipy import integrate, interpolate, special

from .errors import CoverageError, NumericError, ParameterError
from .kernels import RiskModel
from .montecarlo import TRUNCATION_LEVEL, Budget, Drift, PickandsTable, build_pickands_table, pickands_mc

EPSILON_SNAP_RTOL = 1e-4
QUAD_EPSABS = 1e-10
QUAD_EPSREL = 1e-10
DAMPING_CUTOFF = 1e-16
COVERAGE_RTOL = 1e-6
_SQRT2 = math.sqrt(2.0)
_X_FLOOR = -700.0
# Largest window tabulated by default; H is non-increasing, so larger windows are
# bounded by the last entry and the coverage check decides whether that is enough.
TABLE_L_CAP = 8.0


def normal_survival(u):
    """``Psi(u) = 1 - Phi(u)``; the far tail goes through ``log_ndtr`` to avoid underflow."""
    u_arr = np.asarray(u, dtype=float)
    with np.errstate(over="ignore", under="ignore"):
        central = 0.5 * special.erfc(u_arr / _SQRT2)
        tail = np.exp(special.log_ndtr(-u_arr))
    out = np.where(u_arr > 8.0, tail, central)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class HatExponents:
    beta_hat: float
    gamma_hat: float


def hat_exponents(alpha: float, beta: float, gamma: float, kappa: float) -> HatExponents:
    """Exponents of the variance decay and trend after the time change ``t -> t**(kappa/alpha)``."""
    for name, value in (("alpha", alpha), ("beta", beta), ("gamma", gamma), ("kappa", kappa)):
        if not value > 0:
            raise ParameterError(f"{name}={value!r} must be > 0")
    if alpha == kappa:
        return HatExponents(float(beta), float(gamma))
    return HatExponents(beta * kappa / alpha, gamma * kappa / alpha)


class Case(str, Enum):
    I = "I"
    II = "II"
    III = "III"
    III_DEGENERATE = "III_DEGENERATE"


@dataclass
class RegimeReport:
    """Regime of a risk model: case, power ``p``, window exponent and (once computed) the constant."""

    case_label: Case
    p: float
    window_exponent: float
    epsilon: float | None = None
    epsilon_max: float | None = None
    d_active: bool = False
    b_active: bool = False
    constant_c: float | None = None
    constant_error: float | None = None
    constant_form: str = ""
    inputs: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["case_label"] = self.case_label.value
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def describe(self) -> str:
        rows = [("case", self.case_label.value), ("p", repr(self.p)), ("window exponent", repr(self.window_exponent))]
        if self.epsilon is not None:
            rows.append(("epsilon", repr(self.epsilon)))
        if self.epsilon_max is not None:
            rows.append(("epsilon max", repr(self.epsilon_max)))
        rows.append(("active terms", ", ".join(n for n, on in (("d t^gamma", self.d_active), ("b t^beta", self.b_active)) if on) or "none"))
        if self.constant_c is not None:
            rows.append(("constant c", f"{self.constant_c!r} +/- {self.constant_error!r}"))
        if self.constant_form:
            rows.append(("constant form", self.constant_form))
        rows.extend((k, repr(v)) for k, v in self.inputs.items())
        width = max(len(k) for k, _ in rows)
        return "\n".join(f"{k:<{width}}  {v}" for k, v in rows)


def _snap(value: float, target: float) -> bool:
    return abs(value - target) <= EPSILON_SNAP_RTOL * abs(target)


def classify(model: RiskModel, epsilon: float | None = None) -> RegimeReport:
    """Classify ``model`` into case I, II, III or degenerate III.

    When ``alpha < min(beta, 2 gamma)`` and ``alpha > kappa`` both case II
    (window exponent ``-2/alpha - epsilon``) and case III (``-2/alpha``) hold; the
    caller picks one through ``epsilon``: a value in ``(0, epsilon_max]`` selects
    case II and ``0`` selects case III. Values within relative ``1e-4`` of
    ``epsilon_max`` or of a gate threshold are snapped onto it.

    Raises:
        ParameterError: if ``epsilon`` is missing or out of range where it is
            needed, or supplied where it is not.
    """
    alpha, kappa, beta, gamma = model.alpha, model.kappa, model.beta, model.gamma
    inputs = {"alpha": alpha, "kappa": kappa, "beta": beta, "gamma": gamma, "a": model.a, "b": model.b,
              "d": model.d, "c_Y": model.c_Y}
    low = min(beta, 2.0 * gamma)
    hat = hat_exponents(alpha, beta, gamma, kappa)
    gap = 2.0 / kappa - max(2.0 / hat.beta_hat, 1.0 / hat.gamma_hat)

    if alpha < low and alpha <= kappa:
        if epsilon is not None:
            raise ParameterError("epsilon applies to case II only; this model is in case I")
        p = gap
        return RegimeReport(Case.I, p, -(2.0 + p * (alpha - kappa)) / alpha, d_active=2 * gamma <= beta,
                            b_active=beta <= 2 * gamma, constant_form="integral over H_{kappa,L}", inputs=inputs)

    if alpha < low:
        eps_max = (alpha - kappa) / alpha * gap
        interval = f"(0, {eps_max!r}]"
        if epsilon is None:
            raise ParameterError(
                f"alpha > kappa with alpha < min(beta, 2 gamma): supply epsilon in {interval} for case II, "
                "or epsilon = 0 for case III"
            )
        eps = float(epsilon)
        if eps == 0.0:
            report = _case_iii(model, inputs, low)
            report.notes.append("epsilon = 0 selects case III in the overlap with case II")
            return report
        if _snap(eps, eps_max):
            eps = eps_max
        if not 0.0 < eps <= eps_max:
            raise ParameterError(f"epsilon={epsilon!r} outside the admissible interval {interval}")
        d_threshold = (alpha - kappa) / alpha * (2.0 / kappa - 1.0 / hat.gamma_hat)
        b_threshold = (alpha - kappa) / alpha * (2.0 / kappa - 2.0 / hat.beta_hat)
        d_on = _snap(eps, d_threshold)
        b_on = _snap(eps, b_threshold)
        for on, thr in ((d_on, d_threshold), (b_on, b_threshold)):
            if on:
                eps = thr if thr <= eps_max else eps
        p = eps * alpha / (alpha - kappa)
        return RegimeReport(Case.II, p, -2.0 / alpha - eps, epsilon=eps, epsilon_max=eps_max, d_active=d_on,
                            b_active=b_on, constant_form="integral over H_{kappa,L}", inputs=inputs)

    if epsilon is not None:
        raise ParameterError("epsilon applies to case II only; this model is in case III")
    return _case_iii(model, inputs, low)


def _case_iii(model: RiskModel, inputs: dict, low: float) -> RegimeReport:
    alpha, beta, gamma = model.alpha, model.beta, model.gamma
    exponent = min(-2.0 / alpha, -2.0 / beta, -1.0 / gamma)
    if alpha > low:
        return RegimeReport(Case.III_DEGENERATE, 0.0, exponent, d_active=2 * gamma <= beta,
                            b_active=beta <= 2 * gamma, constant_form="closed form exp(-b L^beta - d L^gamma)",
                            inputs=inputs)
    return RegimeReport(Case.III, 0.0, exponent, d_active=2 * gamma <= min(alpha, beta),
                        b_active=beta <= min(alpha, 2 * gamma),
                        constant_form="Pickands constant with drift, T = infinity", inputs=inputs)


@dataclass
class ConstantEstimate:
    """Constant ``c`` with an error budget broken into named parts."""

    value: float
    error: float
    form: str
    parts: dict = field(default_factory=dict)

    def __float__(self) -> float:
        return self.value


class _TableInterpolant:
    """Monotone cubic interpolation of ``H`` and linear interpolation of its SE, constant outside."""

    def __init__(self, table: PickandsTable):
        self.L = np.asarray(table.L_values, dtype=float)
        self.H = table.values
        self.se = table.errors
        if self.L.size > 1:
            self._h = interpolate.PchipInterpolator(self.L, self.H, extrapolate=False)
        else:
            self._h = None

    def value(self, x: float) -> float:
        if self._h is None or x <= self.L[0]:
            return float(self.H[0])
        if x >= self.L[-1]:
            return float(self.H[-1])
        return float(self._h(x))

    def error(self, x: float) -> float:
        return float(np.interp(x, self.L, self.se))


def _quad(fn, lo, hi, points=None):
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, err = integrate.quad(fn, lo, hi, epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL, limit=500, points=points)
        except integrate.IntegrationWarning as exc:
            raise NumericError(f"quadrature on [{lo!r}, {hi!r}] did not converge: {exc}") from exc
    return val, err


@dataclass
class _IntegralSetup:
    prefactor: float
    arg_scale: float
    arg_power: float
    weight_power: float
    damping: list


def _setup(model: RiskModel, report: RegimeReport, L: float) -> _IntegralSetup:
    alpha, kappa = model.alpha, model.kappa
    base = (model.a * model.c_Y) ** (1.0 / kappa)
    damping = []
    if report.d_active:
        damping.append((model.d, model.gamma))
    if report.b_active:
        damping.append((model.b, model.beta))
    return _IntegralSetup(base, base * (alpha / kappa) * L, alpha / kappa - 1.0, alpha / kappa - 1.0, damping)


def _log_weight(setup: _IntegralSetup, z: float) -> float:
    return setup.weight_power * math.log(z) - sum(k * z**e for k, e in setup.damping)


def constant_case_i_ii(model: RiskModel, report: RegimeReport, L: float, pickands_table: PickandsTable) -> ConstantEstimate:
    """Constant of cases I and II by quadrature over tabulated ``H_{kappa,L}``.

    ``c = (a c_Y)**(1/kappa) int_0^inf exp(-damping(z)) z**(alpha/kappa - 1) H(K L z**(alpha/kappa - 1)) dz``
    with ``K = (a c_Y)**(1/kappa) alpha/kappa``, integrated in ``x = log z``. The
    damping terms are those flagged active in ``report``. Without damping (case II
    interior) the integral converges only through the decay of ``H`` in its window
    argument; past the table the decay is extrapolated from a log-linear fit of
    the last table points and the resulting tail is added to value and error.

    Raises:
        CoverageError: if the table misses more than a ``1e-6`` share of the
            integral or cannot support the undamped tail.
        ParameterError: if ``report`` is not case I or II.
    """
    if report.case_label not in (Case.I, Case.II):
        raise ParameterError(f"constant_case_i_ii needs case I or II, got {report.case_label.value}")
    if not L >= 0:
        raise ParameterError(f"L={L!r} must be >= 0")
    if not math.isclose(pickands_table.kappa, model.kappa, rel_tol=1e-12):
        raise ParameterError(f"table kappa {pickands_table.kappa!r} differs from model kappa {model.kappa!r}")
    setup = _setup(model, report, L)
    interp = _TableInterpolant(pickands_table)
    constant_arg = setup.arg_scale == 0.0 or setup.arg_power == 0.0
    parts = {}

    def arg_of(z):
        return setup.arg_scale * z**setup.arg_power if not constant_arg else setup.arg_scale

    if constant_arg:
        x = setup.arg_scale
        if interp.L.size and not (interp.L[0] - 1e-12 <= x <= interp.L[-1] + 1e-12):
            raise CoverageError(f"table covers L in [{interp.L[0]!r}, {interp.L[-1]!r}] but needs L = {x!r}")

    if not setup.damping:
        if setup.arg_scale == 0.0 or setup.arg_power <= 0:
            raise ParameterError("undamped constant integral diverges: needs L > 0 in case II")
        return _undamped_constant(model, setup, interp, parts)

    # Integration range in z: the damping factor falls below DAMPING_CUTOFF past z_hi;
    # below z_lo the weight's mass is bounded by (1/s) z_lo**s with s = alpha/kappa.
    s = setup.weight_power + 1.0
    cut = -math.log(DAMPING_CUTOFF)
    z_hi = min((cut / k) ** (1.0 / e) for k, e in setup.damping)
    h_top = float(interp.H.max())
    weight_mass, _ = _quad(lambda x: math.exp(_log_weight(setup, math.exp(x)) + x), -60.0, math.log(z_hi))
    x_hi = math.log(z_hi)
    x_lo = max(min(0.0, math.log(DAMPING_CUTOFF * s * weight_mass) / s), _X_FLOOR)
    z_lo = math.exp(x_lo)
    if x_lo >= x_hi:
        x_lo = x_hi - 40.0

    breaks = None
    if not constant_arg and interp.L.size > 1:
        nodes = interp.L[interp.L > 0]
        zs = (nodes / setup.arg_scale) ** (1.0 / setup.arg_power)
        xs = np.log(zs)
        breaks = [float(x) for x in xs if x_lo < x < x_hi] or None

    def integrand(x):
        z = math.exp(x)
        return math.exp(_log_weight(setup, z) + x) * interp.value(arg_of(z))

    def error_integrand(x):
        z = math.exp(x)
        return math.exp(_log_weight(setup, z) + x) * interp.error(arg_of(z))

    value, quad_err = _quad(integrand, x_lo, x_hi, breaks)
    table_err, _ = _quad(error_integrand, x_lo, x_hi, breaks)
    lower_mass = h_top * z_lo**s / s
    parts.update({"quadrature": quad_err, "table": table_err, "lower_truncation": lower_mass,
                  "upper_truncation": DAMPING_CUTOFF * h_top * weight_mass})

    if not constant_arg and interp.L.size:
        outside = _outside_mass(setup, interp, x_lo, x_hi)
        parts["extrapolated_mass"] = outside
        if outside > COVERAGE_RTOL * value:
            lo_need, hi_need = _needed_range(setup, x_lo, x_hi)
            raise CoverageError(
                f"table covers L in [{interp.L[0]!r}, {interp.L[-1]!r}]; the integrand needs "
                f"L in [{lo_need!r}, {hi_need!r}] (extrapolated share {outside / value:.3g})"
            )
    c = setup.prefactor * value
    err = setup.prefactor * sum(parts.values())
    return ConstantEstimate(c, err, "integral over H_{kappa,L}", {k: setup.prefactor * v for k, v in parts.items()})


def _outside_mass(setup, interp, x_lo, x_hi) -> float:
    """Integral of weight x H over the part of the range where ``H`` is extrapolated."""
    L_min, L_max = float(interp.L[0]), float(interp.L[-1])

    def z_of(arg):
        return (arg / setup.arg_scale) ** (1.0 / setup.arg_power)

    segments = []
    for edge, side in ((L_max, "above"), (L_min, "below")):
        if edge <= 0 and side == "below":
            continue
        x_edge = math.log(z_of(edge))
        # arg grows with z when arg_power > 0.
        grows = setup.arg_power > 0
        if (side == "above") == grows:
            segments.append(((max(x_edge, x_lo), x_hi), side))
        else:
            segments.append(((x_lo, min(x_edge, x_hi)), side))
    # H is non-increasing: past the last node it is at most H[-1], before the first at most max H.
    bounds = {"above": float(interp.H[-1]), "below": float(interp.H.max())}
    total = 0.0
    for (a, b), side in segments:
        if b > a:
            mass, _ = _quad(lambda x: math.exp(_log_weight(setup, math.exp(x)) + x), a, b)
            total += mass * bounds[side]
    return total


def _needed_range(setup, x_lo, x_hi) -> tuple[float, float]:
    ends = [setup.arg_scale * math.exp(x * setup.arg_power) for x in (x_lo, x_hi)]
    return float(min(ends)), float(max(ends))


def _undamped_constant(model, setup, interp, parts) -> ConstantEstimate:
    if interp.L.size < 3:
        raise CoverageError("undamped case II needs at least 3 table points to fit the tail decay")
    top_L = interp.L[-3:]
    top_H = interp.H[-3:]
    slope, intercept = np.polyfit(top_L, np.log(top_H), 1)
    if not slope < 0:
        raise CoverageError(
            f"table tail does not decay (log-linear slope {slope!r} over L in [{top_L[0]!r}, {top_L[-1]!r}]); "
            "extend the L grid"
        )
    s = setup.weight_power + 1.0
    z_max = (interp.L[-1] / setup.arg_scale) ** (1.0 / setup.arg_power)
    z_min = (interp.L[1] / setup.arg_scale) ** (1.0 / setup.arg_power) if interp.L[0] == 0 else None
    x_max = math.log(z_max)

    def integrand(x):
        z = math.exp(x)
        return math.exp(setup.weight_power * x + x) * interp.value(setup.arg_scale * z**setup.arg_power)

    def error_integrand(x):
        z = math.exp(x)
        return math.exp(setup.weight_power * x + x) * interp.error(setup.arg_scale * z**setup.arg_power)

    x_low = max(min(x_max, math.log(DAMPING_CUTOFF * s) / s), _X_FLOOR)
    if z_min is not None:
        x_low = min(x_low, math.log(z_min) - 1.0)
    nodes = interp.L[interp.L > 0]
    breaks = [float(v) for v in np.log((nodes / setup.arg_scale) ** (1.0 / setup.arg_power)) if x_low < v < x_max]
    value, quad_err = _quad(integrand, x_low, x_max, breaks or None)
    table_err, _ = _quad(error_integrand, x_low, x_max, breaks or None)

    def tail_integrand(z):
        return z**setup.weight_power * math.exp(intercept + slope * setup.arg_scale * z**setup.arg_power)

    tail, tail_err = _quad(tail_integrand, z_max, np.inf)
    parts.update({"quadrature": quad_err + tail_err, "table": table_err, "tail_extrapolation": tail,
                  "lower_truncation": float(interp.H.max()) * math.exp(x_low * s) / s})
    c = setup.prefactor * (value + tail)
    err = setup.prefactor * sum(parts.values())
    return ConstantEstimate(c, err, "integral over H_{kappa,L}, log-linear tail beyond the table",
                            {k: setup.prefactor * v for k, v in parts.items()})


def required_L_range(model: RiskModel, report: RegimeReport, L: float) -> tuple[float, float]:
    """Window arguments of ``H_{kappa,.}`` met on the effective range of the case I/II integral."""
    setup = _setup(model, report, L)
    if setup.arg_scale == 0.0:
        return (0.0, 0.0)
    if setup.arg_power == 0.0 or not setup.damping:
        return (setup.arg_scale, setup.arg_scale)
    s = setup.weight_power + 1.0
    z_hi = min((-math.log(DAMPING_CUTOFF) / k) ** (1.0 / e) for k, e in setup.damping)
    x_lo = max(min(0.0, math.log(COVERAGE_RTOL * s) / s), _X_FLOOR)
    return _needed_range(setup, x_lo, math.log(z_hi))


def case_iii_drift(model: RiskModel) -> Drift:
    """Drift of the case III Pickands constant.

    ``h(t) = a**(-beta/alpha) b t**beta [beta <= min(alpha, 2 gamma)]
    + a**(-gamma/alpha) d t**gamma [2 gamma <= min(alpha, beta)]``.
    """
    alpha, beta, gamma, a = model.alpha, model.beta, model.gamma, model.a
    c_beta = a ** (-beta / alpha) * model.b if beta <= min(alpha, 2 * gamma) else 0.0
    c_gamma = a ** (-gamma / alpha) * model.d if 2 * gamma <= min(alpha, beta) else 0.0
    return Drift(c_beta, beta, c_gamma, gamma)


def case_iii_horizon(model: RiskModel, drift: Drift, level: float = TRUNCATION_LEVEL) -> tuple[float, str]:
    """Truncation horizon of the ``T = infinity`` constant and how it was chosen."""
    t_star = drift.level_crossing(level)
    if t_star is not None:
        return t_star, f"truncated where h reaches {level:g}"
    t_star = level ** (1.0 / model.alpha)
    return t_star, f"h is zero; truncated where Var Y(t) = t^alpha reaches {level:g}"


def degenerate_constant(model: RiskModel, L: float) -> float:
    """``exp(-[beta <= 2 gamma] b L**beta - [2 gamma <= beta] d L**gamma)``."""
    expo = 0.0
    if model.beta <= 2 * model.gamma:
        expo -= model.b * L**model.beta
    if 2 * model.gamma <= model.beta:
        expo -= model.d * L**model.gamma
    return math.exp(expo)


def constant_case_iii(model: RiskModel, L: float, budget: Budget | None = None,
                      report: RegimeReport | None = None) -> ConstantEstimate:
    """Constant of case III: closed form when degenerate, otherwise a Monte Carlo Pickands constant.

    The non-degenerate constant is ``H^h_{Y, infinity, a**(1/alpha) L}`` with the
    drift of :func:`case_iii_drift`, estimated on ``[0, T*]`` (see
    :func:`case_iii_horizon`) from paths of ``model.y_kernel``.
    """
    if not L >= 0:
        raise ParameterError(f"L={L!r} must be >= 0")
    if report is None:
        report = classify(model, 0.0 if _in_overlap(model) else None)
    if report.case_label is Case.III_DEGENERATE:
        return ConstantEstimate(degenerate_constant(model, L), 0.0, "closed form exp(-b L^beta - d L^gamma)")
    if report.case_label is not Case.III:
        raise ParameterError(f"constant_case_iii needs case III, got {report.case_label.value}")
    if model.y_kernel is None:
        raise ParameterError("non-degenerate case III needs model.y_kernel to simulate the Pickands constant")
    budget = budget or Budget()
    drift = case_iii_drift(model)
    if drift.is_zero and L == 0:
        raise ParameterError("case III without drift needs L > 0; the L = 0 constant is infinite")
    t_star, how = case_iii_horizon(model, drift)
    window = model.a ** (1.0 / model.alpha) * L
    est = pickands_mc(model.y_kernel, drift, t_star, window, budget.grid_step, budget.n_paths, budget.seed,
                      budget.workers)
    return ConstantEstimate(est.value, est.std_error, f"Pickands constant with drift, T* = {t_star!r}",
                            {"monte_carlo": est.std_error, "truncation": how, "effective_window": est.effective_L})


def _in_overlap(model: RiskModel) -> bool:
    return model.alpha < min(model.beta, 2 * model.gamma) and model.alpha > model.kappa


@dataclass
class AsymptoticResult:
    value: float
    constant: ConstantEstimate
    p: float
    L_u: float
    survival: float
    report: RegimeReport

    def to_dict(self) -> dict:
        return {"value": self.value, "c": self.constant.value, "c_error": self.constant.error, "p": self.p,
                "L_u": self.L_u, "survival": self.survival, "report": self.report.to_dict()}


def pickands_table_for(model: RiskModel, report: RegimeReport, L: float, budget: Budget | None = None,
                       n_points: int = 17) -> PickandsTable:
    """Build a Pickands table on the L range the case I/II integral needs, capped at ``TABLE_L_CAP``."""
    lo, hi = required_L_range(model, report, L)
    hi = min(hi, TABLE_L_CAP)
    lo = min(lo, hi)
    if hi <= 0:
        grid = [0.0]
    elif lo == hi:
        grid = [lo]
    else:
        grid = [0.0] + list(np.geomspace(max(lo, hi * 1e-3), hi, n_points - 1))
    return build_pickands_table(model.kappa, grid, budget)


def asymptotic_ruin(model: RiskModel, u: float, L: float, epsilon: float | None = None,
                    table: PickandsTable | None = None, budget: Budget | None = None,
                    constant: ConstantEstimate | None = None) -> AsymptoticResult:
    """Leading-order ruin asymptotics ``c u**p Psi(u)`` and the window ``L_u = L u**window_exponent``.

    A precomputed ``constant`` (or ``table`` for cases I/II) avoids recomputing
    ``c`` across a sweep in ``u``.
    """
    if not u > 0:
        raise ParameterError(f"u={u!r} must be > 0")
    report = classify(model, epsilon)
    if constant is None:
        if report.case_label in (Case.I, Case.II):
            table = table or pickands_table_for(model, report, L, budget)
            constant = constant_case_i_ii(model, report, L, table)
        else:
            constant = constant_case_iii(model, L, budget, report)
    report.constant_c = constant.value
    report.constant_error = constant.error
    surv = normal_survival(u)
    value = constant.value * u**report.p * surv
    return AsymptoticResult(value, constant, report.p, L * u**report.window_exponent, surv, report)
