"""Covariance kernels of self-similar Gaussian processes and the risk models built on them.

Every family is evaluated in closed form with numpy broadcasting, so whole
covariance matrices are assembled in one call. The weighted fBm covariance is an
integral; it reduces to a regularized incomplete beta function, and the
adaptive-quadrature evaluation is kept as ``method="quad"`` for cross-checking.
"""

from __future__ import annotations

import configparser
import math
import warnings
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Mapping

import numpy as np
from scipy import integrate, special

from .errors import NumericError, ParameterError


class Family(str, Enum):
    FBM = "fbm"
    EXAMPLE31 = "example31"
    SUB_FBM = "sub_fbm"
    NEG_SUB_FBM = "neg_sub_fbm"
    WEIGHTED_FBM = "weighted_fbm"
    INTEGRATED_FBM = "integrated_fbm"
    TIME_AVG_FBM = "time_avg_fbm"
    DUAL_FBM = "dual_fbm"
    TIME_CHANGED = "time_changed"
    # Wrappers used to build the risk process X from a self-similar Y.
    ANCHORED = "anchored"  # X(t) = Y(anchor) - Y(t)
    REVERSED = "reversed"  # X(t) = Y(anchor - t) on [0, anchor], 0 afterwards
    ZERO = "zero"


_DEFAULTS: dict[Family, dict[str, float]] = {
    Family.FBM: {"kappa": 1.0},
    Family.EXAMPLE31: {"alpha": 1.5},
    Family.SUB_FBM: {"alpha": 1.5},
    Family.NEG_SUB_FBM: {"alpha": 3.0},
    Family.WEIGHTED_FBM: {"a": 2.0, "kappa": 0.5},
    Family.INTEGRATED_FBM: {"alpha": 1.0},
    Family.TIME_AVG_FBM: {"alpha": 1.5},
    Family.DUAL_FBM: {"alpha": 1.5},
    Family.TIME_CHANGED: {"rho": 1.0},
    Family.ANCHORED: {"anchor": 1.0},
    Family.REVERSED: {"anchor": 1.0},
    Family.ZERO: {},
}

_WRAPPERS = (Family.TIME_CHANGED, Family.ANCHORED, Family.REVERSED)


def _check_range(name: str, value: float, lo: float, hi: float, lo_open: bool, hi_open: bool, family: Family):
    ok_lo = value > lo if lo_open else value >= lo
    ok_hi = value < hi if hi_open else value <= hi
    if not (ok_lo and ok_hi):
        interval = f"{'(' if lo_open else '['}{lo:g}, {hi:g}{')' if hi_open else ']'}"
        raise ParameterError(f"{family.value}: {name}={value!r} violates {name} in {interval}")


@dataclass(frozen=True)
class KernelSpec:
    """A covariance kernel: family identity plus its named parameters.

    Missing parameters are filled from the family defaults. Wrapper families
    (``TIME_CHANGED``, ``ANCHORED``, ``REVERSED``) carry the wrapped kernel in
    ``inner``.
    """

    family: Family
    params: Mapping[str, float] = field(default_factory=dict)
    inner: KernelSpec | None = None

    def __post_init__(self):
        family = Family(self.family)
        object.__setattr__(self, "family", family)
        merged = dict(_DEFAULTS[family])
        for key, value in dict(self.params).items():
            if key not in merged:
                raise ParameterError(f"{family.value}: unknown parameter {key!r}")
            merged[key] = float(value)
        object.__setattr__(self, "params", merged)
        if family in _WRAPPERS:
            if self.inner is None:
                raise ParameterError(f"{family.value}: requires an inner kernel")
        elif self.inner is not None:
            raise ParameterError(f"{family.value}: does not take an inner kernel")
        self._validate()

    def _validate(self):
        p, f = self.params, self.family
        if f is Family.FBM:
            _check_range("kappa", p["kappa"], 0, 2, True, False, f)
        elif f in (Family.EXAMPLE31, Family.SUB_FBM):
            _check_range("alpha", p["alpha"], 1, 2, True, True, f)
        elif f is Family.NEG_SUB_FBM:
            _check_range("alpha", p["alpha"], 2, 4, True, False, f)
        elif f is Family.WEIGHTED_FBM:
            _check_range("kappa", p["kappa"], 0, 2, True, False, f)
            if not p["a"] > 1:
                raise ParameterError(f"{f.value}: a={p['a']!r} violates a > 1")
        elif f is Family.INTEGRATED_FBM:
            _check_range("alpha", p["alpha"], 0, 2, True, False, f)
        elif f in (Family.TIME_AVG_FBM, Family.DUAL_FBM):
            _check_range("alpha", p["alpha"], 1, 2, False, False, f)
        elif f is Family.TIME_CHANGED:
            if not p["rho"] > 0:
                raise ParameterError(f"{f.value}: rho={p['rho']!r} violates rho > 0")
        elif f in (Family.ANCHORED, Family.REVERSED):
            if not p["anchor"] > 0:
                raise ParameterError(f"{f.value}: anchor={p['anchor']!r} violates anchor > 0")

    def __getitem__(self, name: str) -> float:
        return self.params[name]

    def describe(self) -> str:
        args = ", ".join(f"{k}={v:g}" for k, v in self.params.items())
        if self.inner is not None:
            args = f"{self.inner.describe()}" + (f", {args}" if args else "")
        return f"{self.family.value}({args})"

    @classmethod
    def of(cls, family: Family | str, inner: KernelSpec | None = None, **params: float) -> KernelSpec:
        return cls(Family(family), params, inner)


def fbm(kappa: float = 1.0) -> KernelSpec:
    return KernelSpec.of(Family.FBM, kappa=kappa)


def time_changed(inner: KernelSpec, rho: float) -> KernelSpec:
    return KernelSpec.of(Family.TIME_CHANGED, inner, rho=rho)


def anchored(inner: KernelSpec, anchor: float = 1.0) -> KernelSpec:
    return KernelSpec.of(Family.ANCHORED, inner, anchor=anchor)


def reversed_kernel(inner: KernelSpec, anchor: float = 1.0) -> KernelSpec:
    return KernelSpec.of(Family.REVERSED, inner, anchor=anchor)


ZERO_KERNEL = KernelSpec(Family.ZERO)


# ---------------------------------------------------------------------------
# Covariance evaluation
# ---------------------------------------------------------------------------


def _pow(x: np.ndarray, e: float) -> np.ndarray:
    return np.power(x, e)


def _integrated_fbm(t: np.ndarray, s: np.ndarray, alpha: float) -> np.ndarray:
    # Sums are grouped symmetrically so that cov(t, s) == cov(s, t) bit for bit.
    cross = (alpha + 2.0) * (_pow(s, alpha + 1.0) * t + s * _pow(t, alpha + 1.0))
    diag = _pow(t, alpha + 2.0) + _pow(s, alpha + 2.0)
    return (cross + _pow(np.abs(t - s), alpha + 2.0) - diag) / (2.0 * (alpha + 1.0))


def _weighted_fbm(t: np.ndarray, s: np.ndarray, a: float, kappa: float) -> np.ndarray:
    alpha = a + kappa - 1.0
    lo = np.minimum(t, s)
    hi = np.maximum(t, s)
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(hi > 0, lo / np.where(hi > 0, hi, 1.0), 0.0)
    return 0.5 * (_pow(lo, alpha) + _pow(hi, alpha) * special.betainc(a, kappa, ratio))


def weighted_fbm_cov_quad(t: float, s: float, a: float, kappa: float, rtol: float = 1e-10) -> float:
    """Weighted fBm covariance by adaptive quadrature of its defining integral.

    The substitution ``u = m * v**(1/a)`` (``m = min(t, s)``) absorbs the
    ``u**(a-1)`` weight; the algebraic singularity of the ``(m - u)**(kappa-1)``
    term at ``v = 1`` goes to QUADPACK's algebraic-weight routine.

    Raises:
        NumericError: if either quadrature does not converge.
    """
    m, big = min(t, s), max(t, s)
    if m <= 0.0:
        return 0.0
    scale = math.exp(special.gammaln(a + kappa) - special.gammaln(a) - special.gammaln(kappa))

    def singular_part(v):
        # (m - m v^{1/a})^{kappa-1} = m^{kappa-1} (1-v)^{kappa-1} * ((1 - v^{1/a}) / (1 - v))^{kappa-1}
        if v >= 1.0:
            q = 1.0 / a
        else:
            q = -math.expm1(math.log(v) / a) / (1.0 - v) if v > 0 else 1.0
        return m ** (kappa - 1.0) * q ** (kappa - 1.0)

    def regular_part(v):
        return (big - m * v ** (1.0 / a)) ** (kappa - 1.0)

    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            i_sing, _ = integrate.quad(singular_part, 0.0, 1.0, weight="alg", wvar=(0.0, kappa - 1.0),
                                       epsabs=0.0, epsrel=rtol, limit=200)
            if big > m:
                i_reg, _ = integrate.quad(regular_part, 0.0, 1.0, epsabs=0.0, epsrel=rtol, limit=400)
            else:
                i_reg = i_sing
        except integrate.IntegrationWarning as exc:
            raise NumericError(f"weighted_fbm quadrature failed at t={t!r}, s={s!r}: {exc}") from exc
    return 0.5 * scale * (m**a / a) * (i_sing + i_reg)


def covariance(kernel: KernelSpec, t, s) -> np.ndarray:
    """Vectorized covariance ``R(t, s)``; ``t`` and ``s`` broadcast against each other."""
    t = np.asarray(t, dtype=float)
    s = np.asarray(s, dtype=float)
    if np.any(t < 0) or np.any(s < 0):
        raise ParameterError("covariance arguments must be >= 0")
    f, p = kernel.family, kernel.params
    if f is Family.FBM:
        k = p["kappa"]
        return 0.5 * ((_pow(t, k) + _pow(s, k)) - _pow(np.abs(t - s), k))
    if f is Family.EXAMPLE31:
        al = p["alpha"]
        return (_pow(t + s, al) - _pow(np.abs(t - s), al)) / 2.0**al
    if f is Family.SUB_FBM:
        al = p["alpha"]
        return ((_pow(t, al) + _pow(s, al)) - (_pow(t + s, al) + _pow(np.abs(t - s), al)) / 2.0) / (
            2.0 - 2.0 ** (al - 1.0)
        )
    if f is Family.NEG_SUB_FBM:
        al = p["alpha"]
        return ((_pow(t + s, al) + _pow(np.abs(t - s), al)) / 2.0 - (_pow(t, al) + _pow(s, al))) / (
            2.0 ** (al - 1.0) - 2.0
        )
    if f is Family.WEIGHTED_FBM:
        return _weighted_fbm(t, s, p["a"], p["kappa"])
    if f is Family.INTEGRATED_FBM:
        return _integrated_fbm(t, s, p["alpha"])
    if f is Family.TIME_AVG_FBM:
        ts = t * s
        with np.errstate(invalid="ignore", divide="ignore"):
            out = _integrated_fbm(t, s, p["alpha"]) / np.where(ts > 0, ts, 1.0)
        return np.where(ts > 0, out, 0.0)
    if f is Family.DUAL_FBM:
        al = p["alpha"]
        tot = t + s
        with np.errstate(invalid="ignore", divide="ignore"):
            out = (_pow(t, al) * s + _pow(s, al) * t) / np.where(tot > 0, tot, 1.0)
        return np.where(tot > 0, out, 0.0)
    if f is Family.TIME_CHANGED:
        rho = p["rho"]
        return covariance(kernel.inner, _pow(t, rho), _pow(s, rho))
    if f is Family.ANCHORED:
        c = p["anchor"]
        inner = kernel.inner
        return (covariance(inner, c, c) + covariance(inner, t, s)) - (
            covariance(inner, c, s) + covariance(inner, c, t)
        )
    if f is Family.REVERSED:
        c = p["anchor"]
        inside = (t <= c) & (s <= c)
        out = covariance(kernel.inner, np.clip(c - t, 0.0, None), np.clip(c - s, 0.0, None))
        return np.where(inside, out, 0.0)
    if f is Family.ZERO:
        return np.zeros(np.broadcast(t, s).shape)
    raise ParameterError(f"unsupported family {f!r}")  # pragma: no cover


def cov_eval(kernel: KernelSpec, t: float, s: float, method: str = "quad") -> float:
    """Covariance ``R(t, s)`` at a single pair of times.

    Weighted fBm is integrated numerically by default; ``method="closed"`` uses
    the incomplete-beta form that :func:`cov_matrix` assembles from.

    """
    if t < 0 or s < 0:
        raise ParameterError(f"cov_eval requires t, s >= 0, got t={t!r}, s={s!r}")
    if method == "quad" and kernel.family is Family.WEIGHTED_FBM:
        return weighted_fbm_cov_quad(t, s, kernel["a"], kernel["kappa"])
    if method not in ("closed", "quad"):
        raise ParameterError(f"unknown method {method!r}")
    return float(covariance(kernel, t, s))


def cov_matrix(kernel: KernelSpec, points) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    return covariance(kernel, pts[:, None], pts[None, :])


def variance(kernel: KernelSpec, points) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    return covariance(kernel, pts, pts)


def variogram(kernel: KernelSpec, t, s) -> np.ndarray | float:
    """``Var(Y(t) - Y(s))``, clamped at zero to absorb cancellation near ``t = s``."""
    v = (covariance(kernel, t, t) + covariance(kernel, s, s)) - 2.0 * covariance(kernel, t, s)
    v = np.maximum(v, 0.0)
    return float(v) if np.ndim(v) == 0 else v


# ---------------------------------------------------------------------------
# Self-similar classes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SelfSimilarClass:
    """Self-similarity index ``alpha/2``, local increment roughness ``kappa``, constant ``c_Y``."""

    alpha: float
    kappa: float
    c_Y: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise ParameterError(f"alpha={self.alpha!r} must be > 0")
        if not 0 < self.kappa <= 2:
            raise ParameterError(f"kappa={self.kappa!r} must lie in (0, 2]")
        if not self.c_Y > 0:
            raise ParameterError(f"c_Y={self.c_Y!r} must be > 0")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.alpha, self.kappa, self.c_Y)


def class_of(kernel: KernelSpec) -> SelfSimilarClass:
    """Tabulated ``(alpha, kappa, c_Y)`` of a kernel family.

    A time change ``Y(t**rho)`` of ``Y`` in ``S(alpha, kappa, c)`` lies in
    ``S(rho*alpha, kappa, c*rho**kappa)``.
    """
    f, p = kernel.family, kernel.params
    if f is Family.FBM:
        return SelfSimilarClass(p["kappa"], p["kappa"], 1.0)
    if f is Family.EXAMPLE31:
        al = p["alpha"]
        return SelfSimilarClass(al, al, 2.0 ** (1.0 - al))
    if f is Family.SUB_FBM:
        al = p["alpha"]
        return SelfSimilarClass(al, al, 1.0 / (2.0 - 2.0 ** (al - 1.0)))
    if f is Family.NEG_SUB_FBM:
        al = p["alpha"]
        return SelfSimilarClass(al, 2.0, al * (al - 1.0) * 2.0 ** (al - 3.0) / (2.0 ** (al - 1.0) - 2.0))
    if f is Family.WEIGHTED_FBM:
        a, k = p["a"], p["kappa"]
        c = math.exp(special.gammaln(a + k) - special.gammaln(a) - special.gammaln(k + 1.0))
        return SelfSimilarClass(a + k - 1.0, k, c)
    if f is Family.INTEGRATED_FBM:
        al = p["alpha"]
        return SelfSimilarClass(al + 2.0, 2.0, al + 2.0)
    if f is Family.TIME_AVG_FBM:
        return SelfSimilarClass(p["alpha"], 2.0, 1.0)
    if f is Family.DUAL_FBM:
        al = p["alpha"]
        return SelfSimilarClass(al, 2.0, al / 2.0)
    if f is Family.TIME_CHANGED:
        inner = class_of(kernel.inner)
        rho = p["rho"]
        return SelfSimilarClass(rho * inner.alpha, inner.kappa, inner.c_Y * rho**inner.kappa)
    raise ParameterError(f"{f.value} is not a self-similar family")


_PROBE_LAMBDAS = (0.5, 2.0)
_PROBE_TIMES = (0.3, 0.7, 1.0)
_PROBE_H = (1e-2, 1e-3, 1e-4)


@dataclass
class CheckResult:
    name: str
    passed: bool
    residual: float
    detail: str = ""


@dataclass
class ClassReport:
    kernel: str
    claimed: SelfSimilarClass
    tol: float
    checks: list[CheckResult]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def verify_class(kernel: KernelSpec, claimed: SelfSimilarClass, tol: float) -> ClassReport:
    """Numerically check the three defining properties of ``S(alpha, kappa, c_Y)``.

    * ``unit_variance``: ``|Var Y(1) - 1| <= tol``.
    * ``self_similarity``: ``|R(lt, ls) - l**alpha R(t, s)| <= tol * l**alpha |R(t, s)|``
      on the fixed probe set.
    * ``variogram_limit``: ``V(1, 1-h) / h**kappa`` at ``h = 1e-2, 1e-3, 1e-4`` approaches
      ``c_Y`` monotonically and ends within relative ``tol``.

    Failures are reported, never raised.
    """
    if not tol > 0:
        raise ParameterError(f"tol={tol!r} must be > 0")
    checks = []

    var1 = float(covariance(kernel, 1.0, 1.0))
    r = abs(var1 - 1.0)
    checks.append(CheckResult("unit_variance", r <= tol, r, f"Var Y(1) = {var1!r}"))

    worst = 0.0
    for lam in _PROBE_LAMBDAS:
        for t in _PROBE_TIMES:
            for s in _PROBE_TIMES:
                base = float(covariance(kernel, t, s))
                scaled = float(covariance(kernel, lam * t, lam * s))
                ref = lam**claimed.alpha * base
                rel = abs(scaled - ref) / max(abs(ref), 1e-300)
                worst = max(worst, rel)
    checks.append(CheckResult("self_similarity", worst <= tol, worst, "max relative residual over probes"))

    ratios = [variogram(kernel, 1.0, 1.0 - h) / h**claimed.kappa for h in _PROBE_H]
    errs = [abs(q / claimed.c_Y - 1.0) for q in ratios]
    monotone = all(e2 <= e1 + 1e-2 * tol for e1, e2 in zip(errs, errs[1:]))
    ok = monotone and errs[-1] <= tol
    detail = "ratios " + ", ".join(f"{q:.8g}" for q in ratios) + ("" if monotone else " (not monotone)")
    checks.append(CheckResult("variogram_limit", ok, errs[-1], detail))
    return ClassReport(kernel.describe(), claimed, tol, checks)


# ---------------------------------------------------------------------------
# Risk models
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RiskModel:
    """Locally self-similar risk process ``X`` with trend ``d t**gamma``.

    ``x_kernel`` is the covariance of ``X`` (maximal unit variance at ``t = 0``),
    ``a`` and ``y_class`` describe the local correlation structure,
    ``b t**beta`` the decay of the standard deviation. ``y_kernel`` is the
    covariance of the local process ``Y``; it is needed only where a Pickands
    constant of ``Y`` itself is simulated.
    """

    x_kernel: KernelSpec
    a: float
    y_class: SelfSimilarClass
    b: float
    beta: float
    d: float
    gamma: float
    horizon_T: float = 1.0
    y_kernel: KernelSpec | None = None
    label: str = ""

    def __post_init__(self):
        for name in ("a", "b", "beta", "d", "gamma", "horizon_T"):
            value = getattr(self, name)
            if not value > 0:
                raise ParameterError(f"RiskModel.{name}={value!r} must be > 0")

    @property
    def alpha(self) -> float:
        return self.y_class.alpha

    @property
    def kappa(self) -> float:
        return self.y_class.kappa

    @property
    def c_Y(self) -> float:
        return self.y_class.c_Y


def _gamma_ratio(*num_den: float) -> float:
    return math.exp(special.gammaln(num_den[0]) - sum(special.gammaln(x) for x in num_den[1:]))


def _ex31(p):
    al = p.pop("alpha", 1.5)
    _check_range("alpha", al, 1, 2, True, True, Family.EXAMPLE31)
    return KernelSpec.of(Family.EXAMPLE31, alpha=al), 1.0, al * 2.0 ** (2.0 - al)


def _ex32(p):
    al = p.pop("alpha", 1.5)
    _check_range("alpha", al, 1, 2, True, True, Family.SUB_FBM)
    return KernelSpec.of(Family.SUB_FBM, alpha=al), al, 2.0 ** (al - 1.0) / (2.0 - 2.0 ** (al - 1.0))


def _ex33(p):
    al = p.pop("alpha", 3.0)
    _check_range("alpha", al, 2, 4, True, False, Family.NEG_SUB_FBM)
    return KernelSpec.of(Family.NEG_SUB_FBM, alpha=al), 2.0, al * (al - 1.0) / (2.0 ** (al - 1.0) - 2.0)


def _ex34(p):
    a, k = p.pop("a", 2.0), p.pop("kappa", 0.5)
    kern = KernelSpec.of(Family.WEIGHTED_FBM, a=a, kappa=k)
    return kern, a, _gamma_ratio(a + k, a + 1.0, k)


def _ex35(p):
    al = p.pop("alpha", 1.0)
    _check_range("alpha", al, 0, 2, True, False, Family.INTEGRATED_FBM)
    # 1 - V(1, x) = (al+2)/(al+1) x^{al+1} + (al+2)/2 x^2 + o(x^2) as x -> 0.
    if al < 1:
        beta, R = al + 1.0, (al + 2.0) / (al + 1.0)
    elif al == 1:
        beta, R = 2.0, 3.0
    else:
        beta, R = 2.0, (al + 2.0) / 2.0
    return KernelSpec.of(Family.INTEGRATED_FBM, alpha=al), beta, R


def _ex36(p):
    al = p.pop("alpha", 1.5)
    _check_range("alpha", al, 1, 2, False, False, Family.TIME_AVG_FBM)
    return KernelSpec.of(Family.TIME_AVG_FBM, alpha=al), 1.0, (2.0 if al == 1 else al / 2.0 + 1.0)


def _ex37(p):
    al = p.pop("alpha", 1.5)
    _check_range("alpha", al, 1, 2, False, False, Family.DUAL_FBM)
    return KernelSpec.of(Family.DUAL_FBM, alpha=al), 1.0, (3.0 if al == 1 else 2.0)


EXAMPLES = {"ex31": _ex31, "ex32": _ex32, "ex33": _ex33, "ex34": _ex34, "ex35": _ex35, "ex36": _ex36, "ex37": _ex37}


def derive_model(example_id: str, free_params: Mapping[str, float] | None = None) -> RiskModel:
    """Risk model ``X(t) = Y(1) - Y(t)`` on ``[0, 1]`` for one of the catalogued examples.

    ``free_params`` holds the family parameters (``alpha``; ``a`` and ``kappa``
    for ``ex34``), the trend coefficient ``d`` (default 1) and optionally
    ``gamma`` (default ``beta / 2``, the choice made in every example).
    The local constants are ``a = 1/2`` and ``b = R/2``, where
    ``1 - Var X(t) ~ R t**beta``.
    """
    key = example_id.lower()
    if key not in EXAMPLES:
        raise ParameterError(f"unknown example {example_id!r}; expected one of {sorted(EXAMPLES)}")
    p = {k: float(v) for k, v in (free_params or {}).items()}
    d = p.pop("d", 1.0)
    gamma = p.pop("gamma", None)
    y_tilde, beta, R = EXAMPLES[key](p)
    if p:
        raise ParameterError(f"{key}: unknown free parameter(s) {sorted(p)}")
    if not d > 0:
        raise ParameterError(f"{key}: d={d!r} violates d > 0")
    return RiskModel(
        x_kernel=anchored(y_tilde),
        a=0.5,
        y_class=class_of(y_tilde),
        b=R / 2.0,
        beta=beta,
        d=d,
        gamma=beta / 2.0 if gamma is None else gamma,
        horizon_T=1.0,
        y_kernel=y_tilde,
        label=f"{key}:{y_tilde.describe()}",
    )


def derive_reversed_model(y_tilde: KernelSpec, d: float = 1.0, gamma: float = 0.5) -> RiskModel:
    """Risk model ``X(t) = Y(1 - t)`` on ``[0, 1]`` (zero afterwards) for a self-similar ``Y``.

    Locally at 0 the correlation deficit is that of fBm ``B_kappa``, so the local
    class is ``(kappa, kappa, 1)`` with ``a = c_Y/2`` (``kappa < 2``) or
    ``(c_Y - alpha**2/4)/2`` (``kappa = 2``), ``b = alpha/2`` and ``beta = 1``.
    """
    cls = class_of(y_tilde)
    if cls.kappa < 2:
        a = cls.c_Y / 2.0
    else:
        a = (cls.c_Y - cls.alpha**2 / 4.0) / 2.0
        if not a > 0:
            raise ParameterError(f"reversed model: c_Y - alpha^2/4 = {2 * a!r} must be > 0 when kappa = 2")
    return RiskModel(
        x_kernel=reversed_kernel(y_tilde),
        a=a,
        y_class=SelfSimilarClass(cls.kappa, cls.kappa, 1.0),
        b=cls.alpha / 2.0,
        beta=1.0,
        d=d,
        gamma=gamma,
        horizon_T=1.0,
        y_kernel=fbm(cls.kappa),
        label=f"reversed:{y_tilde.describe()}",
    )


# ---------------------------------------------------------------------------
# Config files
# ---------------------------------------------------------------------------


def kernel_to_section(kernel: KernelSpec, prefix: str = "") -> dict[str, str]:
    out = {f"{prefix}family": kernel.family.value}
    out.update({f"{prefix}{k}": repr(v) for k, v in kernel.params.items()})
    if kernel.inner is not None:
        out.update(kernel_to_section(kernel.inner, prefix + "inner."))
    return out


def kernel_from_section(section: Mapping[str, str], prefix: str = "") -> KernelSpec:
    try:
        family = Family(section[f"{prefix}family"].strip().lower())
    except KeyError as exc:
        raise ParameterError(f"kernel section lacks '{prefix}family'") from exc
    except ValueError as exc:
        raise ParameterError(f"unknown kernel family {section[prefix + 'family']!r}") from exc
    params = {}
    for key, value in section.items():
        if key.startswith(prefix) and "." not in key[len(prefix):] and key != f"{prefix}family":
            params[key[len(prefix):]] = float(value)
    inner = kernel_from_section(section, prefix + "inner.") if f"{prefix}inner.family" in section else None
    return KernelSpec(family, params, inner)


_MODEL_FIELDS = ("a", "b", "beta", "d", "gamma", "horizon_T")


def model_to_config(model: RiskModel) -> configparser.ConfigParser:
    cfg = configparser.ConfigParser()
    cfg.optionxform = str
    cfg["model"] = {name: repr(getattr(model, name)) for name in _MODEL_FIELDS}
    cfg["model"].update({"alpha": repr(model.alpha), "kappa": repr(model.kappa), "c_Y": repr(model.c_Y)})
    if model.label:
        cfg["model"]["label"] = model.label
    cfg["kernel"] = kernel_to_section(model.x_kernel)
    if model.y_kernel is not None:
        cfg["y_kernel"] = kernel_to_section(model.y_kernel)
    return cfg


def model_from_config(cfg: configparser.ConfigParser) -> RiskModel:
    """Build a model from ``[model]``/``[kernel]`` sections.

    ``[model]`` either names an ``example`` (plus its free parameters) or lists
    every model field explicitly, in which case ``[kernel]`` gives ``x_kernel``.
    """
    if "model" not in cfg:
        raise ParameterError("config lacks a [model] section")
    sec = dict(cfg["model"])
    if "example" in sec:
        example = sec.pop("example")
        sec.pop("label", None)
        return derive_model(example, {k: float(v) for k, v in sec.items()})
    if "kernel" not in cfg:
        raise ParameterError("explicit model config needs a [kernel] section")
    try:
        values = {name: float(sec[name]) for name in _MODEL_FIELDS}
        y_class = SelfSimilarClass(float(sec["alpha"]), float(sec["kappa"]), float(sec["c_Y"]))
    except KeyError as exc:
        raise ParameterError(f"[model] lacks field {exc.args[0]!r}") from exc
    y_kernel = kernel_from_section(cfg["y_kernel"]) if "y_kernel" in cfg else None
    return RiskModel(kernel_from_section(cfg["kernel"]), y_class=y_class, y_kernel=y_kernel,
                     label=sec.get("label", ""), **values)


def save_model(model: RiskModel, path: str | Path) -> None:
    with open(path, "w") as fh:
        model_to_config(model).write(fh)


def load_model(path: str | Path) -> RiskModel:
    cfg = configparser.ConfigParser()
    cfg.optionxform = str
    if not cfg.read(path):
        raise ParameterError(f"cannot read config file {str(path)!r}")
    return model_from_config(cfg)
