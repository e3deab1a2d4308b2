"""Discrete Parisian functional ``sup_{t<=T} inf_{t<=r<=t+L} f(r)`` on sampled paths.

On a uniform grid the window ``L`` is rounded to a whole number of steps and the
inner minimum is a fixed-width sliding minimum, computed for all paths at once
with the van Herk / Gil-Werman block scheme. Non-uniform grids use a sparse
table for variable-width range minima.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CoverageError, ParameterError
from .sampler import Grid

_REL_TOL = 1e-9


@dataclass(frozen=True)
class ParisianWindow:
    """Search horizon ``T`` for the window start and persistence length ``L``."""

    T: float
    L: float = 0.0

    def __post_init__(self):
        if not self.T > 0:
            raise ParameterError(f"window T={self.T!r} must be > 0")
        if not self.L >= 0:
            raise ParameterError(f"window L={self.L!r} must be >= 0")


@dataclass(frozen=True)
class ResolvedWindow:
    """A window mapped onto grid indices.

    ``n_starts`` window starts ``t_i <= T``; on uniform grids each window spans
    ``width + 1`` points, otherwise start ``i`` ends at index ``ends[i]``.
    """

    n_starts: int
    effective_L: float
    width: int | None = None
    ends: np.ndarray | None = None


def _as_grid(grid) -> Grid:
    return grid if isinstance(grid, Grid) else Grid(np.asarray(grid, dtype=float))


def resolve_window(grid, window: ParisianWindow) -> ResolvedWindow:
    """Map ``window`` onto ``grid``.

    Raises:
        CoverageError: if the grid does not reach ``T + L`` (after rounding ``L``).
    """
    grid = _as_grid(grid)
    pts = grid.points
    horizon = window.T * (1 + _REL_TOL) + 1e-300
    n_starts = int(np.searchsorted(pts, horizon, side="right"))
    if n_starts == 0:
        raise CoverageError(f"grid starts at {pts[0]!r}, after T={window.T!r}")
    if grid.is_uniform:
        width = int(round(window.L / grid.step))
        eff_L = width * grid.step
        need = n_starts - 1 + width
        if need > len(pts) - 1 or grid.end < window.T * (1 - _REL_TOL):
            raise CoverageError(
                f"uniform grid [0, {grid.end!r}] does not cover [0, T+L] = [0, {window.T + eff_L!r}]"
            )
        return ResolvedWindow(n_starts, eff_L, width=width)
    if grid.end < (window.T + window.L) * (1 - _REL_TOL):
        raise CoverageError(f"grid [0, {grid.end!r}] does not cover [0, T+L] = [0, {window.T + window.L!r}]")
    starts = pts[:n_starts]
    ends = np.searchsorted(pts, starts + window.L * (1 + _REL_TOL), side="right") - 1
    ends = np.minimum(ends, len(pts) - 1)
    return ResolvedWindow(n_starts, float(window.L), ends=ends)


def sliding_min(values: np.ndarray, size: int) -> np.ndarray:
    """Minima over every run of ``size`` consecutive columns (rows are independent paths)."""
    values = np.atleast_2d(values)
    n = values.shape[1]
    if size < 1 or size > n:
        raise ParameterError(f"window size {size!r} must lie in [1, {n}]")
    if size == 1:
        return values.copy()
    n_blocks = -(-n // size)
    padded = np.full((values.shape[0], n_blocks * size), np.inf)
    padded[:, :n] = values
    blocks = padded.reshape(values.shape[0], n_blocks, size)
    prefix = np.minimum.accumulate(blocks, axis=2).reshape(values.shape[0], -1)
    suffix = np.minimum.accumulate(blocks[:, :, ::-1], axis=2)[:, :, ::-1].reshape(values.shape[0], -1)
    out_len = n - size + 1
    return np.minimum(suffix[:, :out_len], prefix[:, size - 1 : size - 1 + out_len])


def range_min(values: np.ndarray, starts: np.ndarray, ends: np.ndarray) -> np.ndarray:
    """Minima over inclusive column ranges ``[starts[k], ends[k]]`` via a sparse table."""
    values = np.atleast_2d(values)
    lengths = ends - starts + 1
    if np.any(lengths < 1):
        raise ParameterError("range_min needs ends >= starts")
    levels = [values]
    span = 1
    while 2 * span <= lengths.max():
        prev = levels[-1]
        levels.append(np.minimum(prev[:, :-span], prev[:, span:]))
        span *= 2
    order = np.floor(np.log2(lengths)).astype(int)
    # Guard against log2 rounding at exact powers of two.
    order = np.where((1 << (order + 1)) <= lengths, order + 1, order)
    order = np.where((1 << order) > lengths, order - 1, order)
    out = np.empty((values.shape[0], starts.size))
    for k in np.unique(order):
        sel = np.flatnonzero(order == k)
        table = levels[k]
        left = table[:, starts[sel]]
        right = table[:, ends[sel] - (1 << k) + 1]
        out[:, sel] = np.minimum(left, right)
    return out


def parisian_values(values: np.ndarray, resolved: ResolvedWindow) -> np.ndarray:
    """Parisian functional of each row of ``values`` for a window already mapped to the grid."""
    values = np.atleast_2d(values)
    n = resolved.n_starts
    if resolved.width is not None:
        if resolved.width == 0:
            return values[:, :n].max(axis=1)
        mins = sliding_min(values[:, : n + resolved.width], resolved.width + 1)
        return mins.max(axis=1)
    starts = np.arange(n)
    return range_min(values, starts, resolved.ends).max(axis=1)


def parisian(values, grid, window: ParisianWindow):
    """Parisian functional of one path (1-D input, float output) or of every row of a matrix.

    With ``L = 0`` this is exactly the grid maximum over ``[0, T]``.
    """
    arr = np.asarray(values, dtype=float)
    grid = _as_grid(grid)
    if arr.shape[-1] != len(grid):
        raise ParameterError(f"path length {arr.shape[-1]} does not match grid length {len(grid)}")
    out = parisian_values(arr, resolve_window(grid, window))
    return float(out[0]) if arr.ndim == 1 else out


def apply_trend(values, grid, d: float, gamma: float) -> np.ndarray:
    """Subtract ``d * t**gamma`` from path values."""
    if d < 0:
        raise ParameterError(f"trend d={d!r} must be >= 0")
    if not gamma > 0:
        raise ParameterError(f"trend gamma={gamma!r} must be > 0")
    pts = _as_grid(grid).points
    arr = np.asarray(values, dtype=float)
    if d == 0:
        return arr.copy()
    return arr - d * pts**gamma


def pickands_exponent(zeta, variances, h, scale: float = np.sqrt(2.0)) -> np.ndarray:
    """``sqrt(2) * zeta - Var(zeta) - h`` on the grid."""
    return scale * np.asarray(zeta, dtype=float) - (np.asarray(variances, dtype=float) + np.asarray(h, dtype=float))


def pickands_integrand(zeta, variances, h, grid, window: ParisianWindow):
    """``sup_t inf_s exp(sqrt(2) zeta - Var zeta - h)`` with the windowing of :func:`parisian`.

    ``exp`` is monotone, so the functional is taken on the exponent and
    exponentiated once per path.
    """
    zeta = np.asarray(zeta, dtype=float)
    out = np.exp(parisian(pickands_exponent(zeta, variances, h), grid, window))
    return float(out) if np.ndim(out) == 0 else out
