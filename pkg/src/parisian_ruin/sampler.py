"""Exact Gaussian path sampling on finite grids.

Two exact samplers are provided: a dense Cholesky factor for arbitrary kernels and
circulant embedding of the increment autocovariance for fBm on uniform grids.

Path ``i`` is always driven by its own Philox stream keyed by ``seed`` with the
counter starting at ``[0, 0, i, 0]``. Paths are produced in blocks whose size
depends on the grid length only and workers take whole blocks, so the output is
bit-identical for any worker count.
"""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Sequence

import numpy as np
import scipy.fft
import scipy.linalg

from .errors import CoverageError, ParameterError, SamplerError, SingularKernelError
from .kernels import Family, KernelSpec, cov_matrix, variance

MAX_GRID_POINTS = 8192
JITTER_LADDER = (0.0, 1e-12, 1e-10, 1e-8)
CIRCULANT_TOL = 1e-10
CIRCULANT_MAX_DOUBLINGS = 4
_BLOCK_DOUBLES = 1 << 19
_SEED_LIMIT = 1 << 64


class SamplerId(str, Enum):
    CHOLESKY = "cholesky"
    CIRCULANT = "circulant"


@dataclass(frozen=True, eq=False)
class Grid:
    """Strictly increasing time points; ``step`` is the spacing of a uniform grid, else 0."""

    points: np.ndarray
    step: float = 0.0

    def __post_init__(self):
        pts = np.array(self.points, dtype=float).ravel()
        if pts.size < 1:
            raise ParameterError("grid must have at least one point")
        if not np.all(np.isfinite(pts)) or pts[0] < 0:
            raise ParameterError("grid points must be finite and >= 0")
        if np.any(np.diff(pts) <= 0):
            raise ParameterError("grid points must be strictly increasing")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "step", float(self.step))

    @classmethod
    def uniform(cls, stop: float, step: float) -> Grid:
        """Points ``0, step, 2*step, ...`` up to the first multiple of ``step`` not below ``stop``."""
        if not step > 0:
            raise ParameterError(f"step={step!r} must be > 0")
        if stop < 0:
            raise ParameterError(f"stop={stop!r} must be >= 0")
        n = int(math.ceil(stop / step - 1e-9))
        return cls(step * np.arange(n + 1), step)

    @classmethod
    def graded(cls, segments: Sequence[tuple[float, float]]) -> Grid:
        """Piecewise-uniform grid from 0; ``segments`` lists ``(segment_end, step)`` pairs."""
        pts = [0.0]
        start = 0.0
        for end, step in segments:
            if not (end > start and step > 0):
                raise ParameterError(f"bad graded segment ({end!r}, {step!r}) after {start!r}")
            n = int(round((end - start) / step))
            if n < 1 or abs(start + n * step - end) > 1e-9 * max(1.0, end):
                raise ParameterError(f"segment [{start!r}, {end!r}] is not a multiple of step {step!r}")
            pts.extend(start + step * np.arange(1, n + 1))
            start = float(end)
        return cls(np.array(pts))

    def __len__(self) -> int:
        return self.points.size

    @property
    def is_uniform(self) -> bool:
        return self.step > 0

    @property
    def end(self) -> float:
        return float(self.points[-1])


@dataclass
class PathMatrix:
    grid: Grid
    values: np.ndarray
    seed: int
    sampler_id: SamplerId
    jitter: float = 0.0

    @property
    def n_paths(self) -> int:
        return self.values.shape[0]

    def to_csv(self, path: str | os.PathLike) -> None:
        """Dump one row per path under a header row of grid points (atomic write)."""
        tmp = f"{os.fspath(path)}.tmp"
        with open(tmp, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow([repr(float(t)) for t in self.grid.points])
            for row in self.values:
                writer.writerow([repr(float(v)) for v in row])
        os.replace(tmp, path)


def _check_seed(seed: int) -> int:
    seed = int(seed)
    if not 0 <= seed < _SEED_LIMIT:
        raise ParameterError(f"seed={seed!r} must be a 64-bit unsigned integer")
    return seed


class PathStreams:
    """Counter-based normal streams, one per path index, for a fixed seed."""

    def __init__(self, seed: int):
        self._bitgen = np.random.Philox(key=_check_seed(seed))
        self._gen = np.random.Generator(self._bitgen)
        self._key = self._bitgen.state["state"]["key"].copy()
        self._buffer = np.zeros(4, dtype=np.uint64)

    def normals(self, index: int, size: int) -> np.ndarray:
        self._bitgen.state = {
            "bit_generator": "Philox",
            "state": {"counter": np.array([0, 0, index, 0], dtype=np.uint64), "key": self._key},
            "buffer": self._buffer,
            "buffer_pos": 4,
            "has_uint32": 0,
            "uinteger": 0,
        }
        return self._gen.standard_normal(size)

    def block(self, start: int, stop: int, size: int) -> np.ndarray:
        out = np.empty((stop - start, size))
        for row, index in enumerate(range(start, stop)):
            out[row] = self.normals(index, size)
        return out


def block_size_for(width: int) -> int:
    return max(1, min(4096, _BLOCK_DOUBLES // max(width, 1)))


# ---------------------------------------------------------------------------
# Cholesky
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Factor:
    """Lower Cholesky factor of the covariance restricted to nonzero-variance grid points.

    Points with exactly zero variance (``t = 0`` for self-similar processes) are
    pinned to 0 instead of being jittered.
    """

    kernel: KernelSpec
    grid: Grid
    lower: np.ndarray
    active: np.ndarray
    jitter: float

    @property
    def n_normals(self) -> int:
        return self.lower.shape[0]

    def dense(self) -> np.ndarray:
        """The factor embedded in the full grid (zero rows at pinned points)."""
        out = np.zeros((len(self.grid), self.n_normals))
        out[self.active] = self.lower
        return out


def factorize(kernel: KernelSpec, grid: Grid, max_points: int = MAX_GRID_POINTS) -> Factor:
    """Cholesky factor of the kernel's covariance matrix on ``grid``.

    Raises:
        ParameterError: if the grid is longer than ``max_points``.
        SingularKernelError: if factorization fails at the largest jitter.
    """
    if len(grid) > max_points:
        raise ParameterError(f"grid of {len(grid)} points exceeds the Cholesky maximum {max_points}")
    var = variance(kernel, grid.points)
    if np.any(var < 0):
        raise SingularKernelError(f"{kernel.describe()}: negative variance on grid")
    active = np.flatnonzero(var > 0)
    if active.size == 0:
        return Factor(kernel, grid, np.zeros((0, 0)), active, 0.0)
    cov = cov_matrix(kernel, grid.points[active])
    scale = float(np.max(np.diag(cov)))
    eye = np.eye(active.size)
    for rel in JITTER_LADDER:
        try:
            lower = scipy.linalg.cholesky(cov + rel * scale * eye, lower=True, check_finite=False)
        except np.linalg.LinAlgError:
            continue
        if np.all(np.isfinite(lower)):
            return Factor(kernel, grid, lower, active, rel * scale)
    raise SingularKernelError(
        f"{kernel.describe()}: Cholesky failed at jitter {JITTER_LADDER[-1]:g} x max diagonal "
        f"on a grid of {len(grid)} points in [{grid.points[0]!r}, {grid.end!r}]"
    )


class PathSource:
    """Blockwise generator of sample paths on a fixed grid."""

    sampler_id: SamplerId
    grid: Grid
    seed: int
    jitter: float = 0.0

    @property
    def block_size(self) -> int:
        return block_size_for(max(self._width, len(self.grid)))

    def block(self, start: int, stop: int) -> np.ndarray:
        raise NotImplementedError


class CholeskySource(PathSource):
    sampler_id = SamplerId.CHOLESKY

    def __init__(self, factor: Factor, seed: int):
        self.factor = factor
        self.grid = factor.grid
        self.seed = _check_seed(seed)
        self.jitter = factor.jitter
        self._width = factor.n_normals
        self._lower_t = np.ascontiguousarray(factor.lower.T)

    def block(self, start: int, stop: int) -> np.ndarray:
        out = np.zeros((stop - start, len(self.grid)))
        if self._width:
            z = PathStreams(self.seed).block(start, stop, self._width)
            out[:, self.factor.active] = z @ self._lower_t
        return out


# ---------------------------------------------------------------------------
# Circulant embedding for fBm
# ---------------------------------------------------------------------------


def fgn_autocovariance(kappa: float, step: float, n_lags: int) -> np.ndarray:
    k = np.arange(n_lags, dtype=float)
    return 0.5 * step**kappa * (np.abs(k + 1) ** kappa - 2 * k**kappa + np.abs(k - 1) ** kappa)


def circulant_eigenvalues(kappa: float, step: float, n_increments: int) -> np.ndarray:
    """Nonnegative half-spectrum of the minimal valid circulant embedding.

    Raises:
        SamplerError: if negative eigenvalues persist after the allowed doublings.
    """
    size = 2
    while size < 2 * max(n_increments - 1, 1):
        size *= 2
    for _ in range(CIRCULANT_MAX_DOUBLINGS + 1):
        half = size // 2
        acov = fgn_autocovariance(kappa, step, half + 1)
        row = np.concatenate([acov, acov[half - 1:0:-1]])
        eig = scipy.fft.rfft(row).real
        if eig.min() >= -CIRCULANT_TOL * acov[0]:
            return np.clip(eig, 0.0, None)
        size *= 2
    raise SamplerError(
        f"circulant embedding for kappa={kappa!r} stayed indefinite after "
        f"{CIRCULANT_MAX_DOUBLINGS} doublings; use the Cholesky sampler instead"
    )


class CirculantSource(PathSource):
    sampler_id = SamplerId.CIRCULANT

    def __init__(self, kappa: float, grid: Grid, seed: int):
        if not 0 < kappa < 2:
            raise ParameterError(f"circulant sampler needs kappa in (0, 2), got {kappa!r}")
        if not grid.is_uniform or grid.points[0] != 0.0:
            raise ParameterError("circulant sampler needs a uniform grid starting at 0")
        self.kappa = kappa
        self.grid = grid
        self.seed = _check_seed(seed)
        self._n_inc = len(grid) - 1
        if self._n_inc:
            eig = circulant_eigenvalues(kappa, grid.step, self._n_inc)
            self._size = 2 * (eig.size - 1)
            self._amp = np.sqrt(eig * self._size)
        else:
            self._size = 0
        self._width = self._size

    def block(self, start: int, stop: int) -> np.ndarray:
        m = stop - start
        out = np.zeros((m, len(self.grid)))
        if not self._n_inc:
            return out
        size, half = self._size, self._size // 2
        z = PathStreams(self.seed).block(start, stop, size)
        spec = np.empty((m, half + 1), dtype=complex)
        spec[:, 0] = z[:, 0]
        spec[:, half] = z[:, 1]
        spec[:, 1:half] = (z[:, 2 : half + 1] + 1j * z[:, half + 1 :]) / math.sqrt(2.0)
        inc = scipy.fft.irfft(spec * self._amp, n=size, axis=1)[:, : self._n_inc]
        np.cumsum(inc, axis=1, out=out[:, 1:])
        return out


# ---------------------------------------------------------------------------
# Drivers
# ---------------------------------------------------------------------------


def default_workers() -> int:
    env = os.environ.get("PARISIAN_WORKERS")
    if env:
        try:
            n = int(env)
        except ValueError as exc:
            raise ParameterError(f"PARISIAN_WORKERS={env!r} is not an integer") from exc
        if n < 1:
            raise ParameterError(f"PARISIAN_WORKERS={env!r} must be >= 1")
        return n
    return len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else (os.cpu_count() or 1)


def map_paths(
    source: PathSource,
    n_paths: int,
    fn: Callable[[np.ndarray], np.ndarray],
    workers: int | None = None,
) -> np.ndarray:
    """Apply ``fn`` to every block of paths and stack the per-path results in path order."""
    if n_paths < 1:
        raise ParameterError(f"n_paths={n_paths!r} must be >= 1")
    bs = source.block_size
    bounds = [(s, min(s + bs, n_paths)) for s in range(0, n_paths, bs)]

    def run(b):
        return np.asarray(fn(source.block(*b)))

    workers = default_workers() if workers is None else workers
    if workers < 1:
        raise ParameterError(f"workers={workers!r} must be >= 1")
    if workers == 1 or len(bounds) == 1:
        parts = [run(b) for b in bounds]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, bounds))
    return np.concatenate(parts, axis=0)


def use_circulant(kernel: KernelSpec, grid: Grid) -> bool:
    return (
        kernel.family is Family.FBM
        and 0 < kernel["kappa"] < 2
        and grid.is_uniform
        and grid.points[0] == 0.0
        and len(grid) > 2
    )


def path_source(kernel: KernelSpec, grid: Grid, seed: int, method: str = "auto") -> PathSource:
    """Pick a sampler: circulant for fBm on uniform grids from 0 (``auto``), else Cholesky."""
    if method not in ("auto", "cholesky", "circulant"):
        raise ParameterError(f"unknown sampler method {method!r}")
    if method == "circulant" or (method == "auto" and use_circulant(kernel, grid)):
        if kernel.family is not Family.FBM:
            raise ParameterError("circulant sampler supports fBm only")
        return CirculantSource(kernel["kappa"], grid, seed)
    return CholeskySource(factorize(kernel, grid), seed)


def _collect(source: PathSource, n_paths: int, workers: int | None) -> PathMatrix:
    values = map_paths(source, n_paths, lambda block: block, workers)
    return PathMatrix(source.grid, values, source.seed, source.sampler_id, source.jitter)


def sample_paths(kernel: KernelSpec, grid: Grid, n_paths: int, seed: int, workers: int | None = None) -> PathMatrix:
    """Sample ``n_paths`` i.i.d. paths of the kernel's process with the Cholesky sampler."""
    if n_paths < 1:
        raise ParameterError(f"n_paths={n_paths!r} must be >= 1")
    return _collect(CholeskySource(factorize(kernel, grid), seed), n_paths, workers)


def sample_fbm_circulant(kappa: float, grid: Grid, n_paths: int, seed: int, workers: int | None = None) -> PathMatrix:
    """Sample fBm paths with ``B(0) = 0`` by circulant embedding of fractional Gaussian noise."""
    if n_paths < 1:
        raise ParameterError(f"n_paths={n_paths!r} must be >= 1")
    return _collect(CirculantSource(kappa, grid, seed), n_paths, workers)


def require_coverage(grid: Grid, horizon: float) -> None:
    if grid.end < horizon - 1e-12 * max(1.0, horizon):
        raise CoverageError(f"grid ends at {grid.end!r} but [0, {horizon!r}] is required")
