"""Biphoton joint spectral amplitudes and the two-photon overlap integral.

Frequencies are dimensionless (units of the single-photon bandwidth) and
delays are in the reciprocal unit. All integrals use composite Simpson
weights on a uniform tensor grid with the same nodes on both axes.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Union

import numpy as np
from scipy.optimize import brentq

__all__ = [
    "BiphotonAmplitude",
    "CoverageError",
    "FrequencyGrid",
    "GaussianSeparable",
    "OverlapResult",
    "SpdcSincGaussian",
    "Tabulated",
    "amplitude_from_dict",
    "coherence_time",
    "load_tabulated",
    "normalize",
    "overlap_integral",
    "overlap_scan",
    "sample",
    "save_tabulated",
    "spdc_amplitude",
]

COVERAGE_WIDTHS = 6.0
CONVERGENCE_TOL = 1e-6
NORMALIZATION_TOL = 1e-8


class CoverageError(ValueError):
    """The frequency window truncates a visible part of the amplitude."""


@dataclass(frozen=True)
class FrequencyGrid:
    omega_min: float
    omega_max: float
    n_points: int = 257

    def __post_init__(self):
        object.__setattr__(self, "omega_min", float(self.omega_min))
        object.__setattr__(self, "omega_max", float(self.omega_max))
        if not (math.isfinite(self.omega_min) and math.isfinite(self.omega_max)):
            raise ValueError("grid bounds must be finite")
        if not self.omega_min < self.omega_max:
            raise ValueError("omega_min must be smaller than omega_max")
        if int(self.n_points) != self.n_points or self.n_points < 16:
            raise ValueError(f"n_points must be an integer >= 16, got {self.n_points!r}")
        if self.n_points % 2 == 0:
            raise ValueError("n_points must be odd (composite Simpson needs an even number of panels)")
        object.__setattr__(self, "n_points", int(self.n_points))

    @property
    def h(self) -> float:
        return (self.omega_max - self.omega_min) / (self.n_points - 1)

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(self.omega_min, self.omega_max, self.n_points)

    @property
    def weights(self) -> np.ndarray:
        w = np.ones(self.n_points)
        w[1:-1:2] = 4.0
        w[2:-1:2] = 2.0
        return w * (self.h / 3.0)

    def refined(self) -> "FrequencyGrid":
        """Same window with the spacing halved (old nodes are kept)."""
        return FrequencyGrid(self.omega_min, self.omega_max, 2 * self.n_points - 1)

    def coarsened(self) -> "FrequencyGrid | None":
        """Every other node, or None when that would not leave an odd count >= 16."""
        n = (self.n_points + 1) // 2
        if n % 2 == 0 or n < 16:
            return None
        return FrequencyGrid(self.omega_min, self.omega_max, n)

    def to_dict(self) -> dict:
        return {"omega_min": self.omega_min, "omega_max": self.omega_max, "n_points": self.n_points}


# ---------------------------------------------------------------------------
# amplitude families
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GaussianSeparable:
    """psi = scale * g1(w1) * g2(w2) with g_k(w) = exp(-((w - center_k) / width_k)^2).

    Widths are 1/e half-widths of the amplitude, so |g_k|^2 has variance width_k^2 / 4.
    """

    center1: float
    center2: float
    width1: float = 1.0
    width2: float = 1.0
    scale: complex = 1.0

    def __post_init__(self):
        if self.width1 <= 0 or self.width2 <= 0:
            raise ValueError("Gaussian widths must be positive")

    def __call__(self, w1, w2):
        g1 = np.exp(-(((np.asarray(w1) - self.center1) / self.width1) ** 2))
        g2 = np.exp(-(((np.asarray(w2) - self.center2) / self.width2) ** 2))
        return self.scale * g1 * g2

    def analytic_norm(self) -> float:
        """L2 norm over the whole plane."""
        return abs(self.scale) * math.sqrt(0.5 * math.pi * self.width1 * self.width2)

    def check_coverage(self, grid: FrequencyGrid) -> None:
        for c, w, label in ((self.center1, self.width1, "1"), (self.center2, self.width2, "2")):
            lo, hi = c - COVERAGE_WIDTHS * w, c + COVERAGE_WIDTHS * w
            if lo < grid.omega_min or hi > grid.omega_max:
                raise CoverageError(
                    f"grid [{grid.omega_min}, {grid.omega_max}] does not contain "
                    f"[{lo:.6g}, {hi:.6g}] required for marginal {label}"
                )

    def descriptor(self) -> dict:
        return {
            "kind": "gaussian",
            "center1": self.center1,
            "center2": self.center2,
            "width1": self.width1,
            "width2": self.width2,
        }


@dataclass(frozen=True)
class SpdcSincGaussian:
    """Pulsed-pump down-conversion amplitude with linearized phase mismatch.

    The mismatch vanishes at degeneracy, w_i = w_s = omega_p / 2, and grows as
    ``kappa_i (w_i - omega_p/2) + kappa_s (w_s - omega_p/2)``.
    """

    omega_p: float
    tau_p: float
    L: float
    kappa_i: float
    kappa_s: float
    scale: complex = 1.0

    def __post_init__(self):
        if self.tau_p <= 0 or self.L <= 0:
            raise ValueError("tau_p and L must be positive")
        if self.kappa_i == 0 and self.kappa_s == 0:
            raise ValueError("at least one of kappa_i, kappa_s must be nonzero")

    def __call__(self, w1, w2):
        return self.scale * spdc_amplitude(self, w1, w2)

    def _extent(self) -> float:
        pump_width = 2.0 / self.tau_p
        slopes = [abs(k) for k in (self.kappa_i, self.kappa_s) if k != 0]
        lobe = 2.0 * math.pi / (self.L * min(slopes))
        return COVERAGE_WIDTHS * max(pump_width, lobe)

    def check_coverage(self, grid: FrequencyGrid) -> None:
        center = 0.5 * self.omega_p
        extent = self._extent()
        if center - extent < grid.omega_min or center + extent > grid.omega_max:
            raise CoverageError(
                f"grid [{grid.omega_min}, {grid.omega_max}] does not contain "
                f"[{center - extent:.6g}, {center + extent:.6g}] "
                "(six pump widths and six sinc lobes around degeneracy)"
            )

    def descriptor(self) -> dict:
        return {
            "kind": "spdc",
            "omega_p": self.omega_p,
            "tau_p": self.tau_p,
            "L": self.L,
            "kappa_i": self.kappa_i,
            "kappa_s": self.kappa_s,
        }


@dataclass(frozen=True, eq=False)
class Tabulated:
    """Point samples at the nodes of ``grid``; rows are omega1, columns omega2."""

    grid: FrequencyGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.array(self.values, dtype=complex)
        n = self.grid.n_points
        if values.shape != (n, n):
            raise ValueError(f"tabulated values must have shape {(n, n)}, got {values.shape}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def check_coverage(self, grid: FrequencyGrid) -> None:
        pass

    def descriptor(self) -> dict:
        return {"kind": "tabulated", "grid": self.grid.to_dict()}


BiphotonAmplitude = Union[GaussianSeparable, SpdcSincGaussian, Tabulated]


def spdc_amplitude(params: SpdcSincGaussian, omega_i, omega_s):
    """sinc(dk L / 2pi) * exp(-[(w_s + w_i - w_p) tau_p / 2]^2) with sinc(x) = sin(pi x)/(pi x).

    Ignores ``params.scale``; calling the amplitude object applies it.
    """
    wi = np.asarray(omega_i, dtype=float)
    ws = np.asarray(omega_s, dtype=float)
    half = 0.5 * params.omega_p
    dk = params.kappa_i * (wi - half) + params.kappa_s * (ws - half)
    envelope = np.exp(-(((ws + wi - params.omega_p) * params.tau_p / 2.0) ** 2))
    return np.sinc(dk * params.L / (2.0 * math.pi)) * envelope


def sample(psi: BiphotonAmplitude, grid: FrequencyGrid) -> np.ndarray:
    """Amplitude on the tensor grid, ``out[i, j] = psi(nodes[i], nodes[j])``."""
    if isinstance(psi, Tabulated):
        if psi.grid != grid:
            raise ValueError("tabulated amplitude is only defined on its own grid")
        return psi.values
    w = grid.nodes
    return np.asarray(psi(w[:, None], w[None, :]), dtype=complex)


def _quadrature(values: np.ndarray, grid: FrequencyGrid) -> complex:
    w = grid.weights
    return complex(w @ values @ w)


def _norm(psi: BiphotonAmplitude, grid: FrequencyGrid) -> float:
    return math.sqrt(_quadrature(np.abs(sample(psi, grid)) ** 2, grid).real)


def normalize(psi: BiphotonAmplitude, grid: FrequencyGrid):
    """Rescale ``psi`` to unit L2 norm on ``grid``; returns ``(psi_normalized, norm)``."""
    norm = _norm(psi, grid)
    if not norm >= 1e-300:
        raise ValueError("amplitude vanishes on the grid; check the frequency window")
    if isinstance(psi, Tabulated):
        return Tabulated(psi.grid, psi.values / norm), norm
    return replace(psi, scale=psi.scale / norm), norm


# ---------------------------------------------------------------------------
# overlap integral
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OverlapResult:
    value: complex
    delta_t: float
    grid_used: FrequencyGrid
    converged: bool


class _Kernel:
    """Simpson-weighted psi(w1, w2) psi*(w2, w1) on one grid."""

    def __init__(self, psi: BiphotonAmplitude, grid: FrequencyGrid, renormalize: bool):
        values = sample(psi, grid)
        w = grid.weights
        if renormalize:
            values = values / math.sqrt(float((w @ (np.abs(values) ** 2) @ w)))
        self.grid = grid
        self.nodes = grid.nodes
        self.matrix = values * values.T.conj() * np.outer(w, w)

    def evaluate(self, delta_t: float, workers: int = 1) -> complex:
        # exp[-i(w1 - w2) dt] = a_i * conj(a_j)
        a = np.exp(-1j * self.nodes * delta_t)
        ac = a.conj()
        n = len(a)
        if workers <= 1:
            rows = (self.matrix * ac).sum(axis=1)
        else:
            # each row is summed by the same call whatever the split, so the
            # result is bitwise independent of the worker count
            bounds = np.linspace(0, n, workers + 1).astype(int)
            chunks = list(zip(bounds[:-1], bounds[1:]))
            with ThreadPoolExecutor(max_workers=workers) as pool:
                parts = pool.map(lambda b: (self.matrix[b[0]:b[1]] * ac).sum(axis=1), chunks)
                rows = np.concatenate(list(parts))
        return complex((a * rows).sum())


class _KernelCache:
    def __init__(self, psi: BiphotonAmplitude, grid: FrequencyGrid):
        self.psi = psi
        self.base = grid
        self._kernels: dict[int, _Kernel] = {}

    def at(self, level: int) -> _Kernel:
        """level 0 is the base grid, +k refines k times, -1 drops every other node."""
        if level not in self._kernels:
            grid = self.base
            if level < 0:
                grid = grid.coarsened()
                src = self.psi
                if isinstance(src, Tabulated):
                    src = Tabulated(grid, src.values[::2, ::2])
                self._kernels[level] = _Kernel(src, grid, renormalize=True)
            else:
                for _ in range(level):
                    grid = grid.refined()
                self._kernels[level] = _Kernel(self.psi, grid, renormalize=level > 0)
        return self._kernels[level]


def _check_inputs(psi: BiphotonAmplitude, grid: FrequencyGrid) -> None:
    psi.check_coverage(grid)
    norm = _norm(psi, grid)
    if abs(norm - 1.0) > NORMALIZATION_TOL:
        raise ValueError(f"amplitude is not normalized on the grid (norm = {norm:.12g})")


def _adaptive(cache: _KernelCache, delta_t: float, tol: float, max_refinements: int,
              workers: int) -> OverlapResult:
    if isinstance(cache.psi, Tabulated):
        # samples cannot be refined: compare against the grid with spacing 2h
        value = cache.at(0).evaluate(delta_t, workers)
        if cache.base.coarsened() is None:
            return OverlapResult(value, delta_t, cache.base, False)
        coarse = cache.at(-1).evaluate(delta_t, workers)
        return OverlapResult(value, delta_t, cache.base, abs(abs(value) - abs(coarse)) < tol)

    previous = cache.at(0).evaluate(delta_t, workers)
    for level in range(1, max_refinements + 1):
        current = cache.at(level).evaluate(delta_t, workers)
        if abs(abs(current) - abs(previous)) < tol:
            return OverlapResult(current, delta_t, cache.at(level).grid, True)
        previous = current
    return OverlapResult(previous, delta_t, cache.at(max_refinements).grid, False)


def overlap_integral(psi: BiphotonAmplitude, delta_t: float, grid: FrequencyGrid, *,
                     tol: float = CONVERGENCE_TOL, max_refinements: int = 3,
                     workers: int = 1) -> OverlapResult:
    """Spectral overlap I(dt) = int int psi(w1,w2) psi*(w2,w1) exp[-i(w1-w2) dt].

    ``psi`` must already be normalized on ``grid``. The value is first
    computed on ``grid`` and then on successively halved spacings until two
    consecutive levels agree in magnitude to ``tol``; the finer of that pair
    is returned together with the grid it came from. Halving the spacing
    matters at long delays, where the alternating Simpson weights alias the
    zero-delay peak to dt = pi / h.
    """
    return overlap_scan(psi, [delta_t], grid, tol=tol, max_refinements=max_refinements,
                        workers=workers)[0]


def overlap_scan(psi: BiphotonAmplitude, delta_t_list: Iterable[float], grid: FrequencyGrid, *,
                 tol: float = CONVERGENCE_TOL, max_refinements: int = 3,
                 workers: int = 1) -> list[OverlapResult]:
    delays = [float(d) for d in delta_t_list]
    if not delays:
        return []
    _check_inputs(psi, grid)
    cache = _KernelCache(psi, grid)
    return [_adaptive(cache, d, tol, max_refinements, workers) for d in delays]


def coherence_time(psi: BiphotonAmplitude, grid: FrequencyGrid, *,
                   tol: float = CONVERGENCE_TOL, max_refinements: int = 3) -> float:
    """Full width at half maximum of |I(dt)|.

    Walks outward from dt = 0 in steps of pi / (window span) until |I| drops
    below half of |I(0)|, then brackets the crossing with Brent's method.
    """
    _check_inputs(psi, grid)
    cache = _KernelCache(psi, grid)

    def magnitude(d):
        return abs(_adaptive(cache, d, tol, max_refinements, 1).value)

    half = 0.5 * magnitude(0.0)
    step = math.pi / (grid.omega_max - grid.omega_min)
    limit = math.pi / grid.h
    lo = 0.0
    while lo < limit:
        hi = lo + step
        if magnitude(hi) < half:
            root = brentq(lambda d: magnitude(d) - half, lo, hi, xtol=1e-12)
            return 2.0 * root
        lo = hi
    raise ValueError("overlap does not fall to half maximum inside the resolvable delay range")


# ---------------------------------------------------------------------------
# tabulated I/O and descriptors
# ---------------------------------------------------------------------------

TABULATED_HEADER = ("omega1", "omega2", "re", "im")


def save_tabulated(path, amplitude: Tabulated) -> None:
    """Write samples as CSV ``omega1,omega2,re,im`` in row-major order."""
    w = amplitude.grid.nodes
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TABULATED_HEADER)
        for i, w1 in enumerate(w):
            for j, w2 in enumerate(w):
                v = amplitude.values[i, j]
                writer.writerow([repr(float(w1)), repr(float(w2)), repr(float(v.real)), repr(float(v.imag))])


def load_tabulated(path, grid: FrequencyGrid) -> Tabulated:
    """Read a tabulated amplitude and check every row sits on the expected node."""
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != TABULATED_HEADER:
            raise ValueError(f"{path}: header must be {','.join(TABULATED_HEADER)}")
        rows = [row for row in reader if row]
    n = grid.n_points
    if len(rows) != n * n:
        raise ValueError(f"{path}: expected {n * n} rows for the declared grid, found {len(rows)}")
    data = np.array(rows, dtype=float)
    nodes = grid.nodes
    expected1 = np.repeat(nodes, n)
    expected2 = np.tile(nodes, n)
    # nodes must be the grid nodes themselves, up to text round-off
    slack = 1e-9 * grid.h
    bad = np.flatnonzero((np.abs(data[:, 0] - expected1) > slack) | (np.abs(data[:, 1] - expected2) > slack))
    if bad.size:
        k = int(bad[0])
        raise ValueError(
            f"{path}: row {k + 2} is at ({data[k, 0]!r}, {data[k, 1]!r}), "
            f"expected node ({expected1[k]!r}, {expected2[k]!r})"
        )
    values = (data[:, 2] + 1j * data[:, 3]).reshape(n, n)
    return Tabulated(grid, values)


def amplitude_from_dict(d: dict, grid: FrequencyGrid | None = None, base_dir=None) -> BiphotonAmplitude:
    """Build an amplitude from a config record with a ``kind`` key."""
    kind = d.get("kind")
    params = {k: v for k, v in d.items() if k != "kind"}
    if kind == "gaussian":
        return GaussianSeparable(**params)
    if kind == "spdc":
        return SpdcSincGaussian(**params)
    if kind == "tabulated":
        if grid is None:
            raise ValueError("a tabulated amplitude needs the frequency grid")
        path = Path(params["path"])
        if base_dir is not None and not path.is_absolute():
            path = Path(base_dir) / path
        return load_tabulated(path, grid)
    raise ValueError(f"unknown biphoton kind {kind!r}")
