"""Photon-counting statistics for one photon in each input port.

Probabilities follow from the first and second factorial moments of the two
output number operators. A complex overlap ``I`` enters the bunching terms
as ``Re I`` and the coincidence cross term as ``Re[I e^{i alpha}]``; for the
real overlaps produced by :mod:`lossybs.spectral` both reduce to the usual
real-valued expressions.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .core_matrix import (
    DEFAULT_TOL,
    ScatteringMatrix,
    alpha_window,
    check_passivity,
)
from .spectral import BiphotonAmplitude, FrequencyGrid, coherence_time, normalize, overlap_scan

__all__ = [
    "HomCurve",
    "NumberMoments",
    "OutcomeDistribution",
    "ParameterMap",
    "hom_scan",
    "map_at",
    "max_coincidence",
    "max_coincidence_map",
    "number_moments",
    "outcome_probabilities",
    "programmability",
    "programmability_map",
    "symmetric_probabilities",
    "tunability_map",
]

OUTCOMES = ("p20", "p02", "p11", "p10", "p01", "p00")
PROB_SLACK = 1e-12
OVERLAP_SLACK = 1e-8
MAP_KINDS = ("tunability", "max_coincidence", "programmability")


@dataclass(frozen=True)
class OutcomeDistribution:
    """Probabilities of (n1, n2) detections; ``raw`` keeps the unclamped values."""

    p20: float
    p02: float
    p11: float
    p10: float
    p01: float
    p00: float
    raw: tuple = field(default=(), compare=False, repr=False)

    @classmethod
    def from_raw(cls, values: Sequence[float]) -> "OutcomeDistribution":
        clamped = []
        for name, v in zip(OUTCOMES, values):
            v = float(v)
            if v < -PROB_SLACK or v > 1.0 + PROB_SLACK:
                raise ValueError(f"{name} = {v!r} is outside [0, 1] beyond rounding")
            clamped.append(min(max(v, 0.0), 1.0))
        return cls(*clamped, raw=tuple(float(v) for v in values))

    def as_tuple(self) -> tuple[float, ...]:
        return tuple(getattr(self, k) for k in OUTCOMES)

    def as_array(self) -> np.ndarray:
        return np.array(self.as_tuple())

    def total(self) -> float:
        return math.fsum(self.as_tuple())

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in OUTCOMES}

    @classmethod
    def from_dict(cls, d: dict) -> "OutcomeDistribution":
        return cls(*(float(d[k]) for k in OUTCOMES))


@dataclass(frozen=True)
class NumberMoments:
    n1: float
    n2: float
    n1n1m1: float
    n2n2m1: float
    n1n2: float

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "NumberMoments":
        return cls(**{k: float(d[k]) for k in ("n1", "n2", "n1n1m1", "n2n2m1", "n1n2")})


def _require_physical(S: ScatteringMatrix, I: complex, tol: float) -> None:
    report = check_passivity(S, tol)
    if not report.passive:
        raise ValueError(f"scattering matrix is not passive (margin {report.eq6_margin:.3g})")
    if abs(I) > 1.0 + OVERLAP_SLACK:
        raise ValueError(f"|I| = {abs(I)!r} exceeds 1")


def number_moments(S: ScatteringMatrix, I: complex, tol: float = DEFAULT_TOL) -> NumberMoments:
    I = complex(I)
    _require_physical(S, I, tol)
    t, r, tau, rho = S.t, S.r, S.tau, S.rho
    cross = (I * complex(math.cos(S.alpha), math.sin(S.alpha))).real
    return NumberMoments(
        n1=t * t + rho * rho,
        n2=tau * tau + r * r,
        n1n1m1=2.0 * t * t * rho * rho * (1.0 + I.real),
        # port 2 collects r from input 1 and tau from input 2
        n2n2m1=2.0 * tau * tau * r * r * (1.0 + I.real),
        n1n2=t * t * tau * tau + r * r * rho * rho + 2.0 * t * tau * r * rho * cross,
    )


def _from_moments(m: NumberMoments) -> OutcomeDistribution:
    return OutcomeDistribution.from_raw((
        0.5 * m.n1n1m1,
        0.5 * m.n2n2m1,
        m.n1n2,
        m.n1 - m.n1n1m1 - m.n1n2,
        m.n2 - m.n2n2m1 - m.n1n2,
        1.0 - m.n1 - m.n2 + m.n1n2 + 0.5 * m.n1n1m1 + 0.5 * m.n2n2m1,
    ))


def outcome_probabilities(S: ScatteringMatrix, I: complex, tol: float = DEFAULT_TOL) -> OutcomeDistribution:
    """Six detection probabilities from the Kelley-Kleiner counting formulae."""
    return _from_moments(number_moments(S, I, tol))


def symmetric_probabilities(t: float, r: float, alpha: float, I: float,
                            tol: float = DEFAULT_TOL) -> OutcomeDistribution:
    """Closed forms for tau = t, rho = r with a real overlap."""
    if t < 0 or r < 0 or t > 1 or r > 1:
        raise ValueError("amplitudes must lie in [0, 1]")
    loss = 1.0 - t * t - r * r
    if abs(math.cos(alpha / 2.0)) * 2.0 * t * r - loss > tol:
        raise ValueError(f"(t={t}, r={r}, alpha={alpha}) violates the passivity bound")
    if abs(I) > 1.0 + OVERLAP_SLACK:
        raise ValueError(f"|I| = {abs(I)!r} exceeds 1")
    t2, r2 = t * t, r * r
    t4, r4 = t2 * t2, r2 * r2
    c = math.cos(alpha)
    interference = 2.0 * t2 * r2 * (1.0 + I * (1.0 + c))
    p11 = t4 + r4 + 2.0 * t2 * r2 * I * c
    bunch = t2 * r2 * (1.0 + I)
    single = t2 + r2 - t4 - r4 - interference
    none = 1.0 - 2.0 * (t2 + r2) + t4 + r4 + interference
    return OutcomeDistribution.from_raw((bunch, bunch, p11, single, single, none))


# ---------------------------------------------------------------------------
# alpha extremes and programmability
# ---------------------------------------------------------------------------


def _cos_alpha_max(S: ScatteringMatrix, tol: float) -> float:
    window = alpha_window(S, tol)
    if window.empty:
        raise ValueError("no value of alpha makes these amplitudes passive")
    # cos is largest at the window edge closest to 0 (mod 2 pi)
    return 1.0 if window.full else -math.cos(window.half_width)


def max_coincidence(t: float, r: float, tau: float, rho: float, tol: float = DEFAULT_TOL) -> float:
    """Largest coincidence probability over passive alpha, indistinguishable photons."""
    S = ScatteringMatrix(t, r, tau, rho, 0.0, math.pi)
    cos_max = _cos_alpha_max(S, tol)
    return t * t * tau * tau + r * r * rho * rho + 2.0 * t * tau * r * rho * cos_max


def programmability(t: float, r: float, tol: float = DEFAULT_TOL) -> float:
    """Range of coincidence probability over alpha divided by the distinguishable baseline.

    Symmetric device (tau = t, rho = r). The minimum over alpha sits at
    alpha = pi, which is always inside a nonempty window.
    """
    baseline = t**4 + r**4
    if baseline <= 0.0:
        raise ValueError("programmability is undefined for t = r = 0")
    S = ScatteringMatrix.symmetric(t, r)
    cos_max = _cos_alpha_max(S, tol)
    spread = 2.0 * t * t * r * r * (cos_max + 1.0)
    return spread / baseline


# ---------------------------------------------------------------------------
# maps over (t^2, r^2) for symmetric devices
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ParameterMap:
    """Values at cell centres of a square grid over (t^2, r^2) in [0, 1]^2.

    ``values[i, j]`` belongs to ``t2[i]``, ``r2[j]``. Cells with t^2 + r^2 > 1
    are flagged in ``forbidden`` and hold NaN in ``values``; consumers should
    read the flag, not the value.
    """

    kind: str
    t2: np.ndarray
    r2: np.ndarray
    values: np.ndarray
    forbidden: np.ndarray

    @property
    def resolution(self) -> int:
        return len(self.t2)

    def rows(self) -> Iterator[tuple[float, float, float | None, bool]]:
        """Row-major records (t2, r2, value or None, forbidden)."""
        for i, a in enumerate(self.t2):
            for j, b in enumerate(self.r2):
                bad = bool(self.forbidden[i, j])
                yield float(a), float(b), None if bad else float(self.values[i, j]), bad

    def cell_of(self, t2: float, r2: float) -> tuple[int, int]:
        n = self.resolution
        return min(int(t2 * n), n - 1), min(int(r2 * n), n - 1)


def _cell_centres(resolution: int) -> np.ndarray:
    return (np.arange(resolution) + 0.5) / resolution


def _symmetric_cos_bound(t2: np.ndarray, r2: np.ndarray) -> np.ndarray:
    """(1 + B) / 2 = [(1 - t^2 - r^2) / (2 t r)]^2, capped at 1; allowed cells only."""
    loss = np.maximum(1.0 - t2 - r2, 0.0)
    denom = 4.0 * t2 * r2
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(denom > 0, loss * loss / denom, 1.0)
    return np.minimum(ratio, 1.0)


def _map_block(kind: str, t2: np.ndarray, r2: np.ndarray) -> np.ndarray:
    T2, R2 = np.meshgrid(t2, r2, indexing="ij")
    c2 = _symmetric_cos_bound(T2, R2)
    if kind == "tunability":
        # delta_alpha = 2 * half_width = 4 asin(sqrt((1 + B) / 2))
        return 4.0 * np.arcsin(np.sqrt(c2))
    cos_max = 2.0 * c2 - 1.0
    cross = 2.0 * T2 * R2
    if kind == "max_coincidence":
        return T2 * T2 + R2 * R2 + cross * cos_max
    if kind == "programmability":
        return 2.0 * cross * c2 / (T2 * T2 + R2 * R2)
    raise ValueError(f"unknown map kind {kind!r}; choose from {', '.join(MAP_KINDS)}")


def parameter_map(kind: str, resolution: int = 200, workers: int = 1) -> ParameterMap:
    if kind not in MAP_KINDS:
        raise ValueError(f"unknown map kind {kind!r}; choose from {', '.join(MAP_KINDS)}")
    if int(resolution) != resolution or resolution < 2:
        raise ValueError(f"resolution must be an integer >= 2, got {resolution!r}")
    resolution = int(resolution)
    t2 = _cell_centres(resolution)
    r2 = t2.copy()
    forbidden = (t2[:, None] + r2[None, :]) > 1.0 + PROB_SLACK
    if workers <= 1:
        values = _map_block(kind, t2, r2)
    else:
        blocks = np.array_split(np.arange(resolution), workers)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = pool.map(lambda idx: _map_block(kind, t2[idx], r2), blocks)
            values = np.concatenate(list(parts), axis=0)
    values = np.where(forbidden, np.nan, values)
    return ParameterMap(kind, t2, r2, values, forbidden)


def map_at(kind: str, t2: float, r2: float) -> float:
    """Map value at an exact point, through the same closed form the maps use."""
    if kind not in MAP_KINDS:
        raise ValueError(f"unknown map kind {kind!r}; choose from {', '.join(MAP_KINDS)}")
    if not (0.0 <= t2 <= 1.0 and 0.0 <= r2 <= 1.0) or t2 + r2 > 1.0 + PROB_SLACK:
        raise ValueError(f"(t^2, r^2) = ({t2}, {r2}) is outside the allowed triangle")
    return float(_map_block(kind, np.array([float(t2)]), np.array([float(r2)]))[0, 0])


def tunability_map(resolution: int = 200, workers: int = 1) -> ParameterMap:
    """Width of the allowed alpha interval for symmetric devices."""
    return parameter_map("tunability", resolution, workers)


def max_coincidence_map(resolution: int = 200, workers: int = 1) -> ParameterMap:
    return parameter_map("max_coincidence", resolution, workers)


def programmability_map(resolution: int = 200, workers: int = 1) -> ParameterMap:
    return parameter_map("programmability", resolution, workers)


# ---------------------------------------------------------------------------
# Hong-Ou-Mandel delay scans
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class HomCurve:
    delta_t: np.ndarray
    overlap: np.ndarray
    p11: np.ndarray
    converged: np.ndarray
    tau_c: float
    matrix: ScatteringMatrix
    amplitude: dict

    @property
    def delta_t_over_tauc(self) -> np.ndarray:
        return self.delta_t / self.tau_c

    def points(self) -> list[tuple[float, complex, float]]:
        return list(zip(self.delta_t.tolist(), self.overlap.tolist(), self.p11.tolist()))


def hom_scan(S: ScatteringMatrix, psi: BiphotonAmplitude, grid: FrequencyGrid,
             delta_t_list: Sequence[float], *, tol: float = DEFAULT_TOL,
             workers: int = 1) -> HomCurve:
    """Coincidence probability against relative delay of the two photons."""
    report = check_passivity(S, tol)
    if not report.passive:
        raise ValueError(f"scattering matrix is not passive (margin {report.eq6_margin:.3g})")
    psi.check_coverage(grid)
    psi, _ = normalize(psi, grid)
    results = overlap_scan(psi, delta_t_list, grid, workers=workers)
    tau_c = coherence_time(psi, grid)
    overlap = np.array([res.value for res in results], dtype=complex)
    p11 = np.array([outcome_probabilities(S, I, tol).p11 for I in overlap])
    return HomCurve(
        delta_t=np.array([res.delta_t for res in results], dtype=float),
        overlap=overlap,
        p11=p11,
        converged=np.array([res.converged for res in results], dtype=bool),
        tau_c=tau_c,
        matrix=S,
        amplitude=psi.descriptor(),
    )
