"""Brute-force two-photon statistics through a 4-mode unitary dilation.

Nothing here uses the closed-form moments: the two photons are propagated
through the dilated unitary (ports plus two loss modes), amplitudes come
from matrix permanents, and the loss modes are traced out by bucketing
occupation patterns.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core_matrix import DEFAULT_TOL, ScatteringMatrix, check_passivity, unitary_dilation
from .counting import OUTCOMES, OutcomeDistribution, outcome_probabilities

__all__ = [
    "FockPattern",
    "OracleDistribution",
    "equivalence_sweep",
    "evolve_distinguishable",
    "evolve_indistinguishable",
    "oracle_distribution",
    "patterns",
    "permanent",
    "permanent_naive",
    "random_passive_matrices",
]

N_MODES = 4
N_PHOTONS = 2
INPUT_MODES = (0, 1)
UNITARITY_TOL = 1e-10


@dataclass(frozen=True, order=True)
class FockPattern:
    """Occupations of (port b1, port b2, loss 1, loss 2)."""

    occupation: tuple[int, int, int, int]

    def __post_init__(self):
        occ = tuple(int(n) for n in self.occupation)
        if len(occ) != N_MODES or min(occ) < 0:
            raise ValueError(f"bad occupation {self.occupation!r}")
        object.__setattr__(self, "occupation", occ)

    @property
    def total(self) -> int:
        return sum(self.occupation)

    def outcome(self) -> str:
        """Name of the detected outcome once the loss modes are ignored."""
        n1, n2 = self.occupation[0], self.occupation[1]
        return f"p{min(n1, 2)}{min(n2, 2)}"

    def rows(self) -> list[int]:
        """Output mode of each photon, with repetition."""
        return [k for k, n in enumerate(self.occupation) for _ in range(n)]


def patterns(n_photons: int = N_PHOTONS, n_modes: int = N_MODES) -> list[FockPattern]:
    """All occupation vectors with the given photon number, in lexicographic order."""
    out = [occ for occ in itertools.product(range(n_photons + 1), repeat=n_modes)
           if sum(occ) == n_photons]
    return [FockPattern(occ) for occ in sorted(out)]


PATTERNS = patterns()


def permanent_naive(A: np.ndarray) -> complex:
    """Sum over all permutations; O(n! n). Reference only."""
    A = np.asarray(A)
    n = A.shape[0]
    return complex(sum(math.prod(A[i, p[i]] for i in range(n))
                       for p in itertools.permutations(range(n))))


def permanent(A: np.ndarray) -> complex:
    """Permanent of a square matrix (Ryser's inclusion-exclusion formula, Gray-code order)."""
    A = np.asarray(A, dtype=complex)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("permanent needs a square matrix")
    if n == 0:
        return 1.0 + 0.0j
    if n == 1:
        return complex(A[0, 0])
    if n == 2:
        return complex(A[0, 0] * A[1, 1] + A[0, 1] * A[1, 0])
    row_sums = np.zeros(n, dtype=complex)
    total = 0.0 + 0.0j
    gray_prev = 0
    for k in range(1, 2**n):
        gray = k ^ (k >> 1)
        j = (gray ^ gray_prev).bit_length() - 1
        if gray & (1 << j):
            row_sums += A[:, j]
        else:
            row_sums -= A[:, j]
        gray_prev = gray
        sign = -1 if bin(gray).count("1") % 2 else 1
        total += sign * np.prod(row_sums)
    return complex((-1) ** n * total)


@dataclass(frozen=True, eq=False)
class OracleDistribution:
    patterns: tuple[FockPattern, ...]
    probabilities: np.ndarray

    def total(self) -> float:
        return math.fsum(self.probabilities.tolist())

    def marginal(self) -> OutcomeDistribution:
        buckets = dict.fromkeys(OUTCOMES, 0.0)
        for pattern, p in zip(self.patterns, self.probabilities):
            buckets[pattern.outcome()] += float(p)
        return OutcomeDistribution.from_raw([buckets[k] for k in OUTCOMES])

    def as_dict(self) -> dict[tuple[int, ...], float]:
        return {pat.occupation: float(p) for pat, p in zip(self.patterns, self.probabilities)}


def _check_unitary(U: np.ndarray) -> np.ndarray:
    U = np.asarray(U, dtype=complex)
    if U.shape != (N_MODES, N_MODES):
        raise ValueError(f"expected a {N_MODES}x{N_MODES} matrix, got shape {U.shape}")
    deviation = np.max(np.abs(U.conj().T @ U - np.eye(N_MODES)))
    if deviation > UNITARITY_TOL:
        raise ValueError(f"matrix is not unitary (max |U^+U - I| = {deviation:.3g})")
    return U


def evolve_indistinguishable(U: np.ndarray) -> OracleDistribution:
    """Exact output pattern distribution for |1, 1, 0, 0> with identical photons."""
    U = _check_unitary(U)
    cols = list(INPUT_MODES)
    probs = []
    for pattern in PATTERNS:
        sub = U[np.ix_(pattern.rows(), cols)]
        norm = math.prod(math.factorial(n) for n in pattern.occupation)
        amp = permanent(sub) / math.sqrt(norm)
        probs.append(abs(amp) ** 2)
    return OracleDistribution(tuple(PATTERNS), np.array(probs))


def evolve_distinguishable(U: np.ndarray) -> OracleDistribution:
    """Photons in orthogonal internal states: two independent single-photon walks."""
    U = _check_unitary(U)
    first = np.abs(U[:, INPUT_MODES[0]]) ** 2
    second = np.abs(U[:, INPUT_MODES[1]]) ** 2
    index = {pat.occupation: k for k, pat in enumerate(PATTERNS)}
    probs = np.zeros(len(PATTERNS))
    for a in range(N_MODES):
        for b in range(N_MODES):
            occ = [0] * N_MODES
            occ[a] += 1
            occ[b] += 1
            probs[index[tuple(occ)]] += first[a] * second[b]
    return OracleDistribution(tuple(PATTERNS), probs)


def oracle_distribution(S: ScatteringMatrix, I: float, tol: float = DEFAULT_TOL) -> OutcomeDistribution:
    """Mixture I * (identical photons) + (1 - I) * (distinguishable photons)."""
    I = float(I)
    if not 0.0 <= I <= 1.0:
        raise ValueError(f"oracle overlap must be real and in [0, 1], got {I!r}")
    U = unitary_dilation(S, tol)
    quantum = evolve_indistinguishable(U).marginal().as_array()
    classical = evolve_distinguishable(U).marginal().as_array()
    return OutcomeDistribution.from_raw(I * quantum + (1.0 - I) * classical)


# ---------------------------------------------------------------------------
# randomized equivalence sweep
# ---------------------------------------------------------------------------

SWEEP_CHUNK = 100
SWEEP_OVERLAPS = (0.0, 0.31, 0.5, 1.0)


def random_passive_matrices(rng: np.random.Generator, count: int,
                            tol: float = DEFAULT_TOL) -> list[ScatteringMatrix]:
    """Uniform amplitudes and phases, rejection-sampled down to passive matrices."""
    out: list[ScatteringMatrix] = []
    while len(out) < count:
        amps = rng.uniform(0.0, 1.0, size=4)
        phases = rng.uniform(0.0, 2.0 * math.pi, size=2)
        S = ScatteringMatrix(*amps, *phases)
        if check_passivity(S, tol).passive:
            out.append(S)
    return out


@dataclass(frozen=True)
class SweepResult:
    samples: int
    seed: int
    max_deviation: float
    worst_matrix: ScatteringMatrix | None
    worst_overlap: float | None

    def to_dict(self) -> dict:
        return {
            "samples": self.samples,
            "seed": self.seed,
            "overlaps": list(SWEEP_OVERLAPS),
            "max_deviation": self.max_deviation,
            "worst_matrix": None if self.worst_matrix is None else self.worst_matrix.to_dict(),
            "worst_overlap": self.worst_overlap,
        }


def _sweep_chunk(matrices, overlaps, closed_form, tol):
    worst = (-1.0, None, None)
    for S in matrices:
        for I in overlaps:
            a = closed_form(S, I).as_array()
            b = oracle_distribution(S, I, tol).as_array()
            dev = float(np.max(np.abs(a - b)))
            if dev > worst[0]:
                worst = (dev, S, I)
    return worst


def equivalence_sweep(samples: int, seed: int, *, overlaps=SWEEP_OVERLAPS,
                      closed_form=outcome_probabilities, matrices=None,
                      workers: int = 1, tol: float = DEFAULT_TOL) -> SweepResult:
    """Largest component-wise gap between ``closed_form`` and the Fock oracle.

    Samples are drawn in fixed chunks, each from its own child of
    ``SeedSequence(seed)``, so the result depends only on ``seed`` and
    ``samples`` and not on ``workers``. ``matrices`` replaces the random
    draw when given.
    """
    if samples < 1:
        raise ValueError("samples must be at least 1")
    if matrices is not None:
        chunks = [list(matrices)]
    else:
        n_chunks = -(-samples // SWEEP_CHUNK)
        children = np.random.SeedSequence(seed).spawn(n_chunks)
        sizes = [min(SWEEP_CHUNK, samples - k * SWEEP_CHUNK) for k in range(n_chunks)]
        chunks = [random_passive_matrices(np.random.default_rng(child), size, tol)
                  for child, size in zip(children, sizes)]

    def run(chunk):
        return _sweep_chunk(chunk, overlaps, closed_form, tol)

    if workers <= 1:
        results = [run(c) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, chunks))
    # first strict maximum in chunk order
    best = results[0]
    for res in results[1:]:
        if res[0] > best[0]:
            best = res
    return SweepResult(sum(len(c) for c in chunks), seed, best[0], best[1], best[2])
