"""General lossy two-port scattering matrix and its realizability constraints.

The matrix is parametrized by four real amplitudes and two phases::

    M = [[t,             rho * e^{i phi2}],
         [r * e^{i phi1}, tau            ]]

Only ``alpha = phi1 + phi2`` enters the passivity constraint and the
two-photon statistics.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

TWO_PI = 2.0 * math.pi
DEFAULT_TOL = 1e-9

__all__ = [
    "DEFAULT_TOL",
    "AlphaWindow",
    "PassivityReport",
    "ScatteringMatrix",
    "alpha_window",
    "check_passivity",
    "classical_interference",
    "complex_matrix",
    "noise_commutator_matrix",
    "unitary_dilation",
]


def wrap_phase(x: float) -> float:
    """Reduce an angle to [0, 2*pi)."""
    y = math.fmod(float(x), TWO_PI)
    if y < 0.0:
        y += TWO_PI
    # fmod of a tiny negative number can round up to exactly 2*pi
    return 0.0 if y >= TWO_PI else y


@dataclass(frozen=True)
class ScatteringMatrix:
    t: float
    r: float
    tau: float
    rho: float
    phi1: float = 0.0
    phi2: float = 0.0

    def __post_init__(self):
        for name in ("t", "r", "tau", "rho"):
            value = float(getattr(self, name))
            if not (0.0 <= value <= 1.0):
                raise ValueError(f"{name} must lie in [0, 1], got {value!r}")
            object.__setattr__(self, name, value)
        for name in ("phi1", "phi2"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, wrap_phase(value))

    @classmethod
    def symmetric(cls, t: float, r: float, alpha: float = math.pi) -> "ScatteringMatrix":
        """tau = t, rho = r and phi1 = phi2 = alpha / 2."""
        half = wrap_phase(alpha) / 2.0
        return cls(t, r, t, r, half, half)

    @classmethod
    def from_dict(cls, d: dict) -> "ScatteringMatrix":
        return cls(**{k: d[k] for k in ("t", "r", "tau", "rho", "phi1", "phi2")})

    def to_dict(self) -> dict:
        return asdict(self)

    @property
    def alpha(self) -> float:
        return wrap_phase(self.phi1 + self.phi2)

    @property
    def port_losses(self) -> tuple[float, float]:
        """Energy left over by each input arm: (1 - t^2 - r^2, 1 - tau^2 - rho^2)."""
        return (1.0 - self.t**2 - self.r**2, 1.0 - self.tau**2 - self.rho**2)

    def with_alpha(self, alpha: float) -> "ScatteringMatrix":
        """Same amplitudes and phi1; phi2 adjusted so that phi1 + phi2 = alpha."""
        return ScatteringMatrix(self.t, self.r, self.tau, self.rho, self.phi1, alpha - self.phi1)

    def matrix(self) -> np.ndarray:
        return complex_matrix(self)


def complex_matrix(S: ScatteringMatrix) -> np.ndarray:
    return np.array(
        [[S.t, S.rho * np.exp(1j * S.phi2)],
         [S.r * np.exp(1j * S.phi1), S.tau]],
        dtype=complex,
    )


@dataclass(frozen=True)
class PassivityReport:
    passive: bool
    per_port_loss_1: float
    per_port_loss_2: float
    eq6_margin: float
    sigma_max: float

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "PassivityReport":
        return cls(
            passive=bool(d["passive"]),
            per_port_loss_1=float(d["per_port_loss_1"]),
            per_port_loss_2=float(d["per_port_loss_2"]),
            eq6_margin=float(d["eq6_margin"]),
            sigma_max=float(d["sigma_max"]),
        )


def _cross_amplitude(t, r, tau, rho, alpha) -> float:
    # sqrt(t^2 rho^2 + tau^2 r^2 + 2 t tau r rho cos(alpha)) evaluated as a
    # modulus, which stays accurate when the two terms nearly cancel
    return abs(t * rho + tau * r * complex(math.cos(alpha), math.sin(alpha)))


def check_passivity(S: ScatteringMatrix, tol: float = DEFAULT_TOL) -> PassivityReport:
    """Decide whether ``S`` can be realized by a passive (non-amplifying) device.

    The verdict combines the two per-port energy conditions with the
    amplitude-phase inequality

        sqrt(t^2 rho^2 + tau^2 r^2 + 2 t tau r rho cos(alpha))
            <= sqrt((1 - t^2 - r^2)(1 - tau^2 - rho^2)).

    ``eq6_margin`` is right-hand side minus left-hand side. Negative port
    losses are floored at zero inside the square root, so the margin is
    always a real number. ``sigma_max`` is the spectral norm of the complex
    matrix, computed by SVD as an independent cross-check.
    """
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    l1, l2 = S.port_losses
    lhs = _cross_amplitude(S.t, S.r, S.tau, S.rho, S.alpha)
    rhs = math.sqrt(max(l1, 0.0) * max(l2, 0.0))
    margin = rhs - lhs
    sigma_max = float(np.linalg.norm(complex_matrix(S), 2))
    passive = l1 >= -tol and l2 >= -tol and margin >= -tol
    return PassivityReport(bool(passive), l1, l2, margin, sigma_max)


@dataclass(frozen=True)
class AlphaWindow:
    """Set of alpha values allowed by passivity for fixed amplitudes.

    The allowed set is the closed interval [pi - half_width, pi + half_width].
    ``empty`` marks amplitude sets for which no alpha at all is passive.
    """

    center: float
    half_width: float
    full: bool
    empty: bool = False

    @property
    def delta_alpha(self) -> float:
        return 0.0 if self.empty else 2.0 * self.half_width

    @property
    def lower(self) -> float:
        return self.center - self.half_width

    @property
    def upper(self) -> float:
        return self.center + self.half_width

    def contains(self, alpha: float) -> bool:
        if self.empty:
            return False
        if self.full:
            return True
        return abs(wrap_phase(alpha) - math.pi) <= self.half_width

    def to_dict(self) -> dict:
        return {
            "center": self.center,
            "half_width": self.half_width,
            "delta_alpha": self.delta_alpha,
            "full": self.full,
            "empty": self.empty,
        }


def alpha_window(S: ScatteringMatrix, tol: float = DEFAULT_TOL) -> AlphaWindow:
    """Allowed interval of alpha around pi for the amplitudes of ``S``.

    Squaring the passivity inequality gives ``cos(alpha) <= B`` with

        B = [(1-t^2-r^2)(1-tau^2-rho^2) - t^2 rho^2 - tau^2 r^2] / (2 t tau r rho).

    The half-width ``pi - arccos(B)`` is evaluated as ``2 asin(sqrt((1 + B)/2))``,
    which is the same number but well conditioned near the lossless edge
    where B -> -1. The phases of ``S`` are ignored.
    """
    l1, l2 = S.port_losses
    if l1 < -tol or l2 < -tol:
        raise ValueError(
            f"amplitudes exceed unit energy at an input port (losses {l1:.3g}, {l2:.3g})"
        )
    l1, l2 = max(l1, 0.0), max(l2, 0.0)
    t, r, tau, rho = S.t, S.r, S.tau, S.rho
    product = t * tau * r * rho
    rhs = math.sqrt(l1 * l2)

    if product == 0.0:
        # alpha drops out of the inequality
        ok = rhs - math.hypot(t * rho, tau * r) >= -tol
        return AlphaWindow(math.pi, math.pi if ok else 0.0, full=ok, empty=not ok)

    # best case alpha = pi must already be passive
    if rhs - abs(t * rho - tau * r) < -tol:
        return AlphaWindow(math.pi, 0.0, full=False, empty=True)

    # (1 + B) / 2
    half_one_plus_b = (l1 * l2 - (t * rho - tau * r) ** 2) / (4.0 * product)
    if half_one_plus_b >= 1.0:
        return AlphaWindow(math.pi, math.pi, full=True)
    half_width = 2.0 * math.asin(math.sqrt(min(max(half_one_plus_b, 0.0), 1.0)))
    return AlphaWindow(math.pi, half_width, full=False)


def noise_commutator_matrix(S: ScatteringMatrix) -> np.ndarray:
    """Commutators [F_i, F_j^dagger] of the Langevin noise operators, I - M M^dagger."""
    M = complex_matrix(S)
    return np.eye(2, dtype=complex) - M @ M.conj().T


def _psd_sqrt_from_svd(basis: np.ndarray, values: np.ndarray) -> np.ndarray:
    return (basis * values) @ basis.conj().T


def unitary_dilation(S: ScatteringMatrix, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Embed ``S`` in a 4x4 unitary with two explicit loss modes.

    Returns ``[[M, sqrt(I - M M^+)], [sqrt(I - M^+ M), -M^+]]``. Mode order is
    (port 1, port 2, loss 1, loss 2). Both square roots are built from the
    singular value decomposition of M, so they share exactly the same
    spectrum and the intertwining relation ``M sqrt(I - M^+ M) =
    sqrt(I - M M^+) M`` holds to rounding even close to the lossless edge.
    """
    report = check_passivity(S, tol)
    if not report.passive:
        raise ValueError(
            f"cannot dilate a non-passive matrix (sigma_max = {report.sigma_max:.12g})"
        )
    M = complex_matrix(S)
    W, sigma, Vh = np.linalg.svd(M)
    sigma = np.minimum(sigma, 1.0)
    damping = np.sqrt(1.0 - sigma**2)
    left = _psd_sqrt_from_svd(W, damping)  # sqrt(I - M M^+)
    right = _psd_sqrt_from_svd(Vh.conj().T, damping)  # sqrt(I - M^+ M)
    U = np.empty((4, 4), dtype=complex)
    U[:2, :2] = M
    U[:2, 2:] = left
    U[2:, :2] = right
    U[2:, 2:] = -M.conj().T
    return U


def classical_interference(S: ScatteringMatrix, theta, E1: complex = 1.0, E2: complex = 1.0):
    """Output powers at both ports when phase ``theta`` is applied to input 1.

    ``theta`` may be a scalar or an array; the return values follow its shape.
    """
    M = complex_matrix(S)
    field1 = np.exp(1j * np.asarray(theta, dtype=float)) * E1
    b1 = M[0, 0] * field1 + M[0, 1] * E2
    b2 = M[1, 0] * field1 + M[1, 1] * E2
    return np.abs(b1) ** 2, np.abs(b2) ** 2
