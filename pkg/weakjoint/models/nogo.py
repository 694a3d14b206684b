import enum
from dataclasses import dataclass

import numpy as np

from weakjoint.models.operators import Operator


class Verdict(str, enum.Enum):
    FEASIBLE = "feasible"
    INFEASIBLE = "infeasible"


@dataclass(frozen=True, eq=False)
class ObservablePair:
    a1: Operator
    a2: Operator

    def __post_init__(self):
        if self.a1.dim != self.a2.dim:
            raise ValueError(f"pair dims differ: {self.a1.dim} vs {self.a2.dim}")
        for name, op in (("A1", self.a1), ("A2", self.a2)):
            if not (op.hermitian or op.is_hermitian()):
                raise ValueError(f"{name} must be Hermitian")

    @property
    def dim(self) -> int:
        return self.a1.dim

    def combination(self, theta: float) -> np.ndarray:
        """B_theta = A1 cos(theta) + A2 sin(theta)."""
        return np.cos(theta) * self.a1.entries + np.sin(theta) * self.a2.entries


@dataclass(frozen=True, eq=False)
class ObstructionProfile:
    thetas: np.ndarray
    beta: np.ndarray
    spectra: np.ndarray  # (n_theta, dim), ascending eigenvalues per theta
    distance: np.ndarray
    tolerance: np.ndarray  # spectral_tol * ||B_theta|| per theta
    verdict: Verdict
    infeasible_window: tuple[float, float] | None = None


@dataclass(frozen=True, eq=False)
class MinimalPolynomial:
    coefficients: np.ndarray  # monic, highest degree first (numpy.polyval order)
    roots: np.ndarray
    near_degenerate: bool = False

    @property
    def degree(self) -> int:
        return self.roots.size

    def __call__(self, z):
        return np.polyval(self.coefficients, z)


@dataclass(frozen=True, eq=False)
class ExponentScaling:
    """Log-exponent error E(q) of an approximate assignment along fixed directions."""

    directions: np.ndarray  # (n_dir,) angles
    q_norms: np.ndarray
    errors: np.ndarray  # (n_dir, n_q) |E(q)|
    predicted: np.ndarray  # (n_dir, n_q) leading correction
    measured: np.ndarray  # (n_dir, n_q) log F - i alpha.q
    slopes: np.ndarray  # log-log slope per direction
