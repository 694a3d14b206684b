import enum
from dataclasses import dataclass

import numpy as np


class Feasibility(str, enum.Enum):
    FEASIBLE = "feasible"
    REJECTED_EVEN_DEGREE = "rejected_even_degree"


@dataclass(frozen=True)
class PolynomialF:
    """f(x) = sum_m coefficients[m] x^m (ascending powers)."""

    coefficients: tuple[float, ...]

    def __post_init__(self):
        coefficients = tuple(self.coefficients)
        if not coefficients or coefficients[-1] == 0:
            raise ValueError("leading coefficient of f must be nonzero")
        object.__setattr__(self, "coefficients", coefficients)

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def __call__(self, x):
        return np.polynomial.polynomial.polyval(x, np.asarray(self.coefficients, dtype=float))


@dataclass(frozen=True, eq=False)
class GPolynomial:
    """g(u|zeta1) at a fixed zeta1, coefficients in ascending powers of u."""

    zeta1: float
    coefficients: np.ndarray

    @property
    def degree(self) -> int:
        return self.coefficients.size - 1

    def __call__(self, u):
        return np.polynomial.polynomial.polyval(u, self.coefficients)


@dataclass(frozen=True, eq=False)
class RootBranch:
    zeta1: np.ndarray
    u: np.ndarray
    residuals: np.ndarray  # |g(u|zeta1) - phi|
    max_jump: float


@dataclass(frozen=True, eq=False)
class KernelResidualReport:
    algebraic_max: float
    branch: RootBranch
    t_samples: np.ndarray  # (n, 2)
    quadrature_residuals: np.ndarray
    epsilon: float
    zeta2_cutoff: float
    u_window: float

    @property
    def quadrature_max(self) -> float:
        return float(np.max(self.quadrature_residuals)) if self.quadrature_residuals.size else 0.0
