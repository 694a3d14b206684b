from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np
from scipy import fft

from weakjoint.models.operators import CanonicalGrid


@dataclass(frozen=True)
class InstrumentGrid:
    """Product grid over the coupling variables q_k of 2 or 4 von Neumann instruments.

    Each axis spans [-q_max, q_max] with n points. `spreads` holds the pointer
    spreads Delta pi_k; the instruments are minimal-uncertainty Gaussians, so
    Delta q_k = 1 / (2 Delta pi_k).
    """

    n: int
    q_max: float
    spreads: tuple[float, ...] = (0.5, 0.5)

    def __post_init__(self):
        spreads = tuple(float(s) for s in self.spreads)
        object.__setattr__(self, "spreads", spreads)
        if self.n < 8:
            raise ValueError(f"instrument grid needs n >= 8 points per axis, got {self.n}")
        if not self.q_max > 0:
            raise ValueError(f"q_max must be positive, got {self.q_max}")
        if len(spreads) not in (2, 4):
            raise ValueError(f"instrument grid supports 2 or 4 axes, got {len(spreads)}")
        if any(s <= 0 for s in spreads):
            raise ValueError(f"pointer spreads must be positive, got {spreads}")

    @property
    def axes(self) -> int:
        return len(self.spreads)

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.axes

    @cached_property
    def q_axis(self) -> np.ndarray:
        return np.linspace(-self.q_max, self.q_max, self.n)

    @property
    def spacing(self) -> float:
        return 2 * self.q_max / (self.n - 1)

    @property
    def position_spreads(self) -> tuple[float, ...]:
        return tuple(1 / (2 * s) for s in self.spreads)

    def points(self) -> np.ndarray:
        """All grid points as rows, C order over the axes."""
        mesh = np.meshgrid(*([self.q_axis] * self.axes), indexing="ij")
        return np.stack([m.reshape(-1) for m in mesh], axis=1)

    def pointer_grid(self, clearance: float, points: int) -> "InstrumentGrid":
        """Wider grid for pointer wavefunctions: half-width clearance * max Delta q."""
        return replace(self, n=points, q_max=clearance * max(self.position_spreads))

    def with_spreads(self, spreads) -> "InstrumentGrid":
        return replace(self, spreads=tuple(spreads))


@dataclass(frozen=True, eq=False)
class KrausSample:
    """F(q) = <psi_f|exp(i sum_k A_k q_k)|psi_i> / <psi_f|psi_i> on an InstrumentGrid."""

    values: np.ndarray
    grid: InstrumentGrid

    def __post_init__(self):
        values = np.array(self.values, dtype=complex).reshape(self.grid.shape)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def at_origin(self) -> complex | None:
        """F(0) when the grid contains the origin (odd n), else None."""
        if self.grid.n % 2 == 0:
            return None
        return complex(self.values[(self.grid.n // 2,) * self.grid.axes])


@dataclass(frozen=True)
class EPRSelection:
    """Eigenvalue labels of the EPR selection.

    The initial state is an eigenstate of (x_-, p_+), the final one of (x_+, p_-),
    with x_+ = (x + x_a)/2, p_+ = p + p_a, x_- = x - x_a, p_- = (p - p_a)/2.
    """

    x_minus: float
    p_plus: float
    x_plus: float
    p_minus: float
    envelope: float | None = None  # sigma_env; None means L/8

    @property
    def x(self) -> float:
        return self.x_plus + self.x_minus / 2

    @property
    def p(self) -> float:
        return self.p_minus + self.p_plus / 2

    @property
    def x_a(self) -> float:
        return self.x_plus - self.x_minus / 2

    @property
    def p_a(self) -> float:
        return -(self.p_minus - self.p_plus / 2)

    def envelope_for(self, grid: CanonicalGrid) -> float:
        return grid.length / 8 if self.envelope is None else self.envelope

    def snapped(self, grid: CanonicalGrid) -> "EPRSelection":
        """Labels realized on the grid: x_- moves to the position lattice, the others stay as given."""
        return replace(self, x_minus=grid.snap(self.x_minus), envelope=self.envelope_for(grid))


@dataclass(frozen=True, eq=False)
class PhaseFit:
    """arg F(q) ~ c0 + sum_k alpha_k q_k + sum_{k<l} beta_kl q_k q_l.

    `beta` is stored as a symmetric matrix with zero diagonal.
    """

    c0: float
    alpha: np.ndarray
    beta: np.ndarray
    residual_rms: float
    flatness: float

    def cross(self, k: int, l: int) -> float:
        return float(self.beta[k, l])


@dataclass(frozen=True, eq=False)
class PointerDistribution:
    """Conditional pointer distribution P(pi) as probability masses on the dual grid."""

    probability: np.ndarray
    pi_axis: np.ndarray
    spreads: tuple[float, ...]

    @property
    def axes(self) -> int:
        return self.probability.ndim

    @property
    def pi_spacing(self) -> float:
        return float(self.pi_axis[1] - self.pi_axis[0])

    def marginal(self, k: int) -> np.ndarray:
        others = tuple(i for i in range(self.axes) if i != k)
        return self.probability.sum(axis=others)

    def means(self) -> np.ndarray:
        return np.array([np.dot(self.marginal(k), self.pi_axis) for k in range(self.axes)])

    def standard_deviations(self) -> np.ndarray:
        means = self.means()
        return np.array(
            [np.sqrt(np.dot(self.marginal(k), (self.pi_axis - means[k]) ** 2)) for k in range(self.axes)]
        )


def dual_axis(q_axis: np.ndarray) -> np.ndarray:
    """Pointer values conjugate to an evenly spaced q axis, ascending (fftshift order)."""
    spacing = float(q_axis[1] - q_axis[0])
    return fft.fftshift(2 * np.pi * fft.fftfreq(q_axis.size, d=spacing))


@dataclass(frozen=True, eq=False)
class UncertaintyReport:
    instrument_spreads: tuple[float, ...]
    pointer_spreads: tuple[float, ...]
    pointer_means: tuple[float, ...]
    pair_products: dict[tuple[int, int], float]
    total_product: float
    # two-axis runs: Delta pi1 Delta pi2 + 1/(16 Delta pi1 Delta pi2); four-axis runs: 1/4
    bound: float
    method: str = "distribution"
    notes: list[str] = field(default_factory=list)

    @property
    def meets_bound(self) -> bool:
        return self.total_product >= self.bound * (1 - 1e-9)

    @property
    def meets_half(self) -> bool:
        """Two axes: Delta pi1' Delta pi2' >= 1/2. Four axes: the crossed pairs each reach 1/2."""
        pairs = [(0, 1)] if len(self.pointer_spreads) == 2 else [(0, 3), (1, 2)]
        return all(self.pair_products[p] >= 0.5 * (1 - 1e-9) for p in pairs)


@dataclass(frozen=True, eq=False)
class ConvergenceRow:
    d: int
    alpha: tuple[float, ...]
    beta12: float


@dataclass(frozen=True, eq=False)
class InferenceExperiment:
    """Canonical (x, p) inference run on an EPR ensemble, with the naive ensemble alongside."""

    selection: EPRSelection  # realized labels
    predicted_alpha: tuple[float, float]
    fit: PhaseFit
    distribution: PointerDistribution
    uncertainty: UncertaintyReport
    shift_distance: float
    convergence: list[ConvergenceRow]
    naive_fit: PhaseFit | None = None
    naive_uncertainty: UncertaintyReport | None = None

    @property
    def suppression_ratio(self) -> float | None:
        """|beta12(EPR)| / |beta12(naive)|."""
        if self.naive_fit is None:
            return None
        return abs(self.fit.cross(0, 1)) / max(abs(self.naive_fit.cross(0, 1)), 1e-300)


@dataclass(frozen=True, eq=False)
class SpreadSweepRow:
    spreads: tuple[float, ...]
    pointer_spreads: tuple[float, ...]
    four_product: float


@dataclass(frozen=True, eq=False)
class FourVariableExperiment:
    """Joint measurement of (x, p, x_a, p_a) with four instruments on an EPR ensemble."""

    selection: EPRSelection
    predicted_alpha: tuple[float, float, float, float]
    fit: PhaseFit
    uncertainty: UncertaintyReport
    sweep: list[SpreadSweepRow]

    @property
    def sweep_minimum(self) -> float:
        return min((row.four_product for row in self.sweep), default=float("nan"))
