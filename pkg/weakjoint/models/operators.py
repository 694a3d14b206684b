from dataclasses import dataclass
from functools import cached_property
from math import prod

import numpy as np
from scipy import fft


HERMITIAN_TOL = 1e-12


def _as_factorization(dim: int, factorization) -> tuple[int, ...]:
    factors = (dim,) if factorization is None else tuple(int(f) for f in factorization)
    if any(f <= 0 for f in factors) or prod(factors) != dim:
        raise ValueError(f"factorization {factors} does not multiply to dimension {dim}")
    return factors


@dataclass(frozen=True, eq=False)
class Operator:
    """Dense complex square matrix with a declared subsystem split.

    Index order is system-major lexicographic: for factorization (d1, d2)
    the basis state |i>|j> sits at row i*d2 + j.
    """

    entries: np.ndarray
    factorization: tuple[int, ...]
    hermitian: bool = False

    def __post_init__(self):
        entries = np.array(self.entries, dtype=complex)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise ValueError(f"operator must be square, got shape {entries.shape}")
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)
        object.__setattr__(
            self, "factorization", _as_factorization(entries.shape[0], self.factorization)
        )
        if self.hermitian and not self.is_hermitian(HERMITIAN_TOL):
            raise ValueError("operator flagged Hermitian but max|A - A^dagger| exceeds tolerance")

    @classmethod
    def from_matrix(
        cls,
        matrix,
        factorization=None,
        hermitian: bool = False,
        tol: float = HERMITIAN_TOL,
    ) -> "Operator":
        op = cls(np.array(matrix, dtype=complex), factorization)
        if not hermitian:
            return op
        if not op.is_hermitian(tol):
            raise ValueError("operator flagged Hermitian but max|A - A^dagger| exceeds tolerance")
        # flagged operators are stored exactly Hermitian
        return cls(0.5 * (op.entries + op.entries.conj().T), op.factorization, hermitian=True)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def is_hermitian(self, tol: float = HERMITIAN_TOL) -> bool:
        scale = max(float(np.max(np.abs(self.entries))), 1.0e-300)
        return float(np.max(np.abs(self.entries - self.entries.conj().T))) <= tol * scale

    def is_unitary(self, tol: float = 1e-10) -> bool:
        eye = np.eye(self.dim)
        return float(np.max(np.abs(self.entries.conj().T @ self.entries - eye))) <= tol

    def dagger(self) -> "Operator":
        return Operator(self.entries.conj().T, self.factorization, self.hermitian)

    def trace(self) -> complex:
        return complex(np.trace(self.entries))

    def __matmul__(self, other: "Operator") -> "Operator":
        if other.dim != self.dim:
            raise ValueError(f"dimension mismatch {self.dim} vs {other.dim}")
        return Operator(self.entries @ other.entries, self.factorization)

    def __repr__(self) -> str:
        return f"Operator(dim={self.dim}, factorization={self.factorization}, hermitian={self.hermitian})"


@dataclass(frozen=True, eq=False)
class StateVector:
    """Pure state amplitudes, normalized on construction unless told otherwise."""

    amplitudes: np.ndarray
    factorization: tuple[int, ...] | None = None
    normalize: bool = True

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        norm = float(np.linalg.norm(amps))
        if not np.isfinite(norm) or norm == 0.0:
            raise ValueError("state vector must have finite nonzero norm")
        if self.normalize:
            amps = amps / norm
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "factorization", _as_factorization(amps.size, self.factorization))

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def overlap(self, other: "StateVector") -> complex:
        """Return <self|other>."""
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def as_matrix(self, rows: int | None = None) -> np.ndarray:
        """Reshape into (first factor, rest) so that (A (x) B)|psi> maps to A M B^T."""
        rows = self.factorization[0] if rows is None else rows
        return self.amplitudes.reshape(rows, self.dim // rows)


@dataclass(frozen=True)
class CanonicalGrid:
    """Periodic position grid of `points` samples over a box of `length`.

    Positions are x_j = (j - d/2)*L/d; momenta are 2*pi*(signed frequency)/L
    in FFT order, so index k of `p` matches index k of the unitary DFT.
    """

    points: int
    length: float

    def __post_init__(self):
        if self.points < 2:
            raise ValueError(f"grid needs at least 2 points, got {self.points}")
        if not self.length > 0:
            raise ValueError(f"grid length must be positive, got {self.length}")

    @property
    def spacing(self) -> float:
        return self.length / self.points

    @property
    def momentum_spacing(self) -> float:
        return 2.0 * np.pi / self.length

    @cached_property
    def x(self) -> np.ndarray:
        return (np.arange(self.points) - self.points / 2) * self.spacing

    @cached_property
    def p(self) -> np.ndarray:
        return 2.0 * np.pi * fft.fftfreq(self.points, d=self.spacing)

    def nearest_index(self, position: float) -> int:
        """Grid index closest to `position`, wrapping periodically."""
        offset = round(position / self.spacing + self.points / 2)
        return int(offset % self.points)

    def snap(self, position: float) -> float:
        """Closest multiple of the spacing, i.e. the realized displacement of `position`."""
        return round(position / self.spacing) * self.spacing
