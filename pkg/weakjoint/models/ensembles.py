import enum
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from weakjoint.models.operators import Operator, StateVector


@dataclass(frozen=True, eq=False)
class PrePostEnsemble:
    """Initial and final pure states on system (x) ancilla.

    ancilla_dim = 0 means no ancilla; the states then live on the system alone.
    """

    psi_i: StateVector
    psi_f: StateVector
    system_dim: int
    ancilla_dim: int = 0

    def __post_init__(self):
        total = self.system_dim * max(self.ancilla_dim, 1)
        if self.psi_i.dim != total or self.psi_f.dim != total:
            raise ValueError(
                f"state dims ({self.psi_i.dim}, {self.psi_f.dim}) do not match "
                f"system {self.system_dim} x ancilla {max(self.ancilla_dim, 1)}"
            )

    @property
    def dim(self) -> int:
        return self.psi_i.dim

    @cached_property
    def overlap(self) -> complex:
        """<psi_f|psi_i>."""
        return self.psi_f.overlap(self.psi_i)

    def initial_matrix(self) -> np.ndarray:
        return self.psi_i.amplitudes.reshape(self.system_dim, -1)

    def final_matrix(self) -> np.ndarray:
        return self.psi_f.amplitudes.reshape(self.system_dim, -1)


@dataclass(frozen=True, eq=False)
class OperatorBasis:
    """Orthonormal operator basis E_1..E_{d^2} under (A|B) = Tr(A^dagger B)."""

    elements: np.ndarray  # shape (d*d, d, d)
    name: str = "custom"

    def __post_init__(self):
        elements = np.array(self.elements, dtype=complex)
        if elements.ndim != 3 or elements.shape[1] != elements.shape[2]:
            raise ValueError(f"basis elements must be an array of square matrices, got {elements.shape}")
        d = elements.shape[1]
        if elements.shape[0] != d * d:
            raise ValueError(f"a complete basis for d={d} has {d * d} elements, got {elements.shape[0]}")
        elements.setflags(write=False)
        object.__setattr__(self, "elements", elements)

    @classmethod
    def from_elements(cls, elements, name: str = "custom", tol: float = 1e-10) -> "OperatorBasis":
        basis = cls(np.asarray(elements), name=name)
        error = basis.orthonormality_error()
        if error > tol:
            raise ValueError(f"basis {name!r} is not orthonormal: max |(E_i|E_j) - delta_ij| = {error:.3e}")
        return basis

    @property
    def dim(self) -> int:
        return self.elements.shape[1]

    @property
    def size(self) -> int:
        return self.elements.shape[0]

    @cached_property
    def gram(self) -> np.ndarray:
        """gamma_ij = Tr(E_i E_j)."""
        return np.einsum("iab,jba->ij", self.elements, self.elements)

    @cached_property
    def identity_vector(self) -> np.ndarray:
        """I_i = Tr(E_i)*, so that Tr(W) = I.w for W = sum_i w_i E_i^dagger."""
        return np.einsum("iaa->i", self.elements).conj()

    def coefficients(self, matrix: np.ndarray) -> np.ndarray:
        """(E_i|A) = Tr(E_i^dagger A) for every element."""
        return np.einsum("iba,ba->i", self.elements.conj(), np.asarray(matrix))

    def reconstruct(self, w: np.ndarray) -> np.ndarray:
        """Sum_i w_i E_i^dagger."""
        return np.einsum("i,iba->ab", np.asarray(w), self.elements.conj())

    def orthonormality_error(self) -> float:
        overlaps = np.einsum("iba,jba->ij", self.elements.conj(), self.elements)
        return float(np.max(np.abs(overlaps - np.eye(self.size))))


@dataclass(frozen=True, eq=False)
class WeakVector:
    """Components w_i = Tr(E_i W) of a weak value operator W = sum_i w_i E_i^dagger."""

    w: np.ndarray
    basis: OperatorBasis

    def __post_init__(self):
        w = np.array(self.w, dtype=complex).reshape(-1)
        if w.size != self.basis.size:
            raise ValueError(f"weak vector has {w.size} components, basis has {self.basis.size}")
        w.setflags(write=False)
        object.__setattr__(self, "w", w)

    @property
    def normalization(self) -> complex:
        """I.w, which equals Tr(W)."""
        return complex(self.basis.identity_vector @ self.w)

    def operator(self) -> np.ndarray:
        return self.basis.reconstruct(self.w)


@dataclass(frozen=True, eq=False)
class AssignmentProblem:
    """Pairs (A_i, alpha_i) asking for weak values alpha_i of operators A_i."""

    targets: tuple[tuple[Operator, complex], ...]
    basis: OperatorBasis

    def __post_init__(self):
        targets = tuple((op, complex(value)) for op, value in self.targets)
        for op, _ in targets:
            if op.dim != self.basis.dim:
                raise ValueError(f"target operator dim {op.dim} does not match basis dim {self.basis.dim}")
        object.__setattr__(self, "targets", targets)

    def rows(self) -> tuple[np.ndarray, np.ndarray]:
        """Stacked system M w = b with the trace row I.w = 1 last.

        Row for target A is a_i = Tr(A E_i^dagger), since Tr(A W) = a.w.
        """
        rows = [
            np.einsum("ab,iab->i", op.entries, self.basis.elements.conj())
            for op, _ in self.targets
        ]
        rows.append(self.basis.identity_vector)
        values = [value for _, value in self.targets] + [1.0]
        return np.array(rows, dtype=complex), np.array(values, dtype=complex)


class Realizability(str, enum.Enum):
    PRODUCT_REALIZABLE = "product_realizable"
    ENTANGLEMENT_REQUIRED = "entanglement_required"


@dataclass(frozen=True, eq=False)
class RealizabilityReport:
    verdict: Realizability
    singular_values: np.ndarray
    trace_square: complex  # gamma*_ij w_i w_j = Tr(W^2)
    weak_norm: float  # w.w* = Tr(W^dagger W)
    failed_constraints: tuple[str, ...] = ()
    chi_i: StateVector | None = None
    chi_f: StateVector | None = None


@dataclass(frozen=True, eq=False)
class AssignmentResidual:
    errors: np.ndarray  # complex weak_value(A_i) - alpha_i, per target
    weak_values: np.ndarray

    @property
    def max_residual(self) -> float:
        return float(np.max(np.abs(self.errors))) if self.errors.size else 0.0
