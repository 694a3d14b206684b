from dataclasses import dataclass
from functools import cached_property

import numpy as np


@dataclass(frozen=True)
class PhasePoint:
    """Phase-space point (z1, z2); integer components are reduced mod d by DiscreteWeylBasis.point."""

    z1: float
    z2: float

    def wedge(self, other: "PhasePoint") -> float:
        """Symplectic product z1*o2 - z2*o1."""
        return self.z1 * other.z2 - self.z2 * other.z1

    def time_inverted(self) -> "PhasePoint":
        return PhasePoint(self.z1, -self.z2)

    def __add__(self, other: "PhasePoint") -> "PhasePoint":
        return PhasePoint(self.z1 + other.z1, self.z2 + other.z2)

    def __iter__(self):
        yield self.z1
        yield self.z2


@dataclass(frozen=True)
class DiscreteWeylBasis:
    """Displacement and phase-point operators of Z_d x Z_d for odd d.

    T_zeta = omega^(-half*z1*z2) Z^z2 X^z1 with X|k> = |k+1>, Z|k> = omega^k |k>,
    which gives T_zeta T_zeta' = omega^(half * zeta'^zeta) T_(zeta+zeta').
    """

    d: int

    def __post_init__(self):
        if self.d < 3 or self.d % 2 == 0:
            raise ValueError(f"discrete Weyl basis needs odd d >= 3, got {self.d}")

    @property
    def omega(self) -> complex:
        return complex(np.exp(2j * np.pi / self.d))

    @property
    def half(self) -> int:
        return (self.d + 1) // 2

    def point(self, z1: int, z2: int) -> PhasePoint:
        return PhasePoint(int(z1) % self.d, int(z2) % self.d)

    def wedge(self, a, b) -> int:
        """Symplectic product of two integer points reduced mod d."""
        return int(a[0] * b[1] - a[1] * b[0]) % self.d

    def phase(self, exponent) -> np.ndarray | complex:
        """omega**exponent with the exponent reduced mod d."""
        return np.exp(2j * np.pi * (np.asarray(exponent) % self.d) / self.d)

    @cached_property
    def wedge_table(self) -> np.ndarray:
        """wedge_table[a1, a2, b1, b2] = (a ^ b) mod d."""
        r = np.arange(self.d)
        a1, a2, b1, b2 = np.meshgrid(r, r, r, r, indexing="ij")
        return (a1 * b2 - a2 * b1) % self.d

    @cached_property
    def translations(self) -> np.ndarray:
        """All T_zeta stacked as translations[z1, z2] (shape d, d, d, d)."""
        d = self.d
        k = np.arange(d)
        shift = np.roll(np.eye(d), 1, axis=0)  # X|k> = |k+1>
        clock = np.diag(self.phase(k))
        table = np.empty((d, d, d, d), dtype=complex)
        for z1 in range(d):
            xp = np.linalg.matrix_power(shift, z1)
            for z2 in range(d):
                zp = np.linalg.matrix_power(clock, z2)
                table[z1, z2] = self.phase(-self.half * z1 * z2) * (zp @ xp)
        table.setflags(write=False)
        return table

    @cached_property
    def phase_points(self) -> np.ndarray:
        """All Delta_eta = (1/d) sum_zeta omega^(zeta ^ eta) T_zeta, indexed [e1, e2]."""
        weights = self.phase(self.wedge_table)  # [z1, z2, e1, e2]
        table = np.einsum("abxy,abij->xyij", weights, self.translations) / self.d
        table.setflags(write=False)
        return table


@dataclass(frozen=True, eq=False)
class CompositeTransform:
    """Weyl transform of the system (x) ancilla weak value operator of an EPR ensemble.

    table[z1, z2, z1', z2'] = (1/d^2) Tr[W_sa (T_zeta (x) T_zeta')^dagger], which fits
    (1/d^2) omega^(-eta_s^zeta - eta_a^zeta' + c * zeta^(zeta'^T)) with zeta^T = (z1, -z2).
    """

    table: np.ndarray
    eta_s: tuple[int, int]
    eta_a: tuple[int, int]
    cross: int
    predicted_eta_s: tuple[int, int]
    predicted_eta_a: tuple[int, int]
    predicted_cross: int
    model_error: float
    modulus_spread: float

    @property
    def matches_prediction(self) -> bool:
        return (
            self.eta_s == self.predicted_eta_s
            and self.eta_a == self.predicted_eta_a
            and self.cross == self.predicted_cross
        )
