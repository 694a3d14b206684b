"""Odd-dimension Weyl-Heisenberg phase space: displacements, phase points and EPR ensembles.

Sums with 1/d play the role of the continuum measure (2 pi)^-1 d^2 zeta, so the
continuum orthogonality (eta|eta') = 2 pi delta(eta - eta') becomes
Tr(Delta_eta Delta_eta') = d delta_{eta eta'}.
"""

import logging

import numpy as np

from weakjoint.config import get_settings
from weakjoint.errors import OrthogonalSelection
from weakjoint.models.ensembles import PrePostEnsemble
from weakjoint.models.operators import Operator, StateVector
from weakjoint.models.weyl import CompositeTransform, DiscreteWeylBasis, PhasePoint
from weakjoint.services import weakcore

logger = logging.getLogger(__name__)


def _index(basis: DiscreteWeylBasis, point) -> tuple[int, int]:
    z1, z2 = point
    return int(z1) % basis.d, int(z2) % basis.d


def translation_op(basis: DiscreteWeylBasis, zeta) -> Operator:
    return Operator(basis.translations[_index(basis, zeta)], None)


def phase_point_op(basis: DiscreteWeylBasis, eta) -> Operator:
    matrix = basis.phase_points[_index(basis, eta)]
    return Operator(0.5 * (matrix + matrix.conj().T), None, hermitian=True)


def weyl_transform(basis: DiscreteWeylBasis, a: Operator) -> np.ndarray:
    """a(zeta) = (1/d) Tr(A T_zeta^dagger), so that A = sum_zeta a(zeta) T_zeta."""
    _check_dim(basis, a)
    return np.einsum("ij,abij->ab", a.entries, basis.translations.conj()) / basis.d


def weyl_symbol(basis: DiscreteWeylBasis, a: Operator) -> np.ndarray:
    """a~(eta) = Tr(A Delta_eta); real for Hermitian A."""
    _check_dim(basis, a)
    return np.einsum("ij,abji->ab", a.entries, basis.phase_points)


def symbol_from_transform(basis: DiscreteWeylBasis, transform: np.ndarray) -> np.ndarray:
    """a~(eta) = sum_zeta omega^(eta ^ zeta) a(zeta)."""
    return np.einsum("xyab,ab->xy", basis.phase(basis.wedge_table), transform)


def reconstruct(basis: DiscreteWeylBasis, transform: np.ndarray) -> Operator:
    return Operator(np.einsum("ab,abij->ij", transform, basis.translations), None)


def _check_dim(basis: DiscreteWeylBasis, a: Operator) -> None:
    if a.dim != basis.d:
        raise ValueError(f"operator dim {a.dim} does not match Weyl basis d={basis.d}")


def maximally_entangled(basis: DiscreteWeylBasis) -> StateVector:
    """|Phi_0> = sum_k |k>|k> / sqrt(d)."""
    d = basis.d
    return StateVector(np.eye(d).reshape(-1), (d, d))


def eta_s(basis: DiscreteWeylBasis, zeta_i, eta_f) -> PhasePoint:
    """Phase-space point selected by the EPR ensemble: eta_f + half * zeta_i (mod d)."""
    return basis.point(eta_f[0] + basis.half * zeta_i[0], eta_f[1] + basis.half * zeta_i[1])


def epr_ensemble(basis: DiscreteWeylBasis, zeta_i, eta_f) -> PrePostEnsemble:
    """psi_i = (T_zeta_i (x) I)|Phi_0>, psi_f = (Delta_eta_f (x) I)|Phi_0>.

    (A (x) I)|Phi_0> reshapes to A / sqrt(d), so both states are built from
    the operator matrices directly.

    Raises:
        OrthogonalSelection: If <psi_f|psi_i> vanishes (never observed for odd d)
    """
    d = basis.d
    initial = basis.translations[_index(basis, zeta_i)]
    final = basis.phase_points[_index(basis, eta_f)]
    ens = PrePostEnsemble(
        StateVector(initial.reshape(-1), (d, d)),
        StateVector(final.reshape(-1), (d, d)),
        system_dim=d,
        ancilla_dim=d,
    )
    floor = get_settings().overlap_floor
    if abs(ens.overlap) <= floor:
        raise OrthogonalSelection(ens.overlap, floor)
    return ens


def overlap_table(basis: DiscreteWeylBasis) -> np.ndarray:
    """<Psi_eta|Phi_zeta> = Tr(Delta_eta T_zeta) / d, indexed [e1, e2, z1, z2]."""
    return np.einsum("xyij,abij->xyab", basis.phase_points.conj(), basis.translations) / basis.d


def weak_transform(basis: DiscreteWeylBasis, ens: PrePostEnsemble) -> np.ndarray:
    """w(zeta) = weak value of T_zeta = Tr(W T_zeta)."""
    w_op = weakcore.weak_value_operator(ens)
    return np.einsum("ij,abji->ab", w_op.entries, basis.translations)


def time_inversion_residual(basis: DiscreteWeylBasis) -> float:
    """max over zeta of |(I (x) T_zeta)|Phi_0> - (T_(zeta^T)^dagger (x) I)|Phi_0>|.

    In the position basis transposition flips the shift component, so the
    ancilla displacement acts on the system as T_(zeta^T)^dagger = T_(-z1, z2).
    """
    d = basis.d
    worst = 0.0
    for z1 in range(d):
        for z2 in range(d):
            ancilla_side = basis.translations[z1, z2].T
            inverted = PhasePoint(z1, z2).time_inverted()
            system_side = basis.translations[_index(basis, inverted)].conj().T
            worst = max(worst, float(np.max(np.abs(ancilla_side - system_side))) / np.sqrt(d))
    return worst


def composite_weak_transform(basis: DiscreteWeylBasis, zeta_i, eta_f) -> CompositeTransform:
    """Expand W_sa = |Phi_zeta_i><Psi_eta_f| / <Psi_eta_f|Phi_zeta_i> over T_zeta (x) T_zeta'.

    The exponents of the resulting table are read off exactly (mod d) and
    compared with eta_s = eta_f + half*zeta_i, eta_a = (eta_f - half*zeta_i)^T
    and the cross coefficient half.
    """
    d = basis.d
    ens = epr_ensemble(basis, zeta_i, eta_f)
    psi_i = ens.initial_matrix()
    psi_f = ens.final_matrix()
    t_conj = basis.translations.conj()
    # <psi_f|(T^dagger (x) T'^dagger)|psi_i> = Tr(psi_f^dagger T^dagger psi_i conj(T'))
    table = np.einsum("ba,xycb,ce,uvea->xyuv", psi_f.conj(), t_conj, psi_i, t_conj)
    table = table / (ens.overlap * d * d)

    exponents = np.rint(np.angle(table / table[0, 0, 0, 0]) * d / (2 * np.pi)).astype(int) % d
    lin_s = (int(exponents[1, 0, 0, 0]), int(exponents[0, 1, 0, 0]))
    lin_a = (int(exponents[0, 0, 1, 0]), int(exponents[0, 0, 0, 1]))
    # -eta^zeta = eta2*z1 - eta1*z2, so coefficients (c1, c2) give eta = (-c2, c1)
    realized_s = ((-lin_s[1]) % d, lin_s[0] % d)
    realized_a = ((-lin_a[1]) % d, lin_a[0] % d)
    # zeta = (1, 0), zeta' = (0, 1) has zeta ^ zeta'^T = -1
    cross = (-(int(exponents[1, 0, 0, 1]) - lin_s[0] - lin_a[1])) % d

    predicted_s = tuple(eta_s(basis, zeta_i, eta_f))
    shifted = (eta_f[0] - basis.half * zeta_i[0], eta_f[1] - basis.half * zeta_i[1])
    predicted_a = (int(shifted[0]) % d, int(-shifted[1]) % d)

    r = np.arange(d)
    z1, z2, y1, y2 = np.meshgrid(r, r, r, r, indexing="ij")
    model_exponent = (
        -(predicted_s[0] * z2 - predicted_s[1] * z1)
        - (predicted_a[0] * y2 - predicted_a[1] * y1)
        + basis.half * (z1 * (-y2) - z2 * y1)
    )
    model = basis.phase(model_exponent) / (d * d)
    model_error = float(np.max(np.abs(table - model)))
    moduli = np.abs(table)

    result = CompositeTransform(
        table=table,
        eta_s=(int(realized_s[0]), int(realized_s[1])),
        eta_a=(int(realized_a[0]), int(realized_a[1])),
        cross=int(cross),
        predicted_eta_s=(int(predicted_s[0]), int(predicted_s[1])),
        predicted_eta_a=predicted_a,
        predicted_cross=basis.half,
        model_error=model_error,
        modulus_spread=float(moduli.max() - moduli.min()),
    )
    logger.info(
        "[weyl] d=%d composite transform: eta_s=%s eta_a=%s cross=%d (model error %.2e)",
        d,
        result.eta_s,
        result.eta_a,
        result.cross,
        model_error,
    )
    return result


def algebra_residuals(basis: DiscreteWeylBasis) -> dict[str, float]:
    """Worst deviation of each displacement/phase-point relation over all index pairs."""
    d = basis.d
    t = basis.translations
    delta = basis.phase_points
    points = [(a, b) for a in range(d) for b in range(d)]

    def add(p, q):
        return (p[0] + q[0]) % d, (p[1] + q[1]) % d

    def scale(c, p):
        return (c * p[0]) % d, (c * p[1]) % d

    def w(p, q):
        return basis.wedge(p, q)

    worst = {
        "composition": 0.0,
        "translation_phase_point": 0.0,
        "phase_point_translation": 0.0,
        "phase_point_product": 0.0,
        "inverse_fourier": 0.0,
        "trace_orthogonality": 0.0,
    }
    for p in points:
        inverse = sum(basis.phase(w(e, p)) * delta[e] for e in points) / d
        worst["inverse_fourier"] = max(worst["inverse_fourier"], float(np.max(np.abs(inverse - t[p]))))
        for q in points:
            # T_p T_q = omega^(half q^p) T_(p+q)
            lhs = t[p] @ t[q]
            rhs = basis.phase(basis.half * w(q, p)) * t[add(p, q)]
            worst["composition"] = max(worst["composition"], float(np.max(np.abs(lhs - rhs))))
            # T_zeta Delta_eta = omega^(eta^zeta) Delta_(eta + half zeta), zeta = p, eta = q
            lhs = t[p] @ delta[q]
            rhs = basis.phase(w(q, p)) * delta[add(q, scale(basis.half, p))]
            worst["translation_phase_point"] = max(worst["translation_phase_point"], float(np.max(np.abs(lhs - rhs))))
            # Delta_eta T_zeta = omega^(eta^zeta) Delta_(eta - half zeta)
            lhs = delta[q] @ t[p]
            rhs = basis.phase(w(q, p)) * delta[add(q, scale(-basis.half, p))]
            worst["phase_point_translation"] = max(worst["phase_point_translation"], float(np.max(np.abs(lhs - rhs))))
            # Delta_eta Delta_eta' = omega^(2 eta^eta') T_(2(eta - eta')), eta = p, eta' = q
            lhs = delta[p] @ delta[q]
            rhs = basis.phase(2 * w(p, q)) * t[scale(2, add(p, scale(-1, q)))]
            worst["phase_point_product"] = max(worst["phase_point_product"], float(np.max(np.abs(lhs - rhs))))
            gram = np.trace(delta[p] @ delta[q])
            expected = d if p == q else 0.0
            worst["trace_orthogonality"] = max(worst["trace_orthogonality"], abs(gram - expected))
    return worst
