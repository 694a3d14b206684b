"""Weak values, weak value operators and entangled realizations of assignments."""

import logging

import numpy as np
from scipy import linalg

from weakjoint.config import get_settings
from weakjoint.errors import (
    DegenerateRealization,
    Infeasible,
    OrthogonalSelection,
    TraceNotOne,
)
from weakjoint.models.ensembles import (
    AssignmentProblem,
    AssignmentResidual,
    OperatorBasis,
    PrePostEnsemble,
    Realizability,
    RealizabilityReport,
    WeakVector,
)
from weakjoint.models.operators import Operator, StateVector

logger = logging.getLogger(__name__)


def gell_mann_basis(d: int) -> OperatorBasis:
    """Generalized Gell-Mann matrices scaled to Hilbert-Schmidt orthonormality.

    Order: I/sqrt(d); for each j < k the symmetric then antisymmetric
    off-diagonal element; then the d-1 diagonal elements. For d = 2 this is
    {I, sx, sy, sz}/sqrt(2).
    """
    if d < 1:
        raise ValueError(f"dimension must be positive, got {d}")
    elements = [np.eye(d, dtype=complex) / np.sqrt(d)]
    for j in range(d):
        for k in range(j + 1, d):
            sym = np.zeros((d, d), dtype=complex)
            sym[j, k] = sym[k, j] = 1 / np.sqrt(2)
            anti = np.zeros((d, d), dtype=complex)
            anti[j, k] = -1j / np.sqrt(2)
            anti[k, j] = 1j / np.sqrt(2)
            elements += [sym, anti]
    for level in range(1, d):
        diag = np.zeros(d, dtype=complex)
        diag[:level] = 1
        diag[level] = -level
        elements.append(np.diag(diag) / np.sqrt(level * (level + 1)))
    return OperatorBasis(np.array(elements), name=f"gell-mann-{d}")


def product_ensemble(chi_i: StateVector, chi_f: StateVector) -> PrePostEnsemble:
    return PrePostEnsemble(chi_i, chi_f, system_dim=chi_i.dim, ancilla_dim=0)


def checked_overlap(ens: PrePostEnsemble, floor: float | None = None) -> complex:
    floor = get_settings().overlap_floor if floor is None else floor
    overlap = ens.overlap
    if abs(overlap) <= floor:
        raise OrthogonalSelection(overlap, floor)
    return overlap


def weak_value(a: Operator, ens: PrePostEnsemble, floor: float | None = None) -> complex:
    """<psi_f|(A (x) I)|psi_i> / <psi_f|psi_i> for a system operator A."""
    if a.dim != ens.system_dim:
        raise ValueError(f"operator dim {a.dim} does not match system dim {ens.system_dim}")
    overlap = checked_overlap(ens, floor)
    numerator = np.vdot(ens.final_matrix(), a.entries @ ens.initial_matrix())
    return complex(numerator / overlap)


def weak_value_operator(ens: PrePostEnsemble, floor: float | None = None) -> Operator:
    """W = Tr_a(|psi_i><psi_f|) / <psi_f|psi_i>, so that Tr(A W) is the weak value of A."""
    overlap = checked_overlap(ens, floor)
    w = ens.initial_matrix() @ ens.final_matrix().conj().T / overlap
    return Operator(w, None)


def weak_vector(w_op: Operator, basis: OperatorBasis) -> WeakVector:
    """w_i = Tr(E_i W), the weak value of each basis element."""
    if w_op.dim != basis.dim:
        raise ValueError(f"operator dim {w_op.dim} does not match basis dim {basis.dim}")
    return WeakVector(np.einsum("iab,ba->i", basis.elements, w_op.entries), basis)


def product_realizability(
    w_op: Operator,
    basis: OperatorBasis | None = None,
    rank_tol: float | None = None,
) -> RealizabilityReport:
    """Decide whether W = |chi_i><chi_f| / <chi_f|chi_i> for some product selection.

    The decision is numerical rank one (sigma_2/sigma_1 below `rank_tol`).
    The scalar constraints Tr(W^2) = 1 and w.w* >= 1 are evaluated and any
    failure is listed; they are necessary for rank one but do not decide it.

    Raises:
        TraceNotOne: If Tr(W) differs from 1 by more than the trace tolerance
    """
    settings = get_settings()
    rank_tol = settings.rank_ratio_tol if rank_tol is None else rank_tol
    trace = w_op.trace()
    if abs(trace - 1) > settings.trace_tol:
        raise TraceNotOne(trace)

    basis = gell_mann_basis(w_op.dim) if basis is None else basis
    w = weak_vector(w_op, basis).w
    trace_square = complex(w @ basis.gram.conj() @ w)
    weak_norm = float(np.real(np.vdot(w, w)))

    failed = []
    if abs(trace_square - 1) > settings.trace_tol:
        failed.append("trace_square")
    if weak_norm < 1 - settings.trace_tol:
        failed.append("weak_norm")

    u, sigma, vh = linalg.svd(w_op.entries)
    rank_one = sigma.size == 1 or sigma[1] <= rank_tol * sigma[0]
    if not rank_one:
        return RealizabilityReport(
            Realizability.ENTANGLEMENT_REQUIRED, sigma, trace_square, weak_norm, tuple(failed)
        )

    chi_i = StateVector(u[:, 0])
    chi_f = StateVector(vh[0].conj())
    return RealizabilityReport(
        Realizability.PRODUCT_REALIZABLE,
        sigma,
        trace_square,
        weak_norm,
        tuple(failed),
        chi_i=chi_i,
        chi_f=chi_f,
    )


def solve_assignment(
    prob: AssignmentProblem,
    cutoff: float | None = None,
    residual_tol: float | None = None,
) -> WeakVector:
    """Minimum-norm weak vector meeting every target and I.w = 1.

    Raises:
        Infeasible: If the least-squares residual of any row exceeds `residual_tol`
    """
    settings = get_settings()
    cutoff = settings.pinv_cutoff if cutoff is None else cutoff
    residual_tol = settings.assignment_residual_tol if residual_tol is None else residual_tol

    matrix, values = prob.rows()
    w = linalg.pinv(matrix, atol=0.0, rtol=cutoff) @ values
    residual = float(np.max(np.abs(matrix @ w - values)))
    if residual > residual_tol:
        logger.warning(
            "Assignment with %d targets is inconsistent: residual %.3e", len(prob.targets), residual
        )
        raise Infeasible(
            f"targets are inconsistent: least-squares residual {residual:.3e} > {residual_tol:.1e}",
            residual=residual,
        )
    logger.debug("Solved assignment with %d targets, |w| = %.6g", len(prob.targets), np.linalg.norm(w))
    return WeakVector(w, prob.basis)


def realize_entangled(w: WeakVector, floor: float | None = None) -> PrePostEnsemble:
    """Ensemble on system (x) d-dim ancilla whose weak value operator is sum_i w_i E_i^dagger.

    psi_f = sum_k |k>|k> and psi_i = sum_i w_i (E_i^dagger (x) I)|psi_f>, both normalized.

    Raises:
        DegenerateRealization: If w.I vanishes, leaving the selections orthogonal
    """
    floor = get_settings().overlap_floor if floor is None else floor
    trace = w.normalization
    if abs(trace) <= floor * max(float(np.linalg.norm(w.w)), 1.0):
        raise DegenerateRealization(trace)
    d = w.basis.dim
    # (M (x) I) sum_k |k>|k> reshapes to the matrix M itself
    initial = w.operator()
    final = np.eye(d, dtype=complex)
    return PrePostEnsemble(
        StateVector(initial.reshape(-1), (d, d)),
        StateVector(final.reshape(-1), (d, d)),
        system_dim=d,
        ancilla_dim=d,
    )


def verify_assignment(ens: PrePostEnsemble, prob: AssignmentProblem) -> AssignmentResidual:
    """Per-target weak value error; OrthogonalSelection propagates."""
    weak_values = np.array([weak_value(op, ens) for op, _ in prob.targets], dtype=complex)
    targets = np.array([value for _, value in prob.targets], dtype=complex)
    return AssignmentResidual(weak_values - targets, weak_values)
