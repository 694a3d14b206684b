"""Fast invariant suite across every numerical module.

Each check returns (residual, tolerance); it passes when residual <= tolerance.
Checks are small enough to finish in a few seconds together.
"""

import logging
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from weakjoint.errors import Infeasible, WeakJointError
from weakjoint.models.ensembles import AssignmentProblem, PrePostEnsemble
from weakjoint.models.instruments import EPRSelection, InstrumentGrid
from weakjoint.models.kernel import PolynomialF
from weakjoint.models.nogo import ObservablePair, Verdict
from weakjoint.models.operators import CanonicalGrid, Operator, StateVector
from weakjoint.models.weyl import DiscreteWeylBasis
from weakjoint.services import jointmeas, kernel_continuum, nogo, qlinalg, weakcore, weyl_discrete

logger = logging.getLogger(__name__)

SEED = 20240611


@dataclass(frozen=True)
class CheckResult:
    name: str
    residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.residual) and self.residual <= self.tolerance)


def _random_hermitian(rng: np.random.Generator, dim: int) -> np.ndarray:
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return 0.5 * (m + m.conj().T)


def _random_state(rng: np.random.Generator, dim: int) -> StateVector:
    return StateVector(rng.normal(size=dim) + 1j * rng.normal(size=dim))


def check_unitarity() -> tuple[float, float]:
    rng = np.random.default_rng(SEED)
    h = Operator(_random_hermitian(rng, 32), None, hermitian=True)
    u = qlinalg.unitary_from_generator([(h, 0.7)]).entries
    return float(np.max(np.abs(u.conj().T @ u - np.eye(32)))), 1e-10


def check_partial_trace() -> tuple[float, float]:
    rng = np.random.default_rng(SEED)
    m = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    rho = Operator(m @ m.conj().T, (2, 3))
    worst = max(abs(qlinalg.partial_trace(rho, keep).trace() - rho.trace()) for keep in (0, 1))
    return float(worst), 1e-12


def check_canonical_commutator() -> tuple[float, float]:
    grid = CanonicalGrid(128, 20.0)
    x_op, p_op = qlinalg.grid_canonical_pair(grid)
    value = qlinalg.expectation(qlinalg.commutator(x_op, p_op), qlinalg.gaussian_state(grid))
    return abs(value - 1j), 1e-3


def check_gell_mann() -> tuple[float, float]:
    return max(weakcore.gell_mann_basis(d).orthonormality_error() for d in (2, 3, 4)), 1e-12


def check_weak_value_operator() -> tuple[float, float]:
    rng = np.random.default_rng(SEED)
    ens = PrePostEnsemble(_random_state(rng, 12), _random_state(rng, 12), system_dim=3, ancilla_dim=4)
    w = weakcore.weak_value_operator(ens)
    a = Operator(_random_hermitian(rng, 3), None, hermitian=True)
    mismatch = abs(np.trace(a.entries @ w.entries) - weakcore.weak_value(a, ens))
    return float(max(abs(w.trace() - 1), mismatch)), 1e-10


def check_entangled_assignment() -> tuple[float, float]:
    sx, sy, sz = qlinalg.pauli_matrices()
    problem = AssignmentProblem(((sx, 1.0), (sz, 1.0)), weakcore.gell_mann_basis(2))
    ens = weakcore.realize_entangled(weakcore.solve_assignment(problem))
    return weakcore.verify_assignment(ens, problem).max_residual, 1e-10


def check_pauli_obstruction() -> tuple[float, float]:
    sx, _, sz = qlinalg.pauli_matrices()
    profile = nogo.btheta_spectrum_sweep(ObservablePair(sx, sz), 1.0, 1.0, n_theta=37, threads=1)
    return (0.0 if profile.verdict is Verdict.INFEASIBLE else 1.0), 0.0


def check_spin_minimal_polynomial() -> tuple[float, float]:
    worst = 0
    for j in (0.5, 1.0, 1.5):
        jx, jy, _ = qlinalg.spin_operators(j)
        b = ObservablePair(jx, jy).combination(0.3)
        worst = max(worst, abs(nogo.minimal_polynomial(b).degree - int(2 * j + 1)))
    return float(worst), 0.0


def check_weyl_algebra() -> tuple[float, float]:
    residuals = weyl_discrete.algebra_residuals(DiscreteWeylBasis(3))
    return max(residuals.values()), 1e-10


def check_weyl_time_inversion() -> tuple[float, float]:
    return max(weyl_discrete.time_inversion_residual(DiscreteWeylBasis(d)) for d in (3, 5)), 1e-12


def check_epr_weak_value_is_symbol() -> tuple[float, float]:
    basis = DiscreteWeylBasis(5)
    zeta_i, eta_f = (1, 2), (3, 0)
    ens = weyl_discrete.epr_ensemble(basis, zeta_i, eta_f)
    eta = weyl_discrete.eta_s(basis, zeta_i, eta_f)
    rng = np.random.default_rng(SEED)
    a = Operator(_random_hermitian(rng, 5), None, hermitian=True)
    symbol = weyl_discrete.weyl_symbol(basis, a)[int(eta.z1), int(eta.z2)]
    return abs(weakcore.weak_value(a, ens) - symbol), 1e-10


def check_kernel_coefficients() -> tuple[float, float]:
    f = PolynomialF((1.0, -2.0, 0.5, 1.0))
    difference = kernel_continuum.g_symbolic(f) - kernel_continuum.g_oracle(f)
    return (0.0 if difference.is_zero else 1.0), 0.0


def check_kernel_root_branch() -> tuple[float, float]:
    f = PolynomialF((0.0, 0.0, 0.0, 1.0))
    branch = kernel_continuum.root_branch(f, 2.0, np.linspace(-5, 5, 101))
    return float(branch.residuals.max()), 1e-10


def check_kernel_rejects_even_degree() -> tuple[float, float]:
    try:
        kernel_continuum.root_branch(PolynomialF((0.0, 0.0, 1.0)), 1.0, [0.0])
    except Infeasible:
        return 0.0, 0.0
    return 1.0, 0.0


def check_phase_fit_model() -> tuple[float, float]:
    grid = InstrumentGrid(17, 0.5)
    beta = np.array([[0.0, 0.3], [0.3, 0.0]])
    fit = jointmeas.phase_fit(jointmeas.model_kraus_sample(grid, (0.8, -0.4), beta))
    return float(max(np.max(np.abs(fit.alpha - (0.8, -0.4))), abs(fit.cross(0, 1) - 0.3))), 1e-10


def check_epr_factorization() -> tuple[float, float]:
    grid = CanonicalGrid(16, 12.0)
    sel = EPRSelection(x_minus=0.75, p_plus=0.2, x_plus=0.1, p_minus=0.0)
    return jointmeas.factorization_residual(sel, grid, [(0.3, -0.2), (0.5, 0.5)]), 1e-10


def check_epr_back_action() -> tuple[float, float]:
    canonical = CanonicalGrid(32, 20.0)
    sel = EPRSelection(x_minus=0.0, p_plus=0.0, x_plus=0.0, p_minus=0.0)
    ens = jointmeas.epr_states(sel, canonical)
    x_op, p_op = qlinalg.grid_canonical_pair(canonical)
    fit = jointmeas.phase_fit(jointmeas.kraus_sample(ens, [x_op, p_op], InstrumentGrid(9, 0.5), threads=1))
    return abs(fit.cross(0, 1)), 0.05


CHECKS: dict[str, Callable[[], tuple[float, float]]] = {
    "qlinalg.unitarity": check_unitarity,
    "qlinalg.partial_trace": check_partial_trace,
    "qlinalg.canonical_commutator": check_canonical_commutator,
    "weakcore.gell_mann_orthonormality": check_gell_mann,
    "weakcore.weak_value_operator": check_weak_value_operator,
    "weakcore.entangled_assignment": check_entangled_assignment,
    "nogo.pauli_obstruction": check_pauli_obstruction,
    "nogo.spin_minimal_polynomial": check_spin_minimal_polynomial,
    "weyl.algebra": check_weyl_algebra,
    "weyl.time_inversion": check_weyl_time_inversion,
    "weyl.epr_weak_value_is_symbol": check_epr_weak_value_is_symbol,
    "kernel.g_coefficients": check_kernel_coefficients,
    "kernel.root_branch": check_kernel_root_branch,
    "kernel.even_degree_rejected": check_kernel_rejects_even_degree,
    "jointmeas.phase_fit_model": check_phase_fit_model,
    "jointmeas.epr_factorization": check_epr_factorization,
    "jointmeas.epr_back_action": check_epr_back_action,
}


def run_checks(names=None) -> list[CheckResult]:
    """Run the named checks (all by default); a check that raises is recorded as failed."""
    selected = CHECKS if names is None else {name: CHECKS[name] for name in names}
    results = []
    for name, check in selected.items():
        try:
            residual, tolerance = check()
        except (WeakJointError, ValueError) as e:
            logger.error("[selftest] %s raised %s: %s", name, type(e).__name__, e)
            residual, tolerance = float("inf"), 0.0
        result = CheckResult(name, float(residual), float(tolerance))
        level = logging.INFO if result.passed else logging.WARNING
        logger.log(level, "[selftest] %-36s residual %.3e (tol %.1e) %s", name, residual, tolerance,
                   "ok" if result.passed else "FAILED")
        results.append(result)
    return results
