"""Finite-dimensional obstruction to joint weak value assignments and its approximate remedy.

An exact assignment W: exp(i(A1 q1 + A2 q2)) -> exp(i(alpha1 q1 + alpha2 q2)) would force
beta_theta = alpha1 cos(theta) + alpha2 sin(theta) into the spectrum of
B_theta = A1 cos(theta) + A2 sin(theta) for every theta. Assignments that only match the
powers below the minimal-polynomial degree s are possible; their exponent deviates at
order |q|^s by the leading correction computed here.
"""

import logging
from math import comb, factorial

import numpy as np
from scipy import linalg

from weakjoint.config import get_settings
from weakjoint.errors import DependentSymmetrizedSet, Infeasible
from weakjoint.models.ensembles import AssignmentProblem, OperatorBasis, PrePostEnsemble
from weakjoint.models.nogo import (
    ExponentScaling,
    MinimalPolynomial,
    ObservablePair,
    ObstructionProfile,
    Verdict,
)
from weakjoint.models.operators import Operator
from weakjoint.parallel import parallel_map
from weakjoint.services import weakcore
from weakjoint.services.qlinalg import hermitian_exponential

logger = logging.getLogger(__name__)

NEAR_DEGENERATE_FACTOR = 1e4
ROUNDOFF_FLOOR = 1e-14


def btheta_spectrum_sweep(
    pair: ObservablePair,
    alpha1: float,
    alpha2: float,
    n_theta: int | None = None,
    spectral_tol: float | None = None,
    threads: int | None = None,
) -> ObstructionProfile:
    """Distance from beta_theta to the spectrum of B_theta over theta in [0, pi].

    The verdict is infeasible when the distance exceeds spectral_tol * ||B_theta||
    on a contiguous run of thetas spanning at least pi/n_theta.
    """
    settings = get_settings()
    n_theta = settings.n_theta if n_theta is None else n_theta
    spectral_tol = settings.spectral_tol if spectral_tol is None else spectral_tol
    if n_theta < 3:
        raise ValueError(f"n_theta must be at least 3, got {n_theta}")

    thetas = np.linspace(0.0, np.pi, n_theta)
    beta = alpha1 * np.cos(thetas) + alpha2 * np.sin(thetas)
    spectra = np.array(
        parallel_map(lambda t: linalg.eigvalsh(pair.combination(t)), thetas, threads)
    )
    distance = np.min(np.abs(spectra - beta[:, None]), axis=1)
    norms = np.max(np.abs(spectra), axis=1)
    tolerance = spectral_tol * np.where(norms > 0, norms, 1.0)

    window = _first_window(thetas, distance > tolerance, np.pi / n_theta)
    verdict = Verdict.INFEASIBLE if window is not None else Verdict.FEASIBLE
    logger.info(
        "[nogo] alpha=(%.6g, %.6g), max distance %.3e over %d angles: %s",
        alpha1,
        alpha2,
        float(np.max(distance)),
        n_theta,
        verdict.value,
    )
    return ObstructionProfile(thetas, beta, spectra, distance, tolerance, verdict, window)


def _first_window(thetas: np.ndarray, positive: np.ndarray, min_width: float):
    start = None
    for i, flag in enumerate(positive):
        if flag and start is None:
            start = i
        if start is not None and (not flag or i == len(positive) - 1):
            end = i if flag else i - 1
            if thetas[end] - thetas[start] >= min_width:
                return float(thetas[start]), float(thetas[end])
            start = None
    return None


def minimal_polynomial(b: Operator | np.ndarray, cluster_tol: float | None = None) -> MinimalPolynomial:
    """Monic product of (z - lambda) over distinct eigenvalues of a Hermitian B.

    Eigenvalues closer than cluster_tol * ||B|| merge into one root (their mean).
    Gaps within NEAR_DEGENERATE_FACTOR of that threshold are flagged, not merged.
    """
    cluster_tol = get_settings().cluster_tol if cluster_tol is None else cluster_tol
    matrix = b.entries if isinstance(b, Operator) else np.asarray(b)
    eigenvalues = linalg.eigvalsh(0.5 * (matrix + matrix.conj().T))
    scale = max(float(np.max(np.abs(eigenvalues))), 1.0e-300)
    threshold = cluster_tol * scale

    clusters = [[eigenvalues[0]]]
    near = False
    for value in eigenvalues[1:]:
        gap = value - clusters[-1][-1]
        if gap <= threshold:
            clusters[-1].append(value)
        else:
            near = near or gap <= NEAR_DEGENERATE_FACTOR * threshold
            clusters.append([value])
    roots = np.array([np.mean(c) for c in clusters])
    if near:
        logger.warning("Minimal polynomial has near-degenerate roots: %s", roots)
    return MinimalPolynomial(np.poly(roots).real, roots, near_degenerate=near)


def characteristic_polynomial(b: Operator | np.ndarray) -> np.ndarray:
    matrix = b.entries if isinstance(b, Operator) else np.asarray(b)
    return np.poly(linalg.eigvalsh(matrix)).real


def _chebyshev_nodes(count: int) -> np.ndarray:
    j = np.arange(count)
    return np.cos((2 * j + 1) * np.pi / (2 * count))


def symmetrized_operators(pair: ObservablePair, k: int) -> list[Operator]:
    """S_{l,k-l} for l = 0..k, the symmetrized products with l factors of A1.

    (A1 t + A2)^k = sum_l C(k,l) t^l S_{l,k-l}; coefficients are read off at k+1
    Chebyshev nodes by a Vandermonde solve.
    """
    if k < 0:
        raise ValueError(f"k must be nonnegative, got {k}")
    d = pair.dim
    if k == 0:
        return [Operator(np.eye(d), None, hermitian=True)]

    a1, a2 = pair.a1.entries, pair.a2.entries
    nodes = _chebyshev_nodes(k + 1)
    powers = np.array([np.linalg.matrix_power(a1 * t + a2, k) for t in nodes])
    vandermonde = np.vander(nodes, k + 1, increasing=True)
    coefficients = np.linalg.solve(vandermonde, powers.reshape(k + 1, -1)).reshape(k + 1, d, d)

    symmetrized = [coefficients[l] / comb(k, l) for l in range(k + 1)]
    symmetrized[0] = np.linalg.matrix_power(a2, k)
    symmetrized[k] = np.linalg.matrix_power(a1, k)
    return [Operator(0.5 * (s + s.conj().T), None, hermitian=True) for s in symmetrized]


def build_approx_problem(
    pair: ObservablePair,
    alpha1: float,
    alpha2: float,
    s: int,
    basis: OperatorBasis,
    independence_tol: float | None = None,
) -> AssignmentProblem:
    """Targets S_{l,k-l} -> alpha1^l alpha2^(k-l) for every k < s.

    Raises:
        ValueError: If s is not the minimal-polynomial degree at theta = 0 and pi/4
        DependentSymmetrizedSet: If the targets are linearly dependent
    """
    independence_tol = get_settings().independence_tol if independence_tol is None else independence_tol
    for theta in (0.0, np.pi / 4):
        degree = minimal_polynomial(pair.combination(theta)).degree
        if degree != s:
            raise ValueError(f"s = {s} but the minimal polynomial of B_theta at theta={theta:.4f} has degree {degree}")

    targets = []
    for k in range(s):
        for l, op in enumerate(symmetrized_operators(pair, k)):
            targets.append((op, alpha1**l * alpha2 ** (k - l)))

    stacked = np.array([op.entries.reshape(-1) for op, _ in targets])
    gram = stacked.conj() @ stacked.T
    smallest = float(np.min(linalg.svdvals(gram)))
    if smallest <= independence_tol:
        raise DependentSymmetrizedSet(smallest, independence_tol)
    return AssignmentProblem(tuple(targets), basis)


def approx_assignment(
    pair: ObservablePair,
    alpha1: float,
    alpha2: float,
    s: int,
    basis: OperatorBasis,
) -> PrePostEnsemble:
    """Entangled ensemble reproducing (A1 q1 + A2 q2)^k -> (alpha1 q1 + alpha2 q2)^k for k < s."""
    problem = build_approx_problem(pair, alpha1, alpha2, s, basis)
    logger.info("[approx] solving %d symmetrized targets (s=%d, d=%d)", len(problem.targets), s, pair.dim)
    w = weakcore.solve_assignment(problem)
    return weakcore.realize_entangled(w)


def leading_correction(pair: ObservablePair, alpha1: float, alpha2: float, q1: float, q2: float) -> complex:
    """-(i^s) |q|^s m_theta(beta_theta) / s! with theta = atan2(q2, q1)."""
    radius = float(np.hypot(q1, q2))
    if radius == 0.0:
        return 0j
    theta = float(np.arctan2(q2, q1))
    poly = minimal_polynomial(pair.combination(theta))
    s = poly.degree
    beta = alpha1 * np.cos(theta) + alpha2 * np.sin(theta)
    return complex(-(1j**s) * radius**s * poly(beta) / factorial(s))


def exponent_error_scaling(
    pair: ObservablePair,
    alpha1: float,
    alpha2: float,
    ens: PrePostEnsemble,
    directions,
    q_norms,
) -> ExponentScaling:
    """E(q) = log F(q) - i alpha.q - leading_correction(q) along rays, with log-log slopes.

    Raises:
        Infeasible: If F(q) vanishes along a ray, so its logarithm is undefined
    """
    directions = np.asarray(directions, dtype=float)
    q_norms = np.asarray(q_norms, dtype=float)
    measured = np.zeros((directions.size, q_norms.size), dtype=complex)
    predicted = np.zeros_like(measured)
    for i, theta in enumerate(directions):
        b = pair.combination(theta)
        for j, r in enumerate(q_norms):
            q1, q2 = r * np.cos(theta), r * np.sin(theta)
            f = weakcore.weak_value(Operator(hermitian_exponential(r * b), None), ens)
            if f == 0:
                raise Infeasible(f"Kraus function vanishes at q=({q1:.3g}, {q2:.3g})")
            measured[i, j] = np.log(f) - 1j * (alpha1 * q1 + alpha2 * q2)
            predicted[i, j] = leading_correction(pair, alpha1, alpha2, q1, q2)

    errors = np.abs(measured - predicted)
    slopes = np.array([_loglog_slope(q_norms, row) for row in errors])
    logger.info("[approx] exponent error slopes: %s", np.array2string(slopes, precision=3))
    return ExponentScaling(directions, q_norms, errors, predicted, measured, slopes)


def _loglog_slope(q_norms: np.ndarray, errors: np.ndarray) -> float:
    # rays where the assignment is exact leave errors at roundoff; those points carry no slope
    resolved = errors > ROUNDOFF_FLOOR
    if np.count_nonzero(resolved) < 2:
        return float("inf")
    return float(np.polyfit(np.log(q_norms[resolved]), np.log(errors[resolved]), 1)[0])
