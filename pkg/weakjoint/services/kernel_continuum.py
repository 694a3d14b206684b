"""Continuum solution for pairs (p, f(x)) with polynomial f.

The kernel of the pair reduces the defining integral to g(u|zeta1) = phi, where
g(u|zeta1) is f averaged symmetrically over [u - zeta1/2, u + zeta1/2]. Any real
branch u_phi(zeta1) of that equation yields the weak transform
w(zeta) = exp(i(u_phi(zeta1) zeta2 - kappa zeta1)).
"""

import logging
from math import comb

import numpy as np
import sympy
from numpy.polynomial import polynomial as P
from scipy.integrate import trapezoid

from weakjoint.config import get_settings
from weakjoint.errors import Infeasible, RootTrackingBreak
from weakjoint.models.kernel import (
    Feasibility,
    GPolynomial,
    KernelResidualReport,
    PolynomialF,
    RootBranch,
)
from weakjoint.parallel import parallel_map

logger = logging.getLogger(__name__)

U, ZETA1, S = sympy.symbols("u zeta1 s", real=True)

NEWTON_STEPS = 3
ROOT_RESIDUAL_TOL = 1e-10


def g_poly(f: PolynomialF, zeta1: float) -> GPolynomial:
    """Coefficients of g(.|zeta1), ascending in u.

    The term c_m x^m contributes c_m C(m, j) (zeta1/2)^j / (j+1) to u^(m-j);
    odd j cancel under the symmetric average.
    """
    n = f.degree
    coefficients = np.zeros(n + 1)
    half = 0.5 * zeta1
    for m, c in enumerate(f.coefficients):
        for j in range(0, m + 1, 2):
            coefficients[m - j] += c * comb(m, j) * half**j / (j + 1)
    return GPolynomial(float(zeta1), coefficients)


def _exact(c: float) -> sympy.Rational:
    return sympy.nsimplify(c, rational=True)


def g_symbolic(f: PolynomialF) -> sympy.Poly:
    """g(u|zeta1) as a polynomial in (u, zeta1) with exact rational coefficients."""
    expr = sympy.Integer(0)
    for m, c in enumerate(f.coefficients):
        for j in range(0, m + 1, 2):
            expr += _exact(c) * sympy.binomial(m, j) * (ZETA1 / 2) ** j / (j + 1) * U ** (m - j)
    return sympy.Poly(sympy.expand(expr), U, ZETA1)


def g_oracle(f: PolynomialF) -> sympy.Poly:
    """g by direct symbolic integration of (1/2) int_{-1}^{1} f(u - s zeta1/2) ds."""
    integrand = sum(_exact(c) * (U - S * ZETA1 / 2) ** m for m, c in enumerate(f.coefficients))
    expr = sympy.integrate(sympy.expand(integrand), (S, -1, 1)) / 2
    return sympy.Poly(sympy.expand(expr), U, ZETA1)


def feasibility(f: PolynomialF) -> Feasibility:
    # odd-degree real polynomials are onto R, so g(.|zeta1) = phi always has a real root
    return Feasibility.FEASIBLE if f.degree % 2 == 1 else Feasibility.REJECTED_EVEN_DEGREE


def _require_feasible(f: PolynomialF) -> None:
    if feasibility(f) is not Feasibility.FEASIBLE:
        raise Infeasible(f"f has even degree {f.degree}; g(u|zeta1) = phi has no real root for every phi")


def _polish(coefficients: np.ndarray, u: float) -> float:
    derivative = P.polyder(coefficients)
    for _ in range(NEWTON_STEPS):
        slope = P.polyval(u, derivative)
        if slope == 0:
            break
        u = u - P.polyval(u, coefficients) / slope
    return float(u)


def real_roots(g: GPolynomial, phi: float, imag_tol: float | None = None) -> np.ndarray:
    """Real solutions of g(u|zeta1) = phi, Newton-polished and sorted ascending."""
    imag_tol = get_settings().root_imag_tol if imag_tol is None else imag_tol
    shifted = g.coefficients.copy()
    shifted[0] -= phi
    roots = P.polyroots(shifted)
    candidates = roots[np.abs(roots.imag) <= imag_tol * np.maximum(1.0, np.abs(roots))]
    if candidates.size == 0:
        # clustered roots split into complex pairs larger than the tolerance
        candidates = roots[[np.argmin(np.abs(roots.imag))]]
    polished = sorted({_polish(shifted, float(r.real)) for r in candidates})
    return np.array(polished)


def root_branch(
    f: PolynomialF,
    phi: float,
    zeta1_grid,
    continuity_bound: float | None = None,
    imag_tol: float | None = None,
) -> RootBranch:
    """Track one real root u_phi(zeta1) of g(u|zeta1) = phi along the grid.

    The branch starts at the root with smallest |u| (ties to the smaller u) and
    continues with the root nearest the previous value.

    Raises:
        Infeasible: If f has even degree
        RootTrackingBreak: If consecutive roots differ by more than continuity_bound
    """
    _require_feasible(f)
    bound = get_settings().root_continuity_bound if continuity_bound is None else continuity_bound
    grid = np.asarray(zeta1_grid, dtype=float)
    u = np.empty(grid.size)
    residuals = np.empty(grid.size)
    max_jump = 0.0
    for i, zeta1 in enumerate(grid):
        g = g_poly(f, zeta1)
        roots = real_roots(g, phi, imag_tol)
        if i == 0:
            choice = min(roots, key=lambda r: (abs(r), r))
        else:
            choice = roots[np.argmin(np.abs(roots - u[i - 1]))]
            jump = abs(choice - u[i - 1])
            if jump > bound:
                raise RootTrackingBreak(float(zeta1), float(u[i - 1]), float(jump), bound)
            max_jump = max(max_jump, float(jump))
        u[i] = choice
        residuals[i] = abs(g(choice) - phi)

    worst = float(residuals.max()) if residuals.size else 0.0
    if worst > ROOT_RESIDUAL_TOL * (1 + abs(phi)):
        logger.warning("[kernel] root residual %.3e above %.1e", worst, ROOT_RESIDUAL_TOL * (1 + abs(phi)))
    return RootBranch(grid, u, residuals, max_jump)


def weak_transform_solution(f: PolynomialF, kappa: float, phi: float, zeta1_grid, zeta2_grid) -> np.ndarray:
    """w[i, j] = exp(i(u_phi(zeta1_i) zeta2_j - kappa zeta1_i)); unit modulus everywhere."""
    branch = root_branch(f, phi, zeta1_grid)
    zeta2 = np.asarray(zeta2_grid, dtype=float)
    phase = branch.u[:, None] * zeta2[None, :] - kappa * branch.zeta1[:, None]
    return np.exp(1j * phase)


def _quadrature_residual(
    f: PolynomialF,
    kappa: float,
    phi: float,
    t: tuple[float, float],
    branch: RootBranch,
    epsilon: float,
    zeta2: np.ndarray,
    u_window: float,
    u_step: float,
) -> float:
    t1, t2 = t
    g = g_poly(f, t1)
    guess = np.interp(t1, branch.zeta1, branch.u)
    roots = real_roots(g, phi)
    u0 = float(roots[np.argmin(np.abs(roots - guess))])

    u = np.arange(u0 - u_window, u0 + u_window + 0.5 * u_step, u_step)
    damping = np.exp(-epsilon * zeta2**2)
    inner = trapezoid(np.exp(1j * np.outer(u0 - u, zeta2)) * damping, zeta2, axis=1) / (2 * np.pi)
    value = np.exp(-1j * kappa * t1) * trapezoid(np.exp(1j * g(u) * t2) * inner, u)
    return float(abs(value - np.exp(1j * (phi * t2 - kappa * t1))))


def verify_solution(
    f: PolynomialF,
    kappa: float,
    phi: float,
    t_samples,
    zeta1_grid,
    epsilon: float | None = None,
    zeta2_step: float = 0.5,
    u_window: float = 0.5,
    u_step: float = 0.002,
    threads: int | None = None,
) -> KernelResidualReport:
    """Check the solution against the defining kernel integral.

    The algebraic tier evaluates |g(u_phi(zeta1)|zeta1) - phi| along zeta1_grid.
    The quadrature tier integrates
    e^(-i kappa t1) int du e^(i g(u|t1) t2) (1/2pi) int dzeta2 e^(i zeta2 (u0 - u)) e^(-eps zeta2^2)
    for every t sample and compares with e^(i(phi t2 - kappa t1)). The zeta2 range
    is cut where the damping falls below e^-40.
    """
    epsilon = get_settings().quadrature_epsilon if epsilon is None else epsilon
    branch = root_branch(f, phi, zeta1_grid)
    samples = np.atleast_2d(np.asarray(t_samples, dtype=float))
    cutoff = float(np.sqrt(40.0 / epsilon))
    zeta2 = np.arange(-cutoff, cutoff + 0.5 * zeta2_step, zeta2_step)

    residuals = np.array(
        parallel_map(
            lambda t: _quadrature_residual(f, kappa, phi, (t[0], t[1]), branch, epsilon, zeta2, u_window, u_step),
            list(samples),
            threads,
        )
    )
    report = KernelResidualReport(
        algebraic_max=float(branch.residuals.max()) if branch.residuals.size else 0.0,
        branch=branch,
        t_samples=samples,
        quadrature_residuals=residuals,
        epsilon=epsilon,
        zeta2_cutoff=cutoff,
        u_window=u_window,
    )
    logger.info(
        "[kernel] degree %d, phi=%.6g: algebraic residual %.2e, quadrature residual %.2e (eps=%.1e)",
        f.degree,
        phi,
        report.algebraic_max,
        report.quadrature_max,
        epsilon,
    )
    return report
