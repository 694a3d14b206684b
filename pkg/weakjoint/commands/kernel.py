import numpy as np

from weakjoint.commands.common import float_list, point_list
from weakjoint.models.kernel import PolynomialF
from weakjoint.schemas.report import ExperimentReport, Table
from weakjoint.schemas.run import KernelConfig
from weakjoint.services import kernel_continuum

NAME = "kernel"

ZETA2_SAMPLES = 41


def register(subparsers, parents) -> None:
    parser = subparsers.add_parser(
        NAME,
        parents=parents,
        help="continuum solution for the pair (p, f(x)) with polynomial f",
    )
    parser.add_argument("--coefficients", type=float_list, help="f coefficients, ascending powers")
    parser.add_argument("--kappa", type=float, help="target weak value of p")
    parser.add_argument("--phi", type=float, help="target weak value of f(x)")
    parser.add_argument("--zeta1-min", type=float)
    parser.add_argument("--zeta1-max", type=float)
    parser.add_argument("--zeta1-step", type=float)
    parser.add_argument("--zeta2-max", type=float, help="half-width of the zeta2 range of the transform check")
    parser.add_argument("--t-samples", type=point_list, help="kernel sample points t1,t2;t1,t2;...")
    parser.set_defaults(handler=handle, config_model=KernelConfig)


def handle(config: KernelConfig) -> ExperimentReport:
    f = PolynomialF(config.coefficients)
    zeta1 = np.arange(config.zeta1_min, config.zeta1_max + 0.5 * config.zeta1_step, config.zeta1_step)
    zeta2 = np.linspace(-config.zeta2_max, config.zeta2_max, ZETA2_SAMPLES)

    report = kernel_continuum.verify_solution(f, config.kappa, config.phi, config.t_samples, zeta1,
                                              threads=config.threads)
    transform = kernel_continuum.weak_transform_solution(f, config.kappa, config.phi, zeta1, zeta2)
    exact = kernel_continuum.g_symbolic(f)

    results = {
        "degree": f.degree,
        "feasibility": kernel_continuum.feasibility(f).value,
        "g": str(exact.as_expr()),
        "g_matches_integral": (exact - kernel_continuum.g_oracle(f)).is_zero,
        "algebraic_residual": report.algebraic_max,
        "max_branch_jump": report.branch.max_jump,
        "quadrature_residuals": report.quadrature_residuals.tolist(),
        "quadrature_residual": report.quadrature_max,
        "epsilon": report.epsilon,
        "zeta2_cutoff": report.zeta2_cutoff,
        "u_window": report.u_window,
        "unit_modulus_error": float(np.max(np.abs(np.abs(transform) - 1))),
    }
    branch = report.branch
    table = Table.of_kind("root_branch", zip(branch.zeta1.tolist(), branch.u.tolist(), branch.residuals.tolist()))
    return ExperimentReport(experiment=NAME, results=results, tables=[table])
