import logging

import numpy as np

from weakjoint.commands.common import float_list
from weakjoint.models.nogo import ObservablePair
from weakjoint.schemas.report import ExperimentReport, Table
from weakjoint.schemas.run import ApproxConfig
from weakjoint.services import nogo, qlinalg, weakcore

logger = logging.getLogger(__name__)

NAME = "approx"

SLOPE_MARGIN = 0.7


def register(subparsers, parents) -> None:
    parser = subparsers.add_parser(
        NAME,
        parents=parents,
        help="approximate assignment for the spin pair (Jx, Jz)",
        description="Match every power below the minimal-polynomial degree and measure the exponent error.",
    )
    parser.add_argument("--spin", type=float, help="spin quantum number j (half-integer)")
    parser.add_argument("--alpha", type=float_list, help="target weak values alpha1,alpha2")
    parser.add_argument("--directions", type=int, help="number of q directions in [0, pi)")
    parser.add_argument("--q-min", type=float)
    parser.add_argument("--q-max", type=float)
    parser.add_argument("--q-points", type=int)
    parser.set_defaults(handler=handle, config_model=ApproxConfig)


def handle(config: ApproxConfig) -> ExperimentReport:
    jx, _, jz = qlinalg.spin_operators(config.spin)
    pair = ObservablePair(jx, jz)
    s = pair.dim
    alpha1, alpha2 = config.alpha
    basis = weakcore.gell_mann_basis(pair.dim)

    problem = nogo.build_approx_problem(pair, alpha1, alpha2, s, basis)
    ens = nogo.approx_assignment(pair, alpha1, alpha2, s, basis)
    residual = weakcore.verify_assignment(ens, problem)

    directions = np.linspace(0.0, np.pi, config.directions, endpoint=False)
    q_norms = np.geomspace(config.q_min, config.q_max, config.q_points)
    scaling = nogo.exponent_error_scaling(pair, alpha1, alpha2, ens, directions, q_norms)
    logger.info("[approx] spin %g: s=%d, slopes %s (need >= %.1f)", config.spin, s, scaling.slopes, s + SLOPE_MARGIN)

    results = {
        "spin": config.spin,
        "s": s,
        "targets": len(problem.targets),
        "assignment_max_residual": residual.max_residual,
        "directions": directions.tolist(),
        "slopes": scaling.slopes.tolist(),
        "min_slope": float(scaling.slopes.min()),
        "required_slope": s + SLOPE_MARGIN,
        "slopes_ok": bool(scaling.slopes.min() >= s + SLOPE_MARGIN),
    }
    tables = [
        Table.of_kind(
            "exponent_error",
            zip(q_norms.tolist(), scaling.errors[i].tolist(), np.abs(scaling.predicted[i]).tolist()),
            name=f"exponent_error_{i}",
        )
        for i in range(directions.size)
    ]
    return ExperimentReport(experiment=NAME, results=results, tables=tables)
