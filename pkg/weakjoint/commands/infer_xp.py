import logging

from weakjoint.commands.common import add_epr_options, fit_summary, grid_rows, int_list, uncertainty_summary
from weakjoint.models.instruments import EPRSelection, InstrumentGrid
from weakjoint.schemas.report import ExperimentReport, Table
from weakjoint.schemas.run import InferXPConfig
from weakjoint.services import jointmeas

logger = logging.getLogger(__name__)

NAME = "infer-xp"


def register(subparsers, parents) -> None:
    parser = subparsers.add_parser(
        NAME,
        parents=parents,
        help="joint (x, p) inference on an EPR ensemble",
        description="Simulate simultaneous weak measurement of x and p with an entangled ancilla.",
    )
    add_epr_options(parser)
    parser.add_argument("--sizes", type=int_list, help="grid sizes of the convergence table")
    parser.add_argument("--no-naive", dest="naive", action="store_false", help="skip the naive ensemble run")
    parser.set_defaults(handler=handle, config_model=InferXPConfig)


def handle(config: InferXPConfig) -> ExperimentReport:
    selection = EPRSelection(config.x_minus, config.p_plus, config.x_plus, config.p_minus, config.envelope)
    grid = InstrumentGrid(config.n, config.q_max, config.spreads)
    service = jointmeas.JointMeasurementService(config.threads)
    xp = service.infer_xp(selection, config.d, config.length, grid, config.sizes, config.naive)

    realized = xp.selection
    results = {
        "realized_labels": {
            "x_minus": realized.x_minus,
            "p_plus": realized.p_plus,
            "x_plus": realized.x_plus,
            "p_minus": realized.p_minus,
            "envelope": realized.envelope,
        },
        "predicted_alpha": list(xp.predicted_alpha),
        "fit": fit_summary(xp.fit),
        "uncertainty": uncertainty_summary(xp.uncertainty),
        "shift_theorem_distance": xp.shift_distance,
    }
    if xp.naive_fit is not None:
        results["naive"] = {
            "fit": fit_summary(xp.naive_fit),
            "uncertainty": uncertainty_summary(xp.naive_uncertainty),
        }
        results["suppression_ratio"] = xp.suppression_ratio

    dist = xp.distribution
    tables = [
        Table.of_kind("pointer_distribution", grid_rows(dist.pi_axis, dist.pi_axis, dist.probability)),
        Table.of_kind("convergence", [(row.d, *row.alpha, row.beta12) for row in xp.convergence]),
    ]
    return ExperimentReport(experiment=NAME, results=results, tables=tables)
