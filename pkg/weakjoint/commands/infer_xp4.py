import logging

from weakjoint.commands.common import add_epr_options, fit_summary, float_list, uncertainty_summary
from weakjoint.models.instruments import EPRSelection, InstrumentGrid
from weakjoint.schemas.report import ExperimentReport, Table
from weakjoint.schemas.run import InferXP4Config
from weakjoint.services import jointmeas

logger = logging.getLogger(__name__)

NAME = "infer-xp4"


def register(subparsers, parents) -> None:
    parser = subparsers.add_parser(
        NAME,
        parents=parents,
        help="joint (x, p, x_a, p_a) inference with four instruments",
    )
    add_epr_options(parser)
    parser.add_argument("--sweep", type=float_list, help="spread values combined over all four instruments")
    parser.set_defaults(handler=handle, config_model=InferXP4Config)


def handle(config: InferXP4Config) -> ExperimentReport:
    selection = EPRSelection(config.x_minus, config.p_plus, config.x_plus, config.p_minus, config.envelope)
    grid = InstrumentGrid(config.n, config.q_max, config.spreads)
    service = jointmeas.JointMeasurementService(config.threads)
    xp = service.infer_xp4(selection, config.d, config.length, grid, config.sweep)

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
        "sweep_minimum": xp.sweep_minimum,
        "sweep_size": len(xp.sweep),
    }
    sweep = Table(
        name="spread_sweep",
        columns=["dpi1", "dpi2", "dpi3", "dpi4", "dpi1_out", "dpi2_out", "dpi3_out", "dpi4_out", "four_product"],
        rows=[[*row.spreads, *row.pointer_spreads, row.four_product] for row in xp.sweep],
    )
    return ExperimentReport(experiment=NAME, results=results, tables=[sweep])
