import logging

from weakjoint.errors import ConfigError
from weakjoint.models.ensembles import AssignmentProblem, Realizability
from weakjoint.models.operators import Operator
from weakjoint.schemas.operator_spec import load_operator_spec
from weakjoint.schemas.report import ExperimentReport, Table
from weakjoint.schemas.run import AssignConfig
from weakjoint.services import weakcore

logger = logging.getLogger(__name__)

NAME = "assign"


def register(subparsers, parents) -> None:
    parser = subparsers.add_parser(
        NAME,
        parents=parents,
        help="solve, realize and verify a weak value assignment",
    )
    parser.add_argument("--spec", required=True, help="operator spec file with a targets list")
    parser.set_defaults(handler=handle, config_model=AssignConfig)


def handle(config: AssignConfig) -> ExperimentReport:
    spec = load_operator_spec(config.spec)
    if not spec.targets:
        raise ConfigError("assign needs at least one target", location=f"{config.spec}: targets")
    basis = weakcore.gell_mann_basis(spec.dimension)
    problem = AssignmentProblem(tuple(spec.assignment_targets()), basis)

    w = weakcore.solve_assignment(problem)
    realizability = weakcore.product_realizability(Operator(w.operator(), None), basis)
    if realizability.verdict is Realizability.PRODUCT_REALIZABLE:
        ens = weakcore.product_ensemble(realizability.chi_i, realizability.chi_f)
    else:
        ens = weakcore.realize_entangled(w)
    residual = weakcore.verify_assignment(ens, problem)
    logger.info(
        "[assign] %d targets on d=%d: %s, max residual %.2e",
        len(spec.targets),
        spec.dimension,
        realizability.verdict.value,
        residual.max_residual,
    )

    results = {
        "realizability": realizability.verdict.value,
        "singular_values": realizability.singular_values.tolist(),
        "trace_square": realizability.trace_square,
        "weak_norm": realizability.weak_norm,
        "failed_constraints": list(realizability.failed_constraints),
        "system_dim": ens.system_dim,
        "ancilla_dim": ens.ancilla_dim,
        "overlap": abs(ens.overlap),
        "weak_vector": w.w.tolist(),
        "max_residual": residual.max_residual,
    }
    rows = []
    for target, value, error in zip(spec.targets, residual.weak_values, residual.errors):
        goal = target.complex_value
        rows.append([target.operator, goal.real, goal.imag, float(value.real), float(value.imag), float(abs(error))])
    table = Table(
        name="assignment",
        columns=["operator", "target_re", "target_im", "weak_re", "weak_im", "error"],
        rows=rows,
    )
    return ExperimentReport(experiment=NAME, results=results, tables=[table])
