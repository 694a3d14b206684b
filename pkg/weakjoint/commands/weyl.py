import numpy as np

from weakjoint.commands.common import int_list
from weakjoint.errors import ConfigError
from weakjoint.models.operators import Operator
from weakjoint.models.weyl import DiscreteWeylBasis
from weakjoint.schemas.operator_spec import load_operator_spec
from weakjoint.schemas.report import ExperimentReport, Table
from weakjoint.schemas.run import WeylConfig
from weakjoint.services import weakcore, weyl_discrete

NAME = "weyl"


def register(subparsers, parents) -> None:
    parser = subparsers.add_parser(
        NAME,
        parents=parents,
        help="discrete Weyl tables and the EPR weak-value-equals-symbol check",
    )
    parser.add_argument("--d", type=int, help="odd dimension")
    parser.add_argument("--zeta-i", type=int_list, help="displacement of the initial EPR state, z1,z2")
    parser.add_argument("--eta-f", type=int_list, help="phase point of the final EPR state, e1,e2")
    parser.add_argument("--spec", help="operator spec file holding the operator to tabulate")
    parser.add_argument("--operator", help="operator name in --spec (default: the first one)")
    parser.set_defaults(handler=handle, config_model=WeylConfig)


def _operator(config: WeylConfig, weak_value_operator: Operator) -> tuple[str, Operator]:
    if config.spec is None:
        return "W", weak_value_operator
    spec = load_operator_spec(config.spec)
    name = config.operator or next(iter(spec.operators))
    if name not in spec.operators:
        raise ConfigError(f"no operator named {name!r}", location=f"{config.spec}: operators")
    if spec.dimension != config.d:
        raise ConfigError(f"operator dimension {spec.dimension} does not match d={config.d}", location=str(config.spec))
    return name, spec.operator(name)


def handle(config: WeylConfig) -> ExperimentReport:
    basis = DiscreteWeylBasis(config.d)
    ens = weyl_discrete.epr_ensemble(basis, config.zeta_i, config.eta_f)
    eta = weyl_discrete.eta_s(basis, config.zeta_i, config.eta_f)
    w_op = weakcore.weak_value_operator(ens)

    phase_point = weyl_discrete.phase_point_op(basis, eta).entries
    transform = weyl_discrete.weak_transform(basis, ens)
    r = np.arange(basis.d)
    z1, z2 = np.meshgrid(r, r, indexing="ij")
    plane_wave = basis.phase(eta.z1 * z2 - eta.z2 * z1)
    composite = weyl_discrete.composite_weak_transform(basis, config.zeta_i, config.eta_f)

    name, op = _operator(config, w_op)
    symbol = weyl_discrete.weyl_symbol(basis, op)
    weak = weakcore.weak_value(op, ens)

    results = {
        "d": basis.d,
        "eta_s": [int(eta.z1), int(eta.z2)],
        "overlap": abs(ens.overlap),
        "weak_value_operator_error": float(np.max(np.abs(w_op.entries - phase_point))),
        "weak_transform_error": float(np.max(np.abs(transform - plane_wave))),
        "time_inversion_residual": weyl_discrete.time_inversion_residual(basis),
        "algebra_residuals": weyl_discrete.algebra_residuals(basis),
        "composite": {
            "eta_s": list(composite.eta_s),
            "eta_a": list(composite.eta_a),
            "cross": composite.cross,
            "predicted_eta_s": list(composite.predicted_eta_s),
            "predicted_eta_a": list(composite.predicted_eta_a),
            "predicted_cross": composite.predicted_cross,
            "matches_prediction": composite.matches_prediction,
            "model_error": composite.model_error,
            "modulus_spread": composite.modulus_spread,
        },
        "operator": name,
        "weak_value": weak,
        "symbol_at_eta_s": complex(symbol[int(eta.z1), int(eta.z2)]),
    }
    symbol_rows = [
        (int(a), int(b), float(symbol[a, b].real), float(symbol[a, b].imag)) for a in r for b in r
    ]
    transform_rows = [
        (int(a), int(b), float(transform[a, b].real), float(transform[a, b].imag)) for a in r for b in r
    ]
    tables = [
        Table.of_kind("weyl_symbol", symbol_rows),
        Table(name="weak_transform", columns=["zeta1", "zeta2", "re", "im"], rows=[list(t) for t in transform_rows]),
    ]
    return ExperimentReport(experiment=NAME, results=results, tables=tables)
