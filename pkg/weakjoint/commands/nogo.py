import numpy as np

from weakjoint.commands.common import float_list
from weakjoint.models.nogo import Verdict
from weakjoint.schemas.operator_spec import load_operator_spec
from weakjoint.schemas.report import ExperimentReport, ReportVerdict, Table
from weakjoint.schemas.run import NogoConfig
from weakjoint.services import nogo

NAME = "nogo"


def register(subparsers, parents) -> None:
    parser = subparsers.add_parser(
        NAME,
        parents=parents,
        help="test whether exp(i(A1 q1 + A2 q2)) -> exp(i alpha.q) is assignable",
    )
    parser.add_argument("--spec", required=True, help="operator spec file; its pair (or first two operators) is used")
    parser.add_argument("--alpha", required=True, type=float_list, help="target weak values alpha1,alpha2")
    parser.add_argument("--n-theta", type=int, help="angles in the theta sweep")
    parser.set_defaults(handler=handle, config_model=NogoConfig)


def handle(config: NogoConfig) -> ExperimentReport:
    pair = load_operator_spec(config.spec).observable_pair()
    alpha1, alpha2 = config.alpha
    profile = nogo.btheta_spectrum_sweep(pair, alpha1, alpha2, config.n_theta, threads=config.threads)

    degrees = {
        f"{theta:.4f}": nogo.minimal_polynomial(pair.combination(theta)).degree for theta in (0.0, np.pi / 4)
    }
    results = {
        "obstruction": profile.verdict.value,
        "max_distance": float(profile.distance.max()),
        "min_distance": float(profile.distance.min()),
        "infeasible_window": list(profile.infeasible_window) if profile.infeasible_window else None,
        "n_theta": int(profile.thetas.size),
        "minimal_polynomial_degree": degrees,
    }
    verdict = ReportVerdict.INFEASIBLE if profile.verdict is Verdict.INFEASIBLE else ReportVerdict.OK
    table = Table.of_kind("theta_profile", zip(profile.thetas.tolist(), profile.beta.tolist(), profile.distance.tolist()))
    return ExperimentReport(experiment=NAME, verdict=verdict, results=results, tables=[table])
