from weakjoint.schemas.report import ExperimentReport, ReportVerdict, Table
from weakjoint.schemas.run import SelftestConfig
from weakjoint.services import selftest

NAME = "selftest"


def register(subparsers, parents) -> None:
    parser = subparsers.add_parser(NAME, parents=parents, help="run the fast invariant suite")
    parser.set_defaults(handler=handle, config_model=SelftestConfig)


def handle(config: SelftestConfig) -> ExperimentReport:
    checks = selftest.run_checks()
    failed = [c.name for c in checks if not c.passed]
    table = Table(
        name="checks",
        columns=["check", "residual", "tolerance", "passed"],
        rows=[[c.name, c.residual, c.tolerance, int(c.passed)] for c in checks],
    )
    return ExperimentReport(
        experiment=NAME,
        verdict=ReportVerdict.ERROR if failed else ReportVerdict.OK,
        results={"checks": len(checks), "failed": failed},
        tables=[table],
    )
