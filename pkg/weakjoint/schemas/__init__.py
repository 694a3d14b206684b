from weakjoint.schemas.operator_spec import (
    MatrixSpec,
    OperatorSpecFile,
    TargetSpec,
    load_operator_spec,
    write_operator_spec,
)
from weakjoint.schemas.report import (
    TABLE_COLUMNS,
    ExperimentReport,
    ReportVerdict,
    Table,
)
from weakjoint.schemas.run import (
    ApproxConfig,
    AssignConfig,
    EPRRunConfig,
    InferXP4Config,
    InferXPConfig,
    KernelConfig,
    NogoConfig,
    RunConfig,
    SelftestConfig,
    WeylConfig,
)

__all__ = [
    "MatrixSpec",
    "OperatorSpecFile",
    "TargetSpec",
    "load_operator_spec",
    "write_operator_spec",
    "TABLE_COLUMNS",
    "ExperimentReport",
    "ReportVerdict",
    "Table",
    "ApproxConfig",
    "AssignConfig",
    "EPRRunConfig",
    "InferXP4Config",
    "InferXPConfig",
    "KernelConfig",
    "NogoConfig",
    "RunConfig",
    "SelftestConfig",
    "WeylConfig",
]
