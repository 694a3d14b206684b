import enum
from typing import Any

from pydantic import BaseModel, model_validator

# Frozen CSV column contracts, keyed by table kind
TABLE_COLUMNS: dict[str, tuple[str, ...]] = {
    "theta_profile": ("theta", "beta", "distance"),
    "root_branch": ("zeta1", "u_root", "residual"),
    "pointer_distribution": ("pi1", "pi2", "probability"),
    "convergence": ("d", "alpha1", "alpha2", "beta12"),
    "weyl_symbol": ("zeta1", "zeta2", "symbol_re", "symbol_im"),
    "exponent_error": ("q_norm", "error", "predicted"),
}


class ReportVerdict(str, enum.Enum):
    OK = "ok"
    INFEASIBLE = "infeasible"
    ERROR = "error"


class Table(BaseModel):
    """A headered table written as <name>.csv."""

    name: str
    columns: list[str]
    rows: list[list[float | int | str]]
    kind: str | None = None

    @model_validator(mode="after")
    def check_shape(self) -> "Table":
        if self.kind is not None:
            expected = TABLE_COLUMNS.get(self.kind)
            if expected is None:
                raise ValueError(f"unknown table kind {self.kind!r}")
            if tuple(self.columns) != expected:
                raise ValueError(f"{self.kind} tables have columns {','.join(expected)}, got {','.join(self.columns)}")
        width = len(self.columns)
        if any(len(row) != width for row in self.rows):
            raise ValueError(f"table {self.name!r} has rows that do not match its {width} columns")
        return self

    @classmethod
    def of_kind(cls, kind: str, rows, name: str | None = None) -> "Table":
        return cls(name=name or kind, kind=kind, columns=list(TABLE_COLUMNS[kind]), rows=[list(r) for r in rows])


class ExperimentReport(BaseModel):
    experiment: str
    verdict: ReportVerdict = ReportVerdict.OK
    config: dict[str, Any] = {}
    versions: dict[str, str] = {}
    results: dict[str, Any] = {}
    tables: list[Table] = []
