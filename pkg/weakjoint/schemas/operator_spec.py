import json
import logging
from pathlib import Path

import numpy as np
from pydantic import BaseModel, Field, ValidationError, model_validator

from weakjoint.errors import ConfigError
from weakjoint.models.nogo import ObservablePair
from weakjoint.models.operators import Operator

logger = logging.getLogger(__name__)


class MatrixSpec(BaseModel):
    """A square matrix as rows of [re, im] pairs."""

    matrix: list[list[tuple[float, float]]]
    hermitian: bool = False

    def to_array(self) -> np.ndarray:
        pairs = np.array(self.matrix, dtype=float)
        return pairs[..., 0] + 1j * pairs[..., 1]


class TargetSpec(BaseModel):
    operator: str
    value: tuple[float, float] = Field(..., description="Target weak value as [re, im]")

    @property
    def complex_value(self) -> complex:
        return complex(*self.value)


class OperatorSpecFile(BaseModel):
    """Named operators on one Hilbert space, plus optional weak value targets and a designated pair."""

    dimension: int = Field(..., ge=1)
    operators: dict[str, MatrixSpec]
    targets: list[TargetSpec] = []
    pair: tuple[str, str] | None = None
    description: str | None = None

    @model_validator(mode="after")
    def check_consistency(self) -> "OperatorSpecFile":
        for name, spec in self.operators.items():
            rows = len(spec.matrix)
            if rows != self.dimension or any(len(row) != self.dimension for row in spec.matrix):
                raise ValueError(f"operator {name!r} is not {self.dimension}x{self.dimension}")
            if spec.hermitian and not Operator(spec.to_array(), None).is_hermitian():
                raise ValueError(f"operator {name!r} is flagged hermitian but is not")
        names = [t.operator for t in self.targets] + list(self.pair or ())
        missing = sorted({n for n in names if n not in self.operators})
        if missing:
            raise ValueError(f"unknown operator name(s): {', '.join(missing)}")
        return self

    def operator(self, name: str) -> Operator:
        spec = self.operators[name]
        return Operator.from_matrix(spec.to_array(), hermitian=spec.hermitian)

    def assignment_targets(self) -> list[tuple[Operator, complex]]:
        return [(self.operator(t.operator), t.complex_value) for t in self.targets]

    def observable_pair(self) -> ObservablePair:
        """The declared pair, or the first two operators in file order."""
        names = self.pair or tuple(self.operators)[:2]
        if len(names) < 2:
            raise ConfigError("an observable pair needs two operators", location="pair")
        return ObservablePair(self.operator(names[0]), self.operator(names[1]))


def _location(error: dict) -> str:
    return ".".join(str(part) for part in error["loc"]) or "<root>"


def load_operator_spec(path: str | Path) -> OperatorSpecFile:
    """Parse an operator spec file.

    Raises:
        ConfigError: With path:line:column for JSON syntax errors and the
            field path for schema violations
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read operator spec: {e.strerror}", location=str(path)) from e
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(e.msg, location=f"{path}:{e.lineno}:{e.colno}") from e
    try:
        spec = OperatorSpecFile.model_validate(raw)
    except ValidationError as e:
        first = e.errors()[0]
        raise ConfigError(first["msg"], location=f"{path}: {_location(first)}") from e
    logger.debug("Loaded %d operators (d=%d) from %s", len(spec.operators), spec.dimension, path)
    return spec


def write_operator_spec(
    path: str | Path,
    operators: dict[str, Operator],
    targets: list[tuple[str, complex]] | None = None,
    pair: tuple[str, str] | None = None,
    description: str | None = None,
) -> OperatorSpecFile:
    """Write operators as a spec file that load_operator_spec reads back exactly."""
    dims = {op.dim for op in operators.values()}
    if len(dims) != 1:
        raise ValueError(f"operators disagree in dimension: {sorted(dims)}")
    spec = OperatorSpecFile(
        dimension=dims.pop(),
        operators={
            name: MatrixSpec(
                matrix=[[(float(z.real), float(z.imag)) for z in row] for row in op.entries],
                hermitian=op.hermitian,
            )
            for name, op in operators.items()
        },
        targets=[TargetSpec(operator=name, value=(complex(v).real, complex(v).imag)) for name, v in targets or []],
        pair=pair,
        description=description,
    )
    Path(path).write_text(spec.model_dump_json(indent=2, exclude_none=True) + "\n", encoding="utf-8")
    return spec
