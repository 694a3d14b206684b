from pathlib import Path
from typing import Any

from pydantic import BaseModel, Field, field_validator, model_validator

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")


class RunConfig(BaseModel):
    """Options shared by every subcommand."""

    command: str
    out: Path | None = None
    threads: int | None = Field(None, ge=1)
    log_level: str | None = None
    overrides: dict[str, Any] = {}

    model_config = {"extra": "ignore"}

    @field_validator("log_level")
    @classmethod
    def known_level(cls, v):
        if v is not None and v.upper() not in LOG_LEVELS:
            raise ValueError(f"log level must be one of {', '.join(LOG_LEVELS)}")
        return v

    def echo(self) -> dict[str, Any]:
        """Config as recorded in the report; run-environment fields are left out so reports stay comparable."""
        return self.model_dump(mode="json", exclude={"out", "threads", "log_level"})


def _positive(values: tuple[float, ...], name: str) -> tuple[float, ...]:
    if any(v <= 0 for v in values):
        raise ValueError(f"{name} must all be positive")
    return values


class EPRRunConfig(RunConfig):
    """Grid, instrument and selection-label options of the EPR experiments."""

    d: int = Field(64, ge=8)
    length: float = Field(20.0, gt=0)
    n: int = Field(17, ge=8)
    q_max: float = Field(0.5, gt=0)
    spreads: tuple[float, float] = (1.0, 1.0)
    x_minus: float = 0.0
    p_plus: float = 0.0
    x_plus: float = 0.0
    p_minus: float = 0.0
    envelope: float | None = Field(None, gt=0)

    @field_validator("spreads")
    @classmethod
    def spreads_positive(cls, v):
        return _positive(v, "spreads")

    @model_validator(mode="after")
    def envelope_fits(self) -> "EPRRunConfig":
        if self.envelope is not None and self.envelope > self.length / 6:
            raise ValueError(f"envelope {self.envelope} exceeds L/6 = {self.length / 6:.4g}")
        return self


class InferXPConfig(EPRRunConfig):
    sizes: tuple[int, ...] = (32, 64, 128)
    naive: bool = True

    @field_validator("sizes")
    @classmethod
    def sizes_large_enough(cls, v):
        if any(size < 8 for size in v):
            raise ValueError("convergence grid sizes must be at least 8")
        return v


class InferXP4Config(EPRRunConfig):
    d: int = Field(32, ge=4)
    length: float = Field(12.0, gt=0)
    n: int = Field(9, ge=8)
    spreads: tuple[float, float, float, float] = (2.0, 2.0, 2.0, 2.0)
    sweep: tuple[float, ...] = (2.0, 3.0)

    @field_validator("sweep")
    @classmethod
    def sweep_positive(cls, v):
        return _positive(v, "sweep spreads")


class NogoConfig(RunConfig):
    spec: Path
    alpha: tuple[float, float]
    n_theta: int | None = Field(None, ge=3)


class ApproxConfig(RunConfig):
    spin: float = Field(0.5, gt=0)
    alpha: tuple[float, float] = (0.3, 0.2)
    directions: int = Field(4, ge=1)
    q_min: float = Field(1e-3, gt=0)
    q_max: float = Field(1e-1, gt=0)
    q_points: int = Field(9, ge=2)

    @field_validator("spin")
    @classmethod
    def half_integer(cls, v):
        if abs(2 * v - round(2 * v)) > 1e-12:
            raise ValueError("spin must be a positive half-integer")
        return v

    @model_validator(mode="after")
    def q_range_ordered(self) -> "ApproxConfig":
        if self.q_min >= self.q_max:
            raise ValueError("q_min must be below q_max")
        return self


class AssignConfig(RunConfig):
    spec: Path


class WeylConfig(RunConfig):
    d: int = Field(3, ge=3)
    zeta_i: tuple[int, int] = (1, 0)
    eta_f: tuple[int, int] = (0, 0)
    spec: Path | None = None
    operator: str | None = None

    @field_validator("d")
    @classmethod
    def odd(cls, v):
        if v % 2 == 0:
            raise ValueError("the discrete Weyl basis needs odd d")
        return v


class KernelConfig(RunConfig):
    coefficients: tuple[float, ...] = (0.0, 0.0, 0.0, 1.0)
    kappa: float = 0.0
    phi: float = 2.0
    zeta1_min: float = -5.0
    zeta1_max: float = 5.0
    zeta1_step: float = Field(0.1, gt=0)
    zeta2_max: float = Field(2.0, gt=0)
    t_samples: tuple[tuple[float, float], ...] = ((0.5, 0.5),)

    @field_validator("coefficients")
    @classmethod
    def leading_nonzero(cls, v):
        if not v or v[-1] == 0:
            raise ValueError("the leading coefficient of f must be nonzero")
        return v

    @model_validator(mode="after")
    def range_ordered(self) -> "KernelConfig":
        if self.zeta1_min >= self.zeta1_max:
            raise ValueError("zeta1_min must be below zeta1_max")
        return self


class SelftestConfig(RunConfig):
    pass
