import os
from functools import lru_cache
from typing import Any, Literal

from pydantic import ValidationError, model_validator
from pydantic_settings import BaseSettings

from weakjoint.errors import ConfigError


class Settings(BaseSettings):
    # Linear algebra
    hermitian_tol: float = 1e-12  # relative to max|A|
    unitary_tol: float = 1e-10

    # Weak values and assignments
    overlap_floor: float = 1e-10
    pinv_cutoff: float = 1e-10
    assignment_residual_tol: float = 1e-8
    rank_ratio_tol: float = 1e-8
    trace_tol: float = 1e-8

    # No-go analysis
    spectral_tol: float = 1e-8  # relative to the spectral norm of B_theta
    cluster_tol: float = 1e-8
    independence_tol: float = 1e-8
    n_theta: int = 181

    # Continuum kernel
    root_imag_tol: float = 1e-9
    root_continuity_bound: float = 1.0
    quadrature_epsilon: float = 1e-3

    # Instruments
    amplitude_floor: float = 0.1
    pointer_points: int = 64
    pointer_clearance: float = 8.0  # half-width of the pointer q-window in units of the widest Δq
    four_axis_pointer_points: int = 16
    kraus_method: Literal["spectral", "split"] = "spectral"
    split_steps: int = 1

    # Runs
    threads: int | None = None
    output_dir: str = "runs"
    log_level: str = "INFO"

    model_config = {
        "env_prefix": "WEAKJOINT_",
        "env_file": ".env",
        "env_file_encoding": "utf-8",
        "env_ignore_empty": True,
        "extra": "ignore",
    }

    @model_validator(mode="after")
    def resolve_threads(self) -> "Settings":
        """Fill in the worker count when neither flag nor environment set one.

        Empty variables are ignored and zero or negative counts are treated as
        unset, so a blank WEAKJOINT_THREADS in a .env file means no override.
        """
        if self.threads is None or self.threads <= 0:
            self.threads = os.cpu_count() or 1
        self.log_level = self.log_level.upper()
        return self


@lru_cache
def get_settings() -> Settings:
    return Settings()


def apply_overrides(overrides: dict[str, Any]) -> Settings:
    """Validate `overrides` as Settings fields and apply them to the cached settings."""
    settings = get_settings()
    unknown = sorted(set(overrides) - set(Settings.model_fields))
    if unknown:
        raise ConfigError(f"unknown setting(s): {', '.join(unknown)}", location="--set")
    try:
        merged = Settings.model_validate({**settings.model_dump(), **overrides})
    except ValidationError as e:
        first = e.errors()[0]
        raise ConfigError(first["msg"], location=".".join(str(p) for p in first["loc"])) from e
    for key in overrides:
        setattr(settings, key, getattr(merged, key))
    return settings
