"""Runtime settings read from the environment.

The solver backend and its tolerances are process-wide choices, so they live
here instead of being threaded through every call. Explicit arguments always
win over these defaults.
"""

from __future__ import annotations

import logging
import os
from functools import lru_cache

from pydantic import BaseModel, Field, ValidationError, field_validator

from incompat.errors import ConfigurationError

MIN_TOL = 1e-10
MAX_TOL = 1e-2


class Settings(BaseModel):
    backend: str = "cvxpy"
    solver: str = "CLARABEL"
    tol: float = Field(default=1e-8, ge=MIN_TOL, le=MAX_TOL)
    max_iters: int = Field(default=500, gt=0)
    workers: int = Field(default=1, gt=0)
    log_level: str = "INFO"

    @field_validator("solver", "log_level")
    @classmethod
    def _upper(cls, value: str) -> str:
        return value.strip().upper()

    @classmethod
    def from_env(cls) -> "Settings":
        raw = {
            "backend": os.getenv("INCOMPAT_BACKEND"),
            "solver": os.getenv("INCOMPAT_SOLVER"),
            "tol": os.getenv("INCOMPAT_TOL"),
            "max_iters": os.getenv("INCOMPAT_MAX_ITERS"),
            "workers": os.getenv("INCOMPAT_WORKERS"),
            "log_level": os.getenv("LOG_LEVEL"),
        }
        try:
            settings = cls(**{k: v for k, v in raw.items() if v not in (None, "")})
        except ValidationError as exc:
            first = exc.errors()[0]
            raise ConfigurationError(f"invalid setting {first['loc'][0]}: {first['msg']}") from exc
        logging.getLogger(__name__).debug("Loaded settings %s", settings.model_dump())
        return settings


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    return Settings.from_env()
