import os

from pydantic import field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

_RREF_METHODS = ("auto", "GJ", "FF", "CD")
_LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


class Settings(BaseSettings):
    model_config = SettingsConfigDict(
        env_prefix="NCGEO_", env_file=".env", env_file_encoding="utf-8"
    )

    seed: int = 1729
    universal_max_degree: int = 3
    connes_degree_bound: int = 2
    property_samples: int = 100
    connection_samples: int = 50
    rref_method: str = "auto"

    log_level: str = "WARNING"
    report_timings: bool = False

    allow_n4: bool = False
    parallel_checks: bool = True

    @field_validator("rref_method")
    @classmethod
    def check_rref_method(cls, value: str) -> str:
        if value not in _RREF_METHODS:
            raise ValueError(f"rref_method must be one of {', '.join(_RREF_METHODS)}")
        return value

    @field_validator("log_level")
    @classmethod
    def normalize_log_level(cls, value: str) -> str:
        level = value.strip().upper()
        if level not in _LOG_LEVELS:
            raise ValueError(f"unknown log level {value!r}")
        return level

    @model_validator(mode="before")
    @classmethod
    def force_debug_from_legacy_flag(cls, values):
        """NCGEO_DEBUG=1 forces DEBUG logging whatever NCGEO_LOG_LEVEL says."""
        if isinstance(values, dict) and os.getenv("NCGEO_DEBUG") == "1":
            values["log_level"] = "DEBUG"
        return values


settings = Settings()
