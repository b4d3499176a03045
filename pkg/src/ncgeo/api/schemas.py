from __future__ import annotations

from enum import Enum
from typing import Any, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator


class SuiteName(str, Enum):
    ALGEBRA = "algebra"
    UNIVERSAL = "universal"
    JETS = "jets"
    CE = "ce"
    CONNECTIONS = "connections"
    MATRIX_GEOMETRY = "matrix-geometry"
    CONNES = "connes"
    ALL = "all"


class OutputFormat(str, Enum):
    JSON = "json"
    TEXT = "text"


class CheckStatus(str, Enum):
    PASS = "pass"
    FAIL = "fail"


class SuiteParams(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    n: Optional[int] = Field(None, ge=2, description="Matrix size for M_n")
    N: Optional[int] = Field(None, ge=1, description="Number of points / truncation order")
    k_max: Optional[int] = Field(None, ge=0, description="Top degree for graded checks")
    m: Optional[str] = Field(None, description="Dirac entry of the two-point triple, a/b+c/di")
    seed: Optional[int] = None
    algebra: Optional[str] = Field(None, description="matrix:n, functions:N or trunc-poly:N")

    @field_validator("algebra")
    @classmethod
    def check_algebra(cls, value: Optional[str]) -> Optional[str]:
        if value is None:
            return value
        kind, _, size = value.partition(":")
        if kind not in ("matrix", "functions", "trunc-poly") or not size.isdigit():
            raise ValueError(f"unknown algebra {value!r}")
        return value

    def echo(self) -> dict[str, Any]:
        return self.model_dump(exclude_none=True)


class SuiteConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    suite: SuiteName
    params: SuiteParams = Field(default_factory=SuiteParams)
    format: OutputFormat = OutputFormat.JSON
    verbosity: str = "WARNING"


class CheckResult(BaseModel):
    id: str
    paper_anchor: str
    status: CheckStatus
    details: str = ""
    witness: Optional[dict[str, Any]] = None


class Report(BaseModel):
    suite: SuiteName
    params: dict[str, Any]
    convention_ledger: dict[str, Any]
    checks: list[CheckResult]
    timings: dict[str, float] = Field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(check.status is CheckStatus.PASS for check in self.checks)

    @property
    def exit_code(self) -> int:
        return 0 if self.ok else 1
