from __future__ import annotations

import asyncio
import logging
import random
import time
from collections.abc import Callable
from dataclasses import dataclass, field
from typing import Any

from ncgeo.api.schemas import CheckResult, CheckStatus, Report, SuiteName, SuiteParams
from ncgeo.config import settings
from ncgeo.services.ce_calculus import CONVENTIONS

logger = logging.getLogger(__name__)


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class Outcome:
    ok: bool
    details: str = ""
    witness: dict[str, Any] | None = None


@dataclass(frozen=True)
class CheckContext:
    check_id: str
    params: SuiteParams
    fixtures: dict[str, Any]

    @property
    def seed(self) -> int:
        return self.params.seed if self.params.seed is not None else settings.seed

    @property
    def rng(self) -> random.Random:
        return random.Random(f"{self.seed}:{self.check_id}")

    def __getitem__(self, name: str) -> Any:
        return self.fixtures[name]


CheckFn = Callable[[CheckContext], Outcome]


@dataclass(frozen=True)
class RegisteredCheck:
    id: str
    anchor: str
    fn: CheckFn


@dataclass
class SuiteRouter:
    """Registry of the checks of one suite, filled by decorators."""

    name: SuiteName
    sections: str
    parameters: dict[str, str] = field(default_factory=dict)
    ledger: dict[str, Any] = field(default_factory=dict)
    checks: dict[str, RegisteredCheck] = field(default_factory=dict)
    _setup: Callable[[SuiteParams], dict[str, Any]] | None = None

    def check(self, check_id: str, anchor: str = "plumbing") -> Callable[[CheckFn], CheckFn]:
        def decorator(fn: CheckFn) -> CheckFn:
            if check_id in self.checks:
                raise ValueError(f"check {check_id!r} registered twice in {self.name.value}")
            self.checks[check_id] = RegisteredCheck(check_id, anchor, fn)
            return fn

        return decorator

    def setup(self, fn: Callable[[SuiteParams], dict[str, Any]]):
        """Register the fixture builder; its errors are parameter errors."""
        self._setup = fn
        return fn

    def fixtures(self, params: SuiteParams) -> dict[str, Any]:
        if self._setup is None:
            return {}
        try:
            return self._setup(params)
        except UsageError:
            raise
        except Exception as exc:
            raise UsageError(f"{self.name.value}: {type(exc).__name__}: {exc}") from exc


def _run_check(check: RegisteredCheck, ctx: CheckContext) -> tuple[CheckResult, float]:
    start = time.perf_counter()
    try:
        outcome = check.fn(ctx)
    except Exception as exc:
        logger.exception("Check %s raised", ctx.check_id)
        outcome = Outcome(
            False,
            f"{type(exc).__name__}: {exc}",
            {"exception": type(exc).__name__, "message": str(exc)},
        )
    elapsed = time.perf_counter() - start
    if not outcome.ok:
        logger.warning("Check %s failed: %s", ctx.check_id, outcome.details)
    status = CheckStatus.PASS if outcome.ok else CheckStatus.FAIL
    result = CheckResult(
        id=ctx.check_id,
        paper_anchor=check.anchor,
        status=status,
        details=outcome.details,
        witness=outcome.witness,
    )
    return result, elapsed


async def _run_router(
    router: SuiteRouter, params: SuiteParams, prefix: str = ""
) -> list[tuple[CheckResult, float]]:
    fixtures = router.fixtures(params)
    contexts = [
        (check, CheckContext(f"{prefix}{check.id}", params, fixtures))
        for check in router.checks.values()
    ]
    if settings.parallel_checks:
        return list(
            await asyncio.gather(
                *(asyncio.to_thread(_run_check, check, ctx) for check, ctx in contexts)
            )
        )
    return [_run_check(check, ctx) for check, ctx in contexts]


def convention_ledger(routers: list[SuiteRouter]) -> dict[str, Any]:
    ledger: dict[str, Any] = dict(CONVENTIONS)
    for router in routers:
        ledger.update(router.ledger)
    return dict(sorted(ledger.items()))


async def run_suite(
    suite: SuiteName,
    params: SuiteParams,
    routers: dict[SuiteName, SuiteRouter],
    *,
    timings: bool | None = None,
) -> Report:
    """Run one suite, or every suite for ``all``; ``timings`` defaults to the settings."""
    if suite is SuiteName.ALL:
        selected = [routers[name] for name in SuiteName if name is not SuiteName.ALL]
        prefixed = True
    else:
        selected = [routers[suite]]
        prefixed = False

    results: list[tuple[CheckResult, float]] = []
    for router in selected:
        prefix = f"{router.name.value}." if prefixed else ""
        logger.info("Running suite %s", router.name.value)
        results.extend(await _run_router(router, params, prefix))

    results.sort(key=lambda item: item[0].id)
    with_timings = settings.report_timings if timings is None else timings
    elapsed_by_id = {}
    if with_timings:
        elapsed_by_id = {result.id: round(elapsed, 6) for result, elapsed in results}
    return Report(
        suite=suite,
        params=params.echo(),
        convention_ledger=convention_ledger(selected),
        checks=[result for result, _ in results],
        timings=elapsed_by_id,
    )


def render_text(report: Report) -> str:
    lines = [f"suite: {report.suite.value}"]
    if report.params:
        lines.append("params: " + ", ".join(f"{k}={v}" for k, v in report.params.items()))
    for check in report.checks:
        status = "PASS" if check.status is CheckStatus.PASS else "FAIL"
        line = f"{status} {check.id} [{check.paper_anchor}]"
        if check.details:
            line += f" {check.details}"
        lines.append(line)
        if check.witness and check.status is CheckStatus.FAIL:
            lines.append(f"    witness: {check.witness}")
    lines.append("conventions:")
    lines.extend(f"  {key}: {value}" for key, value in report.convention_ledger.items())
    for check_id, elapsed in report.timings.items():
        lines.append(f"  time {check_id}: {elapsed:.6f}s")
    return "\n".join(lines) + "\n"


def list_suites(routers: dict[SuiteName, SuiteRouter]) -> str:
    lines = []
    for name in SuiteName:
        if name is SuiteName.ALL:
            lines.append("all: every suite below, check ids prefixed with the suite name")
            continue
        router = routers[name]
        lines.append(f"{name.value}: {router.sections}")
        for param, doc in router.parameters.items():
            lines.append(f"    --{param.replace('_', '-')}: {doc}")
    return "\n".join(lines) + "\n"
