import pytest

from ncgeo.api.router import render_text, run_suite
from ncgeo.api.schemas import CheckStatus, SuiteName, SuiteParams
from ncgeo.api.suites import ROUTERS
from ncgeo.config import settings


@pytest.fixture(autouse=True)
def fast(monkeypatch):
    monkeypatch.setattr(settings, "property_samples", 5)
    monkeypatch.setattr(settings, "connection_samples", 3)


@pytest.mark.parametrize("suite", [name for name in SuiteName if name is not SuiteName.ALL])
async def test_suite_passes_with_defaults(suite):
    report = await run_suite(suite, SuiteParams(), ROUTERS)
    assert report.ok, render_text(report)
    assert len(report.checks) == len(ROUTERS[suite].checks)


async def test_all_passes_with_defaults():
    report = await run_suite(SuiteName.ALL, SuiteParams(), ROUTERS)
    assert report.ok, render_text(report)
    assert report.exit_code == 0
    assert len(report.checks) == sum(len(router.checks) for router in ROUTERS.values())


@pytest.mark.parametrize("n", [2, 3])
async def test_matrix_geometry_is_stable_under_parallel_checks(monkeypatch, n):
    monkeypatch.setattr(settings, "parallel_checks", True)
    first = await run_suite(SuiteName.MATRIX_GEOMETRY, SuiteParams(n=n), ROUTERS)
    second = await run_suite(SuiteName.MATRIX_GEOMETRY, SuiteParams(n=n), ROUTERS)
    assert all(c.status is CheckStatus.PASS for c in first.checks), render_text(first)
    assert first.model_dump_json() == second.model_dump_json()
    monkeypatch.setattr(settings, "parallel_checks", False)
    sequential = await run_suite(SuiteName.MATRIX_GEOMETRY, SuiteParams(n=n), ROUTERS)
    assert sequential.model_dump_json() == first.model_dump_json()


@pytest.mark.parametrize(
    "params",
    [
        {"algebra": "functions:3"},
        {"algebra": "trunc-poly:3"},
        {"algebra": "matrix:2"},
    ],
)
async def test_algebra_suite_on_selected_algebras(params):
    report = await run_suite(SuiteName.ALGEBRA, SuiteParams(**params), ROUTERS)
    assert report.ok, render_text(report)


async def test_jets_suite_reports_differentials_of_truncated_polynomials():
    report = await run_suite(SuiteName.JETS, SuiteParams(algebra="trunc-poly:3"), ROUTERS)
    assert report.ok, render_text(report)
