import pytest
from pydantic import ValidationError

from ncgeo.api.router import (
    CheckContext,
    Outcome,
    SuiteRouter,
    UsageError,
    list_suites,
    render_text,
    run_suite,
)
from ncgeo.api.schemas import CheckStatus, SuiteConfig, SuiteName, SuiteParams
from ncgeo.api.suites import ROUTERS
from ncgeo.config import settings


@pytest.fixture
def fast(monkeypatch):
    monkeypatch.setattr(settings, "property_samples", 5)
    monkeypatch.setattr(settings, "connection_samples", 3)


def stub_routers() -> dict[SuiteName, SuiteRouter]:
    routers = {}
    for name in SuiteName:
        if name is SuiteName.ALL:
            continue
        router = SuiteRouter(name, sections=f"stub {name.value}", ledger={name.value: "x"})

        @router.check("b-draws")
        def draws(ctx: CheckContext) -> Outcome:
            return Outcome(True, str(ctx.rng.randint(0, 10**9)))

        @router.check("a-passes", anchor="§0")
        def passes(ctx: CheckContext) -> Outcome:
            return Outcome(True)

        routers[name] = router
    return routers


def test_duplicate_check_ids_are_rejected():
    router = SuiteRouter(SuiteName.ALGEBRA, sections="")
    router.check("same")(lambda ctx: Outcome(True))
    with pytest.raises(ValueError):
        router.check("same")(lambda ctx: Outcome(True))


def test_every_suite_is_registered():
    assert set(ROUTERS) == {name for name in SuiteName if name is not SuiteName.ALL}
    for name, router in ROUTERS.items():
        assert router.name is name
        assert router.checks


async def test_results_are_sorted_and_seeded():
    routers = stub_routers()
    report = await run_suite(SuiteName.CE, SuiteParams(seed=7), routers)
    assert [c.id for c in report.checks] == ["a-passes", "b-draws"]
    again = await run_suite(SuiteName.CE, SuiteParams(seed=7), routers)
    other = await run_suite(SuiteName.CE, SuiteParams(seed=8), routers)
    assert report.checks[1].details == again.checks[1].details
    assert report.checks[1].details != other.checks[1].details
    assert report.params == {"seed": 7}
    assert report.ok
    assert report.exit_code == 0


async def test_all_prefixes_check_ids():
    report = await run_suite(SuiteName.ALL, SuiteParams(), stub_routers())
    assert len(report.checks) == 14
    assert report.checks[0].id == "algebra.a-passes"
    assert "connes" in report.convention_ledger
    assert "matrix-geometry" in report.convention_ledger


async def test_failures_and_exceptions_become_fail_results():
    router = SuiteRouter(SuiteName.JETS, sections="")

    @router.check("fails")
    def fails(ctx: CheckContext) -> Outcome:
        return Outcome(False, "nope", {"at": 1})

    @router.check("raises")
    def raises(ctx: CheckContext) -> Outcome:
        raise ArithmeticError("singular")

    report = await run_suite(SuiteName.JETS, SuiteParams(), {SuiteName.JETS: router})
    assert [c.status for c in report.checks] == [CheckStatus.FAIL, CheckStatus.FAIL]
    assert report.checks[1].witness == {"exception": "ArithmeticError", "message": "singular"}
    assert report.exit_code == 1
    text = render_text(report)
    assert "FAIL fails [plumbing] nope" in text
    assert "witness: {'at': 1}" in text


async def test_setup_errors_are_usage_errors():
    router = SuiteRouter(SuiteName.CONNES, sections="")

    @router.setup
    def broken(params: SuiteParams) -> dict:
        raise KeyError("missing")

    with pytest.raises(UsageError):
        await run_suite(SuiteName.CONNES, SuiteParams(), {SuiteName.CONNES: router})


async def test_timings_only_when_asked(monkeypatch):
    routers = stub_routers()
    report = await run_suite(SuiteName.CE, SuiteParams(), routers)
    assert report.timings == {}
    monkeypatch.setattr(settings, "report_timings", True)
    report = await run_suite(SuiteName.CE, SuiteParams(), routers)
    assert set(report.timings) == {"a-passes", "b-draws"}


async def test_timings_argument_overrides_settings(monkeypatch):
    routers = stub_routers()
    report = await run_suite(SuiteName.CE, SuiteParams(), routers, timings=True)
    assert set(report.timings) == {"a-passes", "b-draws"}
    assert settings.report_timings is False
    monkeypatch.setattr(settings, "report_timings", True)
    report = await run_suite(SuiteName.CE, SuiteParams(), routers, timings=False)
    assert report.timings == {}


async def test_sequential_and_parallel_runs_agree(monkeypatch):
    routers = stub_routers()
    parallel = await run_suite(SuiteName.UNIVERSAL, SuiteParams(), routers)
    monkeypatch.setattr(settings, "parallel_checks", False)
    sequential = await run_suite(SuiteName.UNIVERSAL, SuiteParams(), routers)
    assert parallel.model_dump_json() == sequential.model_dump_json()


def test_list_suites_describes_parameters():
    listing = list_suites(ROUTERS)
    assert listing.endswith("\n")
    assert "matrix-geometry:" in listing
    assert "    --n:" in listing
    assert "    --k-max:" in listing
    assert listing.startswith("algebra:")


@pytest.mark.parametrize(
    "params",
    [{"n": 1}, {"N": 0}, {"k_max": -1}, {"algebra": "poly:3"}, {"colour": "red"}],
)
def test_invalid_params_are_rejected(params):
    with pytest.raises(ValidationError):
        SuiteConfig(suite=SuiteName.ALGEBRA, params=params)


def test_params_echo_skips_unset():
    assert SuiteParams(n=3).echo() == {"n": 3}


async def test_connes_suite_is_deterministic(fast):
    first = await run_suite(SuiteName.CONNES, SuiteParams(seed=3), ROUTERS)
    second = await run_suite(SuiteName.CONNES, SuiteParams(seed=3), ROUTERS)
    assert first.ok, render_text(first)
    assert first.model_dump_json() == second.model_dump_json()
    assert first.convention_ledger["compact_resolvent"].startswith("vacuous")


async def test_matrix_geometry_suite_reports_conventions(fast):
    report = await run_suite(SuiteName.MATRIX_GEOMETRY, SuiteParams(n=2), ROUTERS)
    assert report.ok, render_text(report)
    assert report.convention_ledger["lambda"] == "-1/2"
    assert report.convention_ledger["s"] == -1


@pytest.mark.parametrize(
    ("suite", "params"),
    [
        (SuiteName.CONNES, {"m": "0"}),
        (SuiteName.CONNES, {"k_max": 3}),
        (SuiteName.JETS, {"algebra": "matrix:2"}),
        (SuiteName.CE, {"k_max": 4}),
    ],
)
async def test_suite_parameter_errors(suite, params):
    with pytest.raises(UsageError):
        await run_suite(suite, SuiteParams(**params), ROUTERS)
