import json

import pytest

from ncgeo.api.router import run_suite
from ncgeo.config import settings
from ncgeo.main import EXIT_USAGE, main


@pytest.fixture(autouse=True)
def fast(monkeypatch):
    monkeypatch.setattr(settings, "property_samples", 5)
    monkeypatch.setattr(settings, "connection_samples", 3)


def test_list(capsys):
    assert main(["list"]) == 0
    out = capsys.readouterr().out
    assert "connes:" in out
    assert "    --m:" in out


def test_invalid_parameter_is_a_usage_error(capsys):
    assert main(["matrix-geometry", "--n", "1"]) == EXIT_USAGE
    err = capsys.readouterr().err
    assert "ncgeo: error:" in err
    assert "usage:" in err


def test_fixture_error_is_a_usage_error(capsys):
    assert main(["connes", "--m", "0"]) == EXIT_USAGE
    assert "m = 0" in capsys.readouterr().err


def test_unknown_suite_exits_through_argparse():
    with pytest.raises(SystemExit) as info:
        main(["geometry"])
    assert info.value.code == 2


def test_json_report(capsys):
    assert main(["connes", "--seed", "11"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert set(report) == {"suite", "params", "convention_ledger", "checks", "timings"}
    assert report["suite"] == "connes"
    assert report["params"] == {"seed": 11}
    assert report["timings"] == {}
    assert all(check["status"] == "pass" for check in report["checks"])
    assert {"id", "paper_anchor", "status", "details", "witness"} <= set(report["checks"][0])


def test_default_seed_is_echoed(capsys):
    main(["connes"])
    report = json.loads(capsys.readouterr().out)
    assert report["params"]["seed"] == settings.seed


def test_text_report_with_timings(capsys):
    assert main(["matrix-geometry", "--n", "2", "--format", "text", "--timings"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("suite: matrix-geometry\n")
    assert "PASS torsion-free-solver" in out
    assert "  lambda: -1/2" in out
    assert "  time theta-frame:" in out
    assert settings.report_timings is False


def test_timings_flag_leaves_settings_alone(monkeypatch, capsys):
    seen = []

    async def recording_run_suite(suite, params, routers, *, timings=None):
        seen.append((timings, settings.report_timings))
        return await run_suite(suite, params, routers, timings=timings)

    monkeypatch.setattr("ncgeo.main.run_suite", recording_run_suite)
    assert main(["connes", "--timings"]) == 0
    assert seen == [(True, False)]
    assert json.loads(capsys.readouterr().out)["timings"]


def test_config_file_with_flag_override(tmp_path, capsys):
    config = tmp_path / "config.json"
    config.write_text(
        json.dumps({"suite": "algebra", "params": {"n": 3, "seed": 5}, "format": "json"})
    )
    assert main(["connes", "--config", str(config), "--seed", "9"]) == 0
    report = json.loads(capsys.readouterr().out)
    # the positional suite wins over the file
    assert report["suite"] == "connes"
    assert report["params"] == {"n": 3, "seed": 9}


@pytest.mark.parametrize("content", ["not json", "[1, 2]"])
def test_bad_config_file(tmp_path, capsys, content):
    config = tmp_path / "config.json"
    config.write_text(content)
    assert main(["connes", "--config", str(config)]) == EXIT_USAGE
    assert "ncgeo: error:" in capsys.readouterr().err


def test_missing_config_file(tmp_path, capsys):
    assert main(["connes", "--config", str(tmp_path / "absent.json")]) == EXIT_USAGE
    assert "cannot read config" in capsys.readouterr().err
