"""
CLI 파이프라인 테스트
synth → report 전체 실행, 재실행 시 바이트 동일 출력, 병렬도 무관성,
캐시 미스/입력 누락 종료 코드, 설정 파일 우선순위, 거부 목록/집계 캐시 재사용, 매니페스트 설정 기록
"""
import json
import tempfile
from pathlib import Path

from config import config
from main import build_parser, main, resolve_run_config, run
from models import RunConfig
from synthgen import dump_scenario, validate_scenario

SCENARIO = {
    "seed": 21,
    "years": (1880, 1965),
    "growth": {"alpha": 1.0, "scale": 2.0},
    "team_size": {"kind": "categorical", "sizes": [1, 2, 3, 4, 5], "weights": [0.2, 0.35, 0.25, 0.12, 0.08]},
    "career": {"weibull_k": 0.8, "weibull_lambda": 6.0},
    "entrant_share": 0.5,
    "shocks": [{"epoch": "WWI", "entry_multiplier": 0.55, "recovery_ramp_years": 3}],
}


def _inputs(tmp: Path):
    scenario = tmp / "scenario.ini"
    scenario.write_text(dump_scenario(validate_scenario(SCENARIO)), encoding="utf-8")
    population = tmp / "population.csv"
    population.write_text("year,population\n1900,1.6e9\n1950,2.5e9\n", encoding="utf-8")
    return scenario, population


def _snapshot(out: Path):
    return {p.name: p.read_bytes() for p in sorted(out.iterdir()) if p.is_file()}


def _report(tmp: Path, out: str, *extra: str) -> int:
    scenario, population = _inputs(tmp)
    return main(["report", "--scenario", str(scenario), "--population", str(population),
                 "--out", str(tmp / out), "--cache-dir", str(tmp / "cache"),
                 "--min-fit-samples", "20", *extra])


def test_report_end_to_end():
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        assert _report(tmp, "out") == 0
        out = tmp / "out"
        manifest = json.loads((out / "manifest.json").read_text(encoding="utf-8"))

        assert manifest["subcommand"] == "report"
        assert manifest["default_epochs_used"] is True
        assert set(manifest["steps"].values()) == {"ok"}
        assert set(manifest["steps"]) == {"synth", "ingest", "ingest_artifacts", "series", "timescales", "fit", "epochs"}
        assert set(manifest["inputs"]) == {"scenario", "events", "population"}
        assert len(manifest["cache_key"]) == 64
        for name in ("events.jsonl", "events.truth.json", "scenario.ini", "series.csv", "team_size_fractions.csv",
                     "series_per_capita.csv", "timescales.csv", "timescale_shocks.csv", "fits_power_law.csv",
                     "fits_weibull_pairs.csv", "fits_weibull_lifespans.csv", "growth.csv", "fit_skips.csv",
                     "epochs.csv", "contributors.csv", "ingest_rejects.csv", "yearly_aggregates.csv",
                     "ingest_summary.json", "manifest.json", "report.md"):
            assert name in manifest["outputs"], name
            assert (out / name).is_file(), name
        assert manifest["outputs"] == sorted(manifest["outputs"])

        report = (out / "report.md").read_text(encoding="utf-8")
        assert manifest["cache_key"] in report
        assert "WWI" in report

        summary = json.loads((out / "ingest_summary.json").read_text(encoding="utf-8"))
        assert summary["dataset_end"] == 1965
        assert "rejects" not in summary and "cache" not in summary

        header = (out / "series_per_capita.csv").read_text(encoding="utf-8").splitlines()[0]
        assert header == "year,nodes_cumulative_per_capita,nodes_active_new_edges_per_capita,nodes_new_per_capita"


def test_rerun_is_byte_identical():
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        assert _report(tmp, "out") == 0
        first = _snapshot(tmp / "out")
        assert _report(tmp, "out") == 0
        assert _snapshot(tmp / "out") == first


def test_worker_count_does_not_change_results():
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        assert _report(tmp, "serial", "--workers", "1") == 0
        assert _report(tmp, "parallel", "--workers", "3") == 0
        serial, parallel = _snapshot(tmp / "serial"), _snapshot(tmp / "parallel")
        assert set(serial) == set(parallel)
        for name in serial:
            if name.endswith(".csv") or name.endswith(".jsonl"):
                assert serial[name] == parallel[name], name


def test_synth_then_cached_analysis():
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        scenario, _ = _inputs(tmp)
        common = ["--out", str(tmp / "out"), "--cache-dir", str(tmp / "cache")]
        assert main(["synth", "--scenario", str(scenario), *common]) == 0
        events = tmp / "out" / "events.jsonl"
        assert events.is_file() and (tmp / "out" / "events.truth.json").is_file()

        assert main(["series", "--events", str(events), *common]) == 1
        assert main(["ingest", "--events", str(events), *common]) == 0
        assert (tmp / "out" / "contributors.csv").is_file()
        assert main(["series", "--events", str(events), *common]) == 0
        assert (tmp / "out" / "series.csv").is_file()

        manifest = json.loads((tmp / "out" / "manifest.json").read_text(encoding="utf-8"))
        assert manifest["subcommand"] == "series"
        assert manifest["steps"] == {"ingest": "ok", "series": "ok"}


def _synth_events(tmp: Path) -> Path:
    scenario, _ = _inputs(tmp)
    assert main(["synth", "--scenario", str(scenario), "--out", str(tmp / "synth"),
                 "--cache-dir", str(tmp / "cache")]) == 0
    return tmp / "synth" / "events.jsonl"


def _with_bad_line(tmp: Path, keep=None) -> Path:
    """다섯째 줄에 잘못된 UTF-8 레코드를 끼운 이벤트 파일"""
    lines = _synth_events(tmp).read_bytes().splitlines()[:keep]
    lines.insert(4, b'{"project_id": "bad", "year": 1900, "members": ["\xff"]}')
    events = tmp / "events.jsonl"
    events.write_bytes(b"\n".join(lines) + b"\n")
    return events


def test_invalid_utf8_line_is_rejected_not_fatal():
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        events = _with_bad_line(tmp, keep=300)
        assert main(["ingest", "--events", str(events), "--out", str(tmp / "out"),
                     "--cache-dir", str(tmp / "cache")]) == 0
        rows = (tmp / "out" / "ingest_rejects.csv").read_text(encoding="utf-8").splitlines()
        assert rows == ["line,reason", "5,UTF-8 디코딩 실패"]
        summary = json.loads((tmp / "out" / "ingest_summary.json").read_text(encoding="utf-8"))
        assert summary["lines"] == 301 and summary["rejected"] == 1


def test_cache_hit_reuses_aggregates_and_rejects():
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        events = _with_bad_line(tmp)
        _, population = _inputs(tmp)
        assert main(["ingest", "--events", str(events), "--out", str(tmp / "built"),
                     "--cache-dir", str(tmp / "cache")]) == 0
        assert main(["report", "--events", str(events), "--population", str(population),
                     "--out", str(tmp / "hit"), "--cache-dir", str(tmp / "cache"),
                     "--min-fit-samples", "20"]) == 0

        built, hit = _snapshot(tmp / "built"), _snapshot(tmp / "hit")
        assert built["yearly_aggregates.csv"].splitlines()[0] == (
            b"year,new_nodes,active_nodes,removed_nodes,new_timelines,ended_timelines,event_count,mean_team_size")
        for name in ("yearly_aggregates.csv", "ingest_rejects.csv", "ingest_summary.json", "contributors.csv"):
            assert hit[name] == built[name], name
        assert b"5,UTF-8" in hit["ingest_rejects.csv"]


def test_manifest_records_effective_settings():
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        events = _synth_events(tmp)
        common = ["--events", str(events), "--out", str(tmp / "out"), "--cache-dir", str(tmp / "cache")]

        def settings():
            assert main(["ingest", *common]) == 0
            return json.loads((tmp / "out" / "manifest.json").read_text(encoding="utf-8"))["settings"]

        before = settings()
        assert before["recovery_tolerance"] == config.RECOVERY_TOLERANCE
        assert set(before) == {name.lower() for name in config.OUTPUT_SETTINGS}

        original = config.RECOVERY_TOLERANCE
        try:
            config.RECOVERY_TOLERANCE = original + 0.05
            after = settings()
        finally:
            config.RECOVERY_TOLERANCE = original
        assert after["recovery_tolerance"] == original + 0.05
        assert {k: v for k, v in after.items() if k != "recovery_tolerance"} == \
            {k: v for k, v in before.items() if k != "recovery_tolerance"}


def test_seed_override_changes_events():
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        scenario, _ = _inputs(tmp)
        for out, seed in (("a", "1"), ("b", "2")):
            assert main(["synth", "--scenario", str(scenario), "--seed", seed,
                         "--out", str(tmp / out), "--cache-dir", str(tmp / "cache")]) == 0
        a = (tmp / "a" / "events.jsonl").read_bytes()
        b = (tmp / "b" / "events.jsonl").read_bytes()
        assert a != b
        assert "seed = 2" in (tmp / "b" / "scenario.ini").read_text(encoding="utf-8")


def test_fatal_input_exit_codes():
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        common = ["--out", str(tmp / "out"), "--cache-dir", str(tmp / "cache")]
        assert main(["series", *common]) == 1
        assert main(["ingest", "--events", str(tmp / "missing.jsonl"), *common]) == 1
        assert main(["synth", *common]) == 1
        assert main(["series", "--tau-project", "-1", *common]) == 1
        assert main(["series", "--config", str(tmp / "missing.ini"), *common]) == 1

        cfg = RunConfig(tau_project=2, out=str(tmp / "out"), censor_window=5, min_fit_samples=50,
                        cache_dir=str(tmp / "cache"))
        assert run("plot", cfg) == 1


def test_config_file_precedence():
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        path = tmp / "run.ini"
        path.write_text("[run]\ntau-project = 3\nout = from_file\ncensoring = on\n", encoding="utf-8")
        args = build_parser().parse_args(["fit", "--config", str(path), "--out", "from_flag"])
        cfg = resolve_run_config(args)
        assert cfg.tau_project == 3
        assert cfg.out == "from_flag"
        assert cfg.censoring == "on"

        defaults = resolve_run_config(build_parser().parse_args(["fit"]))
        assert defaults.out == "out" and defaults.censoring == "auto"


if __name__ == "__main__":
    print("파이프라인 테스트 시작\n")
    for name, func in list(globals().items()):
        if name.startswith("test_") and callable(func):
            func()
            print(f"✓ {name}")
    print("\n모든 테스트 완료!")
