"""
collabnet CLI
시간 협업 네트워크 측정 파이프라인: ingest → series / timescales / fit → epochs → report

    python main.py synth  --scenario scenario.ini --out run/
    python main.py report --events run/events.jsonl --out run/
"""
import argparse
import configparser
import platform
import shutil
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import jinja2
import numpy as np
import pandas as pd
import pydantic
import scipy
import sqlalchemy
from pydantic import ValidationError

from config import config
from core_graph import TemporalGraph, build_graph
from database import AggregateCacheManager, compute_cache_key
from epoch_analysis import DEFAULT_EPOCHS, EpochDefinition, EpochReport, epoch_report_frame, epoch_report_matrix
from exception_handlers import handle_cli_exception
from exceptions import (
    EXIT_FATAL_INPUT, EXIT_PARTIAL_FAILURE, EXIT_SUCCESS,
    CacheMissError, CollabNetBaseException, ConvergenceError, InsufficientDataError, IngestError, PipelineStepError,
)
from fitdist import FitSkip, GrowthFit, ParameterEvolution, fit_growth, parameter_evolution
from ingest import (
    ContributorRegistry, parse_epochs, parse_events, parse_population, reject_writer, sha256_file,
    truth_sidecar_path, write_csv, write_json, write_series_csv,
)
from logging_config import get_logger, log_execution_time, setup_logging
from models import RunConfig, RunManifest
from report_renderer import write_report
from series import (
    YearlySeries, active_count_series, event_series, new_fraction_series, node_series,
    per_capita, single_year_series,
)
from synthgen import dump_scenario, generate, load_scenario, write_synthetic
from timescale import TimescaleSeries, process_timescales, shock_response, timescale_ratio_baseline_return

logger = get_logger("main")

SUBCOMMANDS = ("ingest", "series", "timescales", "fit", "epochs", "synth", "report")

# 에포크 행렬 기본 시계열 집합
EPOCH_SERIES = (
    "nodes_new", "event_count", "team_size_mean", "single_year_fraction",
    "new_fraction", "tau_node_add", "tau_edge_add", "tau_ratio",
)

STATUS_OK = "ok"


# =============================================================================
# 설정 해석 (플래그 > 설정 파일 > 환경 변수 기본값)
# =============================================================================

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value 형식의 실행 설정 파일 ([run] 섹션)")
    common.add_argument("--events", help="이벤트 파일 (JSONL 또는 CSV)")
    common.add_argument("--population", help="year,population CSV")
    common.add_argument("--epochs", help="name,start,end CSV (없으면 기본 다섯 구간)")
    common.add_argument("--scenario", help="합성 시나리오 파일")
    common.add_argument("--format", choices=("jsonl", "csv"), help="이벤트 형식 (기본: 확장자로 추론)")
    common.add_argument("--tau-project", type=int, dest="tau_project")
    common.add_argument("--out", help="출력 디렉터리")
    common.add_argument("--seed", type=int, help="시나리오 시드 덮어쓰기")
    common.add_argument("--censor-window", type=int, dest="censor_window")
    common.add_argument("--min-fit-samples", type=int, dest="min_fit_samples")
    common.add_argument("--censoring", choices=("auto", "on", "off"))
    common.add_argument("--workers", type=int)
    common.add_argument("--cache-dir", dest="cache_dir")
    common.add_argument("--log-level", dest="log_level", default=None)

    parser = argparse.ArgumentParser(prog="collabnet", description="시간 협업 네트워크 측정 파이프라인")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def load_config_file(path: str) -> Dict[str, str]:
    """[run] 섹션의 key = value 항목 (키의 '-'는 '_'로)"""
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path, "r", encoding="utf-8") as f:
            parser.read_file(f)
    except (OSError, configparser.Error) as e:
        raise IngestError(f"실행 설정 파일을 읽을 수 없음: {path}", {"error": str(e)})
    if not parser.has_section("run"):
        raise IngestError(f"실행 설정 파일에 [run] 섹션이 없음: {path}")
    return {key.replace("-", "_"): value for key, value in parser.items("run")}


def resolve_run_config(args: argparse.Namespace) -> RunConfig:
    values: Dict[str, Any] = {
        "tau_project": config.TAU_PROJECT,
        "censor_window": config.CENSOR_WINDOW,
        "min_fit_samples": config.MIN_FIT_SAMPLES,
        "workers": config.WORKERS,
        "cache_dir": config.CACHE_DIR,
        "out": "out",
    }
    if args.config:
        values.update(load_config_file(args.config))
    for name in RunConfig.model_fields:
        flag = getattr(args, name, None)
        if flag is not None:
            values[name] = flag
    return RunConfig.model_validate(values)


def _versions() -> Dict[str, str]:
    return {
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "pandas": pd.__version__,
        "pydantic": pydantic.VERSION,
        "sqlalchemy": sqlalchemy.__version__,
        "jinja2": jinja2.__version__,
    }


# =============================================================================
# 캐시 집계
# =============================================================================

def yearly_aggregates(graph: TemporalGraph) -> List[Dict[str, object]]:
    """캐시에 저장하는 연도별 노드/엣지/이벤트 집계"""
    nodes = node_series(graph)
    domain = nodes.new.years
    if domain.size == 0:
        return []

    def count(years: np.ndarray) -> np.ndarray:
        return np.bincount(np.asarray(years, dtype=np.int64) - domain[0], minlength=domain.size)[:domain.size]

    removed = count(graph.node_last[graph.has_edges])
    started = count(graph.timeline_start_years())
    ended = count(graph.timeline_end_years())
    events = event_series(graph)
    mean_size = events.stats_series()["team_size_mean"]

    rows = []
    for i, year in enumerate(domain):
        year = int(year)
        rows.append({
            "year": year,
            "new_nodes": int(nodes.new.values[i]),
            "active_nodes": int(nodes.active.values[i]),
            "removed_nodes": int(removed[i]),
            "new_timelines": int(started[i]),
            "ended_timelines": int(ended[i]),
            "event_count": int(events.event_count.get(year) or 0),
            "mean_team_size": mean_size.get(year),
        })
    return rows


# =============================================================================
# 실행
# =============================================================================

class PipelineRun:
    """한 번의 서브커맨드 실행 상태 (단계 상태, 산출물, 입력 해시)"""

    def __init__(self, subcommand: str, cfg: RunConfig):
        self.subcommand = subcommand
        self.cfg = cfg
        self.out = Path(cfg.out)
        self.log = logger.with_context(subcommand=subcommand)

        self.steps: Dict[str, str] = {}
        self.outputs: List[str] = []
        self.inputs: Dict[str, str] = {}
        self.notes: List[str] = []
        self.cache_key: Optional[str] = None
        self.default_epochs_used = False

        self.events_path: Optional[Path] = Path(cfg.events) if cfg.events else None
        self.graph: Optional[TemporalGraph] = None
        self.registry: Optional[ContributorRegistry] = None
        self.ingest_summary: Dict[str, Any] = {}
        self.aggregates: List[Dict[str, object]] = []
        self.rejects_path: Optional[Path] = None
        self._series: Optional[Dict[str, YearlySeries]] = None
        self._timescales: Optional[TimescaleSeries] = None
        self._epochs: Optional[List[EpochDefinition]] = None
        self.evolutions: List[ParameterEvolution] = []
        self.growth: Optional[GrowthFit] = None
        self.epoch_reports: List[EpochReport] = []

    # -------------------------------------------------------------------------
    # 공통
    # -------------------------------------------------------------------------

    def _emit(self, name: str, frame: pd.DataFrame) -> None:
        write_csv(frame, self.out / name)
        self.outputs.append(name)

    def _emit_series(self, name: str, series_list: Sequence[YearlySeries]) -> None:
        write_series_csv(series_list, self.out / name)
        self.outputs.append(name)

    def _require_file(self, path: Optional[str], flag: str) -> Path:
        if not path:
            raise IngestError(f"'{self.subcommand}'에는 {flag}가 필요합니다", {"flag": flag})
        resolved = Path(path)
        if not resolved.is_file():
            raise IngestError(f"입력 파일이 없음: {resolved}", {"flag": flag, "path": str(resolved)})
        return resolved

    def _run_step(self, name: str, func: Callable[[], None]) -> None:
        """분석 단계 실행: 치명적 입력 오류는 전파, 나머지 실패는 단계 상태로 기록"""
        try:
            func()
            self.steps[name] = STATUS_OK
        except CollabNetBaseException as e:
            if e.exit_code == EXIT_FATAL_INPUT:
                self.steps[name] = f"failed: {e.__class__.__name__}"
                raise
            self.steps[name] = f"failed: {e.__class__.__name__}: {e.message}"
            self.log.error(f"단계 실패: {name}", extra_data={"error": e.message, "details": e.details}, step=name)
        except Exception as e:
            self.steps[name] = f"failed: {e.__class__.__name__}: {e}"
            self.log.exception(f"단계 실패: {name}", extra_data={"error": str(e)}, step=name)

    @property
    def epochs(self) -> List[EpochDefinition]:
        if self._epochs is None:
            if self.cfg.epochs:
                path = self._require_file(self.cfg.epochs, "--epochs")
                self.inputs["epochs"] = sha256_file(path)
                self._epochs = parse_epochs(path)
            else:
                self._epochs = list(DEFAULT_EPOCHS)
                self.default_epochs_used = True
                self.notes.append("에포크 파일이 없어 기본 다섯 구간을 사용함")
        return self._epochs

    def censoring_enabled(self) -> bool:
        """auto: ground-truth 사이드카가 있으면(완전한 합성 데이터) 끔"""
        if self.cfg.censoring != "auto":
            return self.cfg.censoring == "on"
        return not (self.events_path is not None and truth_sidecar_path(self.events_path).exists())

    # -------------------------------------------------------------------------
    # 단계
    # -------------------------------------------------------------------------

    @log_execution_time(logger)
    def step_synth(self) -> None:
        scenario_path = self._require_file(self.cfg.scenario, "--scenario")
        self.inputs["scenario"] = sha256_file(scenario_path)
        scenario = load_scenario(scenario_path)
        if self.cfg.seed is not None:
            scenario = scenario.model_copy(update={"seed": self.cfg.seed})

        run = generate(scenario)
        events_path = self.events_path or self.out / "events.jsonl"
        _, sidecar = write_synthetic(run, events_path)
        self.out.mkdir(parents=True, exist_ok=True)
        with open(self.out / "scenario.ini", "w", encoding="utf-8", newline="\n") as f:
            f.write(dump_scenario(scenario))
        self.events_path = events_path

        for path in (events_path, sidecar, self.out / "scenario.ini"):
            if path.resolve().parent == self.out.resolve():
                self.outputs.append(path.name)
        if run.truth.pool_fallbacks:
            self.notes.append(f"생존자 풀 부족으로 신규 참여자로 대체된 자리: {run.truth.pool_fallbacks}")
        if run.truth.exit_overflow:
            self.notes.append(f"경력 종료 자리가 모자라 기존 이벤트에 덧붙인 참여자: {run.truth.exit_overflow}")

    @staticmethod
    def _year_range() -> Optional[Tuple[int, int]]:
        # 상한이 데이터셋 종료 연도가 되므로 두 경계가 모두 있어야 적용
        if config.YEAR_MIN is None or config.YEAR_MAX is None:
            return None
        return (config.YEAR_MIN, config.YEAR_MAX)

    def _cache_inputs(self) -> Dict[str, str]:
        self.inputs["events"] = sha256_file(self.events_path)
        hashes = {"events": self.inputs["events"]}
        year_range = self._year_range()
        if year_range is not None:
            hashes["year_range"] = f"{year_range[0]}:{year_range[1]}"
        return hashes

    @log_execution_time(logger)
    def step_ingest(self, rebuild: bool) -> None:
        """캐시 적중 시 그래프를 로드, 아니면 이벤트를 스트리밍 파싱해 그래프를 만들고 저장"""
        self.events_path = self._require_file(str(self.events_path) if self.events_path else None, "--events")
        hashes = self._cache_inputs()
        self.cache_key = compute_cache_key(hashes, self.cfg.tau_project)

        cache = AggregateCacheManager(self.cfg.cache_dir)
        self.rejects_path = cache.rejects_path(self.cache_key)
        try:
            if not rebuild:
                try:
                    self.graph = cache.load_graph(self.cache_key)
                    self.registry = cache.load_registry(self.cache_key)
                    self.aggregates = cache.load_aggregates(self.cache_key)
                    self.ingest_summary = dict(cache.lookup(self.cache_key).ingest_summary_dict)
                    self.ingest_summary["cache"] = "hit"
                    return
                except CacheMissError:
                    if self.subcommand != "report":
                        raise

            registry = ContributorRegistry()
            stream = parse_events(self.events_path, self.cfg.format, registry,
                                  config.MAX_MALFORMED_FRACTION, self.rejects_path)
            graph = build_graph(stream, self.cfg.tau_project, self._year_range(), workers=self.cfg.workers)
            with reject_writer(self.rejects_path, mode="a") as sink:
                for r in graph.report.rejected_samples:
                    sink.writerow(["", f"year {r['year']} outside range (project {r['project_id']})"])
            summary: Dict[str, Any] = {
                **stream.stats.summary(),
                "accepted_events": graph.report.accepted_events,
                "rejected_year_range": graph.report.rejected_year_range,
                "isolated_contributors": graph.isolated_contributors,
                "nodes": graph.num_nodes,
                "pair_timelines": graph.num_timelines,
                "dataset_end": graph.dataset_end,
            }
            self.aggregates = yearly_aggregates(graph)
            cache.store(self.cache_key, graph, hashes, self.aggregates, registry, summary)
            self.graph, self.registry = graph, registry
            self.ingest_summary = {**summary, "cache": "built"}
        finally:
            cache.close()

    def write_ingest_artifacts(self) -> None:
        self.out.mkdir(parents=True, exist_ok=True)
        self.registry.save(self.out / "contributors.csv")
        self.outputs.append("contributors.csv")

        target = self.out / "ingest_rejects.csv"
        if self.rejects_path is not None and self.rejects_path.is_file():
            shutil.copyfile(self.rejects_path, target)
        else:
            with reject_writer(target):
                pass
        self.outputs.append(target.name)

        columns = ["year", "new_nodes", "active_nodes", "removed_nodes", "new_timelines",
                   "ended_timelines", "event_count", "mean_team_size"]
        self._emit("yearly_aggregates.csv", pd.DataFrame(self.aggregates, columns=columns))
        write_json({k: v for k, v in self.ingest_summary.items() if k != "cache"},
                   self.out / "ingest_summary.json")
        self.outputs.append("ingest_summary.json")

    def series_map(self) -> Dict[str, YearlySeries]:
        """이름 → 시계열 (그래프에서 한 번만 계산)"""
        if self._series is None:
            g = self.graph
            nodes = node_series(g)
            single = single_year_series(g)
            nodes_live, edges_live = active_count_series(g)
            events = event_series(g)
            ordered = [
                nodes.cumulative_total, nodes.active, nodes.new, new_fraction_series(g),
                single.count, single.fraction, single.project_count, single.project_fraction,
                nodes_live, edges_live, events.event_count, events.multi_member_fraction,
                *events.stats_series().values(),
                *[events.size_fractions[size] for size in sorted(events.size_fractions)],
            ]
            self._series = {s.name: s for s in ordered}
        return self._series

    def timescales(self) -> TimescaleSeries:
        if self._timescales is None:
            self._timescales = process_timescales(self.graph, self.cfg.censor_window)
        return self._timescales

    @log_execution_time(logger)
    def step_series(self) -> None:
        series = self.series_map()
        size_names = [name for name in series if name.startswith("size_fraction_")]
        self._emit_series("series.csv", [s for name, s in series.items() if name not in size_names])
        self._emit_series("team_size_fractions.csv", [series[name] for name in size_names])

        if self.cfg.population:
            path = self._require_file(self.cfg.population, "--population")
            self.inputs["population"] = sha256_file(path)
            table = parse_population(path)
            lo, hi = table.support
            scaled = []
            for name in ("nodes_cumulative", "nodes_active_new_edges", "nodes_new"):
                inside = series[name].window(lo, hi)
                if len(inside) < len(series[name]):
                    self.notes.append(f"{name}: 인구 앵커 범위 [{lo}, {hi}] 밖 연도는 1인당 값에서 제외")
                scaled.append(per_capita(inside, table))
            self._emit_series("series_per_capita.csv", scaled)

    @log_execution_time(logger)
    def step_timescales(self) -> None:
        ts = self.timescales()
        self._emit_series("timescales.csv", ts.as_list())
        self.notes.append(f"제거 시간척도는 데이터 마지막 {self.cfg.censor_window}년을 관측 불가로 보고 제외함")

        rows = []
        for epoch in self.epochs:
            row: Dict[str, object] = {"epoch": epoch.name, "epoch_start": epoch.start, "epoch_end": epoch.end,
                                      "status": STATUS_OK}
            try:
                shock = shock_response(ts, epoch)
                ratio = timescale_ratio_baseline_return(ts, epoch)
                row.update({
                    "tau_node_change_pct": shock.tau_node_change_pct,
                    "tau_edge_change_pct": shock.tau_edge_change_pct,
                    "ratio_baseline": ratio.baseline_mean,
                    "ratio_max_deviation_pct": ratio.max_deviation_pct,
                    "ratio_return_years": ratio.return_years if ratio.returned else "not returned",
                })
            except InsufficientDataError as e:
                row["status"] = "insufficient baseline"
                self.log.info("시간척도 충격 반응 건너뜀", extra_data={"reason": e.message}, epoch=epoch.name)
            rows.append(row)
        columns = ["epoch", "epoch_start", "epoch_end", "status", "tau_node_change_pct", "tau_edge_change_pct",
                   "ratio_baseline", "ratio_max_deviation_pct", "ratio_return_years"]
        self._emit("timescale_shocks.csv", pd.DataFrame(rows, columns=columns))

    @log_execution_time(logger)
    def step_fit(self) -> None:
        g, cfg = self.graph, self.cfg
        censoring = self.censoring_enabled()
        self.evolutions = [
            parameter_evolution(g, "power_law", "creation_year",
                                min_samples=cfg.min_fit_samples, workers=cfg.workers),
            parameter_evolution(g, "weibull", "pair_start", censoring=censoring, discrete=True,
                                min_samples=cfg.min_fit_samples, workers=cfg.workers),
            parameter_evolution(g, "weibull", "node_entry", censoring=censoring, discrete=True,
                                min_samples=cfg.min_fit_samples, workers=cfg.workers),
        ]
        self._emit("fits_power_law.csv", self.evolutions[0].to_frame())
        self._emit("fits_weibull_pairs.csv", self.evolutions[1].to_frame())
        self._emit("fits_weibull_lifespans.csv", self.evolutions[2].to_frame())

        skips = [e.skips_frame() for e in self.evolutions]
        cumulative = self.series_map()["nodes_cumulative"]
        t0 = int(cumulative.years[0]) if len(cumulative) else 0
        try:
            self.growth = fit_growth(cumulative, t0)
            self._emit("growth.csv", pd.DataFrame([{
                "series": cumulative.name, "t0": self.growth.t0, "alpha1": self.growth.alpha1,
                "alpha2": self.growth.alpha2, "breakpoint_year": self.growth.breakpoint_year,
                "residual": self.growth.residual, "intercept1": self.growth.intercept1,
                "intercept2": self.growth.intercept2, "n_points": self.growth.n_points,
                "dropped_years": ";".join(str(y) for y in self.growth.dropped_years),
            }]))
        except (InsufficientDataError, ConvergenceError) as e:
            reason = "insufficient_data" if isinstance(e, InsufficientDataError) else "no_convergence"
            skip = FitSkip(t0, reason, len(cumulative), e.message)
            skips.append(pd.DataFrame([{"fit_kind": "growth", "cohorting": cumulative.name, **asdict(skip)}]))
        populated = [s for s in skips if not s.empty]
        self._emit("fit_skips.csv", pd.concat(populated, ignore_index=True) if populated else skips[0])
        self.notes.append(f"Weibull 검열 우도: {'사용' if censoring else '미사용'} (--censoring {cfg.censoring})")

    @log_execution_time(logger)
    def step_epochs(self) -> None:
        available = {**self.series_map(), **{s.name: s for s in self.timescales().as_list()}}
        selected = [available[name] for name in EPOCH_SERIES if name in available]
        self.epoch_reports = epoch_report_matrix(
            selected, self.epochs, window=config.BASELINE_WINDOW, tolerance_pct=config.RECOVERY_TOLERANCE,
            workers=self.cfg.workers, min_years=config.BASELINE_MIN_YEARS,
        )
        self._emit("epochs.csv", epoch_report_frame(self.epoch_reports))

        errors = [r for r in self.epoch_reports if r.status.startswith("error")]
        if errors:
            raise PipelineStepError(
                f"에포크 셀 {len(errors)}개 계산 실패",
                {"cells": [f"{r.series_name}/{r.epoch.name}: {r.status}" for r in errors]}
            )

    # -------------------------------------------------------------------------
    # 오케스트레이션
    # -------------------------------------------------------------------------

    def _analysis(self, names: Sequence[str]) -> None:
        """서로 독립인 단계는 workers > 1이면 동시에 실행 (결과는 병렬도와 무관)"""
        table = {"series": self.step_series, "timescales": self.step_timescales, "fit": self.step_fit}
        for name in names:
            self.steps[name] = "pending"
        if self.cfg.workers > 1 and len(names) > 1:
            # 공유 시계열은 먼저 계산해 두고 단계 간 경쟁을 없앰
            self.series_map()
            self.timescales()
            with ThreadPoolExecutor(max_workers=min(self.cfg.workers, len(names))) as pool:
                list(pool.map(lambda n: self._run_step(n, table[n]), names))
        else:
            for name in names:
                self._run_step(name, table[name])

    def execute(self) -> int:
        sub = self.subcommand
        self.log.info("실행 시작", extra_data={"config": self.cfg.model_dump(mode="json")})

        if sub == "synth" or (sub == "report" and self.cfg.scenario and self.events_path is None):
            self._run_step("synth", self.step_synth)
            if sub == "synth":
                return self.finish()

        self._run_step("ingest", lambda: self.step_ingest(rebuild=(sub == "ingest")))
        if sub in ("ingest", "report"):
            self._run_step("ingest_artifacts", self.write_ingest_artifacts)

        if sub == "epochs":
            self._run_step("epochs", self.step_epochs)
        elif sub in ("series", "timescales", "fit"):
            self._analysis([sub])
        elif sub == "report":
            self._analysis(["series", "timescales", "fit"])
            self._run_step("epochs", self.step_epochs)
        return self.finish()

    def finish(self) -> int:
        """매니페스트(와 report의 경우 report.md) 기록 후 종료 코드 반환"""
        failed = {name: status for name, status in self.steps.items() if status != STATUS_OK}
        extra = ["manifest.json"] + (["report.md"] if self.subcommand == "report" else [])
        manifest = RunManifest(
            subcommand=self.subcommand,
            code_version=config.CODE_VERSION,
            config=self.cfg.model_dump(mode="json"),
            settings=config.effective_settings(),
            inputs=dict(sorted(self.inputs.items())),
            versions=_versions(),
            cache_key=self.cache_key,
            default_epochs_used=self.default_epochs_used,
            steps=self.steps,
            outputs=sorted(set(self.outputs + extra)),
        )
        write_json(manifest.model_dump(mode="json"), self.out / "manifest.json")
        if self.subcommand == "report":
            write_report(
                self.out / "report.md",
                manifest=manifest,
                ingest_summary={k: v for k, v in self.ingest_summary.items() if k not in ("rejects", "cache")},
                evolutions=self.evolutions,
                growth=self.growth,
                epoch_reports=self.epoch_reports,
                notes=sorted(self.notes),
            )

        self.log.info("실행 종료", extra_data={"steps": self.steps, "outputs": len(manifest.outputs)})
        if failed:
            self.log.warning("일부 단계 실패", extra_data={"failed": failed})
            return EXIT_PARTIAL_FAILURE
        return EXIT_SUCCESS


def run(subcommand: str, cfg: RunConfig) -> int:
    """서브커맨드 실행 → 종료 코드 (0 성공 / 1 치명적 입력 오류 / 2 부분 실패)"""
    if subcommand not in SUBCOMMANDS:
        return handle_cli_exception(IngestError(f"알 수 없는 서브커맨드: {subcommand}"), {"subcommand": subcommand})
    try:
        return PipelineRun(subcommand, cfg).execute()
    except BaseException as e:
        if isinstance(e, KeyboardInterrupt):
            raise
        return handle_cli_exception(e, {"subcommand": subcommand})


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.log_level or config.LOG_LEVEL, config.LOG_DIR)
    try:
        cfg = resolve_run_config(args)
    except (ValidationError, CollabNetBaseException) as e:
        return handle_cli_exception(e, {"subcommand": args.subcommand})
    return run(args.subcommand, cfg)


if __name__ == "__main__":
    sys.exit(main())
