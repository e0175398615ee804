"""
=====================================================================
합성 이벤트 생성기
=====================================================================
심어 둔 파라미터(성장 지수, 팀 크기 분포, Weibull 경력, 에포크 충격)로
결정적인 프로젝트 이벤트 스트림을 생성하고 ground truth를 함께 반환

RNG: numpy PCG64, 연도별 하위 시드 SeedSequence([seed, year])
연도 t의 이벤트 수:
  round(scale · (t - start + 1)^alpha)
  breakpoint 이후에는 분기점에서 연속이 되도록 지수 alpha2로 이어감
각 이벤트 자리(slot)는 확률 entrant_share × 진입 배수로 신규 참여자,
나머지는 경력이 끝나지 않은 기존 참여자 중에서 채움 (한 이벤트에 같은 참여자는 한 번)
career.schedule_exit이면 각 참여자는 경력 마지막 해에 반드시 등장하고,
데이터 끝을 넘는 경력은 마지막 연도에 등장하여 관측 수명이 경력과 같아짐
=====================================================================
"""

import configparser
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field, ValidationError

from core_graph import ProjectEvent
from epoch_analysis import DEFAULT_EPOCHS, find_epoch
from exceptions import ScenarioValidationError
from ingest import truth_sidecar_path, write_events_jsonl, write_json
from logging_config import get_logger
from models import ScenarioConfig, ShockConfig, TeamSizeConfig

logger = get_logger("synthgen")

RNG_ALGORITHM = "PCG64"
SEEDING = "SeedSequence([seed, year])"


class GroundTruth(BaseModel):
    """심어 둔 파라미터를 그대로 되돌려 주는 사이드카"""
    scenario: ScenarioConfig
    rng_algorithm: str = RNG_ALGORITHM
    seeding: str = SEEDING
    shock_windows: Dict[str, Tuple[int, int]] = Field(default_factory=dict)
    events: int = 0
    contributors: int = 0
    pool_fallbacks: int = 0
    exit_overflow: int = 0  # 경력 종료 자리가 모자라 기존 이벤트에 덧붙인 참여자 수


@dataclass
class SyntheticRun:
    events: List[ProjectEvent]
    truth: GroundTruth


# =============================================================================
# 검증 / 시나리오 파일
# =============================================================================

def validate_scenario(data: Union[ScenarioConfig, Dict[str, Any]]) -> ScenarioConfig:
    """딕셔너리/모델 → ScenarioConfig, 실패 시 문제 필드 목록과 함께 ScenarioValidationError"""
    if isinstance(data, ScenarioConfig):
        config = data
    else:
        try:
            config = ScenarioConfig.model_validate(data)
        except ValidationError as e:
            fields = sorted({".".join(str(p) for p in err["loc"]) or "<root>" for err in e.errors()})
            raise ScenarioValidationError(
                f"시나리오 설정 검증 실패: {', '.join(fields)}",
                {"fields": fields, "errors": [err["msg"] for err in e.errors()]}
            )
    unknown = [f"shocks.{i}.epoch" for i, s in enumerate(config.shocks)
               if s.start is None and find_epoch(s.epoch) is None]
    if unknown:
        raise ScenarioValidationError(
            f"알 수 없는 에포크 이름 (start/end 필요): {', '.join(unknown)}",
            {"fields": unknown, "known_epochs": [e.name for e in DEFAULT_EPOCHS]}
        )
    return config


def _split_list(value: str, cast) -> List:
    return [cast(v.strip()) for v in value.split(",") if v.strip()]


def _section(parser: configparser.ConfigParser, name: str) -> Dict[str, str]:
    if not parser.has_section(name):
        return {}
    return {k: v for k, v in parser.items(name) if v.strip() != ""}


def load_scenario(path: Union[str, Path]) -> ScenarioConfig:
    """key = value 섹션 형식의 시나리오 파일 로드"""
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path, "r", encoding="utf-8") as f:
            parser.read_file(f)
    except (OSError, configparser.Error) as e:
        raise ScenarioValidationError(f"시나리오 파일을 읽을 수 없음: {path}", {"fields": [], "error": str(e)})

    head = _section(parser, "scenario")
    data: Dict[str, Any] = {
        "seed": head.get("seed"),
        "entrant_share": head.get("entrant_share"),
        "growth": _section(parser, "growth") or None,
        "career": _section(parser, "career") or None,
        "shocks": [],
    }
    if "start_year" in head or "end_year" in head:
        data["years"] = (head.get("start_year"), head.get("end_year"))
    if "participation_cap" in head:
        data["participation_cap"] = head["participation_cap"]

    team = _section(parser, "team_size")
    if "sizes" in team:
        team["sizes"] = _split_list(team["sizes"], int)
    if "weights" in team:
        team["weights"] = _split_list(team["weights"], float)
    data["team_size"] = team or None

    for name in parser.sections():
        if name.startswith("shock."):
            shock = _section(parser, name)
            shock.setdefault("epoch", name[len("shock."):])
            data["shocks"].append(shock)

    return validate_scenario({k: v for k, v in data.items() if v is not None})


def dump_scenario(config: ScenarioConfig) -> str:
    """ScenarioConfig → 시나리오 파일 텍스트 (load_scenario의 역변환)"""
    lines = ["[scenario]", f"seed = {config.seed}", f"start_year = {config.years[0]}",
             f"end_year = {config.years[1]}", f"entrant_share = {config.entrant_share!r}"]
    if config.participation_cap is not None:
        lines.append(f"participation_cap = {config.participation_cap}")

    def section(title: str, model: BaseModel) -> None:
        lines.extend(["", f"[{title}]"])
        for key, value in model.model_dump().items():
            if value is None:
                continue
            if isinstance(value, bool):
                value = str(value).lower()
            elif isinstance(value, list):
                value = ", ".join(repr(v) for v in value)
            lines.append(f"{key} = {value!r}" if isinstance(value, float) else f"{key} = {value}")

    section("growth", config.growth)
    section("team_size", config.team_size)
    section("career", config.career)
    for i, shock in enumerate(config.shocks):
        section(f"shock.{i:02d}_{shock.epoch.replace(' ', '_')}", shock)
    return "\n".join(lines) + "\n"


# =============================================================================
# 표본 추출
# =============================================================================

def year_rng(seed: int, year: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, year])))


def weibull_inverse_cdf(u, k: float, lam: float):
    """λ·(-ln U)^(1/k), U ∈ (0, 1]"""
    return lam * (-np.log(u)) ** (1.0 / k)


def sample_weibull(k: float, lam: float, rng: np.random.Generator, size=None, continuous: bool = False):
    """역CDF Weibull 추출, 기본은 올림한 정수 연도 (최소 1)"""
    if k <= 0 or lam <= 0:
        raise ValueError(f"Weibull 파라미터는 양수여야 함: k={k}, lambda={lam}")
    u = 1.0 - rng.random(size)
    x = weibull_inverse_cdf(u, k, lam)
    if continuous:
        return x
    durations = np.maximum(1, np.ceil(x)).astype(np.int64)
    return int(durations) if size is None else durations


def _size_distribution(team_size: TeamSizeConfig) -> Tuple[np.ndarray, np.ndarray]:
    """(팀 크기 값, 확률)"""
    if team_size.kind == "fixed":
        return np.array([team_size.size]), np.array([1.0])
    if team_size.kind == "categorical":
        weights = np.asarray(team_size.weights, dtype=np.float64)
        return np.asarray(team_size.sizes, dtype=np.int64), weights / weights.sum()
    if team_size.kind == "truncated_power_law":
        sizes = np.arange(team_size.min_size, team_size.max_size + 1)
        weights = sizes.astype(np.float64) ** -team_size.gamma
        return sizes, weights / weights.sum()
    # edge_power_law: 각 멤버의 신규 파트너 수 k = size - 1이 k^-γ를 따르도록 크기 편향 보정
    k = np.arange(max(1, team_size.min_size - 1), team_size.max_size)
    weights = k.astype(np.float64) ** -team_size.gamma / (k + 1.0)
    return k + 1, weights / weights.sum()


def planned_event_counts(config: ScenarioConfig) -> Dict[int, int]:
    """연도별 이벤트 수 (충격과 무관)"""
    start, end = config.years
    g = config.growth
    t = np.arange(start, end + 1)
    x = (t - start + 1).astype(np.float64)
    raw = g.scale * x ** g.alpha
    if g.breakpoint is not None:
        xb = float(g.breakpoint - start + 1)
        after = t >= g.breakpoint
        raw[after] = g.scale * xb ** (g.alpha - g.alpha2) * x[after] ** g.alpha2
    counts = np.floor(raw + 0.5).astype(np.int64)
    return dict(zip(t.tolist(), counts.tolist()))


def _shock_windows(config: ScenarioConfig) -> List[Tuple[ShockConfig, int, int]]:
    out = []
    for shock in config.shocks:
        if shock.start is not None:
            out.append((shock, shock.start, shock.end))
        else:
            epoch = find_epoch(shock.epoch)
            out.append((shock, epoch.start, epoch.end))
    return out


def shock_multipliers(windows: List[Tuple[ShockConfig, int, int]], year: int) -> Tuple[float, float]:
    """(진입 배수, 팀 크기 배수): 에포크 동안 m, 이후 ramp 년에 걸쳐 선형으로 1까지 회복"""
    entry = size = 1.0
    for shock, start, end in windows:
        for attr in ("entry_multiplier", "size_multiplier"):
            m = getattr(shock, attr)
            if start <= year <= end:
                factor = m
            elif shock.recovery_ramp_years > 0 and end < year <= end + shock.recovery_ramp_years:
                factor = m + (1.0 - m) * (year - end) / shock.recovery_ramp_years
            else:
                factor = 1.0
            if attr == "entry_multiplier":
                entry *= factor
            else:
                size *= factor
    return entry, size


class _Population:
    """참여자별 첫 등장 연도와 경력 마지막 연도 (용량 2배씩 증가)"""

    def __init__(self):
        self.size = 0
        self.first_year = np.empty(1024, dtype=np.int64)
        self.last_year = np.empty(1024, dtype=np.int64)

    def add(self, year: int, careers: np.ndarray) -> np.ndarray:
        n = careers.size
        while self.size + n > self.first_year.size:
            self.first_year = np.concatenate([self.first_year, np.empty_like(self.first_year)])
            self.last_year = np.concatenate([self.last_year, np.empty_like(self.last_year)])
        ids = np.arange(self.size, self.size + n, dtype=np.int64)
        self.first_year[ids] = year
        self.last_year[ids] = year + careers - 1
        self.size += n
        return ids

    def survivors(self, year: int) -> np.ndarray:
        first, last = self.first_year[:self.size], self.last_year[:self.size]
        return np.flatnonzero((first < year) & (last >= year))


_EMPTY = np.empty(0, dtype=np.int64)


def _draw_survivors(pool: np.ndarray, placed: np.ndarray, n: int, cap: Optional[int],
                    rng: np.random.Generator) -> np.ndarray:
    """기존 참여자 n명 추출 (상한이 있으면 이미 배치된 참여자는 cap - 1번만 더)"""
    if n <= 0:
        return _EMPTY
    if cap is None:
        return rng.choice(pool, size=n, replace=True) if pool.size else _EMPTY
    capacity = np.concatenate([np.repeat(pool, cap), np.repeat(placed, cap - 1)])
    if capacity.size == 0:
        return _EMPTY
    return rng.choice(capacity, size=min(n, capacity.size), replace=False)


def _duplicate_positions(events: np.ndarray, picks: np.ndarray) -> np.ndarray:
    if picks.size < 2:
        return _EMPTY
    order = np.lexsort((picks, events))
    same = (events[order][1:] == events[order][:-1]) & (picks[order][1:] == picks[order][:-1])
    return order[1:][same]


def _spread_duplicates(events: np.ndarray, picks: np.ndarray, rng: np.random.Generator,
                       rounds: int = 32) -> Tuple[np.ndarray, np.ndarray]:
    """같은 이벤트에 두 번 뽑힌 참여자를 임의의 다른 자리와 맞바꿈 → (picks, 남은 중복 위치)"""
    picks = picks.copy()
    for _ in range(rounds):
        clash = _duplicate_positions(events, picks)
        if clash.size == 0:
            return picks, clash
        for a, b in zip(clash, rng.integers(0, picks.size, size=clash.size)):
            picks[a], picks[b] = picks[b], picks[a]
    return picks, _duplicate_positions(events, picks)


# =============================================================================
# 생성
# =============================================================================

def generate(config: Union[ScenarioConfig, Dict[str, Any]]) -> SyntheticRun:
    """시나리오 → (이벤트 목록, ground truth), 시드가 같으면 결과가 같음"""
    config = validate_scenario(config)
    windows = _shock_windows(config)
    sizes_values, sizes_probs = _size_distribution(config.team_size)
    counts = planned_event_counts(config)
    cap = config.participation_cap
    career = config.career
    last_event_year = max((y for y, n in counts.items() if n > 0), default=config.years[1])

    population = _Population()
    events: List[ProjectEvent] = []
    fallbacks = overflow_total = 0

    for year, n_events in counts.items():
        if n_events <= 0:
            continue
        rng = year_rng(config.seed, year)
        entry_m, size_m = shock_multipliers(windows, year)

        sizes = rng.choice(sizes_values, size=n_events, p=sizes_probs)
        # 확률적 반올림으로 기대 크기를 size_m배로 유지
        sizes = np.maximum(1, np.floor(sizes * size_m + rng.random(n_events))).astype(np.int64)
        slots = int(sizes.sum())
        event_of = np.repeat(np.arange(n_events), sizes)

        entrant = rng.random(slots) < min(1.0, config.entrant_share * entry_m)
        pool = population.survivors(year)
        due = _EMPTY
        if career.schedule_exit and pool.size:
            last = population.last_year[pool]
            exiting = last == year if year < last_event_year else last >= year
            due, pool = rng.permutation(pool[exiting]), pool[~exiting]
            shortfall = due.size - int(np.count_nonzero(~entrant))
            if shortfall > 0:
                # 경력이 끝나는 참여자에게 신규 자리를 넘김
                open_slots = np.flatnonzero(entrant)
                entrant[rng.choice(open_slots, size=min(shortfall, open_slots.size), replace=False)] = False

        survivor_slots = np.flatnonzero(~entrant)
        placed, overflow = due[:survivor_slots.size], due[survivor_slots.size:]
        drawn = _draw_survivors(pool, placed, survivor_slots.size - placed.size, cap, rng)
        picks = rng.permutation(np.concatenate([placed, drawn]))

        filled = survivor_slots[:picks.size]
        picks, clash = _spread_duplicates(event_of[filled], picks, rng)
        keep = np.ones(picks.size, dtype=bool)
        keep[clash] = False
        # 기존 참여자가 부족하거나 중복을 풀지 못한 자리는 신규 참여자로 채움
        short = np.concatenate([survivor_slots[picks.size:], filled[clash]])
        entrant[short] = True
        fallbacks += short.size

        n_new = int(np.count_nonzero(entrant))
        careers = sample_weibull(career.weibull_k, career.weibull_lambda, rng, size=n_new)
        members = np.empty(slots, dtype=np.int64)
        members[entrant] = population.add(year, careers)
        members[filled[keep]] = picks[keep]

        overflow_total += overflow.size
        for i, chunk in enumerate(np.split(members, np.cumsum(sizes)[:-1])):
            if overflow.size:
                chunk = np.concatenate([chunk, overflow[i::n_events]])
            events.append(ProjectEvent.create(f"s{config.seed}-{year}-{i:07d}", year, chunk.tolist()))

    truth = GroundTruth(
        scenario=config,
        shock_windows={f"{i:02d}_{s.epoch}": (start, end) for i, (s, start, end) in enumerate(windows)},
        events=len(events),
        contributors=population.size,
        pool_fallbacks=fallbacks,
        exit_overflow=overflow_total,
    )
    logger.info("합성 이벤트 생성 완료", extra_data={
        "events": len(events), "contributors": population.size, "pool_fallbacks": fallbacks,
        "exit_overflow": overflow_total, "seed": config.seed, "years": list(config.years),
    }, operation="generate")
    return SyntheticRun(events=events, truth=truth)


def write_synthetic(run: SyntheticRun, events_path: Union[str, Path]) -> Tuple[Path, Path]:
    """이벤트 JSONL과 ground-truth 사이드카 기록"""
    events_path = Path(events_path)
    write_events_jsonl(run.events, events_path)
    sidecar = write_json(json.loads(run.truth.model_dump_json()), truth_sidecar_path(events_path))
    return events_path, sidecar


def load_truth(path: Union[str, Path]) -> GroundTruth:
    with open(path, "r", encoding="utf-8") as f:
        return GroundTruth.model_validate(json.load(f))
