"""
연도별 지표 시계열 계산 모듈
노드 수(누적/활동/신규), 신규 참여자 비율, 단일 연도 수명, 팀 크기 통계,
인구 보정(1인당) 시계열을 계산
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from config import config
from core_graph import ProjectEvent, TemporalGraph
from exceptions import PopulationRangeError
from logging_config import get_logger

logger = get_logger("series")


@dataclass(frozen=True)
class YearlySeries:
    """연도 → 실수 값의 이름 붙은 시계열"""
    name: str
    years: np.ndarray
    values: np.ndarray
    bounded: bool = False  # 분율 시계열이면 [0, 1]

    def __post_init__(self):
        years = np.asarray(self.years, dtype=np.int64)
        values = np.asarray(self.values, dtype=np.float64)
        if years.shape != values.shape or years.ndim != 1:
            raise ValueError(f"{self.name}: years/values 길이 불일치")
        if years.size > 1 and not np.all(np.diff(years) > 0):
            raise ValueError(f"{self.name}: 연도가 엄격히 증가하지 않음")
        if not np.all(np.isfinite(values)):
            raise ValueError(f"{self.name}: 유한하지 않은 값 포함")
        if self.bounded and values.size and (values.min() < 0.0 or values.max() > 1.0):
            raise ValueError(f"{self.name}: 분율 값이 [0, 1] 범위를 벗어남")
        years.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "years", years)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_mapping(cls, name: str, mapping: Mapping[int, float], bounded: bool = False) -> "YearlySeries":
        items = sorted(mapping.items())
        return cls(name, np.array([k for k, _ in items], dtype=np.int64),
                   np.array([v for _, v in items], dtype=np.float64), bounded)

    def __len__(self) -> int:
        return int(self.years.size)

    def get(self, year: int) -> Optional[float]:
        idx = int(np.searchsorted(self.years, year))
        if idx < self.years.size and self.years[idx] == year:
            return float(self.values[idx])
        return None

    def __getitem__(self, year: int) -> float:
        value = self.get(year)
        if value is None:
            raise KeyError(year)
        return value

    def to_dict(self) -> Dict[int, float]:
        return dict(zip(self.years.tolist(), self.values.tolist()))

    def where(self, mask: np.ndarray, name: Optional[str] = None) -> "YearlySeries":
        return YearlySeries(name or self.name, self.years[mask], self.values[mask], self.bounded)

    def window(self, start: int, end: int) -> "YearlySeries":
        """[start, end] 구간의 부분 시계열"""
        return self.where((self.years >= start) & (self.years <= end))

    def scaled(self, factor: float, name: Optional[str] = None) -> "YearlySeries":
        return YearlySeries(name or self.name, self.years, self.values * factor)

    def renamed(self, name: str) -> "YearlySeries":
        return YearlySeries(name, self.years, self.values, self.bounded)


@dataclass(frozen=True)
class PopulationTable:
    """연도별 세계 인구 앵커 (단조성 가정 없음)"""
    years: np.ndarray
    populations: np.ndarray

    def __post_init__(self):
        years = np.asarray(self.years, dtype=np.int64)
        pops = np.asarray(self.populations, dtype=np.float64)
        if years.size < 2:
            raise ValueError("PopulationTable에는 최소 2개 앵커가 필요함")
        if np.any(np.diff(years) <= 0):
            raise ValueError("앵커 연도가 정렬/고유하지 않음")
        if np.any(pops <= 0) or not np.all(np.isfinite(pops)):
            raise ValueError("인구 값은 양의 유한수여야 함")
        object.__setattr__(self, "years", years)
        object.__setattr__(self, "populations", pops)

    @classmethod
    def from_mapping(cls, anchors: Mapping[int, float]) -> "PopulationTable":
        items = sorted(anchors.items())
        return cls(np.array([k for k, _ in items]), np.array([v for _, v in items]))

    @property
    def support(self) -> Tuple[int, int]:
        return int(self.years[0]), int(self.years[-1])


@dataclass(frozen=True)
class TeamSizeStats:
    year: int
    mean: float
    mode: int
    max: int


@dataclass(frozen=True)
class NodeSeries:
    cumulative_total: YearlySeries
    active: YearlySeries
    new: YearlySeries


@dataclass(frozen=True)
class SingleYearSeries:
    count: YearlySeries
    fraction: YearlySeries
    # 프로젝트 수 기준 변형: 정확히 한 프로젝트만 있는 경력
    project_count: YearlySeries
    project_fraction: YearlySeries


@dataclass(frozen=True)
class EventSeries:
    event_count: YearlySeries
    size_fractions: Dict[int, YearlySeries]
    stats: List[TeamSizeStats]
    multi_member_fraction: YearlySeries
    size_cap: int = 10

    def stats_series(self) -> Dict[str, YearlySeries]:
        years = np.array([s.year for s in self.stats], dtype=np.int64)
        return {
            "team_size_mean": YearlySeries("team_size_mean", years, np.array([s.mean for s in self.stats])),
            "team_size_mode": YearlySeries("team_size_mode", years, np.array([s.mode for s in self.stats], dtype=float)),
            "team_size_max": YearlySeries("team_size_max", years, np.array([s.max for s in self.stats], dtype=float)),
        }


# =============================================================================
# 노드 시계열
# =============================================================================

def _year_domain(graph: TemporalGraph) -> np.ndarray:
    bounds = graph.year_bounds
    if bounds is None:
        return np.empty(0, dtype=np.int64)
    return np.arange(bounds[0], bounds[1] + 1, dtype=np.int64)


def _count_by_year(years: np.ndarray, domain: np.ndarray) -> np.ndarray:
    if domain.size == 0:
        return np.empty(0, dtype=np.float64)
    counts = np.bincount(np.asarray(years, dtype=np.int64) - domain[0], minlength=domain.size)
    return counts[:domain.size].astype(np.float64)


def node_series(graph: TemporalGraph) -> NodeSeries:
    """누적 노드, 그 해 새 엣지로 활동한 노드, 그 해 새로 합류한 노드"""
    domain = _year_domain(graph)
    new = _count_by_year(graph.node_first[graph.has_edges], domain)
    active = _count_by_year(graph.ny_year, domain)
    return NodeSeries(
        cumulative_total=YearlySeries("nodes_cumulative", domain, np.cumsum(new)),
        active=YearlySeries("nodes_active_new_edges", domain, active),
        new=YearlySeries("nodes_new", domain, new),
    )


def new_fraction_series(graph: TemporalGraph) -> YearlySeries:
    """신규 노드 / 그 해 새 엣지를 가진 참여자 (분모 0인 연도는 생략)"""
    nodes = node_series(graph)
    mask = nodes.active.values > 0
    return YearlySeries(
        "new_fraction", nodes.new.years[mask],
        nodes.new.values[mask] / nodes.active.values[mask], bounded=True,
    )


def single_year_series(graph: TemporalGraph) -> SingleYearSeries:
    """수명이 한 해뿐인 노드의 수와 신규 노드 대비 비율"""
    domain = _year_domain(graph)
    nodes = node_series(graph)
    edged = graph.has_edges
    single = edged & (graph.node_first == graph.node_last)
    count = _count_by_year(graph.node_first[single], domain)
    mask = nodes.new.values > 0

    one_project = edged & (graph.node_projects == 1)
    project_count = _count_by_year(graph.node_first_completion[one_project], domain)
    cohort = _count_by_year(graph.node_first_completion[edged], domain)
    pmask = cohort > 0

    return SingleYearSeries(
        count=YearlySeries("single_year_count", domain, count),
        fraction=YearlySeries("single_year_fraction", domain[mask], count[mask] / nodes.new.values[mask], bounded=True),
        project_count=YearlySeries("single_project_count", domain, project_count),
        project_fraction=YearlySeries("single_project_fraction", domain[pmask], project_count[pmask] / cohort[pmask], bounded=True),
    )


def active_count_series(graph: TemporalGraph) -> Tuple[YearlySeries, YearlySeries]:
    """살아 있는 구간 기준 활동 노드/엣지 수 (모든 연도)"""
    domain = _year_domain(graph)
    if domain.size == 0:
        empty = np.empty(0)
        return YearlySeries("nodes_live", domain, empty), YearlySeries("edges_live", domain, empty)

    def coverage(starts: np.ndarray, ends: np.ndarray) -> np.ndarray:
        diff = np.zeros(domain.size + 1, dtype=np.int64)
        np.add.at(diff, np.asarray(starts, dtype=np.int64) - domain[0], 1)
        np.add.at(diff, np.asarray(ends, dtype=np.int64) - domain[0] + 1, -1)
        return np.cumsum(diff)[:-1].astype(np.float64)

    _, n_start, n_end = graph.node_activity_intervals()
    return (
        YearlySeries("nodes_live", domain, coverage(n_start, n_end)),
        YearlySeries("edges_live", domain, coverage(graph.iv_start, graph.iv_end)),
    )


# =============================================================================
# 이벤트(팀 크기) 시계열
# =============================================================================

def _histogram_frame(source: Union[TemporalGraph, Iterable[ProjectEvent]]) -> pd.DataFrame:
    if isinstance(source, TemporalGraph):
        return pd.DataFrame({
            "year": source.hist_year.astype(np.int64),
            "size": source.hist_size.astype(np.int64),
            "count": source.hist_count.astype(np.int64),
        })
    counts: Dict[Tuple[int, int], int] = {}
    for event in source:
        key = (event.completion_year, event.size)
        counts[key] = counts.get(key, 0) + 1
    items = sorted(counts.items())
    return pd.DataFrame({
        "year": np.array([k[0] for k, _ in items], dtype=np.int64),
        "size": np.array([k[1] for k, _ in items], dtype=np.int64),
        "count": np.array([c for _, c in items], dtype=np.int64),
    })


def event_series(source: Union[TemporalGraph, Iterable[ProjectEvent]], size_cap: int = config.SIZE_BIN_CAP) -> EventSeries:
    """연도별 이벤트 수, 팀 크기별 분율 (cap 이상은 한 구간), 평균/최빈/최대 팀 크기"""
    df = _histogram_frame(source)
    if df.empty:
        empty = np.empty(0)
        return EventSeries(
            YearlySeries("event_count", empty, empty), {}, [],
            YearlySeries("multi_member_fraction", empty, empty), size_cap,
        )

    totals = df.groupby("year")["count"].sum()
    years = totals.index.to_numpy(dtype=np.int64)
    total_values = totals.to_numpy(dtype=np.float64)

    weighted = (df["size"] * df["count"]).groupby(df["year"]).sum().to_numpy(dtype=np.float64)
    mean = weighted / total_values
    # 최빈값 동률이면 가장 작은 크기
    mode = (df.sort_values(["year", "count", "size"], ascending=[True, False, True])
              .groupby("year")["size"].first().to_numpy())
    biggest = df.groupby("year")["size"].max().to_numpy()
    stats = [
        TeamSizeStats(int(y), float(m), int(mo), int(mx))
        for y, m, mo, mx in zip(years, mean, mode, biggest)
    ]

    binned = df.assign(bin=df["size"].clip(upper=size_cap)).groupby(["year", "bin"])["count"].sum()
    table = binned.unstack("bin", fill_value=0).reindex(years, fill_value=0)
    fractions = {
        int(b): YearlySeries(f"size_fraction_{int(b)}{'+' if int(b) == size_cap else ''}",
                             years, table[b].to_numpy(dtype=np.float64) / total_values, bounded=True)
        for b in table.columns
    }

    multi = df[df["size"] >= 2].groupby("year")["count"].sum().reindex(years, fill_value=0)
    return EventSeries(
        event_count=YearlySeries("event_count", years, total_values),
        size_fractions=fractions,
        stats=stats,
        multi_member_fraction=YearlySeries("multi_member_fraction", years,
                                           multi.to_numpy(dtype=np.float64) / total_values, bounded=True),
        size_cap=size_cap,
    )


# =============================================================================
# 인구 보정
# =============================================================================

def interpolate_population(table: PopulationTable, year: Union[int, float, np.ndarray]):
    """앵커 사이 선형 보간 (앵커 범위 밖은 PopulationRangeError, 외삽 없음)"""
    query = np.asarray(year, dtype=np.float64)
    lo, hi = table.support
    if np.any(query < lo) or np.any(query > hi):
        bad = query[(query < lo) | (query > hi)] if query.ndim else query
        raise PopulationRangeError(
            f"인구 앵커 범위 [{lo}, {hi}] 밖의 연도",
            {"years": np.atleast_1d(bad).astype(int).tolist()[:20], "support": [lo, hi]}
        )
    result = np.interp(query, table.years.astype(np.float64), table.populations)
    return float(result) if result.ndim == 0 else result


def per_capita(series: YearlySeries, table: PopulationTable) -> YearlySeries:
    """값 / 해당 연도 인구"""
    if len(series) == 0:
        return series.renamed(f"{series.name}_per_capita")
    population = interpolate_population(table, series.years)
    return YearlySeries(f"{series.name}_per_capita", series.years, series.values / population)


# =============================================================================
# 표 변환
# =============================================================================

def series_frame(series_list: Sequence[YearlySeries]) -> pd.DataFrame:
    """여러 시계열을 연도 기준 외부 조인한 표 (year 열 + 시계열 이름 열)"""
    frame = pd.DataFrame({"year": pd.Series(dtype=np.int64)})
    for s in series_list:
        column = pd.DataFrame({"year": s.years, s.name: s.values})
        frame = frame.merge(column, on="year", how="outer")
    return frame.sort_values("year").reset_index(drop=True)
