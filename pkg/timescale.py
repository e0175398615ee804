"""
특성 시간척도 계산 모듈
τ(t) = 누적량(t) / 그 해 증가량(t), 단위는 년
노드/엣지의 추가·제거 시간척도와 τ_N/τ_E 비율, 에포크 충격 반응을 계산
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np

from config import config
from core_graph import TemporalGraph
from epoch_analysis import EpochDefinition
from exceptions import InsufficientDataError, SeriesAlignmentError
from logging_config import get_logger
from series import YearlySeries, node_series

logger = get_logger("timescale")


@dataclass(frozen=True)
class TimescaleSeries:
    tau_node_add: YearlySeries
    tau_node_rem: YearlySeries
    tau_edge_add: YearlySeries
    tau_edge_rem: YearlySeries
    ratio: YearlySeries

    def as_list(self):
        return [self.tau_node_add, self.tau_node_rem, self.tau_edge_add, self.tau_edge_rem, self.ratio]


@dataclass(frozen=True)
class ShockResponse:
    epoch: str
    tau_node_change_pct: float
    tau_edge_change_pct: float


@dataclass(frozen=True)
class RatioReturn:
    """에포크 동안 τ_N/τ_E 비율의 이탈과 이후 기준선 복귀 여부"""
    epoch: str
    baseline_mean: float
    max_deviation_pct: float
    returned: bool
    return_years: Optional[int]


def timescale(total: YearlySeries, rate: YearlySeries, name: Optional[str] = None) -> YearlySeries:
    """total / rate, rate <= 0인 연도는 생략"""
    if not np.array_equal(total.years, rate.years):
        raise SeriesAlignmentError(
            f"연도 도메인 불일치: '{total.name}' vs '{rate.name}'",
            {"total_years": len(total), "rate_years": len(rate)}
        )
    mask = rate.values > 0
    return YearlySeries(
        name or f"tau_{total.name}",
        total.years[mask],
        total.values[mask] / rate.values[mask],
    )


def _stock_and_flow(event_years: np.ndarray, domain: np.ndarray, name: str):
    if domain.size == 0:
        empty = YearlySeries(name, domain, np.empty(0))
        return empty, empty
    flow = np.bincount(np.asarray(event_years, dtype=np.int64) - domain[0], minlength=domain.size)[:domain.size]
    flow = flow.astype(np.float64)
    return (YearlySeries(f"{name}_cumulative", domain, np.cumsum(flow)),
            YearlySeries(f"{name}_per_year", domain, flow))


def process_timescales(graph: TemporalGraph, censor_window: int = config.CENSOR_WINDOW) -> TimescaleSeries:
    """노드/엣지 추가·제거 시간척도 (제거 기반은 마지막 censor_window 년 생략)"""
    nodes = node_series(graph)
    domain = nodes.new.years

    removed_total, removed_rate = _stock_and_flow(graph.node_last[graph.has_edges], domain, "nodes_removed")
    edge_total, edge_rate = _stock_and_flow(graph.timeline_start_years(), domain, "timelines")
    ended_total, ended_rate = _stock_and_flow(graph.timeline_end_years(), domain, "timelines_ended")

    tau_node_add = timescale(nodes.cumulative_total, nodes.new, "tau_node_add")
    tau_edge_add = timescale(edge_total, edge_rate, "tau_edge_add")
    tau_node_rem = timescale(removed_total, removed_rate, "tau_node_rem")
    tau_edge_rem = timescale(ended_total, ended_rate, "tau_edge_rem")

    if graph.dataset_end is not None and censor_window > 0:
        cutoff = graph.dataset_end - censor_window
        tau_node_rem = tau_node_rem.where(tau_node_rem.years <= cutoff)
        tau_edge_rem = tau_edge_rem.where(tau_edge_rem.years <= cutoff)

    common, i_node, i_edge = np.intersect1d(tau_node_add.years, tau_edge_add.years, return_indices=True)
    ratio = YearlySeries("tau_ratio", common, tau_node_add.values[i_node] / tau_edge_add.values[i_edge])

    logger.debug("시간척도 계산 완료", extra_data={
        "years": int(domain.size), "ratio_years": int(common.size), "censor_window": censor_window
    }, operation="process_timescales")
    return TimescaleSeries(tau_node_add, tau_node_rem, tau_edge_add, tau_edge_rem, ratio)


def _window_mean(series: YearlySeries, start: int, end: int, min_years: int, label: str) -> float:
    part = series.window(start, end)
    if len(part) < min_years:
        raise InsufficientDataError(
            f"'{series.name}'의 {label} 구간 [{start}, {end}] 데이터 부족 ({len(part)}/{min_years}년)",
            {"series": series.name, "start": start, "end": end, "populated_years": len(part)}
        )
    return float(part.values.mean())


def shock_response(
    ts: TimescaleSeries,
    epoch: EpochDefinition,
    window: int = config.BASELINE_WINDOW,
    min_years: int = config.BASELINE_MIN_YEARS,
) -> ShockResponse:
    """에포크 평균 τ의 직전 window 년 평균 대비 변화율(%)"""
    changes: Dict[str, float] = {}
    for key, series in (("node", ts.tau_node_add), ("edge", ts.tau_edge_add)):
        before = _window_mean(series, epoch.start - window, epoch.start - 1, min_years, "기준")
        during = _window_mean(series, epoch.start, epoch.end, 1, "에포크")
        changes[key] = 100.0 * (during / before - 1.0)
    return ShockResponse(epoch.name, changes["node"], changes["edge"])


def timescale_ratio_baseline_return(
    ts: TimescaleSeries,
    epoch: EpochDefinition,
    tolerance_pct: float = config.RECOVERY_TOLERANCE,
    window: int = config.BASELINE_WINDOW,
    min_years: int = config.BASELINE_MIN_YEARS,
) -> RatioReturn:
    """에포크 중 비율의 최대 이탈(%)과 종료 후 기준 평균 ± tolerance 이내 복귀까지의 연수"""
    ratio = ts.ratio
    baseline = _window_mean(ratio, epoch.start - window, epoch.start - 1, min_years, "기준")
    during = ratio.window(epoch.start, epoch.end)
    if len(during) == 0:
        raise InsufficientDataError(f"에포크 '{epoch.name}' 구간에 비율 값이 없음", {"epoch": epoch.name})
    deviation = np.abs(during.values / baseline - 1.0)

    after = ratio.where(ratio.years >= epoch.end)
    within = np.flatnonzero(np.abs(after.values / baseline - 1.0) <= tolerance_pct)
    return_years = int(after.years[within[0]] - epoch.end) if within.size else None
    return RatioReturn(epoch.name, baseline, float(100.0 * deviation.max()), return_years is not None, return_years)
