"""
=====================================================================
에포크 분석 모듈
=====================================================================
역사적 에포크(전쟁, 전간기 등) 구간에서 임의의 연도별 시계열이
기준 추세 대비 얼마나 감소했는지, 언제 회복했는지,
얼마나 초과 성장했는지를 계산

기준 추세:
- log-linear: 에포크 직전 window 년의 log(값)에 대한 최소제곱 직선
- mean: 같은 구간의 평균값

모든 계산은 무상태 함수이며 셀(시계열 × 에포크) 단위로 독립적
=====================================================================
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from config import config
from exceptions import CollabNetBaseException, InsufficientDataError
from logging_config import get_logger
from series import YearlySeries

logger = get_logger("epoch_analysis")


@dataclass(frozen=True)
class EpochDefinition:
    name: str
    start: int
    end: int  # 포함

    def __post_init__(self):
        if not self.name:
            raise ValueError("에포크 이름이 비어 있음")
        if self.start >= self.end:
            raise ValueError(f"에포크 '{self.name}': start({self.start}) < end({self.end}) 이어야 함")

    @property
    def years(self) -> np.ndarray:
        return np.arange(self.start, self.end + 1)

    def shifted(self, offset: int) -> "EpochDefinition":
        return EpochDefinition(self.name, self.start + offset, self.end + offset)


DEFAULT_EPOCHS: Tuple[EpochDefinition, ...] = (
    EpochDefinition("La Belle Epoque", 1890, 1914),
    EpochDefinition("WWI", 1914, 1918),
    EpochDefinition("Interwar", 1918, 1939),
    EpochDefinition("WWII", 1939, 1945),
    EpochDefinition("Post-War", 1945, 1960),
)


def find_epoch(name: str, epochs: Iterable[EpochDefinition] = DEFAULT_EPOCHS) -> Optional[EpochDefinition]:
    """이름(대소문자 무시)으로 에포크 조회"""
    wanted = name.strip().lower()
    for epoch in epochs:
        if epoch.name.lower() == wanted:
            return epoch
    return None


class BaselineKind(str, Enum):
    LOG_LINEAR = "log-linear"
    MEAN = "mean"


@dataclass(frozen=True)
class BaselineModel:
    window: Tuple[int, int]  # 적합에 사용한 [시작, 끝] 연도
    n_years: int
    slope: float
    intercept: float
    kind: BaselineKind
    origin: int  # log-linear 직선의 x = year - origin

    def predict(self, years) -> np.ndarray:
        t = np.asarray(years, dtype=np.float64)
        if self.kind is BaselineKind.MEAN:
            return np.full(t.shape, self.intercept)
        return np.exp(self.intercept + self.slope * (t - self.origin))


@dataclass(frozen=True)
class EpochReport:
    epoch: EpochDefinition
    series_name: str
    status: str = "ok"
    decline_pct: Optional[float] = None
    mean_decline_pct: Optional[float] = None
    recovery_years: Optional[int] = None
    recovered: bool = False
    excess_growth_pct: Optional[float] = None
    baseline: Optional[BaselineModel] = None

    @property
    def recovery_label(self) -> str:
        if self.status != "ok":
            return ""
        return str(self.recovery_years) if self.recovered else "not recovered"

    def as_row(self) -> Dict[str, object]:
        base = self.baseline
        return {
            "series": self.series_name,
            "epoch": self.epoch.name,
            "epoch_start": self.epoch.start,
            "epoch_end": self.epoch.end,
            "status": self.status,
            "decline_pct": self.decline_pct,
            "mean_decline_pct": self.mean_decline_pct,
            "recovery_years": self.recovery_label,
            "excess_growth_pct": self.excess_growth_pct,
            "baseline_kind": base.kind.value if base else "",
            "baseline_start": base.window[0] if base else None,
            "baseline_end": base.window[1] if base else None,
            "baseline_slope": base.slope if base else None,
            "baseline_intercept": base.intercept if base else None,
        }


# =============================================================================
# 기준 추세
# =============================================================================

def fit_baseline(
    series: YearlySeries,
    epoch: EpochDefinition,
    window: int = config.BASELINE_WINDOW,
    kind: BaselineKind = BaselineKind.LOG_LINEAR,
    min_years: int = config.BASELINE_MIN_YEARS,
) -> BaselineModel:
    """에포크 직전 window 년으로 기준 추세를 적합"""
    kind = BaselineKind(kind)
    pre = series.window(epoch.start - window, epoch.start - 1)
    usable = pre.values > 0 if kind is BaselineKind.LOG_LINEAR else np.ones(len(pre), dtype=bool)
    years, values = pre.years[usable], pre.values[usable]

    if years.size < min_years:
        first = int(series.years[0]) if len(series) else None
        raise InsufficientDataError(
            f"'{series.name}'의 에포크 '{epoch.name}' 이전 데이터 부족 "
            f"({years.size}/{min_years}년, 첫 가용 연도 {first})",
            {"series": series.name, "epoch": epoch.name, "populated_years": int(years.size),
             "first_available_year": first}
        )

    span = (int(years[0]), int(years[-1]))
    if kind is BaselineKind.MEAN:
        return BaselineModel(span, int(years.size), 0.0, float(values.mean()), kind, epoch.start)

    x = (years - epoch.start).astype(np.float64)
    slope, intercept = np.polyfit(x, np.log(values), 1)
    return BaselineModel(span, int(years.size), float(slope), float(intercept), kind, epoch.start)


def _epoch_ratio(series: YearlySeries, epoch: EpochDefinition, baseline: BaselineModel) -> np.ndarray:
    inside = series.window(epoch.start, epoch.end)
    if len(inside) == 0:
        raise InsufficientDataError(
            f"'{series.name}'에 에포크 '{epoch.name}' 구간 데이터가 없음",
            {"series": series.name, "epoch": epoch.name}
        )
    return inside.values / baseline.predict(inside.years)


def disruption_magnitude(series: YearlySeries, epoch: EpochDefinition, baseline: BaselineModel,
                         mode: str = "trough") -> float:
    """기준 대비 감소율(%) - trough는 최저 연도, mean은 에포크 평균"""
    ratio = _epoch_ratio(series, epoch, baseline)
    if mode == "trough":
        return float(100.0 * (1.0 - ratio.min()))
    if mode == "mean":
        return float(100.0 * (1.0 - ratio.mean()))
    raise ValueError(f"알 수 없는 감소율 모드: {mode}")


def recovery_time(series: YearlySeries, epoch: EpochDefinition, baseline: BaselineModel,
                  tolerance_pct: float = config.RECOVERY_TOLERANCE) -> Optional[int]:
    """에포크 종료 후 기준 추세의 (1 - tolerance)배에 처음 도달하기까지의 연수 (None = 미회복)"""
    after = series.where(series.years >= epoch.end)
    if len(after) == 0:
        return None
    reached = after.values >= (1.0 - tolerance_pct) * baseline.predict(after.years)
    hits = np.flatnonzero(reached)
    if hits.size == 0:
        return None
    return int(after.years[hits[0]] - epoch.end)


def excess_growth(series: YearlySeries, epoch: EpochDefinition, baseline: BaselineModel) -> float:
    """에포크 평균 (관측/기준 - 1) × 100"""
    ratio = _epoch_ratio(series, epoch, baseline)
    return float(100.0 * (ratio.mean() - 1.0))


# =============================================================================
# 리포트 행렬
# =============================================================================

def evaluate_epoch(
    series: YearlySeries,
    epoch: EpochDefinition,
    window: int = config.BASELINE_WINDOW,
    kind: BaselineKind = BaselineKind.LOG_LINEAR,
    tolerance_pct: float = config.RECOVERY_TOLERANCE,
    min_years: int = config.BASELINE_MIN_YEARS,
) -> EpochReport:
    """시계열 하나 × 에포크 하나 셀 평가 (실패는 status로 기록)"""
    if len(series) == 0 or epoch.end < series.years[0] or epoch.start > series.years[-1]:
        return EpochReport(epoch, series.name, status="no data")
    try:
        baseline = fit_baseline(series, epoch, window, kind, min_years)
        recovery = recovery_time(series, epoch, baseline, tolerance_pct)
        return EpochReport(
            epoch=epoch,
            series_name=series.name,
            decline_pct=disruption_magnitude(series, epoch, baseline, "trough"),
            mean_decline_pct=disruption_magnitude(series, epoch, baseline, "mean"),
            recovery_years=recovery,
            recovered=recovery is not None,
            excess_growth_pct=excess_growth(series, epoch, baseline),
            baseline=baseline,
        )
    except InsufficientDataError as e:
        logger.info("에포크 셀 건너뜀", extra_data={"reason": e.message},
                    series_name=series.name, epoch=epoch.name)
        return EpochReport(epoch, series.name, status="insufficient baseline")
    except Exception as e:
        message = e.message if isinstance(e, CollabNetBaseException) else str(e)
        logger.warning("에포크 셀 실패", extra_data={"error": message},
                       series_name=series.name, epoch=epoch.name)
        return EpochReport(epoch, series.name, status=f"error: {e.__class__.__name__}")


def epoch_report_matrix(
    series_set: Sequence[YearlySeries],
    epoch_set: Sequence[EpochDefinition] = DEFAULT_EPOCHS,
    window: int = config.BASELINE_WINDOW,
    kind: BaselineKind = BaselineKind.LOG_LINEAR,
    tolerance_pct: float = config.RECOVERY_TOLERANCE,
    workers: int = 1,
    min_years: int = config.BASELINE_MIN_YEARS,
) -> List[EpochReport]:
    """시계열 × 에포크 전체 교차곱 (시계열 순서, 에포크 순서 유지)"""
    cells = [(s, e) for s in series_set for e in epoch_set]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda c: evaluate_epoch(c[0], c[1], window, kind, tolerance_pct, min_years), cells))
    return [evaluate_epoch(s, e, window, kind, tolerance_pct, min_years) for s, e in cells]


def epoch_report_frame(reports: Sequence[EpochReport]) -> pd.DataFrame:
    columns = list(EpochReport(DEFAULT_EPOCHS[0], "").as_row().keys())
    return pd.DataFrame([r.as_row() for r in reports], columns=columns)
