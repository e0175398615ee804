"""
=====================================================================
분포 피팅 모듈
=====================================================================
1. 이산 멱법칙 P(k) ∝ k^-γ (k ≥ xmin, 선택적 xmax) 최대우도 추정
   - KS 통계량, 로그 구간 χ²
   - xmin 스캔 (KS 최소)
2. 2구간 멱법칙 성장 log(값) ~ log(t - t0 + 1), 분기점 전수 탐색
3. Weibull 협업 기간 분포
   - 형상 k의 프로파일 우도 score 방정식을 brentq로 풀고 λ는 닫힌 형태
   - 우측 중도절단(censoring) 지원
   - 정수 연도 기간용 이산 구간 우도 (P(D=d) = F(d) - F(d-1))
4. 연도/코호트별 파라미터 변화와 건너뛴 연도 기록
=====================================================================
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy import optimize, special

from config import config
from core_graph import TemporalGraph
from exceptions import (
    CollabNetBaseException, ConvergenceError, DegenerateDistributionError,
    FitInputError, InsufficientDataError,
)
from logging_config import get_logger
from series import YearlySeries

logger = get_logger("fitdist")

_GAMMA_BOUNDS = (1.0 + 1e-6, 12.0)
_MIN_EXPECTED = 5.0


@dataclass(frozen=True)
class GoodnessOfFit:
    chi2: float
    dof: int
    ks_stat: Optional[float] = None

    @property
    def chi2_per_dof(self) -> float:
        return self.chi2 / self.dof if self.dof > 0 else float("nan")


@dataclass(frozen=True)
class PowerLawFit:
    gamma: float
    xmin: int
    n_samples: int
    gof: GoodnessOfFit
    xmax: Optional[int] = None
    loglik: float = float("nan")

    def as_row(self) -> Dict[str, object]:
        return {"gamma": self.gamma, "xmin": self.xmin, "xmax": self.xmax, "n_samples": self.n_samples,
                "ks_stat": self.gof.ks_stat, "chi2": self.gof.chi2, "dof": self.gof.dof}


@dataclass(frozen=True)
class GrowthFit:
    alpha1: float
    alpha2: float
    breakpoint_year: int
    residual: float
    intercept1: float = 0.0
    intercept2: float = 0.0
    t0: int = 0
    n_points: int = 0
    dropped_years: Tuple[int, ...] = ()

    def predict(self, years) -> np.ndarray:
        t = np.asarray(years, dtype=np.float64)
        x = np.log(t - self.t0 + 1.0)
        left = t < self.breakpoint_year
        return np.exp(np.where(left, self.intercept1 + self.alpha1 * x, self.intercept2 + self.alpha2 * x))


@dataclass(frozen=True)
class WeibullFit:
    k: float
    lam: float
    n_samples: int
    gof: GoodnessOfFit
    n_censored: int = 0
    discrete: bool = False
    loglik: float = float("nan")

    def as_row(self) -> Dict[str, object]:
        return {"k": self.k, "lambda": self.lam, "n_samples": self.n_samples, "n_censored": self.n_censored,
                "discrete": self.discrete, "chi2": self.gof.chi2, "dof": self.gof.dof}


FitResult = Union[PowerLawFit, WeibullFit]


@dataclass(frozen=True)
class FitSkip:
    year: int
    reason: str
    n_samples: int
    message: str = ""


@dataclass
class ParameterEvolution:
    fit_kind: str
    cohorting: str
    fits: Dict[int, FitResult] = field(default_factory=dict)
    skips: List[FitSkip] = field(default_factory=list)
    censor_flagged: Tuple[int, ...] = ()

    def parameter_series(self) -> Dict[str, YearlySeries]:
        years = np.array(sorted(self.fits), dtype=np.int64)
        if self.fit_kind == "power_law":
            names = {"gamma": lambda f: f.gamma, "power_law_ks": lambda f: f.gof.ks_stat}
        else:
            names = {"weibull_k": lambda f: f.k, "weibull_lambda": lambda f: f.lam}
        out = {name: YearlySeries(f"{name}_{self.cohorting}", years,
                                  np.array([getter(self.fits[y]) for y in years], dtype=np.float64))
               for name, getter in names.items()}
        out["chi2_per_dof"] = YearlySeries(
            f"{self.fit_kind}_chi2_per_dof_{self.cohorting}", years,
            np.array([np.nan_to_num(self.fits[y].gof.chi2_per_dof) for y in years], dtype=np.float64))
        return out

    def to_frame(self) -> pd.DataFrame:
        rows = []
        for year in sorted(self.fits):
            rows.append({"year": year, "fit_kind": self.fit_kind, "cohorting": self.cohorting,
                         "censor_flagged": year in self.censor_flagged, **self.fits[year].as_row()})
        return pd.DataFrame(rows)

    def skips_frame(self) -> pd.DataFrame:
        return pd.DataFrame([{"fit_kind": self.fit_kind, "cohorting": self.cohorting, **asdict(s)} for s in self.skips],
                            columns=["fit_kind", "cohorting", "year", "reason", "n_samples", "message"])


# =============================================================================
# χ² 공통
# =============================================================================

def _chi_square(observed: np.ndarray, expected: np.ndarray, n_params: int) -> GoodnessOfFit:
    """기대 빈도가 5 미만인 인접 구간을 앞에서부터 합쳐 χ² 계산"""
    obs_bins: List[float] = []
    exp_bins: List[float] = []
    acc_o = acc_e = 0.0
    for o, e in zip(observed, expected):
        acc_o += float(o)
        acc_e += float(e)
        if acc_e >= _MIN_EXPECTED:
            obs_bins.append(acc_o)
            exp_bins.append(acc_e)
            acc_o = acc_e = 0.0
    if acc_e > 0 or acc_o > 0:
        if exp_bins:
            obs_bins[-1] += acc_o
            exp_bins[-1] += acc_e
        else:
            obs_bins.append(acc_o)
            exp_bins.append(acc_e)
    o = np.array(obs_bins)
    e = np.array(exp_bins)
    positive = e > 0
    chi2 = float(np.sum((o[positive] - e[positive]) ** 2 / e[positive]))
    return GoodnessOfFit(chi2=chi2, dof=max(1, int(positive.sum()) - 1 - n_params))


# =============================================================================
# 멱법칙
# =============================================================================

def edge_addition_samples(graph: TemporalGraph, year: int) -> np.ndarray:
    """해당 연도에 생성된 엣지가 있는 노드별 신규 엣지 수"""
    return np.asarray(graph.new_partner_counts(year), dtype=np.int64)


def _log_norm(gamma: float, xmin: int, xmax: Optional[int]) -> float:
    if xmax is not None:
        # 유한 합이므로 γ ≤ 1도 정의됨
        return float(special.logsumexp(-gamma * np.log(np.arange(xmin, xmax + 1, dtype=np.float64))))
    return math.log(special.zeta(gamma, xmin))


def _power_law_cdf(x: np.ndarray, gamma: float, xmin: int, xmax: Optional[int]) -> np.ndarray:
    """P(X ≤ x), x는 정수 배열"""
    x = np.asarray(x, dtype=np.int64)
    if xmax is not None:
        support = np.arange(xmin, xmax + 1, dtype=np.float64)
        cdf = np.cumsum(support ** -gamma)
        cdf /= cdf[-1]
        idx = np.clip(x - xmin, -1, xmax - xmin)
        return np.where(idx < 0, 0.0, cdf[np.maximum(idx, 0)])
    head = special.zeta(gamma, xmin)
    return (head - special.zeta(gamma, x.astype(np.float64) + 1.0)) / head


def _fit_power_law_fixed(x: np.ndarray, xmin: int, xmax: Optional[int]) -> PowerLawFit:
    n = x.size
    sum_log = float(np.log(x).sum())

    def nll(gamma: float) -> float:
        return gamma * sum_log + n * _log_norm(gamma, xmin, xmax)

    lower = _GAMMA_BOUNDS[0] if xmax is None else 1e-6
    res = optimize.minimize_scalar(nll, bounds=(lower, _GAMMA_BOUNDS[1]), method="bounded",
                                   options={"xatol": 1e-9, "maxiter": 500})
    if not res.success:
        raise ConvergenceError("멱법칙 지수 최적화 실패", {"message": str(res.message)})
    gamma = float(res.x)
    if gamma > _GAMMA_BOUNDS[1] - 1e-3:
        raise DegenerateDistributionError("멱법칙 지수가 상한에 도달함 (꼬리 없음)", {"gamma": gamma})

    values, counts = np.unique(x, return_counts=True)
    empirical = np.cumsum(counts) / n
    model = _power_law_cdf(values, gamma, xmin, xmax)
    before = np.concatenate([[0.0], empirical[:-1]])
    model_before = _power_law_cdf(values - 1, gamma, xmin, xmax)
    model_before[values == xmin] = 0.0
    ks = float(max(np.abs(empirical - model).max(), np.abs(before - model_before).max()))

    # 2배씩 커지는 로그 구간 [lo, hi)
    top = int(values[-1]) if xmax is None else xmax
    edges = np.unique(np.floor(xmin * 2.0 ** np.arange(0, math.log2(top / xmin + 1) + 2)).astype(np.int64))
    edges = edges[edges <= top + 1]
    if edges[-1] <= top:
        edges = np.append(edges, top + 1)
    observed = np.histogram(x, bins=edges)[0]
    cdf_hi = _power_law_cdf(edges[1:] - 1, gamma, xmin, xmax)
    cdf_lo = np.concatenate([[0.0], cdf_hi[:-1]])
    expected = n * (cdf_hi - cdf_lo)
    if xmax is None:
        # 관측 최대값 너머의 확률은 마지막 구간에 포함
        expected[-1] += n * (1.0 - cdf_hi[-1])
    gof = _chi_square(observed, expected, n_params=1)

    return PowerLawFit(gamma=gamma, xmin=xmin, n_samples=n, xmax=xmax, loglik=-float(res.fun),
                       gof=GoodnessOfFit(chi2=gof.chi2, dof=gof.dof, ks_stat=ks))


def fit_power_law(
    samples: Sequence[int],
    xmin: int = config.POWER_LAW_XMIN,
    xmax: Optional[int] = None,
    scan_xmin: bool = False,
    min_samples: int = config.MIN_FIT_SAMPLES,
) -> PowerLawFit:
    """이산 멱법칙 최대우도 피팅 (xmin 이상, xmax 이하 표본 사용)"""
    x = np.asarray(samples, dtype=np.int64)
    if x.size and x.min() < 1:
        raise FitInputError("멱법칙 표본은 1 이상의 정수여야 함", {"min": int(x.min())})
    if xmax is not None and xmax <= xmin:
        raise FitInputError("xmax는 xmin보다 커야 함", {"xmin": xmin, "xmax": xmax})

    if scan_xmin:
        candidates = np.unique(x)
        best: Optional[PowerLawFit] = None
        for candidate in candidates[:-1]:
            tail = x[(x >= candidate) & (x <= xmax if xmax is not None else True)]
            if tail.size < min_samples:
                break
            try:
                fit = fit_power_law(tail, int(candidate), xmax, False, min_samples)
            except (DegenerateDistributionError, InsufficientDataError, ConvergenceError):
                continue
            if best is None or fit.gof.ks_stat < best.gof.ks_stat:
                best = fit
        if best is None:
            raise InsufficientDataError("xmin 스캔에서 피팅 가능한 후보가 없음", {"n_samples": int(x.size)})
        return best

    mask = x >= xmin
    if xmax is not None:
        mask &= x <= xmax
    x = x[mask].astype(np.float64)
    if x.size < min_samples:
        raise InsufficientDataError(
            f"멱법칙 피팅 표본 부족 ({x.size}/{min_samples})",
            {"n_samples": int(x.size), "min_samples": min_samples}
        )
    if np.all(x == xmin):
        raise DegenerateDistributionError("모든 표본이 xmin과 같음 (꼬리 없음)", {"xmin": xmin, "n_samples": int(x.size)})
    return _fit_power_law_fixed(x, xmin, xmax)


# =============================================================================
# 성장 멱법칙 (2구간)
# =============================================================================

def _segment_sse(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """접두 구간 [0, i) 마다 직선 최소제곱 잔차 제곱합 (i = 0..n)"""
    zero = np.zeros(1)
    n = np.arange(x.size + 1, dtype=np.float64)
    sx = np.concatenate([zero, np.cumsum(x)])
    sy = np.concatenate([zero, np.cumsum(y)])
    sxx = np.concatenate([zero, np.cumsum(x * x)])
    sxy = np.concatenate([zero, np.cumsum(x * y)])
    syy = np.concatenate([zero, np.cumsum(y * y)])
    with np.errstate(divide="ignore", invalid="ignore"):
        cxx = sxx - sx * sx / n
        cxy = sxy - sx * sy / n
        cyy = syy - sy * sy / n
        sse = cyy - np.where(cxx > 0, cxy * cxy / cxx, 0.0)
    return np.maximum(np.nan_to_num(sse), 0.0)


def fit_growth(
    series: YearlySeries,
    t0: int,
    min_years: int = config.GROWTH_MIN_YEARS,
    min_segment: int = config.GROWTH_MIN_SEGMENT,
) -> GrowthFit:
    """log(값) ~ log(t - t0 + 1)의 2구간 최소제곱, 분기점은 총 잔차 최소"""
    usable = (series.values > 0) & (series.years - t0 + 1 > 0)
    dropped = tuple(int(y) for y in series.years[~usable])
    years = series.years[usable]
    if dropped:
        logger.info("성장 피팅에서 0 이하 값 제외", extra_data={"dropped_years": list(dropped)},
                    series_name=series.name)
    if years.size < max(min_years, 2 * min_segment):
        raise InsufficientDataError(
            f"성장 피팅 연도 부족 ({years.size}/{max(min_years, 2 * min_segment)})",
            {"series": series.name, "populated_years": int(years.size)}
        )

    x = np.log(years - t0 + 1.0)
    y = np.log(series.values[usable])
    left = _segment_sse(x, y)
    right = _segment_sse(x[::-1], y[::-1])[::-1]
    # 분기 인덱스 b: 왼쪽 [0, b), 오른쪽 [b, n)
    splits = np.arange(min_segment, years.size - min_segment + 1)
    totals = left[splits] + right[splits]
    b = int(splits[np.argmin(totals)])

    alpha1, c1 = np.polyfit(x[:b], y[:b], 1)
    alpha2, c2 = np.polyfit(x[b:], y[b:], 1)
    residual = float(np.sum((y[:b] - (c1 + alpha1 * x[:b])) ** 2) + np.sum((y[b:] - (c2 + alpha2 * x[b:])) ** 2))
    if not all(np.isfinite(v) for v in (alpha1, alpha2, c1, c2)):
        raise ConvergenceError("성장 지수가 유한하지 않음", {"series": series.name})

    return GrowthFit(
        alpha1=float(alpha1), alpha2=float(alpha2), breakpoint_year=int(years[b]),
        residual=residual, intercept1=float(c1), intercept2=float(c2), t0=t0,
        n_points=int(years.size), dropped_years=dropped,
    )


# =============================================================================
# Weibull
# =============================================================================

def _prepare_durations(durations, censored) -> Tuple[np.ndarray, np.ndarray]:
    x = np.asarray(durations, dtype=np.float64)
    if x.size and (np.any(~np.isfinite(x)) or np.any(x <= 0)):
        raise FitInputError("기간은 양의 유한수여야 함", {"n_invalid": int(np.count_nonzero(~(x > 0)))})
    if censored is None:
        mask = np.zeros(x.size, dtype=bool)
    else:
        mask = np.asarray(censored, dtype=bool)
        if mask.shape != x.shape:
            raise FitInputError("censored 마스크 길이가 기간 배열과 다름", {"n": int(x.size), "mask": int(mask.size)})
    return x, mask


def _profile_terms(k: float, log_x: np.ndarray, events: np.ndarray):
    """(r, log S, S'/S, L): S = Σ x^k, S' = Σ x^k ln x, L = Σ_uncensored ln x"""
    scaled = k * log_x
    log_s = special.logsumexp(scaled)
    weights = np.exp(scaled - log_s)
    return float(events.sum()), float(log_s), float(np.dot(weights, log_x)), float(log_x[events].sum())


def weibull_profile_loglik(k: float, durations, censored=None) -> float:
    """λ를 닫힌 형태(λ^k = S/r)로 소거한 형상 k의 프로파일 로그우도"""
    x, mask = _prepare_durations(durations, censored)
    r, log_s, _, total_log = _profile_terms(k, np.log(x), ~mask)
    return r * math.log(k) - r * (log_s - math.log(r)) + (k - 1.0) * total_log - r


def weibull_profile_score(k: float, durations, censored=None) -> float:
    """프로파일 로그우도의 k 미분: r/k - r·S'/S + L"""
    x, mask = _prepare_durations(durations, censored)
    r, _, ratio, total_log = _profile_terms(k, np.log(x), ~mask)
    return r / k - r * ratio + total_log


def _solve_shape(log_x: np.ndarray, events: np.ndarray, max_iter: int) -> float:
    def score(k: float) -> float:
        r, _, ratio, total_log = _profile_terms(k, log_x, events)
        return r / k - r * ratio + total_log

    lo, hi = 1e-3, 1.0
    for _ in range(60):
        if score(lo) > 0:
            break
        lo /= 2.0
    for _ in range(60):
        if score(hi) < 0:
            break
        hi *= 2.0
    if not (score(lo) > 0 > score(hi)):
        raise ConvergenceError("Weibull 형상 해 구간을 찾지 못함", {"lo": lo, "hi": hi})
    try:
        k, result = optimize.brentq(score, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps,
                                    maxiter=max_iter, full_output=True, disp=False)
    except (RuntimeError, ValueError) as e:
        raise ConvergenceError(f"Weibull 형상 해법 실패: {e}")
    if not result.converged:
        raise ConvergenceError(f"Weibull 형상 해법이 {max_iter}회 안에 수렴하지 않음",
                               {"iterations": result.iterations})
    return float(k)


def _weibull_interval_logpmf(d: np.ndarray, k: float, lam: float) -> np.ndarray:
    """log P(D = d) = log(S(d-1) - S(d)), S(x) = exp(-(x/λ)^k)"""
    a = ((d - 1.0) / lam) ** k
    b = (d / lam) ** k
    return -a + np.log(-np.expm1(-(b - a)))


def _fit_weibull_discrete(x: np.ndarray, censored: np.ndarray, start: Tuple[float, float],
                          max_iter: int) -> Tuple[float, float, float]:
    values, inverse = np.unique(x, return_inverse=True)
    exact = np.bincount(inverse[~censored], minlength=values.size).astype(np.float64)
    cens = np.bincount(inverse[censored], minlength=values.size).astype(np.float64)

    def nll(theta: np.ndarray) -> float:
        k, lam = math.exp(theta[0]), math.exp(theta[1])
        total = np.dot(exact, _weibull_interval_logpmf(values, k, lam))
        # 중도절단: 기간 ≥ d, 즉 log S(d-1)
        total -= np.dot(cens, ((values - 1.0) / lam) ** k)
        return -float(total)

    res = optimize.minimize(nll, x0=np.log(start), method="Nelder-Mead",
                            options={"xatol": 1e-10, "fatol": 1e-10, "maxiter": max_iter * 20})
    if not res.success:
        raise ConvergenceError("이산 Weibull 최적화 실패", {"message": str(res.message)})
    return math.exp(res.x[0]), math.exp(res.x[1]), -float(res.fun)


def fit_weibull(
    durations: Sequence[float],
    censored: Optional[Sequence[bool]] = None,
    discrete: bool = False,
    min_samples: int = config.MIN_FIT_SAMPLES,
    max_iter: int = config.WEIBULL_MAX_ITER,
    bins: int = 20,
) -> WeibullFit:
    """2모수 Weibull 최대우도 (censored=True인 표본은 생존항으로 기여)"""
    x, mask = _prepare_durations(durations, censored)
    events = ~mask
    if x.size < min_samples or events.sum() == 0:
        raise InsufficientDataError(
            f"Weibull 피팅 표본 부족 ({x.size}/{min_samples})",
            {"n_samples": int(x.size), "n_events": int(events.sum()), "min_samples": min_samples}
        )
    log_x = np.log(x)
    if np.all(log_x[events] == log_x[events][0]) and not mask.any():
        raise DegenerateDistributionError("모든 기간이 같음", {"value": float(x[0])})

    if discrete:
        if np.any(x != np.round(x)):
            raise FitInputError("이산 Weibull 기간은 정수여야 함")
        # 연속 근사 (구간 중앙)로 시작점을 잡음
        mid = np.maximum(x - 0.5, 0.5)
        k0 = _solve_shape(np.log(mid), events, max_iter)
        lam0 = math.exp((special.logsumexp(k0 * np.log(mid)) - math.log(events.sum())) / k0)
        k, lam, loglik = _fit_weibull_discrete(x, mask, (k0, lam0), max_iter)

        values, counts = np.unique(x[events], return_counts=True)
        support = np.arange(1, int(values[-1]) + 1, dtype=np.float64)
        observed = np.zeros(support.size)
        observed[values.astype(np.int64) - 1] = counts
        expected = events.sum() * np.exp(_weibull_interval_logpmf(support, k, lam))
        expected[-1] += events.sum() * math.exp(-((support[-1] / lam) ** k))
        gof = _chi_square(observed, expected, n_params=2)
    else:
        k = _solve_shape(log_x, events, max_iter)
        r = float(events.sum())
        lam = math.exp((special.logsumexp(k * log_x) - math.log(r)) / k)
        loglik = weibull_profile_loglik(k, x, mask)

        observed_x = x[events]
        n_bins = max(2, min(bins, observed_x.size // int(_MIN_EXPECTED)))
        if mask.any():
            # 중도절단 시 관측 구간(최대 비절단값 이하)에 조건부인 기대 빈도로 근사
            cap = 1.0 - math.exp(-((observed_x.max() / lam) ** k))
        else:
            cap = 1.0
        probs = np.linspace(0.0, cap, n_bins + 1)[1:-1]
        edges = lam * (-np.log1p(-probs)) ** (1.0 / k)
        observed = np.bincount(np.searchsorted(edges, observed_x, side="right"), minlength=n_bins)
        expected = np.full(n_bins, observed_x.size / n_bins)
        gof = _chi_square(observed, expected, n_params=2)

    return WeibullFit(k=float(k), lam=float(lam), n_samples=int(x.size), gof=gof,
                      n_censored=int(mask.sum()), discrete=discrete, loglik=float(loglik))


# =============================================================================
# 파라미터 변화
# =============================================================================

_SKIPPABLE = (InsufficientDataError, DegenerateDistributionError, ConvergenceError, FitInputError)


def _cohorts(graph: TemporalGraph, fit_kind: str, cohorting: str):
    """(코호트 연도 배열, 연도 → (표본, 중도절단 마스크)) 생성기"""
    if fit_kind == "power_law":
        if cohorting != "creation_year":
            raise ValueError(f"멱법칙은 creation_year 코호트만 지원: {cohorting}")
        years = np.unique(graph.ny_year)
        return years, lambda y: (edge_addition_samples(graph, int(y)), None)

    end = graph.dataset_end
    if cohorting == "pair_start":
        keys = graph.timeline_start_years()
        values = graph.pair_durations()
        still_active = graph.timeline_end_years() >= end if end is not None else np.zeros(keys.size, bool)
    elif cohorting == "node_entry":
        edged = graph.has_edges
        keys = graph.node_first[edged]
        values = (graph.node_last[edged] - graph.node_first[edged] + 1)
        still_active = graph.node_last[edged] >= end if end is not None else np.zeros(keys.size, bool)
    else:
        raise ValueError(f"알 수 없는 코호트 방식: {cohorting}")

    order = np.argsort(keys, kind="stable")
    keys, values, still_active = keys[order], values[order], still_active[order]
    years = np.unique(keys)

    def select(year):
        lo, hi = np.searchsorted(keys, year, "left"), np.searchsorted(keys, year, "right")
        return values[lo:hi], still_active[lo:hi]

    return years, select


def parameter_evolution(
    graph: TemporalGraph,
    fit_kind: str = "power_law",
    cohorting: Optional[str] = None,
    censoring: bool = False,
    discrete: bool = False,
    min_samples: int = config.MIN_FIT_SAMPLES,
    xmax: Optional[int] = None,
    workers: int = 1,
) -> ParameterEvolution:
    """연도(멱법칙) 또는 시작 코호트(Weibull)별 피팅 결과와 건너뛴 연도 기록"""
    if fit_kind not in ("power_law", "weibull"):
        raise ValueError(f"알 수 없는 피팅 종류: {fit_kind}")
    cohorting = cohorting or ("creation_year" if fit_kind == "power_law" else "pair_start")
    years, select = _cohorts(graph, fit_kind, cohorting)

    def fit_one(year) -> Tuple[int, Optional[FitResult], Optional[FitSkip]]:
        samples, still_active = select(year)
        try:
            if fit_kind == "power_law":
                return int(year), fit_power_law(samples, xmax=xmax, min_samples=min_samples), None
            mask = still_active if censoring else None
            return int(year), fit_weibull(samples, mask, discrete=discrete, min_samples=min_samples), None
        except _SKIPPABLE as e:
            reason = {
                InsufficientDataError: "insufficient_data",
                DegenerateDistributionError: "degenerate",
                ConvergenceError: "no_convergence",
                FitInputError: "invalid_input",
            }[type(e)]
            return int(year), None, FitSkip(int(year), reason, int(len(samples)), e.message)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(fit_one, years))
    else:
        outcomes = [fit_one(y) for y in years]

    result = ParameterEvolution(fit_kind=fit_kind, cohorting=cohorting)
    for year, fit, skip in outcomes:
        if fit is not None:
            result.fits[year] = fit
        else:
            result.skips.append(skip)
    if fit_kind == "weibull" and graph.dataset_end is not None:
        cutoff = graph.dataset_end - config.WEIBULL_COHORT_CENSOR_YEARS
        result.censor_flagged = tuple(y for y in sorted(result.fits) if y > cutoff)

    logger.info("파라미터 변화 피팅 완료", extra_data={
        "fit_kind": fit_kind, "cohorting": cohorting,
        "fitted": len(result.fits), "skipped": len(result.skips),
    }, operation="parameter_evolution")
    return result
