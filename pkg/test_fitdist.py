"""
분포 피팅 테스트
멱법칙 지수 복원, Weibull 형상 복원(연속/이산/중도절단), 프로파일 우도 미분,
2구간 성장 지수, 연도별 파라미터 변화, 척도·순서 불변성, 경력 형상 왕복
"""
import numpy as np

from core_graph import ProjectEvent, build_graph
from debug_oracle import random_fixture
from exceptions import DegenerateDistributionError, FitInputError, InsufficientDataError
from fitdist import (
    edge_addition_samples, fit_growth, fit_power_law, fit_weibull, parameter_evolution,
    weibull_profile_loglik, weibull_profile_score,
)
from series import YearlySeries
from synthgen import generate, sample_weibull


def test_power_law_recovers_exponent():
    rng = np.random.default_rng(101)
    for gamma in (1.6, 2.1):
        samples = rng.zipf(gamma, size=20000)
        fit = fit_power_law(samples, xmin=1, min_samples=50)
        assert abs(fit.gamma - gamma) <= 0.1, (gamma, fit.gamma)
        assert fit.n_samples == samples.size
        assert 0.0 <= fit.gof.ks_stat < 0.05
        assert fit.gof.dof >= 1


def test_power_law_recovers_exponent_with_upper_cutoff():
    rng = np.random.default_rng(5)
    samples = rng.zipf(2.1, size=30000)
    samples = samples[samples <= 40]
    fit = fit_power_law(samples, xmin=1, xmax=40, min_samples=50)
    assert abs(fit.gamma - 2.1) <= 0.1
    assert fit.xmax == 40


def test_power_law_input_errors():
    try:
        fit_power_law([1, 2, 0, 3], min_samples=1)
        assert False, "0 이하 표본은 오류여야 함"
    except FitInputError:
        pass
    try:
        fit_power_law([1, 2, 3], min_samples=50)
        assert False, "표본 부족은 오류여야 함"
    except InsufficientDataError as e:
        assert e.details["n_samples"] == 3
    try:
        fit_power_law([1] * 100, min_samples=50)
        assert False, "모든 표본이 xmin이면 꼬리가 없음"
    except DegenerateDistributionError:
        pass


def test_power_law_xmin_scan_prefers_tail():
    rng = np.random.default_rng(9)
    tail = rng.zipf(2.1, size=20000)
    tail = tail[tail >= 3]
    noise = rng.integers(1, 3, size=4000)
    fit = fit_power_law(np.concatenate([tail, noise]), scan_xmin=True, min_samples=1000)
    assert fit.xmin >= 3
    assert abs(fit.gamma - 2.1) <= 0.15


def test_edge_addition_exponent_from_generator():
    """참여 상한 1이면 멤버별 신규 파트너 수가 곧 팀 크기 - 1"""
    scenario = {
        "seed": 3,
        "years": (1950, 1954),
        "growth": {"alpha": 0.0, "scale": 1500.0},
        "team_size": {"kind": "edge_power_law", "gamma": 2.1, "min_size": 2, "max_size": 30},
        "career": {"weibull_k": 1.0, "weibull_lambda": 5.0},
        "entrant_share": 1.0,
        "participation_cap": 1,
    }
    graph = build_graph(generate(scenario).events, tau_project=0)
    samples = edge_addition_samples(graph, 1952)
    assert samples.min() >= 1 and samples.max() <= 29

    evolution = parameter_evolution(graph, "power_law", xmax=29, min_samples=50)
    assert sorted(evolution.fits) == list(range(1950, 1955))
    for year, fit in evolution.fits.items():
        assert abs(fit.gamma - 2.1) <= 0.1, (year, fit.gamma)


def test_weibull_recovers_shape_continuous():
    rng = np.random.default_rng(42)
    for k in (0.2, 0.5):
        durations = 10.0 * rng.weibull(k, size=8000)
        fit = fit_weibull(durations, min_samples=50)
        assert abs(fit.k - k) <= 0.03, (k, fit.k)
        assert fit.n_censored == 0 and not fit.discrete


def test_weibull_recovers_shape_discrete():
    rng = np.random.default_rng(8)
    durations = sample_weibull(0.5, 20.0, rng, size=8000)
    fit = fit_weibull(durations, discrete=True, min_samples=50)
    assert abs(fit.k - 0.5) <= 0.03
    assert fit.discrete
    try:
        fit_weibull([1.5] * 60, discrete=True, min_samples=50)
        assert False, "이산 피팅에 정수가 아닌 기간은 오류여야 함"
    except FitInputError:
        pass


def test_weibull_with_right_censoring():
    rng = np.random.default_rng(13)
    raw = 10.0 * rng.weibull(0.5, size=8000)
    censored = raw > 15.0
    durations = np.minimum(raw, 15.0)
    fit = fit_weibull(durations, censored, min_samples=50)
    assert abs(fit.k - 0.5) <= 0.03
    assert fit.n_censored == int(censored.sum())

    try:
        fit_weibull(durations, censored[:-1], min_samples=50)
        assert False, "마스크 길이 불일치는 오류여야 함"
    except FitInputError:
        pass


def test_weibull_profile_score_matches_numeric_gradient():
    rng = np.random.default_rng(77)
    durations = 5.0 * rng.weibull(0.7, size=400)
    censored = rng.random(400) < 0.2
    for k in np.linspace(0.1, 3.0, 20):
        h = 1e-5 * k
        numeric = (weibull_profile_loglik(k + h, durations, censored)
                   - weibull_profile_loglik(k - h, durations, censored)) / (2 * h)
        analytic = weibull_profile_score(k, durations, censored)
        assert abs(numeric - analytic) <= 1e-6 * max(1.0, abs(analytic)), (k, numeric, analytic)


def test_weibull_degenerate_and_insufficient():
    try:
        fit_weibull([3.0] * 100, min_samples=50)
        assert False, "모든 기간이 같으면 퇴화"
    except DegenerateDistributionError:
        pass
    try:
        fit_weibull([1.0, 2.0, 3.0], min_samples=50)
        assert False, "표본 부족"
    except InsufficientDataError:
        pass


def _growth_series(alpha1=2.3, alpha2=3.1, start=1900, breakpoint=1930, end=1960, noise=0.0, seed=0):
    years = np.arange(start, end + 1)
    x = (years - start + 1).astype(np.float64)
    xb = float(breakpoint - start + 1)
    values = np.where(years < breakpoint, x ** alpha1, xb ** (alpha1 - alpha2) * x ** alpha2)
    if noise:
        values = values * np.exp(np.random.default_rng(seed).normal(0.0, noise, years.size))
    return YearlySeries("nodes_cumulative", years, 50.0 * values)


def test_growth_recovers_exponents_and_breakpoint():
    fit = fit_growth(_growth_series(noise=0.002, seed=4), t0=1900)
    assert abs(fit.alpha1 - 2.3) <= 0.1
    assert abs(fit.alpha2 - 3.1) <= 0.1
    assert abs(fit.breakpoint_year - 1930) <= 1
    assert fit.n_points == 61

    predicted = fit.predict([1910, 1950])
    actual = _growth_series(noise=0.002, seed=4)
    assert np.all(np.abs(np.log(predicted) - np.log([actual[1910], actual[1950]])) < 0.05)


def test_growth_equivariance():
    base = _growth_series(noise=0.02, seed=6)
    fit = fit_growth(base, t0=1900)

    scaled = fit_growth(YearlySeries(base.name, base.years, 7.5 * base.values), t0=1900)
    assert abs(scaled.alpha1 - fit.alpha1) <= 1e-9
    assert abs(scaled.alpha2 - fit.alpha2) <= 1e-9
    assert scaled.breakpoint_year == fit.breakpoint_year

    shifted = fit_growth(YearlySeries(base.name, base.years + 50, base.values), t0=1950)
    assert abs(shifted.alpha1 - fit.alpha1) <= 1e-9
    assert abs(shifted.alpha2 - fit.alpha2) <= 1e-9
    assert shifted.breakpoint_year == fit.breakpoint_year + 50


def test_growth_drops_nonpositive_and_requires_years():
    series = _growth_series()
    values = series.values.copy()
    values[[3, 40]] = 0.0
    fit = fit_growth(YearlySeries(series.name, series.years, values), t0=1900)
    assert fit.dropped_years == (1903, 1940)
    assert fit.n_points == 59

    try:
        fit_growth(_growth_series(end=1915, breakpoint=1908), t0=1900)
        assert False, "연도 부족은 오류여야 함"
    except InsufficientDataError as e:
        assert e.details["populated_years"] == 16


def test_parameter_evolution_records_skips_and_flags():
    rng = np.random.default_rng(31)
    graph = build_graph(random_fixture(rng, n_events=600, n_nodes=120, years=(1960, 2000)), tau_project=2)
    evolution = parameter_evolution(graph, "weibull", "pair_start", censoring=True, min_samples=20)

    cohorts = set(int(y) for y in np.unique(graph.timeline_start_years()))
    assert set(evolution.fits) | {s.year for s in evolution.skips} == cohorts
    assert not set(evolution.fits) & {s.year for s in evolution.skips}
    assert all(s.reason in ("insufficient_data", "degenerate", "no_convergence", "invalid_input")
               for s in evolution.skips)
    assert all(y > graph.dataset_end - 10 for y in evolution.censor_flagged)
    assert evolution.fits, "일부 코호트는 피팅되어야 함"

    frame = evolution.to_frame()
    assert frame["year"].tolist() == sorted(evolution.fits)
    assert set(evolution.parameter_series()) == {"weibull_k", "weibull_lambda", "chi2_per_dof"}

    parallel = parameter_evolution(graph, "weibull", "pair_start", censoring=True, min_samples=20, workers=3)
    assert parallel.to_frame().equals(frame)
    assert parallel.skips_frame().equals(evolution.skips_frame())


def test_parameter_evolution_rejects_unknown_cohorting():
    graph = build_graph(random_fixture(np.random.default_rng(1), n_events=30))
    for kind, cohorting in (("power_law", "pair_start"), ("weibull", "decade"), ("gamma", None)):
        try:
            parameter_evolution(graph, kind, cohorting)
            assert False, f"{kind}/{cohorting} 조합은 오류여야 함"
        except ValueError:
            pass


def _career_scenario(k):
    """크기 2 이벤트, 경력 마지막 해 등장 강제: 노드 수명이 곧 추출한 경력"""
    return {
        "seed": 23,
        "years": (1900, 1940),
        "growth": {"alpha": 0.0, "scale": 1000.0},
        "team_size": {"kind": "fixed", "size": 2},
        "career": {"weibull_k": k, "weibull_lambda": 5.0, "schedule_exit": True},
        "entrant_share": 0.5,
    }


def test_planted_career_shape_round_trip():
    for k in (0.2, 0.5):
        graph = build_graph(generate(_career_scenario(k)).events, tau_project=0)
        evolution = parameter_evolution(graph, "weibull", "node_entry", censoring=True, discrete=True)
        cohorts = [y for y in range(1901, 1926) if y in evolution.fits]
        assert len(cohorts) == 25, evolution.skips
        errors = np.array([evolution.fits[y].k - k for y in cohorts])
        assert abs(errors.mean()) <= 0.03, (k, errors.mean())
        assert np.abs(errors).max() <= 0.12, (k, errors)
        assert all(evolution.fits[y].discrete for y in cohorts)


def test_weibull_scale_equivariance():
    rng = np.random.default_rng(61)
    for k in (0.3, 0.8, 2.5):
        durations = 7.0 * rng.weibull(k, size=2000)
        censored = rng.random(2000) < 0.15
        base = fit_weibull(durations, censored, min_samples=50)
        for c in (1e-3, 0.5, 3.0, 1e4):
            scaled = fit_weibull(c * durations, censored, min_samples=50)
            assert abs(scaled.k - base.k) <= 1e-6, (k, c)
            assert abs(scaled.lam / (c * base.lam) - 1.0) <= 1e-6, (k, c)


def test_power_law_invariant_to_order_and_duplication():
    rng = np.random.default_rng(71)
    samples = rng.zipf(2.1, size=5000)
    samples = samples[samples <= 60]
    base = fit_power_law(samples, xmax=60, min_samples=50)
    shuffled = fit_power_law(rng.permutation(samples), xmax=60, min_samples=50)
    doubled = fit_power_law(np.concatenate([samples, samples]), xmax=60, min_samples=50)
    assert abs(shuffled.gamma - base.gamma) <= 1e-6
    assert abs(doubled.gamma - base.gamma) <= 1e-6
    assert doubled.n_samples == 2 * base.n_samples


def test_weibull_chi_square_per_dof_near_one():
    """모형이 맞으면 코호트의 90% 이상에서 χ²/dof ∈ [0.5, 2]"""
    rng = np.random.default_rng(83)
    ratios = []
    for _ in range(40):
        durations = 4.0 * rng.weibull(0.6, size=3000)
        fit = fit_weibull(durations, min_samples=50, bins=30)
        assert fit.gof.dof == 27
        ratios.append(fit.gof.chi2_per_dof)
    inside = sum(0.5 <= r <= 2.0 for r in ratios)
    assert inside >= 36, ratios


def _edge_scenario(seed, years, gamma):
    return {
        "seed": seed,
        "years": years,
        "growth": {"alpha": 0.0, "scale": 2000.0},
        "team_size": {"kind": "edge_power_law", "gamma": gamma, "min_size": 2, "max_size": 30},
        "career": {"weibull_k": 1.0, "weibull_lambda": 5.0},
        "entrant_share": 1.0,
        "participation_cap": 1,
    }


def test_parameter_evolution_tracks_exponent_step():
    """30년째에 γ가 1.6 → 2.0으로 바뀌는 두 구간"""
    early = generate(_edge_scenario(41, (1950, 1979), 1.6))
    late = generate(_edge_scenario(42, (1980, 1999), 2.0))
    offset = early.truth.contributors
    shifted = [ProjectEvent.create(e.project_id, e.completion_year, [int(m) + offset for m in e.members])
               for e in late.events]
    graph = build_graph(early.events + shifted, tau_project=0)

    gamma = parameter_evolution(graph, "power_law", xmax=29, min_samples=50).parameter_series()["gamma"]
    before = gamma.window(1950, 1979).values
    after = gamma.window(1980, 1999).values
    assert before.size == 30 and after.size == 20
    assert after.mean() - before.mean() > 0.3, (before.mean(), after.mean())


def test_parameter_evolution_stable_exponent():
    graph = build_graph(generate(_edge_scenario(43, (1950, 1999), 2.1)).events, tau_project=0)
    gamma = parameter_evolution(graph, "power_law", xmax=29, min_samples=50).parameter_series()["gamma"]
    assert len(gamma) == 50
    assert float(np.std(gamma.values, ddof=1)) < 0.08
    assert abs(gamma.values.mean() - 2.1) <= 0.05


if __name__ == "__main__":
    print("분포 피팅 테스트 시작\n")
    for name, func in list(globals().items()):
        if name.startswith("test_") and callable(func):
            func()
            print(f"✓ {name}")
    print("\n모든 테스트 완료!")
