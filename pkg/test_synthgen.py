"""
합성 생성기 테스트
결정성, 연도별 이벤트 수, Weibull 추출, 충격 배수, 참여 상한/부족분 대체, 이벤트 내 중복 없음, 경력 종료 배치, 시나리오 파일과 사이드카
"""
import math
import tempfile
from pathlib import Path

import numpy as np

from core_graph import build_graph
from exceptions import ScenarioValidationError
from fitdist import fit_growth
from ingest import truth_sidecar_path
from models import ShockConfig
from series import event_series, new_fraction_series
from synthgen import (
    dump_scenario, generate, load_scenario, load_truth, planned_event_counts, sample_weibull,
    shock_multipliers, validate_scenario, weibull_inverse_cdf, write_synthetic, year_rng,
)


def _scenario(**overrides):
    base = {
        "seed": 11,
        "years": (1950, 1960),
        "growth": {"alpha": 1.0, "scale": 20.0},
        "team_size": {"kind": "categorical", "sizes": [1, 2, 3, 4], "weights": [0.1, 0.4, 0.3, 0.2]},
        "career": {"weibull_k": 0.8, "weibull_lambda": 6.0},
        "entrant_share": 0.5,
        "shocks": [{"epoch": "WWI", "start": 1954, "end": 1956, "entry_multiplier": 0.6, "recovery_ramp_years": 2}],
    }
    base.update(overrides)
    return base


def test_single_event_scenario():
    run = generate(_scenario(
        years=(2000, 2000), growth={"alpha": 0.0, "scale": 1.0},
        team_size={"kind": "fixed", "size": 3}, entrant_share=1.0, shocks=[],
    ))
    assert len(run.events) == 1
    event = run.events[0]
    assert event.size == 3 and event.completion_year == 2000
    assert event.project_id == "s11-2000-0000000"
    assert run.truth.contributors == 3 and run.truth.events == 1


def test_generation_is_deterministic():
    first = generate(_scenario())
    second = generate(_scenario())
    assert first.events == second.events
    assert first.truth == second.truth
    other = generate(_scenario(seed=12))
    assert [e.members for e in other.events] != [e.members for e in first.events]

    a, b = year_rng(5, 1990).random(4), year_rng(5, 1990).random(4)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, year_rng(5, 1991).random(4))


def test_planned_event_counts_round_half_up_and_breakpoint():
    config = validate_scenario(_scenario(years=(2000, 2002), growth={"alpha": 1.0, "scale": 0.5}))
    assert planned_event_counts(config) == {2000: 1, 2001: 1, 2002: 2}

    config = validate_scenario(_scenario(
        years=(2000, 2004), growth={"alpha": 1.0, "scale": 2.0, "breakpoint": 2002, "alpha2": 2.0}))
    assert planned_event_counts(config) == {2000: 2, 2001: 4, 2002: 6, 2003: 11, 2004: 17}


def test_events_per_year_follow_plan_under_shocks():
    config = validate_scenario(_scenario())
    run = generate(config)
    counts = event_series(run.events).event_count.to_dict()
    assert counts == {y: float(n) for y, n in planned_event_counts(config).items() if n > 0}


def test_weibull_sampling_matches_closed_form():
    rng = np.random.default_rng(2024)
    exponential = sample_weibull(1.0, 10.0, rng, size=100000, continuous=True)
    assert abs(exponential.mean() - 10.0) <= 0.2

    draws = sample_weibull(0.2, 10.0, rng, size=1000000, continuous=True)
    for p in (0.1, 0.5, 0.9):
        quantile = weibull_inverse_cdf(1.0 - p, 0.2, 10.0)
        assert abs(np.mean(draws <= quantile) - p) <= 0.02 * p

    years = sample_weibull(0.5, 3.0, rng, size=1000)
    assert years.dtype == np.int64 and years.min() >= 1
    assert isinstance(sample_weibull(0.5, 3.0, rng), int)
    try:
        sample_weibull(0.0, 3.0, rng)
        assert False, "k <= 0은 오류여야 함"
    except ValueError:
        pass


def test_shock_multipliers_with_recovery_ramp():
    windows = [(ShockConfig(epoch="WWI", entry_multiplier=0.5, recovery_ramp_years=4), 1914, 1918),
               (ShockConfig(epoch="size", size_multiplier=2.0), 1916, 1917)]
    assert shock_multipliers(windows, 1913) == (1.0, 1.0)
    assert shock_multipliers(windows, 1916) == (0.5, 2.0)
    assert shock_multipliers(windows, 1918) == (0.5, 1.0)
    assert shock_multipliers(windows, 1920) == (0.75, 1.0)
    assert shock_multipliers(windows, 1922) == (1.0, 1.0)
    assert shock_multipliers(windows, 1923) == (1.0, 1.0)


def test_empty_pool_falls_back_to_entrants():
    run = generate(_scenario(
        years=(2000, 2000), growth={"alpha": 0.0, "scale": 5.0},
        team_size={"kind": "fixed", "size": 3}, entrant_share=0.1, shocks=[],
    ))
    members = [m for e in run.events for m in e.members]
    assert len(members) == 15 and len(set(members)) == 15
    assert run.truth.contributors == 15
    assert run.truth.pool_fallbacks > 0


def test_participation_cap_limits_events_per_year():
    run = generate(_scenario(participation_cap=1, entrant_share=0.3))
    by_year = {}
    for event in run.events:
        by_year.setdefault(event.completion_year, []).extend(event.members)
    for members in by_year.values():
        assert len(members) == len(set(members))


def test_members_are_distinct_within_event():
    """기존 참여자 풀이 작아도 한 이벤트에 같은 사람을 두 번 넣지 않음 (크기 유지)"""
    for cap in (None, 2):
        run = generate(_scenario(
            years=(1950, 1970), growth={"alpha": 0.0, "scale": 6.0},
            team_size={"kind": "fixed", "size": 3}, entrant_share=0.05,
            career={"weibull_k": 1.0, "weibull_lambda": 50.0}, participation_cap=cap, shocks=[],
        ))
        assert len(run.events) == 21 * 6
        assert all(event.size == 3 for event in run.events), cap


def test_schedule_exit_places_contributors_in_last_career_year():
    scenario = _scenario(
        years=(1950, 1980), growth={"alpha": 0.0, "scale": 200.0}, team_size={"kind": "fixed", "size": 2},
        career={"weibull_k": 0.8, "weibull_lambda": 6.0, "schedule_exit": True}, participation_cap=1, shocks=[],
    )
    run = generate(scenario)
    assert run == generate(scenario)
    by_year = {}
    first, last = {}, {}
    for event in run.events:
        by_year.setdefault(event.completion_year, []).extend(event.members)
        for m in event.members:
            first.setdefault(m, event.completion_year)
            last[m] = event.completion_year
    for members in by_year.values():
        assert len(members) == len(set(members))
    assert len(first) == run.truth.contributors
    assert run.truth.exit_overflow >= 0

    # 수명 1년 ⇔ 경력 1년: P(D = 1) = 1 - exp(-(1/λ)^k)
    cohort = [m for m in first if 1951 <= first[m] <= 1970]
    single = sum(1 for m in cohort if last[m] == first[m]) / len(cohort)
    assert abs(single - (1.0 - math.exp(-((1.0 / 6.0) ** 0.8)))) <= 0.03, single

    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "scenario.ini"
        path.write_text(dump_scenario(validate_scenario(scenario)), encoding="utf-8")
        assert "schedule_exit = true" in path.read_text(encoding="utf-8")
        assert load_scenario(path).career.schedule_exit is True


def test_entrant_share_is_recovered():
    run = generate({
        "seed": 9,
        "years": (1950, 1990),
        "growth": {"alpha": 0.0, "scale": 500.0},
        "team_size": {"kind": "fixed", "size": 2},
        "career": {"weibull_k": 1.0, "weibull_lambda": 20.0},
        "entrant_share": 0.6,
        "participation_cap": 1,
    })
    fraction = new_fraction_series(build_graph(run.events, tau_project=0)).window(1970, 1990)
    assert np.all(np.abs(fraction.values - 0.6) <= 0.05)
    assert abs(fraction.values.mean() - 0.6) <= 0.02


def test_planted_mean_team_size():
    run = generate(_scenario(
        years=(1950, 1970), growth={"alpha": 0.0, "scale": 200.0},
        team_size={"kind": "categorical", "sizes": [2, 3, 4, 5, 6], "weights": [0.2, 0.25, 0.25, 0.15, 0.15]},
        shocks=[],
    ))
    means = event_series(run.events).stats_series()["team_size_mean"].values
    assert np.all((means >= 3.2) & (means <= 4.5))


def test_planted_growth_regimes_are_recovered():
    run = generate(_scenario(
        years=(1800, 1919), growth={"alpha": 2.3, "scale": 0.05, "breakpoint": 1880, "alpha2": 3.1},
        team_size={"kind": "fixed", "size": 1}, shocks=[{"epoch": "WWI", "entry_multiplier": 0.48}],
    ))
    counts = event_series(run.events).event_count.window(1819, 1919)
    fit = fit_growth(counts, t0=1800)
    assert abs(fit.alpha1 - 2.3) <= 0.1
    assert abs(fit.alpha2 - 3.1) <= 0.1
    assert abs(fit.breakpoint_year - 1880) <= 1


def test_scenario_validation_errors():
    for overrides, field in (({"seed": -1}, "seed"), ({"entrant_share": 0.0}, "entrant_share"),
                             ({"team_size": {"kind": "fixed"}}, "team_size")):
        try:
            validate_scenario(_scenario(**overrides))
            assert False, f"{field} 오류가 허용됨"
        except ScenarioValidationError as e:
            assert e.details["fields"] and e.details["fields"][0].startswith(field)
    try:
        validate_scenario(_scenario(shocks=[{"epoch": "Cold War", "entry_multiplier": 0.5}]))
        assert False, "알 수 없는 에포크는 오류여야 함"
    except ScenarioValidationError as e:
        assert e.details["fields"] == ["shocks.0.epoch"]
    try:
        validate_scenario(_scenario(years=(-5, 10)))
        assert False, "음수 연도는 오류여야 함"
    except ScenarioValidationError:
        pass


def test_scenario_file_round_trip():
    config = validate_scenario(_scenario())
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "scenario.ini"
        path.write_text(dump_scenario(config), encoding="utf-8")
        assert load_scenario(path) == config

        missing = Path(tmp) / "missing.ini"
        try:
            load_scenario(missing)
            assert False, "없는 파일은 오류여야 함"
        except ScenarioValidationError:
            pass


def test_write_synthetic_and_truth_sidecar():
    run = generate(_scenario())
    with tempfile.TemporaryDirectory() as tmp:
        events_path, sidecar = write_synthetic(run, Path(tmp) / "events.jsonl")
        assert sidecar == truth_sidecar_path(events_path)
        assert sidecar.name == "events.truth.json"
        lines = events_path.read_text(encoding="utf-8").splitlines()
        assert len(lines) == len(run.events)

        truth = load_truth(sidecar)
        assert truth == run.truth
        assert truth.shock_windows == {"00_WWI": (1954, 1956)}
        assert truth.rng_algorithm == "PCG64"


if __name__ == "__main__":
    print("합성 생성기 테스트 시작\n")
    for name, func in list(globals().items()):
        if name.startswith("test_") and callable(func):
            func()
            print(f"✓ {name}")
    print("\n모든 테스트 완료!")
