"""
연도별 시계열 테스트
노드/단년 경력/팀 크기 시계열, 인구 보정, 표 변환
"""
import math

import numpy as np

from core_graph import ProjectEvent, active_counts, build_graph
from debug_oracle import random_fixture
from exceptions import PopulationRangeError
from series import (
    PopulationTable, YearlySeries, active_count_series, event_series, interpolate_population,
    new_fraction_series, node_series, per_capita, series_frame, single_year_series,
)
from synthgen import generate


def _graph(tau=2):
    return build_graph([
        ProjectEvent.create("p1", 2000, [0, 1, 2]),
        ProjectEvent.create("p2", 2001, [1, 0]),
        ProjectEvent.create("p3", 2010, [1, 2]),
    ], tau_project=tau)


def test_node_series_contiguous_domain():
    nodes = node_series(_graph())
    assert nodes.new.years.tolist() == list(range(1998, 2011))
    assert nodes.new.to_dict()[1998] == 3.0
    assert sum(nodes.new.values) == 3.0
    assert np.all(nodes.cumulative_total.values == 3.0)
    active = nodes.active.to_dict()
    assert (active[1998], active[1999], active[2008], active[2005]) == (3.0, 2.0, 2.0, 0.0)


def test_new_fraction_skips_inactive_years():
    fraction = new_fraction_series(_graph())
    assert fraction.to_dict() == {1998: 1.0, 1999: 0.0, 2008: 0.0}
    assert fraction.bounded


def test_single_year_series():
    graph = build_graph([
        ProjectEvent.create("p1", 2000, [0, 1]),
        ProjectEvent.create("p2", 2000, [2, 3]),
        ProjectEvent.create("p3", 2003, [0, 4]),
    ], tau_project=0)
    single = single_year_series(graph)
    assert single.count.to_dict()[2000] == 3.0
    assert single.count.to_dict()[2003] == 1.0
    assert single.fraction.to_dict() == {2000: 0.75, 2003: 1.0}
    assert single.project_fraction.to_dict() == {2000: 0.75, 2003: 1.0}


def test_team_size_stats_and_mode_tie_break():
    events = [ProjectEvent.create(f"e{i}", 2000, range(size)) for i, size in enumerate([2, 3, 3, 2, 5])]
    events.append(ProjectEvent.create("solo", 2001, [0]))
    stats = {s.year: s for s in event_series(events).stats}
    assert stats[2000].mode == 2
    assert stats[2000].mean == 3.0
    assert stats[2000].max == 5
    assert stats[2001].mode == 1


def test_size_cap_bin_and_multi_member_fraction():
    events = [
        ProjectEvent.create("big", 1990, range(12)),
        ProjectEvent.create("ten", 1990, range(10)),
        ProjectEvent.create("solo", 1990, [0]),
        ProjectEvent.create("pair", 1990, [0, 1]),
    ]
    series = event_series(events, size_cap=10)
    assert series.size_fractions[10].name == "size_fraction_10+"
    assert series.size_fractions[10].to_dict() == {1990: 0.5}
    assert series.size_fractions[1].to_dict() == {1990: 0.25}
    assert series.multi_member_fraction.to_dict() == {1990: 0.75}
    assert series.event_count.to_dict() == {1990: 4.0}


def test_size_fractions_sum_to_one():
    rng = np.random.default_rng(21)
    events = random_fixture(rng, n_events=400, max_size=14)
    series = event_series(build_graph(events))
    total = sum(s.values for s in series.size_fractions.values())
    assert np.all(np.abs(total - 1.0) <= 1e-12)


def test_event_series_graph_matches_event_list():
    rng = np.random.default_rng(2)
    events = random_fixture(rng, n_events=150)
    from_graph = event_series(build_graph(events))
    from_list = event_series(events)
    assert from_graph.event_count.to_dict() == from_list.event_count.to_dict()
    assert from_graph.stats == from_list.stats


def test_active_count_series_matches_point_queries():
    rng = np.random.default_rng(8)
    graph = build_graph(random_fixture(rng, n_events=120), tau_project=3)
    nodes_live, edges_live = active_count_series(graph)
    for year in nodes_live.years:
        counts = active_counts(graph, int(year))
        assert nodes_live[int(year)] == counts.active_nodes
        assert edges_live[int(year)] == counts.active_edges


def test_population_interpolation_and_range():
    table = PopulationTable.from_mapping({1950: 2.5e9, 1900: 1.6e9})
    assert table.support == (1900, 1950)
    assert interpolate_population(table, 1925) == 2.05e9
    try:
        interpolate_population(table, 1960)
        assert False, "앵커 범위 밖은 오류여야 함"
    except PopulationRangeError as e:
        assert e.details["support"] == [1900, 1950]


def test_per_capita_round_trip():
    table = PopulationTable.from_mapping({1900: 1.6e9, 1950: 2.5e9, 2000: 6.1e9})
    rng = np.random.default_rng(4)
    years = np.arange(1900, 2001)
    series = YearlySeries("nodes_new", years, rng.uniform(1.0, 1e6, years.size))
    scaled = per_capita(series, table)
    assert scaled.name == "nodes_new_per_capita"
    restored = scaled.values * interpolate_population(table, years)
    assert np.all(np.abs(restored - series.values) <= 1e-12 * np.abs(series.values))


def test_yearly_series_validation():
    for years, values, bounded in (([2001, 2000], [1.0, 2.0], False), ([2000], [1.5], True), ([2000], [np.nan], False)):
        try:
            YearlySeries("bad", np.array(years), np.array(values), bounded)
            assert False, "잘못된 시계열이 허용됨"
        except ValueError:
            pass


def test_series_frame_outer_join():
    a = YearlySeries("a", np.array([2000, 2001]), np.array([1.0, 2.0]))
    b = YearlySeries("b", np.array([2001, 2003]), np.array([5.0, 6.0]))
    frame = series_frame([a, b])
    assert frame["year"].tolist() == [2000, 2001, 2003]
    assert np.isnan(frame.loc[0, "b"]) and np.isnan(frame.loc[2, "a"])
    assert frame.loc[1, "a"] == 2.0 and frame.loc[1, "b"] == 5.0


def test_planted_one_project_share():
    """경력 1년 확률 0.3으로 심은 참여자 비율이 τ=0 단년 비율로 복원됨"""
    scenario = {
        "seed": 29,
        "years": (1900, 1940),
        "growth": {"alpha": 0.0, "scale": 1000.0},
        "team_size": {"kind": "fixed", "size": 2},
        # P(D = 1) = 1 - exp(-1/λ) = 0.3
        "career": {"weibull_k": 1.0, "weibull_lambda": -1.0 / math.log(0.7), "schedule_exit": True},
        "entrant_share": 0.5,
    }
    single = single_year_series(build_graph(generate(scenario).events, tau_project=0))
    for series in (single.fraction, single.project_fraction):
        values = series.window(1901, 1935).values
        assert values.size == 35
        assert abs(values.mean() - 0.30) <= 0.02, (series.name, values.mean())
        assert np.all(np.abs(values - 0.30) <= 0.06), (series.name, values)


if __name__ == "__main__":
    print("시계열 테스트 시작\n")
    for name, func in list(globals().items()):
        if name.startswith("test_") and callable(func):
            func()
            print(f"✓ {name}")
    print("\n모든 테스트 완료!")
