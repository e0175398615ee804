"""
브루트포스 재계산 오라클
원시 이벤트 목록을 직접 훑어서 그래프/시계열 값을 다시 계산하고
벡터화 구현(core_graph, series)과 정확히 비교
"""
import itertools
from collections import defaultdict
from typing import Dict, List, Sequence, Set, Tuple

import numpy as np

from core_graph import ProjectEvent, active_counts, build_graph
from series import (
    YearlySeries, active_count_series, event_series, new_fraction_series, node_series, single_year_series,
)

Pair = Tuple[int, int]


def random_fixture(rng: np.random.Generator, n_events: int = 100, n_nodes: int = 40,
                   years: Tuple[int, int] = (1990, 2010), max_size: int = 6) -> List[ProjectEvent]:
    """작은 무작위 이벤트 묶음 (한 명짜리 프로젝트 포함)"""
    events = []
    for i in range(n_events):
        size = int(rng.integers(1, max_size + 1))
        members = rng.choice(n_nodes, size=size, replace=False)
        year = int(rng.integers(years[0], years[1] + 1))
        events.append(ProjectEvent.create(f"p{i}", year, members.tolist()))
    return events


def _multi(events: Sequence[ProjectEvent]) -> List[ProjectEvent]:
    return [e for e in events if e.size >= 2]


def naive_timelines(events: Sequence[ProjectEvent], tau: int) -> Dict[Pair, List[Tuple[int, int]]]:
    completions: Dict[Pair, Set[int]] = defaultdict(set)
    for event in _multi(events):
        for u, v in itertools.combinations(sorted(event.members), 2):
            completions[(u, v)].add(event.completion_year)
    out = {}
    for pair, years in completions.items():
        intervals: List[List[int]] = []
        for year in sorted(years):
            start, end = year - tau, year
            if intervals and start <= intervals[-1][1] + 1:
                intervals[-1][1] = max(intervals[-1][1], end)
            else:
                intervals.append([start, end])
        out[pair] = [(s, e) for s, e in intervals]
    return out


def naive_lifespans(events: Sequence[ProjectEvent], tau: int) -> Dict[int, Tuple[int, int]]:
    spans: Dict[int, Tuple[int, int]] = {}
    for event in _multi(events):
        for node in event.members:
            first, last = spans.get(node, (event.completion_year - tau, event.completion_year))
            spans[node] = (min(first, event.completion_year - tau), max(last, event.completion_year))
    return spans


def naive_durations(events: Sequence[ProjectEvent], tau: int) -> Dict[Pair, int]:
    return {pair: iv[-1][1] - iv[0][0] + 1 for pair, iv in naive_timelines(events, tau).items()}


def naive_active_counts(events: Sequence[ProjectEvent], tau: int, year: int) -> Tuple[int, int]:
    live = [pair for pair, iv in naive_timelines(events, tau).items() if any(s <= year <= e for s, e in iv)]
    nodes = {n for pair in live for n in pair}
    return len(nodes), len(live)


def naive_new_partners(events: Sequence[ProjectEvent], tau: int) -> Dict[Tuple[int, int], int]:
    """(노드, 생성 연도) → 그 해 엣지가 생성된 서로 다른 파트너 수"""
    partners: Dict[Tuple[int, int], Set[int]] = defaultdict(set)
    for event in _multi(events):
        created = event.completion_year - tau
        for u, v in itertools.combinations(event.members, 2):
            partners[(u, created)].add(v)
            partners[(v, created)].add(u)
    return {key: len(p) for key, p in partners.items()}


def naive_series(events: Sequence[ProjectEvent], tau: int, size_cap: int = 10) -> Dict[str, Dict[int, float]]:
    """이름 → {연도: 값} (series 모듈과 같은 이름 규칙)"""
    timelines = naive_timelines(events, tau)
    spans = naive_lifespans(events, tau)
    out: Dict[str, Dict[int, float]] = {}

    if timelines:
        lo = min(iv[0][0] for iv in timelines.values())
        hi = max(iv[-1][1] for iv in timelines.values())
        domain = range(lo, hi + 1)
        active_nodes: Dict[int, Set[int]] = defaultdict(set)
        for (node, year) in naive_new_partners(events, tau):
            active_nodes[year].add(node)

        new = {y: float(sum(1 for f, _ in spans.values() if f == y)) for y in domain}
        out["nodes_new"] = new
        running = 0.0
        out["nodes_cumulative"] = {}
        for y in domain:
            running += new[y]
            out["nodes_cumulative"][y] = running
        out["nodes_active_new_edges"] = {y: float(len(active_nodes[y])) for y in domain}
        out["new_fraction"] = {y: new[y] / len(active_nodes[y]) for y in domain if active_nodes[y]}

        single = {y: float(sum(1 for f, l in spans.values() if f == y and l == y)) for y in domain}
        out["single_year_count"] = single
        out["single_year_fraction"] = {y: single[y] / new[y] for y in domain if new[y] > 0}

        projects: Dict[int, int] = defaultdict(int)
        first_completion: Dict[int, int] = {}
        for event in events:
            for node in event.members:
                projects[node] += 1
                first_completion[node] = min(first_completion.get(node, event.completion_year), event.completion_year)
        edged = list(spans)
        cohort = {y: sum(1 for n in edged if first_completion[n] == y) for y in domain}
        one = {y: float(sum(1 for n in edged if first_completion[n] == y and projects[n] == 1)) for y in domain}
        out["single_project_count"] = one
        out["single_project_fraction"] = {y: one[y] / cohort[y] for y in domain if cohort[y] > 0}

        out["nodes_live"] = {}
        out["edges_live"] = {}
        for y in domain:
            nodes, edges = naive_active_counts(events, tau, y)
            out["nodes_live"][y] = float(nodes)
            out["edges_live"][y] = float(edges)

    by_year: Dict[int, List[int]] = defaultdict(list)
    for event in events:
        by_year[event.completion_year].append(event.size)
    out["event_count"] = {y: float(len(s)) for y, s in by_year.items()}
    out["multi_member_fraction"] = {y: sum(1 for x in s if x >= 2) / len(s) for y, s in by_year.items()}
    out["team_size_mean"] = {y: sum(s) / len(s) for y, s in by_year.items()}
    out["team_size_max"] = {y: float(max(s)) for y, s in by_year.items()}
    out["team_size_mode"] = {y: float(min(set(s), key=lambda k: (-s.count(k), k))) for y, s in by_year.items()}
    bins = sorted({min(x, size_cap) for s in by_year.values() for x in s})
    for b in bins:
        name = f"size_fraction_{b}{'+' if b == size_cap else ''}"
        out[name] = {y: sum(1 for x in s if min(x, size_cap) == b) / len(s) for y, s in by_year.items()}
    return out


def _as_mapping(series: YearlySeries) -> Dict[int, float]:
    return {int(y): float(v) for y, v in zip(series.years, series.values)}


def compare_fixture(events: Sequence[ProjectEvent], tau: int = 2) -> List[str]:
    """불일치 설명 목록 (빈 목록이면 모든 값이 정확히 일치)"""
    graph = build_graph(events, tau)
    problems: List[str] = []

    expected_tl = naive_timelines(events, tau)
    got_tl = {(t.u, t.v): list(t.intervals) for t in graph.timelines()}
    if got_tl != expected_tl:
        problems.append(f"timelines: {len(got_tl)} vs {len(expected_tl)}")

    got_spans = {s.node: (s.first_active_year, s.last_active_year) for s in graph.lifespans()}
    if got_spans != naive_lifespans(events, tau):
        problems.append("lifespans")

    got_durations = {(int(u), int(v)): int(d) for u, v, d in zip(graph.pair_u, graph.pair_v, graph.pair_durations())}
    if got_durations != naive_durations(events, tau):
        problems.append("durations")

    expected = naive_series(events, tau)
    nodes = node_series(graph)
    single = single_year_series(graph)
    live_nodes, live_edges = active_count_series(graph)
    ev = event_series(graph)
    produced = [nodes.cumulative_total, nodes.active, nodes.new, new_fraction_series(graph),
                single.count, single.fraction, single.project_count, single.project_fraction,
                live_nodes, live_edges, ev.event_count, ev.multi_member_fraction,
                *ev.stats_series().values(), *ev.size_fractions.values()]
    for series in produced:
        want = expected.get(series.name)
        if want is None:
            problems.append(f"{series.name}: 오라클에 없음")
        elif _as_mapping(series) != want:
            problems.append(f"{series.name}: 값 불일치")

    bounds = graph.year_bounds
    if bounds is not None:
        for year in range(bounds[0], bounds[1] + 1):
            got = active_counts(graph, year)
            if (got.active_nodes, got.active_edges) != naive_active_counts(events, tau, year):
                problems.append(f"active_counts({year})")
    return problems


def run_fixtures(n_fixtures: int = 25, seed: int = 7, max_events: int = 100) -> Dict[int, List[str]]:
    """무작위 픽스처 여러 개를 비교해 불일치가 있는 픽스처만 반환"""
    rng = np.random.default_rng(seed)
    failures = {}
    for i in range(n_fixtures):
        events = random_fixture(rng, n_events=int(rng.integers(1, max_events + 1)))
        tau = int(rng.integers(0, 4))
        problems = compare_fixture(events, tau)
        if problems:
            failures[i] = problems
    return failures


if __name__ == '__main__':
    print("브루트포스 오라클 비교 시작")
    try:
        failures = run_fixtures()
        if failures:
            for index, problems in failures.items():
                print(f"픽스처 {index}: {problems}")
        else:
            print("모든 픽스처 일치!")
    except Exception as e:
        print(f"오라클 비교 중 오류 발생: {e}")
        import traceback
        traceback.print_exc()
