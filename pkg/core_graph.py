"""
=============================================================================
파일명: core_graph.py
목적: 프로젝트 이벤트(논문/영화)로부터 시간 클리크 확장 그래프를 구성하고
      활동/수명/협업 기간 질의에 답하는 핵심 모듈

주요 역할:
1. n명 프로젝트를 n(n-1)/2개의 시간 엣지로 확장 (clique_expand)
2. 같은 쌍의 겹치거나 인접한 구간을 병합하여 PairTimeline 구성
3. 노드 수명(첫/마지막 활동 연도) 및 연도별 신규 파트너 수 집계
4. 활동 노드/엣지 수, 쌍 협업 기간 질의

사용 예시:
- graph = build_graph(events, tau_project=2)
- counts = active_counts(graph, 1999)
- durations = graph.pair_durations()

기술적 특징:
- 모든 시간은 정수 연도, 구간은 양끝 포함
- 파티션 누적(GraphBuilder) 후 결정적 병합: merge는 결합/교환 법칙을 만족
- 엣지 행은 (쌍 키, 생성 연도) 정렬 런으로 축약되며 spill_dir 지정 시
  디스크에 기록되고, 마지막에 키 범위별로 분할 병합됨
- 구성 후 그래프는 불변이며 동시 읽기에 안전
=============================================================================
"""

from __future__ import annotations

import hashlib
import itertools
import shutil
import tempfile
from concurrent.futures import Future, ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Callable, Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from config import config
from exceptions import IngestError, RecordRejected
from logging_config import get_logger

logger = get_logger("core_graph")

# 쌍 키 = (u << 32) | v, u < v < 2^31
_KEY_SHIFT = np.int64(32)
_KEY_MASK = np.int64(0xFFFFFFFF)
# 노드-연도 키 = (node << 16) | (year + 32768)
_YEAR_BIAS = 32768
_YEAR_BITS = np.int64(16)
_NO_YEAR_LOW = np.iinfo(np.int32).max
_NO_YEAR_HIGH = np.iinfo(np.int32).min
_MAX_REJECTED_SAMPLES = 1000
# 메모리에 문자열로 들고 있는 최근 project_id 수 (이후는 해시 런)
_ID_BUFFER_ROWS = 65536


# =============================================================================
# 도메인 타입
# =============================================================================

@dataclass(frozen=True)
class ProjectEvent:
    """하나의 협업 프로젝트 (논문/영화)"""
    project_id: str
    completion_year: int
    members: Tuple[int, ...]

    @classmethod
    def create(cls, project_id: str, completion_year: int, members: Iterable[int]) -> "ProjectEvent":
        """멤버를 중복 제거/정렬하여 이벤트 생성 (자기 루프 금지)"""
        unique = tuple(sorted({int(m) for m in members}))
        if not unique:
            raise RecordRejected("members가 비어 있음", details={"project_id": project_id})
        if unique[0] < 0:
            raise RecordRejected("음수 ContributorId", details={"project_id": project_id})
        return cls(str(project_id), int(completion_year), unique)

    @property
    def size(self) -> int:
        return len(self.members)


@dataclass(frozen=True)
class TemporalEdge:
    """프로젝트 하나가 만든 기여자 쌍의 활동 구간"""
    u: int
    v: int
    t_create: int
    t_remove: int

    def __post_init__(self):
        if not self.u < self.v:
            raise ValueError(f"정규 순서가 아님: u={self.u}, v={self.v}")
        if self.t_create > self.t_remove:
            raise ValueError(f"t_create > t_remove: {self.t_create} > {self.t_remove}")


@dataclass(frozen=True)
class PairTimeline:
    """병합된(서로소, 정렬된) 구간 목록을 가진 기여자 쌍"""
    u: int
    v: int
    intervals: Tuple[Tuple[int, int], ...]

    @classmethod
    def from_intervals(cls, u: int, v: int, intervals: Iterable[Tuple[int, int]]) -> "PairTimeline":
        merged = merge_intervals(intervals)
        if not merged:
            raise ValueError("PairTimeline에는 최소 1개 구간이 필요함")
        return cls(min(u, v), max(u, v), tuple(merged))


@dataclass(frozen=True)
class NodeLifespan:
    node: int
    first_active_year: int
    last_active_year: int


@dataclass(frozen=True)
class ActiveCounts:
    active_nodes: int
    active_edges: int


@dataclass
class IngestReport:
    """그래프 구성 중 집계되는 수집 통계"""
    accepted_events: int = 0
    rejected_year_range: int = 0
    edge_rows: int = 0
    runs_written: int = 0
    rejected_samples: List[Dict[str, int]] = field(default_factory=list)

    def absorb(self, other: "IngestReport") -> None:
        self.accepted_events += other.accepted_events
        self.rejected_year_range += other.rejected_year_range
        self.edge_rows += other.edge_rows
        self.runs_written += other.runs_written
        self.rejected_samples.extend(other.rejected_samples)
        self.rejected_samples.sort(key=lambda r: (r["year"], r["project_id"]))
        del self.rejected_samples[_MAX_REJECTED_SAMPLES:]


def merge_intervals(intervals: Iterable[Tuple[int, int]]) -> List[Tuple[int, int]]:
    """겹치거나 인접한(정수 연도) 구간을 병합"""
    merged: List[List[int]] = []
    for start, end in sorted(intervals):
        if merged and start <= merged[-1][1] + 1:
            merged[-1][1] = max(merged[-1][1], end)
        else:
            merged.append([start, end])
    return [(s, e) for s, e in merged]


def clique_expand(event: ProjectEvent, tau_project: int) -> List[TemporalEdge]:
    """n명 이벤트를 [완료연도 - tau, 완료연도] 구간의 n(n-1)/2 엣지로 확장"""
    t_create = event.completion_year - tau_project
    return [
        TemporalEdge(u, v, t_create, event.completion_year)
        for u, v in itertools.combinations(event.members, 2)
    ]


def pair_duration(timeline: PairTimeline) -> int:
    """첫 구간 시작부터 마지막 구간 끝까지의 포함 연도 수"""
    return timeline.intervals[-1][1] - timeline.intervals[0][0] + 1


@lru_cache(maxsize=256)
def _upper_pairs(n: int) -> Tuple[np.ndarray, np.ndarray]:
    return np.triu_indices(n, k=1)


def _encode_pairs(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    return (u.astype(np.int64) << _KEY_SHIFT) | v.astype(np.int64)


def _decode_pairs(keys: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    return (keys >> _KEY_SHIFT).astype(np.int64), (keys & _KEY_MASK).astype(np.int64)


def _reduce_pair_years(keys: np.ndarray, years: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """(쌍 키, 생성 연도) 행을 정렬하고 중복 제거"""
    if keys.size == 0:
        return keys.astype(np.int64), years.astype(np.int32)
    order = np.lexsort((years, keys))
    keys, years = keys[order], years[order]
    keep = np.ones(keys.size, dtype=bool)
    keep[1:] = (keys[1:] != keys[:-1]) | (years[1:] != years[:-1])
    return keys[keep], years[keep].astype(np.int32)


# =============================================================================
# 노드 누적기
# =============================================================================

class _NodeAccumulator:
    """ContributorId로 인덱싱되는 노드별 통계 (용량은 두 배씩 증가)"""

    def __init__(self):
        self.size = 0
        self.first_create = np.empty(0, dtype=np.int32)
        self.last_remove = np.empty(0, dtype=np.int32)
        self.projects = np.empty(0, dtype=np.int32)
        self.first_completion = np.empty(0, dtype=np.int32)
        self.last_completion = np.empty(0, dtype=np.int32)

    def _ensure(self, max_id: int) -> None:
        if max_id < self.first_create.size:
            self.size = max(self.size, max_id + 1)
            return
        capacity = max(16, self.first_create.size)
        while capacity <= max_id:
            capacity *= 2
        grow = capacity - self.first_create.size
        self.first_create = np.concatenate([self.first_create, np.full(grow, _NO_YEAR_LOW, dtype=np.int32)])
        self.last_remove = np.concatenate([self.last_remove, np.full(grow, _NO_YEAR_HIGH, dtype=np.int32)])
        self.projects = np.concatenate([self.projects, np.zeros(grow, dtype=np.int32)])
        self.first_completion = np.concatenate([self.first_completion, np.full(grow, _NO_YEAR_LOW, dtype=np.int32)])
        self.last_completion = np.concatenate([self.last_completion, np.full(grow, _NO_YEAR_HIGH, dtype=np.int32)])
        self.size = max(self.size, max_id + 1)

    def observe(self, members: np.ndarray, year: int, tau_project: int) -> None:
        self._ensure(int(members[-1]))
        self.projects[members] += 1
        self.first_completion[members] = np.minimum(self.first_completion[members], year)
        self.last_completion[members] = np.maximum(self.last_completion[members], year)
        if members.size >= 2:
            self.first_create[members] = np.minimum(self.first_create[members], year - tau_project)
            self.last_remove[members] = np.maximum(self.last_remove[members], year)

    def absorb(self, other: "_NodeAccumulator") -> None:
        if other.size == 0:
            return
        self._ensure(other.size - 1)
        n = other.size
        self.projects[:n] += other.projects[:n]
        np.minimum(self.first_create[:n], other.first_create[:n], out=self.first_create[:n])
        np.maximum(self.last_remove[:n], other.last_remove[:n], out=self.last_remove[:n])
        np.minimum(self.first_completion[:n], other.first_completion[:n], out=self.first_completion[:n])
        np.maximum(self.last_completion[:n], other.last_completion[:n], out=self.last_completion[:n])


# =============================================================================
# 불변 그래프
# =============================================================================

class TemporalGraph:
    """
    구성이 끝난 불변 시간 그래프

    배열 구성:
    - pair_keys: 정렬된 쌍 키, timeline 하나당 하나
    - iv_offsets / iv_start / iv_end: 타임라인별 병합 구간 (CSR)
    - node_first / node_last: 노드 수명 (엣지 없는 노드는 has_edges=False)
    - ny_node / ny_year / ny_count: (노드, 생성 연도)별 신규 파트너 수
    - hist_year / hist_size / hist_count: 연도별 팀 크기 히스토그램
    """

    def __init__(
        self,
        tau_project: int,
        pair_keys: np.ndarray,
        iv_offsets: np.ndarray,
        iv_start: np.ndarray,
        iv_end: np.ndarray,
        nodes: _NodeAccumulator,
        ny_keys: np.ndarray,
        ny_count: np.ndarray,
        size_hist: Dict[Tuple[int, int], int],
        report: IngestReport,
        dataset_end: Optional[int],
    ):
        self.tau_project = tau_project
        self.pair_keys = pair_keys
        self.pair_u, self.pair_v = _decode_pairs(pair_keys)
        self.iv_offsets = iv_offsets
        self.iv_start = iv_start
        self.iv_end = iv_end

        n = nodes.size
        self.has_edges = nodes.first_create[:n] != _NO_YEAR_LOW
        self.node_first = nodes.first_create[:n].copy()
        self.node_last = nodes.last_remove[:n].copy()
        self.node_projects = nodes.projects[:n].copy()
        self.node_first_completion = nodes.first_completion[:n].copy()
        self.node_last_completion = nodes.last_completion[:n].copy()

        self.ny_node = (ny_keys >> _YEAR_BITS).astype(np.int64)
        self.ny_year = ((ny_keys & np.int64((1 << 16) - 1)) - _YEAR_BIAS).astype(np.int32)
        order = np.lexsort((self.ny_node, self.ny_year))
        self.ny_node, self.ny_year = self.ny_node[order], self.ny_year[order]
        self.ny_count = ny_count[order]

        hist_items = sorted(size_hist.items())
        self.hist_year = np.array([k[0] for k, _ in hist_items], dtype=np.int32)
        self.hist_size = np.array([k[1] for k, _ in hist_items], dtype=np.int32)
        self.hist_count = np.array([c for _, c in hist_items], dtype=np.int64)

        self.report = report
        self.isolated_contributors = int(np.count_nonzero((self.node_projects > 0) & ~self.has_edges))
        observed_end = int(self.hist_year.max()) if self.hist_year.size else None
        self.dataset_end = dataset_end if dataset_end is not None else observed_end

        for arr in (self.pair_keys, self.pair_u, self.pair_v, self.iv_offsets, self.iv_start,
                    self.iv_end, self.has_edges, self.node_first, self.node_last, self.node_projects,
                    self.node_first_completion, self.node_last_completion, self.ny_node,
                    self.ny_year, self.ny_count, self.hist_year, self.hist_size, self.hist_count):
            arr.setflags(write=False)

    # ------------------------------------------------------------------ 크기
    @property
    def num_nodes(self) -> int:
        """엣지가 하나 이상 있는(수명을 가진) 노드 수"""
        return int(np.count_nonzero(self.has_edges))

    @property
    def num_timelines(self) -> int:
        return int(self.pair_keys.size)

    @property
    def year_bounds(self) -> Optional[Tuple[int, int]]:
        """엣지 활동이 존재하는 연도 범위 (생성 연도 ~ 데이터셋 끝)"""
        if self.iv_start.size == 0:
            return None
        return int(self.iv_start.min()), int(self.iv_end.max())

    @property
    def event_year_bounds(self) -> Optional[Tuple[int, int]]:
        if self.hist_year.size == 0:
            return None
        return int(self.hist_year.min()), int(self.hist_year.max())

    # ------------------------------------------------------------------ 타임라인
    def timeline_at(self, index: int) -> PairTimeline:
        lo, hi = self.iv_offsets[index], self.iv_offsets[index + 1]
        intervals = tuple(zip(self.iv_start[lo:hi].tolist(), self.iv_end[lo:hi].tolist()))
        return PairTimeline(int(self.pair_u[index]), int(self.pair_v[index]), intervals)

    def timeline(self, u: int, v: int) -> Optional[PairTimeline]:
        a, b = min(u, v), max(u, v)
        key = (np.int64(a) << _KEY_SHIFT) | np.int64(b)
        idx = int(np.searchsorted(self.pair_keys, key))
        if idx < self.pair_keys.size and self.pair_keys[idx] == key:
            return self.timeline_at(idx)
        return None

    def timelines(self) -> Iterator[PairTimeline]:
        for i in range(self.num_timelines):
            yield self.timeline_at(i)

    def timeline_start_years(self) -> np.ndarray:
        return self.iv_start[self.iv_offsets[:-1]]

    def timeline_end_years(self) -> np.ndarray:
        return self.iv_end[self.iv_offsets[1:] - 1]

    def pair_durations(self) -> np.ndarray:
        """타임라인별 포함 기간 (pair_duration의 벡터 버전)"""
        return self.timeline_end_years() - self.timeline_start_years() + 1

    # ------------------------------------------------------------------ 노드
    def lifespans(self) -> Iterator[NodeLifespan]:
        for node in np.flatnonzero(self.has_edges):
            yield NodeLifespan(int(node), int(self.node_first[node]), int(self.node_last[node]))

    def node_lifespan(self, node: int) -> Optional[NodeLifespan]:
        if node >= self.has_edges.size or not self.has_edges[node]:
            return None
        return NodeLifespan(node, int(self.node_first[node]), int(self.node_last[node]))

    def new_partner_counts(self, year: int) -> np.ndarray:
        """해당 연도에 생성된 엣지를 가진 노드별 신규 파트너 수 (노드 순)"""
        lo = np.searchsorted(self.ny_year, year, side="left")
        hi = np.searchsorted(self.ny_year, year, side="right")
        return self.ny_count[lo:hi]

    def node_activity_intervals(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """노드별로 병합한 활동 구간 (node, start, end)"""
        counts = np.diff(self.iv_offsets)
        tl_u = np.repeat(self.pair_u, counts)
        tl_v = np.repeat(self.pair_v, counts)
        nodes = np.concatenate([tl_u, tl_v])
        starts = np.concatenate([self.iv_start, self.iv_start]).astype(np.int64)
        ends = np.concatenate([self.iv_end, self.iv_end]).astype(np.int64)
        if nodes.size == 0:
            return nodes, starts, ends
        order = np.lexsort((starts, nodes))
        nodes, starts, ends = nodes[order], starts[order], ends[order]
        # 그룹 오프셋을 더해 전역 누적 최대값이 노드 경계에서 초기화되도록 함
        span = int(ends.max() - starts.min()) + 4
        group = np.concatenate([[0], np.cumsum(nodes[1:] != nodes[:-1])])
        shift = group.astype(np.int64) * span - int(starts.min())
        s, e = starts + shift, ends + shift
        run_end = np.maximum.accumulate(e)
        new = np.ones(nodes.size, dtype=bool)
        new[1:] = s[1:] > run_end[:-1] + 1
        idx = np.flatnonzero(new)
        seg_end = np.maximum.reduceat(e, idx)
        return nodes[idx], starts[idx], seg_end - shift[idx]

    # ------------------------------------------------------------------ 직렬화
    def state(self) -> Dict[str, np.ndarray]:
        """캐시 저장용 배열 묶음 (from_state의 역)"""
        end = self.dataset_end if self.dataset_end is not None else _NO_YEAR_HIGH
        return {
            "meta": np.array([self.tau_project, end], dtype=np.int64),
            "report": np.array([self.report.accepted_events, self.report.rejected_year_range,
                                self.report.edge_rows, self.report.runs_written], dtype=np.int64),
            "pair_keys": self.pair_keys, "iv_offsets": self.iv_offsets,
            "iv_start": self.iv_start, "iv_end": self.iv_end,
            "node_first": self.node_first, "node_last": self.node_last,
            "node_projects": self.node_projects,
            "node_first_completion": self.node_first_completion,
            "node_last_completion": self.node_last_completion,
            "ny_keys": (self.ny_node << _YEAR_BITS) | (self.ny_year.astype(np.int64) + _YEAR_BIAS),
            "ny_count": self.ny_count,
            "hist_year": self.hist_year, "hist_size": self.hist_size, "hist_count": self.hist_count,
        }

    @classmethod
    def from_state(cls, state: Dict[str, np.ndarray]) -> "TemporalGraph":
        tau_project, end = (int(v) for v in state["meta"])
        nodes = _NodeAccumulator()
        nodes.first_create = np.asarray(state["node_first"], dtype=np.int32)
        nodes.last_remove = np.asarray(state["node_last"], dtype=np.int32)
        nodes.projects = np.asarray(state["node_projects"], dtype=np.int32)
        nodes.first_completion = np.asarray(state["node_first_completion"], dtype=np.int32)
        nodes.last_completion = np.asarray(state["node_last_completion"], dtype=np.int32)
        nodes.size = int(nodes.first_create.size)
        hist = {
            (int(y), int(s)): int(c)
            for y, s, c in zip(state["hist_year"], state["hist_size"], state["hist_count"])
        }
        report = IngestReport(*(int(v) for v in state["report"]))
        return cls(
            tau_project,
            np.array(state["pair_keys"], dtype=np.int64),
            np.array(state["iv_offsets"], dtype=np.int64),
            np.array(state["iv_start"], dtype=np.int32),
            np.array(state["iv_end"], dtype=np.int32),
            nodes,
            np.array(state["ny_keys"], dtype=np.int64),
            np.array(state["ny_count"], dtype=np.int64),
            hist,
            report,
            None if end == _NO_YEAR_HIGH else end,
        )

    # ------------------------------------------------------------------ 비교
    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TemporalGraph):
            return NotImplemented
        pairs = [
            (self.pair_keys, other.pair_keys), (self.iv_offsets, other.iv_offsets),
            (self.iv_start, other.iv_start), (self.iv_end, other.iv_end),
            (self.has_edges, other.has_edges), (self.node_first, other.node_first),
            (self.node_last, other.node_last), (self.node_projects, other.node_projects),
            (self.node_first_completion, other.node_first_completion),
            (self.node_last_completion, other.node_last_completion),
            (self.ny_node, other.ny_node), (self.ny_year, other.ny_year), (self.ny_count, other.ny_count),
            (self.hist_year, other.hist_year), (self.hist_size, other.hist_size),
            (self.hist_count, other.hist_count),
        ]
        return self.tau_project == other.tau_project and all(np.array_equal(a, b) for a, b in pairs)

    __hash__ = None

    def __repr__(self) -> str:
        return (f"TemporalGraph(nodes={self.num_nodes}, timelines={self.num_timelines}, "
                f"tau_project={self.tau_project}, dataset_end={self.dataset_end})")


# =============================================================================
# project_id 중복 검사
# =============================================================================

def hash_project_id(project_id: str) -> int:
    """project_id → 부호 있는 64비트 해시 (blake2b)"""
    digest = hashlib.blake2b(project_id.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little", signed=True)


def _duplicate_id(project_id: Optional[str], key: int) -> IngestError:
    if project_id is None:
        return IngestError(f"중복 project_id (해시 {key & 0xFFFFFFFFFFFFFFFF:016x})",
                           {"project_id": None, "project_id_hash": int(key)})
    return IngestError(f"중복 project_id: {project_id}", {"project_id": project_id})


class _ProjectIdIndex:
    """
    이미 본 project_id 집합

    최근 buffer_rows개는 문자열과 함께 보관하고, 넘치면 정렬된 해시 런으로
    축약합니다 (spill이 있으면 디스크). 메모리 사용량은 이벤트 수와 무관합니다.
    """

    def __init__(self, buffer_rows: int = _ID_BUFFER_ROWS, fan_in: int = config.MERGE_FAN_IN,
                 spill: Optional[Callable[[str], Path]] = None):
        self.buffer_rows = max(1, buffer_rows)
        self.fan_in = max(2, fan_in)
        self.spill = spill
        self._pending: Dict[int, str] = {}
        self._runs: List[np.ndarray] = []
        self._files = 0

    def add(self, project_id: str) -> None:
        key = hash_project_id(project_id)
        if key in self._pending:
            raise _duplicate_id(project_id, key)
        self._pending[key] = project_id
        if len(self._pending) >= self.buffer_rows:
            self.flush()

    def _find_existing(self, keys: np.ndarray) -> Optional[int]:
        """정렬된 keys 중 기존 런에 이미 있는 첫 키"""
        for run in self._runs:
            if run.size == 0 or keys.size == 0:
                continue
            idx = np.minimum(np.searchsorted(run, keys), run.size - 1)
            hits = np.flatnonzero(np.asarray(run[idx]) == keys)
            if hits.size:
                return int(keys[hits[0]])
        return None

    def _pending_keys(self) -> np.ndarray:
        return np.sort(np.fromiter(self._pending.keys(), dtype=np.int64, count=len(self._pending)))

    def flush(self) -> None:
        if not self._pending:
            return
        keys = self._pending_keys()
        hit = self._find_existing(keys)
        if hit is not None:
            raise _duplicate_id(self._pending[hit], hit)
        self._pending = {}
        self._store(keys)

    def _store(self, keys: np.ndarray) -> None:
        if self.spill is not None:
            path = self.spill(f"ids_{self._files:05d}.npy")
            self._files += 1
            np.save(path, keys)
            self._runs.append(np.load(path, mmap_mode="r"))
            return
        self._runs.append(keys)
        if len(self._runs) >= self.fan_in:
            # 런끼리는 서로소이므로 정렬만 하면 됨
            self._runs = [np.sort(np.concatenate(self._runs))]

    def absorb(self, other: "_ProjectIdIndex") -> None:
        """다른 파티션의 id를 흡수, 겹치면 IngestError"""
        self.flush()
        if other._pending:
            keys = other._pending_keys()
            hit = self._find_existing(keys)
            if hit is not None:
                raise _duplicate_id(other._pending[hit], hit)
        for run in other._runs:
            hit = self._find_existing(np.asarray(run))
            if hit is not None:
                raise _duplicate_id(None, hit)
        self._runs.extend(other._runs)
        self._pending = dict(other._pending)
        other._runs, other._pending = [], {}
        if len(self._pending) >= self.buffer_rows:
            self.flush()

    def clear(self) -> None:
        self._pending, self._runs = {}, []


# =============================================================================
# 파티션 누적기
# =============================================================================

class GraphBuilder:
    """
    이벤트 파티션을 누적하는 빌더

    add()로 이벤트를 받고, merge()로 다른 파티션을 흡수하며, finalize()로
    불변 TemporalGraph를 만듭니다. 엣지 행은 spill_rows마다 정렬 런으로
    축약되고, spill_dir가 있으면 런 파일로 기록됩니다.
    """

    def __init__(
        self,
        tau_project: int = config.TAU_PROJECT,
        year_range: Optional[Tuple[int, int]] = None,
        spill_rows: int = config.SPILL_ROWS,
        spill_dir: Optional[str] = config.SPILL_DIR,
        merge_fan_in: int = config.MERGE_FAN_IN,
    ):
        if tau_project < 0:
            raise ValueError(f"tau_project는 0 이상이어야 함: {tau_project}")
        self.tau_project = tau_project
        self.year_range = year_range
        self.spill_rows = max(1, spill_rows)
        self.spill_dir = Path(spill_dir) if spill_dir else None
        self.merge_fan_in = max(2, merge_fan_in)

        self._nodes = _NodeAccumulator()
        self._size_hist: Dict[Tuple[int, int], int] = {}
        self._key_buf = np.empty(0, dtype=np.int64)
        self._year_buf = np.empty(0, dtype=np.int32)
        self._buffered = 0
        self._runs: List[Tuple[np.ndarray, np.ndarray]] = []
        self._run_files: List[Path] = []
        self._own_dir: Optional[Path] = None
        self._owned_dirs: List[Path] = []
        self._ids = _ProjectIdIndex(min(self.spill_rows, _ID_BUFFER_ROWS), self.merge_fan_in,
                                    self._spill_path if self.spill_dir is not None else None)
        self.report = IngestReport()

    def add(self, event: ProjectEvent) -> bool:
        """이벤트 하나를 누적. 연도 범위 밖이면 False (거부 집계)"""
        self._ids.add(event.project_id)

        year = event.completion_year
        if self.year_range is not None and not (self.year_range[0] <= year <= self.year_range[1]):
            self.report.rejected_year_range += 1
            if len(self.report.rejected_samples) < _MAX_REJECTED_SAMPLES:
                self.report.rejected_samples.append({"project_id": event.project_id, "year": year})
            return False

        members = np.asarray(event.members, dtype=np.int64)
        self._nodes.observe(members, year, self.tau_project)
        hist_key = (year, members.size)
        self._size_hist[hist_key] = self._size_hist.get(hist_key, 0) + 1
        self.report.accepted_events += 1

        if members.size >= 2:
            iu, iv = _upper_pairs(int(members.size))
            keys = _encode_pairs(members[iu], members[iv])
            self.report.edge_rows += keys.size
            self._buffer_rows(keys, year - self.tau_project)
        return True

    def add_all(self, events: Iterable[ProjectEvent]) -> "GraphBuilder":
        for event in events:
            self.add(event)
        return self

    def _buffer_rows(self, keys: np.ndarray, year: int) -> None:
        """엣지 행을 고정 크기 버퍼에 복사, spill_rows에 닿으면 정렬 런으로 축약"""
        pos = 0
        while pos < keys.size:
            if self._buffered == self._key_buf.size:
                self._grow_buffer()
            take = min(keys.size - pos, self._key_buf.size - self._buffered)
            stop = self._buffered + take
            self._key_buf[self._buffered:stop] = keys[pos:pos + take]
            self._year_buf[self._buffered:stop] = year
            self._buffered = stop
            pos += take
            if self._buffered >= self.spill_rows:
                self._flush()

    def _grow_buffer(self) -> None:
        size = min(self.spill_rows, max(1024, 2 * self._key_buf.size))
        keys = np.empty(size, dtype=np.int64)
        years = np.empty(size, dtype=np.int32)
        keys[:self._buffered] = self._key_buf[:self._buffered]
        years[:self._buffered] = self._year_buf[:self._buffered]
        self._key_buf, self._year_buf = keys, years

    def _flush(self) -> None:
        if self._buffered == 0:
            return
        run = _reduce_pair_years(self._key_buf[:self._buffered], self._year_buf[:self._buffered])
        self._buffered = 0
        if self.spill_dir is not None:
            self._write_run(run)
            return
        self._runs.append(run)
        if len(self._runs) >= self.merge_fan_in:
            keys = np.concatenate([r[0] for r in self._runs])
            years = np.concatenate([r[1] for r in self._runs])
            self._runs = [_reduce_pair_years(keys, years)]

    def _spill_path(self, name: str) -> Path:
        """이 빌더 전용 임시 디렉터리 안의 경로"""
        if self._own_dir is None:
            self.spill_dir.mkdir(parents=True, exist_ok=True)
            self._own_dir = Path(tempfile.mkdtemp(prefix="runs_", dir=self.spill_dir))
            self._owned_dirs.append(self._own_dir)
        return self._own_dir / name

    def _write_run(self, run: Tuple[np.ndarray, np.ndarray]) -> None:
        path = self._spill_path(f"run_{self.report.runs_written:05d}")
        np.save(path.with_suffix(".keys.npy"), run[0])
        np.save(path.with_suffix(".years.npy"), run[1])
        self._run_files.append(path)
        self.report.runs_written += 1
        logger.debug("정렬 런 기록", extra_data={"path": str(path), "rows": int(run[0].size)})

    def merge(self, other: "GraphBuilder") -> "GraphBuilder":
        """다른 파티션을 흡수 (결합/교환 법칙 성립, 결과 그래프는 순서와 무관)"""
        if other.tau_project != self.tau_project:
            raise ValueError("tau_project가 다른 파티션은 병합할 수 없음")
        self._ids.absorb(other._ids)
        self._nodes.absorb(other._nodes)
        for key, count in other._size_hist.items():
            self._size_hist[key] = self._size_hist.get(key, 0) + count
        other._flush()
        self._runs.extend(other._runs)
        self._run_files.extend(other._run_files)
        self._owned_dirs.extend(other._owned_dirs)
        self.report.absorb(other.report)
        other._runs, other._run_files, other._owned_dirs, other._own_dir = [], [], [], None
        return self

    def finalize(self, dataset_end: Optional[int] = None) -> TemporalGraph:
        """정렬 런을 키 범위별로 병합하여 불변 그래프 생성"""
        self._ids.flush()
        self._flush()
        runs = list(self._runs)
        for path in self._run_files:
            # 메모리 매핑: 파티션마다 필요한 키 범위만 읽음
            runs.append((
                np.load(path.with_suffix(".keys.npy"), mmap_mode="r"),
                np.load(path.with_suffix(".years.npy"), mmap_mode="r"),
            ))
        total_rows = sum(r[0].size for r in runs)

        bounds = self._partition_bounds(runs, total_rows)
        key_parts, off_parts, start_parts, end_parts, ny_parts = [], [], [], [], []
        iv_total = 0
        for lo, hi in bounds:
            keys, years = self._slice_runs(runs, lo, hi)
            keys, years = _reduce_pair_years(keys, years)
            if keys.size == 0:
                continue
            tl_keys, offsets, starts, ends = _merge_timelines(keys, years, self.tau_project)
            key_parts.append(tl_keys)
            off_parts.append(offsets[:-1] + iv_total)
            iv_total += starts.size
            start_parts.append(starts)
            end_parts.append(ends)
            ny_parts.append(_node_year_partners(keys, years))

        if key_parts:
            pair_keys = np.concatenate(key_parts)
            iv_offsets = np.concatenate(off_parts + [np.array([iv_total], dtype=np.int64)])
            iv_start = np.concatenate(start_parts)
            iv_end = np.concatenate(end_parts)
            ny_keys, ny_count = _sum_node_years(ny_parts)
        else:
            pair_keys = np.empty(0, dtype=np.int64)
            iv_offsets = np.zeros(1, dtype=np.int64)
            iv_start = np.empty(0, dtype=np.int32)
            iv_end = np.empty(0, dtype=np.int32)
            ny_keys = np.empty(0, dtype=np.int64)
            ny_count = np.empty(0, dtype=np.int64)

        if dataset_end is None and self.year_range is not None:
            dataset_end = self.year_range[1]
        graph = TemporalGraph(
            self.tau_project, pair_keys, iv_offsets, iv_start, iv_end, self._nodes,
            ny_keys, ny_count, self._size_hist, self.report, dataset_end,
        )
        self._cleanup()
        logger.info(
            "시간 그래프 구성 완료",
            extra_data={
                "nodes": graph.num_nodes,
                "timelines": graph.num_timelines,
                "accepted_events": self.report.accepted_events,
                "rejected_year_range": self.report.rejected_year_range,
                "partitions": len(bounds),
            }
        )
        return graph

    def _partition_bounds(self, runs: Sequence[Tuple[np.ndarray, np.ndarray]], total_rows: int) -> List[Tuple[Optional[int], Optional[int]]]:
        """런 키의 분위수로 키 범위 분할 (한 키는 한 파티션에만 속함)"""
        partitions = max(1, int(np.ceil(total_rows / self.spill_rows)))
        if partitions == 1:
            return [(None, None)]
        step = max(1, total_rows // (partitions * 64))
        sample = np.sort(np.concatenate([r[0][::step] for r in runs if r[0].size]))
        cuts = np.unique(sample[np.linspace(0, sample.size - 1, partitions + 1).astype(int)[1:-1]])
        edges: List[Optional[int]] = [None] + [int(c) for c in cuts] + [None]
        return list(zip(edges[:-1], edges[1:]))

    @staticmethod
    def _slice_runs(runs, lo: Optional[int], hi: Optional[int]) -> Tuple[np.ndarray, np.ndarray]:
        keys_out, years_out = [], []
        for keys, years in runs:
            a = 0 if lo is None else int(np.searchsorted(keys, lo, side="left"))
            b = keys.size if hi is None else int(np.searchsorted(keys, hi, side="left"))
            if b > a:
                keys_out.append(np.asarray(keys[a:b]))
                years_out.append(np.asarray(years[a:b]))
        if not keys_out:
            return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int32)
        return np.concatenate(keys_out), np.concatenate(years_out)

    def _cleanup(self) -> None:
        for directory in self._owned_dirs:
            shutil.rmtree(directory, ignore_errors=True)
        self._ids.clear()
        self._owned_dirs, self._run_files, self._runs, self._own_dir = [], [], [], None


def _merge_timelines(keys: np.ndarray, years: np.ndarray, tau_project: int):
    """정렬된 (키, 생성 연도) 행에서 쌍별 병합 구간 계산"""
    starts = years.astype(np.int32)
    ends = (years + tau_project).astype(np.int32)
    # 구간 길이가 모두 tau로 같으므로 그룹 안에서 끝 연도는 단조 증가
    new_interval = np.ones(keys.size, dtype=bool)
    new_interval[1:] = (keys[1:] != keys[:-1]) | (starts[1:] > ends[:-1] + 1)
    iv_idx = np.flatnonzero(new_interval)
    last_idx = np.concatenate([iv_idx[1:] - 1, [keys.size - 1]])
    iv_start = starts[iv_idx]
    iv_end = ends[last_idx]

    new_key = np.ones(iv_idx.size, dtype=bool)
    iv_keys = keys[iv_idx]
    new_key[1:] = iv_keys[1:] != iv_keys[:-1]
    tl_first = np.flatnonzero(new_key)
    offsets = np.concatenate([tl_first, [iv_idx.size]]).astype(np.int64)
    return iv_keys[tl_first], offsets, iv_start, iv_end


def _node_year_partners(keys: np.ndarray, years: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """(노드, 생성 연도)별 서로 다른 신규 파트너 수의 부분 집계"""
    u, v = _decode_pairs(keys)
    biased = years.astype(np.int64) + _YEAR_BIAS
    ny = np.concatenate([(u << _YEAR_BITS) | biased, (v << _YEAR_BITS) | biased])
    return np.unique(ny, return_counts=True)


def _sum_node_years(parts: List[Tuple[np.ndarray, np.ndarray]]) -> Tuple[np.ndarray, np.ndarray]:
    keys = np.concatenate([p[0] for p in parts])
    counts = np.concatenate([p[1] for p in parts])
    unique, inverse = np.unique(keys, return_inverse=True)
    return unique, np.bincount(inverse, weights=counts).astype(np.int64)


# =============================================================================
# 공개 연산
# =============================================================================

def build_graph(
    events: Iterable[ProjectEvent],
    tau_project: int = config.TAU_PROJECT,
    year_range: Optional[Tuple[int, int]] = None,
    workers: int = 1,
    chunk_events: int = 50_000,
    spill_rows: int = config.SPILL_ROWS,
    spill_dir: Optional[str] = config.SPILL_DIR,
) -> TemporalGraph:
    """
    이벤트 스트림으로 시간 그래프 구성

    workers > 1이면 chunk_events 단위 파티션을 스레드에서 누적한 뒤
    제출 순서대로 병합합니다. 결과는 입력 순서/병렬도와 무관합니다.
    """
    def new_builder() -> GraphBuilder:
        return GraphBuilder(tau_project, year_range, spill_rows=spill_rows, spill_dir=spill_dir)

    if workers <= 1:
        return new_builder().add_all(events).finalize()

    root = new_builder()
    pending: List[Future] = []
    with ThreadPoolExecutor(max_workers=workers) as pool:
        for chunk in _chunked(events, chunk_events):
            pending.append(pool.submit(lambda c: new_builder().add_all(c), chunk))
            if len(pending) >= workers:
                root.merge(pending.pop(0).result())
        for future in pending:
            root.merge(future.result())
    return root.finalize()


def _chunked(events: Iterable[ProjectEvent], size: int) -> Iterator[List[ProjectEvent]]:
    iterator = iter(events)
    while True:
        chunk = list(itertools.islice(iterator, size))
        if not chunk:
            return
        yield chunk


def active_counts(graph: TemporalGraph, year: int) -> ActiveCounts:
    """해당 연도를 포함하는 구간이 있는 타임라인 수와 그 끝점 노드 수"""
    contains = (graph.iv_start <= year) & (graph.iv_end >= year)
    if not contains.any():
        return ActiveCounts(0, 0)
    timeline_idx = np.searchsorted(graph.iv_offsets, np.flatnonzero(contains), side="right") - 1
    active = np.unique(timeline_idx)
    nodes = np.unique(np.concatenate([graph.pair_u[active], graph.pair_v[active]]))
    return ActiveCounts(int(nodes.size), int(active.size))
