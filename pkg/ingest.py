"""
입력 파싱 및 출력 기록 모듈
- 이벤트 JSONL/CSV 스트리밍 파싱 (줄 번호 포함 거부 기록, 불량 비율 상한)
- 참여자 문자열 키 → 조밀 정수 id 사전
- 인구 표, 에포크 표 파싱
- CSV/JSONL 기록 (결정적 출력)
"""

import csv
import hashlib
import json
import re
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import ValidationError

from config import config
from core_graph import ProjectEvent
from epoch_analysis import EpochDefinition
from exceptions import IngestError, RecordRejected
from logging_config import get_logger
from models import RawEventRecord
from series import PopulationTable, YearlySeries, series_frame

logger = get_logger("ingest")

PathLike = Union[str, Path]
_FORMATS = {".jsonl": "jsonl", ".ndjson": "jsonl", ".json": "jsonl", ".csv": "csv"}
_CSV_MEMBER_SEP = ";"
_MAX_REJECT_SAMPLES = 20


def infer_format(path: PathLike, declared: Optional[str] = None) -> str:
    if declared:
        if declared not in ("jsonl", "csv"):
            raise IngestError(f"지원하지 않는 이벤트 형식: {declared}")
        return declared
    fmt = _FORMATS.get(Path(path).suffix.lower())
    if fmt is None:
        raise IngestError(f"확장자로 형식을 추론할 수 없음: {path}", {"path": str(path)})
    return fmt


def sha256_file(path: PathLike) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for block in iter(lambda: f.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


def truth_sidecar_path(events_path: PathLike) -> Path:
    """이벤트 파일 옆 ground-truth JSON 경로 (events.jsonl → events.truth.json)"""
    p = Path(events_path)
    return p.with_name(f"{p.stem}.truth.json")


# =============================================================================
# 참여자 사전
# =============================================================================

class ContributorRegistry:
    """문자열 참여자 키와 조밀 정수 id 사이의 전단사 사전 (첫 등장 순서로 id 부여)"""

    def __init__(self, keys: Optional[Sequence[str]] = None):
        self._ids: Dict[str, int] = {}
        self._keys: List[str] = []
        for key in keys or ():
            self.intern(key)

    def intern(self, key: str) -> int:
        node = self._ids.get(key)
        if node is None:
            node = len(self._keys)
            self._ids[key] = node
            self._keys.append(key)
        return node

    def key_of(self, node: int) -> str:
        return self._keys[node]

    def __len__(self) -> int:
        return len(self._keys)

    def __contains__(self, key: str) -> bool:
        return key in self._ids

    def items(self) -> Iterator[Tuple[str, int]]:
        return ((k, i) for i, k in enumerate(self._keys))

    def save(self, path: PathLike) -> None:
        frame = pd.DataFrame({"node_id": np.arange(len(self._keys)), "source_key": self._keys})
        frame.to_csv(path, index=False, lineterminator="\n")

    @classmethod
    def load(cls, path: PathLike) -> "ContributorRegistry":
        frame = pd.read_csv(path, dtype={"source_key": str})
        frame = frame.sort_values("node_id")
        if not np.array_equal(frame["node_id"].to_numpy(), np.arange(len(frame))):
            raise IngestError(f"참여자 사전이 조밀하지 않음: {path}")
        return cls(frame["source_key"].tolist())


# =============================================================================
# 이벤트 파싱
# =============================================================================

REJECT_COLUMNS = ("line", "reason")
# surrogateescape로 읽은 잘못된 UTF-8 바이트
_UNDECODABLE = re.compile("[\udc80-\udcff]")


@contextmanager
def reject_writer(path: Optional[PathLike], mode: str = "w") -> Iterator[Optional[Any]]:
    """거부 레코드 CSV 기록기 (path가 없으면 None)"""
    if path is None:
        yield None
        return
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, mode, encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        if mode == "w":
            writer.writerow(REJECT_COLUMNS)
        yield writer


@dataclass
class ParseStats:
    lines: int = 0
    accepted: int = 0
    duplicate_member_records: int = 0
    rejects: List[Dict[str, object]] = field(default_factory=list)  # 처음 _MAX_REJECT_SAMPLES개
    rejected: int = 0
    sink: Optional[Any] = field(default=None, repr=False, compare=False)

    @property
    def malformed_fraction(self) -> float:
        return self.rejected / self.lines if self.lines else 0.0

    def reject(self, line: int, reason: str) -> None:
        self.rejected += 1
        if len(self.rejects) < _MAX_REJECT_SAMPLES:
            self.rejects.append({"line": line, "reason": reason})
        if self.sink is not None:
            self.sink.writerow([line, reason])

    def summary(self) -> Dict[str, object]:
        return {
            "lines": self.lines,
            "accepted": self.accepted,
            "rejected": self.rejected,
            "duplicate_member_records": self.duplicate_member_records,
            "malformed_fraction": round(self.malformed_fraction, 6),
        }


class EventStream:
    """이벤트 파일을 한 번 순회하며 ProjectEvent를 내보내는 스트림 (파일 크기와 무관한 메모리)

    rejects_path가 있으면 거부 레코드 전체를 그 CSV로 기록하고,
    메모리에는 처음 몇 건만 남깁니다.
    """

    def __init__(
        self,
        path: PathLike,
        fmt: Optional[str] = None,
        registry: Optional[ContributorRegistry] = None,
        max_malformed_fraction: float = config.MAX_MALFORMED_FRACTION,
        rejects_path: Optional[PathLike] = None,
    ):
        self.path = Path(path)
        self.fmt = infer_format(path, fmt)
        self.registry = registry if registry is not None else ContributorRegistry()
        self.max_malformed_fraction = max_malformed_fraction
        self.rejects_path = Path(rejects_path) if rejects_path else None
        self.stats = ParseStats()

    def __iter__(self) -> Iterator[ProjectEvent]:
        self.stats = ParseStats()
        try:
            handle = open(self.path, "r", encoding="utf-8", errors="surrogateescape", newline="")
        except OSError as e:
            raise IngestError(f"이벤트 파일을 읽을 수 없음: {self.path}", {"error": str(e)})

        with handle, reject_writer(self.rejects_path) as sink:
            self.stats.sink = sink
            records = self._jsonl_records(handle) if self.fmt == "jsonl" else self._csv_records(handle)
            for line, payload in records:
                self.stats.lines += 1
                try:
                    event = self._to_event(line, payload)
                except RecordRejected as e:
                    self.stats.reject(line, e.message)
                    logger.debug("레코드 거부", extra_data={"line": line, "reason": e.message})
                    continue
                self.stats.accepted += 1
                yield event
            self.stats.sink = None

        self._check_malformed()

    def _jsonl_records(self, handle) -> Iterator[Tuple[int, object]]:
        for line_no, text in enumerate(handle, start=1):
            if not text.strip():
                continue
            if _UNDECODABLE.search(text):
                yield line_no, RecordRejected("UTF-8 디코딩 실패", line_no)
                continue
            try:
                yield line_no, json.loads(text)
            except json.JSONDecodeError as e:
                yield line_no, RecordRejected(f"JSON 파싱 실패: {e.msg}", line_no)

    def _csv_records(self, handle) -> Iterator[Tuple[int, object]]:
        reader = csv.reader(handle)
        header = next(reader, None)
        expected = ["project_id", "year", "members"]
        if header is None or [h.strip() for h in header] != expected:
            raise IngestError(f"CSV 헤더가 올바르지 않음 (기대: {','.join(expected)})",
                              {"path": str(self.path), "header": header})
        for row in reader:
            line_no = reader.line_num
            if not row or not any(cell.strip() for cell in row):
                continue
            if any(_UNDECODABLE.search(cell) for cell in row):
                yield line_no, RecordRejected("UTF-8 디코딩 실패", line_no)
                continue
            if len(row) != 3:
                yield line_no, RecordRejected(f"열 개수 {len(row)} != 3", line_no)
                continue
            members = [m for m in row[2].split(_CSV_MEMBER_SEP)] if row[2].strip() else []
            yield line_no, {"project_id": row[0], "year": row[1].strip(), "members": members}

    def _to_event(self, line: int, payload: object) -> ProjectEvent:
        if isinstance(payload, RecordRejected):
            raise payload
        if not isinstance(payload, dict):
            raise RecordRejected("레코드가 객체가 아님", line)
        try:
            record = RawEventRecord.model_validate(payload)
        except ValidationError as e:
            fields = [".".join(str(p) for p in err["loc"]) for err in e.errors()]
            raise RecordRejected(f"필드 검증 실패: {', '.join(fields)}", line, {"fields": fields})
        if not record.members:
            raise RecordRejected("members가 비어 있음", line)
        if len(set(record.members)) < len(record.members):
            self.stats.duplicate_member_records += 1
            logger.warning("중복 멤버 제거", extra_data={"line": line, "project_id": record.project_id})
        members = [self.registry.intern(m) for m in record.members]
        try:
            return ProjectEvent.create(record.project_id, record.year, members)
        except RecordRejected as e:
            raise RecordRejected(e.message, line)

    def _check_malformed(self) -> None:
        fraction = self.stats.malformed_fraction
        if fraction > self.max_malformed_fraction:
            raise IngestError(
                f"불량 레코드 비율 {fraction:.2%}가 상한 {self.max_malformed_fraction:.2%}를 초과",
                {**self.stats.summary(), "samples": self.stats.rejects[:_MAX_REJECT_SAMPLES]}
            )
        logger.info("이벤트 파싱 완료", extra_data={"path": str(self.path), **self.stats.summary()})


def parse_events(
    path: PathLike,
    fmt: Optional[str] = None,
    registry: Optional[ContributorRegistry] = None,
    max_malformed_fraction: float = config.MAX_MALFORMED_FRACTION,
    rejects_path: Optional[PathLike] = None,
) -> EventStream:
    """이벤트 파일 스트림 (순회 시 파싱)"""
    return EventStream(path, fmt, registry, max_malformed_fraction, rejects_path)


# =============================================================================
# 인구 / 에포크 표
# =============================================================================

def _read_table(path: PathLike, expected: Sequence[str]) -> Iterator[Tuple[int, List[str]]]:
    try:
        handle = open(path, "r", encoding="utf-8", newline="")
    except OSError as e:
        raise IngestError(f"파일을 읽을 수 없음: {path}", {"error": str(e)})
    with handle:
        header = None
        for line_no, text in enumerate(handle, start=1):
            if not text.strip() or text.lstrip().startswith("#"):
                continue
            row = next(csv.reader([text]))
            if header is None:
                header = [h.strip().lower() for h in row]
                if header != list(expected):
                    raise IngestError(f"헤더가 올바르지 않음 (기대: {','.join(expected)})",
                                      {"path": str(path), "header": row, "line": line_no})
                continue
            yield line_no, [cell.strip() for cell in row]
        if header is None:
            raise IngestError(f"헤더가 없음: {path}", {"path": str(path)})


def parse_population(path: PathLike) -> PopulationTable:
    """year,population CSV → PopulationTable (정렬은 내부에서, 중복 연도는 오류)"""
    anchors: Dict[int, float] = {}
    for line, row in _read_table(path, ("year", "population")):
        try:
            if len(row) != 2:
                raise ValueError(f"열 개수 {len(row)}")
            year, population = int(row[0]), float(row[1])
        except ValueError as e:
            raise IngestError(f"인구 표 {line}행이 숫자가 아님: {row}", {"line": line, "error": str(e)})
        if year in anchors:
            raise IngestError(f"인구 표에 중복 연도 {year} ({line}행)", {"line": line, "year": year})
        anchors[year] = population
    try:
        return PopulationTable.from_mapping(anchors)
    except ValueError as e:
        raise IngestError(f"인구 표가 유효하지 않음: {e}", {"path": str(path)})


def parse_epochs(path: PathLike) -> List[EpochDefinition]:
    """name,start,end 표 → 에포크 목록 (파일 순서 유지)"""
    epochs: List[EpochDefinition] = []
    for line, row in _read_table(path, ("name", "start", "end")):
        try:
            if len(row) != 3:
                raise ValueError(f"열 개수 {len(row)}")
            epochs.append(EpochDefinition(row[0], int(row[1]), int(row[2])))
        except ValueError as e:
            raise IngestError(f"에포크 표 {line}행 오류: {e}", {"line": line})
    if not epochs:
        raise IngestError(f"에포크 표가 비어 있음: {path}")
    return epochs


# =============================================================================
# 출력
# =============================================================================

def write_csv(frame: pd.DataFrame, path: PathLike) -> Path:
    """결정적 CSV: 쉼표, UTF-8, '.' 소수점, 연도는 정수"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    out = frame.copy()
    for column in out.columns:
        if column == "year" or column.endswith("_year") or column in ("epoch_start", "epoch_end"):
            out[column] = out[column].astype("Int64")
    out.to_csv(path, index=False, float_format=config.CSV_FLOAT_FORMAT,
               lineterminator="\n", encoding="utf-8")
    return path


def write_series_csv(series_list: Sequence[YearlySeries], path: PathLike) -> Path:
    return write_csv(series_frame(series_list), path)


def read_series_csv(path: PathLike) -> List[YearlySeries]:
    """write_series_csv 출력의 역변환 (빈 칸은 해당 연도 없음)"""
    try:
        frame = pd.read_csv(path)
    except (OSError, pd.errors.ParserError) as e:
        raise IngestError(f"시계열 CSV를 읽을 수 없음: {path}", {"error": str(e)})
    if "year" not in frame.columns:
        raise IngestError(f"시계열 CSV에 year 열이 없음: {path}")
    out = []
    for column in frame.columns:
        if column == "year":
            continue
        part = frame[["year", column]].dropna()
        out.append(YearlySeries(column, part["year"].to_numpy(dtype=np.int64),
                                part[column].to_numpy(dtype=np.float64)))
    return out


def write_events_jsonl(events: Iterable[ProjectEvent], path: PathLike,
                       member_key=lambda node: f"c{node}") -> int:
    """이벤트를 표준 JSONL로 기록, 기록한 이벤트 수 반환"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for event in events:
            record = {"project_id": event.project_id, "year": event.completion_year,
                      "members": [member_key(m) for m in event.members]}
            f.write(json.dumps(record, separators=(",", ":")) + "\n")
            count += 1
    return count


def write_json(payload: Dict, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(payload, f, indent=2, sort_keys=True, ensure_ascii=False)
        f.write("\n")
    return path
