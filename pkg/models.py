from sqlalchemy import Column, String, Text, DateTime, Float, Integer, ForeignKey, Index
from sqlalchemy.orm import declarative_base, relationship
from datetime import datetime
import json
from typing import Any, Dict, List, Literal, Optional, Tuple
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

Base = declarative_base()


class CacheEntry(Base):
    __tablename__ = 'cache_entries'

    cache_key = Column(String, primary_key=True)  # (입력 해시, tau_project, 코드 버전)의 sha256
    code_version = Column(String, nullable=False)
    tau_project = Column(Integer, nullable=False)
    input_hashes = Column(Text)  # JSON string
    graph_path = Column(String, nullable=False)  # 그래프 배열 npz 파일
    ingest_summary = Column(Text)  # JSON string
    n_events = Column(Integer, default=0)
    n_nodes = Column(Integer, default=0)
    n_timelines = Column(Integer, default=0)
    created_at = Column(DateTime, default=datetime.utcnow)

    aggregates = relationship("YearlyAggregate", cascade="all, delete-orphan", back_populates="entry")

    @property
    def input_hashes_dict(self) -> Dict[str, str]:
        return json.loads(self.input_hashes) if self.input_hashes else {}

    @input_hashes_dict.setter
    def input_hashes_dict(self, value: Dict[str, str]):
        self.input_hashes = json.dumps(value, sort_keys=True)

    @property
    def ingest_summary_dict(self) -> Dict[str, Any]:
        return json.loads(self.ingest_summary) if self.ingest_summary else {}

    @ingest_summary_dict.setter
    def ingest_summary_dict(self, value: Dict[str, Any]):
        self.ingest_summary = json.dumps(value, sort_keys=True, ensure_ascii=False)


class YearlyAggregate(Base):
    __tablename__ = 'yearly_aggregates'

    id = Column(Integer, primary_key=True, autoincrement=True)
    cache_key = Column(String, ForeignKey('cache_entries.cache_key'), nullable=False)
    year = Column(Integer, nullable=False)
    new_nodes = Column(Integer, default=0)
    active_nodes = Column(Integer, default=0)  # 그 해 새 엣지를 가진 노드
    removed_nodes = Column(Integer, default=0)
    new_timelines = Column(Integer, default=0)
    ended_timelines = Column(Integer, default=0)
    event_count = Column(Integer, default=0)
    mean_team_size = Column(Float)

    entry = relationship("CacheEntry", back_populates="aggregates")

    __table_args__ = (Index('idx_yearly_aggregates_key_year', 'cache_key', 'year', unique=True),)


class ContributorKey(Base):
    __tablename__ = 'contributor_keys'

    id = Column(Integer, primary_key=True, autoincrement=True)
    cache_key = Column(String, ForeignKey('cache_entries.cache_key'), nullable=False)
    source_key = Column(String, nullable=False)
    node_id = Column(Integer, nullable=False)

    __table_args__ = (Index('idx_contributor_keys_key_node', 'cache_key', 'node_id', unique=True),)


# Pydantic 모델 (외부 레코드/설정용)
class RawEventRecord(BaseModel):
    """이벤트 JSONL/CSV 한 줄"""
    project_id: str
    year: int
    members: List[str]

    @field_validator('project_id', mode='before')
    @classmethod
    def _id_to_str(cls, value):
        if isinstance(value, (int, str)) and not isinstance(value, bool) and str(value).strip():
            return str(value).strip()
        raise ValueError("project_id는 비어 있지 않은 문자열/정수여야 함")

    @field_validator('year', mode='before')
    @classmethod
    def _strict_year(cls, value):
        if isinstance(value, bool) or (isinstance(value, float) and not value.is_integer()):
            raise ValueError("year는 정수여야 함")
        return value

    @field_validator('members', mode='before')
    @classmethod
    def _members_to_str(cls, value):
        if not isinstance(value, (list, tuple)):
            raise ValueError("members는 리스트여야 함")
        out = []
        for item in value:
            if isinstance(item, bool) or not isinstance(item, (int, str)) or not str(item).strip():
                raise ValueError(f"잘못된 멤버 키: {item!r}")
            out.append(str(item).strip())
        return out


class GrowthConfig(BaseModel):
    model_config = ConfigDict(extra='forbid')

    alpha: float = Field(ge=0)
    scale: float = Field(gt=0)
    breakpoint: Optional[int] = None
    alpha2: Optional[float] = Field(default=None, ge=0)

    @model_validator(mode='after')
    def _breakpoint_pair(self):
        if (self.breakpoint is None) != (self.alpha2 is None):
            raise ValueError("breakpoint와 alpha2는 함께 지정해야 함")
        return self


class TeamSizeConfig(BaseModel):
    model_config = ConfigDict(extra='forbid')

    kind: Literal['fixed', 'categorical', 'truncated_power_law', 'edge_power_law']
    size: Optional[int] = Field(default=None, ge=1)
    sizes: Optional[List[int]] = None
    weights: Optional[List[float]] = None
    gamma: Optional[float] = Field(default=None, gt=0)
    min_size: int = Field(default=1, ge=1)
    max_size: Optional[int] = Field(default=None, ge=1)

    @model_validator(mode='after')
    def _kind_fields(self):
        if self.kind == 'fixed' and self.size is None:
            raise ValueError("fixed 팀 크기에는 size가 필요함")
        if self.kind == 'categorical':
            if not self.sizes or not self.weights or len(self.sizes) != len(self.weights):
                raise ValueError("categorical 팀 크기에는 같은 길이의 sizes, weights가 필요함")
            if any(s < 1 for s in self.sizes) or any(w <= 0 for w in self.weights):
                raise ValueError("sizes는 1 이상, weights는 양수여야 함")
        if self.kind in ('truncated_power_law', 'edge_power_law'):
            if self.gamma is None or self.max_size is None:
                raise ValueError(f"{self.kind} 팀 크기에는 gamma와 max_size가 필요함")
            floor = 2 if self.kind == 'edge_power_law' else self.min_size
            if self.max_size < max(floor, self.min_size):
                raise ValueError("max_size가 너무 작음")
        return self


class CareerConfig(BaseModel):
    model_config = ConfigDict(extra='forbid')

    weibull_k: float = Field(gt=0)
    weibull_lambda: float = Field(gt=0)
    # 참여자를 경력 마지막 해(데이터 끝을 넘으면 마지막 연도)에 반드시 등장시켜 수명 = 경력
    schedule_exit: bool = False


class ShockConfig(BaseModel):
    model_config = ConfigDict(extra='forbid')

    epoch: str
    start: Optional[int] = None
    end: Optional[int] = None
    entry_multiplier: float = Field(default=1.0, gt=0)
    size_multiplier: float = Field(default=1.0, gt=0)
    recovery_ramp_years: int = Field(default=0, ge=0)

    @model_validator(mode='after')
    def _window(self):
        if (self.start is None) != (self.end is None):
            raise ValueError("start와 end는 함께 지정해야 함")
        if self.start is not None and self.start > self.end:
            raise ValueError("shock start가 end보다 큼")
        return self


class ScenarioConfig(BaseModel):
    model_config = ConfigDict(extra='forbid')

    seed: int = Field(ge=0, lt=2 ** 64)
    years: Tuple[int, int]
    growth: GrowthConfig
    team_size: TeamSizeConfig
    career: CareerConfig
    entrant_share: float = Field(gt=0, le=1)
    participation_cap: Optional[int] = Field(default=None, ge=1)
    shocks: List[ShockConfig] = Field(default_factory=list)

    @model_validator(mode='after')
    def _year_order(self):
        if self.years[0] > self.years[1]:
            raise ValueError("years의 시작이 끝보다 큼")
        if self.years[0] < 0:
            raise ValueError("연도별 시드 파생을 위해 years는 0 이상이어야 함")
        return self


class RunConfig(BaseModel):
    """CLI 실행 설정 (플래그 > 설정 파일 > 환경 변수 기본값)"""
    model_config = ConfigDict(extra='forbid')

    events: Optional[str] = None
    population: Optional[str] = None
    epochs: Optional[str] = None
    scenario: Optional[str] = None
    format: Optional[Literal['jsonl', 'csv']] = None
    tau_project: int = Field(ge=0)
    out: str
    seed: Optional[int] = Field(default=None, ge=0)
    censor_window: int = Field(ge=0)
    min_fit_samples: int = Field(ge=1)
    censoring: Literal['auto', 'on', 'off'] = 'auto'
    workers: int = Field(default=1, ge=1)
    cache_dir: str


class RunManifest(BaseModel):
    """재현용 실행 매니페스트 (타임스탬프 없음)"""
    subcommand: str
    code_version: str
    config: Dict[str, Any]
    settings: Dict[str, Any] = Field(default_factory=dict)  # 출력에 영향을 주는 환경 설정
    inputs: Dict[str, str]
    versions: Dict[str, str]
    cache_key: Optional[str] = None
    default_epochs_used: bool = False
    steps: Dict[str, str] = Field(default_factory=dict)
    outputs: List[str] = Field(default_factory=list)
