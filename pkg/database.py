"""
집계 캐시 관리자
ingest 결과(그래프 배열, 연도별 집계, 참여자 사전)를 SQLite + npz로 보관
캐시 키 = sha256(입력 파일 해시, tau_project, 코드 버전)
"""
import hashlib
import json
import os
from contextlib import contextmanager
from pathlib import Path
from typing import Dict, Generator, List, Optional, Tuple

import numpy as np
from sqlalchemy import create_engine, delete, event, insert, select
from sqlalchemy.exc import SQLAlchemyError
from sqlalchemy.orm import sessionmaker, Session
from sqlalchemy.pool import StaticPool

from config import config
from core_graph import TemporalGraph
from exceptions import CacheMissError, IngestError
from ingest import ContributorRegistry
from logging_config import get_logger
from models import Base, CacheEntry, ContributorKey, YearlyAggregate

logger = get_logger("database")

DB_FILENAME = "aggregates.sqlite"


def compute_cache_key(input_hashes: Dict[str, str], tau_project: int,
                      code_version: str = config.CODE_VERSION) -> str:
    payload = json.dumps(
        {"inputs": input_hashes, "tau_project": tau_project, "code_version": code_version},
        sort_keys=True,
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


class AggregateCacheManager:
    """집계 캐시 매니저 (캐시는 입력으로부터 언제든 재생성 가능)"""

    def __init__(self, cache_dir: Optional[str] = None):
        self.cache_dir = Path(cache_dir or config.CACHE_DIR)
        self.db_path = self.cache_dir / DB_FILENAME
        self.engine = None
        self.SessionLocal = None
        self._setup_database()

    def _setup_database(self):
        """데이터베이스 설정 및 연결"""
        try:
            self.cache_dir.mkdir(parents=True, exist_ok=True)
            self.engine = create_engine(
                f"sqlite:///{self.db_path}",
                poolclass=StaticPool,
                connect_args={"check_same_thread": False, "timeout": 30},
            )

            @event.listens_for(self.engine, "connect")
            def set_sqlite_pragma(dbapi_connection, connection_record):
                cursor = dbapi_connection.cursor()
                cursor.execute("PRAGMA foreign_keys=ON")
                cursor.execute("PRAGMA journal_mode=WAL")
                cursor.close()

            self.SessionLocal = sessionmaker(bind=self.engine, autoflush=False, expire_on_commit=False)
            Base.metadata.create_all(bind=self.engine)
            logger.debug("캐시 데이터베이스 초기화 완료", extra_data={"db_path": str(self.db_path)})
        except (SQLAlchemyError, OSError) as e:
            logger.error("캐시 데이터베이스 초기화 실패", extra_data={"error": str(e)})
            raise IngestError(f"캐시 데이터베이스 초기화 실패: {e}", {"db_path": str(self.db_path)})

    @contextmanager
    def get_session(self) -> Generator[Session, None, None]:
        """컨텍스트 매니저를 사용한 안전한 세션 관리"""
        session = self.SessionLocal()
        try:
            yield session
            session.commit()
        except SQLAlchemyError as e:
            session.rollback()
            logger.error("캐시 트랜잭션 실패", extra_data={"error": str(e)})
            raise IngestError(f"캐시 작업 실패: {e}")
        finally:
            session.close()

    def graph_path(self, cache_key: str) -> Path:
        return self.cache_dir / f"graph_{cache_key[:24]}.npz"

    def rejects_path(self, cache_key: str) -> Path:
        """ingest 중 스트리밍으로 기록되는 거부 레코드 CSV"""
        return self.cache_dir / f"rejects_{cache_key[:24]}.csv"

    def store(
        self,
        cache_key: str,
        graph: TemporalGraph,
        input_hashes: Dict[str, str],
        aggregates: List[Dict[str, object]],
        registry: Optional[ContributorRegistry] = None,
        summary: Optional[Dict[str, object]] = None,
    ) -> CacheEntry:
        """그래프와 연도별 집계 저장 (같은 키가 있으면 교체)"""
        path = self.graph_path(cache_key)
        tmp = path.with_suffix(".tmp.npz")
        np.savez(tmp, **graph.state())
        os.replace(tmp, path)

        with self.get_session() as session:
            session.execute(delete(ContributorKey).where(ContributorKey.cache_key == cache_key))
            existing = session.get(CacheEntry, cache_key)
            if existing is not None:
                session.delete(existing)
                session.flush()

            entry = CacheEntry(
                cache_key=cache_key,
                code_version=config.CODE_VERSION,
                tau_project=graph.tau_project,
                graph_path=path.name,
                n_events=graph.report.accepted_events,
                n_nodes=graph.num_nodes,
                n_timelines=graph.num_timelines,
            )
            entry.input_hashes_dict = input_hashes
            entry.ingest_summary_dict = summary or {}
            entry.aggregates = [YearlyAggregate(cache_key=cache_key, **row) for row in aggregates]
            session.add(entry)
            session.flush()

            if registry is not None and len(registry):
                session.execute(insert(ContributorKey), [
                    {"cache_key": cache_key, "source_key": key, "node_id": node}
                    for key, node in registry.items()
                ])

        logger.info("집계 캐시 저장", extra_data={
            "aggregate_years": len(aggregates), "graph_path": str(path),
        }, cache_key=cache_key)
        return entry

    def lookup(self, cache_key: str) -> Optional[CacheEntry]:
        with self.get_session() as session:
            return session.get(CacheEntry, cache_key)

    def load_graph(self, cache_key: str) -> TemporalGraph:
        """캐시 키에 해당하는 그래프 로드 (없으면 CacheMissError)"""
        entry = self.lookup(cache_key)
        path = self.cache_dir / entry.graph_path if entry is not None else None
        if entry is None or not path.exists():
            logger.info("캐시 미스", cache_key=cache_key)
            raise CacheMissError(
                "집계 캐시가 없습니다. 같은 입력과 --tau-project로 먼저 'ingest'를 실행하세요",
                {"cache_key": cache_key, "cache_dir": str(self.cache_dir)}
            )
        with np.load(path) as data:
            graph = TemporalGraph.from_state({name: data[name] for name in data.files})
        logger.info("캐시 적중", extra_data={"graph_path": str(path)}, cache_key=cache_key)
        return graph

    def load_aggregates(self, cache_key: str) -> List[Dict[str, object]]:
        with self.get_session() as session:
            rows = session.execute(
                select(YearlyAggregate).where(YearlyAggregate.cache_key == cache_key).order_by(YearlyAggregate.year)
            ).scalars().all()
            return [
                {"year": r.year, "new_nodes": r.new_nodes, "active_nodes": r.active_nodes,
                 "removed_nodes": r.removed_nodes, "new_timelines": r.new_timelines,
                 "ended_timelines": r.ended_timelines, "event_count": r.event_count,
                 "mean_team_size": r.mean_team_size}
                for r in rows
            ]

    def load_registry(self, cache_key: str) -> ContributorRegistry:
        with self.get_session() as session:
            keys = session.execute(
                select(ContributorKey.source_key).where(ContributorKey.cache_key == cache_key)
                .order_by(ContributorKey.node_id)
            ).scalars().all()
        return ContributorRegistry(keys)

    def close(self) -> None:
        if self.engine is not None:
            self.engine.dispose()
