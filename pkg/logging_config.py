"""
파이프라인 로깅 설정
- 콘솔(stderr): 사람이 읽는 한 줄 형식, CSV/JSON 산출물과 섞이지 않음
- 파일: JSON 한 줄 로그 (collabnet.log / error.log, 회전)
- 로그 레코드에 실행 컨텍스트(서브커맨드, 단계, 연도, 에포크, 캐시 키) 부착
"""
import functools
import json
import logging
import logging.config
import time
from contextlib import contextmanager
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable, Dict, Iterator, Optional

ROOT_LOGGER = "collabnet"
LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")
MAX_LOG_BYTES = 10 * 1024 * 1024


class StructuredFormatter(logging.Formatter):
    """JSON 한 줄 포매터 (파일 핸들러용)"""

    CONTEXT_FIELDS = ('subcommand', 'step', 'year', 'series_name', 'epoch', 'operation', 'duration', 'cache_key')

    def format(self, record: logging.LogRecord) -> str:
        entry: Dict[str, Any] = {
            "timestamp": datetime.fromtimestamp(record.created, timezone.utc).isoformat().replace("+00:00", "Z"),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
            "where": f"{record.module}.{record.funcName}:{record.lineno}",
        }
        entry.update({name: getattr(record, name) for name in self.CONTEXT_FIELDS if hasattr(record, name)})
        if getattr(record, "extra_data", None):
            entry["extra"] = record.extra_data
        if record.exc_info and record.exc_info[0] is not None:
            entry["exception"] = {
                "type": record.exc_info[0].__name__,
                "message": str(record.exc_info[1]),
                "traceback": self.formatException(record.exc_info),
            }
        return json.dumps(entry, ensure_ascii=False, default=str)


class ConsoleFormatter(logging.Formatter):
    """콘솔용: 시각 레벨 로거 [컨텍스트] 메시지"""

    def __init__(self):
        super().__init__("%(asctime)s %(levelname)-7s %(name)s %(context)s%(message)s", "%H:%M:%S")

    def format(self, record: logging.LogRecord) -> str:
        tags = [f"{name}={getattr(record, name)}" for name in StructuredFormatter.CONTEXT_FIELDS
                if hasattr(record, name) and name != "duration"]
        record.context = f"[{' '.join(tags)}] " if tags else ""
        return super().format(record)


class ContextualLogger:
    """고정 컨텍스트 + 호출별 컨텍스트를 붙여 기록하는 로거 래퍼

    logger.info("메시지", extra_data={...}, step="fit", year=1950)
    """

    def __init__(self, name: str, context: Optional[Dict[str, Any]] = None):
        self.logger = logging.getLogger(name)
        self.context = dict(context or {})

    def _log(self, level: int, message: str, extra_data: Optional[Dict[str, Any]] = None,
             exc_info: bool = False, **fields: Any) -> None:
        if not self.logger.isEnabledFor(level):
            return
        extra: Dict[str, Any] = {**self.context, **fields}
        if extra_data:
            extra["extra_data"] = extra_data
        self.logger.log(level, message, extra=extra, exc_info=exc_info, stacklevel=3)

    def debug(self, message: str, extra_data: Optional[Dict[str, Any]] = None, **fields):
        self._log(logging.DEBUG, message, extra_data, **fields)

    def info(self, message: str, extra_data: Optional[Dict[str, Any]] = None, **fields):
        self._log(logging.INFO, message, extra_data, **fields)

    def warning(self, message: str, extra_data: Optional[Dict[str, Any]] = None, **fields):
        self._log(logging.WARNING, message, extra_data, **fields)

    def error(self, message: str, extra_data: Optional[Dict[str, Any]] = None, **fields):
        self._log(logging.ERROR, message, extra_data, **fields)

    def critical(self, message: str, extra_data: Optional[Dict[str, Any]] = None, **fields):
        self._log(logging.CRITICAL, message, extra_data, **fields)

    def exception(self, message: str, extra_data: Optional[Dict[str, Any]] = None, **fields):
        """ERROR 레벨 + 현재 예외의 traceback"""
        self._log(logging.ERROR, message, extra_data, exc_info=True, **fields)

    def with_context(self, **context) -> 'ContextualLogger':
        return ContextualLogger(self.logger.name, {**self.context, **context})


def _logging_config(level: str, log_dir: Path) -> Dict[str, Any]:
    def rotating(filename: str, handler_level: str) -> Dict[str, Any]:
        return {
            "class": "logging.handlers.RotatingFileHandler",
            "level": handler_level,
            "formatter": "structured",
            "filename": str(log_dir / filename),
            "maxBytes": MAX_LOG_BYTES,
            "backupCount": 5,
            "encoding": "utf-8",
        }

    return {
        "version": 1,
        "disable_existing_loggers": False,
        "formatters": {
            "structured": {"()": StructuredFormatter},
            "console": {"()": ConsoleFormatter},
        },
        "handlers": {
            "console": {"class": "logging.StreamHandler", "level": level, "formatter": "console",
                        "stream": "ext://sys.stderr"},
            "file": rotating("collabnet.log", "DEBUG"),
            "error_file": rotating("error.log", "ERROR"),
        },
        "loggers": {
            ROOT_LOGGER: {"level": "DEBUG", "handlers": ["console", "file", "error_file"], "propagate": False},
        },
        "root": {"level": "WARNING", "handlers": ["console"]},
    }


def setup_logging(log_level: str = "INFO", log_dir: str = "logs") -> None:
    """로깅 초기화 (여러 번 호출해도 핸들러가 중복되지 않음)"""
    level = log_level.upper() if log_level.upper() in LEVELS else "INFO"
    path = Path(log_dir)
    path.mkdir(parents=True, exist_ok=True)
    logging.config.dictConfig(_logging_config(level, path))


def get_logger(name: str, context: Optional[Dict[str, Any]] = None) -> ContextualLogger:
    """'collabnet.' 하위 이름의 컨텍스트 로거"""
    full_name = name if name.startswith(ROOT_LOGGER) else f"{ROOT_LOGGER}.{name}"
    return ContextualLogger(full_name, context)


@contextmanager
def timed(logger: ContextualLogger, operation: str, **fields: Any) -> Iterator[None]:
    """블록 실행 시간을 duration 필드로 기록, 실패 시 ERROR로 기록 후 재전파"""
    start = time.perf_counter()
    try:
        yield
    except Exception as e:
        logger.error(f"'{operation}' 실패", extra_data={"error": str(e)},
                     operation=operation, duration=round(time.perf_counter() - start, 3), **fields)
        raise
    logger.info(f"'{operation}' 완료", operation=operation,
                duration=round(time.perf_counter() - start, 3), **fields)


def log_execution_time(logger: ContextualLogger) -> Callable:
    """함수 실행 시간을 기록하는 데코레이터 (step_* 메서드는 단계 이름도 기록)"""
    def decorator(func: Callable) -> Callable:
        fields = {"step": func.__name__[len("step_"):]} if func.__name__.startswith("step_") else {}

        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            with timed(logger, func.__name__, **fields):
                return func(*args, **kwargs)

        return wrapper
    return decorator
