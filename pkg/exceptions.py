"""
커스텀 예외 클래스들과 종료 코드 매핑 유틸리티
"""
from typing import Optional, Dict, Any


EXIT_SUCCESS = 0
EXIT_FATAL_INPUT = 1
EXIT_PARTIAL_FAILURE = 2


class CollabNetBaseException(Exception):
    """collabnet 시스템의 기본 예외 클래스"""

    exit_code = EXIT_FATAL_INPUT

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        self.message = message
        self.details = details or {}
        super().__init__(self.message)


class IngestError(CollabNetBaseException):
    """입력 수집 관련 치명적 예외 (중복 project_id, 읽기 실패, 헤더 오류 등)"""
    pass


class RecordRejected(CollabNetBaseException):
    """레코드 단위 거부 - 수집되어 집계될 뿐 최상위로 전파되지 않음"""

    def __init__(self, message: str, line: Optional[int] = None, details: Optional[Dict[str, Any]] = None):
        self.line = line
        super().__init__(message, {**(details or {}), "line": line})


class PopulationRangeError(CollabNetBaseException):
    """인구 앵커 범위를 벗어난 연도 조회"""
    exit_code = EXIT_PARTIAL_FAILURE


class SeriesAlignmentError(CollabNetBaseException):
    """연도 도메인이 맞지 않는 시계열 연산"""
    exit_code = EXIT_PARTIAL_FAILURE


class InsufficientDataError(CollabNetBaseException):
    """피팅 또는 기준선 계산에 데이터가 부족함"""
    exit_code = EXIT_PARTIAL_FAILURE


class DegenerateDistributionError(CollabNetBaseException):
    """꼬리가 없는 퇴화 분포 (모든 표본이 xmin과 같음 등)"""
    exit_code = EXIT_PARTIAL_FAILURE


class ConvergenceError(CollabNetBaseException):
    """수치 해법이 반복 한도 안에 수렴하지 못함"""
    exit_code = EXIT_PARTIAL_FAILURE


class FitInputError(CollabNetBaseException):
    """피팅 입력값 오류 (0 이하의 기간 등)"""
    exit_code = EXIT_PARTIAL_FAILURE


class ScenarioValidationError(CollabNetBaseException):
    """합성 시나리오 설정 검증 실패 - details['fields']에 문제 필드 목록"""
    pass


class CacheMissError(CollabNetBaseException):
    """집계 캐시가 없음 - ingest를 먼저 실행해야 함"""
    pass


class PipelineStepError(CollabNetBaseException):
    """분석 단계 일부 실패"""
    exit_code = EXIT_PARTIAL_FAILURE


def exit_code_for(exc: BaseException) -> int:
    """예외를 CLI 종료 코드로 변환"""
    if isinstance(exc, CollabNetBaseException):
        return exc.exit_code
    if isinstance(exc, (FileNotFoundError, PermissionError)):
        return EXIT_FATAL_INPUT
    return EXIT_PARTIAL_FAILURE


def error_payload(exc: BaseException) -> Dict[str, Any]:
    """구조화 로그/매니페스트용 에러 정보"""
    if isinstance(exc, CollabNetBaseException):
        return {
            "error_type": exc.__class__.__name__,
            "message": exc.message,
            "details": exc.details,
        }
    return {
        "error_type": exc.__class__.__name__,
        "message": str(exc),
        "details": {},
    }
