"""
CLI 최상위 예외 핸들러들
예외를 구조화 로그 한 건과 종료 코드로 변환
"""
import sys
import traceback
from typing import Any, Dict, Optional

from pydantic import ValidationError

from logging_config import get_logger
from exceptions import (
    CollabNetBaseException, EXIT_FATAL_INPUT, EXIT_PARTIAL_FAILURE,
    error_payload, exit_code_for,
)

# 로거 인스턴스
logger = get_logger("exception_handlers")


def collabnet_exception_handler(exc: CollabNetBaseException, context: Dict[str, Any]) -> int:
    """collabnet 커스텀 예외 핸들러"""
    code = exc.exit_code
    log = logger.error if code == EXIT_FATAL_INPUT else logger.warning
    log(
        f"커스텀 예외 발생: {exc.__class__.__name__}",
        extra_data={
            "exception_type": exc.__class__.__name__,
            "message": exc.message,
            "details": exc.details,
            "exit_code": code,
            **context,
        },
        subcommand=context.get("subcommand"),
    )
    return code


def validation_exception_handler(exc: ValidationError, context: Dict[str, Any]) -> int:
    """설정 검증 실패 (잘못된 플래그 조합/값)"""
    logger.warning(
        "입력 검증 실패",
        extra_data={"validation_errors": exc.errors(include_url=False), **context},
        subcommand=context.get("subcommand"),
    )
    return EXIT_FATAL_INPUT


def general_exception_handler(exc: BaseException, context: Dict[str, Any]) -> int:
    """예상하지 못한 예외는 부분 실패로 처리"""
    logger.critical(
        f"예상하지 못한 예외 발생: {exc.__class__.__name__}",
        extra_data={
            "exception_type": exc.__class__.__name__,
            "message": str(exc),
            "traceback": traceback.format_exception(type(exc), exc, exc.__traceback__),
            **context,
        },
        subcommand=context.get("subcommand"),
    )
    return exit_code_for(exc)


def handle_cli_exception(exc: BaseException, context: Optional[Dict[str, Any]] = None) -> int:
    """예외 종류별 핸들러로 분기하고 사용자용 한 줄 메시지를 stderr에 출력"""
    context = context or {}
    if isinstance(exc, CollabNetBaseException):
        code = collabnet_exception_handler(exc, context)
    elif isinstance(exc, ValidationError):
        code = validation_exception_handler(exc, context)
    else:
        code = general_exception_handler(exc, context)

    payload = error_payload(exc)
    print(f"error[{payload['error_type']}]: {payload['message']}", file=sys.stderr)
    return code if code in (EXIT_FATAL_INPUT, EXIT_PARTIAL_FAILURE) else EXIT_PARTIAL_FAILURE
