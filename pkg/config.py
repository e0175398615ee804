import os
from typing import Any, Dict, Optional

class Config:
    # 기본 설정
    CACHE_DIR = os.getenv("COLLABNET_CACHE_DIR", "./data/cache")
    LOG_LEVEL = os.getenv("COLLABNET_LOG_LEVEL", "INFO")
    LOG_DIR = os.getenv("COLLABNET_LOG_DIR", "logs")
    CODE_VERSION = "1.0.0"

    # 그래프 구성 설정
    TAU_PROJECT = int(os.getenv("COLLABNET_TAU_PROJECT", "2"))          # 프로젝트 완료 전 협업 기간 (년)
    SPILL_ROWS = int(os.getenv("COLLABNET_SPILL_ROWS", "2000000"))     # 정렬 런으로 축약하기 전 메모리 엣지 행 수
    SPILL_DIR: Optional[str] = os.getenv("COLLABNET_SPILL_DIR")        # 지정 시 정렬 런을 디스크에 기록
    MERGE_FAN_IN = int(os.getenv("COLLABNET_MERGE_FAN_IN", "8"))        # 메모리 런 압축 기준 개수
    WORKERS = int(os.getenv("COLLABNET_WORKERS", "1"))

    # 입력 검증 설정
    MAX_MALFORMED_FRACTION = float(os.getenv("COLLABNET_MAX_MALFORMED_FRACTION", "0.01"))
    YEAR_MIN: Optional[int] = int(os.environ["COLLABNET_YEAR_MIN"]) if os.getenv("COLLABNET_YEAR_MIN") else None
    YEAR_MAX: Optional[int] = int(os.environ["COLLABNET_YEAR_MAX"]) if os.getenv("COLLABNET_YEAR_MAX") else None

    # 시계열 설정
    SIZE_BIN_CAP = int(os.getenv("COLLABNET_SIZE_BIN_CAP", "10"))       # 팀 크기 분율의 상한 구간 ("10+")
    CENSOR_WINDOW = int(os.getenv("COLLABNET_CENSOR_WINDOW", "5"))      # 제거 기반 τ를 숨길 마지막 연도 수

    # 분포 피팅 설정
    MIN_FIT_SAMPLES = int(os.getenv("COLLABNET_MIN_FIT_SAMPLES", "50"))
    POWER_LAW_XMIN = int(os.getenv("COLLABNET_POWER_LAW_XMIN", "1"))
    WEIBULL_MAX_ITER = int(os.getenv("COLLABNET_WEIBULL_MAX_ITER", "200"))
    WEIBULL_COHORT_CENSOR_YEARS = int(os.getenv("COLLABNET_WEIBULL_COHORT_CENSOR_YEARS", "10"))
    GROWTH_MIN_YEARS = int(os.getenv("COLLABNET_GROWTH_MIN_YEARS", "20"))
    GROWTH_MIN_SEGMENT = int(os.getenv("COLLABNET_GROWTH_MIN_SEGMENT", "8"))

    # 에포크 분석 설정
    BASELINE_WINDOW = int(os.getenv("COLLABNET_BASELINE_WINDOW", "10"))
    BASELINE_MIN_YEARS = int(os.getenv("COLLABNET_BASELINE_MIN_YEARS", "5"))
    RECOVERY_TOLERANCE = float(os.getenv("COLLABNET_RECOVERY_TOLERANCE", "0.05"))

    # CSV 출력 설정
    CSV_FLOAT_FORMAT = "%.12g"

    # 실행 결과를 바꾸는 설정 (매니페스트에 기록)
    OUTPUT_SETTINGS = (
        "YEAR_MIN", "YEAR_MAX", "MAX_MALFORMED_FRACTION", "SIZE_BIN_CAP", "CENSOR_WINDOW",
        "MIN_FIT_SAMPLES", "POWER_LAW_XMIN", "WEIBULL_MAX_ITER", "WEIBULL_COHORT_CENSOR_YEARS",
        "GROWTH_MIN_YEARS", "GROWTH_MIN_SEGMENT", "BASELINE_WINDOW", "BASELINE_MIN_YEARS",
        "RECOVERY_TOLERANCE", "CSV_FLOAT_FORMAT",
    )

    def effective_settings(self) -> Dict[str, Any]:
        return {name.lower(): getattr(self, name) for name in self.OUTPUT_SETTINGS}

config = Config()
