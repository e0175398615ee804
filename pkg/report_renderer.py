"""
실행 요약 렌더러
CSV 묶음과 같은 디렉터리에 report.md를 jinja2 템플릿으로 생성
"""
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from jinja2 import Environment, FileSystemLoader, StrictUndefined

from epoch_analysis import EpochReport
from fitdist import GrowthFit, ParameterEvolution
from logging_config import get_logger
from models import RunManifest

logger = get_logger("report_renderer")

TEMPLATE_DIR = Path(__file__).resolve().parent / "templates"
TEMPLATE_NAME = "report.md.j2"


def _fmt(value: Any, digits: int = 3) -> str:
    """표 셀 포맷 (None/NaN은 '-')"""
    if value is None:
        return "-"
    if isinstance(value, (float, np.floating)):
        if not np.isfinite(value):
            return "-"
        return f"{value:.{digits}f}"
    return str(value)


def _environment() -> Environment:
    env = Environment(
        loader=FileSystemLoader(str(TEMPLATE_DIR)),
        undefined=StrictUndefined,
        trim_blocks=True,
        lstrip_blocks=True,
        keep_trailing_newline=True,
    )
    env.filters["fmt"] = _fmt
    return env


def _evolution_summary(evolution: Optional[ParameterEvolution]) -> Optional[Dict[str, Any]]:
    if evolution is None:
        return None
    params = evolution.parameter_series()
    main_name = "gamma" if evolution.fit_kind == "power_law" else "weibull_k"
    main = params[main_name]
    return {
        "fit_kind": evolution.fit_kind,
        "cohorting": evolution.cohorting,
        "fitted": len(evolution.fits),
        "skipped": len(evolution.skips),
        "parameter": main_name,
        "median": float(np.median(main.values)) if len(main) else None,
        "first_year": int(main.years[0]) if len(main) else None,
        "last_year": int(main.years[-1]) if len(main) else None,
        "censor_flagged": len(evolution.censor_flagged),
    }


def render_report(
    manifest: RunManifest,
    ingest_summary: Optional[Dict[str, Any]] = None,
    evolutions: Sequence[ParameterEvolution] = (),
    growth: Optional[GrowthFit] = None,
    epoch_reports: Sequence[EpochReport] = (),
    notes: Optional[List[str]] = None,
) -> str:
    """매니페스트와 단계 결과로 report.md 본문 생성 (타임스탬프 없음)"""
    template = _environment().get_template(TEMPLATE_NAME)
    text = template.render(
        manifest=manifest,
        ingest=ingest_summary or {},
        evolutions=[s for s in (_evolution_summary(e) for e in evolutions) if s is not None],
        growth=growth,
        epochs=[r.as_row() for r in epoch_reports],
        notes=notes or [],
    )
    logger.debug("실행 요약 렌더링 완료", extra_data={"chars": len(text)}, operation="render_report")
    return text


def write_report(path: Path, **kwargs) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(render_report(**kwargs))
    return path
