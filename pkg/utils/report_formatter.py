import json
import math
from typing import Any, Dict, List, Optional, Sequence, Tuple

from pydantic import BaseModel

SIGNIFICANT_DIGITS = 6


def round_significant(value: float, digits: int = SIGNIFICANT_DIGITS) -> float:
    if not math.isfinite(value) or value == 0:
        return value
    return float(f"{value:.{digits}g}")


def normalize(value: Any) -> Any:
    """
    Plain JSON-ready structure: models dumped, tuples as lists, dict keys as
    strings, floats rounded to 6 significant digits.
    """
    if isinstance(value, BaseModel):
        return normalize(value.model_dump())
    if isinstance(value, dict):
        return {_key(k): normalize(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [normalize(v) for v in value]
    if isinstance(value, bool) or value is None or isinstance(value, (int, str)):
        return value
    if isinstance(value, float):
        return round_significant(value)
    if hasattr(value, "item"):
        return normalize(value.item())
    return value


def _key(key: Any) -> str:
    if isinstance(key, float):
        return f"{key:g}"
    return str(key)


def format_report(
    success: bool = True,
    data: Any = None,
    message: str = "",
    error: Optional[str] = None,
    meta: Optional[Dict[str, Any]] = None,
) -> Dict[str, Any]:
    """
    Standard envelope for every command's structured output.

    Args:
        success: Whether the command completed
        data: The main payload
        message: Human-readable summary
        error: Error message if the command failed
        meta: Provenance needed to regenerate the result

    Returns:
        dict: Envelope with None entries removed
    """
    report = {
        "success": success,
        "data": normalize(data),
        "message": message,
        "error": error,
        "meta": normalize(meta) if meta is not None else None,
    }
    report = {k: v for k, v in report.items() if v is not None}
    if "meta" in report:
        report["meta"] = {k: v for k, v in report["meta"].items() if v is not None}
    return report


def success_report(data: Any = None, message: str = "Completed", **kwargs) -> Dict[str, Any]:
    """Helper for successful commands"""
    return format_report(success=True, data=data, message=message, **kwargs)


def error_report(message: str, error: Optional[str] = None, **kwargs) -> Dict[str, Any]:
    """Helper for failed commands"""
    return format_report(success=False, message=message, error=error or message, **kwargs)


def to_json(report: Dict[str, Any]) -> str:
    """Sorted keys, so identical reports serialize to identical bytes."""
    return json.dumps(report, sort_keys=True, indent=2)


def fmt(value: Optional[float]) -> str:
    if value is None:
        return "-"
    return f"{value:.{SIGNIFICANT_DIGITS}g}"


def render_fields(title: str, fields: Sequence[Tuple[str, str]]) -> str:
    width = max((len(name) for name, _ in fields), default=0)
    lines = [title, "=" * len(title)]
    lines += [f"{name.ljust(width)} : {value}" for name, value in fields]
    return "\n".join(lines)


def render_table(header: Sequence[str], rows: List[Sequence[Any]]) -> str:
    cells = [[str(h) for h in header]] + [[fmt(c) if isinstance(c, float) else str(c) for c in row] for row in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(header))]
    lines = ["  ".join(cell.rjust(widths[i]) for i, cell in enumerate(row)) for row in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)
