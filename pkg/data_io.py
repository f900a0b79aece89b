"""
File formats: grouped and single-column data CSVs, survival-curve
coordinates, null-distribution files and power-study configurations.
"""
import csv
import io
import json
import logging
import math
import os
import tempfile
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Sequence, TextIO, Tuple, Union

import numpy as np
from pydantic import ValidationError

from exceptions import ConfigError, InputDataError
from null_distribution import NullDistribution
from power_study import PowerConfig
from samples import GroupedSamples, Sample

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

SURVIVAL_HEADER = ("group", "x", "survival")

# survival values are read back as fractions with at most this denominator
MAX_GROUP_SIZE = 10 ** 7


def _read_text(path: PathLike) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except FileNotFoundError:
        raise InputDataError(f"data file not found: {path}")
    except (OSError, UnicodeDecodeError) as e:
        raise InputDataError(f"cannot read {path}: {e}")


def _parse_value(raw: str) -> float:
    value = float(raw.strip())
    if not math.isfinite(value):
        raise ValueError(f"value '{raw.strip()}' is not finite")
    return value


def _column_index(header: List[str], name: str, path: PathLike) -> int:
    normalized = [h.strip().lower() for h in header]
    if name not in normalized:
        raise InputDataError(f"{path}: header must contain a '{name}' column", [(1, f"got {','.join(header)}")])
    return normalized.index(name)


# --- Data files ---

def read_grouped_csv(path: PathLike, groups: Optional[Sequence[str]] = None) -> Tuple[GroupedSamples, bool]:
    """
    Read a ``group,value`` CSV.

    ``groups`` fixes the hypothesis order (first listed is hypothesized
    stochastically largest) and may select a subset. Without it groups keep
    their order of first occurrence. Returns the samples and whether the
    default order was used.
    """
    rows = list(csv.reader(io.StringIO(_read_text(path))))
    if not rows:
        raise InputDataError(f"{path} is empty")
    group_col = _column_index(rows[0], "group", path)
    value_col = _column_index(rows[0], "value", path)

    values: Dict[str, List[float]] = {}
    problems: List[Tuple[int, str]] = []
    for line, row in enumerate(rows[1:], start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != len(rows[0]):
            problems.append((line, f"expected {len(rows[0])} fields, got {len(row)}"))
            continue
        label = row[group_col].strip()
        if not label:
            problems.append((line, "empty group label"))
            continue
        try:
            values.setdefault(label, []).append(_parse_value(row[value_col]))
        except ValueError:
            problems.append((line, f"cannot parse value '{row[value_col].strip()}'"))

    if problems:
        logger.error(f"{len(problems)} unparseable row(s) in {path}")
        raise InputDataError(f"{path} has unparseable rows", problems)

    default_order = groups is None
    if groups is None:
        order = list(values.keys())
    else:
        order = [g.strip() for g in groups]
        unknown = [g for g in order if g not in values]
        if unknown:
            raise InputDataError(f"unknown group(s) {', '.join(unknown)}; the file has {', '.join(values)}")
        if len(set(order)) != len(order):
            raise InputDataError(f"group list repeats a group: {', '.join(order)}")
        ignored = [g for g in values if g not in order]
        if ignored:
            logger.info(f"Ignoring group(s) not listed in the hypothesis order: {', '.join(ignored)}")

    if len(order) < 2:
        raise InputDataError(f"at least 2 groups are required, found {len(order)} in {path}")
    return GroupedSamples.from_mapping(values, order), default_order


def read_value_csv(path: PathLike, label: str = "sample") -> Sample:
    """Read a one-sample CSV with a ``value`` column."""
    rows = list(csv.reader(io.StringIO(_read_text(path))))
    if not rows:
        raise InputDataError(f"{path} is empty")
    value_col = _column_index(rows[0], "value", path)

    values: List[float] = []
    problems: List[Tuple[int, str]] = []
    for line, row in enumerate(rows[1:], start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        try:
            values.append(_parse_value(row[value_col]))
        except (IndexError, ValueError):
            problems.append((line, f"cannot parse row {','.join(row)}"))
    if problems:
        logger.error(f"{len(problems)} unparseable row(s) in {path}")
        raise InputDataError(f"{path} has unparseable rows", problems)
    if not values:
        raise InputDataError(f"{path} has no observations")
    return Sample(values=values, label=label)


# --- Survival coordinates ---

def survival_rows(data: GroupedSamples) -> List[Tuple[str, float, float]]:
    """(group, x, 1 - Fhat_j(x)) at every distinct value of each group."""
    rows = []
    for group in data.groups:
        arr = group.array
        points = np.unique(arr)
        survival = (group.n - np.searchsorted(arr, points, side="right")) / group.n
        rows += [(group.label, float(x), float(s)) for x, s in zip(points, survival)]
    return rows


def write_survival_csv(data: GroupedSamples, out: TextIO) -> int:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(SURVIVAL_HEADER)
    rows = survival_rows(data)
    for label, x, survival in rows:
        writer.writerow([label, repr(x), repr(survival)])
    return len(rows)


def read_survival_csv(path: PathLike) -> Dict[str, List[Tuple[float, float]]]:
    rows = list(csv.reader(io.StringIO(_read_text(path))))
    if not rows or tuple(h.strip().lower() for h in rows[0]) != SURVIVAL_HEADER:
        raise InputDataError(f"{path}: expected header {','.join(SURVIVAL_HEADER)}")
    curves: Dict[str, List[Tuple[float, float]]] = {}
    problems: List[Tuple[int, str]] = []
    for line, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        try:
            label, x, survival = row
            curves.setdefault(label, []).append((float(x), float(survival)))
        except ValueError:
            problems.append((line, f"cannot parse row {','.join(row)}"))
    if problems:
        raise InputDataError(f"{path} has unparseable rows", problems)
    return curves


def ecdf_from_survival(steps: Sequence[Tuple[float, float]], x: float) -> float:
    """
    Right-continuous ecdf at x rebuilt from (x, survival) steps sorted by x.

    A stored survival is (n - c)/n for a group of at most ``MAX_GROUP_SIZE``
    observations; it is recovered as that exact fraction, so the result is
    c/n rounded once, the same float ``samples.ecdf_eval`` returns.
    """
    xs = [step[0] for step in steps]
    idx = int(np.searchsorted(xs, x, side="right"))
    if idx == 0:
        return 0.0
    survival = Fraction(steps[idx - 1][1]).limit_denominator(MAX_GROUP_SIZE)
    return float(1 - survival)


# --- Null distributions ---

def write_null_distribution(path: PathLike, dist: NullDistribution) -> None:
    """Write atomically; readers see either the old file or the complete new one."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=target.parent, prefix=".tmp-", suffix=".txt")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(dist.to_text())
        os.replace(tmp_name, target)
    except OSError:
        Path(tmp_name).unlink(missing_ok=True)
        raise


def read_null_distribution(path: PathLike) -> NullDistribution:
    return NullDistribution.from_text(_read_text(path))


# --- Power-study configuration ---

def load_scenarios(path: PathLike) -> PowerConfig:
    """
    Load a JSON power-study configuration: either a list of scenario
    objects or an object with a ``scenarios`` list.
    """
    text = _read_text(path)
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path} is not valid JSON", [f"line {e.lineno}: {e.msg}"])
    if isinstance(raw, list):
        raw = {"scenarios": raw}
    try:
        return PowerConfig.model_validate(raw)
    except ValidationError as e:
        field_errors = [
            f"{'.'.join(str(part) for part in error['loc'])}: {error['msg']}" for error in e.errors()
        ]
        logger.error(f"Invalid power configuration {path}: {len(field_errors)} error(s)")
        raise ConfigError(f"invalid power configuration {path}", field_errors)
