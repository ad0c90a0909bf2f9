"""On-disk formats: point samples, genomic-style intervals, curves, reports.

Readers reject malformed input instead of coercing it, and every error names
the offending line.  Writers use 17 significant digits so float values
round-trip exactly through the paired readers.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .estimator import CurveMeta, EstimateCurve
from .metrics import RiskReport
from .simulate import ObservationSet

__all__ = [
    "FileFormatError",
    "read_points_csv",
    "write_points_csv",
    "IntervalRecord",
    "read_intervals",
    "write_intervals",
    "intervals_to_observations",
    "write_curve_csv",
    "read_curve_csv",
    "write_report_json",
    "read_report_json",
    "write_reports_json",
    "read_reports_json",
]


class FileFormatError(ValueError):
    """Malformed or unreadable input file; the message carries the location."""


def _read_text(path) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise FileFormatError(f"cannot read {path}: {exc}") from exc


def _data_lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line:
            yield lineno, line


def read_points_csv(path) -> np.ndarray:
    """One value per line, with an optional single header line.

    The header is auto-detected: a non-numeric first line is skipped.
    Non-finite values and non-numeric rows past the header are rejected with
    their line number.
    """
    rows = list(_data_lines(_read_text(path)))
    if not rows:
        raise FileFormatError(f"{path}: file contains no data")
    values = []
    for position, (lineno, line) in enumerate(rows):
        try:
            value = float(line)
        except ValueError:
            if position == 0:
                continue  # header
            raise FileFormatError(
                f"{path}, line {lineno}: expected a number, got {line!r}"
            ) from None
        if not math.isfinite(value):
            raise FileFormatError(
                f"{path}, line {lineno}: non-finite value {line!r}"
            )
        values.append(value)
    return np.asarray(values, dtype=float)


def write_points_csv(points, path, header: str = "y") -> None:
    lines = [header]
    lines.extend(f"{float(v):.17g}" for v in np.asarray(points, dtype=float))
    Path(path).write_text("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# Intervals


@dataclass(frozen=True)
class IntervalRecord:
    """One detected interval, optionally tagged with a sequence name."""

    chrom: str | None
    start: float
    end: float

    def __post_init__(self):
        if not math.isfinite(self.start) or not math.isfinite(self.end):
            raise ValueError("interval bounds must be finite")
        if self.start < 0:
            raise ValueError("interval start must be nonnegative")
        if not self.end > self.start:
            raise ValueError("interval end must exceed its start")

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.start + self.end)

    @property
    def width(self) -> float:
        return self.end - self.start


def read_intervals(path) -> list[IntervalRecord]:
    """Tab- or comma-separated intervals: ``[chrom,]start,end`` per line.

    Tab-separated three-column input is BED-compatible; starts are used
    as-is with no coordinate-convention adjustment.  A non-numeric first
    line is treated as a header.
    """
    rows = list(_data_lines(_read_text(path)))
    if not rows:
        raise FileFormatError(f"{path}: file contains no data")
    records = []
    for position, (lineno, line) in enumerate(rows):
        sep = "\t" if "\t" in line else ","
        fields = [f.strip() for f in line.split(sep)]
        if len(fields) == 2:
            chrom, raw_start, raw_end = None, fields[0], fields[1]
        elif len(fields) == 3:
            chrom, raw_start, raw_end = fields[0], fields[1], fields[2]
        else:
            raise FileFormatError(
                f"{path}, line {lineno}: expected 2 or 3 columns, got {len(fields)}"
            )
        try:
            start, end = float(raw_start), float(raw_end)
        except ValueError:
            if position == 0:
                continue  # header
            raise FileFormatError(
                f"{path}, line {lineno}: non-numeric interval bounds {line!r}"
            ) from None
        try:
            records.append(IntervalRecord(chrom, start, end))
        except ValueError as exc:
            raise FileFormatError(f"{path}, line {lineno}: {exc}") from None
    if not records:
        raise FileFormatError(f"{path}: file contains no intervals")
    return records


def write_intervals(records, path, sep: str = "\t") -> None:
    lines = []
    for rec in records:
        fields = [] if rec.chrom is None else [rec.chrom]
        fields += [f"{rec.start:.17g}", f"{rec.end:.17g}"]
        lines.append(sep.join(fields))
    Path(path).write_text("\n".join(lines) + "\n")


def intervals_to_observations(
    records, T: float, n: int, a_convention: str = "half"
) -> tuple[ObservationSet, float]:
    """Observed points and noise level implied by a set of intervals.

    Each interval contributes its midpoint as the observed position.  Under
    the default ``half`` convention the noise half-width is half the mean
    interval width, so the jitter ``U[-a, a]`` spans an average interval;
    ``full`` uses the mean width itself.
    """
    records = list(records)
    if not records:
        raise ValueError("no intervals given")
    if a_convention not in ("half", "full"):
        raise ValueError("a_convention must be 'half' or 'full'")
    widths = np.array([rec.width for rec in records], dtype=float)
    midpoints = np.array([rec.midpoint for rec in records], dtype=float)
    mean_width = float(widths.mean())
    a = mean_width / 2.0 if a_convention == "half" else mean_width
    obs = ObservationSet(
        points=midpoints, scaling_n=int(n), noise_half_width=a, window_end=float(T)
    )
    return obs, a


# ---------------------------------------------------------------------------
# Curves


def write_curve_csv(curve: EstimateCurve, path) -> None:
    """Two-column CSV ``x,value`` preceded by one metadata comment line."""
    meta = curve.meta
    smoothing = "" if meta.smoothing_bandwidth is None else f"{meta.smoothing_bandwidth:.17g}"
    bandwidth = "" if curve.bandwidth is None else f"{curve.bandwidth:.17g}"
    lines = [
        f"# variant={meta.variant} kernel={meta.kernel} bandwidth={bandwidth}"
        f" smoothing_bandwidth={smoothing} source={meta.source_digest}",
        "x,value",
    ]
    lines.extend(
        f"{x:.17g},{v:.17g}" for x, v in zip(curve.grid, curve.values)
    )
    Path(path).write_text("\n".join(lines) + "\n")


def _parse_meta_comment(line: str) -> dict:
    out = {}
    for token in line.lstrip("#").split():
        if "=" in token:
            key, _, value = token.partition("=")
            out[key] = value
    return out


def read_curve_csv(path) -> EstimateCurve:
    rows = list(_data_lines(_read_text(path)))
    if not rows:
        raise FileFormatError(f"{path}: file contains no data")
    meta_fields: dict = {}
    xs, vs = [], []
    for lineno, line in rows:
        if line.startswith("#"):
            meta_fields.update(_parse_meta_comment(line))
            continue
        if line.lower().replace(" ", "") == "x,value":
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise FileFormatError(
                f"{path}, line {lineno}: expected 'x,value', got {line!r}"
            )
        try:
            xs.append(float(parts[0]))
            vs.append(float(parts[1]))
        except ValueError:
            raise FileFormatError(
                f"{path}, line {lineno}: non-numeric row {line!r}"
            ) from None
    if not xs:
        raise FileFormatError(f"{path}: file contains no curve rows")
    bandwidth = meta_fields.get("bandwidth") or None
    smoothing = meta_fields.get("smoothing_bandwidth") or None
    meta = CurveMeta(
        variant=meta_fields.get("variant", "unknown"),
        kernel=meta_fields.get("kernel", ""),
        source_digest=meta_fields.get("source", ""),
        smoothing_bandwidth=float(smoothing) if smoothing else None,
    )
    return EstimateCurve(
        grid=np.asarray(xs),
        values=np.asarray(vs),
        bandwidth=float(bandwidth) if bandwidth else None,
        meta=meta,
    )


# ---------------------------------------------------------------------------
# Reports


def write_report_json(report: RiskReport, path) -> None:
    """Report as JSON with sorted keys; floats round-trip via repr."""
    Path(path).write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")


def read_report_json(path) -> RiskReport:
    try:
        data = json.loads(_read_text(path))
    except json.JSONDecodeError as exc:
        raise FileFormatError(f"{path}: invalid JSON ({exc})") from exc
    return RiskReport.from_dict(data)


def write_reports_json(reports, path) -> None:
    payload = {"reports": [r.to_dict() for r in reports]}
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def read_reports_json(path) -> list[RiskReport]:
    try:
        data = json.loads(_read_text(path))
    except json.JSONDecodeError as exc:
        raise FileFormatError(f"{path}: invalid JSON ({exc})") from exc
    return [RiskReport.from_dict(d) for d in data["reports"]]
