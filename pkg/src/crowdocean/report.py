"""Compare computed country scores with literature baselines."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Mapping

from .errors import ParseError, UsageError, ValidationError
from .ocean import DIMENSIONS, OceanScore

# Mean percentual errors reported for the published OCEAN and Hofstede mappings.
REFERENCE_OCEAN_ERROR_PCT = 30.0
REFERENCE_HOFSTEDE_ERROR_PCT = 53.0

BASELINE_HEADER = ("country", *DIMENSIONS)
SERIES_HEADER = ("series", "label", "value")


@dataclass(frozen=True)
class LiteratureBaseline:
    country: str
    O: float
    C: float
    E: float
    A: float
    N: float
    source: str = ""

    def __post_init__(self):
        for d in DIMENSIONS:
            v = getattr(self, d)
            if not (math.isfinite(v) and 0.0 <= v <= 1.0):
                raise ValidationError(f"baseline {self.country} {d}={v} outside [0, 1]")


def load_baselines(text: str) -> dict[str, LiteratureBaseline]:
    """Parse ``country,O,C,E,A,N[,source]`` rows; one record per country."""
    reader = csv.DictReader(io.StringIO(text))
    header = tuple(h.strip() for h in (reader.fieldnames or ()))
    if header[:6] != BASELINE_HEADER or not set(header[6:]) <= {"source"}:
        raise ParseError(f"expected header {','.join(BASELINE_HEADER)}[,source]", line=1)
    out: dict[str, LiteratureBaseline] = {}
    for row in reader:
        line = reader.line_num
        country = (row.get("country") or "").strip()
        if country in out:
            raise ValidationError(f"line {line}: duplicate baseline for country {country}")
        try:
            values = {d: float(row[d]) for d in DIMENSIONS}
        except (TypeError, ValueError) as exc:
            raise ParseError(str(exc), line=line) from None
        try:
            out[country] = LiteratureBaseline(country, **values, source=(row.get("source") or "").strip())
        except ValidationError as exc:
            raise ValidationError(f"line {line}: {exc}") from None
    return out


def percentual_error(computed: OceanScore, baseline: LiteratureBaseline) -> dict[str, float | None]:
    """Per-dimension ``100 * |computed - baseline| / baseline``; None where baseline is 0."""
    if computed.country and computed.country != baseline.country:
        raise UsageError(f"country mismatch: scores for {computed.country}, baseline for {baseline.country}")
    out: dict[str, float | None] = {}
    for d in DIMENSIONS:
        b = getattr(baseline, d)
        out[d] = None if b == 0 else 100.0 * abs(getattr(computed, d) - b) / b
    return out


@dataclass
class ErrorReport:
    per_country: dict[str, dict[str, float | None]] = field(default_factory=dict)
    country_mean: dict[str, float | None] = field(default_factory=dict)
    overall_mean: float | None = None
    missing_baseline: list[str] = field(default_factory=list)
    reference_ocean_error: float = REFERENCE_OCEAN_ERROR_PCT
    reference_hofstede_error: float = REFERENCE_HOFSTEDE_ERROR_PCT


def _mean_defined(values) -> float | None:
    vals = [v for v in values if v is not None]
    return sum(vals) / len(vals) if vals else None


def compute_errors(
    country_scores: Mapping[str, OceanScore], baselines: Mapping[str, LiteratureBaseline]
) -> ErrorReport:
    report = ErrorReport()
    for country in sorted(country_scores):
        if country not in baselines:
            report.missing_baseline.append(country)
            continue
        errs = percentual_error(country_scores[country], baselines[country])
        report.per_country[country] = errs
        report.country_mean[country] = _mean_defined(errs.values())
    report.overall_mean = _mean_defined(
        v for errs in report.per_country.values() for v in errs.values()
    )
    return report


def extremes(country_scores: Mapping[str, OceanScore]) -> dict[str, dict[str, dict]]:
    """Highest and lowest country per dimension; ties go to the smaller country code."""
    if not country_scores:
        raise UsageError("no country scores")
    out = {}
    codes = sorted(country_scores)
    for d in DIMENSIONS:
        hi = min(codes, key=lambda c: (-getattr(country_scores[c], d), c))
        lo = min(codes, key=lambda c: (getattr(country_scores[c], d), c))
        out[d] = {
            "higher": {"country": hi, "value": getattr(country_scores[hi], d)},
            "lower": {"country": lo, "value": getattr(country_scores[lo], d)},
        }
    return out


def emit_report(
    errors: ErrorReport,
    country_scores: Mapping[str, OceanScore],
    baselines: Mapping[str, LiteratureBaseline] | None = None,
) -> tuple[bytes, bytes]:
    """Serialize the comparison as (report JSON, plot series CSV)."""
    baselines = baselines or {}
    countries = {}
    for c in sorted(country_scores):
        entry = {"computed": {d: getattr(country_scores[c], d) for d in DIMENSIONS}}
        if c in baselines:
            b = baselines[c]
            entry["baseline"] = {d: getattr(b, d) for d in DIMENSIONS}
            entry["baseline_source"] = b.source
        if c in errors.per_country:
            entry["error_pct"] = errors.per_country[c]
            entry["mean_error_pct"] = errors.country_mean[c]
        countries[c] = entry

    doc = {
        "countries": countries,
        "extremes": extremes(country_scores),
        "overall_mean_error_pct": errors.overall_mean,
        "missing_baseline": errors.missing_baseline,
        "reference": {
            "published_ocean_mean_error_pct": errors.reference_ocean_error,
            "published_hofstede_mean_error_pct": errors.reference_hofstede_error,
        },
    }
    report = (json.dumps(doc, indent=2, sort_keys=True) + "\n").encode()

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SERIES_HEADER)
    for c, entry in countries.items():
        for d in DIMENSIONS:
            w.writerow([f"computed_{d}", c, repr(entry["computed"][d])])
            if "baseline" in entry:
                w.writerow([f"baseline_{d}", c, repr(entry["baseline"][d])])
            err = entry.get("error_pct", {}).get(d)
            if err is not None:
                w.writerow([f"error_pct_{d}", c, repr(err)])
        if entry.get("mean_error_pct") is not None:
            w.writerow(["mean_error_pct", c, repr(entry["mean_error_pct"])])
    if errors.overall_mean is not None:
        w.writerow(["overall_mean_error_pct", "all", repr(errors.overall_mean)])
    w.writerow(["reference_error_pct", "ocean", repr(errors.reference_ocean_error)])
    w.writerow(["reference_error_pct", "hofstede", repr(errors.reference_hofstede_error)])
    return report, buf.getvalue().encode()
