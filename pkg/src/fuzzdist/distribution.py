"""Distribution analytics over distance maps.

Values are compared through their serialized 2-decimal representation: two
distances are "the same" exactly when a consumer of the CSV would see the
same number. Mode ties break toward the smaller value. The top-1..3 shares
are percentages rounded to two decimals, and the combined top share is the
sum of those rounded shares. Quartiles use inclusive linear interpolation
over the sorted multiset. Histogram buckets are fixed width
``max(1, range / 20)`` starting at the minimum; the maximum falls into the
last bucket.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction

from .errors import ValidationError
from .physical import DistanceMap, format_distance


@dataclass(frozen=True)
class DistributionReport:
    metric: str
    total: int
    unique: int
    mode_value: str
    top_shares: tuple[tuple[str, float], ...]
    top1_3_share: float
    quartiles: tuple[float, float, float]
    iqr: float
    histogram: tuple[tuple[float, float, int], ...]


@dataclass(frozen=True)
class ComparisonReport:
    phys: DistributionReport
    att: DistributionReport
    delta_unique: int
    delta_iqr: float
    collision_resolution: float


def _round2(value: Fraction) -> Fraction:
    """Exact half-even rounding to a multiple of 1/100."""
    return Fraction(format_distance(value))


def _quantized_values(dmap: DistanceMap) -> list[Fraction]:
    return [_round2(v) for v in dmap.values.values()]


def _quartile(sorted_values: list[Fraction], q: Fraction) -> Fraction:
    pos = (len(sorted_values) - 1) * q
    lo = math.floor(pos)
    frac = pos - lo
    if frac == 0:
        return sorted_values[lo]
    return sorted_values[lo] + frac * (sorted_values[lo + 1] - sorted_values[lo])


def _histogram(sorted_values: list[Fraction]) -> tuple[tuple[float, float, int], ...]:
    lo = sorted_values[0]
    hi = sorted_values[-1]
    span = hi - lo
    width = max(Fraction(1), span / 20)
    buckets = max(1, math.ceil(span / width))
    counts = [0] * buckets
    for v in sorted_values:
        idx = min(int((v - lo) / width), buckets - 1)
        counts[idx] += 1
    return tuple(
        (float(lo + i * width), float(lo + (i + 1) * width), counts[i])
        for i in range(buckets)
    )


def analyze(dmap: DistanceMap) -> DistributionReport:
    """Shape statistics of one distance map; rejects empty maps."""
    values = _quantized_values(dmap)
    if not values:
        raise ValidationError("distance map holds no values to analyze")
    values.sort()
    counts = Counter(values)
    total = len(values)
    # highest count first, then smaller value, for mode and the top ranks
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    share_fracs = [_round2(Fraction(count * 100, total)) for _, count in ranked[:3]]
    top_shares = tuple(
        (format_distance(value), float(share))
        for (value, _), share in zip(ranked, share_fracs)
    )
    top1_3 = sum(share_fracs, Fraction(0))
    q1 = _quartile(values, Fraction(1, 4))
    q2 = _quartile(values, Fraction(1, 2))
    q3 = _quartile(values, Fraction(3, 4))
    return DistributionReport(
        metric=dmap.metric,
        total=total,
        unique=len(counts),
        mode_value=top_shares[0][0],
        top_shares=top_shares,
        top1_3_share=float(top1_3),
        quartiles=(float(q1), float(q2), float(q3)),
        iqr=float(q3 - q1),
        histogram=_histogram(values),
    )


def _paired_rows(phys: DistanceMap, att: DistanceMap) -> list[tuple[Fraction, Fraction]]:
    """Pair the two maps row-by-row through their sorted block keys.

    Duplicate keys pair by ascending-value occurrence order within the key.
    """
    rows_p = phys.rows()
    rows_a = att.rows()
    if [k for k, _ in rows_p] != [k for k, _ in rows_a]:
        keys_p = {k for k, _ in rows_p}
        keys_a = {k for k, _ in rows_a}
        extra = sorted((keys_p - keys_a) | (keys_a - keys_p))
        detail = f"; unmatched keys include {extra[:5]}" if extra else ""
        raise ValidationError(
            "physical and attention maps do not cover the same block keys" + detail)
    return [(vp, va) for (_, vp), (_, va) in zip(rows_p, rows_a)]


def compare(phys: DistanceMap, att: DistanceMap) -> ComparisonReport:
    """Contrast the two metrics and measure how many physical-distance
    collisions the attention metric resolves.

    collision_resolution is the fraction of unordered block pairs with equal
    positive physical distance whose attention distances differ, again at
    2-decimal resolution. It is 0.0 when no such pair exists.
    """
    pairs = _paired_rows(phys, att)
    groups: dict[Fraction, Counter] = {}
    for vp, va in pairs:
        p = _round2(vp)
        if p <= 0:
            continue
        groups.setdefault(p, Counter())[_round2(va)] += 1
    total_pairs = 0
    separated = 0
    for att_counts in groups.values():
        size = sum(att_counts.values())
        group_pairs = size * (size - 1) // 2
        same = sum(k * (k - 1) // 2 for k in att_counts.values())
        total_pairs += group_pairs
        separated += group_pairs - same
    resolution = float(Fraction(separated, total_pairs)) if total_pairs else 0.0
    report_p = analyze(phys)
    report_a = analyze(att)
    return ComparisonReport(
        phys=report_p,
        att=report_a,
        delta_unique=report_a.unique - report_p.unique,
        delta_iqr=report_a.iqr - report_p.iqr,
        collision_resolution=resolution,
    )


# ---------------------------------------------------------------------------
# rendering


def report_to_dict(report: DistributionReport) -> dict:
    return {
        "metric": report.metric,
        "total": report.total,
        "unique": report.unique,
        "mode_value": report.mode_value,
        "top_shares": [[v, s] for v, s in report.top_shares],
        "top1_3_share": report.top1_3_share,
        "quartiles": {"q1": report.quartiles[0], "median": report.quartiles[1],
                      "q3": report.quartiles[2]},
        "iqr": report.iqr,
        "histogram": [{"lo": lo, "hi": hi, "count": n} for lo, hi, n in report.histogram],
    }


def comparison_to_dict(report: ComparisonReport) -> dict:
    return {
        "physical": report_to_dict(report.phys),
        "attention": report_to_dict(report.att),
        "delta_unique": report.delta_unique,
        "delta_iqr": report.delta_iqr,
        "collision_resolution": report.collision_resolution,
    }


def render_report(report: DistributionReport) -> str:
    lines = [
        f"metric:            {report.metric}",
        f"total distances:   {report.total}",
        f"unique distances:  {report.unique}",
        f"mode value:        {report.mode_value}",
    ]
    for rank, (value, share) in enumerate(report.top_shares, start=1):
        lines.append(f"top-{rank}:             {value}  {share:.2f}%")
    q1, q2, q3 = report.quartiles
    lines.append(f"top 1-3 share:     {report.top1_3_share:.2f}%")
    lines.append(f"quartiles:         q1={q1:.2f} median={q2:.2f} q3={q3:.2f}")
    lines.append(f"iqr:               {report.iqr:.2f}")
    lines.append("histogram:")
    for lo, hi, count in report.histogram:
        lines.append(f"  [{lo:.2f}, {hi:.2f}) {count}")
    return "\n".join(lines)


def render_comparison(report: ComparisonReport) -> str:
    parts = [
        render_report(report.phys),
        "",
        render_report(report.att),
        "",
        f"delta unique:          {report.delta_unique:+d}",
        f"delta iqr:             {report.delta_iqr:+.2f}",
        f"collision resolution:  {report.collision_resolution:.4f}",
    ]
    return "\n".join(parts)


def write_frequency_csv(report: ComparisonReport, phys: DistanceMap,
                        att: DistanceMap, path: str) -> None:
    """Per-value frequency table of both metrics, for external plotting."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("metric,value,count\n")
        for metric, dmap in (("physical", phys), ("attention", att)):
            counts = Counter(_quantized_values(dmap))
            for value in sorted(counts):
                fh.write(f"{metric},{format_distance(value)},{counts[value]}\n")
