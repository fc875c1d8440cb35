"""Line-level score ingestion and block score normalization.

Score files are CSV with header ``file,line,score``; scores are
non-negative decimals and (file, line) pairs must be unique. A block's raw
score is the sum of the scores of its lines, zero when nothing matched.

Normalization soft-caps outliers before min-max scaling: with the raw
multiset W sorted descending, values are clamped to the entry at 1-based
rank ``ceil(cap_fraction * |W|)``. Below ten blocks that rank is 1, i.e.
the maximum, so no clamping happens. Ties at the threshold survive
unclamped. After clamping, scores min-max scale into [0, 1]; a constant
multiset maps everything to 0.5.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import ParseError, ValidationError
from .graphs import ProgramGraphs, SourceLoc, normalize_path

BlockRef = tuple[str, str]


@dataclass(frozen=True)
class LineScoreTable:
    entries: dict[SourceLoc, Fraction]


@dataclass(frozen=True)
class BlockScoreTable:
    """Raw and normalized block scores plus the clamp parameters used."""

    raw: dict[BlockRef, Fraction]
    normalized: dict[BlockRef, Fraction]
    cap_threshold: Fraction
    w_min: Fraction
    w_max: Fraction


def load_line_scores(path: str) -> LineScoreTable:
    """Parse a score CSV; rejects bad headers, negatives and duplicates."""
    entries: dict[SourceLoc, Fraction] = {}
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header != ["file", "line", "score"]:
                raise ParseError(f"expected header 'file,line,score', got {header!r}", path=path)
            for i, row in enumerate(reader, start=2):
                if not row:
                    continue
                if len(row) != 3:
                    raise ParseError(f"line {i}: expected 3 fields, got {len(row)}", path=path)
                file_raw, line_raw, score_raw = row
                if file_raw == "":
                    raise ParseError(f"line {i}: empty file name", path=path)
                try:
                    line = int(line_raw)
                    score = Fraction(score_raw)
                except (ValueError, ZeroDivisionError) as exc:
                    raise ParseError(f"line {i}: bad row {row!r}", path=path) from exc
                if line < 1:
                    raise ValidationError(f"line {i}: line numbers start at 1", path=path)
                if score < 0:
                    raise ValidationError(
                        f"line {i}: negative score {score_raw} for "
                        f"{file_raw}:{line}", path=path)
                loc = SourceLoc(file=normalize_path(file_raw), line=line)
                if loc in entries:
                    raise ValidationError(
                        f"line {i}: duplicate score for {loc.file}:{loc.line}", path=path)
                entries[loc] = score
    except OSError as exc:
        raise ParseError(f"cannot read: {exc.strerror}", path=path) from exc
    return LineScoreTable(entries=entries)


def block_raw_scores(graphs: ProgramGraphs, scores: LineScoreTable) -> dict[BlockRef, Fraction]:
    """Sum line scores per block, for every block of the program.

    Lines without a score contribute 0, so unscored blocks get 0. Scored
    lines that belong to no block are ignored.
    """
    out: dict[BlockRef, Fraction] = {}
    for function, cfg in graphs.cfgs.items():
        for bid, block in cfg.blocks.items():
            total = Fraction(0)
            for loc in block.lines:
                total += scores.entries.get(loc, Fraction(0))
            out[(function, bid)] = total
    return out


def cap_scores(raw_values: list[Fraction], cap_fraction: Fraction) -> Fraction:
    """The clamp threshold: descending order statistic at the cap rank."""
    ordered = sorted(raw_values, reverse=True)
    rank = math.ceil(cap_fraction * len(ordered))
    rank = min(max(rank, 1), len(ordered))
    return ordered[rank - 1]


def normalize_scores(raw: dict[BlockRef, Fraction],
                     cap_fraction: Fraction = Fraction(1, 10)) -> BlockScoreTable:
    """Clamp outliers then min-max scale into [0, 1]."""
    if not raw:
        raise ValidationError("cannot normalize an empty score table")
    if not 0 < cap_fraction <= 1:
        raise ValidationError(f"cap fraction must be in (0, 1], got {cap_fraction}")
    threshold = cap_scores(list(raw.values()), cap_fraction)
    capped = {ref: min(v, threshold) for ref, v in raw.items()}
    w_min = min(capped.values())
    w_max = max(capped.values())
    if w_min == w_max:
        normalized = {ref: Fraction(1, 2) for ref in capped}
    else:
        span = w_max - w_min
        normalized = {ref: (v - w_min) / span for ref, v in capped.items()}
    return BlockScoreTable(raw=dict(raw), normalized=normalized,
                           cap_threshold=threshold, w_min=w_min, w_max=w_max)
