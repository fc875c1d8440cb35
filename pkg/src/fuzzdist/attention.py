"""Attention-weighted distance: reshape physical block distance by score.

Each block's physical distance is multiplied by ``(s_a - w)`` where w is
its normalized score in [0, 1] and s_a > 1 is the scale anchor (default
1.5). Scores of 0.5 leave the distance unchanged; higher scores shrink it,
lower scores stretch it, and the factor stays within [s_a - 1, s_a] so
ordering against untouched blocks degrades gracefully. Target blocks keep
distance 0 regardless of score.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import ValidationError
from .physical import ATTENTION, DistanceMap
from .scoring import BlockScoreTable


@dataclass(frozen=True)
class AttentionConfig:
    s_a: Fraction = Fraction(3, 2)

    def __post_init__(self):
        if self.s_a <= 1:
            raise ValidationError(f"scale anchor must exceed 1, got {self.s_a}")


def attention_distances(phys: DistanceMap, scores: BlockScoreTable,
                        config: AttentionConfig = AttentionConfig()) -> DistanceMap:
    """Apply the score reshaping to every block of the physical map."""
    values: dict[tuple[str, str], Fraction] = {}
    for ref, distance in phys.values.items():
        w = scores.normalized.get(ref)
        if w is None:
            function, bid = ref
            raise ValidationError(
                f"block {function}:{bid} has a physical distance but no normalized score")
        values[ref] = distance * (config.s_a - w)
    return DistanceMap(metric=ATTENTION, values=values, block_keys=dict(phys.block_keys))
