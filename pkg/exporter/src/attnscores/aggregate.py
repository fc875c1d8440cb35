"""Turn raw attention tensors into per-line scores.

A token's score is the attention it receives, summed over every layer,
every head, and every real (non-special) query position. Line scores sum
the scores of the tokens that start on that line, so chunked inputs can
simply add their contributions.
"""

from __future__ import annotations

import bisect

import torch


def line_starts(text: str) -> list[int]:
    """Character offset of the first column of each 1-based line."""
    starts = [0]
    for i, ch in enumerate(text):
        if ch == "\n":
            starts.append(i + 1)
    return starts


def line_of_offset(starts: list[int], offset: int) -> int:
    return bisect.bisect_right(starts, offset)


def token_received_scores(attentions, special_mask) -> list[float]:
    """Attention received per token, summed over layers, heads and queries.

    ``attentions``: one (heads, seq, seq) tensor per layer, rows softmaxed
    over the key axis. ``special_mask``: 1 flags a special token; special
    positions contribute nothing as queries and receive a zero score.
    """
    keep = torch.tensor([not bool(s) for s in special_mask], dtype=torch.bool)
    total = torch.zeros(len(special_mask), dtype=torch.float64)
    for layer in attentions:
        att = layer.to(torch.float64)
        total += att[:, keep, :].sum(dim=(0, 1))
    total[~keep] = 0.0
    return total.tolist()


def add_line_scores(acc: dict, text: str, offsets, special_mask,
                    token_scores) -> None:
    """Fold one chunk's token scores into a per-line accumulator."""
    starts = line_starts(text)
    for (start, end), special, score in zip(offsets, special_mask, token_scores):
        if special or end <= start:
            continue
        line = line_of_offset(starts, start)
        acc[line] = acc.get(line, 0.0) + score
