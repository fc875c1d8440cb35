"""Run a transformer checkpoint over source files and emit line scores.

The output is a `file,line,score` CSV: one row per source line that
produced at least one token, scores formatted with six decimals. Files
are processed independently; a file that cannot be read or tokenized is
reported and skipped without failing the batch.
"""

from __future__ import annotations

from pathlib import Path

import torch
from transformers import AutoModel, AutoTokenizer

from .aggregate import add_line_scores, token_received_scores

SOURCE_SUFFIXES = (".c", ".h")


class ExportError(Exception):
    """The checkpoint or tokenizer could not be loaded."""


def load_backend(model_id: str):
    # eager attention keeps per-head weights available for extraction
    try:
        tokenizer = AutoTokenizer.from_pretrained(model_id)
        model = AutoModel.from_pretrained(model_id, attn_implementation="eager")
    except Exception as exc:
        raise ExportError(f"cannot load model '{model_id}': {exc}") from exc
    model.eval()
    return tokenizer, model


def discover_sources(src: Path) -> list[Path]:
    return sorted(p for p in src.rglob("*")
                  if p.is_file() and p.suffix in SOURCE_SUFFIXES)


def score_text(text: str, tokenizer, model) -> dict[int, float]:
    """Per-line scores for one file; long inputs run as overflow chunks."""
    window = min(tokenizer.model_max_length,
                 model.config.max_position_embeddings)
    enc = tokenizer(text, truncation=True, max_length=window,
                    return_overflowing_tokens=True,
                    return_offsets_mapping=True,
                    return_special_tokens_mask=True)
    scores: dict[int, float] = {}
    for ids, mask, offsets, special in zip(enc["input_ids"],
                                           enc["attention_mask"],
                                           enc["offset_mapping"],
                                           enc["special_tokens_mask"]):
        with torch.no_grad():
            out = model(input_ids=torch.tensor([ids]),
                        attention_mask=torch.tensor([mask]),
                        output_attentions=True)
        layers = [a[0] for a in out.attentions]
        token_scores = token_received_scores(layers, special)
        add_line_scores(scores, text, offsets, special, token_scores)
    return scores


def export_scores(src_dir: str, model_id: str, out_path: str) -> list[tuple[str, str]]:
    """Score every source file under src_dir into one CSV.

    Returns (file, message) pairs for files that were skipped. Raises
    ExportError only when the model itself cannot be loaded.
    """
    tokenizer, model = load_backend(model_id)
    src = Path(src_dir)
    failures: list[tuple[str, str]] = []
    rows: list[tuple[str, int, float]] = []
    for path in discover_sources(src):
        rel = path.relative_to(src).as_posix()
        try:
            text = path.read_text(encoding="utf-8")
            per_line = score_text(text, tokenizer, model)
        except Exception as exc:
            failures.append((rel, str(exc)))
            continue
        rows.extend((rel, line, value) for line, value in sorted(per_line.items()))
    with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("file,line,score\n")
        for rel, line, value in rows:
            fh.write(f"{rel},{line},{value:.6f}\n")
    return failures
