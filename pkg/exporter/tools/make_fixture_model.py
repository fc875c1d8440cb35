"""Build the tiny committed checkpoint used by the exporter tests.

Deterministic: the tokenizer is constructed from a fixed character
vocabulary and the weights are drawn with a fixed torch seed, so the
committed files can be regenerated byte-identically.
"""

import os
import string

import torch
from tokenizers import Tokenizer, models, pre_tokenizers, processors
from transformers import BertConfig, BertModel, PreTrainedTokenizerFast

OUT = os.path.normpath(os.path.join(
    os.path.dirname(os.path.abspath(__file__)), "..", "tests", "fixtures", "model"))

SPECIALS = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"]


def build_vocab() -> dict[str, int]:
    chars = [c for c in string.printable if not c.isspace()]
    vocab = {tok: i for i, tok in enumerate(SPECIALS)}
    for ch in chars:
        vocab[ch] = len(vocab)
    for ch in chars:
        vocab["##" + ch] = len(vocab)
    return vocab


def build_tokenizer(vocab: dict[str, int]) -> PreTrainedTokenizerFast:
    tok = Tokenizer(models.WordPiece(vocab=vocab, unk_token="[UNK]",
                                     max_input_chars_per_word=200))
    tok.pre_tokenizer = pre_tokenizers.Whitespace()
    tok.post_processor = processors.TemplateProcessing(
        single="[CLS] $A [SEP]",
        pair="[CLS] $A [SEP] $B [SEP]",
        special_tokens=[("[CLS]", vocab["[CLS]"]), ("[SEP]", vocab["[SEP]"])],
    )
    return PreTrainedTokenizerFast(
        tokenizer_object=tok, unk_token="[UNK]", pad_token="[PAD]",
        cls_token="[CLS]", sep_token="[SEP]", mask_token="[MASK]",
        model_max_length=96)


def main() -> None:
    vocab = build_vocab()
    fast = build_tokenizer(vocab)
    torch.manual_seed(0)
    config = BertConfig(vocab_size=len(vocab), hidden_size=32,
                        num_hidden_layers=2, num_attention_heads=2,
                        intermediate_size=64, max_position_embeddings=96)
    model = BertModel(config)
    model.eval()
    os.makedirs(OUT, exist_ok=True)
    fast.save_pretrained(OUT)
    model.save_pretrained(OUT)
    print(f"wrote fixture checkpoint to {OUT}")


if __name__ == "__main__":
    main()
