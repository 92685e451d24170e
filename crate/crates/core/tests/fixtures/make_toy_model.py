"""Builds the toy three-head alignment model used by the neural backend tests.

Writes into toy_model/:
  vocab.txt        WordPiece vocabulary, one token per line
  model.onnx       exported graph with outputs probs3, prob_bin, regression
  model.json       sidecar metadata read by the engine
  expected.json    64 (context, claim) pairs with outputs computed in torch
  missing_head.onnx  model.onnx without the regression output

Run from this directory:  python3 make_toy_model.py
"""

import json
import random
from pathlib import Path

import torch
from torch import nn
from tokenizers import BertWordPieceTokenizer
from transformers import BertConfig, BertModel

OUT = Path(__file__).parent / "toy_model"
SEED = 2025
MAX_INPUT_TOKENS = 64

WORDS = [
    "кот", "собака", "дом", "город", "москва", "река", "книга", "учитель",
    "жил", "читал", "видел", "был", "есть", "не", "в", "на", "и", "с",
    "большой", "маленький", "красный", "старый", "новый", "сегодня", "вчера",
    "the", "cat", "sat", "on", "mat", "dog", "house", "river", "is", "was",
]
SPECIALS = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"]
CHARS = (
    [chr(c) for c in range(ord("а"), ord("я") + 1)] + ["ё"]
    + [chr(c) for c in range(ord("А"), ord("Я") + 1)] + ["Ё"]
    + [chr(c) for c in range(ord("a"), ord("z") + 1)]
    + [chr(c) for c in range(ord("A"), ord("Z") + 1)]
    + list("0123456789.,!?;:-()\"'…")
)


def build_vocab():
    vocab = list(SPECIALS)
    seen = set(vocab)
    for tok in WORDS + CHARS + ["##" + c for c in CHARS if c.isalnum()]:
        if tok not in seen:
            vocab.append(tok)
            seen.add(tok)
    return vocab


class ThreeHead(nn.Module):
    def __init__(self, vocab_size):
        super().__init__()
        cfg = BertConfig(
            vocab_size=vocab_size,
            hidden_size=32,
            num_hidden_layers=2,
            num_attention_heads=2,
            intermediate_size=64,
            max_position_embeddings=MAX_INPUT_TOKENS,
            type_vocab_size=2,
            initializer_range=0.5,
            hidden_dropout_prob=0.0,
            attention_probs_dropout_prob=0.0,
        )
        cfg._attn_implementation = "eager"
        self.encoder = BertModel(cfg, add_pooling_layer=False)
        self.head_3way = nn.Sequential(nn.Linear(32, 32), nn.Tanh(), nn.Linear(32, 3))
        self.head_binary = nn.Sequential(nn.Linear(32, 32), nn.Tanh(), nn.Linear(32, 2))
        self.head_regression = nn.Sequential(nn.Linear(32, 32), nn.Tanh(), nn.Linear(32, 1))

    def forward(self, input_ids, attention_mask, token_type_ids):
        hidden = self.encoder(
            input_ids=input_ids,
            attention_mask=attention_mask,
            token_type_ids=token_type_ids,
        ).last_hidden_state
        pooled = hidden[:, 0]
        probs3 = torch.softmax(self.head_3way(pooled), dim=-1)
        prob_bin = torch.softmax(self.head_binary(pooled), dim=-1)[:, 1]
        regression = torch.sigmoid(self.head_regression(pooled)).squeeze(-1)
        return probs3, prob_bin, regression


def encode(tok, context, claim):
    enc = tok.encode(context, claim)
    return {
        "input_ids": torch.tensor([enc.ids], dtype=torch.long),
        "attention_mask": torch.tensor([enc.attention_mask], dtype=torch.long),
        "token_type_ids": torch.tensor([enc.type_ids], dtype=torch.long),
    }


def sentence(rng):
    n = rng.randint(2, 7)
    words = [rng.choice(WORDS) for _ in range(n)]
    words[0] = words[0].capitalize()
    return " ".join(words) + rng.choice([".", "!", "?"])


def main():
    torch.manual_seed(SEED)
    rng = random.Random(SEED)
    OUT.mkdir(exist_ok=True)

    vocab = build_vocab()
    (OUT / "vocab.txt").write_text("\n".join(vocab) + "\n", encoding="utf-8")
    tok = BertWordPieceTokenizer(str(OUT / "vocab.txt"), lowercase=False)
    tok.enable_truncation(MAX_INPUT_TOKENS, strategy="only_first")

    model = ThreeHead(len(vocab)).eval()
    # Widen the head weights so outputs spread across [0, 1].
    with torch.no_grad():
        for head in (model.head_3way, model.head_binary, model.head_regression):
            head[0].weight.mul_(6.0)
            head[2].weight.mul_(6.0)

    dummy = encode(tok, "Кот жил в доме.", "Кот был.")
    torch.onnx.export(
        model,
        (dummy["input_ids"], dummy["attention_mask"], dummy["token_type_ids"]),
        str(OUT / "model.onnx"),
        input_names=["input_ids", "attention_mask", "token_type_ids"],
        output_names=["probs3", "prob_bin", "regression"],
        dynamic_axes={
            "input_ids": {0: "batch", 1: "seq"},
            "attention_mask": {0: "batch", 1: "seq"},
            "token_type_ids": {0: "batch", 1: "seq"},
            "probs3": {0: "batch"},
            "prob_bin": {0: "batch"},
            "regression": {0: "batch"},
        },
        opset_version=17,
        dynamo=False,
    )

    meta = {
        "max_input_tokens": MAX_INPUT_TOKENS,
        "vocab": "vocab.txt",
        "do_lower_case": False,
        "inputs": ["input_ids", "attention_mask", "token_type_ids"],
        "outputs": ["probs3", "prob_bin", "regression"],
    }
    (OUT / "model.json").write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")

    pairs = []
    for i in range(64):
        context = " ".join(sentence(rng) for _ in range(rng.randint(1, 3)))
        claim = sentence(rng)
        if i % 16 == 0:
            # long context exercising truncation of the context side
            context = " ".join(sentence(rng) for _ in range(12))
        pairs.append((context, claim))

    records = []
    with torch.no_grad():
        for context, claim in pairs:
            enc = encode(tok, context, claim)
            p3, pb, r = model(enc["input_ids"], enc["attention_mask"], enc["token_type_ids"])
            records.append({
                "context": context,
                "claim": claim,
                "input_ids": enc["input_ids"][0].tolist(),
                "probs3": p3[0].tolist(),
                "prob_bin": float(pb[0]),
                "regression": float(r[0]),
            })
    (OUT / "expected.json").write_text(
        json.dumps(records, ensure_ascii=False, indent=1) + "\n", encoding="utf-8"
    )
    write_missing_head()


def write_missing_head():
    import onnx

    graph = onnx.load(str(OUT / "model.onnx"))
    keep = [o for o in graph.graph.output if o.name != "regression"]
    del graph.graph.output[:]
    graph.graph.output.extend(keep)
    onnx.save(graph, str(OUT / "missing_head.onnx"))


if __name__ == "__main__":
    main()
