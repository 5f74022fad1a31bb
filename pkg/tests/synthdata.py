"""Synthetic corpora and fixtures shared across tests.

Two relation families built from templates: causal messages joined by
"because" and contrastive messages joined by "but".  Content words correlate
with the family so the implicit (connective-deleted) variants stay learnable.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from discre.corpus_io import PosteriorTable, WordVectorTable, load_word_vectors

ARG1_POOL = [
    "i like him",
    "we won the game",
    "she was happy",
    "i passed the exam",
    "they played well",
    "he made the team",
    "you found the answer",
    "we got the money",
]

CAUSE_TAILS = [
    "he is kind",
    "we worked hard",
    "it rains a lot",
    "they helped us",
    "she studied all night",
    "the plan worked",
]

CONTRAST_TAILS = [
    "we lost the lead",
    "he is cold",
    "they failed the test",
    "she left early",
    "the crowd was angry",
    "it was not easy",
]

CAUSAL = "causal"
CONTRAST = "contrast"


def template_corpus(n_messages: int, seed: int = 0):
    """Alternating causal/contrastive messages; returns (records, labels_by_id)."""
    rng = np.random.default_rng(seed)
    records = []
    labels = {}
    for i in range(n_messages):
        arg1 = ARG1_POOL[int(rng.integers(len(ARG1_POOL)))]
        if i % 2 == 0:
            tail = CAUSE_TAILS[int(rng.integers(len(CAUSE_TAILS)))]
            text = f"{arg1} because {tail}"
            label = CAUSAL
        else:
            tail = CONTRAST_TAILS[int(rng.integers(len(CONTRAST_TAILS)))]
            text = f"{arg1} but {tail}"
            label = CONTRAST
        message_id = f"msg{i:04d}"
        records.append({"id": message_id, "text": text})
        labels[message_id] = label
    return records, labels


def write_jsonl(path: Path, records) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record) + "\n")


SYNTH_LABELS = {
    "class": ["Contingency", "Expansion", "Comparison"],
    "type": ["Cause", "Contrast", "Concession"],
    "subtype": ["reason", "result", "juxtaposition", "opposition"],
}

SYNTH_WEIGHTS = {
    "because": {
        "class": [0.8, 0.2, 0.0],
        "type": [1.0, 0.0, 0.0],
        "subtype": [0.7, 0.3, 0.0, 0.0],
    },
    "but": {
        "class": [0.0, 0.1, 0.9],
        "type": [0.0, 0.75, 0.25],
        "subtype": [0.0, 0.0, 0.6, 0.4],
    },
    "if": {
        "class": [0.9, 0.1, 0.0],
        "type": [1.0, 0.0, 0.0],
        "subtype": [0.5, 0.5, 0.0, 0.0],
    },
}


def synth_posterior_table() -> PosteriorTable:
    posteriors = {
        conn: {lv: np.array(w, dtype=float) for lv, w in weights.items()}
        for conn, weights in SYNTH_WEIGHTS.items()
    }
    return PosteriorTable(
        labels={lv: list(ls) for lv, ls in SYNTH_LABELS.items()}, posteriors=posteriors
    )


def write_synth_posteriors_tsv(path: Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for conn, weights in SYNTH_WEIGHTS.items():
            for level, vec in weights.items():
                for label, w in zip(SYNTH_LABELS[level], vec):
                    if w > 0:
                        fh.write(f"{level}\t{conn}\t{label}\t{w}\n")


def corpus_vocabulary(records) -> list[str]:
    vocab = set()
    for record in records:
        vocab.update(record["text"].lower().split())
    return sorted(vocab)


def write_word_vectors(path: Path, vocab, dim: int = 16, seed: int = 5) -> None:
    rng = np.random.default_rng(seed)
    with open(path, "w", encoding="utf-8") as fh:
        for token in vocab:
            values = rng.uniform(-0.8, 0.8, size=dim)
            fh.write(token + " " + " ".join(f"{v:.5f}" for v in values) + "\n")


def synth_word_vectors(records, dim: int = 16, seed: int = 5, tmp_path: Path | None = None) -> WordVectorTable:
    """Random fixed vectors over the corpus vocabulary, round-tripped through
    the text loader when a directory is supplied."""
    vocab = corpus_vocabulary(records)
    if tmp_path is not None:
        path = tmp_path / "vectors.txt"
        write_word_vectors(path, vocab, dim=dim, seed=seed)
        return load_word_vectors(path)
    rng = np.random.default_rng(seed)
    vectors = {tok: rng.uniform(-0.8, 0.8, size=dim) for tok in vocab}
    unk = np.mean(np.stack(list(vectors.values())), axis=0)
    return WordVectorTable(dim=dim, vectors=vectors, unk_vector=unk)
