"""Loaders for external data: corpora, word vectors, connective posteriors
and labeled evaluation sets, plus the capped keyword filter that builds a
training corpus.

All loaders are pure functions returning immutable-by-convention tables, so
the results are safe to share across threads.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import DataFormatError

# Hierarchy levels, outermost first.
LEVELS = ("class", "type", "subtype")

# Connectives used as keywords when building the weakly supervised corpus:
# the most frequent marker of each relation type.
TRAINING_KEYWORDS = (
    "after",
    "before",
    "when",
    "but",
    "though",
    "nevertheless",
    "however",
    "because",
    "if",
    "and",
    "for example",
    "or",
    "except",
    "also",
)


@dataclass
class WordVectorTable:
    """Pretrained word vectors with a mean-vector fallback for unknown words."""

    dim: int
    vectors: dict[str, np.ndarray]
    unk_vector: np.ndarray

    def lookup(self, token: str) -> np.ndarray:
        """Vector for ``token``; unknown tokens get the corpus mean. Never fails."""
        return self.vectors.get(token, self.unk_vector)

    def __contains__(self, token: str) -> bool:
        return token in self.vectors


@dataclass
class PosteriorTable:
    """Per-connective probability distributions over relation labels, one
    distribution per hierarchy level."""

    labels: dict[str, list[str]]
    posteriors: dict[str, dict[str, np.ndarray]]

    @property
    def connectives(self) -> list[str]:
        return list(self.posteriors)

    @property
    def level_sizes(self) -> tuple[int, int, int]:
        return tuple(len(self.labels[lv]) for lv in LEVELS)  # type: ignore[return-value]

    def distribution(self, connective: str, level: str) -> np.ndarray | None:
        """Probability vector over ``labels[level]``, or None when the
        connective has no entry at that level."""
        entry = self.posteriors.get(connective)
        if entry is None:
            return None
        return entry.get(level)


@dataclass
class LabeledItem:
    label: str
    item_id: str
    text: str | None = None
    arg1: list[str] | None = None
    arg2: list[str] | None = None
    connective: str | None = None
    section: int | None = None

    @property
    def is_pair(self) -> bool:
        return self.arg1 is not None


@dataclass
class LabeledDataset:
    items: list[LabeledItem]
    label_set: list[str]


@dataclass
class RawMessage:
    """One corpus record: raw text, or pre-tagged tokens when the corpus was
    tagged upstream."""

    message_id: str
    text: str | None = None
    tokens: list[tuple[str, str]] | None = None

    @property
    def is_tagged(self) -> bool:
        return self.tokens is not None


def load_word_vectors(path: str | Path) -> WordVectorTable:
    """Read vectors from text, one ``token v1 ... vd`` line per word."""
    vectors: dict[str, np.ndarray] = {}
    dim = -1
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.rstrip("\n").split()
            if not parts:
                continue
            token, values = parts[0], parts[1:]
            if dim < 0:
                dim = len(values)
                if dim == 0:
                    raise DataFormatError(f"{path}: line {lineno}: no vector values")
            elif len(values) != dim:
                raise DataFormatError(
                    f"{path}: line {lineno}: expected {dim} values, got {len(values)}"
                )
            try:
                vectors[token] = np.array([float(v) for v in values])
            except ValueError as exc:
                raise DataFormatError(f"{path}: line {lineno}: {exc}") from exc
    if not vectors:
        raise DataFormatError(f"{path}: no word vectors found")
    unk = np.mean(np.stack(list(vectors.values())), axis=0)
    return WordVectorTable(dim=dim, vectors=vectors, unk_vector=unk)


def load_posterior_table(path: str | Path) -> PosteriorTable:
    """Read the 4-column TSV (level, connective, label, weight) and normalize
    weights per connective and level."""
    labels: dict[str, list[str]] = {lv: [] for lv in LEVELS}
    raw: dict[str, dict[str, dict[str, float]]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            cols = line.split("\t")
            if len(cols) != 4:
                raise DataFormatError(
                    f"{path}: line {lineno}: expected 4 tab-separated columns"
                )
            level, connective, label, weight_s = (c.strip() for c in cols)
            level = level.lower()
            if level not in LEVELS:
                raise DataFormatError(
                    f"{path}: line {lineno}: unknown level {level!r}"
                )
            try:
                weight = float(weight_s)
            except ValueError as exc:
                raise DataFormatError(f"{path}: line {lineno}: bad weight") from exc
            if weight < 0:
                raise DataFormatError(
                    f"{path}: line {lineno}: negative weight {weight}"
                )
            connective = connective.lower()
            if label not in labels[level]:
                labels[level].append(label)
            raw.setdefault(connective, {}).setdefault(level, {})
            raw[connective][level][label] = raw[connective][level].get(label, 0.0) + weight

    for level in LEVELS:
        if not labels[level]:
            raise DataFormatError(f"{path}: no rows for level {level!r}")

    posteriors: dict[str, dict[str, np.ndarray]] = {}
    for connective, per_level in raw.items():
        if "class" not in per_level:
            raise DataFormatError(
                f"{path}: connective {connective!r} has no class-level entry"
            )
        dists: dict[str, np.ndarray] = {}
        for level, weight_map in per_level.items():
            vec = np.zeros(len(labels[level]))
            for label, weight in weight_map.items():
                vec[labels[level].index(label)] = weight
            total = vec.sum()
            if total <= 0:
                raise DataFormatError(
                    f"{path}: all-zero weights for ({connective!r}, {level})"
                )
            dists[level] = vec / total
        posteriors[connective] = dists
    return PosteriorTable(labels=labels, posteriors=posteriors)


def load_corpus(path: str | Path) -> list[RawMessage]:
    """Read a JSON-lines corpus, preserving record order."""
    messages: list[RawMessage] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataFormatError(f"{path}: line {lineno}: invalid JSON ({exc})") from exc
            if not isinstance(record, dict) or "id" not in record:
                raise DataFormatError(f"{path}: line {lineno}: record needs an 'id'")
            msg_id = str(record["id"])
            if "tokens" in record:
                try:
                    tokens = [(t["text"], t["pos"]) for t in record["tokens"]]
                except (TypeError, KeyError) as exc:
                    raise DataFormatError(
                        f"{path}: line {lineno}: each token needs 'text' and 'pos'"
                    ) from exc
                messages.append(RawMessage(message_id=msg_id, tokens=tokens))
            elif "text" in record:
                messages.append(RawMessage(message_id=msg_id, text=str(record["text"])))
            else:
                raise DataFormatError(
                    f"{path}: line {lineno}: record needs 'text' or 'tokens'"
                )
    return messages


def load_labeled_dataset(path: str | Path) -> LabeledDataset:
    """Read a labeled JSONL evaluation set, either message records
    (``{"text", "label"}``) or argument-pair records
    (``{"arg1", "arg2", "connective", "label"}``)."""
    items: list[LabeledItem] = []
    label_set: list[str] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataFormatError(f"{path}: line {lineno}: invalid JSON ({exc})") from exc
            if "label" not in record:
                raise DataFormatError(f"{path}: line {lineno}: record needs a 'label'")
            label = str(record["label"])
            item_id = str(record.get("id", lineno - 1))
            section = record.get("section")
            if "arg1" in record and "arg2" in record:
                item = LabeledItem(
                    label=label,
                    item_id=item_id,
                    arg1=[str(t) for t in record["arg1"]],
                    arg2=[str(t) for t in record["arg2"]],
                    connective=record.get("connective"),
                    section=int(section) if section is not None else None,
                )
            elif "text" in record:
                item = LabeledItem(label=label, item_id=item_id, text=str(record["text"]))
            else:
                raise DataFormatError(
                    f"{path}: line {lineno}: record needs 'text' or 'arg1'/'arg2'"
                )
            items.append(item)
            if label not in label_set:
                label_set.append(label)
    if not items:
        raise DataFormatError(f"{path}: empty dataset")
    return LabeledDataset(items=items, label_set=label_set)


def _message_token_texts(message: RawMessage) -> list[str]:
    if message.is_tagged:
        return [text.lower() for text, _ in message.tokens]
    # Imported here: segmenter depends on nothing from this module's loaders,
    # but keyword matching must agree with its tokenization.
    from .segmenter import preprocess

    return [tok.text.lower() for tok in preprocess(message.text or "")]


def _first_matching_keyword(
    token_texts: list[str], keyword_tokens: list[tuple[str, tuple[str, ...]]]
) -> str | None:
    for start in range(len(token_texts)):
        best: str | None = None
        best_len = 0
        for keyword, parts in keyword_tokens:
            n = len(parts)
            if n > best_len and tuple(token_texts[start : start + n]) == parts:
                best = keyword
                best_len = n
        if best is not None:
            return best
    return None


def build_training_corpus(
    corpus: Sequence[RawMessage],
    keyword_lexicon: Iterable[str] = TRAINING_KEYWORDS,
    cap: int = 3000,
) -> list[RawMessage]:
    """Keep up to ``cap`` messages per keyword connective.

    A message is counted against the first keyword that matches it as a
    standalone token sequence (leftmost occurrence, longest match on ties),
    case-insensitively.  Deterministic given input order, and idempotent.
    """
    keywords = [k.strip().lower() for k in keyword_lexicon if k.strip()]
    if not keywords:
        raise ValueError("keyword lexicon is empty")
    if cap <= 0:
        raise ValueError(f"cap must be positive, got {cap}")
    keyword_tokens = [(k, tuple(k.split())) for k in keywords]
    counts = {k: 0 for k in keywords}
    kept: list[RawMessage] = []
    for message in corpus:
        keyword = _first_matching_keyword(_message_token_texts(message), keyword_tokens)
        if keyword is None:
            continue
        if counts[keyword] < cap:
            counts[keyword] += 1
            kept.append(message)
    return kept
