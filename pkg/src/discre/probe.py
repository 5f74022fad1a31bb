"""Transfer-learning probes over frozen relation embeddings.

Feature construction (per-pair and message-averaged), a one-vs-rest linear
max-margin classifier trained by deterministic subgradient descent, micro and
macro F1, stratified cross-validation, attention summaries, and a 2-D
principal-component projection for embedding exports.
"""

from __future__ import annotations

import hashlib
import warnings
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .corpus_io import LabeledItem, WordVectorTable
from .model import extract_discre
from .segmenter import ArgumentSegmentation


@dataclass
class FeatureMatrix:
    features: np.ndarray
    labels: list[str]
    ids: list[str]

    def __post_init__(self):
        if self.features.shape[0] != len(self.labels):
            raise ValueError("feature rows and labels differ in length")
        if not np.all(np.isfinite(self.features)):
            raise ValueError("features contain NaN or Inf")


@dataclass
class LinearModel:
    classes: list[str]
    weights: np.ndarray  # (n_classes, dim)
    biases: np.ndarray  # (n_classes,)
    c: float
    epochs: int
    seed: int

    def decision(self, features: np.ndarray) -> np.ndarray:
        return features @ self.weights.T + self.biases

    def predict(self, features: np.ndarray) -> list[str]:
        scores = self.decision(np.atleast_2d(features))
        return [self.classes[i] for i in scores.argmax(axis=1)]


@dataclass
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass
class MetricsReport:
    per_class: dict[str, ClassMetrics]
    micro_f1: float
    macro_f1: float

    def to_dict(self) -> dict:
        return {
            "per_class": {
                label: {
                    "precision": m.precision,
                    "recall": m.recall,
                    "f1": m.f1,
                    "support": m.support,
                }
                for label, m in self.per_class.items()
            },
            "micro_f1": self.micro_f1,
            "macro_f1": self.macro_f1,
        }


def pair_features(
    arg1: Sequence[str],
    arg2: Sequence[str],
    word_vectors: WordVectorTable,
    params: dict[str, np.ndarray],
) -> np.ndarray:
    """Relation embedding of an argument pair treated as a standalone
    two-argument message."""
    if not arg1 or not arg2:
        raise ValueError("both arguments must be nonempty")
    return extract_discre([list(arg1), list(arg2)], 0, 1, word_vectors, params)


def message_features(
    segmentation: ArgumentSegmentation,
    word_vectors: WordVectorTable,
    params: dict[str, np.ndarray],
    self_pair_backoff: bool = False,
) -> np.ndarray:
    """Mean relation embedding over all adjacent argument pairs of a message.

    Single-argument messages have no pairs; with ``self_pair_backoff`` the
    lone argument is paired with a copy of itself instead of erroring.
    """
    n = len(segmentation.arguments)
    context = [segmentation.argument_tokens(i) for i in range(n)]
    if n >= 2:
        vecs = [
            extract_discre(context, k, k + 1, word_vectors, params)
            for k in range(n - 1)
        ]
        return np.mean(vecs, axis=0)
    if n == 1 and self_pair_backoff:
        doubled = [context[0], list(context[0])]
        return extract_discre(doubled, 0, 1, word_vectors, params)
    raise ValueError("message yields no argument pairs")


def train_linear(
    features: np.ndarray,
    labels: Sequence[str],
    c: float = 1.0,
    epochs: int = 200,
    seed: int = 0,
) -> LinearModel:
    """One-vs-rest hinge loss with L2 regularization (strength 1/C), minimized
    by deterministic full-batch subgradient descent."""
    features = np.asarray(features, dtype=float)
    n, dim = features.shape
    classes = sorted(set(labels))
    if len(classes) < 2:
        raise ValueError("need at least two classes")
    # bias folded in as a constant feature column
    augmented = np.hstack([features, np.ones((n, 1))])
    lam = 1.0 / (c * n)
    radius = 1.0 / np.sqrt(lam)
    labels_arr = np.array(labels)
    stacked = np.zeros((len(classes), dim + 1))
    for ci, cls in enumerate(classes):
        sign = np.where(labels_arr == cls, 1.0, -1.0)
        w = np.zeros(dim + 1)
        for t in range(1, epochs + 1):
            margin = sign * (augmented @ w)
            active = margin < 1.0
            grad = lam * w - (sign[active, None] * augmented[active]).sum(axis=0) / n
            w -= grad / (lam * t)
            norm = np.linalg.norm(w)
            if norm > radius:
                w *= radius / norm
        stacked[ci] = w
    return LinearModel(classes=classes, weights=stacked[:, :dim],
                       biases=stacked[:, dim], c=c, epochs=epochs, seed=seed)


def f1_metrics(
    gold: Sequence[str], predicted: Sequence[str], label_set: Iterable[str]
) -> MetricsReport:
    """Per-class precision/recall/F1, unweighted macro F1, and micro F1 from
    pooled true/false positive counts."""
    if len(gold) != len(predicted):
        raise ValueError("gold and predicted must have equal length")
    labels = list(dict.fromkeys(label_set))
    known = set(labels)
    for value in list(gold) + list(predicted):
        if value not in known:
            raise ValueError(f"label {value!r} not in label set")
    per_class: dict[str, ClassMetrics] = {}
    tp_total = fp_total = fn_total = 0
    f1_sum = 0.0
    for label in labels:
        tp = sum(1 for g, p in zip(gold, predicted) if g == label and p == label)
        fp = sum(1 for g, p in zip(gold, predicted) if g != label and p == label)
        fn = sum(1 for g, p in zip(gold, predicted) if g == label and p != label)
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        per_class[label] = ClassMetrics(precision, recall, f1, support=tp + fn)
        tp_total += tp
        fp_total += fp
        fn_total += fn
        f1_sum += f1
    micro_p = tp_total / (tp_total + fp_total) if tp_total + fp_total else 0.0
    micro_r = tp_total / (tp_total + fn_total) if tp_total + fn_total else 0.0
    micro_f1 = 2 * micro_p * micro_r / (micro_p + micro_r) if micro_p + micro_r else 0.0
    return MetricsReport(per_class=per_class, micro_f1=micro_f1, macro_f1=f1_sum / len(labels))


def _stable_hash(text: str) -> int:
    return int(hashlib.sha1(text.encode("utf-8")).hexdigest()[:12], 16)


def kfold_assignments(ids: Sequence[str], labels: Sequence[str], k: int, seed: int) -> np.ndarray:
    """Stratified fold index per item, stable in the item ids and seed."""
    if k < 2:
        raise ValueError("k must be at least 2")
    if len(ids) < k:
        raise ValueError("dataset smaller than k")
    folds = np.zeros(len(ids), dtype=int)
    by_label: dict[str, list[int]] = defaultdict(list)
    for i, label in enumerate(labels):
        by_label[label].append(i)
    for label, indices in by_label.items():
        if len(indices) < k:
            warnings.warn(
                f"class {label!r} has fewer than {k} examples; "
                "its items cannot appear in every fold"
            )
        ranked = sorted(indices, key=lambda i: _stable_hash(f"{seed}:{ids[i]}"))
        for rank, i in enumerate(ranked):
            folds[i] = rank % k
    return folds


def kfold_predictions(
    data: FeatureMatrix,
    k: int,
    c: float = 1.0,
    epochs: int = 200,
    seed: int = 0,
) -> list[str]:
    """Held-out prediction for every item, from k stratified train/test splits."""
    folds = kfold_assignments(data.ids, data.labels, k, seed)
    predictions: list[str | None] = [None] * len(data.ids)
    for fold in range(k):
        test_mask = folds == fold
        train_mask = ~test_mask
        if not test_mask.any():
            continue
        model = train_linear(
            data.features[train_mask],
            [lab for lab, m in zip(data.labels, train_mask) if m],
            c=c, epochs=epochs, seed=seed,
        )
        predicted = model.predict(data.features[test_mask])
        for idx, pred in zip(np.flatnonzero(test_mask), predicted):
            predictions[idx] = pred
    assert all(p is not None for p in predictions)
    return predictions  # type: ignore[return-value]


def kfold_cv(
    data: FeatureMatrix,
    k: int,
    c: float = 1.0,
    epochs: int = 200,
    seed: int = 0,
) -> MetricsReport:
    """Metrics pooled over the held-out predictions of stratified k-fold CV."""
    predictions = kfold_predictions(data, k, c=c, epochs=epochs, seed=seed)
    return f1_metrics(data.labels, predictions, sorted(set(data.labels)))


GROUP_KEY_DC = "key_dc"
GROUP_NONKEY_DC = "nonkey_dc"
GROUP_OTHER = "other"


@dataclass
class AttentionStats:
    word_means: dict[str, float]
    word_counts: dict[str, int]
    word_groups: dict[str, str]
    group_means: dict[str, float] = field(default_factory=dict)

    def group_of(self, word: str) -> str:
        return self.word_groups.get(word, GROUP_OTHER)


def attention_stats(
    segmentations: Sequence[tuple[str, ArgumentSegmentation]],
    word_vectors: WordVectorTable,
    params: dict[str, np.ndarray],
    keywords: Iterable[str],
    connectives: Iterable[str],
) -> AttentionStats:
    """Mean attention weight per word type, with words grouped into training
    keyword connectives, other known connectives, and everything else.

    Multiword connectives count through their component words only when those
    words are connectives in their own right.
    """
    from .model import encode_argument

    keyword_words = {k.lower() for k in keywords if " " not in k.strip()}
    connective_words = {c.lower() for c in connectives if " " not in c.strip()}
    sums: dict[str, float] = defaultdict(float)
    counts: dict[str, int] = defaultdict(int)
    for _, segmentation in segmentations:
        for idx in range(len(segmentation.arguments)):
            tokens = segmentation.argument_tokens(idx)
            if not tokens:
                continue
            _, alpha = encode_argument(tokens, word_vectors, params, train_mode=False)
            for token, weight in zip(tokens, alpha):
                word = token.lower()
                sums[word] += float(weight)
                counts[word] += 1
    word_means = {w: sums[w] / counts[w] for w in sums}
    word_groups = {}
    for word in word_means:
        if word in keyword_words:
            word_groups[word] = GROUP_KEY_DC
        elif word in connective_words:
            word_groups[word] = GROUP_NONKEY_DC
        else:
            word_groups[word] = GROUP_OTHER
    group_values: dict[str, list[float]] = defaultdict(list)
    for word, mean in word_means.items():
        group_values[word_groups[word]].append(mean)
    group_means = {g: float(np.mean(v)) for g, v in group_values.items()}
    dc_values = group_values.get(GROUP_KEY_DC, []) + group_values.get(GROUP_NONKEY_DC, [])
    if dc_values:
        group_means["all_dc"] = float(np.mean(dc_values))
    return AttentionStats(
        word_means=word_means,
        word_counts=dict(counts),
        word_groups=word_groups,
        group_means=group_means,
    )


def project_2d(embeddings: np.ndarray) -> np.ndarray:
    """Project rows onto the top two principal components.

    Deterministic sign convention: each component's largest-magnitude loading
    is positive.  Zero-variance input maps everything to the origin.
    """
    x = np.asarray(embeddings, dtype=float)
    if x.ndim != 2 or x.shape[0] < 2:
        raise ValueError("need at least two embedding rows")
    centered = x - x.mean(axis=0)
    if not np.any(centered):
        return np.zeros((x.shape[0], 2))
    _, singular, vt = np.linalg.svd(centered, full_matrices=False)
    coords = np.zeros((x.shape[0], 2))
    for comp in range(min(2, vt.shape[0])):
        if singular[comp] <= 0:
            break
        loading = vt[comp]
        if loading[np.argmax(np.abs(loading))] < 0:
            loading = -loading
        coords[:, comp] = centered @ loading
    return coords


def split_by_section(
    items: Sequence[LabeledItem],
    train_sections: Iterable[int] = range(2, 22),
    test_sections: Iterable[int] = (23,),
) -> tuple[list[LabeledItem], list[LabeledItem]]:
    """Split section-annotated pair items into train/test by section number
    (newswire convention: sections 2-21 train, section 23 test)."""
    train_set = set(train_sections)
    test_set = set(test_sections)
    train_items = [it for it in items if it.section in train_set]
    test_items = [it for it in items if it.section in test_set]
    return train_items, test_items
