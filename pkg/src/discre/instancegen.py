"""Weakly labeled training instance generation.

Every explicit argument pair becomes two training instances: the pair as-is,
soft-labeled with the connective's posterior distribution at each hierarchy
level, and an implicit variant with the connective tokens deleted from Arg2.
A stable hash of the message id holds out 10% of messages for development.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .corpus_io import LEVELS, PosteriorTable
from .errors import DataFormatError
from .segmenter import ArgumentSegmentation, Pair

EXPLICIT = "explicit"
IMPLICIT = "implicit"

DEV_FRACTION_BUCKETS = 10  # one bucket in ten → dev

INSTANCES_FORMAT = "discre-instances-v1"


@dataclass
class TargetDistribution:
    """Per-level soft targets: probability vectors whose support doubles as
    the positive-label indicator."""

    weights: dict[str, np.ndarray]

    @property
    def support(self) -> dict[str, np.ndarray]:
        return {level: (w > 0).astype(float) for level, w in self.weights.items()}

    def validate(self) -> None:
        for level in LEVELS:
            w = self.weights[level]
            if np.any(w < 0):
                raise ValueError(f"negative weight at level {level}")
            if abs(float(w.sum()) - 1.0) > 1e-9:
                raise ValueError(f"weights at level {level} sum to {w.sum()}")

    def entropy(self) -> float:
        """Sum over levels of the target entropy; the loss lower bound."""
        total = 0.0
        for w in self.weights.values():
            nz = w[w > 0]
            total += float(-(nz * np.log(nz)).sum())
        return total


@dataclass
class TrainingInstance:
    message_id: str
    context: list[list[str]]
    arg1_idx: int
    arg2_idx: int
    targets: TargetDistribution
    kind: str
    connective: str


def pseudo_label(connective: str, table: PosteriorTable) -> TargetDistribution:
    """Soft targets for a connective: its posterior at every level, with a
    uniform fallback for levels where the table has no entry."""
    if table.distribution(connective, "class") is None:
        raise KeyError(f"connective {connective!r} has no class-level posterior")
    weights: dict[str, np.ndarray] = {}
    for level in LEVELS:
        dist = table.distribution(connective, level)
        if dist is None:
            n = len(table.labels[level])
            dist = np.full(n, 1.0 / n)
        weights[level] = dist.copy()
    return TargetDistribution(weights=weights)


def make_explicit_instance(
    message_id: str,
    segmentation: ArgumentSegmentation,
    pair: Pair,
    table: PosteriorTable,
) -> TrainingInstance:
    """Build the explicit instance for a connective-bearing pair, carrying the
    whole message's argument list as context."""
    if pair.connective is None:
        raise ValueError("explicit instances need a connective-bearing pair")
    context = [segmentation.argument_tokens(i) for i in range(len(segmentation.arguments))]
    return TrainingInstance(
        message_id=message_id,
        context=context,
        arg1_idx=pair.arg1,
        arg2_idx=pair.arg2,
        targets=pseudo_label(pair.connective, table),
        kind=EXPLICIT,
        connective=pair.connective,
    )


def _delete_subsequence(tokens: list[str], parts: Sequence[str]) -> list[str]:
    """Drop every non-overlapping occurrence of ``parts`` from ``tokens``."""
    out: list[str] = []
    i = 0
    k = len(parts)
    while i < len(tokens):
        if tuple(t.lower() for t in tokens[i : i + k]) == tuple(parts):
            i += k
        else:
            out.append(tokens[i])
            i += 1
    return out


def make_implicit_instance(instance: TrainingInstance) -> TrainingInstance | None:
    """Copy of an explicit instance with the connective deleted from Arg2;
    None when the deletion would empty the argument."""
    parts = instance.connective.split()
    arg2 = _delete_subsequence(instance.context[instance.arg2_idx], parts)
    if not arg2:
        return None
    context = [list(arg) for arg in instance.context]
    context[instance.arg2_idx] = arg2
    return TrainingInstance(
        message_id=instance.message_id,
        context=context,
        arg1_idx=instance.arg1_idx,
        arg2_idx=instance.arg2_idx,
        targets=TargetDistribution(
            weights={lv: w.copy() for lv, w in instance.targets.weights.items()}
        ),
        kind=IMPLICIT,
        connective=instance.connective,
    )


def is_dev_message(message_id: str) -> bool:
    """Stable dev-split membership: a function of the message id alone."""
    digest = hashlib.sha1(message_id.encode("utf-8")).hexdigest()
    return int(digest[:8], 16) % DEV_FRACTION_BUCKETS == 0


def build_training_set(
    segmented: Sequence[tuple[str, ArgumentSegmentation]],
    table: PosteriorTable,
) -> tuple[list[TrainingInstance], list[TrainingInstance]]:
    """Generate (train, dev) instances over a segmented corpus, explicit and
    implicit variants per explicit pair, in deterministic order."""
    train: list[TrainingInstance] = []
    dev: list[TrainingInstance] = []
    for message_id, segmentation in segmented:
        bucket = dev if is_dev_message(message_id) else train
        for pair in segmentation.pairs:
            if pair.connective is None:
                continue
            explicit = make_explicit_instance(message_id, segmentation, pair, table)
            bucket.append(explicit)
            implicit = make_implicit_instance(explicit)
            if implicit is not None:
                bucket.append(implicit)
    return train, dev


def instance_to_record(instance: TrainingInstance) -> dict:
    return {
        "id": instance.message_id,
        "context": instance.context,
        "arg1": instance.arg1_idx,
        "arg2": instance.arg2_idx,
        "kind": instance.kind,
        "connective": instance.connective,
        "targets": {lv: instance.targets.weights[lv].tolist() for lv in LEVELS},
    }


def instance_from_record(record: dict) -> TrainingInstance:
    return TrainingInstance(
        message_id=str(record["id"]),
        context=[[str(t) for t in arg] for arg in record["context"]],
        arg1_idx=int(record["arg1"]),
        arg2_idx=int(record["arg2"]),
        targets=TargetDistribution(
            weights={lv: np.array(record["targets"][lv], dtype=float) for lv in LEVELS}
        ),
        kind=str(record["kind"]),
        connective=str(record["connective"]),
    )


def write_instances(
    path: str | Path,
    instances: Iterable[TrainingInstance],
    labels: dict[str, list[str]],
    connectives: Sequence[str],
) -> None:
    """Write instances as JSONL; the first line is a metadata record with the
    label vocabularies needed to size a model."""
    with open(path, "w", encoding="utf-8") as fh:
        meta = {
            "meta": {
                "format": INSTANCES_FORMAT,
                "labels": {lv: list(labels[lv]) for lv in LEVELS},
                "connectives": list(connectives),
            }
        }
        fh.write(json.dumps(meta) + "\n")
        for instance in instances:
            fh.write(json.dumps(instance_to_record(instance)) + "\n")


def read_instances(
    path: str | Path,
) -> tuple[list[TrainingInstance], dict[str, list[str]], list[str]]:
    """Read an instances file; returns (instances, labels, connectives)."""
    instances: list[TrainingInstance] = []
    labels: dict[str, list[str]] | None = None
    connectives: list[str] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataFormatError(f"{path}: line {lineno}: invalid JSON ({exc})") from exc
            if "meta" in record:
                meta = record["meta"]
                if meta.get("format") != INSTANCES_FORMAT:
                    raise DataFormatError(
                        f"{path}: line {lineno}: unknown format {meta.get('format')!r}"
                    )
                labels = {lv: [str(x) for x in meta["labels"][lv]] for lv in LEVELS}
                connectives = [str(c) for c in meta.get("connectives", [])]
                continue
            try:
                instances.append(instance_from_record(record))
            except (KeyError, TypeError, ValueError) as exc:
                raise DataFormatError(f"{path}: line {lineno}: bad instance ({exc})") from exc
    if labels is None:
        raise DataFormatError(f"{path}: missing metadata line")
    return instances, labels, connectives
