"""Command-line entry point exposing the pipeline stages.

Subcommands: segment, gen-instances, train, embed, probe, attn-stats,
project.  A shared ``--config`` file (INI-style sections, one per stage plus
``[common]``) provides defaults that explicit flags override.  Exit codes:
0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import configparser
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .corpus_io import (
    TRAINING_KEYWORDS,
    load_corpus,
    load_labeled_dataset,
    load_posterior_table,
    load_word_vectors,
)
from .errors import DiscreError
from .instancegen import build_training_set, read_instances, write_instances
from .model import (
    CHECKPOINT_VERSION,
    ModelConfig,
    extract_discre,
    load_checkpoint,
    save_checkpoint,
    train,
)
from .probe import (
    FeatureMatrix,
    attention_stats,
    f1_metrics,
    kfold_cv,
    message_features,
    pair_features,
    project_2d,
    train_linear,
)
from .segmenter import (
    segment_corpus,
    segment_message,
    segmentation_from_record,
    segmentation_to_record,
    tag_message,
)

log = logging.getLogger("discre")

USAGE_ERROR = 1
DATA_ERROR = 2


class _UsageError(Exception):
    pass


# Flag name -> converter, per subcommand; drives both argparse and the
# config-file fallback so the two sources agree on types.
_OPTIONS: dict[str, list[tuple[str, type | None, bool, str]]] = {
    "segment": [
        ("in", str, True, "input corpus JSONL"),
        ("out", str, True, "output segments JSONL"),
        ("posteriors", str, False, "posterior TSV supplying the connective lexicon"),
    ],
    "gen-instances": [
        ("segments", str, True, "segments JSONL from the segment stage"),
        ("posteriors", str, True, "posterior TSV"),
        ("out", str, True, "training instances JSONL"),
        ("dev", str, True, "development instances JSONL"),
    ],
    "train": [
        ("train", str, True, "training instances JSONL"),
        ("dev", str, True, "development instances JSONL"),
        ("vectors", str, True, "word vectors (text format)"),
        ("out", str, True, "checkpoint path"),
        ("epochs", int, False, "training epochs (default 50)"),
        ("lr", float, False, "learning rate (default 1e-3)"),
        ("hidden", int, False, "recurrent state size per direction (default 200)"),
        ("dropout", float, False, "dropout rate (default 0.3)"),
        ("loss", str, False, "loss mode: softmax-ce (default) or sigmoid-bce"),
    ],
    "embed": [
        ("model", str, True, "checkpoint path"),
        ("segments", str, True, "segments JSONL"),
        ("out", str, True, "embeddings JSONL"),
    ],
    "probe": [
        ("features", str, True, "feature mode: pair or message"),
        ("model", str, True, "checkpoint path"),
        ("data", str, False, "labeled dataset JSONL"),
        ("cv", int, False, "number of cross-validation folds"),
        ("train-split", str, False, "labeled training split JSONL"),
        ("test-split", str, False, "labeled test split JSONL"),
        ("section-split", None, False, "split --data by its section field (2-21 train, 23 test)"),
        ("report", str, True, "metrics report JSON"),
        ("c", float, False, "SVM regularization constant C (default 1.0)"),
    ],
    "attn-stats": [
        ("model", str, True, "checkpoint path"),
        ("segments", str, True, "segments JSONL"),
        ("keywords", str, False, "keyword connective list, one per line"),
        ("out", str, True, "per-word attention TSV"),
    ],
    "project": [
        ("embeddings", str, True, "embeddings JSONL"),
        ("out", str, True, "2-D coordinates CSV"),
    ],
}

_COMMON = [
    ("seed", int, False, "random seed (default 7)"),
    ("log-level", str, False, "logging level (default INFO)"),
]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="discre", add_help=True)
    parser.add_argument("--version", action="store_true", help="print versions and exit")
    sub = parser.add_subparsers(dest="command")
    for command, options in _OPTIONS.items():
        sp = sub.add_parser(command)
        sp.add_argument("--config", default=None, help="INI config file")
        for name, converter, _required, help_text in options + _COMMON:
            if converter is None:
                sp.add_argument(f"--{name}", action="store_true", default=None, help=help_text)
            else:
                sp.add_argument(f"--{name}", type=converter, default=None, help=help_text)
    return parser


def _load_config(path: str | None) -> configparser.ConfigParser:
    cfg = configparser.ConfigParser()
    if path:
        read = cfg.read(path)
        if not read:
            raise DiscreError(f"config file not found: {path}")
    return cfg


def _resolve(args: argparse.Namespace, command: str, cfg: configparser.ConfigParser) -> dict:
    """CLI flag > config file > hard default; missing required flags are
    usage errors naming the flag."""
    resolved: dict = {}
    for name, converter, required, _help in _OPTIONS[command] + _COMMON:
        attr = name.replace("-", "_")
        value = getattr(args, attr, None)
        if value is None:
            for section in (command, "common"):
                if cfg.has_option(section, name):
                    raw = cfg.get(section, name).strip().strip("\"'")
                    value = (raw.lower() in ("1", "true", "yes")) if converter is None else converter(raw)
                    break
        if value is None and required:
            raise _UsageError(f"missing required flag --{name}")
        resolved[attr] = value
    if resolved.get("seed") is None:
        resolved["seed"] = 7
    return resolved


def _read_segments(path: str):
    segments = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DiscreError(f"{path}: line {lineno}: invalid JSON ({exc})") from exc
            segments.append(segmentation_from_record(record))
    return segments


def _cmd_segment(opts: dict) -> int:
    corpus = load_corpus(opts["in"])
    if opts.get("posteriors"):
        connectives = load_posterior_table(opts["posteriors"]).connectives
    else:
        connectives = list(TRAINING_KEYWORDS)
    segmented = segment_corpus(corpus, connectives)
    with open(opts["out"], "w", encoding="utf-8") as fh:
        for message_id, seg in segmented:
            fh.write(json.dumps(segmentation_to_record(message_id, seg)) + "\n")
    log.info("segmented %d/%d messages -> %s", len(segmented), len(corpus), opts["out"])
    return 0


def _cmd_gen_instances(opts: dict) -> int:
    table = load_posterior_table(opts["posteriors"])
    segments = _read_segments(opts["segments"])
    train_set, dev_set = build_training_set(segments, table)
    write_instances(opts["out"], train_set, table.labels, table.connectives)
    write_instances(opts["dev"], dev_set, table.labels, table.connectives)
    log.info(
        "generated %d train / %d dev instances from %d messages",
        len(train_set), len(dev_set), len(segments),
    )
    return 0


def _cmd_train(opts: dict) -> int:
    train_set, labels, connectives = read_instances(opts["train"])
    dev_set, _, _ = read_instances(opts["dev"])
    word_vectors = load_word_vectors(opts["vectors"])
    config = ModelConfig(
        n_class=len(labels["class"]),
        n_type=len(labels["type"]),
        n_subtype=len(labels["subtype"]),
        d_word=word_vectors.dim,
        d_hidden=opts["hidden"] if opts.get("hidden") else 200,
        dropout_rate=opts["dropout"] if opts.get("dropout") is not None else 0.3,
        learning_rate=opts["lr"] if opts.get("lr") else 1e-3,
        epochs=opts["epochs"] if opts.get("epochs") else 50,
        seed=opts["seed"],
        loss_mode=opts["loss"] if opts.get("loss") else "softmax-ce",
    )
    log.info("training config: %s", config)
    checkpoint = train(train_set, dev_set, config, word_vectors, labels, connectives)
    save_checkpoint(checkpoint, opts["out"])
    log.info("checkpoint -> %s", opts["out"])
    return 0


def _cmd_embed(opts: dict) -> int:
    checkpoint = load_checkpoint(opts["model"])
    segments = _read_segments(opts["segments"])
    n_pairs = 0
    with open(opts["out"], "w", encoding="utf-8") as fh:
        for message_id, seg in segments:
            context = [seg.argument_tokens(i) for i in range(len(seg.arguments))]
            for pair in seg.pairs:
                vector = extract_discre(
                    context, pair.arg1, pair.arg2,
                    checkpoint.word_vectors, checkpoint.params,
                )
                fh.write(json.dumps({
                    "id": message_id,
                    "arg1": pair.arg1,
                    "arg2": pair.arg2,
                    "connective": pair.connective,
                    "vector": vector.tolist(),
                }) + "\n")
                n_pairs += 1
    log.info("embedded %d pairs -> %s", n_pairs, opts["out"])
    return 0


def _probe_features(items, mode: str, checkpoint) -> FeatureMatrix:
    rows = []
    labels = []
    ids = []
    for item in items:
        if mode == "pair":
            if not item.is_pair:
                raise DiscreError("pair features need arg1/arg2 records")
            vec = pair_features(
                item.arg1, item.arg2, checkpoint.word_vectors, checkpoint.params
            )
        else:
            if item.text is None:
                raise DiscreError("message features need text records")
            from .corpus_io import RawMessage

            seg = segment_message(
                tag_message(RawMessage(message_id=item.item_id, text=item.text)),
                checkpoint.connectives,
            )
            if not seg.arguments:
                log.warning("item %s has no arguments; using zero features", item.item_id)
                vec = np.zeros(checkpoint.config.discre_dim)
            else:
                vec = message_features(
                    seg, checkpoint.word_vectors, checkpoint.params,
                    self_pair_backoff=True,
                )
        rows.append(vec)
        labels.append(item.label)
        ids.append(item.item_id)
    return FeatureMatrix(features=np.stack(rows), labels=labels, ids=ids)


def _cmd_probe(opts: dict) -> int:
    mode = opts["features"]
    if mode not in ("pair", "message"):
        raise _UsageError("--features must be 'pair' or 'message'")
    split_mode = bool(opts.get("train_split")) + bool(opts.get("section_split")) + bool(opts.get("cv"))
    if bool(opts.get("train_split")) != bool(opts.get("test_split")):
        raise _UsageError("--train-split and --test-split go together")
    if split_mode > 1:
        raise _UsageError("choose one of --cv, --train-split/--test-split, --section-split")
    checkpoint = load_checkpoint(opts["model"])
    c = opts["c"] if opts.get("c") else 1.0

    if opts.get("train_split"):
        train_items = load_labeled_dataset(opts["train_split"]).items
        test_items = load_labeled_dataset(opts["test_split"]).items
    elif opts.get("section_split"):
        if not opts.get("data"):
            raise _UsageError("missing required flag --data")
        from .probe import split_by_section

        items = load_labeled_dataset(opts["data"]).items
        train_items, test_items = split_by_section(items)
        if not train_items or not test_items:
            raise DiscreError("section split produced an empty side")
    else:
        if not opts.get("data"):
            raise _UsageError("missing required flag --data")
        data = load_labeled_dataset(opts["data"])
        features = _probe_features(data.items, mode, checkpoint)
        report = kfold_cv(features, k=opts["cv"] if opts.get("cv") else 10,
                          c=c, seed=opts["seed"])
        _write_report(opts["report"], report)
        return 0

    train_fm = _probe_features(train_items, mode, checkpoint)
    test_fm = _probe_features(test_items, mode, checkpoint)
    model = train_linear(train_fm.features, train_fm.labels, c=c, seed=opts["seed"])
    predicted = model.predict(test_fm.features)
    label_set = sorted(set(train_fm.labels) | set(test_fm.labels))
    report = f1_metrics(test_fm.labels, predicted, label_set)
    _write_report(opts["report"], report)
    return 0


def _write_report(path: str, report) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report.to_dict(), fh, indent=2)
        fh.write("\n")
    log.info("report -> %s (micro F1 %.3f, macro F1 %.3f)", path, report.micro_f1, report.macro_f1)


def _cmd_attn_stats(opts: dict) -> int:
    checkpoint = load_checkpoint(opts["model"])
    segments = _read_segments(opts["segments"])
    if opts.get("keywords"):
        with open(opts["keywords"], encoding="utf-8") as fh:
            keywords = [ln.strip() for ln in fh if ln.strip() and not ln.startswith("#")]
    else:
        keywords = list(TRAINING_KEYWORDS)
    stats = attention_stats(
        segments, checkpoint.word_vectors, checkpoint.params,
        keywords, checkpoint.connectives,
    )
    with open(opts["out"], "w", encoding="utf-8") as fh:
        fh.write("word\tgroup\tcount\tmean_attention\n")
        for word in sorted(stats.word_means, key=lambda w: -stats.word_means[w]):
            fh.write(
                f"{word}\t{stats.word_groups[word]}\t{stats.word_counts[word]}"
                f"\t{stats.word_means[word]:.6f}\n"
            )
        for group, mean in sorted(stats.group_means.items()):
            fh.write(f"<group:{group}>\tsummary\t-\t{mean:.6f}\n")
    log.info("attention stats -> %s (groups: %s)", opts["out"], stats.group_means)
    return 0


def _cmd_project(opts: dict) -> int:
    rows = []
    meta = []
    with open(opts["embeddings"], encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DiscreError(
                    f"{opts['embeddings']}: line {lineno}: invalid JSON ({exc})"
                ) from exc
            rows.append(np.asarray(record["vector"], dtype=float))
            meta.append({k: v for k, v in record.items() if k != "vector"})
    if len(rows) < 2:
        raise DiscreError("need at least two embeddings to project")
    coords = project_2d(np.stack(rows))
    keys = sorted({k for m in meta for k in m})
    with open(opts["out"], "w", encoding="utf-8") as fh:
        fh.write(",".join(keys + ["x", "y"]) + "\n")
        for m, (x, y) in zip(meta, coords):
            values = [str(m.get(k, "")) for k in keys]
            fh.write(",".join(values + [repr(float(x)), repr(float(y))]) + "\n")
    log.info("projected %d embeddings -> %s", len(rows), opts["out"])
    return 0


_HANDLERS = {
    "segment": _cmd_segment,
    "gen-instances": _cmd_gen_instances,
    "train": _cmd_train,
    "embed": _cmd_embed,
    "probe": _cmd_probe,
    "attn-stats": _cmd_attn_stats,
    "project": _cmd_project,
}


def dispatch(argv: list[str]) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse uses exit code 2 for usage problems; remap to 1
        return 0 if exc.code in (0, None) else USAGE_ERROR
    if args.version:
        print(f"discre {__version__} (checkpoint format v{CHECKPOINT_VERSION})")
        return 0
    if not args.command:
        parser.print_usage(sys.stderr)
        return USAGE_ERROR
    try:
        cfg = _load_config(getattr(args, "config", None))
        opts = _resolve(args, args.command, cfg)
        level = (opts.get("log_level") or "INFO").upper()
        logging.basicConfig(
            level=getattr(logging, level, logging.INFO),
            format="%(levelname)s %(name)s: %(message)s",
            stream=sys.stderr,
            force=True,
        )
        log.info("command=%s seed=%s options=%s", args.command, opts.get("seed"),
                 {k: v for k, v in opts.items() if v is not None})
        return _HANDLERS[args.command](opts)
    except _UsageError as exc:
        print(f"discre {args.command}: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except (DiscreError, FileNotFoundError, KeyError, ValueError) as exc:
        print(f"discre {args.command}: {exc}", file=sys.stderr)
        return DATA_ERROR


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
