import json

import numpy as np
import pytest

from discre.cli import dispatch
from synthdata import (
    template_corpus,
    write_jsonl,
    write_synth_posteriors_tsv,
    write_word_vectors,
    corpus_vocabulary,
)


@pytest.fixture
def pipeline_dir(tmp_path):
    """A ready-to-run toy pipeline directory: corpus, posteriors, vectors."""
    records, labels = template_corpus(12, seed=4)
    write_jsonl(tmp_path / "corpus.jsonl", records)
    write_synth_posteriors_tsv(tmp_path / "posteriors.tsv")
    write_word_vectors(tmp_path / "vectors.txt", corpus_vocabulary(records), dim=10)
    return tmp_path, labels


def run(args):
    return dispatch([str(a) for a in args])


class TestSegmentCommand:
    def test_success_writes_output(self, pipeline_dir):
        tmp, _ = pipeline_dir
        code = run(["segment", "--in", tmp / "corpus.jsonl", "--out", tmp / "seg.jsonl",
                    "--posteriors", tmp / "posteriors.tsv"])
        assert code == 0
        lines = (tmp / "seg.jsonl").read_text().strip().splitlines()
        assert len(lines) == 12
        record = json.loads(lines[0])
        assert set(record) == {"id", "arguments", "pairs"}

    def test_defaults_to_builtin_keywords(self, pipeline_dir):
        tmp, _ = pipeline_dir
        code = run(["segment", "--in", tmp / "corpus.jsonl", "--out", tmp / "seg.jsonl"])
        assert code == 0

    def test_missing_flag_is_usage_error(self, pipeline_dir, capsys):
        tmp, _ = pipeline_dir
        code = run(["segment", "--in", tmp / "corpus.jsonl"])
        assert code == 1
        assert "--out" in capsys.readouterr().err

    def test_corrupt_input_is_data_error(self, tmp_path, capsys):
        bad = tmp_path / "bad.jsonl"
        bad.write_text('{"id": "a", "text": "ok"}\n{oops\n')
        code = run(["segment", "--in", bad, "--out", tmp_path / "seg.jsonl"])
        assert code == 2
        assert "line 2" in capsys.readouterr().err

    def test_missing_file_is_data_error(self, tmp_path):
        code = run(["segment", "--in", tmp_path / "nope.jsonl", "--out", tmp_path / "o"])
        assert code == 2


class TestDispatch:
    def test_unknown_subcommand_usage_error(self):
        assert run(["frobnicate"]) == 1

    def test_no_subcommand_usage_error(self):
        assert run([]) == 1

    def test_version(self, capsys):
        assert run(["--version"]) == 0
        out = capsys.readouterr().out
        assert "discre" in out and "checkpoint format" in out

    def test_config_file_supplies_defaults(self, pipeline_dir):
        tmp, _ = pipeline_dir
        config = tmp / "run.ini"
        config.write_text(
            f"[segment]\nin = {tmp/'corpus.jsonl'}\nout = {tmp/'seg.jsonl'}\n"
        )
        assert run(["segment", "--config", config]) == 0
        assert (tmp / "seg.jsonl").exists()

    def test_flags_override_config(self, pipeline_dir):
        tmp, _ = pipeline_dir
        config = tmp / "run.ini"
        config.write_text(
            f"[segment]\nin = {tmp/'corpus.jsonl'}\nout = {tmp/'ignored.jsonl'}\n"
        )
        assert run(["segment", "--config", config, "--out", tmp / "used.jsonl"]) == 0
        assert (tmp / "used.jsonl").exists()
        assert not (tmp / "ignored.jsonl").exists()

    def test_missing_config_file_is_data_error(self, tmp_path):
        code = run(["segment", "--config", tmp_path / "none.ini",
                    "--in", "x", "--out", "y"])
        assert code == 2


class TestFullPipeline:
    def _run_pipeline(self, tmp, suffix="", epochs=2, seed=7):
        assert run(["segment", "--in", tmp / "corpus.jsonl",
                    "--out", tmp / f"seg{suffix}.jsonl",
                    "--posteriors", tmp / "posteriors.tsv"]) == 0
        assert run(["gen-instances", "--segments", tmp / f"seg{suffix}.jsonl",
                    "--posteriors", tmp / "posteriors.tsv",
                    "--out", tmp / f"train{suffix}.jsonl",
                    "--dev", tmp / f"dev{suffix}.jsonl"]) == 0
        assert run(["train", "--train", tmp / f"train{suffix}.jsonl",
                    "--dev", tmp / f"dev{suffix}.jsonl",
                    "--vectors", tmp / "vectors.txt",
                    "--out", tmp / f"model{suffix}.ckpt",
                    "--epochs", epochs, "--hidden", 6, "--seed", seed]) == 0
        assert run(["embed", "--model", tmp / f"model{suffix}.ckpt",
                    "--segments", tmp / f"seg{suffix}.jsonl",
                    "--out", tmp / f"emb{suffix}.jsonl"]) == 0

    def test_end_to_end(self, pipeline_dir):
        tmp, labels = pipeline_dir
        self._run_pipeline(tmp)
        emb_lines = (tmp / "emb.jsonl").read_text().strip().splitlines()
        assert emb_lines
        record = json.loads(emb_lines[0])
        assert len(record["vector"]) == 4 * 6 + 3 + 3 + 4

        # probe over labeled pairs derived from the segments
        pairs = []
        for line in (tmp / "seg.jsonl").read_text().strip().splitlines():
            seg = json.loads(line)
            for pair in seg["pairs"]:
                if pair["connective"] is None:
                    continue
                pairs.append({
                    "id": seg["id"],
                    "arg1": seg["arguments"][pair["arg1"]],
                    "arg2": seg["arguments"][pair["arg2"]],
                    "connective": pair["connective"],
                    "label": labels[seg["id"]],
                })
        write_jsonl(tmp / "labeled.jsonl", pairs)
        assert run(["probe", "--features", "pair", "--model", tmp / "model.ckpt",
                    "--data", tmp / "labeled.jsonl", "--cv", 3,
                    "--report", tmp / "report.json"]) == 0
        report = json.loads((tmp / "report.json").read_text())
        assert set(report) == {"per_class", "micro_f1", "macro_f1"}

        assert run(["attn-stats", "--model", tmp / "model.ckpt",
                    "--segments", tmp / "seg.jsonl",
                    "--out", tmp / "stats.tsv"]) == 0
        stats = (tmp / "stats.tsv").read_text()
        assert stats.startswith("word\tgroup\tcount\tmean_attention")

        assert run(["project", "--embeddings", tmp / "emb.jsonl",
                    "--out", tmp / "coords.csv"]) == 0
        header = (tmp / "coords.csv").read_text().splitlines()[0]
        assert header.endswith("x,y")

    def test_deterministic_repeat(self, pipeline_dir):
        tmp, _ = pipeline_dir
        self._run_pipeline(tmp, suffix="_a")
        self._run_pipeline(tmp, suffix="_b")
        assert (tmp / "emb_a.jsonl").read_bytes() == (tmp / "emb_b.jsonl").read_bytes()

    def test_inputs_not_mutated(self, pipeline_dir):
        tmp, _ = pipeline_dir
        before = (tmp / "corpus.jsonl").read_bytes()
        self._run_pipeline(tmp)
        assert (tmp / "corpus.jsonl").read_bytes() == before

    def test_probe_message_features(self, pipeline_dir):
        tmp, labels = pipeline_dir
        self._run_pipeline(tmp)
        records, _ = template_corpus(12, seed=4)
        labeled = [
            {"id": r["id"], "text": r["text"], "label": labels[r["id"]]}
            for r in records
        ]
        write_jsonl(tmp / "messages.jsonl", labeled)
        assert run(["probe", "--features", "message", "--model", tmp / "model.ckpt",
                    "--data", tmp / "messages.jsonl", "--cv", 3,
                    "--report", tmp / "mreport.json"]) == 0

    def test_probe_train_test_split(self, pipeline_dir):
        tmp, labels = pipeline_dir
        self._run_pipeline(tmp)
        records, _ = template_corpus(12, seed=4)
        items = [
            {"arg1": r["text"].split()[:3], "arg2": r["text"].split()[3:],
             "label": labels[r["id"]]}
            for r in records
        ]
        write_jsonl(tmp / "train_split.jsonl", items[:8])
        write_jsonl(tmp / "test_split.jsonl", items[8:])
        assert run(["probe", "--features", "pair", "--model", tmp / "model.ckpt",
                    "--train-split", tmp / "train_split.jsonl",
                    "--test-split", tmp / "test_split.jsonl",
                    "--report", tmp / "sreport.json"]) == 0

    def test_probe_conflicting_modes_usage_error(self, pipeline_dir):
        tmp, _ = pipeline_dir
        self._run_pipeline(tmp)
        code = run(["probe", "--features", "pair", "--model", tmp / "model.ckpt",
                    "--data", tmp / "x.jsonl", "--cv", 3,
                    "--train-split", "a", "--test-split", "b",
                    "--report", tmp / "r.json"])
        assert code == 1

    def test_probe_section_split(self, pipeline_dir):
        tmp, labels = pipeline_dir
        self._run_pipeline(tmp)
        records, _ = template_corpus(12, seed=4)
        items = []
        for i, r in enumerate(records):
            words = r["text"].split()
            items.append({
                "arg1": words[:3], "arg2": words[3:],
                "label": labels[r["id"]],
                "section": 2 + (i % 3) if i < 9 else 23,
            })
        write_jsonl(tmp / "sections.jsonl", items)
        assert run(["probe", "--features", "pair", "--model", tmp / "model.ckpt",
                    "--data", tmp / "sections.jsonl", "--section-split",
                    "--report", tmp / "secreport.json"]) == 0
        report = json.loads((tmp / "secreport.json").read_text())
        assert 0.0 <= report["macro_f1"] <= 1.0

    def test_train_sigmoid_bce_mode(self, pipeline_dir):
        tmp, _ = pipeline_dir
        assert run(["segment", "--in", tmp / "corpus.jsonl", "--out", tmp / "s.jsonl",
                    "--posteriors", tmp / "posteriors.tsv"]) == 0
        assert run(["gen-instances", "--segments", tmp / "s.jsonl",
                    "--posteriors", tmp / "posteriors.tsv",
                    "--out", tmp / "t.jsonl", "--dev", tmp / "d.jsonl"]) == 0
        assert run(["train", "--train", tmp / "t.jsonl", "--dev", tmp / "d.jsonl",
                    "--vectors", tmp / "vectors.txt", "--out", tmp / "m.ckpt",
                    "--epochs", 2, "--hidden", 5, "--loss", "sigmoid-bce"]) == 0
        from discre.model import load_checkpoint

        assert load_checkpoint(tmp / "m.ckpt").config.loss_mode == "sigmoid-bce"
