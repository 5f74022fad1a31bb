import numpy as np
import pytest

from discre.corpus_io import WordVectorTable
from discre.errors import CheckpointError, TrainingDivergedError
from discre.instancegen import TargetDistribution, TrainingInstance
from discre.model import (
    Checkpoint,
    LevelOutputs,
    ModelConfig,
    encode_argument,
    extract_discre,
    forward,
    gradients,
    init_params,
    load_checkpoint,
    loss,
    mean_loss,
    param_shapes,
    save_checkpoint,
    train,
)

LEVEL_NAMES = ("class", "type", "subtype")


def tiny_word_vectors(dim=8, seed=0):
    rng = np.random.default_rng(seed)
    vocab = ["a", "b", "c", "d", "e", "f", "g"]
    vectors = {t: rng.normal(size=dim) for t in vocab}
    unk = np.mean(np.stack(list(vectors.values())), axis=0)
    return WordVectorTable(dim=dim, vectors=vectors, unk_vector=unk)


def tiny_config(**overrides):
    defaults = dict(n_class=4, n_type=6, n_subtype=8, d_word=8, d_hidden=8)
    defaults.update(overrides)
    return ModelConfig(**defaults)


def random_targets(rng, sizes):
    weights = {}
    for level, n in zip(LEVEL_NAMES, sizes):
        v = rng.random(n)
        v[rng.random(n) < 0.4] = 0.0
        if v.sum() == 0:
            v[0] = 1.0
        weights[level] = v / v.sum()
    return TargetDistribution(weights=weights)


def random_instance(rng, sizes, n_args=3):
    vocab = ["a", "b", "c", "d", "e", "f", "g"]
    context = [
        [vocab[int(rng.integers(len(vocab)))] for _ in range(int(rng.integers(1, 5)))]
        for _ in range(n_args)
    ]
    idxs = rng.choice(n_args, size=2, replace=False)
    return TrainingInstance(
        message_id="m",
        context=context,
        arg1_idx=int(idxs[0]),
        arg2_idx=int(idxs[1]),
        targets=random_targets(rng, sizes),
        kind="explicit",
        connective="x",
    )


@pytest.fixture
def setup():
    cfg = tiny_config()
    rng = np.random.default_rng(7)
    params = init_params(cfg, rng)
    wv = tiny_word_vectors(cfg.d_word)
    return cfg, params, wv, rng


class TestEncodeArgument:
    def test_single_token_attention_is_one(self, setup):
        _, params, wv, _ = setup
        _, alpha = encode_argument(["a"], wv, params)
        assert alpha.shape == (1,)
        assert alpha[0] == pytest.approx(1.0)

    def test_attention_sums_to_one(self, setup):
        _, params, wv, rng = setup
        for _ in range(10):
            tokens = ["a", "b", "c"][: int(rng.integers(1, 4))]
            _, alpha = encode_argument(tokens, wv, params)
            assert abs(alpha.sum() - 1.0) <= 1e-6

    def test_zeroed_attention_params_give_uniform(self, setup):
        _, params, wv, _ = setup
        params = {k: v.copy() for k, v in params.items()}
        params["attn_w"][:] = 0.0
        params["attn_b"][:] = 0.0
        params["attn_ctx"][:] = 0.0
        _, alpha = encode_argument(["a", "b", "c", "d"], wv, params)
        assert np.allclose(alpha, 0.25)

    def test_empty_argument_rejected(self, setup):
        _, params, wv, _ = setup
        with pytest.raises(ValueError):
            encode_argument([], wv, params)

    def test_output_dim(self, setup):
        cfg, params, wv, _ = setup
        vec, _ = encode_argument(["a", "b"], wv, params)
        assert vec.shape == (2 * cfg.d_hidden,)


class TestForward:
    def test_simplex_outputs(self, setup):
        cfg, params, wv, rng = setup
        for _ in range(10):
            inst = random_instance(rng, cfg.level_sizes)
            out = forward(inst, wv, params)
            for p in (out.p_class, out.p_type, out.p_subtype):
                assert np.all(p >= 0)
                assert abs(p.sum() - 1.0) <= 1e-6

    def test_output_sizes_match_config(self, setup):
        cfg, params, wv, rng = setup
        out = forward(random_instance(rng, cfg.level_sizes), wv, params)
        assert out.p_class.shape == (cfg.n_class,)
        assert out.p_type.shape == (cfg.n_type,)
        assert out.p_subtype.shape == (cfg.n_subtype,)

    def test_context_sensitivity(self, setup):
        # permuting arguments other than Arg1/Arg2 changes the outputs
        cfg, params, wv, _ = setup
        base = TrainingInstance(
            "m", [["a", "b"], ["c"], ["d", "e"], ["f", "g"]], 0, 1,
            random_targets(np.random.default_rng(0), cfg.level_sizes),
            "explicit", "x",
        )
        swapped = TrainingInstance(
            "m", [["a", "b"], ["c"], ["f", "g"], ["d", "e"]], 0, 1,
            base.targets, "explicit", "x",
        )
        out1 = forward(base, wv, params)
        out2 = forward(swapped, wv, params)
        assert not np.allclose(out1.p_class, out2.p_class)

    def test_bad_indices_rejected(self, setup):
        cfg, params, wv, rng = setup
        inst = random_instance(rng, cfg.level_sizes)
        inst.arg2_idx = 99
        with pytest.raises(IndexError):
            forward(inst, wv, params)


class TestLoss:
    def _outputs(self, p_class, p_type, p_subtype):
        return LevelOutputs(
            p_class=np.asarray(p_class, dtype=float),
            p_type=np.asarray(p_type, dtype=float),
            p_subtype=np.asarray(p_subtype, dtype=float),
            attention=[],
            class_logits=np.log(np.maximum(np.asarray(p_class, dtype=float), 1e-300)),
            type_logits=np.log(np.maximum(np.asarray(p_type, dtype=float), 1e-300)),
            subtype_logits=np.log(np.maximum(np.asarray(p_subtype, dtype=float), 1e-300)),
            arg1_state=np.zeros(1),
            arg2_state=np.zeros(1),
        )

    def test_one_hot_near_one_output(self):
        outputs = self._outputs([1.0 - 1e-9, 1e-9], [1.0], [1.0])
        targets = TargetDistribution(
            weights={
                "class": np.array([1.0, 0.0]),
                "type": np.array([1.0]),
                "subtype": np.array([1.0]),
            }
        )
        assert loss(outputs, targets) == pytest.approx(0.0, abs=1e-6)

    def test_uniform_level_contributes_log_n(self):
        n = 5
        outputs = self._outputs(np.full(n, 1 / n), [1.0], [1.0])
        targets = TargetDistribution(
            weights={
                "class": np.full(n, 1 / n),
                "type": np.array([1.0]),
                "subtype": np.array([1.0]),
            }
        )
        assert loss(outputs, targets) == pytest.approx(np.log(n))

    def test_lower_bound_is_target_entropy(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            sizes = (3, 4, 5)
            targets = random_targets(rng, sizes)
            # random simplex outputs
            raw = {lv: rng.random(n) + 1e-3 for lv, n in zip(LEVEL_NAMES, sizes)}
            outputs = self._outputs(
                raw["class"] / raw["class"].sum(),
                raw["type"] / raw["type"].sum(),
                raw["subtype"] / raw["subtype"].sum(),
            )
            assert loss(outputs, targets) >= targets.entropy() - 1e-9
        # equality when outputs equal the targets
        targets = random_targets(rng, (3, 4, 5))
        outputs = self._outputs(
            targets.weights["class"], targets.weights["type"], targets.weights["subtype"]
        )
        assert loss(outputs, targets) == pytest.approx(targets.entropy(), abs=1e-9)

    def test_zero_output_clamped(self):
        outputs = self._outputs([1.0, 0.0], [1.0], [1.0])
        targets = TargetDistribution(
            weights={
                "class": np.array([0.5, 0.5]),
                "type": np.array([1.0]),
                "subtype": np.array([1.0]),
            }
        )
        value = loss(outputs, targets)
        assert np.isfinite(value)


class TestGradients:
    @pytest.mark.parametrize("mode", ["softmax-ce", "sigmoid-bce"])
    def test_finite_difference_oracle(self, setup, mode):
        cfg, params, wv, rng = setup
        inst = random_instance(rng, cfg.level_sizes)
        grads = gradients(inst, wv, params, mode)

        def evaluate():
            return loss(forward(inst, wv, params), inst.targets, mode)

        step = 1e-4
        names = list(params)
        worst = 0.0
        for _ in range(60):
            name = names[int(rng.integers(len(names)))]
            index = tuple(int(rng.integers(s)) for s in params[name].shape)
            original = params[name][index]
            params[name][index] = original + step
            upper = evaluate()
            params[name][index] = original - step
            lower = evaluate()
            params[name][index] = original
            numeric = (upper - lower) / (2 * step)
            analytic = grads[name][index]
            rel = abs(analytic - numeric) / max(abs(analytic), abs(numeric), 1e-6)
            worst = max(worst, rel)
        assert worst < 1e-4

    def test_zero_weight_level_gets_zero_gradient(self, setup):
        cfg, params, wv, rng = setup
        inst = random_instance(rng, cfg.level_sizes)
        inst.targets.weights["subtype"] = np.zeros(cfg.n_subtype)
        grads = gradients(inst, wv, params)
        assert np.allclose(grads["subtype_w"], 0.0)
        assert np.allclose(grads["subtype_b"], 0.0)

    def test_descent_direction(self, setup):
        cfg, params, wv, rng = setup
        inst = random_instance(rng, cfg.level_sizes)
        grads = gradients(inst, wv, params)
        before = loss(forward(inst, wv, params), inst.targets)
        eta = 1e-3
        stepped = {k: v - eta * grads[k] for k, v in params.items()}
        after = loss(forward(inst, wv, stepped), inst.targets)
        assert after < before


class TestTrain:
    def _training_set(self, cfg, rng, n_messages=4):
        instances = []
        for m in range(n_messages):
            targets = random_targets(rng, cfg.level_sizes)
            inst = random_instance(rng, cfg.level_sizes)
            inst.message_id = f"m{m}"
            inst.targets = targets
            instances.append(inst)
        return instances

    def test_loss_decreases(self, setup):
        cfg, _, wv, rng = setup
        cfg = tiny_config(epochs=30, dropout_rate=0.0, learning_rate=3e-3)
        train_set = self._training_set(cfg, rng)
        ckpt = train(train_set, [], cfg, wv, _labels_for(cfg))
        losses = [h["train_loss"] for h in ckpt.history if "train_loss" in h]
        assert losses[-1] < losses[0]

    def test_no_dev_falls_back_to_last_epoch(self, setup):
        cfg, _, wv, rng = setup
        cfg = tiny_config(epochs=3, dropout_rate=0.0)
        ckpt = train(self._training_set(cfg, rng), [], cfg, wv, _labels_for(cfg))
        assert ckpt.history[-1] == {"best_epoch": 3}

    def test_same_seed_identical_checkpoint_bytes(self, setup, tmp_path):
        cfg, _, wv, rng = setup
        cfg = tiny_config(epochs=3, seed=11)
        train_set = self._training_set(cfg, np.random.default_rng(0))
        a = train(train_set, train_set[:1], cfg, wv, _labels_for(cfg))
        b = train(train_set, train_set[:1], cfg, wv, _labels_for(cfg))
        pa, pb = tmp_path / "a.ckpt", tmp_path / "b.ckpt"
        save_checkpoint(a, pa)
        save_checkpoint(b, pb)
        assert pa.read_bytes() == pb.read_bytes()

    def test_empty_training_set_rejected(self, setup):
        cfg, _, wv, _ = setup
        with pytest.raises(ValueError):
            train([], [], cfg, wv, _labels_for(cfg))

    def test_divergence_detected(self, setup):
        cfg, _, wv, rng = setup
        cfg = tiny_config(epochs=2, dropout_rate=0.0)
        train_set = self._training_set(cfg, rng)

        import discre.model as model_module

        original = model_module.init_params

        def poisoned(config, rng_):
            params = original(config, rng_)
            params["class_w"][:] = np.nan
            return params

        model_module.init_params = poisoned
        try:
            with pytest.raises(TrainingDivergedError, match="epoch 1"):
                train(train_set, [], cfg, wv, _labels_for(cfg))
        finally:
            model_module.init_params = original


def _labels_for(cfg):
    return {
        "class": [f"C{i}" for i in range(cfg.n_class)],
        "type": [f"T{i}" for i in range(cfg.n_type)],
        "subtype": [f"S{i}" for i in range(cfg.n_subtype)],
    }


class TestExtractDiscre:
    def test_default_dimension_arithmetic(self):
        # 2 * (2 * 200) states + 4 + 16 + 23 head outputs
        cfg = ModelConfig(n_class=4, n_type=16, n_subtype=23, d_word=8, d_hidden=200)
        assert cfg.discre_dim == 843
        rng = np.random.default_rng(1)
        params = init_params(cfg, rng)
        wv = tiny_word_vectors(cfg.d_word)
        vec = extract_discre([["a", "b"], ["c"]], 0, 1, wv, params)
        assert vec.shape == (843,)

    def test_deterministic(self, setup):
        _, params, wv, _ = setup
        context = [["a", "b"], ["c", "d"]]
        v1 = extract_discre(context, 0, 1, wv, params)
        v2 = extract_discre(context, 0, 1, wv, params)
        assert np.array_equal(v1, v2)

    def test_tail_matches_forward_probabilities(self, setup):
        cfg, params, wv, rng = setup
        inst = random_instance(rng, cfg.level_sizes)
        out = forward(inst, wv, params)
        vec = extract_discre(inst.context, inst.arg1_idx, inst.arg2_idx, wv, params)
        tail = vec[4 * cfg.d_hidden :]
        expected = np.concatenate([out.p_class, out.p_type, out.p_subtype])
        assert np.array_equal(tail, expected)

    def test_invalid_pair_indices(self, setup):
        _, params, wv, _ = setup
        with pytest.raises(IndexError):
            extract_discre([["a"]], 0, 5, wv, params)


class TestCheckpoint:
    def _checkpoint(self, cfg, rng, wv):
        params = init_params(cfg, rng)
        return Checkpoint(
            config=cfg,
            params=params,
            labels=_labels_for(cfg),
            connectives=["because", "but"],
            word_vectors=wv,
            history=[{"epoch": 1, "train_loss": 1.0, "dev_loss": None}],
        )

    def test_round_trip_bit_exact(self, setup, tmp_path):
        cfg, _, wv, rng = setup
        ckpt = self._checkpoint(cfg, rng, wv)
        path = tmp_path / "model.ckpt"
        save_checkpoint(ckpt, path)
        restored = load_checkpoint(path)
        for name, tensor in ckpt.params.items():
            assert np.array_equal(restored.params[name], tensor)
        context = [["a", "b"], ["c"]]
        before = extract_discre(context, 0, 1, wv, ckpt.params)
        after = extract_discre(
            context, 0, 1, restored.word_vectors, restored.params
        )
        assert np.array_equal(before, after)

    def test_label_order_preserved(self, setup, tmp_path):
        cfg, _, wv, rng = setup
        ckpt = self._checkpoint(cfg, rng, wv)
        ckpt.labels["class"] = list(reversed(ckpt.labels["class"]))
        path = tmp_path / "model.ckpt"
        save_checkpoint(ckpt, path)
        assert load_checkpoint(path).labels["class"] == ckpt.labels["class"]

    def test_truncated_file_rejected(self, setup, tmp_path):
        cfg, _, wv, rng = setup
        path = tmp_path / "model.ckpt"
        save_checkpoint(self._checkpoint(cfg, rng, wv), path)
        data = path.read_bytes()
        path.write_bytes(data[: len(data) - 64])
        with pytest.raises(CheckpointError, match="truncated"):
            load_checkpoint(path)

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "model.ckpt"
        path.write_bytes(b"garbage garbage garbage")
        with pytest.raises(CheckpointError):
            load_checkpoint(path)

    def test_version_mismatch_rejected(self, setup, tmp_path):
        import struct

        cfg, _, wv, rng = setup
        path = tmp_path / "model.ckpt"
        save_checkpoint(self._checkpoint(cfg, rng, wv), path)
        data = bytearray(path.read_bytes())
        data[8:12] = struct.pack("<I", 99)
        path.write_bytes(bytes(data))
        with pytest.raises(CheckpointError, match="version"):
            load_checkpoint(path)


class TestParamShapes:
    def test_forget_gate_bias_init(self):
        cfg = tiny_config()
        params = init_params(cfg, np.random.default_rng(0))
        h = cfg.d_hidden
        for name in ("word_fw_b", "word_bw_b", "arg_fw_b", "arg_bw_b"):
            assert np.all(params[name][h : 2 * h] == 1.0)

    def test_all_shapes_consistent(self):
        cfg = tiny_config()
        params = init_params(cfg, np.random.default_rng(0))
        for name, shape in param_shapes(cfg).items():
            assert params[name].shape == shape

    def test_bad_config_rejected(self):
        with pytest.raises(ValueError):
            ModelConfig(n_class=0, n_type=1, n_subtype=1)
        with pytest.raises(ValueError):
            ModelConfig(n_class=1, n_type=1, n_subtype=1, dropout_rate=1.5)
        with pytest.raises(ValueError):
            ModelConfig(n_class=1, n_type=1, n_subtype=1, loss_mode="mse")


class TestMeanLoss:
    def test_matches_manual_average(self, setup):
        cfg, params, wv, rng = setup
        instances = [random_instance(rng, cfg.level_sizes) for _ in range(4)]
        manual = np.mean(
            [loss(forward(i, wv, params), i.targets) for i in instances]
        )
        assert mean_loss(instances, wv, params) == pytest.approx(manual)
