"""Two-level bidirectional recurrent encoder with word attention, three
relation heads, the soft-target objective, training loop, and embedding
extraction.

Word states feed a ReLU-scored attention that pools each argument into one
vector; an argument-level recurrence contextualizes the arguments across the
whole message.  The class and type heads read the concatenated Arg1/Arg2
states, the subtype head reads Arg2 alone.  All gradients are analytic
(layerwise backprop); the sequential recurrences run on the kernel backend.
"""

from __future__ import annotations

import io
import json
import struct
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .corpus_io import LEVELS, WordVectorTable
from .errors import CheckpointError, TrainingDivergedError
from .instancegen import TargetDistribution, TrainingInstance

SOFTMAX_CE = "softmax-ce"
SIGMOID_BCE = "sigmoid-bce"
LOSS_MODES = (SOFTMAX_CE, SIGMOID_BCE)

LOG_EPS = 1e-12
INIT_SCALE = 0.08

CHECKPOINT_VERSION = 1
_MAGIC = b"DISCRE\x00\x01"


@dataclass
class ModelConfig:
    n_class: int
    n_type: int
    n_subtype: int
    d_word: int = 200
    d_hidden: int = 200
    dropout_rate: float = 0.3
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    epochs: int = 50
    seed: int = 7
    loss_mode: str = SOFTMAX_CE

    def __post_init__(self):
        for name in ("n_class", "n_type", "n_subtype", "d_word", "d_hidden"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError("dropout_rate must be in [0, 1)")
        if self.loss_mode not in LOSS_MODES:
            raise ValueError(f"loss_mode must be one of {LOSS_MODES}")

    @property
    def level_sizes(self) -> tuple[int, int, int]:
        return (self.n_class, self.n_type, self.n_subtype)

    @property
    def discre_dim(self) -> int:
        return 4 * self.d_hidden + self.n_class + self.n_type + self.n_subtype


@dataclass
class LevelOutputs:
    p_class: np.ndarray
    p_type: np.ndarray
    p_subtype: np.ndarray
    attention: list[np.ndarray]
    class_logits: np.ndarray
    type_logits: np.ndarray
    subtype_logits: np.ndarray
    arg1_state: np.ndarray
    arg2_state: np.ndarray

    def probabilities(self) -> dict[str, np.ndarray]:
        return {"class": self.p_class, "type": self.p_type, "subtype": self.p_subtype}

    def logits(self) -> dict[str, np.ndarray]:
        return {
            "class": self.class_logits,
            "type": self.type_logits,
            "subtype": self.subtype_logits,
        }


def param_shapes(config: ModelConfig) -> dict[str, tuple[int, ...]]:
    """Names and shapes of every trainable tensor, in a fixed order."""
    h = config.d_hidden
    shapes: dict[str, tuple[int, ...]] = {}
    for prefix, d_in in (("word_fw", config.d_word), ("word_bw", config.d_word),
                         ("arg_fw", 2 * h), ("arg_bw", 2 * h)):
        shapes[f"{prefix}_wx"] = (4 * h, d_in)
        shapes[f"{prefix}_wh"] = (4 * h, h)
        shapes[f"{prefix}_b"] = (4 * h,)
    shapes["attn_w"] = (2 * h, 2 * h)
    shapes["attn_b"] = (2 * h,)
    shapes["attn_ctx"] = (2 * h,)
    shapes["class_w"] = (config.n_class, 4 * h)
    shapes["class_b"] = (config.n_class,)
    shapes["type_w"] = (config.n_type, 4 * h)
    shapes["type_b"] = (config.n_type,)
    shapes["subtype_w"] = (config.n_subtype, 2 * h)
    shapes["subtype_b"] = (config.n_subtype,)
    return shapes


def init_params(config: ModelConfig, rng: np.random.Generator) -> dict[str, np.ndarray]:
    """Uniform init in [-0.08, 0.08]; forget-gate biases start at 1."""
    h = config.d_hidden
    recurrent_biases = {"word_fw_b", "word_bw_b", "arg_fw_b", "arg_bw_b"}
    params: dict[str, np.ndarray] = {}
    for name, shape in param_shapes(config).items():
        params[name] = rng.uniform(-INIT_SCALE, INIT_SCALE, size=shape)
        if name in recurrent_biases:
            params[name][h : 2 * h] = 1.0
    return params


def _softmax(z: np.ndarray) -> np.ndarray:
    e = np.exp(z - z.max())
    return e / e.sum()


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-z))


def _contig(a: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(a, dtype=np.float64)


def _bilstm_forward(x, wx_f, wh_f, b_f, wx_b, wh_b, b_b):
    """Bidirectional LSTM over x (T, d_in) -> states (T, 2H) plus cache."""
    z_f = _contig(x @ wx_f.T + b_f)
    h_f, c_f, g_f = kernels.lstm_forward(z_f, _contig(wh_f))
    x_rev = _contig(x[::-1])
    z_b = _contig(x_rev @ wx_b.T + b_b)
    h_br, c_br, g_br = kernels.lstm_forward(z_b, _contig(wh_b))
    states = np.concatenate([h_f, h_br[::-1]], axis=1)
    cache = (x, x_rev, h_f, c_f, g_f, h_br, c_br, g_br)
    return states, cache


def _bilstm_backward(d_states, cache, wx_f, wh_f, wx_b, wh_b):
    """Gradients of a bidirectional LSTM.  Returns (dx, grads dict keyed by
    wx_f/wh_f/b_f/wx_b/wh_b/b_b)."""
    x, x_rev, h_f, c_f, g_f, h_br, c_br, g_br = cache
    hdim = h_f.shape[1]
    dh_f = _contig(d_states[:, :hdim])
    dh_b_rev = _contig(d_states[:, hdim:][::-1])
    dz_f = kernels.lstm_backward(dh_f, _contig(wh_f), h_f, c_f, g_f)
    dz_b = kernels.lstm_backward(dh_b_rev, _contig(wh_b), h_br, c_br, g_br)
    grads = {
        "wx_f": dz_f.T @ x,
        "wh_f": dz_f[1:].T @ h_f[:-1],
        "b_f": dz_f.sum(axis=0),
        "wx_b": dz_b.T @ x_rev,
        "wh_b": dz_b[1:].T @ h_br[:-1],
        "b_b": dz_b.sum(axis=0),
    }
    dx = dz_f @ wx_f + (dz_b @ wx_b)[::-1]
    return dx, grads


def _attention_forward(word_states, params):
    pre = word_states @ params["attn_w"].T + params["attn_b"]
    u = np.maximum(pre, 0.0)
    scores = u @ params["attn_ctx"]
    alpha = _softmax(scores)
    vec = alpha @ word_states
    return vec, alpha, (word_states, pre, u, alpha)


def _attention_backward(dvec, cache, params):
    word_states, pre, u, alpha = cache
    dalpha = word_states @ dvec
    d_word_states = np.outer(alpha, dvec)
    dscores = alpha * (dalpha - float(alpha @ dalpha))
    dctx = u.T @ dscores
    du = np.outer(dscores, params["attn_ctx"])
    dpre = du * (pre > 0)
    grads = {
        "attn_w": dpre.T @ word_states,
        "attn_b": dpre.sum(axis=0),
        "attn_ctx": dctx,
    }
    d_word_states += dpre @ params["attn_w"]
    return d_word_states, grads


def _lookup_matrix(tokens: Sequence[str], word_vectors: WordVectorTable) -> np.ndarray:
    return np.stack([word_vectors.lookup(tok) for tok in tokens]).astype(np.float64)


def encode_argument(
    tokens: Sequence[str],
    word_vectors: WordVectorTable,
    params: dict[str, np.ndarray],
    train_mode: bool = False,
    rng: np.random.Generator | None = None,
    dropout_rate: float = 0.3,
) -> tuple[np.ndarray, np.ndarray]:
    """Encode one argument into a pooled vector; returns (vector, attention)."""
    vec, alpha, _ = _encode_argument_cached(
        tokens, word_vectors, params, train_mode, rng, dropout_rate
    )
    return vec, alpha


def _encode_argument_cached(tokens, word_vectors, params, train_mode, rng, dropout_rate):
    if len(tokens) == 0:
        raise ValueError("cannot encode an empty argument")
    x = _lookup_matrix(tokens, word_vectors)
    word_states, lstm_cache = _bilstm_forward(
        x,
        params["word_fw_wx"], params["word_fw_wh"], params["word_fw_b"],
        params["word_bw_wx"], params["word_bw_wh"], params["word_bw_b"],
    )
    pooled, alpha, attn_cache = _attention_forward(word_states, params)
    if train_mode and dropout_rate > 0.0:
        if rng is None:
            raise ValueError("train_mode dropout needs an rng")
        mask = (rng.random(pooled.shape[0]) >= dropout_rate) / (1.0 - dropout_rate)
    else:
        mask = None
    vec = pooled * mask if mask is not None else pooled
    return vec, alpha, (lstm_cache, attn_cache, mask)


def _run(instance, word_vectors, params, train_mode=False, rng=None, dropout_rate=0.3):
    """Full forward pass; returns (LevelOutputs, cache for backprop)."""
    context = instance.context
    if not context:
        raise ValueError("instance has no context arguments")
    n_args = len(context)
    if not (0 <= instance.arg1_idx < n_args and 0 <= instance.arg2_idx < n_args):
        raise IndexError(
            f"argument indices ({instance.arg1_idx}, {instance.arg2_idx}) out of "
            f"range for {n_args} arguments"
        )
    arg_vecs = []
    attention = []
    arg_caches = []
    for tokens in context:
        vec, alpha, cache = _encode_argument_cached(
            tokens, word_vectors, params, train_mode, rng, dropout_rate
        )
        arg_vecs.append(vec)
        attention.append(alpha)
        arg_caches.append(cache)
    a = np.stack(arg_vecs)
    arg_states, arg_lstm_cache = _bilstm_forward(
        a,
        params["arg_fw_wx"], params["arg_fw_wh"], params["arg_fw_b"],
        params["arg_bw_wx"], params["arg_bw_wh"], params["arg_bw_b"],
    )
    h1 = arg_states[instance.arg1_idx]
    h2 = arg_states[instance.arg2_idx]
    pair_state = np.concatenate([h1, h2])
    z_class = params["class_w"] @ pair_state + params["class_b"]
    z_type = params["type_w"] @ pair_state + params["type_b"]
    z_sub = params["subtype_w"] @ h2 + params["subtype_b"]
    outputs = LevelOutputs(
        p_class=_softmax(z_class),
        p_type=_softmax(z_type),
        p_subtype=_softmax(z_sub),
        attention=attention,
        class_logits=z_class,
        type_logits=z_type,
        subtype_logits=z_sub,
        arg1_state=h1,
        arg2_state=h2,
    )
    cache = (instance, arg_caches, arg_lstm_cache, pair_state, outputs)
    return outputs, cache


def forward(
    instance: TrainingInstance,
    word_vectors: WordVectorTable,
    params: dict[str, np.ndarray],
    train_mode: bool = False,
    rng: np.random.Generator | None = None,
    dropout_rate: float = 0.3,
) -> LevelOutputs:
    outputs, _ = _run(instance, word_vectors, params, train_mode, rng, dropout_rate)
    return outputs


def loss(outputs: LevelOutputs, targets: TargetDistribution, mode: str = SOFTMAX_CE) -> float:
    """Soft-target objective summed over the three hierarchy levels."""
    if mode not in LOSS_MODES:
        raise ValueError(f"unknown loss mode {mode!r}")
    total = 0.0
    probs = outputs.probabilities()
    logits = outputs.logits()
    for level in LEVELS:
        w = targets.weights[level]
        if mode == SOFTMAX_CE:
            f = probs[level]
            if len(w) != len(f):
                raise ValueError(f"target/output size mismatch at level {level}")
            total += float(-(w * np.log(np.maximum(f, LOG_EPS))).sum())
        else:
            f = _sigmoid(logits[level])
            if len(w) != len(f):
                raise ValueError(f"target/output size mismatch at level {level}")
            y = (w > 0).astype(float)
            total += float(
                -(w * np.log(np.maximum(f, LOG_EPS))
                  + (1.0 - y) * np.log(np.maximum(1.0 - f, LOG_EPS))).sum()
            )
    return total


def _head_logit_grads(outputs, targets, mode):
    """d(loss)/d(logits) per level, supporting both objectives."""
    grads = {}
    probs = outputs.probabilities()
    logits = outputs.logits()
    for level in LEVELS:
        w = targets.weights[level]
        if mode == SOFTMAX_CE:
            p = probs[level]
            grads[level] = p * float(w.sum()) - w
        else:
            f = _sigmoid(logits[level])
            y = (w > 0).astype(float)
            grads[level] = w * (f - 1.0) + (1.0 - y) * f
    return grads


def _backprop(cache, params, targets, mode=SOFTMAX_CE):
    instance, arg_caches, arg_lstm_cache, pair_state, outputs = cache
    hdim2 = outputs.arg1_state.shape[0]  # 2 * d_hidden
    dz = _head_logit_grads(outputs, targets, mode)
    grads = {name: np.zeros_like(tensor) for name, tensor in params.items()}
    grads["class_w"] += np.outer(dz["class"], pair_state)
    grads["class_b"] += dz["class"]
    grads["type_w"] += np.outer(dz["type"], pair_state)
    grads["type_b"] += dz["type"]
    grads["subtype_w"] += np.outer(dz["subtype"], outputs.arg2_state)
    grads["subtype_b"] += dz["subtype"]

    d_pair = params["class_w"].T @ dz["class"] + params["type_w"].T @ dz["type"]
    dh1 = d_pair[:hdim2]
    dh2 = d_pair[hdim2:] + params["subtype_w"].T @ dz["subtype"]

    n_args = len(arg_caches)
    d_arg_states = np.zeros((n_args, hdim2))
    d_arg_states[instance.arg1_idx] += dh1
    d_arg_states[instance.arg2_idx] += dh2

    da, arg_grads = _bilstm_backward(
        d_arg_states, arg_lstm_cache,
        params["arg_fw_wx"], params["arg_fw_wh"],
        params["arg_bw_wx"], params["arg_bw_wh"],
    )
    for local, name in (("wx_f", "arg_fw_wx"), ("wh_f", "arg_fw_wh"), ("b_f", "arg_fw_b"),
                        ("wx_b", "arg_bw_wx"), ("wh_b", "arg_bw_wh"), ("b_b", "arg_bw_b")):
        grads[name] += arg_grads[local]

    for k, (lstm_cache, attn_cache, mask) in enumerate(arg_caches):
        dvec = da[k] * mask if mask is not None else da[k]
        d_word_states, attn_grads = _attention_backward(dvec, attn_cache, params)
        for name, g in attn_grads.items():
            grads[name] += g
        _, word_grads = _bilstm_backward(
            d_word_states, lstm_cache,
            params["word_fw_wx"], params["word_fw_wh"],
            params["word_bw_wx"], params["word_bw_wh"],
        )
        for local, name in (("wx_f", "word_fw_wx"), ("wh_f", "word_fw_wh"), ("b_f", "word_fw_b"),
                            ("wx_b", "word_bw_wx"), ("wh_b", "word_bw_wh"), ("b_b", "word_bw_b")):
            grads[name] += word_grads[local]
    return grads


def gradients(
    instance: TrainingInstance,
    word_vectors: WordVectorTable,
    params: dict[str, np.ndarray],
    mode: str = SOFTMAX_CE,
) -> dict[str, np.ndarray]:
    """Analytic gradients of the loss w.r.t. every parameter tensor, with
    dropout disabled."""
    _, cache = _run(instance, word_vectors, params, train_mode=False)
    return _backprop(cache, params, instance.targets, mode)


def extract_discre(
    context: Sequence[Sequence[str]],
    arg1_idx: int,
    arg2_idx: int,
    word_vectors: WordVectorTable,
    params: dict[str, np.ndarray],
) -> np.ndarray:
    """The relation embedding for one argument pair in its message context:
    [Arg1 state; Arg2 state; class probs; type probs; subtype probs]."""
    probe = TrainingInstance(
        message_id="", context=[list(a) for a in context],
        arg1_idx=arg1_idx, arg2_idx=arg2_idx,
        targets=TargetDistribution(weights={}), kind="explicit", connective="",
    )
    out = forward(probe, word_vectors, params, train_mode=False)
    return np.concatenate(
        [out.arg1_state, out.arg2_state, out.p_class, out.p_type, out.p_subtype]
    )


class _Adam:
    def __init__(self, params: dict[str, np.ndarray], config: ModelConfig):
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}
        self.t = 0
        self.lr = config.learning_rate
        self.b1 = config.beta1
        self.b2 = config.beta2
        self.eps = config.adam_eps

    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray]) -> None:
        self.t += 1
        correction1 = 1.0 - self.b1 ** self.t
        correction2 = 1.0 - self.b2 ** self.t
        for name, g in grads.items():
            m = self.m[name]
            v = self.v[name]
            m *= self.b1
            m += (1.0 - self.b1) * g
            v *= self.b2
            v += (1.0 - self.b2) * g * g
            params[name] -= self.lr * (m / correction1) / (np.sqrt(v / correction2) + self.eps)


def _group_by_message(instances: Sequence[TrainingInstance]):
    groups: list[tuple[str, list[TrainingInstance]]] = []
    for inst in instances:
        if groups and groups[-1][0] == inst.message_id:
            groups[-1][1].append(inst)
        else:
            groups.append((inst.message_id, [inst]))
    return groups


def mean_loss(
    instances: Sequence[TrainingInstance],
    word_vectors: WordVectorTable,
    params: dict[str, np.ndarray],
    mode: str = SOFTMAX_CE,
) -> float:
    """Evaluation-mode mean loss over a set of instances."""
    if not instances:
        return float("nan")
    total = 0.0
    for inst in instances:
        out = forward(inst, word_vectors, params, train_mode=False)
        total += loss(out, inst.targets, mode)
    return total / len(instances)


@dataclass
class Checkpoint:
    config: ModelConfig
    params: dict[str, np.ndarray]
    labels: dict[str, list[str]]
    connectives: list[str]
    word_vectors: WordVectorTable
    history: list[dict] = field(default_factory=list)


def train(
    train_set: Sequence[TrainingInstance],
    dev_set: Sequence[TrainingInstance],
    config: ModelConfig,
    word_vectors: WordVectorTable,
    labels: dict[str, list[str]],
    connectives: Iterable[str] = (),
) -> Checkpoint:
    """Train with one optimizer step per message (instance gradients summed),
    keeping the parameters of the epoch with the lowest dev loss."""
    if not train_set:
        raise ValueError("empty training set")
    rng = np.random.default_rng(config.seed)
    params = init_params(config, rng)
    optimizer = _Adam(params, config)
    groups = _group_by_message(train_set)
    history: list[dict] = []
    best_dev = float("inf")
    best_params: dict[str, np.ndarray] | None = None
    best_epoch = -1
    for epoch in range(1, config.epochs + 1):
        epoch_total = 0.0
        for step, (message_id, insts) in enumerate(groups, start=1):
            summed: dict[str, np.ndarray] | None = None
            for inst in insts:
                out, cache = _run(
                    inst, word_vectors, params,
                    train_mode=True, rng=rng, dropout_rate=config.dropout_rate,
                )
                inst_loss = loss(out, inst.targets, config.loss_mode)
                if not np.isfinite(inst_loss):
                    raise TrainingDivergedError(epoch, step, message_id)
                epoch_total += inst_loss
                g = _backprop(cache, params, inst.targets, config.loss_mode)
                if summed is None:
                    summed = g
                else:
                    for name in summed:
                        summed[name] += g[name]
            assert summed is not None
            optimizer.step(params, summed)
        train_loss = epoch_total / len(train_set)
        if not np.isfinite(train_loss):
            raise TrainingDivergedError(epoch, len(groups), groups[-1][0])
        dev_loss = mean_loss(dev_set, word_vectors, params, config.loss_mode) if dev_set else None
        history.append({"epoch": epoch, "train_loss": train_loss, "dev_loss": dev_loss})
        if dev_loss is not None and dev_loss < best_dev:
            best_dev = dev_loss
            best_params = {k: v.copy() for k, v in params.items()}
            best_epoch = epoch
    if best_params is None:  # no dev set: fall back to the last epoch
        best_params = params
        best_epoch = config.epochs
    history.append({"best_epoch": best_epoch})
    return Checkpoint(
        config=config,
        params=best_params,
        labels={lv: list(labels[lv]) for lv in LEVELS},
        connectives=list(connectives),
        word_vectors=word_vectors,
        history=history,
    )


def save_checkpoint(checkpoint: Checkpoint, path: str | Path) -> None:
    """Write the versioned container: a JSON header followed by named
    little-endian float64 tensors."""
    vocab = list(checkpoint.word_vectors.vectors)
    tensors: list[tuple[str, np.ndarray]] = [
        (name, checkpoint.params[name]) for name in sorted(checkpoint.params)
    ]
    if vocab:
        matrix = np.stack([checkpoint.word_vectors.vectors[t] for t in vocab])
    else:
        matrix = np.zeros((0, checkpoint.word_vectors.dim))
    tensors.append(("embeddings", matrix))
    tensors.append(("embeddings_unk", checkpoint.word_vectors.unk_vector))
    header = {
        "config": asdict(checkpoint.config),
        "labels": checkpoint.labels,
        "connectives": checkpoint.connectives,
        "vocab": vocab,
        "history": checkpoint.history,
        "tensors": [{"name": n, "shape": list(t.shape)} for n, t in tensors],
    }
    header_bytes = json.dumps(header).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<I", CHECKPOINT_VERSION))
        fh.write(struct.pack("<Q", len(header_bytes)))
        fh.write(header_bytes)
        for _, tensor in tensors:
            fh.write(np.ascontiguousarray(tensor, dtype="<f8").tobytes())


def load_checkpoint(path: str | Path) -> Checkpoint:
    with open(path, "rb") as fh:
        data = fh.read()
    buf = io.BytesIO(data)
    magic = buf.read(len(_MAGIC))
    if magic != _MAGIC:
        raise CheckpointError(f"{path}: not a checkpoint file")
    raw = buf.read(4)
    if len(raw) < 4:
        raise CheckpointError(f"{path}: truncated checkpoint")
    (version,) = struct.unpack("<I", raw)
    if version != CHECKPOINT_VERSION:
        raise CheckpointError(
            f"{path}: checkpoint version {version} unsupported "
            f"(expected {CHECKPOINT_VERSION})"
        )
    raw = buf.read(8)
    if len(raw) < 8:
        raise CheckpointError(f"{path}: truncated checkpoint")
    (header_len,) = struct.unpack("<Q", raw)
    header_bytes = buf.read(header_len)
    if len(header_bytes) < header_len:
        raise CheckpointError(f"{path}: truncated checkpoint header")
    try:
        header = json.loads(header_bytes.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"{path}: corrupt checkpoint header") from exc
    config = ModelConfig(**header["config"])
    loaded: dict[str, np.ndarray] = {}
    for entry in header["tensors"]:
        shape = tuple(int(s) for s in entry["shape"])
        count = int(np.prod(shape)) if shape else 1
        raw = buf.read(count * 8)
        if len(raw) < count * 8:
            raise CheckpointError(f"{path}: truncated tensor {entry['name']!r}")
        loaded[entry["name"]] = np.frombuffer(raw, dtype="<f8").reshape(shape).copy()
    expected = param_shapes(config)
    params = {}
    for name, shape in expected.items():
        if name not in loaded:
            raise CheckpointError(f"{path}: missing tensor {name!r}")
        if loaded[name].shape != shape:
            raise CheckpointError(
                f"{path}: tensor {name!r} has shape {loaded[name].shape}, "
                f"expected {shape}"
            )
        params[name] = loaded[name]
    vocab = [str(t) for t in header["vocab"]]
    matrix = loaded["embeddings"]
    if matrix.shape != (len(vocab), config.d_word):
        raise CheckpointError(f"{path}: embedding matrix shape mismatch")
    word_vectors = WordVectorTable(
        dim=config.d_word,
        vectors={tok: matrix[i] for i, tok in enumerate(vocab)},
        unk_vector=loaded["embeddings_unk"],
    )
    return Checkpoint(
        config=config,
        params=params,
        labels={lv: [str(x) for x in header["labels"][lv]] for lv in LEVELS},
        connectives=[str(c) for c in header.get("connectives", [])],
        word_vectors=word_vectors,
        history=list(header.get("history", [])),
    )
