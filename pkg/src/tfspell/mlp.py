"""Landmark-vector classifier for single-hand signs.

A hand is flattened into either its 63 absolute coordinates or the 60
wrist-relative offsets ``wrist - landmark_i`` (i = 1..20), then fed to a
fully connected network::

    in -> [linear -> batchnorm -> relu] x 3 (60, 40, 30 units) -> linear -> sigmoid

Outputs are independent per-class sigmoid scores trained with binary
cross-entropy against one-hot targets; the predicted class is the argmax.
Everything is plain float64 numpy with hand-written backprop.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .landmarks import WRIST, HandLandmarks

HIDDEN = (60, 40, 30)
BN_EPS = 1e-5
FORMAT_VERSION = 1


class DimensionMismatch(ValueError):
    pass


class InsufficientData(ValueError):
    pass


class NonFiniteLoss(ArithmeticError):
    def __init__(self, epoch: int):
        super().__init__(f"training loss became non-finite at epoch {epoch}")
        self.epoch = epoch


class CorruptModel(ValueError):
    pass


class Encoding(str, enum.Enum):
    ABSOLUTE = "absolute"
    RELATIVE = "relative"

    @property
    def dim(self) -> int:
        return 63 if self is Encoding.ABSOLUTE else 60


class Mode(str, enum.Enum):
    TRAIN = "train"
    INFER = "infer"


class Optimizer(str, enum.Enum):
    SGD = "sgd"
    ADAM = "adam"


def encode(hand: HandLandmarks, enc: Encoding | str) -> np.ndarray:
    enc = Encoding(enc)
    p = hand.points
    if enc is Encoding.ABSOLUTE:
        return p.reshape(-1).copy()
    return (p[WRIST] - np.delete(p, WRIST, axis=0)).reshape(-1)


def encode_batch(hands: Sequence[HandLandmarks], enc: Encoding | str) -> np.ndarray:
    enc = Encoding(enc)
    if not hands:
        return np.zeros((0, enc.dim))
    return np.stack([encode(h, enc) for h in hands])


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 200
    batch_size: int = 32
    learning_rate: float = 1e-3
    seed: int = 0
    optimizer: Optimizer = Optimizer.ADAM
    bn_momentum: float = 0.1

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be positive")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if not 0 < self.bn_momentum < 1:
            raise ValueError("bn_momentum must lie in (0, 1)")
        object.__setattr__(self, "optimizer", Optimizer(self.optimizer))


@dataclass(frozen=True)
class EpochStats:
    epoch: int
    loss: float
    accuracy: float


def _param_names() -> list[str]:
    names = []
    for i in range(1, len(HIDDEN) + 1):
        names += [f"W{i}", f"b{i}", f"gamma{i}", f"beta{i}"]
    out = len(HIDDEN) + 1
    return names + [f"W{out}", f"b{out}"]


PARAM_NAMES = _param_names()
STAT_NAMES = [f"{s}{i}" for i in range(1, len(HIDDEN) + 1) for s in ("mean", "var")]


@dataclass(frozen=True, eq=False)
class MlpModel:
    """Trained network.

    ``params`` holds ``W1..W4`` (shape ``(fan_in, fan_out)``), ``b1..b4``,
    and ``gamma1..3`` / ``beta1..3``; ``running`` holds the batchnorm
    ``mean1..3`` / ``var1..3`` used at inference.
    """

    encoding: Encoding
    class_labels: tuple[str, ...]
    params: dict[str, np.ndarray]
    running: dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def layer_dims(self) -> list[int]:
        return [self.encoding.dim, *HIDDEN, len(self.class_labels)]

    @property
    def input_dim(self) -> int:
        return self.encoding.dim

    @property
    def n_classes(self) -> int:
        return len(self.class_labels)


def init_model(encoding: Encoding | str, class_labels: Sequence[str], rng: np.random.Generator) -> MlpModel:
    """He-uniform weights scaled by fan-in, zero biases, identity batchnorm."""
    encoding = Encoding(encoding)
    dims = [encoding.dim, *HIDDEN, len(class_labels)]
    params: dict[str, np.ndarray] = {}
    running: dict[str, np.ndarray] = {}
    for i, (fan_in, fan_out) in enumerate(zip(dims[:-1], dims[1:]), start=1):
        bound = math.sqrt(6.0 / fan_in)
        params[f"W{i}"] = rng.uniform(-bound, bound, size=(fan_in, fan_out))
        params[f"b{i}"] = np.zeros(fan_out)
        if i <= len(HIDDEN):
            params[f"gamma{i}"] = np.ones(fan_out)
            params[f"beta{i}"] = np.zeros(fan_out)
            running[f"mean{i}"] = np.zeros(fan_out)
            running[f"var{i}"] = np.ones(fan_out)
    return MlpModel(encoding, tuple(class_labels), params, running)


def _as_batch(model: MlpModel, f) -> tuple[np.ndarray, bool]:
    x = np.asarray(f, dtype=np.float64)
    single = x.ndim == 1
    if single:
        x = x[None, :]
    if x.ndim != 2 or x.shape[1] != model.input_dim:
        raise DimensionMismatch(
            f"model expects {model.input_dim} features, got {x.shape[-1] if x.ndim else 0}"
        )
    return x, single


def _forward(params, running, x: np.ndarray, mode: Mode):
    """Return (logits, cache, batch_stats)."""
    cache = []
    batch_stats = {}
    h = x
    for i in range(1, len(HIDDEN) + 1):
        a = h @ params[f"W{i}"] + params[f"b{i}"]
        if mode is Mode.TRAIN:
            mu = a.mean(axis=0)
            var = a.var(axis=0)
            batch_stats[f"mean{i}"], batch_stats[f"var{i}"] = mu, var
        else:
            mu, var = running[f"mean{i}"], running[f"var{i}"]
        inv_std = 1.0 / np.sqrt(var + BN_EPS)
        xhat = (a - mu) * inv_std
        z = params[f"gamma{i}"] * xhat + params[f"beta{i}"]
        out = np.maximum(z, 0.0)
        cache.append((h, xhat, inv_std, z))
        h = out
    k = len(HIDDEN) + 1
    logits = h @ params[f"W{k}"] + params[f"b{k}"]
    cache.append((h,))
    return logits, cache, batch_stats


def sigmoid(z):
    # split by sign so exp never overflows
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def forward(model: MlpModel, f, mode: Mode | str = Mode.INFER) -> np.ndarray:
    """Per-class sigmoid scores for one feature vector or a batch of them.

    Train mode normalizes with the statistics of the given batch; it does not
    touch the model's running statistics.
    """
    x, single = _as_batch(model, f)
    logits, _, _ = _forward(model.params, model.running, x, Mode(mode))
    scores = sigmoid(logits)
    return scores[0] if single else scores


def logits(model: MlpModel, f, mode: Mode | str = Mode.INFER) -> np.ndarray:
    x, single = _as_batch(model, f)
    z, _, _ = _forward(model.params, model.running, x, Mode(mode))
    return z[0] if single else z


def predict_indices(model: MlpModel, x) -> np.ndarray:
    # argmax over logits: sigmoid saturates to 1.0 and would manufacture ties
    z = np.atleast_2d(logits(model, x, Mode.INFER))
    return np.argmax(z, axis=1)


def predict_labels(model: MlpModel, x) -> list[str]:
    return [model.class_labels[i] for i in predict_indices(model, x)]


def bce_with_logits(z: np.ndarray, y: np.ndarray) -> float:
    """Per-class binary cross-entropy, summed over classes, averaged over the batch."""
    per = np.maximum(z, 0.0) - y * z + np.log1p(np.exp(-np.abs(z)))
    return float(per.sum() / z.shape[0])


def loss_and_grads(params, x: np.ndarray, y: np.ndarray):
    """Train-mode loss and its gradient with respect to every parameter.

    Returns ``(loss, grads, batch_stats)``.
    """
    z, cache, batch_stats = _forward(params, None, x, Mode.TRAIN)
    n = x.shape[0]
    loss = bce_with_logits(z, y)

    grads: dict[str, np.ndarray] = {}
    dz = (sigmoid(z) - y) / n
    k = len(HIDDEN) + 1
    (h,) = cache[-1]
    grads[f"W{k}"] = h.T @ dz
    grads[f"b{k}"] = dz.sum(axis=0)
    dh = dz @ params[f"W{k}"].T

    for i in range(len(HIDDEN), 0, -1):
        h_in, xhat, inv_std, zpre = cache[i - 1]
        dzpre = dh * (zpre > 0)
        grads[f"gamma{i}"] = (dzpre * xhat).sum(axis=0)
        grads[f"beta{i}"] = dzpre.sum(axis=0)
        dxhat = dzpre * params[f"gamma{i}"]
        da = (inv_std / n) * (
            n * dxhat - dxhat.sum(axis=0) - xhat * (dxhat * xhat).sum(axis=0)
        )
        grads[f"W{i}"] = h_in.T @ da
        grads[f"b{i}"] = da.sum(axis=0)
        dh = da @ params[f"W{i}"].T
    return loss, grads, batch_stats


class _Adam:
    def __init__(self, params, lr, b1=0.9, b2=0.999, eps=1e-8):
        self.lr, self.b1, self.b2, self.eps = lr, b1, b2, eps
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}
        self.t = 0

    def step(self, params, grads):
        self.t += 1
        c1 = 1.0 - self.b1**self.t
        c2 = 1.0 - self.b2**self.t
        for k in PARAM_NAMES:
            g = grads[k]
            self.m[k] = self.b1 * self.m[k] + (1.0 - self.b1) * g
            self.v[k] = self.b2 * self.v[k] + (1.0 - self.b2) * g * g
            params[k] -= self.lr * (self.m[k] / c1) / (np.sqrt(self.v[k] / c2) + self.eps)


class _Sgd:
    def __init__(self, params, lr):
        self.lr = lr

    def step(self, params, grads):
        for k in PARAM_NAMES:
            params[k] -= self.lr * grads[k]


def _freeze(model: MlpModel) -> MlpModel:
    for arr in (*model.params.values(), *model.running.values()):
        arr.setflags(write=False)
    return model


def train(
    data: Sequence[tuple[HandLandmarks, str]],
    cfg: TrainConfig = TrainConfig(),
    enc: Encoding | str = Encoding.RELATIVE,
) -> tuple[MlpModel, list[EpochStats]]:
    """Fit a fresh network on ``(hand, label)`` pairs.

    The seed fixes both initialization and the per-epoch shuffles, so the
    same data in the same order always yields bitwise-identical weights.
    """
    enc = Encoding(enc)
    labels = sorted({lab for _, lab in data})
    if len(labels) < 2:
        raise InsufficientData(f"need at least 2 distinct labels, got {len(labels)}")
    index = {lab: i for i, lab in enumerate(labels)}
    x = encode_batch([h for h, _ in data], enc)
    y_idx = np.array([index[lab] for _, lab in data])
    return train_arrays(x, y_idx, labels, cfg, enc)


def train_arrays(x: np.ndarray, y_idx: np.ndarray, labels: Sequence[str], cfg: TrainConfig, enc: Encoding):
    n = x.shape[0]
    y = np.zeros((n, len(labels)))
    y[np.arange(n), y_idx] = 1.0

    rng = np.random.default_rng(cfg.seed)
    model = init_model(enc, labels, rng)
    params = {k: v.copy() for k, v in model.params.items()}
    running = {k: v.copy() for k, v in model.running.items()}
    opt = _Adam(params, cfg.learning_rate) if cfg.optimizer is Optimizer.ADAM else _Sgd(params, cfg.learning_rate)
    m = cfg.bn_momentum

    history = []
    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(n)
        total, seen = 0.0, 0
        for start in range(0, n, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            # a lone sample has zero batch variance; skip it unless it is all we have
            if len(idx) < 2 and n > 1:
                continue
            # divergence is reported through NonFiniteLoss rather than numpy warnings
            with np.errstate(over="ignore", invalid="ignore"):
                loss, grads, stats = loss_and_grads(params, x[idx], y[idx])
            if not math.isfinite(loss):
                raise NonFiniteLoss(epoch)
            opt.step(params, grads)
            for name, val in stats.items():
                running[name] = (1.0 - m) * running[name] + m * val
            total += loss * len(idx)
            seen += len(idx)
        current = MlpModel(enc, tuple(labels), params, running)
        acc = float(np.mean(predict_indices(current, x) == y_idx))
        history.append(EpochStats(epoch, total / max(seen, 1), acc))

    final = MlpModel(
        enc,
        tuple(labels),
        {k: v.copy() for k, v in params.items()},
        {k: v.copy() for k, v in running.items()},
    )
    return _freeze(final), history


def save_model(model: MlpModel) -> bytes:
    arrays = []
    for name in PARAM_NAMES + STAT_NAMES:
        arr = model.params[name] if name in model.params else model.running[name]
        arrays.append({"name": name, "shape": list(arr.shape), "data": arr.reshape(-1).tolist()})
    doc = {
        "format_version": FORMAT_VERSION,
        "encoding": model.encoding.value,
        "layer_dims": model.layer_dims,
        "class_labels": list(model.class_labels),
        "bn_eps": BN_EPS,
        "arrays": arrays,
    }
    return json.dumps(doc).encode("utf-8")


def _expected_shapes(dims: list[int]) -> dict[str, tuple[int, ...]]:
    shapes: dict[str, tuple[int, ...]] = {}
    for i, (a, b) in enumerate(zip(dims[:-1], dims[1:]), start=1):
        shapes[f"W{i}"] = (a, b)
        shapes[f"b{i}"] = (b,)
        if i <= len(HIDDEN):
            for s in ("gamma", "beta", "mean", "var"):
                shapes[f"{s}{i}"] = (b,)
    return shapes


def load_model(blob: bytes | str) -> MlpModel:
    try:
        doc = json.loads(blob)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise CorruptModel(f"model file is not valid JSON: {exc}") from None
    try:
        if doc["format_version"] != FORMAT_VERSION:
            raise CorruptModel(f"unsupported format_version {doc['format_version']!r}")
        enc = Encoding(doc["encoding"])
        labels = tuple(str(s) for s in doc["class_labels"])
        dims = [int(d) for d in doc["layer_dims"]]
        if dims != [enc.dim, *HIDDEN, len(labels)]:
            raise CorruptModel(f"layer_dims {dims} do not match a {enc.value} model with {len(labels)} classes")
        shapes = _expected_shapes(dims)
        arrays = {}
        for entry in doc["arrays"]:
            name = entry["name"]
            if name not in shapes:
                raise CorruptModel(f"unexpected array {name!r}")
            arr = np.array(entry["data"], dtype=np.float64)
            if tuple(entry["shape"]) != shapes[name] or arr.size != math.prod(shapes[name]):
                raise CorruptModel(f"array {name!r} has wrong shape")
            if not np.all(np.isfinite(arr)):
                raise CorruptModel(f"array {name!r} holds non-finite values")
            arrays[name] = arr.reshape(shapes[name])
    except CorruptModel:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptModel(f"malformed model file: {exc!r}") from None
    missing = set(shapes) - set(arrays)
    if missing:
        raise CorruptModel(f"model file lacks arrays {sorted(missing)}")
    params = {k: arrays[k] for k in PARAM_NAMES}
    running = {k: arrays[k] for k in STAT_NAMES}
    return _freeze(MlpModel(enc, labels, params, running))
