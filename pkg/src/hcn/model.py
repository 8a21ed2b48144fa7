"""The dialogue manager: per-turn features feed a dialogue-level LSTM,
a fully connected block selects the next action template, and optional
action masks veto responses before the softmax.

Also holds the training loop, accuracy metrics, and checkpoint I/O.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

from . import autodiff as ad
from .data import PreparedCorpus, Dialogue
from .embeddings import EmbeddingTable
from .encoders import BaselineEncoder, CnnEncoder, RnnEncoder

CHECKPOINT_VERSION = 1


class CompatibilityError(ValueError):
    pass


class CheckpointFormatError(ValueError):
    pass


@dataclass
class ModelConfig:
    featurizer: str = "baseline"  # baseline | cnn | rnn
    lstm_size: int = 55
    input_lstm_size: int | None = None  # rnn only
    conv_filters: int | None = None  # cnn only
    lstm_keep: float = 1.0
    input_lstm_keep: float | None = None  # rnn only
    conv_keep: float | None = None  # cnn only
    fc_keep: float = 1.0
    learning_rate: float = 0.001
    activation: str = "relu"
    input_activation: str | None = None  # rnn only
    adam_eps: float = 1e-8
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    embedding_source: str = ""
    use_prev_action: bool = False
    batch_size: int = 32
    clip_norm: float = 5.0
    seed: int = 0

    def validate(self) -> "ModelConfig":
        if self.featurizer not in ("baseline", "cnn", "rnn"):
            raise ad.ConfigError(f"unknown featurizer {self.featurizer!r}")
        if self.lstm_size < 1 or self.learning_rate <= 0:
            raise ad.ConfigError("lstm_size must be >= 1 and learning_rate > 0")
        for name in ("lstm_keep", "fc_keep"):
            v = getattr(self, name)
            if not (0 < v <= 1):
                raise ad.ConfigError(f"{name} must be in (0, 1], got {v}")
        rnn_only = {"input_lstm_size", "input_lstm_keep", "input_activation"}
        cnn_only = {"conv_filters", "conv_keep"}
        relevant = {"rnn": rnn_only, "cnn": cnn_only, "baseline": set()}[self.featurizer]
        for name in (rnn_only | cnn_only) - relevant:
            if getattr(self, name) is not None:
                raise ad.ConfigError(f"{name} is not valid for featurizer {self.featurizer!r}")
        for name in relevant:
            if getattr(self, name) is None:
                raise ad.ConfigError(f"{name} is required for featurizer {self.featurizer!r}")
        return self

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ModelConfig":
        return cls(**json.loads(text)).validate()


@dataclass
class DialogueState:
    h: np.ndarray
    c: np.ndarray
    prev_action: int | None = None

    @classmethod
    def initial(cls, size: int) -> "DialogueState":
        return cls(np.zeros(size), np.zeros(size))


def all_true_mask(n_actions: int) -> np.ndarray:
    return np.ones(n_actions, dtype=bool)


class HcnModel:
    def __init__(self, config: ModelConfig, table: EmbeddingTable, corpus: PreparedCorpus):
        config.validate()
        self.config = config
        self.table = table
        self.corpus = corpus
        self.n_actions = len(corpus.actions)
        rng = np.random.default_rng(config.seed)
        if config.featurizer == "baseline":
            self.encoder = BaselineEncoder(table, corpus.vocab)
        elif config.featurizer == "cnn":
            self.encoder = CnnEncoder(table, config.conv_filters, keep_prob=config.conv_keep, rng=rng)
        else:
            self.encoder = RnnEncoder(
                table,
                config.input_lstm_size,
                keep_prob=config.input_lstm_keep,
                input_activation=config.input_activation,
                rng=rng,
            )
        in_dim = self.encoder.feature_dim + (self.n_actions if config.use_prev_action else 0)
        dh = config.lstm_size
        self.dlg_lstm = ad.lstm_weights(in_dim, dh, rng, "dlg_lstm")
        s = 1.0 / np.sqrt(dh)
        self.w_fc = ad.parameter(rng.uniform(-s, s, (dh, dh)), "fc.w")
        self.b_fc = ad.parameter(np.zeros(dh), "fc.b")
        self.w_out = ad.parameter(rng.uniform(-s, s, (dh, self.n_actions)), "out.w")
        self.b_out = ad.parameter(np.zeros(self.n_actions), "out.b")

    def parameters(self) -> list[ad.Tensor]:
        return (
            self.encoder.parameters()
            + self.dlg_lstm.tensors()
            + [self.w_fc, self.b_fc, self.w_out, self.b_out]
        )

    def named_parameters(self) -> dict[str, ad.Tensor]:
        return {p.name: p for p in self.parameters()}

    def initial_state(self) -> DialogueState:
        return DialogueState.initial(self.config.lstm_size)

    def _logits(self, features: ad.Tensor, state: DialogueState, mode: str, rng):
        cfg = self.config
        if cfg.use_prev_action:
            onehot = np.zeros(self.n_actions)
            if state.prev_action is not None and state.prev_action < self.n_actions:
                onehot[state.prev_action] = 1.0
            features = ad.concat([features, ad.constant(onehot)])
        h, c = ad.lstm_step(features, ad.constant(state.h), ad.constant(state.c), self.dlg_lstm)
        out = h
        if mode == "train":
            out = ad.dropout(out, cfg.lstm_keep, mode, rng)
        out = ad.activation(cfg.activation, ad.add(ad.matmul(out, self.w_fc), self.b_fc))
        if mode == "train":
            out = ad.dropout(out, cfg.fc_keep, mode, rng)
        logits = ad.add(ad.matmul(out, self.w_out), self.b_out)
        return logits, h, c

    def forward_turn(
        self,
        tokens: list[str],
        state: DialogueState,
        mask: np.ndarray | None = None,
        mode: str = "eval",
        rng: np.random.Generator | None = None,
    ) -> tuple[np.ndarray, DialogueState]:
        """Action distribution over the catalog plus the advanced state."""
        features = self.encoder.encode(tokens, mode, rng)
        logits, h, c = self._logits(features, state, mode, rng)
        probs = ad.softmax_probs(logits.data, mask)
        new_state = DialogueState(h.data.copy(), c.data.copy(), int(np.argmax(probs)))
        return probs, new_state

    def dialogue_loss(self, dialogue: Dialogue, rng: np.random.Generator) -> ad.Tensor:
        """Mean cross-entropy over the dialogue's turns (training graph)."""
        state = self.initial_state()
        losses = []
        for turn in dialogue.turns:
            features = self.encoder.encode(turn.user_tokens, "train", rng)
            logits, h, c = self._logits(features, state, "train", rng)
            if 0 <= turn.gold_action < self.n_actions:
                losses.append(ad.softmax_xent(logits, turn.gold_action))
            state = DialogueState(h.data.copy(), c.data.copy(), turn.gold_action)
        if not losses:
            return ad.constant(0.0)
        return ad.mean_of(losses)

    def predict_dialogue(self, dialogue: Dialogue, mask: np.ndarray | None = None) -> list[int]:
        state = self.initial_state()
        preds = []
        for turn in dialogue.turns:
            # the previous-action feature follows the model's own
            # prediction, exactly as in online serving
            probs, state = self.forward_turn(turn.user_tokens, state, mask)
            preds.append(int(np.argmax(probs)))
        return preds

    def get_weights(self) -> dict[str, np.ndarray]:
        return {name: p.data.copy() for name, p in self.named_parameters().items()}

    def set_weights(self, weights: dict[str, np.ndarray]) -> None:
        for name, p in self.named_parameters().items():
            if name not in weights:
                raise CompatibilityError(f"missing tensor {name!r}")
            if weights[name].shape != p.data.shape:
                raise CompatibilityError(
                    f"tensor {name!r}: shape {weights[name].shape} != {p.data.shape}"
                )
            p.data = weights[name].astype(np.float64)


# ---------------------------------------------------------------------------
# metrics


def turn_accuracy(predictions: list[int], golds: list[int]) -> float:
    """Fraction of turns predicted exactly; out-of-catalog golds always miss."""
    if len(predictions) != len(golds):
        raise ValueError(f"length mismatch: {len(predictions)} vs {len(golds)}")
    if not golds:
        return 0.0
    return sum(p == g for p, g in zip(predictions, golds)) / len(golds)


def dialogue_accuracy(predictions: list[int], golds: list[int], boundaries: list[int]) -> float:
    """Fraction of dialogues with every turn correct. `boundaries` holds
    the start index of each dialogue."""
    if len(predictions) != len(golds):
        raise ValueError(f"length mismatch: {len(predictions)} vs {len(golds)}")
    if not boundaries:
        return 0.0
    edges = list(boundaries) + [len(golds)]
    ok = 0
    for lo, hi in zip(edges[:-1], edges[1:]):
        if all(predictions[i] == golds[i] for i in range(lo, hi)):
            ok += 1
    return ok / len(boundaries)


def evaluate_split(model: HcnModel, dialogues: list[Dialogue]) -> dict:
    preds, golds, boundaries = [], [], []
    for d in dialogues:
        boundaries.append(len(golds))
        preds.extend(model.predict_dialogue(d))
        golds.extend(t.gold_action for t in d.turns)
    return {
        "turn_accuracy": turn_accuracy(preds, golds),
        "dialogue_accuracy": dialogue_accuracy(preds, golds, boundaries),
        "predictions": preds,
        "golds": golds,
        "boundaries": boundaries,
    }


# ---------------------------------------------------------------------------
# training


@dataclass
class TrainResult:
    model: HcnModel
    best_val_accuracy: float
    best_epoch: int
    history: list[dict] = field(default_factory=list)


def train_model(
    config: ModelConfig,
    corpus: PreparedCorpus,
    table: EmbeddingTable,
    epochs: int,
    train_dialogues: list[Dialogue] | None = None,
    val_dialogues: list[Dialogue] | None = None,
    stop_threshold: float | None = None,
    log=None,
) -> TrainResult:
    """Batch training with best-validation-epoch weight selection."""
    model = HcnModel(config, table, corpus)
    train = train_dialogues if train_dialogues is not None else corpus.train
    val = val_dialogues if val_dialogues is not None else corpus.dev
    params = model.parameters()
    opt = ad.Adam(params, config.learning_rate, config.adam_beta1, config.adam_beta2, config.adam_eps)
    rng = np.random.default_rng(config.seed)
    best_acc, best_epoch, best_weights = -1.0, -1, model.get_weights()
    history = []
    for epoch in range(epochs):
        order = rng.permutation(len(train))
        epoch_loss, n_batches = 0.0, 0
        for start in range(0, len(train), config.batch_size):
            batch = [train[i] for i in order[start : start + config.batch_size]]
            ad.zero_grads(params)
            loss = ad.mean_of([model.dialogue_loss(d, rng) for d in batch])
            ad.backward(loss, params)
            opt.step(clip_norm=config.clip_norm)
            epoch_loss += float(loss.data)
            n_batches += 1
        val_acc = evaluate_split(model, val)["turn_accuracy"] if val else 0.0
        record = {"epoch": epoch, "train_loss": epoch_loss / max(1, n_batches), "val_accuracy": val_acc}
        history.append(record)
        if log:
            log(record)
        if val_acc > best_acc:
            best_acc, best_epoch, best_weights = val_acc, epoch, model.get_weights()
        if stop_threshold is not None and best_acc >= stop_threshold:
            break
    model.set_weights(best_weights)
    return TrainResult(model, best_acc, best_epoch, history)


# ---------------------------------------------------------------------------
# checkpoint format: directory with manifest.json + one little-endian
# float32 binary per tensor


def save_checkpoint(model: HcnModel, out_dir: str | Path, metrics: dict | None = None) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    tensors = []
    for name, p in sorted(model.named_parameters().items()):
        fname = name.replace("/", "_") + ".bin"
        arr = p.data.astype("<f4")
        # sync in-memory weights to the stored precision so that a
        # reloaded model reproduces this model's outputs bit-for-bit
        p.data = arr.astype(np.float64)
        (out / fname).write_bytes(arr.tobytes())
        tensors.append({"name": name, "shape": list(p.data.shape), "dtype": "<f4", "file": fname})
    manifest = {
        "format_version": CHECKPOINT_VERSION,
        "config": json.loads(model.config.to_json()),
        "tensors": tensors,
        "fingerprints": model.corpus.fingerprints,
        "embedding_checksum": model.table.checksum(),
        "metrics": metrics or {},
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True), encoding="utf-8")


def load_checkpoint(ckpt_dir: str | Path, table: EmbeddingTable, corpus: PreparedCorpus) -> HcnModel:
    d = Path(ckpt_dir)
    try:
        manifest = json.loads((d / "manifest.json").read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise CheckpointFormatError(f"cannot read checkpoint manifest: {exc}") from exc
    if manifest.get("format_version") != CHECKPOINT_VERSION:
        raise CheckpointFormatError(f"unsupported format version {manifest.get('format_version')}")
    if manifest["fingerprints"] != corpus.fingerprints:
        raise CompatibilityError(
            "checkpoint was built against a different vocabulary/action set"
        )
    config = ModelConfig.from_json(json.dumps(manifest["config"]))
    model = HcnModel(config, table, corpus)
    weights = {}
    for spec in manifest["tensors"]:
        raw = (d / spec["file"]).read_bytes()
        arr = np.frombuffer(raw, dtype=spec["dtype"]).reshape(spec["shape"])
        if arr.size != int(np.prod(spec["shape"])):
            raise CheckpointFormatError(f"tensor {spec['name']}: size mismatch")
        weights[spec["name"]] = arr.astype(np.float64)
    model.set_weights(weights)
    return model
