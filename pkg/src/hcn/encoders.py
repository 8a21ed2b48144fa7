"""Input featurizers: baseline average-embedding + bag-of-words, a
convolutional sentence encoder, and a recurrent (LSTM) sentence encoder.

Each maps one tokenized user utterance to a fixed-size feature tensor.
The CNN/RNN variants are trainable and differentiate through the shared
autodiff tape; the baseline is a pure function of frozen inputs.
"""

from __future__ import annotations

import numpy as np

from . import autodiff as ad
from .data import Vocabulary, bow_vector
from .embeddings import EmbeddingTable, lookup


class BaselineEncoder:
    """Mean word vector concatenated with the binary bag-of-words."""

    def __init__(self, table: EmbeddingTable, vocab: Vocabulary):
        self.table = table
        self.vocab = vocab
        self.feature_dim = table.dim + len(vocab)

    def parameters(self):
        return []

    def encode(self, tokens: list[str], mode: str = "eval", rng=None) -> ad.Tensor:
        if tokens:
            # summation in sorted token order keeps the mean bitwise
            # invariant under permutations of the utterance
            mean = np.mean([lookup(t, self.table) for t in sorted(tokens)], axis=0)
        else:
            mean = np.zeros(self.table.dim)
        return ad.constant(np.concatenate([mean, bow_vector(tokens, self.vocab)]))


class CnnEncoder:
    """Window convolutions with max-over-time pooling, relu inside."""

    def __init__(
        self,
        table: EmbeddingTable,
        filters: int,
        widths: tuple[int, ...] = (3, 4, 5),
        keep_prob: float = 1.0,
        rng: np.random.Generator | None = None,
    ):
        rng = rng or np.random.default_rng(0)
        self.table = table
        self.widths = widths
        self.keep_prob = keep_prob
        self.filters = []
        self.biases = []
        for w in widths:
            s = 1.0 / np.sqrt(w * table.dim)
            self.filters.append(ad.parameter(rng.uniform(-s, s, (w, table.dim, filters)), f"cnn.w{w}.filters"))
            self.biases.append(ad.parameter(np.zeros(filters), f"cnn.w{w}.bias"))
        self.feature_dim = len(widths) * filters

    def parameters(self):
        return self.filters + self.biases

    def _seq(self, tokens):
        if not tokens:
            return np.zeros((1, self.table.dim))
        return np.stack([lookup(t, self.table) for t in tokens])

    def encode(self, tokens: list[str], mode: str = "eval", rng=None) -> ad.Tensor:
        seq = ad.constant(self._seq(tokens))
        pooled = [
            ad.conv1d_maxpool(seq, f, b, act="relu") for f, b in zip(self.filters, self.biases)
        ]
        out = ad.concat(pooled)
        if mode == "train":
            out = ad.dropout(out, self.keep_prob, mode, rng)
        return out


class RnnEncoder:
    """Utterance LSTM; the final hidden state is the feature vector."""

    def __init__(
        self,
        table: EmbeddingTable,
        hidden: int,
        keep_prob: float = 1.0,
        input_activation: str = "tanh",
        rng: np.random.Generator | None = None,
    ):
        rng = rng or np.random.default_rng(0)
        self.table = table
        self.hidden = hidden
        self.keep_prob = keep_prob
        self.input_activation = input_activation
        self.weights = ad.lstm_weights(table.dim, hidden, rng, "rnn_enc")
        self.feature_dim = hidden

    def parameters(self):
        return self.weights.tensors()

    def encode(self, tokens: list[str], mode: str = "eval", rng=None) -> ad.Tensor:
        h = ad.constant(np.zeros(self.hidden))
        c = ad.constant(np.zeros(self.hidden))
        for tok in tokens:
            h, c = ad.lstm_step(ad.constant(lookup(tok, self.table)), h, c, self.weights)
        out = ad.activation(self.input_activation, h)
        if mode == "train":
            out = ad.dropout(out, self.keep_prob, mode, rng)
        return out
