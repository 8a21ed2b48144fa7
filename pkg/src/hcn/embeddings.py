"""Fixed word vectors: text-format loading and a subword skip-gram trainer.

Vectors are frozen before model training; unknown tokens fall back to the
mean of their character n-gram vectors when available, else zeros.
"""

from __future__ import annotations

import hashlib
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

NGRAM_MIN = 3
NGRAM_MAX = 6


class FormatError(ValueError):
    pass


@dataclass
class EmbeddingTable:
    dim: int
    vectors: dict[str, np.ndarray] = field(default_factory=dict)
    ngrams: dict[str, np.ndarray] = field(default_factory=dict)
    frozen: bool = False

    def freeze(self) -> "EmbeddingTable":
        self.frozen = True
        return self

    def checksum(self) -> str:
        h = hashlib.sha256()
        for name, table in (("w", self.vectors), ("n", self.ngrams)):
            for tok in sorted(table):
                h.update(name.encode())
                h.update(tok.encode("utf-8"))
                h.update(np.ascontiguousarray(table[tok], dtype=np.float64).tobytes())
        return h.hexdigest()


def char_ngrams(word: str, nmin: int = NGRAM_MIN, nmax: int = NGRAM_MAX) -> list[str]:
    """Character n-grams of the boundary-marked word, fastText style."""
    wrapped = f"<{word}>"
    out = []
    for n in range(nmin, nmax + 1):
        out.extend(wrapped[i : i + n] for i in range(len(wrapped) - n + 1))
    return out


def lookup(token: str, table: EmbeddingTable) -> np.ndarray:
    vec = table.vectors.get(token)
    if vec is not None:
        return vec
    if table.ngrams:
        grams = [table.ngrams[g] for g in char_ngrams(token) if g in table.ngrams]
        if grams:
            return np.mean(grams, axis=0)
    return np.zeros(table.dim)


def load_text_vectors(path: str | Path, ngrams_path: str | Path | None = None) -> EmbeddingTable:
    """Read a text vector file: optional "count dim" header, then one
    token and its floats per line."""
    vectors, dim = _read_vector_file(path)
    table = EmbeddingTable(dim=dim, vectors=vectors)
    if ngrams_path is not None:
        grams, gdim = _read_vector_file(ngrams_path)
        if gdim != dim:
            raise FormatError(f"{ngrams_path}: n-gram dim {gdim} != word dim {dim}")
        table.ngrams = grams
    return table.freeze()


def _read_vector_file(path) -> tuple[dict[str, np.ndarray], int]:
    vectors: dict[str, np.ndarray] = {}
    dim = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            parts = line.rstrip("\n").split(" ")
            if not line.strip():
                continue
            if lineno == 1 and len(parts) == 2:
                try:
                    int(parts[0]), int(parts[1])
                except ValueError:
                    pass
                else:
                    dim = int(parts[1])
                    continue
            token, values = parts[0], parts[1:]
            if dim is None:
                dim = len(values)
            if len(values) != dim:
                raise FormatError(f"{path}:{lineno}: expected {dim} values, got {len(values)}")
            try:
                vec = np.array([float(v) for v in values])
            except ValueError as exc:
                raise FormatError(f"{path}:{lineno}: {exc}") from None
            if token in vectors:
                warnings.warn(f"{path}:{lineno}: duplicate token {token!r}, first occurrence wins")
            else:
                vectors[token] = vec
    if dim is None:
        raise FormatError(f"{path}: empty vector file")
    return vectors, dim


def write_text_vectors(table: dict[str, np.ndarray], dim: int, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{len(table)} {dim}\n")
        for token in table:
            fh.write(token + " " + " ".join(repr(float(v)) for v in table[token]) + "\n")


@dataclass
class SkipgramConfig:
    dim: int = 300
    epochs: int = 100
    window: int = 5
    negatives: int = 5
    lr: float = 0.05
    min_count: int = 1
    seed: int = 0


def train_subword_skipgram(sentences: list[list[str]], config: SkipgramConfig) -> EmbeddingTable:
    """Skip-gram with negative sampling over words plus their character
    n-grams; deterministic given the seed. Returns a frozen table whose
    word vectors are the composed (word + n-gram mean) inputs."""
    if not sentences or not any(sentences):
        raise ValueError("empty corpus")
    rng = np.random.default_rng(config.seed)

    counts: dict[str, int] = {}
    for sent in sentences:
        for tok in sent:
            counts[tok] = counts.get(tok, 0) + 1
    words = sorted(w for w, c in counts.items() if c >= config.min_count)
    widx = {w: i for i, w in enumerate(words)}
    nw = len(words)

    gram_list = sorted({g for w in words for g in char_ngrams(w)})
    gidx = {g: i for i, g in enumerate(gram_list)}
    # input rows: one per word, then one per n-gram
    subword_rows = [[widx[w]] + [nw + gidx[g] for g in char_ngrams(w)] for w in words]

    n_in = nw + len(gram_list)
    w_in = (rng.random((n_in, config.dim)) - 0.5) / config.dim
    w_out = np.zeros((nw, config.dim))

    freq = np.array([counts[w] for w in words], dtype=np.float64) ** 0.75
    neg_cdf = np.cumsum(freq / freq.sum())

    encoded = [[widx[t] for t in sent if t in widx] for sent in sentences]
    encoded = [s for s in encoded if len(s) >= 2]
    if not encoded:
        raise ValueError("corpus has no trainable co-occurrences")

    total_steps = config.epochs * sum(len(s) for s in encoded)
    step = 0
    epoch_losses = []
    for _ in range(config.epochs):
        loss_sum, loss_n = 0.0, 0
        for sent in encoded:
            for pos, center in enumerate(sent):
                lr = config.lr * max(1e-4, 1.0 - step / total_steps)
                step += 1
                b = int(rng.integers(1, config.window + 1))
                rows = subword_rows[center]
                hidden = w_in[rows].mean(axis=0)
                ghidden = np.zeros(config.dim)
                for ctx_pos in range(max(0, pos - b), min(len(sent), pos + b + 1)):
                    if ctx_pos == pos:
                        continue
                    targets = [(sent[ctx_pos], 1.0)]
                    negs = np.searchsorted(neg_cdf, rng.random(config.negatives))
                    targets.extend((int(n), 0.0) for n in negs if n != sent[ctx_pos])
                    for tgt, label in targets:
                        score = 1.0 / (1.0 + np.exp(-np.dot(hidden, w_out[tgt])))
                        g = (score - label) * lr
                        loss_sum += -np.log(max(1e-10, score if label else 1 - score))
                        loss_n += 1
                        ghidden += g * w_out[tgt]
                        w_out[tgt] -= g * hidden
                w_in[rows] -= ghidden / len(rows)
        epoch_losses.append(loss_sum / max(1, loss_n))

    table = EmbeddingTable(dim=config.dim)
    for w, rows in zip(words, subword_rows):
        table.vectors[w] = w_in[rows].mean(axis=0)
    for g, i in gidx.items():
        table.ngrams[g] = w_in[nw + i]
    table.epoch_losses = epoch_losses  # type: ignore[attr-defined]
    return table.freeze()
