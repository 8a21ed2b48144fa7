import numpy as np
import pytest

from hcn.embeddings import (
    EmbeddingTable,
    FormatError,
    SkipgramConfig,
    char_ngrams,
    load_text_vectors,
    lookup,
    train_subword_skipgram,
    write_text_vectors,
)


def independent_ngrams(word):
    """Brute-force n-gram enumerator used as an oracle for lookup."""
    w = "<" + word + ">"
    return [w[i : i + n] for n in range(3, 7) for i in range(len(w)) if i + n <= len(w)]


class TestTextFormat:
    def test_header_file(self, tmp_path):
        p = tmp_path / "v.txt"
        p.write_text("2 3\nfoo 1.0 2.0 3.0\nbar 0.5 0.5 0.5\n")
        table = load_text_vectors(p)
        assert table.dim == 3 and len(table.vectors) == 2
        assert np.array_equal(table.vectors["foo"], [1, 2, 3])

    def test_headerless_file(self, tmp_path):
        p = tmp_path / "v.txt"
        p.write_text("foo 1.0 2.0\nbar 3.0 4.0\n")
        table = load_text_vectors(p)
        assert table.dim == 2

    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(0)
        vecs = {f"tok{i}": rng.standard_normal(4) for i in range(5)}
        p = tmp_path / "v.txt"
        write_text_vectors(vecs, 4, p)
        table = load_text_vectors(p)
        for k, v in vecs.items():
            assert np.array_equal(table.vectors[k], v)

    def test_ragged_rows_rejected(self, tmp_path):
        p = tmp_path / "v.txt"
        p.write_text("foo 1.0 2.0\nbar 3.0\n")
        with pytest.raises(FormatError, match="v.txt:2"):
            load_text_vectors(p)

    def test_duplicate_first_wins(self, tmp_path):
        p = tmp_path / "v.txt"
        p.write_text("foo 1.0\nfoo 2.0\n")
        with pytest.warns(UserWarning, match="duplicate"):
            table = load_text_vectors(p)
        assert table.vectors["foo"][0] == 1.0


class TestLookup:
    def test_known_verbatim(self):
        table = EmbeddingTable(dim=2, vectors={"a": np.array([1.0, 2.0])}).freeze()
        assert np.array_equal(lookup("a", table), [1.0, 2.0])

    def test_unknown_no_ngrams_zero(self):
        table = EmbeddingTable(dim=3).freeze()
        assert np.array_equal(lookup("mystery", table), np.zeros(3))

    def test_unknown_with_ngrams_matches_oracle(self):
        rng = np.random.default_rng(1)
        word = "paella"
        grams = {g: rng.standard_normal(4) for g in set(char_ngrams(word)) | {"xyz"}}
        table = EmbeddingTable(dim=4, ngrams=grams).freeze()
        oracle_grams = [grams[g] for g in independent_ngrams(word) if g in grams]
        assert np.allclose(lookup(word, table), np.mean(oracle_grams, axis=0))

    def test_ngram_extraction_matches_oracle(self):
        for word in ["a", "hi", "paella", "restaurant"]:
            assert char_ngrams(word) == independent_ngrams(word)


TOY = [["alpha", "beta", "mutual"]] * 30 + [["gamma", "delta", "strange"]] * 30


class TestSkipgram:
    def test_loss_decreases(self):
        table = train_subword_skipgram(TOY, SkipgramConfig(dim=8, epochs=5, seed=0))
        losses = table.epoch_losses
        assert losses[-1] < losses[0]

    def test_deterministic(self):
        cfg = SkipgramConfig(dim=8, epochs=2, seed=3)
        t1 = train_subword_skipgram(TOY, cfg)
        t2 = train_subword_skipgram(TOY, cfg)
        assert t1.checksum() == t2.checksum()

    def test_dim_300_default(self):
        table = train_subword_skipgram(TOY, SkipgramConfig(epochs=1))
        assert all(v.shape == (300,) for v in table.vectors.values())

    def test_cooccurrence_geometry(self):
        table = train_subword_skipgram(TOY, SkipgramConfig(dim=16, epochs=40, seed=0))

        def cos(a, b):
            va, vb = table.vectors[a], table.vectors[b]
            return float(va @ vb / (np.linalg.norm(va) * np.linalg.norm(vb)))

        assert cos("alpha", "beta") > cos("alpha", "gamma")

    def test_empty_corpus(self):
        with pytest.raises(ValueError):
            train_subword_skipgram([], SkipgramConfig())

    def test_frozen_checksum_stable(self):
        table = train_subword_skipgram(TOY, SkipgramConfig(dim=4, epochs=1))
        before = table.checksum()
        _ = lookup("alpha", table)
        _ = lookup("unseen_token", table)
        assert table.checksum() == before
