import numpy as np
import pytest
from hypothesis import given, strategies as st

from hcn import data
from hcn.data import (
    ActionSet,
    KbFact,
    PreparedCorpus,
    Vocabulary,
    bow_vector,
    delexicalize,
    parse_split,
    serialize_split,
    tokenize,
)


class TestTokenize:
    def test_punctuation_stripped(self):
        assert tokenize("Hello, World!") == ["hello", "world"]

    def test_silence_marker(self):
        assert tokenize("<SILENCE>") == [data.SILENCE]

    def test_empty(self):
        assert tokenize("") == []

    def test_apostrophe_kept(self):
        assert tokenize("don't go") == ["don't", "go"]

    @given(st.text())
    def test_never_raises_and_lowercases(self, s):
        for tok in tokenize(s):
            assert tok == tok.lower()


class TestDelexicalize:
    KB = [
        KbFact("rome_house", "R_cuisine", "italian"),
        KbFact("rome_house", "R_phone", "rome_house_phone"),
    ]

    def test_kb_value_replaced(self):
        out = delexicalize("rome_house serves italian food", self.KB)
        assert out == "<name> serves <cuisine> food"

    def test_suffix_patterns_without_kb(self):
        assert delexicalize("call some_place_phone now", []) == "call <phone> now"
        assert delexicalize("it is at some_place_address", []) == "it is at <address>"

    def test_id_shape_replaced(self):
        assert delexicalize("the_golden_curry is nice", []) == "<name> is nice"

    def test_no_entities_unchanged(self):
        s = "how may i help you ?"
        assert delexicalize(s, self.KB) == s

    def test_idempotent(self):
        once = delexicalize("rome_house is at rome_house_address", self.KB)
        assert delexicalize(once, self.KB) == once

    def test_api_call_token_survives(self):
        assert delexicalize("api_call italian north cheap", self.KB).startswith("api_call ")


class TestParseSplit:
    def test_counts_and_round_trip(self, synth_paths, tmp_path):
        dialogues = parse_split(synth_paths["train"])
        assert len(dialogues) == 40
        text = serialize_split(dialogues)
        back = (tmp_path / "rt.txt")
        back.write_text(text, encoding="utf-8")
        again = parse_split(back)
        assert serialize_split(again) == text
        assert [len(d.turns) for d in again] == [len(d.turns) for d in dialogues]

    def test_kb_lines_not_turns(self, synth_paths):
        d = parse_split(synth_paths["train"])[0]
        assert len(d.kb_facts) == 5
        assert all(f.entity and f.relation and f.value for f in d.kb_facts)

    def test_empty_file(self, tmp_path):
        p = tmp_path / "empty.txt"
        p.write_text("")
        assert parse_split(p) == []

    def test_bad_numbering(self, tmp_path):
        p = tmp_path / "bad.txt"
        p.write_text("1 hi\thello\n3 bye\tbye\n")
        with pytest.raises(data.ParseError, match="bad.txt:2"):
            parse_split(p)

    def test_restart_without_blank_line(self, tmp_path):
        p = tmp_path / "nb.txt"
        p.write_text("1 hi\thello\n1 hi\thello\n")
        assert len(parse_split(p)) == 2


class TestActionSet:
    def test_bijection(self, corpus):
        for i, t in enumerate(corpus.actions.templates):
            assert corpus.actions.index[t] == i
            assert corpus.actions.action_of(t) == i

    def test_sorted_and_unique(self, corpus):
        ts = corpus.actions.templates
        assert list(ts) == sorted(set(ts))

    def test_singleton(self, tmp_path):
        p = tmp_path / "one.txt"
        p.write_text("1 hi\thello there\n2 hi again\thello there\n\n")
        acts = ActionSet.build(parse_split(p))
        assert len(acts) == 1

    def test_empty_corpus_rejected(self):
        with pytest.raises(ValueError):
            ActionSet.build([])

    def test_unknown_template_maps_to_reserved_id(self, corpus):
        assert corpus.actions.action_of("never seen before") == corpus.actions.unknown_id
        assert corpus.actions.unknown_id == len(corpus.actions)


class TestVocabulary:
    def test_specials_present(self, corpus):
        assert data.SILENCE in corpus.vocab.index
        assert data.UNK in corpus.vocab.index

    def test_deterministic(self, synth_paths):
        a = PreparedCorpus.prepare(synth_paths["train"], synth_paths["dev"], synth_paths["test"])
        b = PreparedCorpus.prepare(synth_paths["train"], synth_paths["dev"], synth_paths["test"])
        assert a.vocab.tokens == b.vocab.tokens
        assert a.actions.templates == b.actions.templates

    def test_train_only(self, corpus):
        # every vocab token beyond the specials occurs in a training user turn
        train_tokens = {t for d in corpus.train for turn in d.turns for t in turn.user_tokens}
        for tok in corpus.vocab.tokens[2:]:
            assert tok in train_tokens


class TestBow:
    def test_empty_all_zero(self, corpus):
        assert not bow_vector([], corpus.vocab).any()

    def test_presence_semantics(self):
        vocab = Vocabulary.from_tokens([data.SILENCE, data.UNK, "a", "b", "c"])
        vec = bow_vector(["a", "c", "c"], vocab)
        assert np.array_equal(vec, [0, 0, 1, 0, 1])

    def test_unknown_hits_unk_slot(self):
        vocab = Vocabulary.from_tokens([data.SILENCE, data.UNK, "a"])
        vec = bow_vector(["zzz", "qqq"], vocab)
        assert np.array_equal(vec, [0, 1, 0])


class TestPreparedCorpus:
    def test_save_load_round_trip(self, corpus, tmp_path):
        corpus.save(tmp_path / "prep")
        again = PreparedCorpus.load(tmp_path / "prep")
        assert again.actions.templates == corpus.actions.templates
        assert again.vocab.tokens == corpus.vocab.tokens
        assert again.fingerprints == corpus.fingerprints
        a = [t.gold_action for d in corpus.test for t in d.turns]
        b = [t.gold_action for d in again.test for t in d.turns]
        assert a == b

    def test_save_deterministic_bytes(self, corpus, tmp_path):
        corpus.save(tmp_path / "p1")
        corpus.save(tmp_path / "p2")
        for name in ("train.txt", "templates.txt", "vocab.txt"):
            assert (tmp_path / "p1" / name).read_bytes() == (tmp_path / "p2" / name).read_bytes()

    def test_every_turn_has_valid_action(self, corpus):
        for split in (corpus.train, corpus.dev, corpus.test):
            for d in split:
                for t in d.turns:
                    assert 0 <= t.gold_action <= corpus.actions.unknown_id
