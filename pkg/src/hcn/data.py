"""Dialog-bAbI Task 6 corpus handling.

Parses the numbered-line dialog format, delexicalizes system utterances
into action templates, and builds the vocabulary / bag-of-words features
shared by training and serving.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

SILENCE = "<silence>"
UNK = "<unk>"

# literal user-side silence marker used by the dataset files
SILENCE_MARKER = "<SILENCE>"

PLACEHOLDERS = ("<name>", "<phone>", "<address>", "<cuisine>", "<location>", "<price>", "<rating>")

# KB relation -> placeholder type; post_code values are folded into <address>
RELATION_TYPES = {
    "R_cuisine": "<cuisine>",
    "R_location": "<location>",
    "R_price": "<price>",
    "R_rating": "<rating>",
    "R_phone": "<phone>",
    "R_address": "<address>",
    "R_post_code": "<address>",
    "R_name": "<name>",
}

_SUFFIX_TYPES = (
    ("_post_code", "<address>"),
    ("_address", "<address>"),
    ("_phone", "<phone>"),
)

_STRIP = re.compile(r"^[^\w<']+|[^\w>']+$")


class ParseError(ValueError):
    pass


def tokenize(raw: str) -> list[str]:
    """Lowercase whitespace tokenization, stripping surrounding punctuation
    (apostrophes kept). The dataset's silence marker maps to SILENCE."""
    tokens = []
    for piece in raw.split():
        if piece == SILENCE_MARKER:
            tokens.append(SILENCE)
            continue
        piece = _STRIP.sub("", piece.lower())
        if piece:
            tokens.append(piece)
    return tokens


@dataclass
class KbFact:
    entity: str
    relation: str
    value: str


@dataclass
class Turn:
    raw_user: str
    raw_system: str
    user_tokens: list[str] = field(default_factory=list)
    template: str = ""
    gold_action: int = -1


@dataclass
class Dialogue:
    # source-order interleaving of Turn and KbFact records
    events: list = field(default_factory=list)

    @property
    def turns(self) -> list[Turn]:
        return [e for e in self.events if isinstance(e, Turn)]

    @property
    def kb_facts(self) -> list[KbFact]:
        return [e for e in self.events if isinstance(e, KbFact)]


def delexicalize(utterance: str, kb_facts: list[KbFact]) -> str:
    """Replace entity-value tokens with typed placeholders.

    Recognition: values seen in the dialogue's KB facts so far (typed by
    their relation), entity names, and lexical shapes of this corpus
    (underscore-joined restaurant ids, phone/address suffixes).
    """
    value_types: dict[str, str] = {}
    for fact in kb_facts:
        value_types.setdefault(fact.entity, "<name>")
        vtype = RELATION_TYPES.get(fact.relation)
        if vtype:
            value_types[fact.value] = vtype
    out = []
    for token in utterance.split():
        if token in PLACEHOLDERS:
            out.append(token)
            continue
        if token in value_types:
            out.append(value_types[token])
            continue
        replaced = None
        for suffix, vtype in _SUFFIX_TYPES:
            if token.endswith(suffix):
                replaced = vtype
                break
        if replaced is None and "_" in token and not token.startswith("R_") and token != "api_call":
            replaced = "<name>"
        out.append(replaced or token)
    return " ".join(out)


def parse_split(path: str | Path) -> list[Dialogue]:
    """Parse one bAbI dialog file into dialogues in file order.

    Lines are "<n> <user>\\t<system>" for turns and "<n> <entity>
    <relation> <value>" (no tab) for KB results; a blank line ends a
    dialogue.
    """
    dialogues: list[Dialogue] = []
    current: Dialogue | None = None
    expected = 1
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line.strip():
                if current is not None and current.events:
                    dialogues.append(current)
                current, expected = None, 1
                continue
            head, _, rest = line.partition(" ")
            if not head.isdigit():
                raise ParseError(f"{path}:{lineno}: line does not start with a number")
            num = int(head)
            if num == 1 and expected != 1:
                # files may omit the blank separator before a restart
                if current is not None and current.events:
                    dialogues.append(current)
                current, expected = None, 1
            if num != expected:
                raise ParseError(f"{path}:{lineno}: expected line number {expected}, got {num}")
            expected += 1
            if current is None:
                current = Dialogue()
            if "\t" in rest:
                user, _, system = rest.partition("\t")
                turn = Turn(raw_user=user, raw_system=system)
                turn.user_tokens = tokenize(user)
                turn.template = delexicalize(system, current.kb_facts)
                current.events.append(turn)
            else:
                parts = rest.split()
                if len(parts) != 3 or not all(parts):
                    raise ParseError(f"{path}:{lineno}: malformed KB line: {rest!r}")
                current.events.append(KbFact(*parts))
    if current is not None and current.events:
        dialogues.append(current)
    return dialogues


def serialize_split(dialogues: list[Dialogue]) -> str:
    lines = []
    for d in dialogues:
        for i, ev in enumerate(d.events, 1):
            if isinstance(ev, Turn):
                lines.append(f"{i} {ev.raw_user}\t{ev.raw_system}")
            else:
                lines.append(f"{i} {ev.entity} {ev.relation} {ev.value}")
        lines.append("")
    return "\n".join(lines) + ("\n" if lines else "")


@dataclass(frozen=True)
class ActionSet:
    """Frozen, lexicographically ordered catalog of action templates."""

    templates: tuple[str, ...]
    index: dict[str, int]

    @classmethod
    def build(cls, dialogues: list[Dialogue]) -> "ActionSet":
        if not dialogues:
            raise ValueError("cannot build an action set from an empty corpus")
        templates = tuple(sorted({t.template for d in dialogues for t in d.turns}))
        return cls(templates, {t: i for i, t in enumerate(templates)})

    @classmethod
    def from_templates(cls, templates: list[str]) -> "ActionSet":
        if len(set(templates)) != len(templates):
            raise ValueError("duplicate templates in action set")
        return cls(tuple(templates), {t: i for i, t in enumerate(templates)})

    def __len__(self):
        return len(self.templates)

    @property
    def unknown_id(self) -> int:
        """Reserved id for templates unseen in training; always a miss."""
        return len(self.templates)

    def action_of(self, template: str) -> int:
        return self.index.get(template, self.unknown_id)


def assign_actions(dialogues: list[Dialogue], actions: ActionSet) -> None:
    for d in dialogues:
        for t in d.turns:
            t.gold_action = actions.action_of(t.template)


@dataclass(frozen=True)
class Vocabulary:
    """Token catalog built from training-split user utterances only."""

    tokens: tuple[str, ...]
    index: dict[str, int]

    @classmethod
    def build(cls, dialogues: list[Dialogue]) -> "Vocabulary":
        seen = {SILENCE, UNK}
        body = set()
        for d in dialogues:
            for t in d.turns:
                body.update(tok for tok in t.user_tokens if tok not in seen)
        tokens = (SILENCE, UNK) + tuple(sorted(body))
        return cls(tokens, {t: i for i, t in enumerate(tokens)})

    @classmethod
    def from_tokens(cls, tokens: list[str]) -> "Vocabulary":
        return cls(tuple(tokens), {t: i for i, t in enumerate(tokens)})

    def __len__(self):
        return len(self.tokens)


def bow_vector(user_tokens: list[str], vocab: Vocabulary) -> np.ndarray:
    """Binary presence vector; unknown tokens flip only the UNK slot."""
    vec = np.zeros(len(vocab))
    unk = vocab.index[UNK]
    for tok in user_tokens:
        vec[vocab.index.get(tok, unk)] = 1.0
    return vec


def _sha256(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


@dataclass
class PreparedCorpus:
    train: list[Dialogue]
    dev: list[Dialogue]
    test: list[Dialogue]
    actions: ActionSet
    vocab: Vocabulary

    def split(self, name: str) -> list[Dialogue]:
        try:
            return {"train": self.train, "dev": self.dev, "test": self.test}[name]
        except KeyError:
            raise ValueError(f"unknown split {name!r}") from None

    @property
    def fingerprints(self) -> dict[str, str]:
        return {
            "actions": _sha256("\n".join(self.actions.templates)),
            "vocab": _sha256("\n".join(self.vocab.tokens)),
        }

    @classmethod
    def prepare(cls, train_path, dev_path, test_path) -> "PreparedCorpus":
        train = parse_split(train_path)
        dev = parse_split(dev_path)
        test = parse_split(test_path)
        actions = ActionSet.build(train)
        vocab = Vocabulary.build(train)
        for split in (train, dev, test):
            assign_actions(split, actions)
        return cls(train, dev, test, actions, vocab)

    def save(self, out_dir: str | Path) -> None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for name in ("train", "dev", "test"):
            (out / f"{name}.txt").write_text(serialize_split(self.split(name)), encoding="utf-8")
        (out / "templates.txt").write_text("\n".join(self.actions.templates) + "\n", encoding="utf-8")
        (out / "vocab.txt").write_text("\n".join(self.vocab.tokens) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, dir_path: str | Path) -> "PreparedCorpus":
        d = Path(dir_path)
        actions = ActionSet.from_templates(
            (d / "templates.txt").read_text(encoding="utf-8").splitlines()
        )
        vocab = Vocabulary.from_tokens((d / "vocab.txt").read_text(encoding="utf-8").splitlines())
        splits = {name: parse_split(d / f"{name}.txt") for name in ("train", "dev", "test")}
        for split in splits.values():
            assign_actions(split, actions)
        return cls(splits["train"], splits["dev"], splits["test"], actions, vocab)


def corpus_token_stream(dialogues: list[Dialogue]) -> list[list[str]]:
    """Tokenized user and system utterances, one sentence per entry."""
    out = []
    for d in dialogues:
        for t in d.turns:
            if t.user_tokens:
                out.append(t.user_tokens)
            sys_tokens = tokenize(t.raw_system)
            if sys_tokens:
                out.append(sys_tokens)
    return out
