"""Labeled-corpus machinery: offer templates, lexicon-driven bloating,
and the TSV dataset format shared by every tagger.

An offer template is a skeleton like ``Get OAMT OTYPE on PRD at MERCH``;
bloating replaces each entity slot with values sampled from a lexicon to
produce many concrete, token-labeled sentences.  Datasets are lists of
tagged sentences and round-trip losslessly through a two-column TSV
format (token TAB tag, blank line between sentences).
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from pathlib import Path

from .tags import ENTITY_TAGS, Tag
from .tokenization import Token, make_token, tokenize


class CorpusError(Exception):
    """Base class for corpus construction and file-format errors."""


class EmptyTemplate(CorpusError):
    """A template line contained no elements."""


class MissingLexiconEntry(CorpusError):
    """A template slot has no values in the lexicon."""

    def __init__(self, tag: Tag):
        self.tag = tag
        super().__init__(f"lexicon has no values for slot tag {tag.name}")


class MalformedLine(CorpusError):
    """A dataset, template, or lexicon file line could not be parsed."""

    def __init__(self, lineno: int, message: str):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {message}")


class TooSmall(CorpusError):
    """A dataset is too small for the requested operation."""


@dataclass(frozen=True)
class TaggedSentence:
    """Parallel token/tag sequences; the unit every model consumes."""

    tokens: tuple[Token, ...]
    tags: tuple[Tag, ...]

    def __post_init__(self):
        if len(self.tokens) != len(self.tags) or not self.tokens:
            raise ValueError("tokens and tags must be equal-length and non-empty")

    @property
    def texts(self) -> list[str]:
        return [t.text for t in self.tokens]

    def __len__(self) -> int:
        return len(self.tokens)


@dataclass(frozen=True)
class OfferTemplate:
    """Ordered mix of literal text pieces and entity slots.

    Each element is ``("lit", text)`` or ``("slot", Tag)``; slot tags are
    always one of the six entity tags, never O.
    """

    elements: tuple[tuple[str, object], ...]

    @property
    def slot_tags(self) -> list[Tag]:
        return [v for kind, v in self.elements if kind == "slot"]

    def render_line(self) -> str:
        """Reproduce the normalized template line this was parsed from."""
        parts = []
        for kind, value in self.elements:
            parts.append(value.name if kind == "slot" else value)
        return " ".join(parts)


@dataclass
class SlotLexicon:
    """Surface strings available for each entity slot."""

    values: dict[Tag, list[str]] = field(default_factory=dict)

    def sample(self, tag: Tag, rng: random.Random) -> str:
        options = self.values.get(tag)
        if not options:
            raise MissingLexiconEntry(tag)
        return options[rng.randrange(len(options))]


@dataclass
class Dataset:
    """A named list of tagged sentences."""

    name: str
    sentences: list[TaggedSentence] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.sentences)

    def token_lists(self) -> list[list[str]]:
        """Token texts per sentence, the X of the estimator API."""
        return [s.texts for s in self.sentences]

    def tag_lists(self) -> list[list[str]]:
        """Tag names per sentence, the y of the estimator API."""
        return [[t.name for t in s.tags] for s in self.sentences]


_TAG_TOKENS = {t.name: t for t in ENTITY_TAGS}


def parse_template(line: str) -> OfferTemplate:
    """Parse one whitespace-separated template line.

    A token exactly matching an entity tag name becomes a slot; anything
    else is literal text.  A bare ``O`` is rejected: it is not a slot
    tag, and writing it in a template is always a mistake.
    """
    elements: list[tuple[str, object]] = []
    for word in line.split():
        if word in _TAG_TOKENS:
            elements.append(("slot", _TAG_TOKENS[word]))
        elif word == Tag.O.name:
            raise CorpusError("O is not a slot tag and cannot appear in a template")
        else:
            elements.append(("lit", word))
    if not elements:
        raise EmptyTemplate("template line has no elements")
    return OfferTemplate(tuple(elements))


def bloat(
    template: OfferTemplate,
    lexicon: SlotLexicon,
    count: int,
    seed: int,
) -> list[TaggedSentence]:
    """Expand a template into ``count`` labeled sentences.

    Each slot is filled with a value sampled uniformly (with replacement,
    independently per sentence) from the lexicon; literal tokens carry O
    and every token rendered from a slot value carries the slot's tag.
    The same (template, lexicon, count, seed) always produces the same
    sentences.
    """
    if count < 1:
        raise ValueError("count must be positive")
    for tag in template.slot_tags:
        if not lexicon.values.get(tag):
            raise MissingLexiconEntry(tag)

    rng = random.Random(seed)
    sentences = []
    for _ in range(count):
        texts: list[str] = []
        tags: list[Tag] = []
        for kind, value in template.elements:
            if kind == "lit":
                piece_tokens = tokenize(value)
                piece_tag = Tag.O
            else:
                piece_tokens = tokenize(lexicon.sample(value, rng))
                piece_tag = value
            texts.extend(tok.text for tok in piece_tokens)
            tags.extend(piece_tag for _ in piece_tokens)
        tokens = tuple(
            make_token(text, is_sentence_start=(i == 0)) for i, text in enumerate(texts)
        )
        sentences.append(TaggedSentence(tokens=tokens, tags=tuple(tags)))
    return sentences


def combine(datasets: list[Dataset], name: str) -> Dataset:
    """Concatenate datasets in the given order under a new name."""
    if not datasets:
        raise ValueError("need at least one dataset to combine")
    sentences: list[TaggedSentence] = []
    for ds in datasets:
        sentences.extend(ds.sentences)
    return Dataset(name=name, sentences=sentences)


def split_half(dataset: Dataset, seed: int) -> tuple[Dataset, Dataset]:
    """Shuffle sentences with the given seed and cut into two halves.

    The first half gets ceil(n/2) sentences.  Together the halves are a
    permutation of the input; no sentence is lost or duplicated.
    """
    n = len(dataset.sentences)
    if n < 2:
        raise TooSmall(f"cannot split dataset of {n} sentences")
    order = list(range(n))
    random.Random(seed).shuffle(order)
    cut = math.ceil(n / 2)
    first = [dataset.sentences[i] for i in order[:cut]]
    second = [dataset.sentences[i] for i in order[cut:]]
    return (
        Dataset(name=f"{dataset.name}1", sentences=first),
        Dataset(name=f"{dataset.name}2", sentences=second),
    )


def save_tsv(dataset: Dataset, path: str | Path) -> None:
    """Write token TAB tag lines, one blank line after each sentence."""
    lines = []
    for sentence in dataset.sentences:
        for token, tag in zip(sentence.tokens, sentence.tags):
            lines.append(f"{token.text}\t{tag.name}\n")
        lines.append("\n")
    Path(path).write_text("".join(lines), encoding="utf-8")


def load_tsv(path: str | Path, name: str | None = None) -> Dataset:
    """Read a dataset saved by :func:`save_tsv`.

    The dataset name defaults to the file stem.  Raises MalformedLine on
    a wrong column count or an unknown tag name.
    """
    path = Path(path)
    sentences: list[TaggedSentence] = []
    texts: list[str] = []
    tags: list[Tag] = []

    def flush():
        nonlocal texts, tags
        if texts:
            tokens = tuple(
                make_token(t, is_sentence_start=(i == 0)) for i, t in enumerate(texts)
            )
            sentences.append(TaggedSentence(tokens=tokens, tags=tuple(tags)))
            texts, tags = [], []

    with path.open(encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line:
                flush()
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise MalformedLine(lineno, f"expected 2 tab-separated columns, got {len(parts)}")
            text, tag_name = parts
            if not text:
                raise MalformedLine(lineno, "empty token")
            try:
                tag = Tag[tag_name]
            except KeyError:
                raise MalformedLine(lineno, f"unknown tag name {tag_name!r}") from None
            texts.append(text)
            tags.append(tag)
    flush()
    return Dataset(name=name if name is not None else path.stem, sentences=sentences)


def load_templates(path: str | Path) -> list[OfferTemplate]:
    """Read a template file: one template per line, ``#`` comments."""
    templates = []
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            templates.append(parse_template(line))
        except EmptyTemplate as exc:
            raise MalformedLine(lineno, str(exc)) from None
    return templates


def load_lexicon(path: str | Path) -> SlotLexicon:
    """Read a lexicon file: ``TAG<TAB>value`` per line, ``#`` comments.

    Values must tokenize to at least one token so every slot fill
    contributes tokens to the sentence.
    """
    lexicon = SlotLexicon()
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.rstrip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t", 1)
        if len(parts) != 2:
            raise MalformedLine(lineno, "expected TAG<TAB>value")
        tag_name, value = parts[0].strip(), parts[1].strip()
        try:
            tag = Tag[tag_name]
        except KeyError:
            raise MalformedLine(lineno, f"unknown tag name {tag_name!r}") from None
        if tag is Tag.O:
            raise MalformedLine(lineno, "O cannot have lexicon values")
        if not tokenize(value):
            raise MalformedLine(lineno, "lexicon value tokenizes to nothing")
        lexicon.values.setdefault(tag, []).append(value)
    return lexicon
