"""Deterministic word-level tokenizer and per-token surface attributes.

The tokenizer is intentionally simple so that corpora are bit-identical
across machines: text is split on whitespace, and inside each chunk every
non-alphanumeric character becomes its own single-character token while
maximal alphanumeric runs stay together.  Concatenating the emitted token
texts reproduces the input with all whitespace removed.
"""

from __future__ import annotations

import re
from dataclasses import dataclass


@dataclass(frozen=True)
class Token:
    """One token plus the surface attributes feature extractors use.

    ``lower`` and ``shape`` are derived from ``text``;
    ``is_sentence_start`` is positional (true only for the first token).
    """

    text: str
    lower: str
    shape: str
    is_sentence_start: bool = False


def word_shape(text: str) -> str:
    """Compress a token into a shape over {X, x, d, p}.

    Consecutive characters of the same class (uppercase, lowercase,
    digit, punctuation/other) collapse into a single symbol, so
    "Dominos" -> "Xx", "20" -> "d", "Rs" -> "Xx", "%" -> "p".
    """
    out = []
    for ch in text:
        if ch.isupper():
            cls = "X"
        elif ch.islower():
            cls = "x"
        elif ch.isdigit():
            cls = "d"
        else:
            cls = "p"
        if not out or out[-1] != cls:
            out.append(cls)
    return "".join(out)


def make_token(text: str, is_sentence_start: bool = False) -> Token:
    """Build a Token, deriving ``lower`` and ``shape`` from the text."""
    if not text:
        raise ValueError("token text must be non-empty")
    return Token(
        text=text,
        lower=text.lower(),
        shape=word_shape(text),
        is_sentence_start=is_sentence_start,
    )


def _split_chunk(chunk: str) -> list[str]:
    """Split one whitespace-free chunk into alphanumeric runs and
    single punctuation characters."""
    pieces = []
    run = []
    for ch in chunk:
        if ch.isalnum():
            run.append(ch)
        else:
            if run:
                pieces.append("".join(run))
                run = []
            pieces.append(ch)
    if run:
        pieces.append("".join(run))
    return pieces


def tokenize(text: str) -> list[Token]:
    """Tokenize a sentence; empty or whitespace-only input gives ``[]``.

    The first emitted token carries ``is_sentence_start=True``.
    """
    texts: list[str] = []
    for chunk in text.split():
        texts.extend(_split_chunk(chunk))
    return [make_token(t, is_sentence_start=(i == 0)) for i, t in enumerate(texts)]


_SUFFIXES = ("ing", "ed", "es", "s")

_TIMEX_RE = re.compile(r"^(\d{1,2}[/-]\d{1,2}([/-]\d{2,4})?|\d{1,2}:\d{2})$")


def lemma(text: str) -> str:
    """Lowercase and strip one common inflectional suffix.

    A suffix is stripped only when the remaining stem has at least three
    characters; longest suffix wins ("boxes" -> "box", not "boxe").
    """
    low = text.lower()
    for suf in _SUFFIXES:
        if low.endswith(suf) and len(low) - len(suf) >= 3:
            return low[: -len(suf)]
    return low


def normalize_number(text: str) -> str | None:
    """Return "NUM" for all-digit tokens, else None."""
    return "NUM" if text.isdigit() else None


def normalize_time(text: str) -> str | None:
    """Return "TIMEX" for date-like (d/m, d-m-(yy)yy) or hh:mm tokens,
    else None."""
    return "TIMEX" if _TIMEX_RE.match(text) else None
