"""Per-token feature extraction for the conditional random field.

Each feature is an interned string key like ``w=off`` or ``pair=get|NUM``.
Which templates fire is controlled by :class:`FeatureConfig`; the word
form used inside features is lowercased, optionally lemma-substituted,
and optionally normalized (digit runs to NUM, date/time shapes to TIMEX).
"""

from __future__ import annotations

from dataclasses import dataclass, fields

from .tokenization import lemma, normalize_number, normalize_time, word_shape


@dataclass(frozen=True)
class FeatureConfig:
    """Feature-template switches; all on by default.

    ``use_shape`` stands in for part-of-speech features: the word shape
    is the coarse syntactic signal available without a POS model.
    """

    use_prev: bool = True
    use_next: bool = True
    use_shape: bool = True
    use_word_pairs: bool = True
    use_prev_sequences: bool = True
    use_next_sequences: bool = True
    use_lemmas: bool = True
    use_lemma_as_word: bool = True
    normalize_numbers: bool = True
    normalize_time: bool = True
    use_position: bool = True
    use_begin_sent: bool = True

    def to_line(self) -> str:
        """Serialize as comma-joined names of the active switches."""
        active = [f.name for f in fields(self) if getattr(self, f.name)]
        return ",".join(active)

    @classmethod
    def from_line(cls, line: str) -> "FeatureConfig":
        names = {f.name for f in fields(cls)}
        active = set()
        for name in filter(None, (p.strip() for p in line.split(","))):
            if name not in names:
                raise ValueError(f"unknown feature switch {name!r}")
            active.add(name)
        return cls(**{name: (name in active) for name in names})

    @classmethod
    def none(cls) -> "FeatureConfig":
        return cls(**{f.name: False for f in fields(cls)})


def _word_form(text: str, config: FeatureConfig) -> str:
    """The normalized word form used inside w=/prev_w=/pair features."""
    if config.normalize_time:
        timex = normalize_time(text)
        if timex is not None:
            return timex
    if config.normalize_numbers:
        num = normalize_number(text)
        if num is not None:
            return num
    if config.use_lemma_as_word:
        return lemma(text)
    return text.lower()


def _position_bucket(position: int, length: int) -> int:
    # Integer thirds: first token is its own bucket, the rest of the
    # sentence splits at L/3 and 2L/3.
    if position == 0:
        return 0
    if 3 * position <= length:
        return 1
    if 3 * position <= 2 * length:
        return 2
    return 3


def extract_features(texts: list[str], position: int, config: FeatureConfig) -> list[str]:
    """Feature keys for one token, in a fixed deterministic order.

    The current-word feature is always emitted; everything else follows
    the config switches.  Boundary positions simply omit the features
    that would reach outside the sentence.
    """
    n = len(texts)
    if not 0 <= position < n:
        raise IndexError(f"position {position} out of range for {n} tokens")
    cur = texts[position]
    w = _word_form(cur, config)

    feats = [f"w={w}"]
    if config.use_lemmas:
        feats.append(f"lemma={lemma(cur)}")
    if config.normalize_time and normalize_time(cur) is not None:
        feats.append("norm=TIMEX")
    elif config.normalize_numbers and normalize_number(cur) is not None:
        feats.append("norm=NUM")
    if config.use_shape:
        feats.append(f"shape={word_shape(cur)}")
    if config.use_begin_sent and position == 0:
        feats.append("begin_sent")
    if config.use_position:
        feats.append(f"pos_bucket={_position_bucket(position, n)}")

    if position > 0:
        prev = _word_form(texts[position - 1], config)
        if config.use_prev:
            feats.append(f"prev_w={prev}")
        if config.use_word_pairs:
            feats.append(f"pair={prev}|{w}")
        if config.use_prev_sequences and position > 1:
            prev2 = _word_form(texts[position - 2], config)
            feats.append(f"prevseq={prev2}|{prev}")
    if position < n - 1:
        nxt = _word_form(texts[position + 1], config)
        if config.use_next:
            feats.append(f"next_w={nxt}")
        if config.use_word_pairs:
            feats.append(f"pair={w}|{nxt}")
        if config.use_next_sequences and position < n - 2:
            nxt2 = _word_form(texts[position + 2], config)
            feats.append(f"nextseq={nxt}|{nxt2}")
    return feats
