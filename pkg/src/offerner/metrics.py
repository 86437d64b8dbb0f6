"""Token-level evaluation: confusion counts, precision/recall/F1, reports.

Two aggregations are reported side by side:

* ``overall`` — global counts where every token lands in exactly one
  bucket: TP (gold == pred, not O), TN (gold == pred == O), FP (wrong
  prediction on a non-O tag), FN (wrong prediction that landed on O).
  Precision/recall/F1 follow from those global counts.
* ``micro`` — the standard aggregation: per-entity-tag tp/fp/fn summed
  over the six entity tags, then precision/recall/F1 on the sums.

The two differ in how cross-entity mistakes are charged: ``overall``
books a PRD-predicted-as-MERCH token once (as FP), ``micro`` charges it
to both tags (fp for MERCH, fn for PRD).

All 0/0 ratios are defined as 0.  Report rendering is byte
deterministic: fixed column layout, values to 4 decimal places.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .corpus import Dataset
from .tags import ENTITY_TAGS, Tag
from .validation import LengthMismatch


@dataclass
class ConfusionCounts:
    """Token-level confusion tallies; merge with ``update``."""

    overall_tp: int = 0
    overall_tn: int = 0
    overall_fp: int = 0
    overall_fn: int = 0
    tp: dict[Tag, int] = field(default_factory=lambda: {t: 0 for t in ENTITY_TAGS})
    fp: dict[Tag, int] = field(default_factory=lambda: {t: 0 for t in ENTITY_TAGS})
    fn: dict[Tag, int] = field(default_factory=lambda: {t: 0 for t in ENTITY_TAGS})

    @property
    def total(self) -> int:
        return self.overall_tp + self.overall_tn + self.overall_fp + self.overall_fn

    def update(self, other: "ConfusionCounts") -> None:
        self.overall_tp += other.overall_tp
        self.overall_tn += other.overall_tn
        self.overall_fp += other.overall_fp
        self.overall_fn += other.overall_fn
        for t in ENTITY_TAGS:
            self.tp[t] += other.tp[t]
            self.fp[t] += other.fp[t]
            self.fn[t] += other.fn[t]


def count(gold: list[Tag], pred: list[Tag]) -> ConfusionCounts:
    """Tally one sentence.

    Every token falls in exactly one of the four overall buckets; the
    per-tag tallies use the standard tp/fp/fn definitions over the six
    entity tags.
    """
    if len(gold) != len(pred):
        raise LengthMismatch(f"gold has {len(gold)} tags but pred has {len(pred)}")
    c = ConfusionCounts()
    for g, p in zip(gold, pred):
        if g == p:
            if g == Tag.O:
                c.overall_tn += 1
            else:
                c.overall_tp += 1
                c.tp[g] += 1
        else:
            if p == Tag.O:
                c.overall_fn += 1
            else:
                c.overall_fp += 1
                c.fp[p] += 1
            if g != Tag.O:
                c.fn[g] += 1
    return c


def prf(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    """Precision, recall, F1 with every 0/0 defined as 0."""
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = (
        2.0 * precision * recall / (precision + recall) if precision + recall else 0.0
    )
    return precision, recall, f1


@dataclass
class EvalReport:
    """Per-tag and aggregate scores plus the raw counts behind them."""

    counts: ConfusionCounts
    per_tag: dict[Tag, tuple[float, float, float]]
    overall: tuple[float, float, float]
    micro: tuple[float, float, float]

    @classmethod
    def from_counts(cls, counts: ConfusionCounts) -> "EvalReport":
        per_tag = {
            t: prf(counts.tp[t], counts.fp[t], counts.fn[t]) for t in ENTITY_TAGS
        }
        overall = prf(counts.overall_tp, counts.overall_fp, counts.overall_fn)
        micro = prf(
            sum(counts.tp.values()), sum(counts.fp.values()), sum(counts.fn.values())
        )
        return cls(counts=counts, per_tag=per_tag, overall=overall, micro=micro)

    def rows(self) -> list[tuple[str, tuple[float, float, float]]]:
        out = [(t.name, self.per_tag[t]) for t in ENTITY_TAGS]
        out.append(("overall", self.overall))
        out.append(("micro", self.micro))
        return out

    def as_table(self) -> str:
        """Human-readable fixed-width table."""
        c = self.counts
        lines = [f"{'tag':<10}{'precision':>10}{'recall':>10}{'f1':>10}"]
        for name, (p, r, f) in self.rows():
            lines.append(f"{name:<10}{p:>10.4f}{r:>10.4f}{f:>10.4f}")
        lines.append("")
        lines.append(
            f"tokens={c.total} TP={c.overall_tp} TN={c.overall_tn}"
            f" FP={c.overall_fp} FN={c.overall_fn}"
        )
        lines.append(
            "overall: global counts (errors predicted as an entity tag are FP,"
            " errors predicted as O are FN); micro: per-tag sums; 0/0 = 0"
        )
        return "\n".join(lines) + "\n"

    def as_lines(self) -> str:
        """Machine-readable metric<TAB>tag<TAB>value lines."""
        out = []
        for name, (p, r, f) in self.rows():
            out.append(f"precision\t{name}\t{p:.4f}")
            out.append(f"recall\t{name}\t{r:.4f}")
            out.append(f"f1\t{name}\t{f:.4f}")
        return "\n".join(out) + "\n"


def evaluate(tagger, dataset: Dataset) -> EvalReport:
    """Score a tagger over a dataset.

    ``tagger`` is either an object with ``sentence_tags(texts)`` or a
    callable texts -> list of Tag.
    """
    tag_fn = getattr(tagger, "sentence_tags", tagger)
    totals = ConfusionCounts()
    for sentence in dataset.sentences:
        pred = tag_fn(list(sentence.texts))
        totals.update(count(list(sentence.tags), [Tag(p) for p in pred]))
    return EvalReport.from_counts(totals)
