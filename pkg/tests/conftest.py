"""Shared fixtures: a small lexicon and templates covering all six
entity slots, plus a bloated toy corpus the model tests train on."""

import pytest

from offerner.corpus import (
    Dataset,
    SlotLexicon,
    bloat,
    combine,
    parse_template,
)
from offerner.tags import Tag


@pytest.fixture
def lexicon():
    # Amount values deliberately overlap across OAMT/MIN_AMT/MAX_AMT so
    # taggers must rely on context, and one value per slot is
    # multi-token to exercise flat multi-token tagging.
    return SlotLexicon(
        values={
            Tag.OAMT: ["20%", "50%", "Rs.100"],
            Tag.OTYPE: ["off", "cashback"],
            Tag.MIN_AMT: ["Rs.500", "Rs.999"],
            Tag.MAX_AMT: ["Rs.100", "Rs.150"],
            Tag.PRD: ["pizzas", "movie tickets"],
            Tag.MERCH: ["Dominos", "Pizza Hut"],
        }
    )


@pytest.fixture
def templates():
    lines = [
        "Get OAMT OTYPE on PRD at MERCH",
        "OAMT OTYPE on orders above MIN_AMT",
        "Flat OAMT OTYPE up to MAX_AMT at MERCH",
        "Use code SAVE for OAMT OTYPE on PRD orders above MIN_AMT",
    ]
    return [parse_template(line) for line in lines]


@pytest.fixture
def toy_corpus(lexicon, templates):
    """A deterministic 40-sentence corpus touching every tag."""
    sentences = []
    for j, template in enumerate(templates):
        sentences.extend(bloat(template, lexicon, count=10, seed=100 + j))
    return Dataset(name="toy", sentences=sentences)


@pytest.fixture
def toy_split(toy_corpus):
    """(train, heldout) halves of the toy corpus, seeded."""
    from offerner.corpus import split_half

    return split_half(toy_corpus, seed=7)


def as_xy(dataset):
    """Dataset -> (X, y) in the estimator API's list-of-lists shape."""
    return dataset.token_lists(), dataset.tag_lists()


@pytest.fixture
def xy(toy_corpus):
    return as_xy(toy_corpus)
