"""The closed tag set used by every model in this package.

Seven labels: six offer entities plus ``O`` for tokens we are not
interested in.  The integer indices are fixed and shared by every model
file, stacking vector, and report; changing them invalidates all
serialized models.
"""

from enum import IntEnum


class Tag(IntEnum):
    """Token label with a fixed integer index."""

    OAMT = 0      # offer amount
    OTYPE = 1     # offer type (discount, cashback, voucher)
    MIN_AMT = 2   # minimum purchase amount for the offer to apply
    MAX_AMT = 3   # cap on the offer amount
    PRD = 4       # product the offer applies to
    MERCH = 5     # merchant providing the offer
    O = 6         # anything else


NUM_TAGS = len(Tag)

#: The six labels that mark actual offer entities (everything except O).
ENTITY_TAGS = tuple(t for t in Tag if t is not Tag.O)

#: Names in index order, for file headers and reports.
TAG_NAMES = tuple(t.name for t in Tag)


def tag_from_name(name: str) -> Tag:
    """Look up a tag by its name, raising ``KeyError`` on unknown names."""
    return Tag[name]
