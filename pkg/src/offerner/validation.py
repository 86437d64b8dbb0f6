"""Input validation helpers shared by the estimators.

X is always a list of sentences, each sentence a list of token strings;
y is a parallel list of tag-name lists.  These helpers normalize and
sanity-check that shape the way scikit-learn's ``check_X_y`` does for
arrays.
"""

from __future__ import annotations

from sklearn.exceptions import NotFittedError

from .tags import Tag


class LengthMismatch(ValueError):
    """Two parallel sequences that must have equal length do not."""


def check_sequences(X) -> list[list[str]]:
    """Validate X as a list of non-empty token-string lists."""
    if not isinstance(X, (list, tuple)):
        raise TypeError(f"X must be a list of token lists, got {type(X).__name__}")
    out = []
    for i, sent in enumerate(X):
        if not isinstance(sent, (list, tuple)) or not sent:
            raise ValueError(f"X[{i}] must be a non-empty list of token strings")
        for tok in sent:
            if not isinstance(tok, str) or not tok:
                raise ValueError(f"X[{i}] contains a non-string or empty token")
        out.append(list(sent))
    return out


def check_sequence_targets(X: list[list[str]], y) -> list[list[Tag]]:
    """Validate y against X and convert tag names to Tag values."""
    if len(y) != len(X):
        raise ValueError(f"X has {len(X)} sentences but y has {len(y)}")
    out = []
    for i, (sent, labels) in enumerate(zip(X, y)):
        if len(labels) != len(sent):
            raise ValueError(
                f"sentence {i}: {len(sent)} tokens but {len(labels)} labels"
            )
        try:
            out.append([lab if isinstance(lab, Tag) else Tag[lab] for lab in labels])
        except KeyError as exc:
            raise ValueError(f"sentence {i}: unknown tag name {exc.args[0]!r}") from None
    return out


def check_fitted(estimator, attribute: str) -> None:
    """Raise NotFittedError unless the estimator carries the given
    post-fit attribute."""
    if getattr(estimator, attribute, None) is None:
        raise NotFittedError(
            f"This {type(estimator).__name__} instance is not fitted yet; "
            "call fit before using this method."
        )
