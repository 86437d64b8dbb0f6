"""Greedy averaged-perceptron tagger.

The third base model is deliberately opaque: it emits one hard tag per
token and nothing else, so downstream consumers can never see a score
or a distribution from it.  Decoding is greedy left to right, feeding
each predicted tag into the next token's features.

Averaging uses the lazy-accumulation trick: weights are summed over
every token step (one step per token visited during training) and the
final model is that running-sum average, which a brute-force trace
reproduces exactly.
"""

from __future__ import annotations

import random

import numpy as np
from sklearn.base import BaseEstimator

from .tags import NUM_TAGS, Tag
from .tokenization import lemma, word_shape
from .validation import check_fitted, check_sequence_targets, check_sequences

#: Pseudo-tag fed to the features of the first one or two positions.
START_TAG = "START"


def gp_features(
    texts: list[str], position: int, prev_tag: str, prev2_tag: str
) -> list[str]:
    """Feature bag for one token given the two previous predicted tags.

    Covers the current, previous and next words, the current word's
    shape and lemma, the previous tag, and the previous tag bigram.
    ``prev_tag``/``prev2_tag`` are tag names or ``START`` before the
    sentence begins.
    """
    if not 0 <= position < len(texts):
        raise IndexError(f"position {position} out of range for {len(texts)} tokens")
    word = texts[position]
    prev_w = texts[position - 1].lower() if position > 0 else "<s>"
    next_w = texts[position + 1].lower() if position + 1 < len(texts) else "</s>"
    return [
        f"w={word.lower()}",
        f"shape={word_shape(word)}",
        f"lemma={lemma(word)}",
        f"prev_w={prev_w}",
        f"next_w={next_w}",
        f"prev_t={prev_tag}",
        f"prev_t2={prev2_tag}|{prev_tag}",
    ]


class GreedyTagger(BaseEstimator):
    """Averaged perceptron with a hard-label-only interface.

    Parameters
    ----------
    epochs : int
        Passes over the training sentences.
    seed : int
        Controls the per-epoch sentence shuffle.

    After fit: ``averaged_weights_`` (str -> (7,) float array) and
    ``update_count_`` (number of misprediction updates applied).
    """

    def __init__(self, epochs: int = 10, seed: int = 0):
        self.epochs = epochs
        self.seed = seed

    @classmethod
    def from_weights(cls, averaged: dict[str, np.ndarray]) -> "GreedyTagger":
        """Build a finalized tagger from explicit averaged weights."""
        est = cls()
        est.averaged_weights_ = {
            key: np.asarray(v, dtype=float) for key, v in averaged.items()
        }
        for v in est.averaged_weights_.values():
            if v.shape != (NUM_TAGS,):
                raise ValueError("each weight vector must have one entry per tag")
        est.update_count_ = 0
        return est

    @staticmethod
    def _scores(feats: list[str], weights: dict[str, np.ndarray]) -> np.ndarray:
        scores = np.zeros(NUM_TAGS)
        for f in feats:
            v = weights.get(f)
            if v is not None:
                scores += v
        return scores

    @classmethod
    def _decode(cls, texts: list[str], weights: dict[str, np.ndarray]) -> list[Tag]:
        """Greedy left-to-right decode; argmax ties go to the lower index."""
        prev, prev2 = START_TAG, START_TAG
        out: list[Tag] = []
        for i in range(len(texts)):
            feats = gp_features(texts, i, prev, prev2)
            pred = Tag(int(np.argmax(cls._scores(feats, weights))))
            out.append(pred)
            prev2, prev = prev, pred.name
        return out

    def fit(self, X, y) -> "GreedyTagger":
        """Train with misprediction updates, conditioning each token's
        features on the tags predicted so far (matching decode-time
        conditions).  Deterministic given the seed."""
        X = check_sequences(X)
        tags = check_sequence_targets(X, y)
        if not X:
            raise ValueError("training data must contain at least one sentence")

        weights: dict[str, np.ndarray] = {}
        totals: dict[str, np.ndarray] = {}
        stamps: dict[str, int] = {}
        step = 0
        updates = 0

        def touch(key: str) -> np.ndarray:
            # Bank the current value over the steps it was live, then
            # hand back the mutable vector.
            v = weights.get(key)
            if v is None:
                v = weights[key] = np.zeros(NUM_TAGS)
                totals[key] = np.zeros(NUM_TAGS)
                stamps[key] = step
            else:
                totals[key] += (step - stamps[key]) * v
                stamps[key] = step
            return v

        rng = random.Random(self.seed)
        order = list(range(len(X)))
        for _ in range(self.epochs):
            rng.shuffle(order)
            for si in order:
                texts, gold = X[si], tags[si]
                prev, prev2 = START_TAG, START_TAG
                for i in range(len(texts)):
                    step += 1
                    feats = gp_features(texts, i, prev, prev2)
                    pred = Tag(int(np.argmax(self._scores(feats, weights))))
                    if pred != gold[i]:
                        updates += 1
                        for f in feats:
                            v = touch(f)
                            v[gold[i]] += 1.0
                            v[pred] -= 1.0
                    prev2, prev = prev, pred.name

        averaged: dict[str, np.ndarray] = {}
        if step:
            for key, v in weights.items():
                # Value set during step s is part of snapshots s..step.
                total = totals[key] + (step - stamps[key] + 1) * v
                averaged[key] = total / step
        self.averaged_weights_ = averaged
        self.update_count_ = updates
        return self

    def sentence_tags(self, texts: list[str]) -> list[Tag]:
        """Hard tags for one sentence.  This is the only output this
        model exposes: no scores, no distributions."""
        check_fitted(self, "averaged_weights_")
        return self._decode(texts, self.averaged_weights_)

    def predict(self, X) -> list[list[str]]:
        X = check_sequences(X)
        return [[t.name for t in self.sentence_tags(texts)] for texts in X]
