"""Two-level stacking: base-model outputs in, one tag per token out.

Each token becomes a 15-dimensional vector: seven tag probabilities
from the CRF, seven from the BLSTM, and the hard tag index from the
greedy tagger.  A one-vs-rest linear classifier trained with hinge loss
maps that vector to the final tag.  The hard-label coordinate is scaled
by 1/6 into [0, 1] before training and prediction so the raw index
cannot dominate the hinge margins.
"""

from __future__ import annotations

import math
import random

import numpy as np
from sklearn.base import BaseEstimator

from .corpus import Dataset
from .tags import NUM_TAGS, Tag
from .tokenization import tokenize
from .validation import (
    LengthMismatch,
    check_fitted,
    check_sequence_targets,
    check_sequences,
)

#: Width of a stacked feature vector: 7 + 7 probabilities + 1 hard label.
STACK_DIM = 2 * NUM_TAGS + 1

#: Per-coordinate scaling applied before the linear model sees a vector.
DEFAULT_FEATURE_SCALE = tuple([1.0] * (STACK_DIM - 1) + [1.0 / (NUM_TAGS - 1)])


def assemble(crf_dist, blstm_dist, hard: Tag) -> np.ndarray:
    """Concatenate [crf probs (7), blstm probs (7), hard tag index].

    Both distributions must be non-negative and sum to 1 within 1e-6.
    """
    crf_dist = np.asarray(crf_dist, dtype=float)
    blstm_dist = np.asarray(blstm_dist, dtype=float)
    for name, dist in (("crf", crf_dist), ("blstm", blstm_dist)):
        if dist.shape != (NUM_TAGS,):
            raise ValueError(f"{name} distribution must have {NUM_TAGS} entries")
        if np.any(dist < 0) or abs(float(dist.sum()) - 1.0) > 1e-6:
            raise ValueError(f"{name} distribution is not a probability vector")
    out = np.empty(STACK_DIM)
    out[:NUM_TAGS] = crf_dist
    out[NUM_TAGS : 2 * NUM_TAGS] = blstm_dist
    out[2 * NUM_TAGS] = int(hard)
    return out


def build_stacking_set(crf, blstm, greedy, X, y) -> tuple[np.ndarray, list[Tag]]:
    """One (vector, gold tag) pair per token, in corpus order.

    The three base models are queried through their narrowest public
    interfaces: marginal distributions from the CRF and BLSTM, bare
    tags from the greedy model.
    """
    X = check_sequences(X)
    tags = check_sequence_targets(X, y)
    vectors: list[np.ndarray] = []
    labels: list[Tag] = []
    for texts, gold in zip(X, tags):
        crf_dists = crf.sentence_marginals(texts)
        blstm_dists = blstm.sentence_probs(texts)
        hard = greedy.sentence_tags(texts)
        for i in range(len(texts)):
            vectors.append(assemble(crf_dists[i], blstm_dists[i], hard[i]))
            labels.append(gold[i])
    stacked = np.array(vectors) if vectors else np.zeros((0, STACK_DIM))
    return stacked, labels


class StackClassifier(BaseEstimator):
    """One-vs-rest linear hinge-loss classifier over stack vectors.

    Each of the 7 tags gets a weight vector and bias trained against
    all other tags.  Training is stochastic subgradient descent with a
    global-step learning-rate decay of 1/sqrt(t); the objective is

        mean_n sum_c max(0, 1 - y_nc * s_nc) + l2_lambda * sum_c ||w_c||^2

    with y_nc = +1 when sample n has tag c, else -1.

    After fit: ``weights_`` (7, 15), ``biases_`` (7,),
    ``objective_history_`` (per-epoch objective on the training set).
    """

    def __init__(
        self,
        learning_rate: float = 0.05,
        l2_lambda: float = 1e-4,
        epochs: int = 20,
        seed: int = 0,
        feature_scale: tuple[float, ...] = DEFAULT_FEATURE_SCALE,
    ):
        self.learning_rate = learning_rate
        self.l2_lambda = l2_lambda
        self.epochs = epochs
        self.seed = seed
        self.feature_scale = feature_scale

    @classmethod
    def from_weights(
        cls,
        weights: np.ndarray,
        biases: np.ndarray,
        feature_scale: tuple[float, ...] = DEFAULT_FEATURE_SCALE,
        l2_lambda: float = 1e-4,
    ) -> "StackClassifier":
        est = cls(feature_scale=feature_scale, l2_lambda=l2_lambda)
        est.weights_ = np.asarray(weights, dtype=float)
        est.biases_ = np.asarray(biases, dtype=float)
        if est.weights_.shape != (NUM_TAGS, STACK_DIM) or est.biases_.shape != (NUM_TAGS,):
            raise ValueError("weights must be (7, 15) and biases (7,)")
        return est

    def _scale(self) -> np.ndarray:
        scale = np.asarray(self.feature_scale, dtype=float)
        if scale.shape != (STACK_DIM,) or np.any(scale <= 0):
            raise ValueError(f"feature_scale must be {STACK_DIM} positive factors")
        return scale

    def _objective(self, Xs: np.ndarray, signed: np.ndarray) -> float:
        scores = Xs @ self.weights_.T + self.biases_
        hinge = np.maximum(0.0, 1.0 - signed * scores).sum(axis=1).mean()
        return float(hinge + self.l2_lambda * np.sum(self.weights_ ** 2))

    def fit(self, X, y) -> "StackClassifier":
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != STACK_DIM:
            raise ValueError(f"X must be (n, {STACK_DIM})")
        if X.shape[0] != len(y):
            raise LengthMismatch(f"{X.shape[0]} vectors but {len(y)} labels")
        if X.shape[0] == 0:
            raise LengthMismatch("stacking set is empty")
        labels = np.array([int(t) for t in y], dtype=np.int64)

        scale = self._scale()
        Xs = X * scale
        signed = np.full((X.shape[0], NUM_TAGS), -1.0)
        signed[np.arange(X.shape[0]), labels] = 1.0

        self.weights_ = np.zeros((NUM_TAGS, STACK_DIM))
        self.biases_ = np.zeros(NUM_TAGS)
        rng = random.Random(self.seed)
        order = list(range(X.shape[0]))
        step = 0
        history = []
        for _ in range(self.epochs):
            rng.shuffle(order)
            for n in order:
                step += 1
                lr = self.learning_rate / math.sqrt(step)
                xs = Xs[n]
                ys = signed[n]
                scores = self.weights_ @ xs + self.biases_
                active = ys * scores < 1.0
                self.weights_ -= lr * 2.0 * self.l2_lambda * self.weights_
                if np.any(active):
                    self.weights_[active] += lr * ys[active, None] * xs[None, :]
                    self.biases_[active] += lr * ys[active]
            history.append(self._objective(Xs, signed))
        self.objective_history_ = history
        return self

    def predict_one(self, vector) -> Tag:
        """Tag for one stack vector; score ties go to the lower index."""
        check_fitted(self, "weights_")
        xs = np.asarray(vector, dtype=float) * self._scale()
        scores = self.weights_ @ xs + self.biases_
        return Tag(int(np.argmax(scores)))

    def predict(self, X) -> np.ndarray:
        check_fitted(self, "weights_")
        Xs = np.asarray(X, dtype=float) * self._scale()
        scores = Xs @ self.weights_.T + self.biases_
        return np.argmax(scores, axis=1)


class HybridTagger(BaseEstimator):
    """Stacked tagger: three base models and a second-level classifier.

    The two training sets must be disjoint halves of the same corpus:
    the base models fit on the first, the stack classifier fits on the
    second (over base-model outputs), so the stacker sees honest
    generalization behavior rather than memorized training outputs.
    """

    def __init__(self, crf=None, blstm=None, greedy=None, svm=None):
        self.crf = crf
        self.blstm = blstm
        self.greedy = greedy
        self.svm = svm

    def _require_parts(self):
        for name in ("crf", "blstm", "greedy", "svm"):
            if getattr(self, name) is None:
                raise ValueError(f"hybrid tagger is missing its {name} part")

    def fit(self, X1, y1, X2, y2) -> "HybridTagger":
        """Fit base models on (X1, y1), the stacker on (X2, y2)."""
        self._require_parts()
        self.crf.fit(X1, y1)
        self.blstm.fit(X1, y1)
        self.greedy.fit(X1, y1)
        return self.fit_stacker(X2, y2)

    def fit_stacker(self, X2, y2) -> "HybridTagger":
        """Fit only the second-level classifier over already-fitted
        base models."""
        self._require_parts()
        l_X, l_Y = build_stacking_set(self.crf, self.blstm, self.greedy, X2, y2)
        self.svm.fit(l_X, l_Y)
        self.fitted_ = True
        return self

    def fit_datasets(self, first: Dataset, second: Dataset) -> "HybridTagger":
        return self.fit(
            first.token_lists(), first.tag_lists(),
            second.token_lists(), second.tag_lists(),
        )

    def sentence_tags(self, texts: list[str]) -> list[Tag]:
        self._require_parts()
        if not texts:
            return []
        crf_dists = self.crf.sentence_marginals(texts)
        blstm_dists = self.blstm.sentence_probs(texts)
        hard = self.greedy.sentence_tags(texts)
        return [
            self.svm.predict_one(assemble(crf_dists[i], blstm_dists[i], hard[i]))
            for i in range(len(texts))
        ]

    def tag_text(self, text: str) -> list[tuple[str, Tag]]:
        """Tokenize raw text and tag it; empty text gives an empty list."""
        tokens = tokenize(text)
        if not tokens:
            return []
        texts = [t.text for t in tokens]
        return list(zip(texts, self.sentence_tags(texts)))

    def predict(self, X) -> list[list[str]]:
        X = check_sequences(X)
        return [[t.name for t in self.sentence_tags(texts)] for texts in X]
