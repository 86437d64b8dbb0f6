"""Linear-chain conditional random field over the seven-tag set.

Emission potentials come from interned string features, transition
potentials from a (tags+1) x tags table whose extra row holds the
virtual start scores.  Inference runs in log space: forward-backward
for per-token tag distributions, Viterbi (ties toward the lower tag
index) for hard decodes.  Training is mini-batch gradient ascent on the
L2-regularized conditional log-likelihood.
"""

from __future__ import annotations

import math
import random

import numpy as np
from scipy.special import logsumexp
from sklearn.base import BaseEstimator

from .features import FeatureConfig, extract_features
from .tags import NUM_TAGS, Tag
from .validation import check_fitted, check_sequence_targets, check_sequences

#: Row index of the virtual start state in the transition table.
START = NUM_TAGS


def lattice_marginals(emissions: np.ndarray, transitions: np.ndarray):
    """Forward-backward over one sentence lattice.

    Args:
        emissions: (L, T) per-position tag scores.
        transitions: (T+1, T) tag-to-tag scores, last row = start scores.

    Returns:
        (marginals, pairwise, log_z): (L, T) per-position distributions,
        (L-1, T, T) pairwise distributions, and the log partition value.
    """
    L, T = emissions.shape
    trans = transitions[:T]
    start = transitions[START]

    log_alpha = np.empty((L, T))
    log_alpha[0] = start + emissions[0]
    for i in range(1, L):
        log_alpha[i] = emissions[i] + logsumexp(
            log_alpha[i - 1][:, None] + trans, axis=0
        )
    log_z = logsumexp(log_alpha[-1])

    log_beta = np.zeros((L, T))
    for i in range(L - 2, -1, -1):
        log_beta[i] = logsumexp(
            trans + emissions[i + 1][None, :] + log_beta[i + 1][None, :], axis=1
        )

    marginals = np.exp(log_alpha + log_beta - log_z)
    marginals /= marginals.sum(axis=1, keepdims=True)

    pairwise = np.empty((L - 1, T, T))
    for i in range(1, L):
        pairwise[i - 1] = np.exp(
            log_alpha[i - 1][:, None]
            + trans
            + emissions[i][None, :]
            + log_beta[i][None, :]
            - log_z
        )
    return marginals, pairwise, log_z


def lattice_viterbi(emissions: np.ndarray, transitions: np.ndarray) -> list[int]:
    """Best-scoring tag path; ties resolve to the lower tag index.

    np.argmax returns the first (lowest) index among equal maxima, which
    is exactly the documented tie rule, applied at every backpointer and
    at the final state.
    """
    L, T = emissions.shape
    trans = transitions[:T]
    delta = transitions[START] + emissions[0]
    backpointers = np.empty((L, T), dtype=np.int64)
    for i in range(1, L):
        scores = delta[:, None] + trans
        backpointers[i] = np.argmax(scores, axis=0)
        delta = scores[backpointers[i], np.arange(T)] + emissions[i]
    path = [int(np.argmax(delta))]
    for i in range(L - 1, 0, -1):
        path.append(int(backpointers[i][path[-1]]))
    path.reverse()
    return path


class CrfTagger(BaseEstimator):
    """Sequence tagger with an sklearn-style fit/predict surface.

    Parameters
    ----------
    feature_config : FeatureConfig, optional
        Which feature templates fire; defaults to all switches on.
    learning_rate : float
        Base step size; epoch e uses learning_rate / sqrt(e).
    l2_lambda : float
        Weight of the squared-norm penalty on all weights.
    epochs, batch_size : int
        Mini-batch gradient ascent schedule.
    seed : int
        Controls the per-epoch sentence shuffle.

    After fit: ``feature_index_`` (str -> int), ``emission_weights_``
    (F, 7) and ``transition_weights_`` (8, 7) with the virtual start row
    last.
    """

    def __init__(
        self,
        feature_config: FeatureConfig | None = None,
        learning_rate: float = 0.1,
        l2_lambda: float = 1e-4,
        epochs: int = 30,
        batch_size: int = 8,
        seed: int = 0,
    ):
        self.feature_config = feature_config
        self.learning_rate = learning_rate
        self.l2_lambda = l2_lambda
        self.epochs = epochs
        self.batch_size = batch_size
        self.seed = seed

    # -- construction -------------------------------------------------

    def _config(self) -> FeatureConfig:
        return self.feature_config if self.feature_config is not None else FeatureConfig()

    @classmethod
    def from_weights(
        cls,
        emission: dict[str, np.ndarray],
        transitions: np.ndarray | None = None,
        feature_config: FeatureConfig | None = None,
        l2_lambda: float = 1e-4,
    ) -> "CrfTagger":
        """Build a ready-to-use tagger from explicit weights.

        Used by the model-file loader and by tests that need a model
        with hand-picked potentials.
        """
        est = cls(feature_config=feature_config, l2_lambda=l2_lambda)
        est.feature_index_ = {key: i for i, key in enumerate(emission)}
        est.emission_weights_ = (
            np.array([np.asarray(v, dtype=float) for v in emission.values()])
            if emission
            else np.zeros((0, NUM_TAGS))
        )
        if est.emission_weights_.size and est.emission_weights_.shape[1] != NUM_TAGS:
            raise ValueError("each emission weight vector must have one entry per tag")
        if transitions is None:
            transitions = np.zeros((NUM_TAGS + 1, NUM_TAGS))
        est.transition_weights_ = np.asarray(transitions, dtype=float)
        if est.transition_weights_.shape != (NUM_TAGS + 1, NUM_TAGS):
            raise ValueError(f"transitions must be ({NUM_TAGS + 1}, {NUM_TAGS})")
        return est

    # -- featurization ------------------------------------------------

    def _sentence_feature_ids(self, texts: list[str], grow: bool) -> list[np.ndarray]:
        """Interned feature ids per position; unknown features are added
        when growing (fit) and skipped otherwise (predict)."""
        config = self._config()
        index = self.feature_index_
        ids = []
        for pos in range(len(texts)):
            keys = extract_features(texts, pos, config)
            if grow:
                row = [index.setdefault(k, len(index)) for k in keys]
            else:
                row = [index[k] for k in keys if k in index]
            ids.append(np.array(row, dtype=np.int64))
        return ids

    def sentence_lattice(self, texts: list[str]) -> tuple[np.ndarray, np.ndarray]:
        """Emission score matrix (L, 7) and the transition table (8, 7)
        for one sentence under the current weights."""
        check_fitted(self, "emission_weights_")
        ids = self._sentence_feature_ids(texts, grow=False)
        emissions = np.zeros((len(texts), NUM_TAGS))
        for i, row in enumerate(ids):
            if row.size:
                emissions[i] = self.emission_weights_[row].sum(axis=0)
        return emissions, self.transition_weights_

    # -- inference ----------------------------------------------------

    def sentence_marginals(self, texts: list[str]) -> np.ndarray:
        """Per-token tag distributions (L, 7), each row summing to 1."""
        emissions, transitions = self.sentence_lattice(texts)
        marginals, _, _ = lattice_marginals(emissions, transitions)
        return marginals

    def sentence_viterbi(self, texts: list[str]) -> list[Tag]:
        """Hard decode for one sentence."""
        emissions, transitions = self.sentence_lattice(texts)
        return [Tag(i) for i in lattice_viterbi(emissions, transitions)]

    def sentence_tags(self, texts: list[str]) -> list[Tag]:
        """Hard tags for one sentence (the Viterbi decode)."""
        return self.sentence_viterbi(texts)

    def predict(self, X) -> list[list[str]]:
        X = check_sequences(X)
        return [[t.name for t in self.sentence_viterbi(texts)] for texts in X]

    def predict_marginals(self, X) -> list[np.ndarray]:
        X = check_sequences(X)
        return [self.sentence_marginals(texts) for texts in X]

    # -- training -----------------------------------------------------

    def objective_and_gradient(self, X, y) -> tuple[float, tuple[np.ndarray, np.ndarray]]:
        """Regularized log-likelihood of a batch and its gradient.

        objective = sum_i log p(y_i | x_i) - l2_lambda * ||w||^2 over
        both weight tables; the gradient is observed minus expected
        feature counts minus 2 * l2_lambda * w.
        """
        check_fitted(self, "emission_weights_")
        X = check_sequences(X)
        tags = check_sequence_targets(X, y)
        grad_em = np.zeros_like(self.emission_weights_)
        grad_tr = np.zeros_like(self.transition_weights_)
        objective = 0.0
        for texts, gold in zip(X, tags):
            ids = self._sentence_feature_ids(texts, grow=False)
            emissions = np.zeros((len(texts), NUM_TAGS))
            for i, row in enumerate(ids):
                if row.size:
                    emissions[i] = self.emission_weights_[row].sum(axis=0)
            marginals, pairwise, log_z = lattice_marginals(
                emissions, self.transition_weights_
            )

            gold_score = self.transition_weights_[START, gold[0]] + emissions[0, gold[0]]
            for i in range(1, len(gold)):
                gold_score += (
                    self.transition_weights_[gold[i - 1], gold[i]] + emissions[i, gold[i]]
                )
            objective += gold_score - log_z

            for i, row in enumerate(ids):
                if row.size:
                    delta = -marginals[i]
                    delta[gold[i]] += 1.0
                    grad_em[row] += delta
            grad_tr[START] -= marginals[0]
            grad_tr[START, gold[0]] += 1.0
            if len(gold) > 1:
                grad_tr[:NUM_TAGS] -= pairwise.sum(axis=0)
                for i in range(1, len(gold)):
                    grad_tr[gold[i - 1], gold[i]] += 1.0

        objective -= self.l2_lambda * (
            float(np.sum(self.emission_weights_ ** 2))
            + float(np.sum(self.transition_weights_ ** 2))
        )
        grad_em -= 2.0 * self.l2_lambda * self.emission_weights_
        grad_tr -= 2.0 * self.l2_lambda * self.transition_weights_
        return float(objective), (grad_em, grad_tr)

    def fit(self, X, y) -> "CrfTagger":
        """Train by mini-batch gradient ascent; deterministic per seed.

        ``objective_history_`` records the full-dataset objective after
        every epoch.
        """
        X = check_sequences(X)
        check_sequence_targets(X, y)
        if not X:
            raise ValueError("training data must contain at least one sentence")

        self.feature_index_ = {}
        for texts in X:
            self._sentence_feature_ids(texts, grow=True)
        self.emission_weights_ = np.zeros((len(self.feature_index_), NUM_TAGS))
        self.transition_weights_ = np.zeros((NUM_TAGS + 1, NUM_TAGS))

        rng = random.Random(self.seed)
        order = list(range(len(X)))
        history = []
        for epoch in range(1, self.epochs + 1):
            rng.shuffle(order)
            lr = self.learning_rate / math.sqrt(epoch)
            for lo in range(0, len(order), self.batch_size):
                chunk = order[lo : lo + self.batch_size]
                _, (grad_em, grad_tr) = self.objective_and_gradient(
                    [X[i] for i in chunk], [y[i] for i in chunk]
                )
                self.emission_weights_ += lr * grad_em
                self.transition_weights_ += lr * grad_tr
            history.append(self.objective_and_gradient(X, y)[0])
        self.objective_history_ = history
        return self
