"""Bidirectional LSTM tagger built directly on numpy.

One left-to-right and one right-to-left LSTM run over frozen word
embeddings; their hidden states are concatenated per position (64 dims
at the default size), projected to 7 logits, and softmaxed.  Training
is plain SGD on masked cross-entropy with backpropagation through time
written out by hand; a finite-difference checker guards the gradients.

Padded positions use the all-zero embedding and a mask-carry update
(state passes through unchanged), which makes outputs at real positions
exactly independent of how much padding a batch carries.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

import numpy as np
from scipy.special import expit, softmax
from sklearn.base import BaseEstimator

from .tags import NUM_TAGS, Tag
from .validation import check_fitted, check_sequence_targets, check_sequences


class EmbeddingTable:
    """Frozen token -> vector lookup with unknown and pad handling.

    Lookup tries the exact token, then its lowercase form, then falls
    back to ``unk_vector``.  The pad vector is always exactly zero.
    """

    def __init__(self, dim: int, vectors: dict[str, np.ndarray], unk_vector: np.ndarray):
        self.dim = dim
        self.vectors = {k: np.asarray(v, dtype=float) for k, v in vectors.items()}
        self.unk_vector = np.asarray(unk_vector, dtype=float)
        if self.unk_vector.shape != (dim,):
            raise ValueError(f"unk vector must have length {dim}")
        for key, v in self.vectors.items():
            if v.shape != (dim,):
                raise ValueError(f"vector for {key!r} must have length {dim}")

    @property
    def pad_vector(self) -> np.ndarray:
        return np.zeros(self.dim)

    @classmethod
    def seeded(cls, tokens, dim: int = 300, seed: int = 0) -> "EmbeddingTable":
        """Random table over a vocabulary, deterministic per seed.

        Stands in for pretrained vectors so nothing external is needed.
        Tokens are deduplicated in first-seen order before drawing, so
        the same (tokens, seed) pair always yields the same table.
        """
        vocab = list(dict.fromkeys(tokens))
        rng = np.random.default_rng(seed)
        mat = rng.uniform(-0.5, 0.5, size=(len(vocab) + 1, dim))
        vectors = {tok: mat[i] for i, tok in enumerate(vocab)}
        return cls(dim, vectors, mat[-1])

    @classmethod
    def from_file(cls, path) -> "EmbeddingTable":
        """Parse ``token v1 ... v_dim`` lines (space separated).

        The row for the reserved token ``<unk>`` becomes the unknown
        vector; without one, the mean of all rows is used.
        """
        vectors: dict[str, np.ndarray] = {}
        dim = None
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                parts = line.split()
                if not parts:
                    continue
                if len(parts) < 2:
                    raise ValueError(f"line {lineno}: token without values")
                vec = np.array([float(p) for p in parts[1:]])
                if dim is None:
                    dim = vec.size
                elif vec.size != dim:
                    raise ValueError(
                        f"line {lineno}: expected {dim} values, got {vec.size}"
                    )
                vectors[parts[0]] = vec
        if not vectors:
            raise ValueError("embedding file contains no vectors")
        unk = vectors.pop("<unk>", None)
        if unk is None:
            unk = np.mean(list(vectors.values()), axis=0)
        return cls(dim, vectors, unk)

    def lookup(self, token: str) -> np.ndarray:
        v = self.vectors.get(token)
        if v is None:
            v = self.vectors.get(token.lower())
        return v if v is not None else self.unk_vector

    def embed(self, texts: list[str]) -> np.ndarray:
        """(L, dim) matrix of looked-up vectors."""
        if not texts:
            return np.zeros((0, self.dim))
        return np.stack([self.lookup(t) for t in texts])


@dataclass
class BlstmParams:
    """All trainable arrays.

    Gate matrices are fused: ``W_fwd``/``W_bwd`` have shape
    (dim + hidden, 4 * hidden) with column blocks in the order
    input gate, forget gate, output gate, candidate; biases (4*hidden,).
    ``proj`` maps the concatenated (2 * hidden) state to 7 logits.
    """

    W_fwd: np.ndarray
    b_fwd: np.ndarray
    W_bwd: np.ndarray
    b_bwd: np.ndarray
    proj: np.ndarray
    proj_bias: np.ndarray

    @property
    def hidden_size(self) -> int:
        return self.W_fwd.shape[1] // 4

    @property
    def input_dim(self) -> int:
        return self.W_fwd.shape[0] - self.hidden_size

    @classmethod
    def seeded(cls, dim: int, hidden: int, scale: float, seed: int) -> "BlstmParams":
        rng = np.random.default_rng(seed)

        def u(*shape):
            return rng.uniform(-scale, scale, size=shape)

        return cls(
            W_fwd=u(dim + hidden, 4 * hidden),
            b_fwd=u(4 * hidden),
            W_bwd=u(dim + hidden, 4 * hidden),
            b_bwd=u(4 * hidden),
            proj=u(2 * hidden, NUM_TAGS),
            proj_bias=u(NUM_TAGS),
        )

    @classmethod
    def zeros(cls, dim: int, hidden: int) -> "BlstmParams":
        return cls(
            W_fwd=np.zeros((dim + hidden, 4 * hidden)),
            b_fwd=np.zeros(4 * hidden),
            W_bwd=np.zeros((dim + hidden, 4 * hidden)),
            b_bwd=np.zeros(4 * hidden),
            proj=np.zeros((2 * hidden, NUM_TAGS)),
            proj_bias=np.zeros(NUM_TAGS),
        )

    def items(self) -> list[tuple[str, np.ndarray]]:
        return [
            ("W_fwd", self.W_fwd),
            ("b_fwd", self.b_fwd),
            ("W_bwd", self.W_bwd),
            ("b_bwd", self.b_bwd),
            ("proj", self.proj),
            ("proj_bias", self.proj_bias),
        ]

    def copy(self) -> "BlstmParams":
        return BlstmParams(**{name: arr.copy() for name, arr in self.items()})


def _gates(W: np.ndarray, b: np.ndarray, x: np.ndarray, h_prev: np.ndarray):
    H = h_prev.shape[-1]
    z = np.concatenate([x, h_prev], axis=-1) @ W + b
    return (
        expit(z[..., :H]),
        expit(z[..., H : 2 * H]),
        expit(z[..., 2 * H : 3 * H]),
        np.tanh(z[..., 3 * H :]),
    )


def lstm_cell(W, b, x, h_prev, c_prev):
    """One gated update: i,f,o = sigmoid, g = tanh, c = f*c_prev + i*g,
    h = o*tanh(c).  Works on single vectors or (B, .) batches."""
    i, f, o, g = _gates(W, b, x, h_prev)
    c = f * c_prev + i * g
    h = o * np.tanh(c)
    return h, c


_CACHE_KEYS = ("i", "f", "o", "g", "tc", "c_prev", "h_prev")


def _run_direction(W, b, X, mask, reverse: bool):
    """One directional pass over a padded batch.

    Masked positions carry state through unchanged, so padding can
    never leak into real positions in either direction.
    """
    B, T, _ = X.shape
    H = W.shape[1] // 4
    h = np.zeros((B, H))
    c = np.zeros((B, H))
    out = np.zeros((B, T, H))
    cache = {k: np.zeros((B, T, H)) for k in _CACHE_KEYS}
    order = range(T - 1, -1, -1) if reverse else range(T)
    for t in order:
        m = mask[:, t, None]
        i, f, o, g = _gates(W, b, X[:, t], h)
        c_cell = f * c + i * g
        tc = np.tanh(c_cell)
        for key, val in zip(_CACHE_KEYS, (i, f, o, g, tc, c, h)):
            cache[key][:, t] = val
        c = m * c_cell + (1.0 - m) * c
        h = m * (o * tc) + (1.0 - m) * h
        out[:, t] = h
    return out, cache


def _backward_direction(W, X, mask, cache, dH, reverse: bool):
    """BPTT for one direction; returns (dW, db).

    Mirrors the forward mask-carry: at padded steps every gate gradient
    vanishes and the carried state gradients pass through intact.
    """
    B, T, D = X.shape
    H = W.shape[1] // 4
    dW = np.zeros_like(W)
    db = np.zeros(4 * H)
    dh_carry = np.zeros((B, H))
    dc_carry = np.zeros((B, H))
    order = range(T) if reverse else range(T - 1, -1, -1)
    for t in order:
        m = mask[:, t, None]
        i = cache["i"][:, t]
        f = cache["f"][:, t]
        o = cache["o"][:, t]
        g = cache["g"][:, t]
        tc = cache["tc"][:, t]
        c_prev = cache["c_prev"][:, t]
        h_prev = cache["h_prev"][:, t]

        dh_total = dH[:, t] + dh_carry
        dc_total = dc_carry
        dh_new = m * dh_total
        do = dh_new * tc
        dc_cell = m * dc_total + dh_new * o * (1.0 - tc ** 2)
        di = dc_cell * g
        df = dc_cell * c_prev
        dg = dc_cell * i

        dz = np.concatenate(
            [di * i * (1.0 - i), df * f * (1.0 - f), do * o * (1.0 - o), dg * (1.0 - g ** 2)],
            axis=-1,
        )
        xh = np.concatenate([X[:, t], h_prev], axis=-1)
        dW += xh.T @ dz
        db += dz.sum(axis=0)
        dxh = dz @ W.T
        dh_carry = dxh[:, D:] + (1.0 - m) * dh_total
        dc_carry = dc_cell * f + (1.0 - m) * dc_total
    return dW, db


def forward_batch(params: BlstmParams, X: np.ndarray, mask: np.ndarray):
    """Per-position tag distributions (B, T, 7) plus backward caches."""
    Hf, cache_f = _run_direction(params.W_fwd, params.b_fwd, X, mask, reverse=False)
    Hb, cache_b = _run_direction(params.W_bwd, params.b_bwd, X, mask, reverse=True)
    Hcat = np.concatenate([Hf, Hb], axis=-1)
    logits = Hcat @ params.proj + params.proj_bias
    return softmax(logits, axis=-1), (Hcat, cache_f, cache_b)


def masked_loss_and_gradients(params: BlstmParams, X, mask, tags):
    """Mean cross-entropy over real tokens and gradients for all params.

    Args:
        X: (B, T, dim) embedded batch, zero vectors at padded slots.
        mask: (B, T) floats, 1.0 on real tokens.
        tags: (B, T) integer tag indices (ignored where masked).
    """
    n_real = float(mask.sum())
    if n_real == 0:
        raise ValueError("batch has no real tokens")
    probs, (Hcat, cache_f, cache_b) = forward_batch(params, X, mask)
    B, T, _ = X.shape
    rows, cols = np.nonzero(mask)
    loss = -float(np.sum(np.log(probs[rows, cols, tags[rows, cols]]))) / n_real

    dlogits = probs.copy()
    dlogits[rows, cols, tags[rows, cols]] -= 1.0
    dlogits *= mask[:, :, None] / n_real

    H = params.hidden_size
    flat_h = Hcat.reshape(-1, 2 * H)
    flat_d = dlogits.reshape(-1, NUM_TAGS)
    dproj = flat_h.T @ flat_d
    dproj_bias = flat_d.sum(axis=0)
    dHcat = dlogits @ params.proj.T
    dW_f, db_f = _backward_direction(
        params.W_fwd, X, mask, cache_f, dHcat[:, :, :H], reverse=False
    )
    dW_b, db_b = _backward_direction(
        params.W_bwd, X, mask, cache_b, dHcat[:, :, H:], reverse=True
    )
    grads = BlstmParams(dW_f, db_f, dW_b, db_b, dproj, dproj_bias)
    return loss, grads


def gradient_check(
    dim: int = 4,
    hidden: int = 3,
    length: int = 3,
    seed: int = 0,
    step: float = 1e-4,
    samples: int = 30,
    scale: float = 0.3,
) -> float:
    """Compare BPTT gradients against central finite differences.

    Builds a random two-sentence batch (the second one token shorter,
    so masking is exercised), samples coordinates across every
    parameter array, and returns the maximum relative error.
    """
    rng = np.random.default_rng(seed)
    params = BlstmParams.seeded(dim, hidden, scale, seed)
    X = rng.uniform(-1.0, 1.0, size=(2, length, dim))
    mask = np.ones((2, length))
    mask[1, -1] = 0.0
    X[1, -1] = 0.0
    tags = rng.integers(0, NUM_TAGS, size=(2, length))

    _, grads = masked_loss_and_gradients(params, X, mask, tags)
    grad_map = dict(grads.items())
    max_err = 0.0
    arrays = params.items()
    for _ in range(samples):
        name, arr = arrays[rng.integers(0, len(arrays))]
        idx = np.unravel_index(rng.integers(0, arr.size), arr.shape)
        original = arr[idx]
        arr[idx] = original + step
        up, _ = masked_loss_and_gradients(params, X, mask, tags)
        arr[idx] = original - step
        down, _ = masked_loss_and_gradients(params, X, mask, tags)
        arr[idx] = original
        numeric = (up - down) / (2.0 * step)
        analytic = grad_map[name][idx]
        err = abs(analytic - numeric) / max(1e-8, abs(analytic) + abs(numeric))
        max_err = max(max_err, err)
    return max_err


class BlstmTagger(BaseEstimator):
    """Bidirectional LSTM sequence tagger (sklearn-style surface).

    Parameters
    ----------
    embedding_dim : int
        Vector size when a seeded table is generated internally.
    hidden_size : int
        Per-direction hidden size; the tagger concatenates both
        directions, so the projected state has twice this size.
    learning_rate, epochs, batch_size, clip_norm, init_scale, seed
        SGD schedule: constant step, global-norm clipping, uniform
        parameter init in [-init_scale, init_scale], seeded shuffling.
    embeddings : EmbeddingTable, optional
        Frozen lookup table; a seeded random one over the training
        vocabulary is built when omitted.

    After fit: ``params_``, ``embeddings_``, ``loss_history_``.
    """

    def __init__(
        self,
        embedding_dim: int = 300,
        hidden_size: int = 32,
        learning_rate: float = 0.01,
        epochs: int = 15,
        batch_size: int = 16,
        clip_norm: float = 5.0,
        init_scale: float = 0.08,
        seed: int = 0,
        embeddings: EmbeddingTable | None = None,
    ):
        self.embedding_dim = embedding_dim
        self.hidden_size = hidden_size
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.batch_size = batch_size
        self.clip_norm = clip_norm
        self.init_scale = init_scale
        self.seed = seed
        self.embeddings = embeddings

    @classmethod
    def from_params(cls, params: BlstmParams, embeddings: EmbeddingTable) -> "BlstmTagger":
        """Build a ready-to-use tagger from explicit parameters."""
        est = cls(embedding_dim=embeddings.dim, hidden_size=params.hidden_size)
        est.params_ = params
        est.embeddings_ = embeddings
        return est

    def _pad_batch(self, X_emb: list[np.ndarray], tag_lists=None):
        B = len(X_emb)
        T = max(x.shape[0] for x in X_emb)
        dim = X_emb[0].shape[1]
        X = np.zeros((B, T, dim))
        mask = np.zeros((B, T))
        tags = np.zeros((B, T), dtype=np.int64)
        for bi, x in enumerate(X_emb):
            X[bi, : x.shape[0]] = x
            mask[bi, : x.shape[0]] = 1.0
            if tag_lists is not None:
                tags[bi, : x.shape[0]] = tag_lists[bi]
        return X, mask, tags

    def fit(self, X, y) -> "BlstmTagger":
        X = check_sequences(X)
        tags = check_sequence_targets(X, y)
        if not X:
            raise ValueError("training data must contain at least one sentence")

        if self.embeddings is not None:
            table = self.embeddings
        else:
            vocab = (tok for texts in X for tok in texts)
            table = EmbeddingTable.seeded(vocab, self.embedding_dim, self.seed)
        self.embeddings_ = table
        params = BlstmParams.seeded(table.dim, self.hidden_size, self.init_scale, self.seed)

        embedded = [table.embed(texts) for texts in X]
        tag_arrays = [np.array([int(t) for t in row], dtype=np.int64) for row in tags]

        rng = random.Random(self.seed)
        order = list(range(len(X)))
        history = []
        for _ in range(self.epochs):
            rng.shuffle(order)
            epoch_loss = 0.0
            epoch_tokens = 0.0
            for lo in range(0, len(order), self.batch_size):
                chunk = order[lo : lo + self.batch_size]
                Xb, mask, tb = self._pad_batch(
                    [embedded[i] for i in chunk], [tag_arrays[i] for i in chunk]
                )
                loss, grads = masked_loss_and_gradients(params, Xb, mask, tb)
                norm = math.sqrt(
                    sum(float(np.sum(g ** 2)) for _, g in grads.items())
                )
                factor = self.clip_norm / norm if norm > self.clip_norm else 1.0
                for (_, p), (_, g) in zip(params.items(), grads.items()):
                    p -= self.learning_rate * factor * g
                n = float(mask.sum())
                epoch_loss += loss * n
                epoch_tokens += n
            history.append(epoch_loss / epoch_tokens)
        self.params_ = params
        self.loss_history_ = history
        return self

    # -- inference ----------------------------------------------------

    def sentence_probs(self, texts: list[str]) -> np.ndarray:
        """Per-token tag distributions (L, 7)."""
        check_fitted(self, "params_")
        if not texts:
            return np.zeros((0, NUM_TAGS))
        X = self.embeddings_.embed(texts)[None, :, :]
        probs, _ = forward_batch(self.params_, X, np.ones((1, len(texts))))
        return probs[0]

    def directional_states(self, texts: list[str]):
        """(h_forward, h_backward) hidden states, each (L, hidden)."""
        check_fitted(self, "params_")
        X = self.embeddings_.embed(texts)[None, :, :]
        mask = np.ones((1, len(texts)))
        p = self.params_
        Hf, _ = _run_direction(p.W_fwd, p.b_fwd, X, mask, reverse=False)
        Hb, _ = _run_direction(p.W_bwd, p.b_bwd, X, mask, reverse=True)
        return Hf[0], Hb[0]

    def sentence_tags(self, texts: list[str]) -> list[Tag]:
        probs = self.sentence_probs(texts)
        return [Tag(int(i)) for i in np.argmax(probs, axis=1)]

    def predict(self, X) -> list[list[str]]:
        X = check_sequences(X)
        return [[t.name for t in self.sentence_tags(texts)] for texts in X]

    def predict_marginals(self, X) -> list[np.ndarray]:
        X = check_sequences(X)
        return [self.sentence_probs(texts) for texts in X]
