"""Bidirectional LSTM tests.

The cell is checked against a pure-python scalar reimplementation, the
BPTT gradients against central finite differences, and the mask-carry
design against exact padding invariance.  A direction-swap symmetry
oracle validates the bidirectional wiring end to end.
"""

import math
import random

import numpy as np
import pytest
from sklearn.exceptions import NotFittedError

from offerner.blstm import (
    BlstmParams,
    BlstmTagger,
    EmbeddingTable,
    forward_batch,
    gradient_check,
    lstm_cell,
    masked_loss_and_gradients,
)
from offerner.tags import NUM_TAGS, Tag


def sigmoid(x):
    return 1.0 / (1.0 + math.exp(-x))


def scalar_cell(W, b, x, h_prev, c_prev):
    """One-unit LSTM cell in pure python, the oracle for lstm_cell."""
    z = [x * W[0][k] + h_prev * W[1][k] + b[k] for k in range(4)]
    i, f, o = sigmoid(z[0]), sigmoid(z[1]), sigmoid(z[2])
    g = math.tanh(z[3])
    c = f * c_prev + i * g
    h = o * math.tanh(c)
    return h, c


class TestLstmCell:
    def test_scalar_hand_case(self):
        W = np.array([[0.1, 0.2, 0.3, 0.4], [-0.5, 0.6, -0.7, 0.8]])
        b = np.array([0.01, -0.02, 0.03, -0.04])
        h, c = lstm_cell(W, b, np.array([0.5]), np.array([-0.3]), np.array([0.25]))
        eh, ec = scalar_cell(W.tolist(), b.tolist(), 0.5, -0.3, 0.25)
        assert abs(h[0] - eh) < 1e-15
        assert abs(c[0] - ec) < 1e-15

    def test_neutral_gates_halve_candidate(self):
        # Zero gate weights leave i = f = o = 1/2; with candidate
        # weight 1 and fresh state, h = tanh(tanh(1)/2)/2.
        W = np.zeros((2, 4))
        W[0, 3] = 1.0
        b = np.zeros(4)
        h, c = lstm_cell(W, b, np.array([1.0]), np.array([0.0]), np.array([0.0]))
        assert abs(c[0] - 0.5 * math.tanh(1.0)) < 1e-15
        assert abs(h[0] - 0.5 * math.tanh(0.5 * math.tanh(1.0))) < 1e-15

    def test_zero_state_is_fixed_point_of_zero_params(self):
        # g = tanh(0) = 0 kills the candidate, so zero state stays zero
        # whatever the input is.
        rng = np.random.default_rng(0)
        W, b = np.zeros((5, 8)), np.zeros(8)
        for _ in range(10):
            x = rng.normal(size=3)
            h, c = lstm_cell(W, b, x, np.zeros(2), np.zeros(2))
            np.testing.assert_array_equal(h, 0.0)
            np.testing.assert_array_equal(c, 0.0)

    def test_saturated_forget_gate_preserves_memory(self):
        # Bias the gates hard: forget ~ 1, input ~ 0, output ~ 1.  The
        # cell state must survive many steps of arbitrary input.
        H = 3
        W = np.zeros((2 + H, 4 * H))
        b = np.concatenate([
            np.full(H, -20.0),   # input gate shut
            np.full(H, 20.0),    # forget gate open
            np.full(H, 20.0),    # output gate open
            np.zeros(H),
        ])
        rng = np.random.default_rng(1)
        c0 = np.array([0.7, -0.4, 0.2])
        h, c = np.zeros(H), c0.copy()
        for _ in range(12):
            h, c = lstm_cell(W, b, rng.normal(size=2), h, c)
        np.testing.assert_allclose(c, c0, atol=1e-3)
        np.testing.assert_allclose(h, np.tanh(c0), atol=1e-3)

    def test_batch_matches_loop(self):
        rng = np.random.default_rng(2)
        W = rng.normal(size=(6, 16))
        b = rng.normal(size=16)
        xs = rng.normal(size=(5, 2))
        hs = rng.normal(size=(5, 4))
        cs = rng.normal(size=(5, 4))
        h_batch, c_batch = lstm_cell(W, b, xs, hs, cs)
        for k in range(5):
            h1, c1 = lstm_cell(W, b, xs[k], hs[k], cs[k])
            np.testing.assert_allclose(h_batch[k], h1, atol=1e-15)
            np.testing.assert_allclose(c_batch[k], c1, atol=1e-15)


class TestForwardBatch:
    def test_zero_params_give_uniform(self):
        params = BlstmParams.zeros(dim=5, hidden=4)
        X = np.random.default_rng(3).normal(size=(2, 6, 5))
        probs, _ = forward_batch(params, X, np.ones((2, 6)))
        np.testing.assert_allclose(probs, 1.0 / NUM_TAGS, atol=1e-15)

    def test_rows_normalize(self):
        params = BlstmParams.seeded(dim=5, hidden=4, scale=0.4, seed=4)
        X = np.random.default_rng(5).normal(size=(3, 7, 5))
        probs, _ = forward_batch(params, X, np.ones((3, 7)))
        assert np.all(probs > 0)
        np.testing.assert_allclose(probs.sum(axis=-1), 1.0, atol=1e-9)

    def test_direction_swap_symmetry(self):
        # Swapping the two directional parameter blocks (and the
        # matching halves of the projection) and reversing the input
        # must reverse the output distribution sequence.
        H = 4
        p = BlstmParams.seeded(dim=5, hidden=H, scale=0.4, seed=6)
        swapped = BlstmParams(
            W_fwd=p.W_bwd,
            b_fwd=p.b_bwd,
            W_bwd=p.W_fwd,
            b_bwd=p.b_fwd,
            proj=np.concatenate([p.proj[H:], p.proj[:H]], axis=0),
            proj_bias=p.proj_bias,
        )
        X = np.random.default_rng(7).normal(size=(1, 6, 5))
        mask = np.ones((1, 6))
        probs, _ = forward_batch(p, X, mask)
        probs_rev, _ = forward_batch(swapped, X[:, ::-1], mask)
        np.testing.assert_allclose(probs, probs_rev[:, ::-1], atol=1e-12)

    def test_padding_cannot_change_real_positions(self):
        # Same batch, more pad columns: every real-position output must
        # be bit-identical, not merely close.
        params = BlstmParams.seeded(dim=4, hidden=3, scale=0.5, seed=8)
        rng = np.random.default_rng(9)
        lengths = [5, 3]
        X = np.zeros((2, 5, 4))
        mask = np.zeros((2, 5))
        for bi, n in enumerate(lengths):
            X[bi, :n] = rng.normal(size=(n, 4))
            mask[bi, :n] = 1.0
        probs, _ = forward_batch(params, X, mask)

        pad = 4
        X_wide = np.zeros((2, 5 + pad, 4))
        mask_wide = np.zeros((2, 5 + pad))
        X_wide[:, :5] = X
        mask_wide[:, :5] = mask
        probs_wide, _ = forward_batch(params, X_wide, mask_wide)
        for bi, n in enumerate(lengths):
            assert np.array_equal(probs[bi, :n], probs_wide[bi, :n])


class TestGradients:
    @pytest.mark.parametrize("seed", [0, 1])
    def test_bptt_matches_finite_differences(self, seed):
        assert gradient_check(seed=seed) < 1e-3

    def test_survives_saturated_regime(self):
        # Larger weights push gates toward their flats where naive
        # numeric differentiation gets noisy; allow a looser bound.
        assert gradient_check(scale=2.0, seed=0) < 1e-2

    def test_loss_is_mean_over_real_tokens(self):
        params = BlstmParams.zeros(dim=3, hidden=2)
        X = np.zeros((2, 4, 3))
        mask = np.array([[1.0, 1, 1, 0], [1, 1, 0, 0]])
        tags = np.zeros((2, 4), dtype=np.int64)
        loss, _ = masked_loss_and_gradients(params, X, mask, tags)
        # Uniform model: cross-entropy is log 7 per real token.
        assert abs(loss - math.log(NUM_TAGS)) < 1e-12

    def test_rejects_all_padding(self):
        params = BlstmParams.zeros(dim=3, hidden=2)
        with pytest.raises(ValueError):
            masked_loss_and_gradients(
                params, np.zeros((1, 2, 3)), np.zeros((1, 2)), np.zeros((1, 2), dtype=np.int64)
            )

    def test_padded_tokens_get_no_gradient(self):
        # Gradients from a padded batch equal gradients from the tight
        # batch: the padding rows contribute exactly nothing.
        params = BlstmParams.seeded(dim=3, hidden=2, scale=0.3, seed=10)
        rng = np.random.default_rng(11)
        X = rng.normal(size=(1, 3, 3))
        tags = rng.integers(0, NUM_TAGS, size=(1, 3))
        loss_a, grads_a = masked_loss_and_gradients(params, X, np.ones((1, 3)), tags)

        X_pad = np.zeros((1, 6, 3))
        X_pad[:, :3] = X
        mask = np.zeros((1, 6))
        mask[:, :3] = 1.0
        tags_pad = np.zeros((1, 6), dtype=np.int64)
        tags_pad[:, :3] = tags
        loss_b, grads_b = masked_loss_and_gradients(params, X_pad, mask, tags_pad)
        assert loss_a == loss_b
        for (_, ga), (_, gb) in zip(grads_a.items(), grads_b.items()):
            np.testing.assert_allclose(ga, gb, atol=1e-12)


class TestEmbeddingTable:
    def test_seeded_is_deterministic_and_dedups(self):
        a = EmbeddingTable.seeded(["up", "to", "up", "50"], dim=8, seed=3)
        b = EmbeddingTable.seeded(["up", "to", "50"], dim=8, seed=3)
        assert set(a.vectors) == {"up", "to", "50"}
        for tok in a.vectors:
            np.testing.assert_array_equal(a.vectors[tok], b.vectors[tok])
        np.testing.assert_array_equal(a.unk_vector, b.unk_vector)

    def test_lookup_falls_back_exact_lower_unk(self):
        table = EmbeddingTable(
            2,
            {"Dominos": np.array([1.0, 0.0]), "pizza": np.array([0.0, 1.0])},
            unk_vector=np.array([0.5, 0.5]),
        )
        np.testing.assert_array_equal(table.lookup("Dominos"), [1.0, 0.0])
        np.testing.assert_array_equal(table.lookup("PIZZA"), [0.0, 1.0])
        np.testing.assert_array_equal(table.lookup("nachos"), [0.5, 0.5])

    def test_pad_vector_is_zero(self):
        table = EmbeddingTable.seeded(["a"], dim=4, seed=0)
        np.testing.assert_array_equal(table.pad_vector, np.zeros(4))

    def test_embed_shapes(self):
        table = EmbeddingTable.seeded(["a", "b"], dim=4, seed=0)
        assert table.embed(["a", "b", "zz"]).shape == (3, 4)
        assert table.embed([]).shape == (0, 4)

    def test_from_file_with_unk_row(self, tmp_path):
        path = tmp_path / "vecs.txt"
        path.write_text("off 0.1 0.2\n<unk> 0.9 0.8\ncashback 0.3 0.4\n")
        table = EmbeddingTable.from_file(path)
        assert table.dim == 2
        assert "<unk>" not in table.vectors
        np.testing.assert_array_equal(table.unk_vector, [0.9, 0.8])
        np.testing.assert_array_equal(table.lookup("off"), [0.1, 0.2])

    def test_from_file_mean_fallback(self, tmp_path):
        path = tmp_path / "vecs.txt"
        path.write_text("a 1.0 0.0\nb 0.0 1.0\n")
        table = EmbeddingTable.from_file(path)
        np.testing.assert_allclose(table.unk_vector, [0.5, 0.5])

    def test_from_file_rejects_ragged_and_empty(self, tmp_path):
        ragged = tmp_path / "ragged.txt"
        ragged.write_text("a 1.0 2.0\nb 1.0\n")
        with pytest.raises(ValueError):
            EmbeddingTable.from_file(ragged)
        empty = tmp_path / "empty.txt"
        empty.write_text("\n")
        with pytest.raises(ValueError):
            EmbeddingTable.from_file(empty)

    def test_constructor_validates_dims(self):
        with pytest.raises(ValueError):
            EmbeddingTable(3, {"a": np.zeros(2)}, unk_vector=np.zeros(3))
        with pytest.raises(ValueError):
            EmbeddingTable(3, {}, unk_vector=np.zeros(2))


def small_tagger(**overrides):
    defaults = dict(
        embedding_dim=12, hidden_size=6, learning_rate=0.5, epochs=30, batch_size=16, seed=0
    )
    defaults.update(overrides)
    return BlstmTagger(**defaults)


class TestTagger:
    def test_unfitted_raises(self):
        with pytest.raises(NotFittedError):
            BlstmTagger().sentence_tags(["Get"])

    def test_zero_params_predict_uniform_then_first_tag(self):
        table = EmbeddingTable.seeded(["off"], dim=4, seed=0)
        est = BlstmTagger.from_params(BlstmParams.zeros(4, 3), table)
        probs = est.sentence_probs(["off", "off"])
        np.testing.assert_allclose(probs, 1.0 / NUM_TAGS, atol=1e-15)
        assert est.sentence_tags(["off", "off"]) == [Tag.OAMT, Tag.OAMT]

    def test_overfits_repeated_sentence(self):
        texts = ["Get", "20", "%", "off", "at", "Dominos"]
        tags = ["O", "OAMT", "OAMT", "OTYPE", "O", "MERCH"]
        est = small_tagger(learning_rate=2.0, epochs=120, hidden_size=8).fit(
            [texts] * 16, [tags] * 16
        )
        assert est.predict([texts]) == [tags]
        assert est.loss_history_[-1] < 0.05

    def test_loss_history_decreases(self, xy):
        X, y = xy
        est = small_tagger(epochs=6).fit(X, y)
        assert len(est.loss_history_) == 6
        assert est.loss_history_[-1] < est.loss_history_[0]
        assert est.loss_history_[0] < math.log(NUM_TAGS) + 0.5

    def test_fit_deterministic(self, xy):
        X, y = xy
        a = small_tagger(epochs=3).fit(X, y)
        b = small_tagger(epochs=3).fit(X, y)
        assert a.loss_history_ == b.loss_history_
        for (_, pa), (_, pb) in zip(a.params_.items(), b.params_.items()):
            np.testing.assert_array_equal(pa, pb)

    def test_seed_changes_model(self, xy):
        X, y = xy
        a = small_tagger(epochs=2, seed=1).fit(X, y)
        b = small_tagger(epochs=2, seed=2).fit(X, y)
        assert np.abs(a.params_.W_fwd - b.params_.W_fwd).max() > 0

    def test_sentence_probs_match_batched_training_forward(self, xy):
        X, y = xy
        est = small_tagger(epochs=2).fit(X, y)
        # Inference pads nothing; compare against a manually padded
        # two-sentence batch.
        texts_a, texts_b = X[0], X[1]
        emb = [est.embeddings_.embed(t) for t in (texts_a, texts_b)]
        Xb, mask, _ = est._pad_batch(emb)
        probs_batch, _ = forward_batch(est.params_, Xb, mask)
        np.testing.assert_allclose(
            est.sentence_probs(texts_a), probs_batch[0, : len(texts_a)], atol=1e-12
        )
        np.testing.assert_allclose(
            est.sentence_probs(texts_b), probs_batch[1, : len(texts_b)], atol=1e-12
        )

    def test_directional_states_respect_direction(self, xy):
        X, y = xy
        est = small_tagger(epochs=1).fit(X, y)
        texts = ["Get", "20", "%", "off", "at", "Dominos"]
        hf, hb = est.directional_states(texts)
        assert hf.shape == hb.shape == (6, 6)

        # Changing the last token cannot move earlier forward states.
        changed_tail = texts[:-1] + ["Zomato"]
        hf2, _ = est.directional_states(changed_tail)
        np.testing.assert_array_equal(hf[:-1], hf2[:-1])

        # Changing the first token cannot move later backward states.
        changed_head = ["Win"] + texts[1:]
        _, hb2 = est.directional_states(changed_head)
        np.testing.assert_array_equal(hb[1:], hb2[1:])

    def test_fit_validates_inputs(self):
        with pytest.raises(ValueError):
            BlstmTagger().fit([], [])
        with pytest.raises(ValueError):
            BlstmTagger().fit([["a"]], [["O", "O"]])

    def test_external_embeddings_are_used(self, xy):
        X, y = xy
        table = EmbeddingTable.seeded((t for s in X for t in s), dim=9, seed=42)
        est = small_tagger(epochs=1, embeddings=table, embedding_dim=999).fit(X, y)
        assert est.embeddings_ is table
        assert est.params_.input_dim == 9

    def test_get_params_round_trip(self):
        est = BlstmTagger(hidden_size=5, epochs=2, seed=7)
        assert BlstmTagger(**est.get_params()).get_params() == est.get_params()
