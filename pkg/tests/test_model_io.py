"""Model-file round-trip tests.

The contract under test: save -> load -> save is byte-identical for
every model kind, loaded models predict exactly like the originals, and
malformed or tampered files are rejected loudly.
"""

import numpy as np
import pytest

from offerner.blstm import BlstmTagger
from offerner.corpus import Dataset, SlotLexicon, bloat, parse_template
from offerner.crf import CrfTagger
from offerner.greedy import GreedyTagger
from offerner.model_io import (
    ModelFormatError,
    UnknownModelVersion,
    load_any,
    load_blstm,
    load_crf,
    load_greedy,
    load_hybrid,
    load_svm,
    save_blstm,
    save_crf,
    save_greedy,
    save_hybrid,
    save_svm,
    sniff_kind,
)
from offerner.stacking import STACK_DIM, HybridTagger, StackClassifier, build_stacking_set
from offerner.tags import NUM_TAGS, Tag


def training_halves():
    lex = SlotLexicon(
        values={
            Tag.OAMT: ["20%", "Rs.100"],
            Tag.OTYPE: ["off", "cashback"],
            Tag.MIN_AMT: ["Rs.500"],
            Tag.MAX_AMT: ["Rs.150"],
            Tag.PRD: ["pizzas", "movie tickets"],
            Tag.MERCH: ["Dominos", "Pizza Hut"],
        }
    )
    lines = [
        "Get OAMT OTYPE on PRD at MERCH",
        "OAMT OTYPE on orders above MIN_AMT up to MAX_AMT",
    ]
    sentences = []
    for j, line in enumerate(lines):
        sentences.extend(bloat(parse_template(line), lex, count=8, seed=50 + j))
    ds = Dataset("io", sentences)
    X, y = ds.token_lists(), ds.tag_lists()
    half = len(X) // 2
    return (X[:half], y[:half]), (X[half:], y[half:])


@pytest.fixture(scope="module")
def fitted():
    (X1, y1), (X2, y2) = training_halves()
    crf = CrfTagger(epochs=3).fit(X1, y1)
    blstm = BlstmTagger(
        embedding_dim=8, hidden_size=4, learning_rate=0.5, epochs=4, seed=0
    ).fit(X1, y1)
    greedy = GreedyTagger(epochs=3).fit(X1, y1)
    stack_X, stack_y = build_stacking_set(crf, blstm, greedy, X2, y2)
    svm = StackClassifier(epochs=5).fit(stack_X, stack_y)
    hybrid = HybridTagger(crf=crf, blstm=blstm, greedy=greedy, svm=svm)
    hybrid.fitted_ = True
    return {"crf": crf, "blstm": blstm, "greedy": greedy, "svm": svm, "hybrid": hybrid}


SAMPLE = ["Get", "20", "%", "off", "on", "pizzas", "at", "Pizza", "Hut"]


class TestRoundTrips:
    def test_crf(self, fitted, tmp_path):
        p1, p2 = tmp_path / "a.model", tmp_path / "b.model"
        save_crf(fitted["crf"], p1)
        loaded = load_crf(p1)
        save_crf(loaded, p2)
        assert p1.read_bytes() == p2.read_bytes()
        assert loaded.sentence_tags(SAMPLE) == fitted["crf"].sentence_tags(SAMPLE)
        np.testing.assert_array_equal(
            loaded.sentence_marginals(SAMPLE), fitted["crf"].sentence_marginals(SAMPLE)
        )
        assert loaded.feature_config == fitted["crf"]._config()

    def test_greedy(self, fitted, tmp_path):
        p1, p2 = tmp_path / "a.model", tmp_path / "b.model"
        save_greedy(fitted["greedy"], p1)
        loaded = load_greedy(p1)
        save_greedy(loaded, p2)
        assert p1.read_bytes() == p2.read_bytes()
        assert loaded.sentence_tags(SAMPLE) == fitted["greedy"].sentence_tags(SAMPLE)

    def test_blstm(self, fitted, tmp_path):
        p1, p2 = tmp_path / "a.model", tmp_path / "b.model"
        save_blstm(fitted["blstm"], p1)
        loaded = load_blstm(p1)
        save_blstm(loaded, p2)
        assert p1.read_bytes() == p2.read_bytes()
        np.testing.assert_array_equal(
            loaded.sentence_probs(SAMPLE), fitted["blstm"].sentence_probs(SAMPLE)
        )
        for (_, a), (_, b) in zip(loaded.params_.items(), fitted["blstm"].params_.items()):
            np.testing.assert_array_equal(a, b)
        assert set(loaded.embeddings_.vectors) == set(fitted["blstm"].embeddings_.vectors)

    def test_svm(self, fitted, tmp_path):
        p1, p2 = tmp_path / "a.model", tmp_path / "b.model"
        save_svm(fitted["svm"], p1)
        loaded = load_svm(p1)
        save_svm(loaded, p2)
        assert p1.read_bytes() == p2.read_bytes()
        np.testing.assert_array_equal(loaded.weights_, fitted["svm"].weights_)
        np.testing.assert_array_equal(loaded.biases_, fitted["svm"].biases_)
        assert loaded.feature_scale == tuple(fitted["svm"].feature_scale)

    def test_hybrid_manifest(self, fitted, tmp_path):
        d1, d2 = tmp_path / "one", tmp_path / "two"
        manifest = save_hybrid(fitted["hybrid"], d1)
        assert manifest == d1 / "hybrid.manifest"
        produced = sorted(p.name for p in d1.iterdir())
        assert produced == [
            "hybrid.blstm.model",
            "hybrid.crf.model",
            "hybrid.greedy.model",
            "hybrid.manifest",
            "hybrid.svm.model",
        ]
        loaded = load_hybrid(manifest)
        assert loaded.sentence_tags(SAMPLE) == fitted["hybrid"].sentence_tags(SAMPLE)
        save_hybrid(loaded, d2)
        for name in produced:
            assert (d1 / name).read_bytes() == (d2 / name).read_bytes()

    def test_awkward_floats_survive_exactly(self, tmp_path):
        # repr round-trips doubles exactly; 0.1 + 0.2 and 1/3 are the
        # classic stress values.
        weights = np.full((NUM_TAGS, STACK_DIM), 1.0 / 3.0)
        weights[0, 0] = 0.1 + 0.2
        weights[1, 1] = -1e-17
        biases = np.linspace(-1.5, 1.5, NUM_TAGS)
        est = StackClassifier.from_weights(weights, biases)
        path = tmp_path / "svm.model"
        save_svm(est, path)
        loaded = load_svm(path)
        np.testing.assert_array_equal(loaded.weights_, weights)
        np.testing.assert_array_equal(loaded.biases_, biases)


class TestSniffAndLoadAny:
    def test_every_kind(self, fitted, tmp_path):
        save_crf(fitted["crf"], tmp_path / "crf.model")
        save_blstm(fitted["blstm"], tmp_path / "blstm.model")
        save_greedy(fitted["greedy"], tmp_path / "greedy.model")
        save_svm(fitted["svm"], tmp_path / "svm.model")
        manifest = save_hybrid(fitted["hybrid"], tmp_path)

        assert sniff_kind(tmp_path / "crf.model") == "CRF"
        assert sniff_kind(tmp_path / "blstm.model") == "BLSTM"
        assert sniff_kind(tmp_path / "greedy.model") == "GREEDY"
        assert sniff_kind(tmp_path / "svm.model") == "SVM"
        assert sniff_kind(manifest) == "HYBRID"

        assert isinstance(load_any(tmp_path / "crf.model"), CrfTagger)
        assert isinstance(load_any(tmp_path / "blstm.model"), BlstmTagger)
        assert isinstance(load_any(tmp_path / "greedy.model"), GreedyTagger)
        assert isinstance(load_any(tmp_path / "svm.model"), StackClassifier)
        assert isinstance(load_any(manifest), HybridTagger)


class TestRejections:
    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.model"
        path.write_text("")
        with pytest.raises(ModelFormatError):
            load_crf(path)
        with pytest.raises(ModelFormatError):
            sniff_kind(path)

    def test_bad_header(self, tmp_path):
        path = tmp_path / "bad.model"
        path.write_text("SOMETHING ELSE\n")
        with pytest.raises(ModelFormatError):
            load_greedy(path)

    def test_unknown_version(self, fitted, tmp_path):
        path = tmp_path / "crf.model"
        save_crf(fitted["crf"], path)
        text = path.read_text().replace("OFFERNER-MODEL v1 ", "OFFERNER-MODEL v2 ", 1)
        path.write_text(text)
        with pytest.raises(UnknownModelVersion):
            load_crf(path)
        with pytest.raises(UnknownModelVersion):
            load_any(path)

    def test_kind_mismatch(self, fitted, tmp_path):
        path = tmp_path / "greedy.model"
        save_greedy(fitted["greedy"], path)
        with pytest.raises(ModelFormatError):
            load_crf(path)

    def test_tampered_tag_table(self, fitted, tmp_path):
        path = tmp_path / "crf.model"
        save_crf(fitted["crf"], path)
        text = path.read_text().replace("tags\tOAMT", "tags\tAMT", 1)
        path.write_text(text)
        with pytest.raises(ModelFormatError):
            load_crf(path)

    def test_crf_missing_flags(self, tmp_path):
        path = tmp_path / "crf.model"
        path.write_text(
            "OFFERNER-MODEL v1 CRF\ntags\tOAMT,OTYPE,MIN_AMT,MAX_AMT,PRD,MERCH,O\n"
        )
        with pytest.raises(ModelFormatError):
            load_crf(path)

    def test_crf_bad_weight_line(self, fitted, tmp_path):
        path = tmp_path / "crf.model"
        save_crf(fitted["crf"], path)
        path.write_text(path.read_text() + "e\tw=x\tNOPE\t1.0\n")
        with pytest.raises(ModelFormatError):
            load_crf(path)

    def test_truncated_svm(self, fitted, tmp_path):
        path = tmp_path / "svm.model"
        save_svm(fitted["svm"], path)
        lines = path.read_text().splitlines()
        path.write_text("\n".join(lines[:-2]) + "\n")
        with pytest.raises(ModelFormatError):
            load_svm(path)

    def test_blstm_shape_lie(self, fitted, tmp_path):
        path = tmp_path / "blstm.model"
        save_blstm(fitted["blstm"], path)
        text = path.read_text().replace("dims\t8\t4", "dims\t8\t5", 1)
        path.write_text(text)
        with pytest.raises(ModelFormatError):
            load_blstm(path)

    def test_hybrid_hash_mismatch(self, fitted, tmp_path):
        manifest = save_hybrid(fitted["hybrid"], tmp_path)
        sub = tmp_path / "hybrid.greedy.model"
        sub.write_text(sub.read_text() + "e\tw=extra\tOAMT\t1.0\n")
        with pytest.raises(ModelFormatError, match="hash"):
            load_hybrid(manifest)

    def test_hybrid_missing_file(self, fitted, tmp_path):
        manifest = save_hybrid(fitted["hybrid"], tmp_path)
        (tmp_path / "hybrid.svm.model").unlink()
        with pytest.raises(ModelFormatError):
            load_hybrid(manifest)

    def test_hybrid_incomplete_manifest(self, fitted, tmp_path):
        manifest = save_hybrid(fitted["hybrid"], tmp_path)
        lines = manifest.read_text().splitlines()
        manifest.write_text("\n".join(lines[:-1]) + "\n")
        with pytest.raises(ModelFormatError):
            load_hybrid(manifest)
