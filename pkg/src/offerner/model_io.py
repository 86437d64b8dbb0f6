"""Text model files for all four taggers plus the hybrid manifest.

Every file starts with ``OFFERNER-MODEL v1 <KIND>`` and a tag-index
table line; loading rejects unknown versions, unknown kinds, and files
whose tag table disagrees with this package's.  Floats are written with
``repr``, which round-trips exactly, so save -> load -> save reproduces
a byte-identical file.

The hybrid manifest lists the four sub-model files by relative path
with sha256 content hashes; loading verifies each hash before parsing.
"""

from __future__ import annotations

import hashlib
from pathlib import Path

import numpy as np

from .blstm import BlstmParams, BlstmTagger, EmbeddingTable
from .crf import CrfTagger
from .features import FeatureConfig
from .greedy import GreedyTagger
from .stacking import STACK_DIM, HybridTagger, StackClassifier
from .tags import NUM_TAGS, TAG_NAMES, Tag

HEADER_PREFIX = "OFFERNER-MODEL"
VERSION = "v1"

_TAGS_LINE = "tags\t" + ",".join(TAG_NAMES)


class ModelFormatError(ValueError):
    """A model file is malformed or inconsistent."""


class UnknownModelVersion(ModelFormatError):
    """The file declares a version this package cannot read."""


def _fmt_floats(values) -> str:
    return " ".join(repr(float(v)) for v in values)


def _parse_floats(text: str, expect: int | None = None) -> np.ndarray:
    values = np.array([float(p) for p in text.split()])
    if expect is not None and values.size != expect:
        raise ModelFormatError(f"expected {expect} values, got {values.size}")
    return values


def _read_lines(path) -> list[str]:
    return Path(path).read_text(encoding="utf-8").splitlines()


def _check_header(lines: list[str], kind: str, path) -> None:
    if not lines:
        raise ModelFormatError(f"{path}: empty model file")
    parts = lines[0].split()
    if len(parts) != 3 or parts[0] != HEADER_PREFIX:
        raise ModelFormatError(f"{path}: not a model file (bad header)")
    if parts[1] != VERSION:
        raise UnknownModelVersion(f"{path}: unsupported model version {parts[1]!r}")
    if parts[2] != kind:
        raise ModelFormatError(f"{path}: expected a {kind} model, found {parts[2]!r}")
    if len(lines) < 2 or lines[1] != _TAGS_LINE:
        raise ModelFormatError(f"{path}: tag table does not match this package")


def sniff_kind(path) -> str:
    """Kind declared in a model file's header (version-checked)."""
    lines = _read_lines(path)
    if not lines:
        raise ModelFormatError(f"{path}: empty model file")
    parts = lines[0].split()
    if len(parts) != 3 or parts[0] != HEADER_PREFIX:
        raise ModelFormatError(f"{path}: not a model file (bad header)")
    if parts[1] != VERSION:
        raise UnknownModelVersion(f"{path}: unsupported model version {parts[1]!r}")
    return parts[2]


# -- CRF ---------------------------------------------------------------


def save_crf(est: CrfTagger, path) -> None:
    """Write header, tag table, feature flags, then one
    ``e/t<TAB>key<TAB>tag<TAB>weight`` line per nonzero weight."""
    config = est.feature_config if est.feature_config is not None else FeatureConfig()
    lines = [f"{HEADER_PREFIX} {VERSION} CRF", _TAGS_LINE, "flags\t" + config.to_line()]
    for key, row in zip(est.feature_index_, est.emission_weights_):
        for t in Tag:
            w = float(row[t])
            if w != 0.0:
                lines.append(f"e\t{key}\t{t.name}\t{w!r}")
    for src in range(NUM_TAGS + 1):
        src_name = "START" if src == NUM_TAGS else Tag(src).name
        for t in Tag:
            w = float(est.transition_weights_[src, t])
            if w != 0.0:
                lines.append(f"t\t{src_name}\t{t.name}\t{w!r}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_crf(path) -> CrfTagger:
    lines = _read_lines(path)
    _check_header(lines, "CRF", path)
    if len(lines) < 3 or not lines[2].startswith("flags\t"):
        raise ModelFormatError(f"{path}: missing feature-flags line")
    config = FeatureConfig.from_line(lines[2].split("\t", 1)[1])
    emission: dict[str, np.ndarray] = {}
    transitions = np.zeros((NUM_TAGS + 1, NUM_TAGS))
    for lineno, line in enumerate(lines[3:], start=4):
        if not line:
            continue
        parts = line.split("\t")
        if len(parts) != 4:
            raise ModelFormatError(f"{path}:{lineno}: expected 4 tab-separated fields")
        kind, key, tag_name, weight = parts
        try:
            t = Tag[tag_name]
            w = float(weight)
        except (KeyError, ValueError):
            raise ModelFormatError(f"{path}:{lineno}: bad tag or weight") from None
        if kind == "e":
            emission.setdefault(key, np.zeros(NUM_TAGS))[t] = w
        elif kind == "t":
            src = NUM_TAGS if key == "START" else int(Tag[key])
            transitions[src, t] = w
        else:
            raise ModelFormatError(f"{path}:{lineno}: unknown weight kind {kind!r}")
    return CrfTagger.from_weights(emission, transitions, feature_config=config)


# -- greedy ------------------------------------------------------------


def save_greedy(est: GreedyTagger, path) -> None:
    lines = [f"{HEADER_PREFIX} {VERSION} GREEDY", _TAGS_LINE]
    for key, row in est.averaged_weights_.items():
        for t in Tag:
            w = float(row[t])
            if w != 0.0:
                lines.append(f"e\t{key}\t{t.name}\t{w!r}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_greedy(path) -> GreedyTagger:
    lines = _read_lines(path)
    _check_header(lines, "GREEDY", path)
    averaged: dict[str, np.ndarray] = {}
    for lineno, line in enumerate(lines[2:], start=3):
        if not line:
            continue
        parts = line.split("\t")
        if len(parts) != 4 or parts[0] != "e":
            raise ModelFormatError(f"{path}:{lineno}: expected e<TAB>key<TAB>tag<TAB>weight")
        try:
            t = Tag[parts[2]]
            w = float(parts[3])
        except (KeyError, ValueError):
            raise ModelFormatError(f"{path}:{lineno}: bad tag or weight") from None
        averaged.setdefault(parts[1], np.zeros(NUM_TAGS))[t] = w
    return GreedyTagger.from_weights(averaged)


# -- BLSTM -------------------------------------------------------------


def save_blstm(est: BlstmTagger, path) -> None:
    """Write dims, the six parameter arrays row-major, and the frozen
    embedding table (vocabulary plus the unknown-token vector)."""
    params = est.params_
    table = est.embeddings_
    hidden = params.hidden_size
    lines = [f"{HEADER_PREFIX} {VERSION} BLSTM", _TAGS_LINE, f"dims\t{table.dim}\t{hidden}"]
    for name, arr in params.items():
        mat = np.atleast_2d(arr)
        lines.append(f"param\t{name}\t{mat.shape[0]}\t{mat.shape[1]}")
        for row in mat:
            lines.append(_fmt_floats(row))
    lines.append(f"embeddings\t{len(table.vectors)}")
    for token, vec in table.vectors.items():
        lines.append(f"{token} {_fmt_floats(vec)}")
    lines.append(f"<unk> {_fmt_floats(table.unk_vector)}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_blstm(path) -> BlstmTagger:
    lines = _read_lines(path)
    _check_header(lines, "BLSTM", path)
    if len(lines) < 3 or not lines[2].startswith("dims\t"):
        raise ModelFormatError(f"{path}: missing dims line")
    try:
        _, dim_s, hidden_s = lines[2].split("\t")
        dim, hidden = int(dim_s), int(hidden_s)
    except ValueError:
        raise ModelFormatError(f"{path}: bad dims line") from None

    arrays: dict[str, np.ndarray] = {}
    pos = 3
    expected = ("W_fwd", "b_fwd", "W_bwd", "b_bwd", "proj", "proj_bias")
    for name in expected:
        if pos >= len(lines) or not lines[pos].startswith("param\t"):
            raise ModelFormatError(f"{path}: missing parameter block {name}")
        parts = lines[pos].split("\t")
        if len(parts) != 4 or parts[1] != name:
            raise ModelFormatError(f"{path}: expected parameter block {name}")
        rows, cols = int(parts[2]), int(parts[3])
        pos += 1
        block = [_parse_floats(lines[pos + r], cols) for r in range(rows)]
        pos += rows
        mat = np.array(block)
        arrays[name] = mat[0] if rows == 1 and name.startswith(("b_", "proj_b")) else mat

    if pos >= len(lines) or not lines[pos].startswith("embeddings\t"):
        raise ModelFormatError(f"{path}: missing embeddings section")
    n_vectors = int(lines[pos].split("\t")[1])
    pos += 1
    vectors: dict[str, np.ndarray] = {}
    for _ in range(n_vectors):
        token, _, rest = lines[pos].partition(" ")
        vectors[token] = _parse_floats(rest, dim)
        pos += 1
    unk_token, _, rest = lines[pos].partition(" ")
    if unk_token != "<unk>":
        raise ModelFormatError(f"{path}: missing unknown-token vector")
    table = EmbeddingTable(dim, vectors, _parse_floats(rest, dim))

    params = BlstmParams(**arrays)
    if params.input_dim != dim or params.hidden_size != hidden:
        raise ModelFormatError(f"{path}: parameter shapes disagree with dims line")
    return BlstmTagger.from_params(params, table)


# -- SVM ---------------------------------------------------------------


def save_svm(est: StackClassifier, path) -> None:
    lines = [
        f"{HEADER_PREFIX} {VERSION} SVM",
        _TAGS_LINE,
        "scale\t" + _fmt_floats(est.feature_scale),
    ]
    for t in Tag:
        lines.append(f"w\t{t.name}\t{_fmt_floats(est.weights_[t])}")
    lines.append("b\t" + _fmt_floats(est.biases_))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_svm(path) -> StackClassifier:
    lines = _read_lines(path)
    _check_header(lines, "SVM", path)
    if len(lines) < 3 + NUM_TAGS + 1:
        raise ModelFormatError(f"{path}: truncated SVM model")
    if not lines[2].startswith("scale\t"):
        raise ModelFormatError(f"{path}: missing scale line")
    scale = _parse_floats(lines[2].split("\t", 1)[1], STACK_DIM)
    weights = np.zeros((NUM_TAGS, STACK_DIM))
    for i, t in enumerate(Tag):
        parts = lines[3 + i].split("\t")
        if len(parts) != 3 or parts[0] != "w" or parts[1] != t.name:
            raise ModelFormatError(f"{path}: expected weight row for {t.name}")
        weights[t] = _parse_floats(parts[2], STACK_DIM)
    bias_line = lines[3 + NUM_TAGS]
    if not bias_line.startswith("b\t"):
        raise ModelFormatError(f"{path}: missing bias line")
    biases = _parse_floats(bias_line.split("\t", 1)[1], NUM_TAGS)
    return StackClassifier.from_weights(weights, biases, feature_scale=tuple(scale))


# -- hybrid manifest ----------------------------------------------------

_HYBRID_PARTS = ("crf", "blstm", "greedy", "svm")
_SAVERS = {"crf": save_crf, "blstm": save_blstm, "greedy": save_greedy, "svm": save_svm}
_LOADERS = {"crf": load_crf, "blstm": load_blstm, "greedy": load_greedy, "svm": load_svm}


def _sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def save_hybrid(hybrid: HybridTagger, directory, stem: str = "hybrid") -> Path:
    """Write the four sub-model files plus a manifest; returns the
    manifest path.  Sub-model files sit next to the manifest and are
    referenced by relative path and sha256."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    lines = [f"{HEADER_PREFIX} {VERSION} HYBRID", _TAGS_LINE]
    for part in _HYBRID_PARTS:
        filename = f"{stem}.{part}.model"
        _SAVERS[part](getattr(hybrid, part), directory / filename)
        lines.append(f"file\t{part}\t{filename}\t{_sha256(directory / filename)}")
    manifest = directory / f"{stem}.manifest"
    manifest.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return manifest


def load_hybrid(path) -> HybridTagger:
    path = Path(path)
    lines = _read_lines(path)
    _check_header(lines, "HYBRID", path)
    parts: dict[str, object] = {}
    for lineno, line in enumerate(lines[2:], start=3):
        if not line:
            continue
        fields = line.split("\t")
        if len(fields) != 4 or fields[0] != "file":
            raise ModelFormatError(f"{path}:{lineno}: expected file<TAB>part<TAB>path<TAB>sha256")
        _, part, rel, digest = fields
        if part not in _HYBRID_PARTS:
            raise ModelFormatError(f"{path}:{lineno}: unknown sub-model {part!r}")
        sub_path = path.parent / rel
        if not sub_path.exists():
            raise ModelFormatError(f"{path}: missing sub-model file {rel}")
        if _sha256(sub_path) != digest:
            raise ModelFormatError(f"{path}: sub-model file {rel} fails its hash check")
        parts[part] = _LOADERS[part](sub_path)
    missing = [p for p in _HYBRID_PARTS if p not in parts]
    if missing:
        raise ModelFormatError(f"{path}: manifest lacks {', '.join(missing)}")
    return HybridTagger(**parts)


def load_any(path):
    """Load whatever model file sits at ``path`` based on its header.

    Hybrid manifests load to a HybridTagger; the four sub-model kinds
    load to their estimators.
    """
    kind = sniff_kind(path)
    if kind == "HYBRID":
        return load_hybrid(path)
    loader = _LOADERS.get(kind.lower())
    if loader is None:
        raise ModelFormatError(f"{path}: unknown model kind {kind!r}")
    return loader(path)
