"""Pipeline configuration: flat ``key = value`` text files.

Blank lines and ``#`` comments are ignored; every key must be a known
field.  Relative paths are resolved against the config file's
directory, so a repo-shipped config works from any working directory;
absolute paths pass through unchanged.

One master seed drives the whole pipeline.  Each stage derives its own
seed as ``master * 100 + stage`` with fixed stage numbers (1-5 dataset
generation, 6 corpus split, 7 CRF, 8 BLSTM, 9 greedy, 10 stacker);
inside dataset generation, template j bloats with
``dataset_seed * 1000 + j``.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from pathlib import Path

STAGE_GENERATE = {i: i for i in range(1, 6)}  # dataset number -> stage
STAGE_SPLIT = 6
STAGE_CRF = 7
STAGE_BLSTM = 8
STAGE_GREEDY = 9
STAGE_SVM = 10


def stage_seed(master: int, stage: int) -> int:
    """Per-stage seed derived from the master seed."""
    return master * 100 + stage


class ConfigError(ValueError):
    """The config file is unreadable, has unknown keys, or bad values."""


@dataclass
class PipelineConfig:
    """Everything the command-line pipeline needs, with defaults that
    match the repo's shipped desk-scale corpus."""

    # input paths
    templates_dir: str = "data/templates"
    lexicon: str = "data/lexicon.tsv"
    embeddings: str = ""  # empty: generate a seeded random table
    # output paths
    data_dir: str = "out/data"
    model_dir: str = "out/models"
    report_dir: str = "out/reports"
    # master seed
    seed: int = 13
    # sentences generated per dataset
    count_d1: int = 65
    count_d2: int = 86
    count_d3: int = 76
    count_d4: int = 89
    count_d5: int = 10
    # CRF training
    crf_learning_rate: float = 0.1
    crf_l2: float = 1e-4
    crf_epochs: int = 30
    crf_batch_size: int = 8
    # BLSTM training
    blstm_dim: int = 300
    blstm_hidden: int = 32
    blstm_learning_rate: float = 0.01
    blstm_epochs: int = 15
    blstm_batch_size: int = 16
    blstm_clip: float = 5.0
    blstm_init: float = 0.08
    # greedy training
    greedy_epochs: int = 10
    # stacker training
    svm_learning_rate: float = 0.05
    svm_l2: float = 1e-4
    svm_epochs: int = 20

    _PATH_FIELDS = (
        "templates_dir",
        "lexicon",
        "embeddings",
        "data_dir",
        "model_dir",
        "report_dir",
    )

    @classmethod
    def from_file(cls, path) -> "PipelineConfig":
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from None
        types = {f.name: f.type for f in fields(cls) if not f.name.startswith("_")}
        values: dict[str, object] = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key = value")
            key, _, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if key not in types:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            try:
                if types[key] == "int":
                    values[key] = int(value)
                elif types[key] == "float":
                    values[key] = float(value)
                else:
                    values[key] = value
            except ValueError:
                raise ConfigError(
                    f"{path}:{lineno}: bad value for {key}: {value!r}"
                ) from None
        config = cls(**values)
        config._resolve_paths(path.parent)
        return config

    def _resolve_paths(self, base: Path) -> None:
        for name in self._PATH_FIELDS:
            value = getattr(self, name)
            if value and not Path(value).is_absolute():
                setattr(self, name, str(base / value))

    def require_inputs(self, *names: str) -> None:
        """Raise ConfigError unless each named path field exists."""
        for name in names:
            value = getattr(self, name)
            if not value or not Path(value).exists():
                raise ConfigError(f"{name} path does not exist: {value!r}")

    def template_file(self, dataset: int) -> Path:
        return Path(self.templates_dir) / f"d{dataset}.templates"

    def dataset_file(self, dataset: int) -> Path:
        return Path(self.data_dir) / f"d{dataset}.tsv"

    def count_for(self, dataset: int) -> int:
        return int(getattr(self, f"count_d{dataset}"))
