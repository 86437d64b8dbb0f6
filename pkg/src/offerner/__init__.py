"""Offer-entity tagging: corpus generation, three sequence taggers, and
a stacked hybrid that combines them."""

from .blstm import BlstmParams, BlstmTagger, EmbeddingTable, gradient_check
from .config import ConfigError, PipelineConfig, stage_seed
from .corpus import (
    CorpusError,
    Dataset,
    EmptyTemplate,
    MalformedLine,
    MissingLexiconEntry,
    OfferTemplate,
    SlotLexicon,
    TaggedSentence,
    TooSmall,
    bloat,
    combine,
    load_lexicon,
    load_templates,
    load_tsv,
    parse_template,
    save_tsv,
    split_half,
)
from .crf import CrfTagger
from .features import FeatureConfig, extract_features
from .greedy import GreedyTagger, gp_features
from .metrics import ConfusionCounts, EvalReport, count, evaluate, prf
from .model_io import (
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
)
from .stacking import (
    DEFAULT_FEATURE_SCALE,
    STACK_DIM,
    HybridTagger,
    StackClassifier,
    assemble,
    build_stacking_set,
)
from .tags import ENTITY_TAGS, NUM_TAGS, TAG_NAMES, Tag
from .tokenization import Token, lemma, tokenize, word_shape
from .validation import LengthMismatch

__version__ = "0.1.0"

__all__ = [
    "BlstmParams",
    "BlstmTagger",
    "ConfigError",
    "ConfusionCounts",
    "CorpusError",
    "CrfTagger",
    "DEFAULT_FEATURE_SCALE",
    "Dataset",
    "EmbeddingTable",
    "EmptyTemplate",
    "EvalReport",
    "ENTITY_TAGS",
    "FeatureConfig",
    "GreedyTagger",
    "HybridTagger",
    "LengthMismatch",
    "MalformedLine",
    "MissingLexiconEntry",
    "ModelFormatError",
    "NUM_TAGS",
    "OfferTemplate",
    "PipelineConfig",
    "STACK_DIM",
    "SlotLexicon",
    "StackClassifier",
    "TAG_NAMES",
    "Tag",
    "TaggedSentence",
    "Token",
    "TooSmall",
    "UnknownModelVersion",
    "assemble",
    "bloat",
    "build_stacking_set",
    "combine",
    "count",
    "evaluate",
    "extract_features",
    "gp_features",
    "gradient_check",
    "lemma",
    "load_any",
    "load_blstm",
    "load_crf",
    "load_greedy",
    "load_hybrid",
    "load_lexicon",
    "load_svm",
    "load_templates",
    "load_tsv",
    "parse_template",
    "prf",
    "save_blstm",
    "save_crf",
    "save_greedy",
    "save_hybrid",
    "save_svm",
    "save_tsv",
    "split_half",
    "stage_seed",
    "tokenize",
    "word_shape",
]
