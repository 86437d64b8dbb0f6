"""Command-line surface: generate, train, tag, eval, repro.

stdout carries data (dataset counts, model paths, TSV, reports);
diagnostics go to stderr.  Exit codes: 2 usage or config problems,
3 missing lexicon entry, 4 training failure, 5 unloadable model file,
6 unloadable dataset file.  Every command is deterministic under a
fixed master seed.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .blstm import BlstmTagger, EmbeddingTable
from .config import (
    STAGE_BLSTM,
    STAGE_CRF,
    STAGE_GREEDY,
    STAGE_SPLIT,
    STAGE_SVM,
    ConfigError,
    PipelineConfig,
    stage_seed,
)
from .corpus import (
    CorpusError,
    Dataset,
    MissingLexiconEntry,
    bloat,
    combine,
    load_lexicon,
    load_templates,
    load_tsv,
    save_tsv,
    split_half,
)
from .crf import CrfTagger
from .greedy import GreedyTagger
from .metrics import evaluate
from .model_io import (
    ModelFormatError,
    load_any,
    save_blstm,
    save_crf,
    save_greedy,
    save_hybrid,
)
from .stacking import HybridTagger, StackClassifier
from .tags import Tag
from .tokenization import tokenize

EXIT_CONFIG = 2
EXIT_LEXICON = 3
EXIT_TRAINING = 4
EXIT_MODEL = 5
EXIT_DATASET = 6


def _load_config(args) -> PipelineConfig:
    config = (
        PipelineConfig.from_file(args.config) if args.config else PipelineConfig()
    )
    if getattr(args, "seed", None) is not None:
        config.seed = args.seed
    return config


def _info(message: str) -> None:
    print(message, file=sys.stderr)


# -- generate -----------------------------------------------------------


def _generate_dataset(config: PipelineConfig, i: int) -> Dataset:
    templates = load_templates(config.template_file(i))
    lexicon = load_lexicon(config.lexicon)
    total = config.count_for(i)
    base, extra = divmod(total, len(templates))
    d_seed = stage_seed(config.seed, i)
    sentences = []
    for j, template in enumerate(templates):
        count = base + (1 if j < extra else 0)
        if count:
            sentences.extend(bloat(template, lexicon, count, d_seed * 1000 + j))
    return Dataset(f"d{i}", sentences)


def cmd_generate(args) -> int:
    config = _load_config(args)
    config.require_inputs("templates_dir", "lexicon")
    for i in range(1, 6):
        if not config.template_file(i).exists():
            raise ConfigError(f"template file missing: {config.template_file(i)}")
    Path(config.data_dir).mkdir(parents=True, exist_ok=True)
    for i in range(1, 6):
        dataset = _generate_dataset(config, i)
        save_tsv(dataset, config.dataset_file(i))
        print(f"d{i}\t{len(dataset.sentences)}")
    return 0


# -- train --------------------------------------------------------------


def _load_generated(config: PipelineConfig, numbers) -> list[Dataset]:
    datasets = []
    for i in numbers:
        path = config.dataset_file(i)
        if not path.exists():
            raise ConfigError(f"dataset file missing (run generate first): {path}")
        datasets.append(load_tsv(path, name=f"d{i}"))
    return datasets


def _combined_halves(config: PipelineConfig) -> tuple[Dataset, Dataset]:
    combined = combine(_load_generated(config, range(1, 5)), "d_comb")
    return split_half(combined, stage_seed(config.seed, STAGE_SPLIT))


def _make_crf(config: PipelineConfig) -> CrfTagger:
    return CrfTagger(
        learning_rate=config.crf_learning_rate,
        l2_lambda=config.crf_l2,
        epochs=config.crf_epochs,
        batch_size=config.crf_batch_size,
        seed=stage_seed(config.seed, STAGE_CRF),
    )


def _make_blstm(config: PipelineConfig) -> BlstmTagger:
    embeddings = (
        EmbeddingTable.from_file(config.embeddings) if config.embeddings else None
    )
    return BlstmTagger(
        embedding_dim=config.blstm_dim,
        hidden_size=config.blstm_hidden,
        learning_rate=config.blstm_learning_rate,
        epochs=config.blstm_epochs,
        batch_size=config.blstm_batch_size,
        clip_norm=config.blstm_clip,
        init_scale=config.blstm_init,
        seed=stage_seed(config.seed, STAGE_BLSTM),
        embeddings=embeddings,
    )


def _make_greedy(config: PipelineConfig) -> GreedyTagger:
    return GreedyTagger(
        epochs=config.greedy_epochs, seed=stage_seed(config.seed, STAGE_GREEDY)
    )


def _make_svm(config: PipelineConfig) -> StackClassifier:
    return StackClassifier(
        learning_rate=config.svm_learning_rate,
        l2_lambda=config.svm_l2,
        epochs=config.svm_epochs,
        seed=stage_seed(config.seed, STAGE_SVM),
    )


def _train_models(config: PipelineConfig, which: str, individual, written) -> None:
    """Train the requested models, appending each written file path to
    ``written`` as it lands (so a failure can be cleaned up)."""
    model_dir = Path(config.model_dir)
    model_dir.mkdir(parents=True, exist_ok=True)

    if individual is not None:
        if which != "crf":
            raise ConfigError("--individual only applies to `train crf`")
        dataset = _load_generated(config, [individual])[0]
        est = _make_crf(config)
        est.fit(dataset.token_lists(), dataset.tag_lists())
        path = model_dir / f"crf_d{individual}.model"
        save_crf(est, path)
        written.append(path)
        return

    first, second = _combined_halves(config)
    save_tsv(first, Path(config.data_dir) / "d_comb1.tsv")
    save_tsv(second, Path(config.data_dir) / "d_comb2.tsv")
    X1, y1 = first.token_lists(), first.tag_lists()

    fitted = {}
    if which in ("crf", "all"):
        _info("training crf")
        fitted["crf"] = _make_crf(config).fit(X1, y1)
        path = model_dir / "crf.model"
        save_crf(fitted["crf"], path)
        written.append(path)
    if which in ("blstm", "all"):
        _info("training blstm")
        fitted["blstm"] = _make_blstm(config).fit(X1, y1)
        path = model_dir / "blstm.model"
        save_blstm(fitted["blstm"], path)
        written.append(path)
    if which in ("greedy", "all"):
        _info("training greedy")
        fitted["greedy"] = _make_greedy(config).fit(X1, y1)
        path = model_dir / "greedy.model"
        save_greedy(fitted["greedy"], path)
        written.append(path)
    if which in ("hybrid", "all"):
        _info("training hybrid")
        hybrid = HybridTagger(
            crf=fitted.get("crf") or _make_crf(config),
            blstm=fitted.get("blstm") or _make_blstm(config),
            greedy=fitted.get("greedy") or _make_greedy(config),
            svm=_make_svm(config),
        )
        if which == "all":
            # the bases above were fitted on the same half with the
            # same seeds; refitting them would reproduce them exactly
            hybrid.fit_stacker(second.token_lists(), second.tag_lists())
        else:
            hybrid.fit_datasets(first, second)
        manifest = save_hybrid(hybrid, model_dir)
        written.extend(sorted(model_dir.glob("hybrid.*.model")))
        written.append(manifest)


def cmd_train(args) -> int:
    config = _load_config(args)
    written: list[Path] = []
    try:
        _train_models(config, args.which, args.individual, written)
    except (ConfigError, CorpusError):
        raise
    except Exception as exc:
        for path in written:
            Path(path).unlink(missing_ok=True)
        _info(f"training failed: {exc}")
        return EXIT_TRAINING
    for path in written:
        print(path)
    return 0


# -- tag ----------------------------------------------------------------


def cmd_tag(args) -> int:
    try:
        model = load_any(args.model)
    except (ModelFormatError, OSError) as exc:
        _info(f"cannot load model: {exc}")
        return EXIT_MODEL
    if args.input:
        try:
            stream = open(args.input, encoding="utf-8")
        except OSError as exc:
            _info(f"cannot read input: {exc}")
            return EXIT_CONFIG
    else:
        stream = sys.stdin
    try:
        for line in stream:
            tokens = tokenize(line)
            if not tokens:
                continue
            texts = [t.text for t in tokens]
            tags = model.sentence_tags(texts)
            for text, tag in zip(texts, tags):
                print(f"{text}\t{Tag(tag).name}")
            print()
    finally:
        if args.input:
            stream.close()
    return 0


# -- eval ---------------------------------------------------------------


def _write_report(report, out_prefix: Path) -> None:
    out_prefix.parent.mkdir(parents=True, exist_ok=True)
    Path(f"{out_prefix}.txt").write_text(report.as_table(), encoding="utf-8")
    Path(f"{out_prefix}.tsv").write_text(report.as_lines(), encoding="utf-8")


def cmd_eval(args) -> int:
    config = _load_config(args)
    try:
        model = load_any(args.model)
    except (ModelFormatError, OSError) as exc:
        _info(f"cannot load model: {exc}")
        return EXIT_MODEL
    try:
        dataset = load_tsv(args.dataset)
    except (CorpusError, OSError) as exc:
        _info(f"cannot load dataset: {exc}")
        return EXIT_DATASET
    report = evaluate(model, dataset)
    if args.out:
        prefix = Path(args.out)
    else:
        prefix = Path(config.report_dir) / (
            f"{Path(args.model).stem}_{Path(args.dataset).stem}"
        )
    _write_report(report, prefix)
    sys.stdout.write(report.as_table())
    return 0


# -- repro --------------------------------------------------------------


def cmd_repro(args) -> int:
    """Full pipeline: generate, train everything, evaluate everything.

    Writes one report pair per model under report_dir and prints a
    summary line per model: ``<name><TAB><overall F1>``.
    """
    config = _load_config(args)
    code = cmd_generate(args)
    if code:
        return code

    written: list[Path] = []
    try:
        _train_models(config, "all", None, written)
        individual_paths = {}
        for i in range(1, 5):
            marker = len(written)
            _train_models(config, "crf", i, written)
            individual_paths[i] = written[marker]
    except (ConfigError, CorpusError):
        raise
    except Exception as exc:
        for path in written:
            Path(path).unlink(missing_ok=True)
        _info(f"training failed: {exc}")
        return EXIT_TRAINING

    test = load_tsv(config.dataset_file(5), name="d5")
    model_dir = Path(config.model_dir)
    to_eval = [
        ("crf", model_dir / "hybrid.crf.model"),
        ("blstm", model_dir / "hybrid.blstm.model"),
        ("greedy", model_dir / "hybrid.greedy.model"),
        ("hybrid", model_dir / "hybrid.manifest"),
    ] + [(f"crf_d{i}", individual_paths[i]) for i in range(1, 5)]
    for name, path in to_eval:
        model = load_any(path)
        report = evaluate(model, test)
        _write_report(report, Path(config.report_dir) / name)
        print(f"{name}\t{report.overall[2]:.4f}")
    return 0


# -- entry point --------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="offerner",
        description="Offer-entity tagging: corpus generation, training, "
        "tagging, and evaluation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="bloat templates into labeled datasets")
    p.add_argument("--config", help="pipeline config file")
    p.add_argument("--seed", type=int, help="override the master seed")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("train", help="train taggers on the generated datasets")
    p.add_argument(
        "which", choices=["crf", "blstm", "greedy", "hybrid", "all"],
        help="which model(s) to train",
    )
    p.add_argument("--config", help="pipeline config file")
    p.add_argument("--seed", type=int, help="override the master seed")
    p.add_argument(
        "--individual", type=int, choices=[1, 2, 3, 4], default=None,
        help="train on a single source dataset (crf only)",
    )
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("tag", help="tag raw offer text, one offer per line")
    p.add_argument("--model", required=True, help="model file or hybrid manifest")
    p.add_argument("input", nargs="?", default=None, help="text file (default stdin)")
    p.set_defaults(func=cmd_tag)

    p = sub.add_parser("eval", help="score a model against a TSV dataset")
    p.add_argument("--model", required=True, help="model file or hybrid manifest")
    p.add_argument("dataset", help="gold TSV dataset")
    p.add_argument("--config", help="pipeline config file")
    p.add_argument("--out", default=None, help="report path prefix")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("repro", help="generate, train all models, evaluate all")
    p.add_argument("--config", help="pipeline config file")
    p.add_argument("--seed", type=int, help="override the master seed")
    p.set_defaults(func=cmd_repro)

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except MissingLexiconEntry as exc:
        _info(f"lexicon has no values for tag {exc.tag.name}")
        return EXIT_LEXICON
    except ConfigError as exc:
        _info(f"config error: {exc}")
        return EXIT_CONFIG
    except CorpusError as exc:
        _info(f"corpus error: {exc}")
        return EXIT_CONFIG
    except ModelFormatError as exc:
        _info(f"model error: {exc}")
        return EXIT_MODEL


if __name__ == "__main__":
    sys.exit(main())
