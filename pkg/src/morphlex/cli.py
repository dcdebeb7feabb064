"""Command-line front-end: training, translation, evaluation, seed
extraction and OOV composition.

Exit codes are a stable contract for scripting: 0 success, 1 usage
error, 2 data/format error, 3 untrainable or unevaluable condition.
Every subcommand writes a run manifest (inputs, flags, seed, versions)
next to its primary output, and any flag that overrides a stock default
is echoed to stderr for provenance.
"""

from __future__ import annotations

import argparse
import json
import logging
import platform
import sys

import numpy as np

from . import __version__
from .embeddings import (
    CompositionError,
    DEFAULT_MAX_WORDS,
    VecFormatError,
    compose_oov,
    ensure_preprocessed,
    load_ngram_table,
    load_space,
    save_space,
)
from .evaluation import (
    DictionaryFormatError,
    EmptyDictionaryError,
    NoOverlapError,
    NoTaggedEntriesError,
    extract_identical_seed,
    precision_at_1,
    read_eval_dictionary,
    read_seed_dictionary,
    report_as_dict,
    write_bins_tsv,
    write_summary_tsv,
    write_tags_tsv,
)
from .morph import (
    MorphFormatError,
    TagParseError,
    analyzer_accuracy,
    inflector_accuracy,
    learn_analyzer,
    learn_inflector,
    load_rule_table,
    parse_tag,
    read_unimorph,
    save_rule_table,
)
from .pipeline import (
    MODE_BASE,
    MODE_DIRECT,
    MODE_HYBRID,
    MODE_ORACLE,
    JointConfig,
    UntranslatableError,
    joint_log_prob,
    translate_base,
    translate_direct,
    translate_hybrid,
    translate_oracle,
)
from .translator import (
    ModelFormatError,
    NoTrainablePairsError,
    TrainConfig,
    load_model,
    save_model,
    train,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_UNTRAINABLE = 3

NONE_FIELD = "<NONE>"

# Stock hyperparameter defaults; overrides get echoed for provenance.
DEFAULTS = {
    "alpha": 10.0,
    "learning_rate": 0.05,
    "min_learning_rate": 1e-8,
    "batch_size": 24,
    "max_words": DEFAULT_MAX_WORDS,
}

_DATA_ERRORS = (
    VecFormatError,
    ModelFormatError,
    MorphFormatError,
    DictionaryFormatError,
    TagParseError,
    FileNotFoundError,
    IsADirectoryError,
    PermissionError,
    UnicodeDecodeError,
    json.JSONDecodeError,
)

_UNTRAINABLE_ERRORS = (
    NoTrainablePairsError,
    EmptyDictionaryError,
    NoOverlapError,
    NoTaggedEntriesError,
)


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; our contract reserves 2 for data."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _echo_overrides(args: argparse.Namespace) -> None:
    for name, default in DEFAULTS.items():
        value = getattr(args, name, None)
        if value is not None and value != default:
            print(
                f"note: --{name.replace('_', '-')} {value} overrides the default {default}",
                file=sys.stderr,
            )


def _write_manifest(output_path: str, args: argparse.Namespace) -> None:
    arguments = {
        key: value
        for key, value in sorted(vars(args).items())
        if key not in ("func", "command", "verbose") and not callable(value)
    }
    manifest = {
        "command": args.command,
        "arguments": arguments,
        "seed": getattr(args, "seed", None),
        "versions": {
            "morphlex": __version__,
            "numpy": np.__version__,
            "python": platform.python_version(),
        },
    }
    with open(f"{output_path}.manifest.json", "w", encoding="utf-8") as handle:
        json.dump(manifest, handle, sort_keys=True, indent=2)
        handle.write("\n")


def _load_preprocessed_space(path: str, max_words: int):
    space = load_space(path, max_words=max_words)
    space, zero_words = ensure_preprocessed(space)
    if zero_words:
        logger.warning("%s: %d zero vectors could not be normalized", path, len(zero_words))
    return space


def cmd_train_translator(args: argparse.Namespace) -> int:
    _echo_overrides(args)
    source_space = _load_preprocessed_space(args.src, args.max_words)
    target_space = _load_preprocessed_space(args.tgt, args.max_words)
    seed_pairs = read_seed_dictionary(args.seed_dict)
    config = TrainConfig(
        alpha=args.alpha,
        learning_rate=args.learning_rate,
        min_learning_rate=args.min_learning_rate,
        batch_size=args.batch_size,
        max_epochs=args.max_epochs,
        dev_fraction=args.dev_fraction,
        seed=args.seed,
    )
    result = train(seed_pairs, source_space, target_space, config)
    metadata = {
        "source_path": args.src,
        "target_path": args.tgt,
        "unit_normalized": True,
        "source_center": [float(x) for x in source_space.center],
        "target_center": [float(x) for x in target_space.center],
        "dropped_pairs": result.dropped_pairs,
    }
    save_model(result.model, args.out, metadata=metadata)
    _write_manifest(args.out, args)
    print(
        f"epochs run: {result.epochs_run}; final dev loss: {result.dev_losses[-1]:.6f}; "
        f"best dev loss: {result.best_dev_loss:.6f} (epoch {result.best_epoch}); "
        f"dropped pairs: {result.dropped_pairs}"
    )
    return EXIT_OK


def cmd_train_morph(args: argparse.Namespace) -> int:
    if not args.analyzer_out and not args.inflector_out:
        print("error: provide --analyzer-out and/or --inflector-out", file=sys.stderr)
        return EXIT_USAGE
    entries = read_unimorph(args.data)
    if args.exclude:
        excluded = read_eval_dictionary(args.exclude)
        drop = {e.source for e in excluded.entries}
        drop.update(g for e in excluded.entries for g in e.golds)
        before = len(entries)
        entries = [e for e in entries if e.form not in drop]
        print(f"exclusion: removed {before - len(entries)} of {before} entries", file=sys.stderr)
    if not entries:
        print("error: no training entries remain after exclusion", file=sys.stderr)
        return EXIT_UNTRAINABLE
    dev_entries = read_unimorph(args.dev) if args.dev else None
    if args.analyzer_out:
        analyzer = learn_analyzer(entries)
        save_rule_table(analyzer, args.analyzer_out)
        _write_manifest(args.analyzer_out, args)
        line = f"analyzer: {analyzer.num_rules()} rules, {len(analyzer.tags)} tags"
        if dev_entries:
            line += f", dev accuracy {analyzer_accuracy(analyzer, dev_entries):.4f}"
        print(line)
    if args.inflector_out:
        inflector = learn_inflector(entries)
        save_rule_table(inflector, args.inflector_out)
        _write_manifest(args.inflector_out, args)
        line = f"inflector: {inflector.num_rules()} rules, {len(inflector.tags)} tags"
        if dev_entries:
            line += f", dev accuracy {inflector_accuracy(inflector, dev_entries):.4f}"
        print(line)
    return EXIT_OK


def _build_joint_config(args: argparse.Namespace, mode: str) -> JointConfig:
    model = load_model(args.model)
    source_space = _load_preprocessed_space(args.src, args.max_words)
    target_space = _load_preprocessed_space(args.tgt, args.max_words)
    analyzer = load_rule_table(args.analyzer) if args.analyzer else None
    inflector = load_rule_table(args.inflector) if args.inflector else None
    ngram_table = load_ngram_table(args.ngrams, source_space.dim) if args.ngrams else None
    return JointConfig(
        mode=mode,
        model=model,
        source_space=source_space,
        target_space=target_space,
        analyzer=analyzer,
        inflector=inflector,
        ngram_table=ngram_table,
    )


def _require_components(args: argparse.Namespace, mode: str) -> str | None:
    if mode in (MODE_BASE, MODE_HYBRID) and (not args.analyzer or not args.inflector):
        return f"mode {mode!r} needs --analyzer and --inflector"
    if mode == MODE_ORACLE and not args.inflector:
        return "mode 'oracle' needs --inflector"
    return None


def _translate_line(config: JointConfig, mode: str, line: str) -> str:
    fields = line.split("\t")
    source_form = fields[0]
    try:
        if mode == MODE_ORACLE:
            if len(fields) != 3:
                print(
                    f"warning: oracle input needs form<TAB>lemma<TAB>tag, got {line!r}",
                    file=sys.stderr,
                )
                return f"{source_form}\t{NONE_FIELD}\t-\t-"
            candidate = translate_oracle(config, source_form, fields[1], parse_tag(fields[2]))
        elif mode == MODE_BASE:
            candidate = translate_base(config, source_form)
        elif mode == MODE_HYBRID:
            candidate = translate_hybrid(config, source_form)
        else:
            candidate = translate_direct(config, source_form)
    except (UntranslatableError, TagParseError, KeyError, LookupError):
        return f"{source_form}\t{NONE_FIELD}\t-\t-"
    return (
        f"{source_form}\t{candidate.form}\t{candidate.route}\t"
        f"{joint_log_prob(candidate):.6f}"
    )


def cmd_translate(args: argparse.Namespace) -> int:
    _echo_overrides(args)
    problem = _require_components(args, args.mode)
    if problem:
        print(f"error: {problem}", file=sys.stderr)
        return EXIT_USAGE
    config = _build_joint_config(args, args.mode)
    in_handle = sys.stdin if args.input == "-" else open(args.input, encoding="utf-8")
    out_handle = sys.stdout if args.output == "-" else open(args.output, "w", encoding="utf-8")
    try:
        for raw in in_handle:
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            out_handle.write(_translate_line(config, args.mode, line) + "\n")
    finally:
        if in_handle is not sys.stdin:
            in_handle.close()
        if out_handle is not sys.stdout:
            out_handle.close()
    if args.output != "-":
        _write_manifest(args.output, args)
    return EXIT_OK


def cmd_evaluate(args: argparse.Namespace) -> int:
    _echo_overrides(args)
    problem = _require_components(args, args.mode)
    if problem:
        print(f"error: {problem}", file=sys.stderr)
        return EXIT_USAGE
    if args.mode == MODE_ORACLE and not args.oracle_analyses:
        print("error: mode 'oracle' needs --oracle-analyses", file=sys.stderr)
        return EXIT_USAGE
    config = _build_joint_config(args, args.mode)
    dictionary = read_eval_dictionary(args.dict)

    if args.mode == MODE_ORACLE:
        gold: dict[str, tuple[str, object]] = {}
        with open(args.oracle_analyses, encoding="utf-8") as handle:
            for lineno, line in enumerate(handle, start=1):
                line = line.rstrip("\n")
                if not line.strip():
                    continue
                fields = line.split("\t")
                if len(fields) != 3:
                    raise DictionaryFormatError(
                        f"{args.oracle_analyses}: line {lineno}: expected 3 columns"
                    )
                gold[fields[0]] = (fields[1], parse_tag(fields[2]))

        def system(form: str) -> str | None:
            if form not in gold:
                return None
            lemma, tag = gold[form]
            try:
                return translate_oracle(config, form, lemma, tag).form
            except (UntranslatableError, KeyError, LookupError):
                return None

    else:
        translate_fn = {
            MODE_BASE: translate_base,
            MODE_HYBRID: translate_hybrid,
            MODE_DIRECT: translate_direct,
        }[args.mode]

        def system(form: str) -> str | None:
            try:
                return translate_fn(config, form).form
            except (UntranslatableError, KeyError, LookupError):
                return None

    report = precision_at_1(
        system,
        dictionary,
        config.source_space,
        bin_width=args.bin_width,
        num_bins=args.num_bins,
        min_tag_count=args.min_tag_count,
    )
    prefix = args.out_prefix
    write_summary_tsv(report, f"{prefix}.summary.tsv")
    write_bins_tsv(report, f"{prefix}.bins.tsv")
    write_tags_tsv(report, f"{prefix}.tags.tsv")
    with open(f"{prefix}.report.json", "w", encoding="utf-8") as handle:
        json.dump(report_as_dict(report), handle, sort_keys=True, indent=2)
        handle.write("\n")
    _write_manifest(f"{prefix}.summary.tsv", args)
    print(
        f"precision@1: voc {report.voc_precision:.4f} ({report.voc_total}), "
        f"all {report.all_precision:.4f} ({report.all_total}), "
        f"untranslatable {report.untranslatable}"
    )
    return EXIT_OK


def cmd_extract_seed(args: argparse.Namespace) -> int:
    source_space = load_space(args.src, max_words=args.max_words)
    target_space = load_space(args.tgt, max_words=args.max_words)
    pairs = extract_identical_seed(source_space, target_space)
    with open(args.out, "w", encoding="utf-8") as handle:
        for source_word, target_word in pairs:
            handle.write(f"{source_word}\t{target_word}\n")
    _write_manifest(args.out, args)
    print(f"{len(pairs)} identical strings written to {args.out}")
    return EXIT_OK


def cmd_compose_oov(args: argparse.Namespace) -> int:
    space = load_space(args.space, max_words=args.max_words)
    table = load_ngram_table(args.ngrams, space.dim)
    with open(args.forms, encoding="utf-8") as handle:
        forms = [line.strip() for line in handle if line.strip()]
    additions = []
    failures = 0
    for form in forms:
        if form in space:
            logger.warning("compose-oov: %r already in the vocabulary, skipped", form)
            continue
        try:
            vec = compose_oov(form, table, min_n=args.min_ngram, max_n=args.max_ngram)
        except CompositionError:
            failures += 1
            logger.warning("compose-oov: no n-gram coverage for %r", form)
            continue
        if space.unit_normalized:
            norm = float(np.linalg.norm(vec))
            if norm > 0.0:
                vec = vec / norm
        if space.center is not None:
            vec = vec - space.center
        additions.append((form, vec))
    if not additions and forms:
        print("error: no form could be composed", file=sys.stderr)
        return EXIT_UNTRAINABLE
    grown = space.with_composed(additions)
    save_space(grown, args.out)
    _write_manifest(args.out, args)
    print(f"composed {len(additions)} vectors ({failures} failures); wrote {args.out}")
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="morphlex", description=__doc__)
    parser.add_argument("--verbose", action="store_true", help="log at INFO level")
    commands = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add_max_words(p):
        p.add_argument("--max-words", type=int, default=DEFAULT_MAX_WORDS,
                       help="vocabulary cap per space (default %(default)s)")

    p = commands.add_parser("train-translator", help="fit the log-bilinear mapping")
    p.add_argument("--src", required=True, help="source .vec file")
    p.add_argument("--tgt", required=True, help="target .vec file")
    p.add_argument("--seed-dict", required=True, help="seed dictionary TSV")
    p.add_argument("--out", required=True, help="output model file")
    p.add_argument("--alpha", type=float, default=10.0,
                   help="orthogonal regularization weight (default %(default)s)")
    p.add_argument("--learning-rate", type=float, default=0.05)
    p.add_argument("--min-learning-rate", type=float, default=1e-8)
    p.add_argument("--batch-size", type=int, default=24)
    p.add_argument("--max-epochs", type=int, default=50)
    p.add_argument("--dev-fraction", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    add_max_words(p)
    p.set_defaults(func=cmd_train_translator)

    p = commands.add_parser("train-morph", help="learn suffix-rule transducers")
    p.add_argument("--data", required=True, help="UniMorph TSV (lemma, form, tag)")
    p.add_argument("--analyzer-out", help="output analyzer rule table")
    p.add_argument("--inflector-out", help="output inflector rule table")
    p.add_argument("--exclude", help="evaluation dictionary whose forms are excluded")
    p.add_argument("--dev", help="UniMorph TSV for held-out accuracy reporting")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_train_morph)

    def add_pipeline_flags(p):
        p.add_argument("--model", required=True, help="trained omega file")
        p.add_argument("--src", required=True, help="source .vec file")
        p.add_argument("--tgt", required=True, help="target .vec file")
        p.add_argument("--analyzer", help="source analyzer rule table")
        p.add_argument("--inflector", help="target inflector rule table")
        p.add_argument("--ngrams", help="source n-gram table for OOV composition")
        p.add_argument("--mode", choices=[MODE_BASE, MODE_HYBRID, MODE_ORACLE, MODE_DIRECT],
                       default=MODE_BASE)
        add_max_words(p)

    p = commands.add_parser("translate", help="translate forms, one per line")
    add_pipeline_flags(p)
    p.add_argument("--input", default="-", help="input file, '-' for stdin")
    p.add_argument("--output", default="-", help="output file, '-' for stdout")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_translate)

    p = commands.add_parser("evaluate", help="precision@1 with breakdowns")
    add_pipeline_flags(p)
    p.add_argument("--dict", required=True, help="evaluation dictionary TSV")
    p.add_argument("--out-prefix", required=True, help="prefix for report files")
    p.add_argument("--oracle-analyses", help="form<TAB>lemma<TAB>tag file for oracle mode")
    p.add_argument("--bin-width", type=int, default=10_000)
    p.add_argument("--num-bins", type=int, default=10)
    p.add_argument("--min-tag-count", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_evaluate)

    p = commands.add_parser("extract-seed", help="identical-string weak supervision")
    p.add_argument("--src", required=True)
    p.add_argument("--tgt", required=True)
    p.add_argument("--out", required=True)
    add_max_words(p)
    p.set_defaults(func=cmd_extract_seed)

    p = commands.add_parser("compose-oov", help="append composed OOV vectors to a space")
    p.add_argument("--space", required=True, help=".vec file to extend")
    p.add_argument("--ngrams", required=True, help="n-gram table file")
    p.add_argument("--forms", required=True, help="file with one OOV form per line")
    p.add_argument("--out", required=True, help="output .vec file")
    p.add_argument("--min-ngram", type=int, default=3)
    p.add_argument("--max-ngram", type=int, default=6)
    add_max_words(p)
    p.set_defaults(func=cmd_compose_oov)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except _DATA_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except _UNTRAINABLE_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNTRAINABLE


if __name__ == "__main__":
    sys.exit(main())
