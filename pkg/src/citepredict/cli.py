"""Command-line entry point: one subcommand per pipeline stage.

Exit status is 0 on success, 1 for usage or configuration errors and 2 for
data errors (missing or malformed input files). Errors print one line to
stderr.
"""

from __future__ import annotations

import argparse
import sys
import warnings
from dataclasses import fields

from .corpus import CorpusError
from .pipeline import PIPELINE_ORDER, STAGES, ConfigError, MissingInputError, RunConfig, load_config, run_stage
from .textmetrics import LexiconError

__all__ = ["main", "build_parser"]

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2

_HELP = {
    "corpus": "raw corpus JSONL (read by ingest, written by synth)",
    "lexicon": "sentiment lexicon, token<TAB>valence per line (default: bundled)",
    "stopwords": "stop-word list, one token per line (default: bundled)",
    "output": "directory for stage outputs",
    "prediction_year": "cohort to label and model (0: last year in the corpus)",
    "label_quantile": "top fraction of citations labeled positive",
    "label_strict": "positive means strictly above the threshold (true/false)",
    "aggregation": "author-to-publication aggregation for x5-x8 (mean/max/sum)",
    "rotating_aggregation": "author-to-publication aggregation for x9 (mean/max/sum)",
    "epsilon": "relative change that counts as a significant swing in rotating leadership",
    "repetitions": "Monte-Carlo cross-validation repetitions",
    "train_fraction": "training share of each random split",
    "n_rounds": "boosting rounds",
    "max_depth": "maximum tree depth",
    "learning_rate": "shrinkage per round",
    "reg_lambda": "L2 penalty on leaf weights",
    "gamma": "minimum split gain",
    "group_low_q": "SJR quantile bounding the low-SJR highly cited group",
    "group_high_q": "top SJR fraction forming the comparison group",
    "seed": "master seed (synth corpus and CV splits)",
    "threads": "worker threads; never changes outputs",
    "synth_n_authors": "synthetic author pool size",
    "synth_pubs_per_year": "comma-separated publication counts, one per year",
    "synth_first_year": "first synthetic publication year",
    "synth_byline_mean": "mean byline size",
    "synth_byline_max": "maximum byline size",
    "synth_coefficients": "planted effects as feature:coef,...",
    "synth_intercept": "latent citation intercept",
    "synth_noise": "latent noise scale",
}

_STAGE_HELP = {
    "synth": "generate a synthetic raw corpus at --corpus",
    "ingest": "parse --corpus, drop incomplete records",
    "describe": "per-year descriptive statistics",
    "graphs": "author and publication network edge lists",
    "metrics": "centrality dumps and rotating leadership",
    "features": "text metrics, feature table and labels",
    "correlate": "Spearman correlation matrix",
    "train": "Monte-Carlo CV, SHAP importances, final model",
    "compare-groups": "Welch t-tests: low-SJR vs top-SJR highly cited papers",
    "report": "bundle the table and figure outputs into report/",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _options() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", metavar="FILE", help="flat key=value config file")
    for f in fields(RunConfig):
        flags = [f"--{f.name}"]
        if "_" in f.name:
            flags.append(f"--{f.name.replace('_', '-')}")
        common.add_argument(*flags, dest=f.name, metavar="VALUE", default=None,
                            help=f"{_HELP[f.name]} [default: {f.default!r}]")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _options()
    parser = _Parser(
        prog="citepredict",
        description="Citation-impact feature pipeline. Stages in order: " + " -> ".join(PIPELINE_ORDER) + ".",
        epilog="Every config key can be given as --key VALUE and overrides the config file.",
    )
    sub = parser.add_subparsers(dest="stage", metavar="STAGE", parser_class=_Parser)
    sub.required = True
    for name in STAGES:
        sub.add_parser(name, parents=[common], help=_STAGE_HELP[name], description=_STAGE_HELP[name])
    return parser


def _one_line(exc: BaseException) -> str:
    return " ".join(str(exc).split()) or type(exc).__name__


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    overrides = {f.name: getattr(args, f.name) for f in fields(RunConfig) if getattr(args, f.name) is not None}
    try:
        cfg = load_config(args.config, overrides)
    except ConfigError as exc:
        print(f"citepredict: config error: {_one_line(exc)}", file=sys.stderr)
        return EXIT_USAGE
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("always")
            written = run_stage(args.stage, cfg)
    except ConfigError as exc:
        print(f"citepredict {args.stage}: config error: {_one_line(exc)}", file=sys.stderr)
        return EXIT_USAGE
    except MissingInputError as exc:
        print(f"citepredict {args.stage}: {_one_line(exc)}", file=sys.stderr)
        return EXIT_DATA
    except (CorpusError, LexiconError, ValueError, KeyError, OSError) as exc:
        print(f"citepredict {args.stage}: data error: {_one_line(exc)}", file=sys.stderr)
        return EXIT_DATA
    for path in written:
        print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
