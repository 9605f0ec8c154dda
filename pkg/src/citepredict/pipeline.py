"""File-based pipeline stages and their shared run configuration.

Every stage reads the files written by the stages before it from the output
directory and writes its own files there. Each output file starts with the
configuration echo (``# key=value`` lines in text files, a ``"run"`` object
in JSON), which lists every setting except file locations and the thread
count. Output bytes therefore depend only on the data and the settings that
shape results.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import os
import shutil
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Mapping

from .centrality import (
    DEFAULT_EPSILON,
    betweenness_series,
    node_metrics,
    read_metrics,
    rotating_leadership_all,
    write_metrics,
)
from .corpus import describe, filter_complete, read_corpus, write_corpus
from .features import AGGREGATIONS, FEATURE_LABELS, assemble, label_top_quantile, read_feature_table, write_feature_table
from .gbt import Hyperparameters, fit, monte_carlo_cv
from .graph import build_author_network, build_publication_network, read_edgelist, write_edgelist
from .stats import compare_groups, correlation_matrix, split_exception_groups, write_group_comparison
from .synth import SynthConfig, generate
from .textmetrics import (
    CorpusTermTable,
    default_lexicon,
    default_stopwords,
    load_lexicon,
    load_stopwords,
    preprocess,
    text_metrics,
)

__all__ = [
    "RunConfig",
    "ConfigError",
    "MissingInputError",
    "STAGES",
    "load_config",
    "parse_config_text",
    "echo",
    "run_stage",
    "run_all",
]

PATH_KEYS = ("corpus", "lexicon", "stopwords", "output")
_NOT_ECHOED = set(PATH_KEYS) | {"threads"}


class ConfigError(ValueError):
    """Invalid or unreadable run configuration."""


class MissingInputError(FileNotFoundError):
    """An input file that an earlier stage (or the user) should have provided."""

    def __init__(self, path, hint: str = ""):
        self.path = os.fspath(path)
        msg = f"missing input file {self.path}"
        super().__init__(f"{msg}; {hint}" if hint else msg)

    def __str__(self):
        return self.args[0]


@dataclass(frozen=True)
class RunConfig:
    """Settings for one pipeline run.

    ``lexicon`` and ``stopwords`` left empty select the bundled lists.
    ``prediction_year`` of 0 means the last year present in the corpus.
    """

    corpus: str = "corpus.jsonl"
    lexicon: str = ""
    stopwords: str = ""
    output: str = "out"
    prediction_year: int = 0
    label_quantile: float = 0.25
    label_strict: bool = True
    aggregation: str = "mean"
    rotating_aggregation: str = "sum"
    epsilon: float = DEFAULT_EPSILON
    repetitions: int = 300
    train_fraction: float = 0.75
    n_rounds: int = 100
    max_depth: int = 4
    learning_rate: float = 0.1
    reg_lambda: float = 1.0
    gamma: float = 0.0
    group_low_q: float = 0.25
    group_high_q: float = 0.25
    seed: int = 0
    threads: int = 1
    synth_n_authors: int = 8000
    synth_pubs_per_year: str = "3200,3350,3450"
    synth_first_year: int = 2010
    synth_byline_mean: float = 4.35
    synth_byline_max: int = 40
    synth_coefficients: str = "sjr:1.5,x9:0.8"
    synth_intercept: float = 3.0
    synth_noise: float = 0.6

    def __post_init__(self):
        checks = [
            (0 < self.label_quantile < 1, "label_quantile must lie in (0, 1)"),
            (self.aggregation in AGGREGATIONS, f"aggregation must be one of {sorted(AGGREGATIONS)}"),
            (self.rotating_aggregation in AGGREGATIONS, f"rotating_aggregation must be one of {sorted(AGGREGATIONS)}"),
            (self.epsilon >= 0, "epsilon must be non-negative"),
            (self.repetitions >= 1, "repetitions must be at least 1"),
            (0 < self.train_fraction < 1, "train_fraction must lie in (0, 1)"),
            (0 <= self.group_low_q < 1 and 0 < self.group_high_q < 1, "group quantiles must lie in [0, 1)"),
            (self.threads >= 1, "threads must be at least 1"),
            (self.prediction_year >= 0, "prediction_year must be a year or 0"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ConfigError(msg)
        try:
            self.hyperparameters()
            self.synth_config()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def hyperparameters(self) -> Hyperparameters:
        return Hyperparameters(self.n_rounds, self.max_depth, self.learning_rate, self.reg_lambda, self.gamma)

    def synth_config(self) -> SynthConfig:
        try:
            per_year = tuple(int(x) for x in self.synth_pubs_per_year.split(",") if x.strip())
            coefs = {}
            for item in self.synth_coefficients.split(","):
                if item.strip():
                    name, _, value = item.partition(":")
                    coefs[name.strip()] = float(value)
        except ValueError:
            raise ConfigError("synth_pubs_per_year needs integers 'a,b,c'; synth_coefficients needs 'name:value,...'") from None
        return SynthConfig(
            n_authors=self.synth_n_authors,
            pubs_per_year=per_year,
            first_year=self.synth_first_year,
            byline_mean=self.synth_byline_mean,
            byline_max=self.synth_byline_max,
            coefficients=coefs,
            intercept=self.synth_intercept,
            noise=self.synth_noise,
            seed=self.seed,
        )

    @property
    def out(self) -> Path:
        return Path(self.output)


_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _convert(key: str, value: str):
    kind = _TYPES[key]
    value = value.strip()
    try:
        if kind == "int":
            return int(value)
        if kind == "float":
            x = float(value)
            if not math.isfinite(x):
                raise ValueError
            return x
        if kind == "bool":
            low = value.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError
    except ValueError:
        raise ConfigError(f"{key}: cannot read {value!r} as {kind}") from None
    return value


def parse_config_text(text: str, base_dir=None) -> dict:
    """Parse flat ``key=value`` lines; ``#`` starts a comment line.

    Relative paths are resolved against ``base_dir`` when given.
    """
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep:
            raise ConfigError(f"config line {lineno}: expected key=value")
        if key not in _TYPES:
            raise ConfigError(f"config line {lineno}: unknown key {key!r}")
        v = _convert(key, value)
        if key in PATH_KEYS and v and base_dir is not None and not os.path.isabs(v):
            v = os.path.join(base_dir, v)
        out[key] = v
    return out


def load_config(path=None, overrides: Mapping[str, object] | None = None) -> RunConfig:
    """Defaults, then the config file, then ``overrides`` (strings are converted)."""
    values = {}
    if path is not None:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc.strerror}") from None
        values.update(parse_config_text(text, base_dir=os.path.dirname(os.fspath(path)) or None))
    for k, v in (overrides or {}).items():
        if k not in _TYPES:
            raise ConfigError(f"unknown config key {k!r}")
        values[k] = _convert(k, v) if isinstance(v, str) else v
    return RunConfig(**values)


def _fmt_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()[:16]


def echo(cfg: RunConfig) -> list[str]:
    """``key=value`` lines for every setting that can change results."""
    lines = [f"{k}={_fmt_value(v)}" for k, v in asdict(cfg).items() if k not in _NOT_ECHOED]
    for key in ("lexicon", "stopwords"):
        path = getattr(cfg, key)
        lines.append(f"{key}_sha256={_digest(path) if path else 'bundled'}")
    return lines


def _echo_dict(cfg: RunConfig) -> dict:
    return dict(line.split("=", 1) for line in echo(cfg))


# output layout, relative to the output directory
CLEAN = "corpus.clean.jsonl"
DROPS = "drop_report.txt"
DESCRIPTIVE = "descriptive.csv"
GRAPH_DIR = "graphs"
METRIC_DIR = "metrics"
FEATURES = "features.csv"
CORRELATIONS = "correlations.csv"
EVALUATION = "evaluation.json"
IMPORTANCES = "importances.json"
MODEL = "model.json"
GROUPS = "groups.csv"
REPORT_DIR = "report"


def _need(path: Path, stage: str | None = None) -> Path:
    if not path.is_file():
        raise MissingInputError(path, f"run the '{stage}' stage first" if stage else "")
    return path


def _write_json(path: Path, obj) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")


def _clean_corpus(cfg: RunConfig):
    return read_corpus(_need(cfg.out / CLEAN, "ingest"))


def _lexicon(cfg):
    if not cfg.lexicon:
        return default_lexicon()
    return load_lexicon(_need(Path(cfg.lexicon)))


def _stopwords(cfg):
    if not cfg.stopwords:
        return default_stopwords()
    return load_stopwords(_need(Path(cfg.stopwords)))


def stage_synth(cfg: RunConfig) -> list[Path]:
    """Write a synthetic raw corpus to the ``corpus`` path."""
    corpus = generate(cfg.synth_config())
    path = Path(cfg.corpus)
    path.parent.mkdir(parents=True, exist_ok=True)
    write_corpus(corpus, path, echo(cfg))
    return [path]


def stage_ingest(cfg: RunConfig) -> list[Path]:
    raw = read_corpus(_need(Path(cfg.corpus)))
    clean, drops = filter_complete(raw)
    cfg.out.mkdir(parents=True, exist_ok=True)
    write_corpus(clean, cfg.out / CLEAN, echo(cfg))
    with open(cfg.out / DROPS, "w", encoding="utf-8", newline="\n") as fh:
        fh.writelines(f"# {h}\n" for h in echo(cfg))
        fh.write(f"records_read\t{len(raw)}\nrecords_kept\t{len(clean)}\n")
        fh.write(drops.to_text())
    return [cfg.out / CLEAN, cfg.out / DROPS]


def stage_describe(cfg: RunConfig) -> list[Path]:
    stats = describe(_clean_corpus(cfg))
    path = cfg.out / DESCRIPTIVE
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.writelines(f"# {h}\n" for h in echo(cfg))
        csv.writer(fh, lineterminator="\n").writerows(stats.to_rows())
    return [path]


def _graph_paths(cfg, years):
    d = cfg.out / GRAPH_DIR
    return d / "author.edges", d / "publication.edges", {y: d / f"author_{y}.edges" for y in years}


def stage_graphs(cfg: RunConfig) -> list[Path]:
    corpus = _clean_corpus(cfg)
    years = corpus.years
    a_path, p_path, yearly = _graph_paths(cfg, years)
    a_path.parent.mkdir(parents=True, exist_ok=True)
    head = echo(cfg)
    write_edgelist(build_author_network(corpus, years), a_path, head)
    write_edgelist(build_publication_network(corpus, years), p_path, head)
    for y, path in yearly.items():
        write_edgelist(build_author_network(corpus, [y]), path, head)
    return [a_path, p_path, *yearly.values()]


def _metric_paths(cfg):
    d = cfg.out / METRIC_DIR
    return d / "author.txt", d / "publication.txt", d / "rotating.txt"


def stage_metrics(cfg: RunConfig) -> list[Path]:
    """Score both networks and the yearly author series.

    Edge lists omit isolated nodes, so the cleaned corpus supplies the node
    rosters.
    """
    corpus = _clean_corpus(cfg)
    years = corpus.years
    a_path, p_path, yearly = _graph_paths(cfg, years)
    authors = sorted({a for r in corpus for a in r.author_ids})
    author_net = read_edgelist(_need(a_path, "graphs"), authors)
    pub_net = read_edgelist(_need(p_path, "graphs"), [r.pub_id for r in corpus])
    yearly_nets = {
        y: read_edgelist(_need(path, "graphs"), {a for r in corpus.select([y]) for a in r.author_ids})
        for y, path in yearly.items()
    }
    rot = rotating_leadership_all(betweenness_series(yearly_nets, authors, cfg.threads), cfg.epsilon)
    am_path, pm_path, rot_path = _metric_paths(cfg)
    am_path.parent.mkdir(parents=True, exist_ok=True)
    head = echo(cfg)
    write_metrics(node_metrics(author_net, cfg.threads), am_path, head)
    write_metrics(node_metrics(pub_net, cfg.threads), pm_path, head)
    with open(rot_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.writelines(f"# {h}\n" for h in head)
        fh.writelines(f"{a} {rot[a]}\n" for a in authors)
    return [am_path, pm_path, rot_path]


def _read_rotating(path: Path) -> dict[str, int]:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts or parts[0].startswith("#"):
                continue
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected 'author count'")
            out[parts[0]] = int(parts[1])
    return out


def _prediction_year(cfg, corpus) -> int:
    year = cfg.prediction_year or max(corpus.years)
    if year not in corpus.years:
        raise ConfigError(f"prediction_year {year} has no publications in the cleaned corpus")
    return year


def stage_features(cfg: RunConfig) -> list[Path]:
    corpus = _clean_corpus(cfg)
    am_path, pm_path, rot_path = _metric_paths(cfg)
    author_metrics = read_metrics(_need(am_path, "metrics"))
    pub_metrics = read_metrics(_need(pm_path, "metrics"))
    rotating = _read_rotating(_need(rot_path, "metrics"))
    lexicon, stop = _lexicon(cfg), _stopwords(cfg)
    tokens = {r.pub_id: preprocess(r.abstract, stop) for r in corpus}
    terms = CorpusTermTable.from_tokens(t.tokens for t in tokens.values())
    text = {p: text_metrics(t, lexicon, terms) for p, t in tokens.items()}
    table = assemble(
        corpus, pub_metrics, author_metrics, rotating, text,
        _prediction_year(cfg, corpus), cfg.aggregation, cfg.rotating_aggregation,
    )
    if len(table) == 0:
        raise ValueError("no complete publications in the prediction year")
    labeled = label_top_quantile(table.rows, cfg.label_quantile, strict=cfg.label_strict)
    labeled = replace(labeled, metadata={**table.metadata, **labeled.metadata})
    path = cfg.out / FEATURES
    write_feature_table(labeled, path, echo(cfg))
    return [path]


def _features(cfg):
    return read_feature_table(_need(cfg.out / FEATURES, "features"))


def stage_correlate(cfg: RunConfig) -> list[Path]:
    path = cfg.out / CORRELATIONS
    correlation_matrix(_features(cfg)).write_csv(path, echo(cfg))
    return [path]


def stage_train(cfg: RunConfig) -> list[Path]:
    """Monte-Carlo evaluation plus one model fitted on the whole table."""
    table = _features(cfg)
    run = _echo_dict(cfg)
    hp = cfg.hyperparameters()
    report = monte_carlo_cv(
        table, cfg.repetitions, cfg.train_fraction, hp, cfg.seed, cfg.threads, config={"run": run},
    )
    model = fit(table.matrix(), table.labels(), hp, seed=cfg.seed, feature_names=table.feature_names)
    _write_json(cfg.out / EVALUATION, report.to_json())
    _write_json(cfg.out / IMPORTANCES, report.importances_json())
    _write_json(cfg.out / MODEL, {"run": run, "model": model.to_json()})
    return [cfg.out / EVALUATION, cfg.out / IMPORTANCES, cfg.out / MODEL]


def stage_compare_groups(cfg: RunConfig) -> list[Path]:
    table = _features(cfg)
    group_a, group_b = split_exception_groups(table, cfg.group_low_q, cfg.group_high_q)
    rows = compare_groups(group_a, group_b)
    path = cfg.out / GROUPS
    write_group_comparison(rows, len(group_a), len(group_b), path, echo(cfg))
    return [path]


_BUNDLE = (
    (DESCRIPTIVE, "descriptive_stats.csv", "describe"),
    (CORRELATIONS, "correlations.csv", "correlate"),
    (IMPORTANCES, "importances.json", "train"),
    (EVALUATION, "evaluation.json", "train"),
    (GROUPS, "groups.csv", "compare-groups"),
)


def _summary(cfg, evaluation: dict, importances: dict) -> str:
    lines = [f"# {h}" for h in echo(cfg)]
    lines.append("")
    lines.append(f"Monte-Carlo cross-validation, {evaluation['repetitions']} repetitions")
    for name, agg in evaluation["aggregate"].items():
        lines.append(f"  {name:<9} mean {agg['mean']:.4f}  sd {agg['sd']:.4f}")
    lines.append("")
    lines.append("Mean |SHAP| by feature")
    for rank, row in enumerate(importances["importances"], start=1):
        lines.append(f"  {rank:>2}. {row['feature']:<10} {FEATURE_LABELS.get(row['feature'], ''):<34} {row['mean_abs_shap']:.4f}")
    return "\n".join(lines) + "\n"


def stage_report(cfg: RunConfig) -> list[Path]:
    """Copy the table- and figure-shaped outputs into ``report/`` with a text summary."""
    sources = [(_need(cfg.out / src, stage), dst) for src, dst, stage in _BUNDLE]
    dest = cfg.out / REPORT_DIR
    if dest.exists():
        shutil.rmtree(dest)
    dest.mkdir(parents=True)
    written = []
    for src, dst in sources:
        shutil.copyfile(src, dest / dst)
        written.append(dest / dst)
    evaluation = json.loads((cfg.out / EVALUATION).read_text(encoding="utf-8"))
    importances = json.loads((cfg.out / IMPORTANCES).read_text(encoding="utf-8"))
    summary = dest / "summary.txt"
    summary.write_text(_summary(cfg, evaluation, importances), encoding="utf-8")
    return [*written, summary]


STAGES = {
    "synth": stage_synth,
    "ingest": stage_ingest,
    "describe": stage_describe,
    "graphs": stage_graphs,
    "metrics": stage_metrics,
    "features": stage_features,
    "correlate": stage_correlate,
    "train": stage_train,
    "compare-groups": stage_compare_groups,
    "report": stage_report,
}

PIPELINE_ORDER = ("ingest", "describe", "graphs", "metrics", "features", "correlate", "train", "compare-groups", "report")


def run_stage(name: str, cfg: RunConfig) -> list[Path]:
    return STAGES[name](cfg)


def run_all(cfg: RunConfig, synth: bool = False) -> list[Path]:
    """Run every stage from ``ingest`` to ``report`` (optionally ``synth`` first)."""
    written = []
    for name in (("synth",) if synth else ()) + PIPELINE_ORDER:
        written += run_stage(name, cfg)
    return written
