"""Bibliographic corpus: parsing, completeness filtering and descriptive statistics.

Records arrive as JSON Lines, one publication per line::

    {"pub_id": "p1", "year": 2012, "authors": ["a1", "a2"],
     "abstract": "...", "sjr": 1.3, "citations": 12}

Unknown keys are ignored. Blank lines and lines starting with ``#`` are
skipped, which lets pipeline stages prepend a configuration echo.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

__all__ = [
    "CorpusError",
    "PublicationRecord",
    "Corpus",
    "DropReport",
    "YearStats",
    "DescriptiveStats",
    "parse_corpus",
    "read_corpus",
    "serialize_corpus",
    "write_corpus",
    "filter_complete",
    "describe",
    "DEFAULT_SCHEMA",
]

DEFAULT_SCHEMA = {
    "pub_id": "pub_id",
    "year": "year",
    "authors": "authors",
    "abstract": "abstract",
    "sjr": "sjr",
    "citations": "citations",
}

DROP_REASONS = ("empty byline", "missing abstract", "missing sjr", "missing citations")


class CorpusError(ValueError):
    """Raised for malformed or inconsistent corpus input."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class PublicationRecord:
    pub_id: str
    year: int
    author_ids: tuple[str, ...]
    abstract: str = ""
    sjr: float | None = None
    citations: int | None = None

    @property
    def n_authors(self) -> int:
        return len(self.author_ids)

    def to_json(self) -> dict:
        return {
            "pub_id": self.pub_id,
            "year": self.year,
            "authors": list(self.author_ids),
            "abstract": self.abstract,
            "sjr": self.sjr,
            "citations": self.citations,
        }


@dataclass(frozen=True)
class Corpus:
    """An immutable, indexed collection of publication records.

    ``author_index`` maps every author id to the frozenset of pub ids whose
    byline lists that author. Record order is the input order.
    """

    records: tuple[PublicationRecord, ...]
    year_window: tuple[int, int] | None
    author_index: Mapping[str, frozenset] = field(compare=False, repr=False)
    _by_id: Mapping[str, PublicationRecord] = field(compare=False, repr=False)

    @classmethod
    def from_records(cls, records: Iterable[PublicationRecord], year_window=None) -> "Corpus":
        records = tuple(records)
        by_id = {}
        index: dict[str, set] = {}
        for rec in records:
            if rec.pub_id in by_id:
                raise CorpusError(f"duplicate pub_id {rec.pub_id!r}")
            if len(set(rec.author_ids)) != len(rec.author_ids):
                raise CorpusError(f"duplicate author in byline of {rec.pub_id!r}")
            by_id[rec.pub_id] = rec
            for a in rec.author_ids:
                index.setdefault(a, set()).add(rec.pub_id)
        if year_window is None and records:
            years = [r.year for r in records]
            year_window = (min(years), max(years))
        if year_window is not None:
            lo, hi = year_window
            for rec in records:
                if not lo <= rec.year <= hi:
                    raise CorpusError(f"{rec.pub_id!r}: year {rec.year} outside window {lo}-{hi}")
            year_window = (int(lo), int(hi))
        frozen_index = {a: frozenset(p) for a, p in index.items()}
        return cls(records, year_window, frozen_index, by_id)

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __getitem__(self, pub_id: str) -> PublicationRecord:
        return self._by_id[pub_id]

    def __contains__(self, pub_id) -> bool:
        return pub_id in self._by_id

    @property
    def years(self) -> list[int]:
        """Calendar years of the window, in order (empty for an empty corpus)."""
        if self.year_window is None:
            return []
        return list(range(self.year_window[0], self.year_window[1] + 1))

    def select(self, years: Iterable[int]) -> list[PublicationRecord]:
        years = set(years)
        return [r for r in self.records if r.year in years]

    def replace_records(self, records: Iterable[PublicationRecord]) -> "Corpus":
        return Corpus.from_records(records, self.year_window)


def _field(obj, schema, key, lineno, required=True):
    name = schema.get(key, key)
    if name not in obj or obj[name] is None:
        if required:
            raise CorpusError(f"missing field {name!r}", lineno)
        return None
    return obj[name]


def _parse_line(obj, schema, lineno) -> PublicationRecord:
    if not isinstance(obj, dict):
        raise CorpusError("record is not a JSON object", lineno)
    pub_id = _field(obj, schema, "pub_id", lineno)
    if not isinstance(pub_id, str) or not pub_id:
        raise CorpusError("pub_id must be a non-empty string", lineno)
    year = _field(obj, schema, "year", lineno)
    if isinstance(year, bool) or not isinstance(year, int):
        raise CorpusError("year must be an integer", lineno)
    authors = _field(obj, schema, "authors", lineno)
    if not isinstance(authors, list) or not all(isinstance(a, str) and a for a in authors):
        raise CorpusError("authors must be an array of non-empty strings", lineno)
    if not authors:
        raise CorpusError(f"record {pub_id!r} has an empty author list", lineno)
    if len(set(authors)) != len(authors):
        raise CorpusError(f"record {pub_id!r} lists an author twice", lineno)
    abstract = _field(obj, schema, "abstract", lineno, required=False)
    if abstract is None:
        abstract = ""
    if not isinstance(abstract, str):
        raise CorpusError("abstract must be a string", lineno)
    sjr = _field(obj, schema, "sjr", lineno, required=False)
    if sjr is not None:
        if isinstance(sjr, bool) or not isinstance(sjr, (int, float)) or not math.isfinite(sjr) or sjr < 0:
            raise CorpusError("sjr must be a non-negative number", lineno)
        sjr = float(sjr)
    cites = _field(obj, schema, "citations", lineno, required=False)
    if cites is not None:
        if isinstance(cites, float) and cites.is_integer():
            cites = int(cites)
        if isinstance(cites, bool) or not isinstance(cites, int) or cites < 0:
            raise CorpusError("citations must be a non-negative integer", lineno)
    return PublicationRecord(pub_id, year, tuple(authors), abstract, sjr, cites)


def parse_corpus(lines: Iterable[str], schema: Mapping[str, str] | None = None, year_window=None) -> Corpus:
    """Parse a JSON Lines record stream into a :class:`Corpus`.

    Parameters
    ----------
    lines : iterable of str
        One JSON object per line. Blank and ``#`` lines are skipped.
    schema : mapping, optional
        Canonical field name -> field name used in the input.
    year_window : (int, int), optional
        Inclusive year range; records outside it are rejected. Inferred
        from the data when omitted.

    Raises
    ------
    CorpusError
        On a malformed line, a duplicate ``pub_id`` or an empty byline. The
        message names the offending 1-based line number.
    """
    schema = {**DEFAULT_SCHEMA, **(schema or {})}
    records = []
    seen: dict[str, int] = {}
    for lineno, line in enumerate(lines, start=1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise CorpusError(f"invalid JSON ({exc.msg})", lineno) from None
        rec = _parse_line(obj, schema, lineno)
        if rec.pub_id in seen:
            raise CorpusError(f"duplicate pub_id {rec.pub_id!r} (first seen on line {seen[rec.pub_id]})", lineno)
        seen[rec.pub_id] = lineno
        if year_window is not None and not year_window[0] <= rec.year <= year_window[1]:
            raise CorpusError(f"year {rec.year} outside window {year_window[0]}-{year_window[1]}", lineno)
        records.append(rec)
    return Corpus.from_records(records, year_window)


def read_corpus(path, schema=None, year_window=None) -> Corpus:
    with open(path, encoding="utf-8") as fh:
        return parse_corpus(fh, schema, year_window)


def serialize_corpus(corpus: Corpus | Iterable[PublicationRecord]) -> list[str]:
    """One JSON line per record, keys in canonical order."""
    return [json.dumps(r.to_json(), ensure_ascii=False) for r in corpus]


def write_corpus(corpus, path, header_lines: Sequence[str] = ()) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for h in header_lines:
            fh.write(f"# {h}\n")
        for line in serialize_corpus(corpus):
            fh.write(line + "\n")


class DropReport(Counter):
    """Per-reason counts of records removed by :func:`filter_complete`."""

    def to_text(self) -> str:
        lines = [f"{reason}\t{self.get(reason, 0)}" for reason in DROP_REASONS]
        lines.append(f"total\t{sum(self.values())}")
        return "\n".join(lines) + "\n"


def _drop_reason(rec: PublicationRecord):
    # first failing rule wins so every dropped record is counted once
    if not rec.author_ids:
        return "empty byline"
    if not rec.abstract.strip():
        return "missing abstract"
    if rec.sjr is None or rec.sjr <= 0:
        return "missing sjr"
    if rec.citations is None:
        return "missing citations"
    return None


def filter_complete(corpus: Corpus) -> tuple[Corpus, DropReport]:
    """Drop records lacking a byline, abstract, positive SJR or citation count."""
    kept = []
    report = DropReport({r: 0 for r in DROP_REASONS})
    for rec in corpus:
        reason = _drop_reason(rec)
        if reason is None:
            kept.append(rec)
        else:
            report[reason] += 1
    return corpus.replace_records(kept), report


@dataclass(frozen=True)
class YearStats:
    publications: int
    unique_authors: int
    solo_share: float
    authors_mean: float
    authors_max: int
    authors_sd: float
    citations_mean: float
    citations_max: int
    citations_sd: float


@dataclass(frozen=True)
class DescriptiveStats:
    per_year: dict[int, YearStats]
    total: YearStats

    def to_rows(self) -> list[list[str]]:
        """Table-1-shaped rows: one row per statistic, one column per year plus Total."""
        cols = [*self.per_year.values(), self.total]
        header = ["statistic", *[str(y) for y in self.per_year], "total"]
        spec = [
            ("unique_authors", "{:d}"),
            ("publications", "{:d}"),
            ("solo_share", "{:.4f}"),
            ("authors_mean", "{:.4f}"),
            ("authors_max", "{:d}"),
            ("authors_sd", "{:.4f}"),
            ("citations_mean", "{:.4f}"),
            ("citations_max", "{:d}"),
            ("citations_sd", "{:.4f}"),
        ]
        rows = [header]
        for name, fmt in spec:
            rows.append([name, *[fmt.format(getattr(c, name)) for c in cols]])
        return rows


def _sd(values, mean):
    n = len(values)
    if n < 2:
        return 0.0
    return math.sqrt(math.fsum((v - mean) ** 2 for v in values) / (n - 1))


def _year_stats(records: Sequence[PublicationRecord]) -> YearStats:
    n = len(records)
    sizes = [r.n_authors for r in records]
    cites = [r.citations or 0 for r in records]
    authors = set()
    for r in records:
        authors.update(r.author_ids)
    a_mean = math.fsum(sizes) / n
    c_mean = math.fsum(cites) / n
    return YearStats(
        publications=n,
        unique_authors=len(authors),
        solo_share=sum(1 for s in sizes if s == 1) / n,
        authors_mean=a_mean,
        authors_max=max(sizes),
        authors_sd=_sd(sizes, a_mean),
        citations_mean=c_mean,
        citations_max=max(cites),
        citations_sd=_sd(cites, c_mean),
    )


def describe(corpus: Corpus) -> DescriptiveStats:
    """Per-year and pooled descriptive statistics (sample standard deviations).

    Years of the window without any publication are omitted from ``per_year``.
    """
    if len(corpus) == 0:
        raise CorpusError("cannot describe an empty corpus")
    by_year: dict[int, list] = {}
    for rec in corpus:
        by_year.setdefault(rec.year, []).append(rec)
    per_year = {y: _year_stats(by_year[y]) for y in sorted(by_year)}
    return DescriptiveStats(per_year, _year_stats(corpus.records))
