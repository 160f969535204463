"""Reading articles and span files, sentence indexes, SLC gold, corpus statistics."""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

from propspan.spans import (
    AnnotationSet,
    Fragment,
    LabelInventory,
    SentenceIndex,
    SpanError,
    interval_overlap,
)

SPLIT_NAMES = ("train", "dev", "test")


class AnnotationParseError(ValueError):
    """A malformed line in a span or label file."""

    def __init__(self, message: str, line: int | None = None, source: str | None = None):
        self.message = message
        self.line = line
        self.source = source
        where = []
        if source:
            where.append(str(source))
        if line is not None:
            where.append(f"line {line}")
        prefix = ":".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message)


class CorpusError(ValueError):
    """Inconsistent corpus: dangling ids, overlapping splits and the like."""


@dataclass(frozen=True)
class Article:
    article_id: str
    text: str
    sentence_index: SentenceIndex

    def __post_init__(self):
        for b, e in self.sentence_index:
            if e > len(self.text):
                raise CorpusError(
                    f"article {self.article_id}: sentence ({b}, {e}) exceeds text length {len(self.text)}"
                )


@dataclass(frozen=True)
class CorpusSplit:
    name: str
    article_ids: frozenset[str]

    def __post_init__(self):
        if self.name not in SPLIT_NAMES:
            raise CorpusError(f"split name must be one of {SPLIT_NAMES}, got {self.name!r}")
        object.__setattr__(self, "article_ids", frozenset(self.article_ids))


@dataclass
class CorpusStats:
    num_articles: int = 0
    num_sentences: int = 0
    num_fragments: int = 0
    fraction_sentences_with_propaganda: float = 0.0
    per_technique_counts: dict[str, int] = field(default_factory=dict)
    num_positive_sentences: int = 0

    def as_dict(self) -> dict:
        return {
            "num_articles": self.num_articles,
            "num_sentences": self.num_sentences,
            "num_fragments": self.num_fragments,
            "num_positive_sentences": self.num_positive_sentences,
            "fraction_sentences_with_propaganda": self.fraction_sentences_with_propaganda,
            "per_technique_counts": dict(self.per_technique_counts),
        }


# -- spans TSV ---------------------------------------------------------------

def parse_spans_file(
    content: str, inventory: LabelInventory | None = None, source: str | None = None
) -> AnnotationSet:
    """Parse ``article_id<TAB>technique<TAB>begin<TAB>end`` lines.

    With ``inventory=None`` any well-formed technique name is accepted.
    """
    fragments = []
    for lineno, raw in enumerate(content.split("\n"), start=1):
        line = raw[:-1] if raw.endswith("\r") else raw
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) != 4:
            raise AnnotationParseError(f"expected 4 tab-separated fields, got {len(fields)}", lineno, source)
        article_id, technique, begin_s, end_s = fields
        try:
            begin, end = int(begin_s), int(end_s)
        except ValueError:
            raise AnnotationParseError(
                f"non-integer offsets {begin_s!r}, {end_s!r}", lineno, source
            ) from None
        if begin >= end:
            raise AnnotationParseError(f"begin {begin} >= end {end}", lineno, source)
        try:
            if inventory is not None:
                technique = inventory.resolve(technique)
            fragments.append(Fragment(article_id, technique, begin, end))
        except SpanError as exc:
            raise AnnotationParseError(str(exc), lineno, source) from None
    return AnnotationSet(fragments)


def serialize_spans(anns: Iterable[Fragment]) -> str:
    return "".join(f"{f.article_id}\t{f.label}\t{f.begin}\t{f.end}\n" for f in anns)


def read_spans(path: str | Path, inventory: LabelInventory | None = None) -> AnnotationSet:
    path = Path(path)
    return parse_spans_file(path.read_text(encoding="utf-8"), inventory, source=str(path))


# -- sentences ---------------------------------------------------------------

Segmenter = Callable[[str], list[tuple[int, int]]]


def newline_segmenter(text: str) -> list[tuple[int, int]]:
    spans = []
    start = 0
    for piece in text.split("\n"):
        end = start + len(piece)
        # a CR before LF belongs to the line terminator
        stop = end - 1 if piece.endswith("\r") else end
        if stop > start:
            spans.append((start, stop))
        start = end + 1
    return spans


def build_sentence_index(
    article_text: str, article_id: str = "", segmenter: Segmenter = newline_segmenter
) -> SentenceIndex:
    return SentenceIndex(article_id, tuple(segmenter(article_text)))


def derive_slc_labels(anns: Iterable[Fragment], idx: SentenceIndex) -> list[bool]:
    """Sentence is positive iff any fragment shares at least one code point with it."""
    labels = [False] * len(idx)
    frags = [f for f in anns if not idx.article_id or f.article_id == idx.article_id]
    for i, (sb, se) in enumerate(idx.sentences):
        labels[i] = any(interval_overlap(sb, se, f.begin, f.end) > 0 for f in frags)
    return labels


# -- articles and splits -----------------------------------------------------

def make_article(article_id: str, text: str, segmenter: Segmenter = newline_segmenter) -> Article:
    return Article(article_id, text, build_sentence_index(text, article_id, segmenter))


def read_articles(directory: str | Path, pattern: str = "*.txt") -> dict[str, Article]:
    """Load every matching file; the article id is the file name stem."""
    directory = Path(directory)
    if not directory.is_dir():
        raise CorpusError(f"articles directory {directory} does not exist")
    articles = {}
    for path in sorted(directory.glob(pattern)):
        # newline="" keeps CR characters so offsets match the raw file
        with open(path, encoding="utf-8", newline="") as fh:
            text = fh.read()
        articles[path.stem] = make_article(path.stem, text)
    return articles


def parse_split_manifest(content: str, name: str) -> CorpusSplit:
    ids = [line.strip() for line in content.split("\n") if line.strip()]
    return CorpusSplit(name, frozenset(ids))


def read_split(path: str | Path, name: str) -> CorpusSplit:
    return parse_split_manifest(Path(path).read_text(encoding="utf-8"), name)


def check_splits(splits: Sequence[CorpusSplit]) -> None:
    for i, a in enumerate(splits):
        for b in splits[i + 1:]:
            shared = a.article_ids & b.article_ids
            if shared:
                raise CorpusError(
                    f"splits {a.name} and {b.name} share {len(shared)} article(s), e.g. {sorted(shared)[0]}"
                )


def check_fragments_resolve(articles: Mapping[str, Article], gold: AnnotationSet) -> None:
    for frag in gold:
        art = articles.get(frag.article_id)
        if art is None:
            raise CorpusError(f"fragment refers to unknown article {frag.article_id!r}")
        if frag.end > len(art.text):
            raise CorpusError(
                f"fragment {frag.begin}-{frag.end} exceeds length {len(art.text)} of article {frag.article_id}"
            )


def compute_stats(
    articles: Mapping[str, Article], gold: AnnotationSet, inventory: LabelInventory | None = None
) -> CorpusStats:
    check_fragments_resolve(articles, gold)
    counts: Counter[str] = Counter(f.label for f in gold)
    per_technique = {name: counts.get(name, 0) for name in inventory} if inventory is not None else {}
    for name in sorted(counts):
        per_technique.setdefault(name, counts[name])

    grouped = gold.by_article()
    num_sentences = positives = 0
    for art_id, art in articles.items():
        labels = derive_slc_labels(grouped.get(art_id, ()), art.sentence_index)
        num_sentences += len(labels)
        positives += sum(labels)
    return CorpusStats(
        num_articles=len(articles),
        num_sentences=num_sentences,
        num_fragments=len(gold),
        fraction_sentences_with_propaganda=positives / num_sentences if num_sentences else 0.0,
        per_technique_counts=per_technique,
        num_positive_sentences=positives,
    )


def restrict(articles: Mapping[str, Article], gold: AnnotationSet, ids: Iterable[str]):
    """Sub-corpus for the given article ids (unknown ids raise)."""
    ids = set(ids)
    missing = ids - set(articles)
    if missing:
        raise CorpusError(f"split lists unknown article(s): {sorted(missing)[:3]}")
    sub = {k: v for k, v in articles.items() if k in ids}
    return sub, AnnotationSet(f for f in gold if f.article_id in ids)


# -- sentence-level prediction files ----------------------------------------

def parse_sentence_labels(content: str, source: str | None = None) -> dict[tuple[str, int], bool]:
    """``article_id<TAB>sentence_ordinal<TAB>0|1`` lines."""
    out: dict[tuple[str, int], bool] = {}
    for lineno, raw in enumerate(content.split("\n"), start=1):
        line = raw.rstrip("\r")
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise AnnotationParseError(f"expected 3 tab-separated fields, got {len(fields)}", lineno, source)
        art, ordinal_s, value = fields
        try:
            ordinal = int(ordinal_s)
        except ValueError:
            raise AnnotationParseError(f"non-integer sentence ordinal {ordinal_s!r}", lineno, source) from None
        if ordinal < 0:
            raise AnnotationParseError(f"negative sentence ordinal {ordinal}", lineno, source)
        if value not in ("0", "1"):
            raise AnnotationParseError(f"label must be 0 or 1, got {value!r}", lineno, source)
        if (art, ordinal) in out:
            raise AnnotationParseError(f"duplicate entry for {art} sentence {ordinal}", lineno, source)
        out[(art, ordinal)] = value == "1"
    return out


def serialize_sentence_labels(rows: Iterable[tuple[str, int, bool]]) -> str:
    return "".join(f"{art}\t{i}\t{int(bool(v))}\n" for art, i, v in rows)
