"""Core span types and character-interval algebra.

Offsets are 0-based Unicode code point positions into the raw article text.
Every span is half-open, ``[begin, end)``.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

NONE_LABEL = "none"

DEFAULT_TECHNIQUES = (
    "Loaded_Language",
    "Appeal_to_Authority",
    "Slogans",
    "Straw_Man",
    "Ad_Hominem",
    "Red_Herring",
)


class SpanError(ValueError):
    """Invalid span, label, or comparison."""


def check_label(name: str) -> str:
    if not isinstance(name, str) or not name:
        raise SpanError(f"technique label must be a non-empty string, got {name!r}")
    if "\t" in name or "\n" in name or "\r" in name:
        raise SpanError(f"technique label {name!r} contains a tab or newline")
    return name


class LabelInventory:
    """Ordered technique names plus the implicit ``none`` class.

    Token class index 0 is ``none``; technique ``i`` maps to class ``i + 1``.
    """

    def __init__(self, labels: Iterable[str], strict: bool = True):
        self._labels: list[str] = []
        self._index: dict[str, int] = {}
        self.strict = strict
        for name in labels:
            self._add(name)

    def _add(self, name: str) -> None:
        check_label(name)
        if name == NONE_LABEL:
            raise SpanError(f"{NONE_LABEL!r} is reserved for the no-technique class")
        if name in self._index:
            raise SpanError(f"duplicate technique label {name!r}")
        self._index[name] = len(self._labels)
        self._labels.append(name)

    @classmethod
    def default(cls, strict: bool = True) -> "LabelInventory":
        return cls(DEFAULT_TECHNIQUES, strict=strict)

    @classmethod
    def from_text(cls, content: str, strict: bool = True) -> "LabelInventory":
        """One technique name per line; blank lines and ``#`` comments are skipped."""
        names = []
        for line in content.splitlines():
            line = line.strip()
            if line and not line.startswith("#"):
                names.append(line)
        return cls(names, strict=strict)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(self._labels)

    @property
    def num_token_classes(self) -> int:
        return len(self._labels) + 1

    def __len__(self) -> int:
        return len(self._labels)

    def __iter__(self) -> Iterator[str]:
        return iter(self._labels)

    def __contains__(self, name: object) -> bool:
        return name in self._index

    def resolve(self, name: str) -> str:
        """Return ``name`` if known; in lenient mode unknown names are appended."""
        if name in self._index:
            return name
        if self.strict:
            raise SpanError(f"unknown technique {name!r}")
        self._add(name)
        return name

    def class_index(self, name: str) -> int:
        if name == NONE_LABEL:
            return 0
        try:
            return self._index[name] + 1
        except KeyError:
            raise SpanError(f"unknown technique {name!r}") from None

    def class_name(self, index: int) -> str:
        if index == 0:
            return NONE_LABEL
        if not 0 < index <= len(self._labels):
            raise SpanError(f"token class index {index} out of range")
        return self._labels[index - 1]

    def __repr__(self) -> str:
        return f"LabelInventory({self._labels!r}, strict={self.strict})"


@dataclass(frozen=True, order=True)
class Fragment:
    article_id: str
    label: str
    begin: int
    end: int

    def __post_init__(self):
        if not isinstance(self.begin, int) or not isinstance(self.end, int):
            raise SpanError("fragment offsets must be integers")
        if self.begin < 0:
            raise SpanError(f"fragment begin {self.begin} is negative")
        if self.begin >= self.end:
            raise SpanError(f"fragment begin {self.begin} >= end {self.end}")
        check_label(self.label)
        if "\t" in self.article_id or "\n" in self.article_id or not self.article_id:
            raise SpanError(f"invalid article id {self.article_id!r}")

    def __len__(self) -> int:
        return self.end - self.begin


class AnnotationSet:
    """A multiset of fragments; insertion order is kept, equality ignores it."""

    def __init__(self, fragments: Iterable[Fragment] = ()):
        self._fragments = tuple(fragments)

    def __len__(self) -> int:
        return len(self._fragments)

    def __iter__(self) -> Iterator[Fragment]:
        return iter(self._fragments)

    def __bool__(self) -> bool:
        return bool(self._fragments)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, AnnotationSet):
            return NotImplemented
        return Counter(self._fragments) == Counter(other._fragments)

    def __hash__(self):
        return hash(frozenset(Counter(self._fragments).items()))

    def __add__(self, other: "AnnotationSet") -> "AnnotationSet":
        return AnnotationSet(self._fragments + tuple(other))

    def __repr__(self) -> str:
        return f"AnnotationSet({list(self._fragments)!r})"

    @property
    def fragments(self) -> tuple[Fragment, ...]:
        return self._fragments

    def article_ids(self) -> list[str]:
        return sorted({f.article_id for f in self._fragments})

    def by_article(self) -> dict[str, list[Fragment]]:
        groups: dict[str, list[Fragment]] = {}
        for frag in self._fragments:
            groups.setdefault(frag.article_id, []).append(frag)
        return groups

    def for_article(self, article_id: str) -> "AnnotationSet":
        return AnnotationSet(f for f in self._fragments if f.article_id == article_id)

    def with_label(self, label: str) -> "AnnotationSet":
        return AnnotationSet(f for f in self._fragments if f.label == label)


@dataclass(frozen=True)
class SentenceIndex:
    article_id: str
    sentences: tuple[tuple[int, int], ...]

    def __post_init__(self):
        object.__setattr__(self, "sentences", tuple((int(b), int(e)) for b, e in self.sentences))
        prev_end = 0
        for b, e in self.sentences:
            if b >= e:
                raise SpanError(f"empty sentence span ({b}, {e})")
            if b < prev_end:
                raise SpanError("sentence spans must be sorted and non-overlapping")
            prev_end = e

    def __len__(self) -> int:
        return len(self.sentences)

    def __iter__(self):
        return iter(self.sentences)


def interval_overlap(a_begin: int, a_end: int, b_begin: int, b_end: int) -> int:
    return max(0, min(a_end, b_end) - max(a_begin, b_begin))


def overlap_length(a: Fragment, b: Fragment) -> int:
    """Number of code points shared by two fragments of the same article."""
    if a.article_id != b.article_id:
        raise SpanError(
            f"cannot compare fragments of different articles ({a.article_id!r} vs {b.article_id!r})"
        )
    return interval_overlap(a.begin, a.end, b.begin, b.end)


def fragment_from_token_run(
    article_id: str,
    token_spans: Sequence[tuple[int, int]],
    token_labels: Sequence[str],
) -> AnnotationSet:
    """Collapse maximal runs of equally labelled tokens into fragments.

    Tokens labelled ``none`` emit nothing and break runs.
    """
    if len(token_spans) != len(token_labels):
        raise SpanError(
            f"{len(token_spans)} token spans but {len(token_labels)} token labels"
        )
    out: list[Fragment] = []
    run_label = None
    run_begin = run_end = 0
    prev_end = None
    for (begin, end), label in zip(token_spans, token_labels):
        if begin >= end or (prev_end is not None and begin < prev_end):
            raise SpanError("token spans must be non-empty, sorted and non-overlapping")
        prev_end = end
        if label == run_label:
            run_end = end
            continue
        if run_label is not None:
            out.append(Fragment(article_id, run_label, run_begin, run_end))
        if label == NONE_LABEL:
            run_label = None
        else:
            run_label, run_begin, run_end = label, begin, end
    if run_label is not None:
        out.append(Fragment(article_id, run_label, run_begin, run_end))
    return AnnotationSet(out)
