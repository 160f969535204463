"""Whitespace tokenization, vocabulary, and per-sentence training examples."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Mapping

from propspan.corpus import Article, derive_slc_labels
from propspan.granunet.model import Example
from propspan.spans import AnnotationSet, Fragment, LabelInventory, interval_overlap

OOV_ID = 0
_TOKEN_RE = re.compile(r"\S+")


def tokenize(text: str, begin: int = 0, end: int | None = None) -> list[tuple[str, int, int]]:
    """Whitespace tokens of ``text[begin:end]`` with absolute offsets."""
    end = len(text) if end is None else end
    return [(m.group(), m.start(), m.end()) for m in _TOKEN_RE.finditer(text, begin, end)]


class Vocabulary:
    """Token string to id; id 0 is reserved for out-of-vocabulary tokens."""

    def __init__(self, tokens: Iterable[str] = ()):
        self._ids: dict[str, int] = {}
        self._tokens: list[str] = []
        for tok in tokens:
            if tok not in self._ids:
                self._ids[tok] = len(self._tokens) + 1
                self._tokens.append(tok)

    @classmethod
    def build(cls, articles: Iterable[Article]) -> "Vocabulary":
        seen = set()
        for art in articles:
            for b, e in art.sentence_index:
                seen.update(tok for tok, _, _ in tokenize(art.text, b, e))
        return cls(sorted(seen))

    def __len__(self) -> int:
        """Number of ids including the OOV slot."""
        return len(self._tokens) + 1

    @property
    def tokens(self) -> tuple[str, ...]:
        return tuple(self._tokens)

    def id(self, token: str) -> int:
        return self._ids.get(token, OOV_ID)


@dataclass
class SentenceExample:
    """An :class:`Example` tied back to its article and sentence ordinal."""

    article_id: str
    ordinal: int
    example: Example


def token_class(
    begin: int, end: int, fragments: list[Fragment], inventory: LabelInventory
) -> int:
    """Class of the fragment overlapping the token most; ties go to the lower class."""
    best, best_overlap = 0, 0
    for frag in fragments:
        ov = interval_overlap(begin, end, frag.begin, frag.end)
        if ov == 0:
            continue
        cls = inventory.class_index(frag.label)
        if ov > best_overlap or (ov == best_overlap and cls < best):
            best, best_overlap = cls, ov
    return best


def sentence_examples(
    articles: Mapping[str, Article],
    gold: AnnotationSet | None,
    vocab: Vocabulary,
    inventory: LabelInventory,
) -> list[SentenceExample]:
    """One example per sentence with at least one token, in article-id order."""
    grouped = gold.by_article() if gold is not None else {}
    out = []
    for art_id in sorted(articles):
        art = articles[art_id]
        frags = grouped.get(art_id, [])
        slc = derive_slc_labels(frags, art.sentence_index)
        for ordinal, (sb, se) in enumerate(art.sentence_index):
            tokens = tokenize(art.text, sb, se)
            if not tokens:
                continue
            local = [f for f in frags if interval_overlap(sb, se, f.begin, f.end)]
            ex = Example(
                token_ids=[vocab.id(tok) for tok, _, _ in tokens],
                token_labels=[token_class(b, e, local, inventory) for _, b, e in tokens],
                sentence_label=slc[ordinal],
                article_id=art_id,
                token_spans=[(b, e) for _, b, e in tokens],
            )
            out.append(SentenceExample(art_id, ordinal, ex))
    return out
