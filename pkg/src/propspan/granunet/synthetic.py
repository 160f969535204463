"""Small generated corpora whose labels are recoverable from token identity."""

from __future__ import annotations

import numpy as np

from propspan.corpus import Article, make_article
from propspan.spans import AnnotationSet, Fragment, LabelInventory


def make_synthetic_corpus(
    num_sentences: int = 50,
    inventory: LabelInventory | None = None,
    seed: int = 0,
    positive_fraction: float = 0.5,
    sentences_per_article: int = 10,
    neutral_words: int = 30,
    words_per_technique: int = 3,
) -> tuple[dict[str, Article], AnnotationSet]:
    """Articles of newline-separated sentences plus gold fragments.

    Each technique owns a few marker words; a fragment is a run of one to three
    marker words of the same technique. Runs are always separated by neutral
    words so gold fragments never touch.
    """
    inventory = inventory if inventory is not None else LabelInventory.default()
    rng = np.random.default_rng(seed)
    neutral = [f"w{i}" for i in range(neutral_words)]
    markers = {
        name: [f"{name.lower()}_{j}" for j in range(words_per_technique)] for name in inventory
    }
    articles: dict[str, Article] = {}
    fragments: list[Fragment] = []
    num_articles = -(-num_sentences // sentences_per_article)
    made = 0
    for a in range(num_articles):
        art_id = f"synth{a:03d}"
        lines: list[str] = []
        offset = 0
        for _ in range(min(sentences_per_article, num_sentences - made)):
            made += 1
            words = [str(w) for w in rng.choice(neutral, int(rng.integers(4, 9)))]
            runs: list[tuple[int, int, str]] = []
            if rng.random() < positive_fraction:
                for _ in range(int(rng.integers(1, 3))):
                    label = inventory.labels[int(rng.integers(len(inventory)))]
                    run = [str(w) for w in rng.choice(markers[label], int(rng.integers(1, 4)))]
                    # insert after a neutral word, keeping at least one neutral word before each run
                    slots = [i for i in range(1, len(words) + 1) if not any(s <= i <= e for s, e, _ in runs)]
                    at = int(rng.choice(slots))
                    words[at:at] = run + [str(rng.choice(neutral))]
                    runs = [(s + len(run) + 1, e + len(run) + 1, l) if s >= at else (s, e, l) for s, e, l in runs]
                    runs.append((at, at + len(run), label))
            line = " ".join(words)
            starts = []
            pos = 0
            for w in words:
                starts.append(pos)
                pos += len(w) + 1
            for s, e, label in runs:
                begin = offset + starts[s]
                end = offset + starts[e - 1] + len(words[e - 1])
                fragments.append(Fragment(art_id, label, begin, end))
            lines.append(line)
            offset += len(line) + 1
        articles[art_id] = make_article(art_id, "\n".join(lines) + "\n")
    fragments.sort(key=lambda f: (f.article_id, f.begin))
    return articles, AnnotationSet(fragments)
