import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_annotations
from propspan.corpus import (
    AnnotationParseError,
    CorpusError,
    CorpusSplit,
    build_sentence_index,
    check_splits,
    compute_stats,
    derive_slc_labels,
    make_article,
    parse_sentence_labels,
    parse_spans_file,
    parse_split_manifest,
    read_articles,
    serialize_spans,
)
from propspan.spans import AnnotationSet, Fragment, LabelInventory, SentenceIndex

INV = LabelInventory(["Loaded_Language", "Straw_Man", "Slogans"])


def test_parse_single_line():
    anns = parse_spans_file("a1\tLoaded_Language\t34\t40\n", INV)
    assert list(anns) == [Fragment("a1", "Loaded_Language", 34, 40)]


def test_parse_empty():
    assert len(parse_spans_file("", INV)) == 0


@pytest.mark.parametrize(
    "content,line,fragment",
    [
        ("a1\tStraw_Man\t40\t34\n", 1, "begin 40 >= end 34"),
        ("a1\tSlogans\t0\t3\na1\tSlogans\t3\n", 2, "expected 4"),
        ("a1\tSlogans\tx\t3\n", 1, "non-integer"),
        ("a1\tSlogans\t0\t3\n\na1\tTypo\t0\t3\n", 3, "unknown technique"),
    ],
)
def test_parse_errors_carry_line_numbers(content, line, fragment):
    with pytest.raises(AnnotationParseError) as exc:
        parse_spans_file(content, INV, source="gold.tsv")
    assert exc.value.line == line
    assert fragment in str(exc.value)
    assert "gold.tsv:line" in str(exc.value)


def test_lenient_inventory_extends():
    inv = LabelInventory(["Slogans"], strict=False)
    anns = parse_spans_file("a\tNew_One\t0\t1\n", inv)
    assert len(anns) == 1 and "New_One" in inv


def test_parse_preserves_order_and_crlf():
    anns = parse_spans_file("b\tSlogans\t5\t9\r\na\tSlogans\t0\t2\r\n", INV)
    assert [f.article_id for f in anns] == ["b", "a"]


def test_serialize():
    assert serialize_spans(AnnotationSet()) == ""
    assert serialize_spans([Fragment("a", "Slogans", 1, 4)]) == "a\tSlogans\t1\t4\n"


def test_round_trip_random_sets():
    rng = random.Random(3)
    for _ in range(100):
        anns = AnnotationSet(random_annotations(rng, max_frags=100, labels=tuple(INV)))
        text = serialize_spans(anns)
        assert parse_spans_file(text, INV) == anns


@given(st.lists(st.tuples(st.text(alphabet="abc123_-", min_size=1, max_size=6), st.integers(0, 500), st.integers(1, 50))))
@settings(max_examples=50)
def test_round_trip_property(rows):
    anns = AnnotationSet(Fragment(a, "Slogans", b, b + n) for a, b, n in rows)
    assert parse_spans_file(serialize_spans(anns), INV) == anns


@pytest.mark.parametrize(
    "text,expected",
    [
        ("Hello.\nWorld.\n", [(0, 6), (7, 13)]),
        ("", []),
        ("One line no newline", [(0, 19)]),
        ("\n\nA\n\nBC", [(2, 3), (5, 7)]),
        ("A\r\nBC\r\n", [(0, 1), (3, 5)]),
    ],
)
def test_sentence_index(text, expected):
    idx = build_sentence_index(text)
    assert list(idx.sentences) == expected
    for b, e in idx.sentences:
        assert "\n" not in text[b:e]


def test_sentence_offsets_are_code_points():
    text = "é😀 x\nß\n"
    assert list(build_sentence_index(text).sentences) == [(0, 4), (5, 6)]


def test_derive_slc_labels():
    idx = SentenceIndex("a", ((0, 6), (7, 13)))
    assert derive_slc_labels([], idx) == [False, False]
    assert derive_slc_labels([Fragment("a", "Slogans", 0, 3)], idx) == [True, False]
    # straddling: overlap 1 with the first sentence, 2 with the second
    assert derive_slc_labels([Fragment("a", "Slogans", 5, 9)], idx) == [True, True]
    # fragment entirely in the gap between sentences touches neither
    assert derive_slc_labels([Fragment("a", "Slogans", 6, 7)], idx) == [False, False]


@given(st.lists(st.tuples(st.integers(0, 40), st.integers(1, 10)), max_size=8), st.tuples(st.integers(0, 40), st.integers(1, 10)))
def test_derive_slc_monotone(rows, extra):
    idx = build_sentence_index("aaaa\nbbb\n\ncccccc\ndd\neeeeeeeee\nf\nggggg")
    base = [Fragment("a", "Slogans", b, b + n) for b, n in rows]
    before = derive_slc_labels(base, idx)
    after = derive_slc_labels(base + [Fragment("a", "Slogans", extra[0], extra[0] + extra[1])], idx)
    assert all(a or not b for b, a in zip(before, after))


def _ten_sentence_corpus():
    text = "\n".join(f"sentence number {i}" for i in range(10)) + "\n"
    art = make_article("doc", text)
    starts = [b for b, _ in art.sentence_index]
    gold = AnnotationSet(
        [
            Fragment("doc", "Slogans", starts[0], starts[0] + 4),
            Fragment("doc", "Slogans", starts[0] + 5, starts[0] + 8),
            Fragment("doc", "Straw_Man", starts[3], starts[3] + 2),
            Fragment("doc", "Loaded_Language", starts[6] + 1, starts[6] + 3),
            Fragment("doc", "Loaded_Language", starts[9], starts[9] + 5),
        ]
    )
    return {"doc": art}, gold


def test_compute_stats():
    assert compute_stats({}, AnnotationSet()).as_dict() == {
        "num_articles": 0,
        "num_sentences": 0,
        "num_fragments": 0,
        "num_positive_sentences": 0,
        "fraction_sentences_with_propaganda": 0.0,
        "per_technique_counts": {},
    }
    articles, gold = _ten_sentence_corpus()
    stats = compute_stats(articles, gold, INV)
    assert stats.num_sentences == 10
    assert stats.num_positive_sentences == 4
    assert stats.fraction_sentences_with_propaganda == pytest.approx(0.4)
    assert stats.per_technique_counts == {"Loaded_Language": 2, "Straw_Man": 1, "Slogans": 2}
    assert sum(stats.per_technique_counts.values()) == stats.num_fragments


def test_compute_stats_permutation_invariant():
    articles, gold = _ten_sentence_corpus()
    reordered = AnnotationSet(reversed(gold.fragments))
    assert compute_stats(articles, gold).as_dict() == compute_stats(articles, reordered).as_dict()


def test_compute_stats_dangling_id():
    articles, _ = _ten_sentence_corpus()
    with pytest.raises(CorpusError):
        compute_stats(articles, AnnotationSet([Fragment("ghost", "Slogans", 0, 1)]))
    with pytest.raises(CorpusError):
        compute_stats(articles, AnnotationSet([Fragment("doc", "Slogans", 0, 10_000)]))


def test_read_articles_uses_stem_and_keeps_cr(tmp_path):
    (tmp_path / "article111.txt").write_bytes("Ab\r\nc\n".encode("utf-8"))
    arts = read_articles(tmp_path)
    assert list(arts) == ["article111"]
    assert arts["article111"].text == "Ab\r\nc\n"
    assert list(arts["article111"].sentence_index.sentences) == [(0, 2), (4, 5)]


def test_split_manifests():
    train = parse_split_manifest("a\nb\n\n", "train")
    assert train.article_ids == {"a", "b"}
    check_splits([train, CorpusSplit("dev", frozenset({"c"}))])
    with pytest.raises(CorpusError):
        check_splits([train, CorpusSplit("test", frozenset({"b"}))])
    with pytest.raises(CorpusError):
        CorpusSplit("holdout", frozenset())


def test_sentence_label_file():
    assert parse_sentence_labels("a\t0\t1\na\t1\t0\n") == {("a", 0): True, ("a", 1): False}
    for bad in ("a\t0\t2\n", "a\tx\t1\n", "a\t0\n", "a\t0\t1\na\t0\t0\n"):
        with pytest.raises(AnnotationParseError):
            parse_sentence_labels(bad)
