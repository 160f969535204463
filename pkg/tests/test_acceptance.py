"""Exit criteria. Each test records one PASS/FAIL line shown in the pytest summary.

Set ``PROPSPAN_REFERENCE_CORPUS`` to a directory holding ``articles/``,
``gold.tsv`` and ``train.txt``/``dev.txt``/``test.txt`` to run criterion 9.
"""

import json
import os
import random
import time
from pathlib import Path

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES, random_annotations
from oracles import brute_force_flc
from propspan.cli import main
from propspan.corpus import build_sentence_index, derive_slc_labels, parse_spans_file, serialize_spans
from propspan.flc import evaluate_flc, precision_flc, recall_flc
from propspan.granunet import GranuConfig, GranuParams, Example, backward, forward, gradient_check, loss, predict, train
from propspan.granunet.data import Vocabulary, sentence_examples
from propspan.granunet.gradcheck import numeric_gradient
from propspan.granunet.synthetic import make_synthetic_corpus
from propspan.corpus import make_article
from propspan.slc import all_propaganda_baseline, evaluate_slc
from propspan.spans import AnnotationSet, Fragment, LabelInventory

WIRINGS = ("independent", "joint", "granu", "multigran")
GATES = ("relu", "sigmoid")


def record(number: int, title: str, passed: bool, detail: str) -> None:
    ACCEPTANCE_LINES.append(f"[{'PASS' if passed else 'FAIL'}] {number}. {title}: {detail}")
    assert passed, detail


def test_1_flc_matches_brute_force_oracle():
    rng = random.Random(2024)
    labels = ("A", "B", "C", "D", "E")
    worst = 0.0
    start = time.perf_counter()
    for _ in range(1000):
        S = random_annotations(rng, max_frags=20, max_len=200, labels=labels)
        T = random_annotations(rng, max_frags=20, max_len=200, labels=labels)
        rep = evaluate_flc(S, T)
        p, r, f = brute_force_flc(S, T)
        worst = max(worst, abs(rep.precision - p), abs(rep.recall - r), abs(rep.f1 - f))
    elapsed = time.perf_counter() - start
    record(1, "FLC oracle equivalence", worst <= 1e-9 and elapsed < 5.0,
           f"max |diff| {worst:.2e} (tol 1e-9), {elapsed:.2f}s (limit 5s)")


def test_2_zero_denominator_conventions():
    T = [Fragment("a", "X", 0, 5)]
    ok = (
        precision_flc([], T) == 0.0
        and recall_flc(T, []) == 0.0
        and evaluate_flc([], T).precision == 0.0
        and evaluate_flc(T, []).recall == 0.0
        and evaluate_flc([], []).f1 == 0.0
    )
    record(2, "|S|=0 => P=0, |T|=0 => R=0", ok, "exact zeros")


def test_3_all_propaganda_row():
    gold = [True] * 2392 + [False] * (10_000 - 2392)
    rep = evaluate_slc(all_propaganda_baseline(len(gold)), gold)
    got = (round(100 * rep.precision, 2), round(100 * rep.recall, 2), round(100 * rep.f1, 2))
    ok = all(abs(g - e) <= 0.01 for g, e in zip(got, (23.92, 100.0, 38.61)))
    record(3, "All-Propaganda P/R/F1", ok, f"P={got[0]} R={got[1]} F1={got[2]} (expected 23.92/100.0/38.61)")


def test_4_relu_gate_semantics():
    cfg = GranuConfig(vocab_size=6, num_token_classes=4, embed_dim=5, wiring="multigran", gate_activation="relu")
    rng = np.random.default_rng(9)
    params = GranuParams.init(cfg, rng)
    for _, value in params.items():
        value += rng.normal(0, 0.5, value.shape)
    params.gate_w[:] = 0.0
    params.gate_b[...] = -2.0
    ex = Example([1, 2, 5, 3], [0, 1, 1, 2], True)
    trace = forward(ex, params, cfg)
    logits_zero = trace.gate_pre < 0 and bool(np.all(trace.logits == 0.0))

    inv = LabelInventory(["A", "B", "C"])
    vocab = Vocabulary(["t1", "t2", "t3", "t4", "t5"])
    _, frags = predict(make_article("d", "t1 t2 t5 t3\nt4 t4\n"), params, cfg, vocab, inv)

    numeric = numeric_gradient(ex, params, cfg, positive_weight=2.0, names=("token_w", "token_b"))
    fd_max = max(float(np.max(np.abs(numeric.token_w))), float(np.max(np.abs(numeric.token_b))))
    analytic = backward(trace, ex, params, cfg, 2.0)
    ok = logits_zero and len(frags) == 0 and fd_max <= 1e-9 and not analytic.token_w.any()
    record(4, "relu gate closed", ok,
           f"logits all zero={logits_zero}, fragments={len(frags)}, max |FD grad| of token layer={fd_max:.1e}")


def test_5_gradient_verification():
    start = time.perf_counter()
    worst = {}
    for wiring in WIRINGS:
        for gate in GATES:
            cfg = GranuConfig(vocab_size=7, num_token_classes=4, embed_dim=4, wiring=wiring, gate_activation=gate, seed=13)
            worst[(wiring, gate)] = gradient_check(cfg, trials=10, step=1e-5).max_relative_error
    elapsed = time.perf_counter() - start
    overall = max(worst.values())
    record(5, "analytic vs finite-difference gradients", overall <= 1e-4 and elapsed < 30.0,
           f"max rel err {overall:.2e} over {len(worst)} wiring x gate combos (tol 1e-4), {elapsed:.2f}s (limit 30s)")


def test_6_joint_loss_endpoints_and_linearity():
    worst = 0.0
    endpoints = True
    for wiring in WIRINGS:
        for gate in GATES:
            cfg = GranuConfig(vocab_size=7, num_token_classes=4, embed_dim=4, wiring=wiring, gate_activation=gate)
            params = GranuParams.init(cfg)
            ex = Example([1, 3, 3, 6], [0, 2, 0, 1], True)
            trace = forward(ex, params, cfg)
            one = loss(trace, ex, cfg, 1.5, alpha=1.0)
            zero = loss(trace, ex, cfg, 1.5, alpha=0.0)
            endpoints &= one.total == one.sentence and zero.total == zero.token
            for a in (0.0, 0.25, 0.5, 0.75, 1.0):
                parts = loss(trace, ex, cfg, 1.5, alpha=a)
                worst = max(worst, abs(parts.total - (a * one.sentence + (1 - a) * zero.token)))
    record(6, "joint loss endpoints and linearity", endpoints and worst <= 1e-12,
           f"endpoints exact={endpoints}, max interpolation error {worst:.1e} (tol 1e-12)")


def test_7_overfit_synthetic_corpus():
    inv = LabelInventory.default()
    articles, gold = make_synthetic_corpus(50, inv, seed=0)
    vocab = Vocabulary.build(articles.values())
    examples = [s.example for s in sentence_examples(articles, gold, vocab, inv)]
    cfg = GranuConfig(vocab_size=len(vocab), num_token_classes=inv.num_token_classes, wiring="multigran", epochs=500, seed=0)
    start = time.perf_counter()
    result = train(examples, cfg)
    elapsed = time.perf_counter() - start

    sent_pred, sent_gold, frags = [], [], []
    for art_id in sorted(articles):
        art = articles[art_id]
        s, f = predict(art, result.params, cfg, vocab, inv)
        sent_pred += s
        sent_gold += derive_slc_labels(gold.for_article(art_id), art.sentence_index)
        frags += list(f)
    slc_f1 = evaluate_slc(sent_pred, sent_gold).f1
    flc_f1 = evaluate_flc(frags, gold, inv).f1
    again = train(examples, cfg)
    deterministic = [e.as_dict() for e in again.log] == [e.as_dict() for e in result.log]
    ok = len(examples) == 50 and slc_f1 >= 0.95 and flc_f1 >= 0.80 and elapsed < 60.0 and deterministic
    record(7, "multigran overfit on 50 synthetic sentences", ok,
           f"SLC F1 {slc_f1:.4f} (>=0.95), FLC F1 {flc_f1:.4f} (>=0.80), {cfg.epochs} epochs in {elapsed:.1f}s (<60s), "
           f"deterministic={deterministic}")


def test_8_corpus_plumbing():
    rng = random.Random(8)
    inv = LabelInventory(["A", "B", "C", "D", "E"])
    round_trips = all(
        parse_spans_file(serialize_spans(anns), inv) == anns
        for anns in (AnnotationSet(random_annotations(rng, max_frags=60)) for _ in range(100))
    )
    idx = build_sentence_index("Hello.\nWorld.\n", "a")
    cases = [
        ([], [False, False]),
        ([Fragment("a", "A", 0, 3)], [True, False]),
        ([Fragment("a", "A", 5, 9)], [True, True]),
    ]
    fixtures = list(idx.sentences) == [(0, 6), (7, 13)] and all(derive_slc_labels(f, idx) == exp for f, exp in cases)
    record(8, "spans TSV round trip and sentence labels", round_trips and fixtures,
           f"100 round trips identical={round_trips}, hand fixtures incl. straddling={fixtures}")


REFERENCE_CORPUS = os.environ.get("PROPSPAN_REFERENCE_CORPUS")


@pytest.mark.skipif(not REFERENCE_CORPUS, reason="PROPSPAN_REFERENCE_CORPUS not set; external corpus absent")
def test_9_reference_corpus_statistics(capsys):
    root = Path(REFERENCE_CORPUS)
    argv = ["stats", "--articles", str(root / "articles"), "--gold", str(root / "gold.tsv"), "--json"]
    for name in ("train", "dev", "test"):
        argv += ["--split", f"{name}={root / (name + '.txt')}"]
    code = main(argv)
    doc = json.loads(capsys.readouterr().out)
    counts = doc["per_technique_counts"]
    splits = doc.get("splits", {})
    got = {
        "fragments": doc["num_fragments"],
        "sentences": doc["num_sentences"],
        "positive %": round(100 * doc["fraction_sentences_with_propaganda"], 1),
        "Loaded_Language": counts.get("Loaded_Language"),
        "Straw_Man": counts.get("Straw_Man"),
        "split articles": tuple(splits.get(s, {}).get("num_articles") for s in ("train", "dev", "test")),
        "split sentences": tuple(splits.get(s, {}).get("num_sentences") for s in ("train", "dev", "test")),
    }
    expected = {
        "fragments": 7485,
        "sentences": 21230,
        "positive %": 35.2,
        "Loaded_Language": 2547,
        "Straw_Man": 15,
        "split articles": (293, 57, 101),
        "split sentences": (14857, 2108, 4265),
    }
    record(9, "reference corpus statistics", code == 0 and got == expected, f"got {got}")
