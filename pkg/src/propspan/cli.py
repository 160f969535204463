"""``propspan`` command line.

Exit codes: 0 success, 1 internal error, 2 input or validation error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from statistics import mean

from propspan.corpus import (
    AnnotationParseError,
    CorpusError,
    check_fragments_resolve,
    check_splits,
    compute_stats,
    derive_slc_labels,
    parse_sentence_labels,
    read_articles,
    read_spans,
    read_split,
    restrict,
    serialize_sentence_labels,
    serialize_spans,
)
from propspan.flc import evaluate_flc
from propspan.granunet import checkpoint
from propspan.granunet.data import Vocabulary, sentence_examples
from propspan.granunet.gradcheck import gradient_check
from propspan.granunet.model import GATE_ACTIVATIONS, WIRINGS, ConfigError, GranuConfig
from propspan.granunet.synthetic import make_synthetic_corpus
from propspan.granunet.training import predict, train
from propspan.slc import evaluate_slc
from propspan.spans import AnnotationSet, LabelInventory, SpanError

logger = logging.getLogger("propspan")

EXIT_OK, EXIT_INTERNAL, EXIT_INPUT = 0, 1, 2
INPUT_ERRORS = (
    AnnotationParseError,
    CorpusError,
    SpanError,
    ConfigError,
    checkpoint.CheckpointError,
    OSError,
)


class UsageError(ValueError):
    pass


# -- helpers -------------------------------------------------------------------

def parse_config_file(path: str | Path) -> dict[str, str]:
    """Flat ``key = value`` lines; ``#`` starts a comment line."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        out[key.strip()] = value.strip()
    return out


_MODEL_KEYS = {
    "embed_dim": int,
    "wiring": str,
    "gate_activation": str,
    "alpha": float,
    "learning_rate": float,
    "seed": int,
    "epochs": int,
    "init_scale": float,
    "gate_bias_init": float,
}
_PATH_KEYS = {"articles", "gold", "inventory", "split", "out", "model", "seeds", "lenient"}


def model_options(cfg: dict[str, str]) -> dict:
    opts = {}
    for key, raw in cfg.items():
        if key in _MODEL_KEYS:
            try:
                opts[key] = _MODEL_KEYS[key](raw)
            except ValueError:
                raise ConfigError(f"config key {key}: cannot parse {raw!r}") from None
        elif key == "positive_class_weight":
            if raw == "auto":
                opts[key] = raw
            else:
                try:
                    opts[key] = float(raw)
                except ValueError:
                    raise ConfigError(f"positive_class_weight must be 'auto' or a number, got {raw!r}") from None
        elif key not in _PATH_KEYS:
            raise ConfigError(f"unknown config key {key!r}")
    return opts


def load_inventory(path: str | None, lenient: bool = False) -> LabelInventory:
    if not path:
        return LabelInventory.default(strict=not lenient)
    return LabelInventory.from_text(Path(path).read_text(encoding="utf-8"), strict=not lenient)


def parse_seeds(raw: str | None) -> list[int] | None:
    if raw is None or raw == "":
        return None
    try:
        seeds = [int(s) for s in raw.replace(",", " ").split()]
    except ValueError:
        raise UsageError(f"--seeds expects integers, got {raw!r}") from None
    if not seeds:
        raise UsageError("--seeds is empty")
    return seeds


def parse_split_args(values: list[str] | None):
    splits = []
    for item in values or []:
        name, sep, path = item.partition("=")
        if not sep:
            raise UsageError(f"--split expects NAME=PATH, got {item!r}")
        splits.append(read_split(path, name))
    check_splits(splits)
    return splits


def _float_literal(x: float) -> str:
    text = repr(float(x))
    if "e" in text or "." not in text:
        return text
    decimals = len(text) - text.index(".") - 1
    return text + "0" * max(0, 4 - decimals)


def to_json(value, indent: int = 2, level: int = 0) -> str:
    """JSON text in which every float keeps at least four decimal digits."""
    pad = " " * (indent * (level + 1))
    close = " " * (indent * level)
    if isinstance(value, bool) or value is None or isinstance(value, (int, str)):
        return json.dumps(value)
    if isinstance(value, float):
        return _float_literal(value)
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {to_json(v, indent, level + 1)}" for k, v in value.items()]
        return "{\n" + ",\n".join(items) + "\n" + close + "}"
    if isinstance(value, (list, tuple)):
        if not value:
            return "[]"
        items = [f"{pad}{to_json(v, indent, level + 1)}" for v in value]
        return "[\n" + ",\n".join(items) + "\n" + close + "]"
    raise TypeError(f"cannot serialize {type(value).__name__}")


def emit(args, payload: dict, text_lines: list[str]) -> None:
    if args.json:
        print(to_json(payload))
    else:
        print("\n".join(text_lines))


def fmt(x: float) -> str:
    return f"{x:.4f}  ({100 * x:.2f})"


def _out_dir(path: str | None) -> Path | None:
    if not path:
        return None
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


# -- subcommands ---------------------------------------------------------------

def cmd_score_flc(args) -> int:
    inventory = load_inventory(args.inventory, args.lenient)
    gold = read_spans(args.gold, inventory)
    pred = read_spans(args.pred, inventory)
    if args.articles:
        articles = read_articles(args.articles)
        check_fragments_resolve(articles, gold)
        check_fragments_resolve(articles, pred)
    report = evaluate_flc(pred, gold, inventory)
    lines = [
        f"predicted fragments\t{report.num_predicted}",
        f"gold fragments\t{report.num_gold}",
        f"precision\t{fmt(report.precision)}",
        f"recall\t{fmt(report.recall)}",
        f"F1\t{fmt(report.f1)}",
        "",
        "per technique (score restricted to one label)",
        "technique\tP\tR\tF1\t|S|\t|T|",
    ]
    for name, sc in report.per_technique.items():
        lines.append(
            f"{name}\t{sc.precision:.4f}\t{sc.recall:.4f}\t{sc.f1:.4f}\t{sc.num_predicted}\t{sc.num_gold}"
        )
    if report.over_credited_predictions or report.over_credited_gold:
        lines.append(
            f"warning: {len(report.over_credited_predictions)} prediction(s) and "
            f"{len(report.over_credited_gold)} gold fragment(s) collect credit above 1 (overlapping fragments)"
        )
    emit(args, report.as_dict(), lines)
    out = _out_dir(args.out)
    if out:
        from propspan import plots

        (out / "flc_report.json").write_text(to_json(report.as_dict()), encoding="utf-8")
        plots.technique_bars(
            {k: v.f1 for k, v in report.per_technique.items()},
            out / "flc_per_technique_f1.png",
            "F1",
            "FLC F1 by technique",
            (0, 1),
        )
    return EXIT_OK


def cmd_score_slc(args) -> int:
    if not args.articles:
        raise UsageError("score-slc needs --articles")
    gold_spans = read_spans(args.gold, None)
    articles = read_articles(args.articles)
    check_fragments_resolve(articles, gold_spans)
    pred_path = Path(args.pred)
    pred_map = parse_sentence_labels(pred_path.read_text(encoding="utf-8"), str(pred_path))
    for art_id, ordinal in pred_map:
        art = articles.get(art_id)
        if art is None:
            raise CorpusError(f"{pred_path}: prediction for unknown article {art_id!r}")
        if ordinal >= len(art.sentence_index):
            raise CorpusError(
                f"{pred_path}: article {art_id} has {len(art.sentence_index)} sentences, "
                f"prediction given for sentence {ordinal}"
            )
    grouped = gold_spans.by_article()
    pred, gold = [], []
    for art_id in sorted(articles):
        art = articles[art_id]
        labels = derive_slc_labels(grouped.get(art_id, ()), art.sentence_index)
        gold.extend(labels)
        # a sentence absent from the prediction file counts as predicted negative
        pred.extend(pred_map.get((art_id, i), False) for i in range(len(labels)))
    report = evaluate_slc(pred, gold)
    lines = [
        f"sentences\t{len(gold)}",
        f"TP {report.tp}  FP {report.fp}  TN {report.tn}  FN {report.fn}",
        f"precision\t{fmt(report.precision)}",
        f"recall\t{fmt(report.recall)}",
        f"F1\t{fmt(report.f1)}",
    ]
    emit(args, report.as_dict(), lines)
    out = _out_dir(args.out)
    if out:
        (out / "slc_report.json").write_text(to_json(report.as_dict()), encoding="utf-8")
    return EXIT_OK


def cmd_stats(args) -> int:
    inventory = load_inventory(args.inventory, lenient=True) if args.inventory else None
    articles = read_articles(args.articles)
    gold = read_spans(args.gold, None) if args.gold else AnnotationSet()
    stats = compute_stats(articles, gold, inventory)
    payload = stats.as_dict()
    splits = parse_split_args(args.split)
    lines = [
        f"articles\t{stats.num_articles}",
        f"sentences\t{stats.num_sentences}",
        f"fragments\t{stats.num_fragments}",
        f"sentences with propaganda\t{stats.num_positive_sentences}\t"
        f"{stats.fraction_sentences_with_propaganda:.4f}  ({100 * stats.fraction_sentences_with_propaganda:.1f}%)",
        "",
        "technique\tcount",
    ]
    lines += [f"{k}\t{v}" for k, v in stats.per_technique_counts.items()]
    if splits:
        payload["splits"] = {}
        lines += ["", "split\tarticles\tsentences\tfragments"]
        for split in splits:
            sub_articles, sub_gold = restrict(articles, gold, split.article_ids)
            s = compute_stats(sub_articles, sub_gold, inventory)
            payload["splits"][split.name] = s.as_dict()
            lines.append(f"{split.name}\t{s.num_articles}\t{s.num_sentences}\t{s.num_fragments}")
    emit(args, payload, lines)
    out = _out_dir(args.out)
    if out:
        from propspan import plots

        (out / "stats.json").write_text(to_json(payload), encoding="utf-8")
        if stats.per_technique_counts:
            plots.technique_bars(
                stats.per_technique_counts, out / "technique_counts.png", "instances", "Technique instances"
            )
    return EXIT_OK


def _settings(args) -> dict[str, str]:
    cfg = parse_config_file(args.config) if getattr(args, "config", None) else {}
    for key in ("articles", "gold", "inventory", "out", "model", "seeds"):
        value = getattr(args, key, None)
        if value:
            cfg[key] = value
    if getattr(args, "split", None):
        if len(args.split) != 1:
            raise UsageError(f"{args.command} takes a single --split")
        name, sep, path = args.split[0].partition("=")
        cfg["split"] = path if sep else name
    return cfg


def _load_training_corpus(cfg):
    if "articles" not in cfg or "gold" not in cfg:
        raise UsageError("training needs articles and gold (flags or config keys)")
    inventory = load_inventory(cfg.get("inventory"), lenient=cfg.get("lenient", "false").lower() == "true")
    articles = read_articles(cfg["articles"])
    gold = read_spans(cfg["gold"], inventory)
    check_fragments_resolve(articles, gold)
    if "split" in cfg:
        articles, gold = restrict(articles, gold, read_split(cfg["split"], "train").article_ids)
    return articles, gold, inventory


def cmd_train(args) -> int:
    cfg = _settings(args)
    opts = model_options(cfg)
    articles, gold, inventory = _load_training_corpus(cfg)
    vocab = Vocabulary.build(articles.values())
    examples = sentence_examples(articles, gold, vocab, inventory)
    if not examples:
        raise CorpusError("training corpus has no tokenized sentences")
    base = GranuConfig(vocab_size=len(vocab), num_token_classes=inventory.num_token_classes, **opts)
    seeds = parse_seeds(cfg.get("seeds")) or [base.seed]
    out = _out_dir(cfg.get("out"))

    runs = {}
    finals = []
    for seed in seeds:
        config = base.replace(seed=seed)
        result = train([s.example for s in examples], config, log_every=args.log_every)
        runs[seed] = result.log
        finals.append(result.log[-1])
        if out:
            checkpoint.save(
                checkpoint.Checkpoint(config, result.params, vocab, inventory, result.positive_weight),
                out / f"model_seed{seed}.ckpt",
            )
            header = "epoch\tsentence_loss\ttoken_loss\ttotal_loss\tslc_f1\tflc_f1\n"
            rows = "".join(
                f"{e.epoch}\t{e.sentence_loss!r}\t{e.token_loss!r}\t{e.total_loss!r}\t{e.slc_f1!r}\t{e.flc_f1!r}\n"
                for e in result.log
            )
            (out / f"train_log_seed{seed}.tsv").write_text(header + rows, encoding="utf-8")

    summary = {
        "seeds": seeds,
        "wiring": base.wiring,
        "gate_activation": base.gate_activation,
        "alpha": base.alpha,
        "epochs": base.epochs,
        "num_examples": len(examples),
        "mean_final": {
            key: mean(getattr(e, key) for e in finals)
            for key in ("sentence_loss", "token_loss", "total_loss", "slc_f1", "flc_f1")
        },
        "per_seed_final": {str(s): e.as_dict() for s, e in zip(seeds, finals)},
    }
    m = summary["mean_final"]
    lines = [
        f"trained {base.wiring}/{base.gate_activation} on {len(examples)} sentences, "
        f"{base.epochs} epochs, seeds {seeds}",
        f"mean over {len(seeds)} run(s): total loss {m['total_loss']:.6f}  "
        f"train SLC F1 {m['slc_f1']:.4f}  train FLC F1 {m['flc_f1']:.4f}",
    ]
    if out:
        from propspan import plots

        (out / "train_summary.json").write_text(to_json(summary), encoding="utf-8")
        plots.training_curves(runs, out / "training_curves.png")
        lines.append(f"wrote checkpoints, logs and figures to {out}")
    emit(args, summary, lines)
    return EXIT_OK


def cmd_predict(args) -> int:
    cfg = _settings(args)
    if "model" not in cfg or "articles" not in cfg or "out" not in cfg:
        raise UsageError("predict needs model, articles and out (flags or config keys)")
    ckpt = checkpoint.load(cfg["model"])
    articles = read_articles(cfg["articles"])
    if "split" in cfg:
        articles, _ = restrict(articles, AnnotationSet(), read_split(cfg["split"], "test").article_ids)
    rows, fragments = [], []
    for art_id in sorted(articles):
        sent, frags = predict(articles[art_id], ckpt.params, ckpt.config, ckpt.vocab, ckpt.inventory)
        rows.extend((art_id, i, v) for i, v in enumerate(sent))
        fragments.extend(frags)
    out = _out_dir(cfg["out"])
    (out / "slc_predictions.tsv").write_text(serialize_sentence_labels(rows), encoding="utf-8")
    (out / "flc_predictions.tsv").write_text(serialize_spans(fragments), encoding="utf-8")
    payload = {
        "articles": len(articles),
        "sentences": len(rows),
        "positive_sentences": sum(v for _, _, v in rows),
        "fragments": len(fragments),
        "slc_path": str(out / "slc_predictions.tsv"),
        "flc_path": str(out / "flc_predictions.tsv"),
    }
    emit(args, payload, [f"{k}\t{v}" for k, v in payload.items()])
    return EXIT_OK


def cmd_gradcheck(args) -> int:
    cfg = parse_config_file(args.config) if args.config else {}
    opts = model_options(cfg)
    combos = [(w, g) for w in WIRINGS for g in GATE_ACTIVATIONS]
    if "wiring" in opts or "gate_activation" in opts:
        combos = [(opts.get("wiring", "multigran"), opts.get("gate_activation", "sigmoid"))]
    reports = []
    for wiring, gate in combos:
        opts_c = dict(opts, wiring=wiring, gate_activation=gate)
        opts_c.setdefault("embed_dim", 4)
        config = GranuConfig(vocab_size=7, num_token_classes=4, **opts_c)
        reports.append(gradient_check(config, trials=args.trials))
    worst = max(r.max_relative_error for r in reports)
    passed = all(r.passed for r in reports)
    lines = [
        f"{r.wiring}\t{r.gate_activation}\tmax rel err {r.max_relative_error:.3e}\t"
        f"{'pass' if r.passed else 'FAIL'}" + (f"\t({r.skipped_kinks} kink draws skipped)" if r.skipped_kinks else "")
        for r in reports
    ]
    lines.append(f"overall max rel err {worst:.3e}: {'pass' if passed else 'FAIL'}")
    emit(args, {"passed": passed, "max_relative_error": worst, "checks": [r.as_dict() for r in reports]}, lines)
    return EXIT_OK if passed else EXIT_INTERNAL


def cmd_synth(args) -> int:
    inventory = load_inventory(args.inventory)
    articles, gold = make_synthetic_corpus(args.sentences, inventory, seed=args.seed)
    out = _out_dir(args.out)
    art_dir = out / "articles"
    art_dir.mkdir(exist_ok=True)
    for art_id, art in articles.items():
        with open(art_dir / f"{art_id}.txt", "w", encoding="utf-8", newline="") as fh:
            fh.write(art.text)
    (out / "gold.tsv").write_text(serialize_spans(gold), encoding="utf-8")
    print(f"wrote {len(articles)} articles and {len(gold)} fragments to {out}")
    return EXIT_OK


# -- parser --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="propspan", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, json_flag=True):
        if json_flag:
            p.add_argument("--json", action="store_true", help="print one JSON document")
        p.add_argument("--out", help="directory for report files and figures")

    p = sub.add_parser("score-flc", help="fragment-level precision/recall/F1")
    p.add_argument("--gold", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--articles")
    p.add_argument("--inventory", help="technique names, one per line")
    p.add_argument("--lenient", action="store_true", help="accept techniques missing from the inventory")
    common(p)
    p.set_defaults(func=cmd_score_flc)

    p = sub.add_parser("score-slc", help="sentence-level precision/recall/F1")
    p.add_argument("--gold", required=True, help="gold spans TSV")
    p.add_argument("--pred", required=True, help="article_id, sentence ordinal, 0/1 TSV")
    p.add_argument("--articles", required=True)
    common(p)
    p.set_defaults(func=cmd_score_slc)

    p = sub.add_parser("stats", help="corpus statistics")
    p.add_argument("--articles", required=True)
    p.add_argument("--gold")
    p.add_argument("--inventory")
    p.add_argument("--split", action="append", metavar="NAME=PATH", help="split manifest (repeatable)")
    common(p)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("train", help="train the toy multi-granularity network")
    p.add_argument("--config")
    p.add_argument("--articles")
    p.add_argument("--gold")
    p.add_argument("--inventory")
    p.add_argument("--split", action="append", metavar="[NAME=]PATH", help="restrict to one split manifest")
    p.add_argument("--seeds", help="comma-separated seeds; metrics are averaged over runs")
    p.add_argument("--log-every", type=int, default=0)
    common(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="write SLC and FLC predictions")
    p.add_argument("--config")
    p.add_argument("--model", help="checkpoint written by train")
    p.add_argument("--articles")
    p.add_argument("--split", action="append", metavar="[NAME=]PATH", help="restrict to one split manifest")
    common(p)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("gradcheck", help="analytic vs finite-difference gradients")
    p.add_argument("--config")
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_gradcheck)

    p = sub.add_parser("synth", help="write a synthetic corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--sentences", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--inventory")
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (UsageError, *INPUT_ERRORS) as exc:
        print(f"propspan {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception:
        logger.exception("internal error")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
