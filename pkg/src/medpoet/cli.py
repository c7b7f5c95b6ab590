"""``med`` command line: train, predict, poet, eval, folds, reduce."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import harness, med, poet
from .corpus import Corpus, load_tsv, write_tsv


def _models(paths: str) -> list[med.MedModel]:
    return [med.load(p) for p in paths.split(",") if p]


def _parse_pair(text: str, corpus: Corpus) -> tuple[str, str]:
    # Tags contain commas themselves, so pick the split that names a known pair.
    parts = text.split(",")
    options = [(",".join(parts[:i]), ",".join(parts[i:])) for i in range(1, len(parts))]
    known = [p for p in options if p in corpus.tag_pairs]
    if len(known) == 1:
        return known[0]
    if len(options) == 1:
        return options[0]
    raise ValueError(f"cannot split {text!r} into a known SOURCE,TARGET tag pair")


def cmd_train(args):
    config = med.load_config(args.config) if args.config else med.MedConfig()
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.iterations is not None:
        overrides["iterations"] = args.iterations
    config = config.replace(**overrides)
    model = med.train(load_tsv(args.data), config)
    med.save(model, args.out)
    last = model.log[-1] if model.log else (0, float("nan"))
    print(f"trained {last[0]} iterations, final loss {last[1]:.4f}; saved to {args.out}")


def cmd_predict(args):
    models = _models(args.model)
    data = load_tsv(args.data)
    rng = np.random.default_rng(args.seed)
    preds = med.ensemble_predict_many(models, data.samples, rng, args.beam)
    harness.write_predictions(data, preds, args.out)


def cmd_poet_build(args):
    poet.build_store(load_tsv(args.data)).save(args.out)


def cmd_poet_apply(args):
    store = poet.PoetStore.load(args.store)
    data = load_tsv(args.data)
    preds = load_tsv(args.pred)
    if len(preds) != len(data):
        raise ValueError(f"{args.pred} has {len(preds)} lines, {args.data} has {len(data)}")
    for i, (x, p) in enumerate(zip(data, preds), start=1):
        if (x.source_tag, x.source_form, x.target_tag) != (p.source_tag, p.source_form, p.target_tag):
            raise ValueError(f"{args.pred}: line {i} does not match {args.data}")
    fixed = poet.correct_corpus(store, data, [p.target_form or "" for p in preds],
                                np.random.default_rng(args.seed))
    harness.write_predictions(data, fixed, args.out)


def cmd_eval(args):
    test = load_tsv(args.test)
    store = poet.PoetStore.load(args.poet) if args.poet else None
    rng = np.random.default_rng(args.seed)
    if args.pred:
        member_preds = []
        for path in args.pred.split(","):
            preds = load_tsv(path)
            if len(preds) != len(test):
                raise ValueError(f"{path} has {len(preds)} lines, {args.test} has {len(test)}")
            member_preds.append([p.target_form or "" for p in preds])
        report = harness.evaluate_predictions(member_preds, test, store, rng)
    else:
        report = harness.evaluate(_models(args.model), test, store, rng, args.beam)
    harness.write_report(report, args.report)
    print(harness.format_report(report))


def cmd_folds(args):
    out = Path(args.out)
    for fold in harness.make_celex_folds(load_tsv(args.data), args.seed):
        d = out / f"fold{fold.index}"
        d.mkdir(parents=True, exist_ok=True)
        for split in ("train", "dev", "test"):
            write_tsv(getattr(fold, split), d / f"{split}.tsv")


def cmd_reduce(args):
    data = load_tsv(args.data)
    if args.pair:
        reduced = harness.reduce_tagpair(data, _parse_pair(args.pair, data), args.fraction, args.seed)
    else:
        reduced = harness.reduce_all(data, args.fraction, args.seed)
    write_tsv(reduced, args.out)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="med", description="Morphological reinflection with MED and POET.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train one model on a TSV dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--config")
    p.add_argument("--seed", type=int)
    p.add_argument("--iterations", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="predict target forms (several models vote)")
    p.add_argument("--model", required=True, help="model directory, or a comma-separated list")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--beam", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("poet", help="build or apply an edit-tree store")
    poet_sub = p.add_subparsers(dest="poet_command", required=True)
    b = poet_sub.add_parser("build")
    b.add_argument("--data", required=True)
    b.add_argument("--out", required=True)
    b.set_defaults(func=cmd_poet_build)
    a = poet_sub.add_parser("apply")
    a.add_argument("--store", required=True)
    a.add_argument("--pred", required=True)
    a.add_argument("--data", required=True)
    a.add_argument("--out", required=True)
    a.add_argument("--seed", type=int, default=0)
    a.set_defaults(func=cmd_poet_apply)

    p = sub.add_parser("eval", help="exact-match evaluation, optionally with POET")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--model", help="model directory, or a comma-separated list")
    src.add_argument("--pred", help="prediction file(s) instead of models, comma-separated")
    p.add_argument("--test", required=True)
    p.add_argument("--poet")
    p.add_argument("--report", required=True)
    p.add_argument("--beam", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("folds", help="write five CELEX-style folds")
    p.add_argument("--data", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_folds)

    p = sub.add_parser("reduce", help="subsample one tag pair or all of them")
    p.add_argument("--data", required=True)
    p.add_argument("--pair", help="SOURCE_TAG,TARGET_TAG")
    p.add_argument("--fraction", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_reduce)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except (OSError, ValueError, KeyError, FloatingPointError) as e:
        msg = e.args[0] if isinstance(e, KeyError) and e.args else e
        print(f"med: error: {msg}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
