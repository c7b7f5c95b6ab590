"""Exact-match evaluation, CELEX-style folds and training-set reduction."""

from __future__ import annotations

import json
import logging
import math
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .corpus import Corpus, Sample
from .med import MedConfig, MedModel, _check_shared_vocab, majority_vote, predict_many, train
from .poet import PoetStore, correct

log = logging.getLogger(__name__)

Pair = tuple[str, str]

CELEX_SIZES = (500, 1000, 1000)
N_FOLDS = 5


def exact_match(predictions: Sequence[str], golds: Sequence[str]) -> float:
    if len(predictions) != len(golds):
        raise ValueError(f"{len(predictions)} predictions for {len(golds)} golds")
    if not golds:
        return 0.0
    return sum(p == g for p, g in zip(predictions, golds)) / len(golds)


def _pair_rng(seed: int, pair: Pair) -> np.random.Generator:
    # Seeded per pair, so one pair's permutation does not depend on the others.
    tag = zlib.crc32(f"{pair[0]}\t{pair[1]}".encode("utf-8"))
    return np.random.default_rng([seed, tag])


@dataclass(frozen=True)
class FoldSpec:
    index: int
    train: Corpus
    dev: Corpus
    test: Corpus


def make_celex_folds(data: Corpus, seed: int = 0, sizes=CELEX_SIZES) -> list[FoldSpec]:
    """Five rotating train/dev/test splits per tag pair.

    Each pair's samples are shuffled and cut into five chunks (500 samples
    each for 2,500 samples per pair); fold ``i`` trains on chunk ``i``, uses
    the next two chunks as dev and the two after as test.  Pairs with fewer
    samples get proportionally smaller chunks.
    """
    full = sum(sizes)
    per_fold: list[dict[str, list[Sample]]] = [
        {"train": [], "dev": [], "test": []} for _ in range(N_FOLDS)
    ]
    chunk_counts = [sizes[0] * N_FOLDS // full, sizes[1] * N_FOLDS // full, sizes[2] * N_FOLDS // full]
    if sum(chunk_counts) != N_FOLDS:
        raise ValueError(f"split sizes {sizes} do not divide into {N_FOLDS} equal chunks")
    for pair, samples in sorted(data.by_pair().items()):
        n = len(samples)
        if n < 3:
            raise ValueError(f"tag pair {pair} has {n} samples; at least 3 are needed")
        if n < full:
            log.warning("tag pair %s has %d samples (< %d); folds are scaled down", pair, n, full)
        perm = _pair_rng(seed, pair).permutation(n)[:full]
        chunks = [sorted(c) for c in np.array_split(perm, N_FOLDS)]
        for i in range(N_FOLDS):
            k = 0
            for split, count in zip(("train", "dev", "test"), chunk_counts):
                for j in range(count):
                    per_fold[i][split].extend(samples[idx] for idx in chunks[(i + k + j) % N_FOLDS])
                k += count
    return [FoldSpec(i, Corpus(f["train"]), Corpus(f["dev"]), Corpus(f["test"]))
            for i, f in enumerate(per_fold)]


def _check_fraction(fraction: float):
    if not 0.0 < fraction <= 1.0:
        raise ValueError(f"fraction must be in (0, 1], got {fraction}")


def _kept(samples: list[Sample], pair: Pair, fraction: float, seed: int) -> list[int]:
    n = len(samples)
    keep = math.ceil(fraction * n - 1e-9)
    return sorted(_pair_rng(seed, pair).permutation(n)[:keep].tolist())


def reduce_tagpair(corpus: Corpus, pair: Pair, fraction: float, seed: int = 0) -> Corpus:
    """Keep ``ceil(fraction * n)`` samples of one tag pair, all others untouched.

    The kept set is a prefix of a seeded permutation, so smaller fractions
    give subsets of larger ones.
    """
    _check_fraction(fraction)
    pair = tuple(pair)
    groups = corpus.by_pair()
    if pair not in groups:
        raise KeyError(f"tag pair {pair} not in corpus")
    positions = [i for i, s in enumerate(corpus) if s.pair == pair]
    keep = {positions[k] for k in _kept(groups[pair], pair, fraction, seed)}
    return Corpus([s for i, s in enumerate(corpus) if s.pair != pair or i in keep])


def reduce_all(corpus: Corpus, fraction: float, seed: int = 0) -> Corpus:
    _check_fraction(fraction)
    keep = set()
    positions: dict[Pair, list[int]] = {}
    for i, s in enumerate(corpus):
        positions.setdefault(s.pair, []).append(i)
    for pair, pos in positions.items():
        samples = [corpus[i] for i in pos]
        keep.update(pos[k] for k in _kept(samples, pair, fraction, seed))
    return Corpus([s for i, s in enumerate(corpus) if i in keep])


def halving_fractions(steps: int = 5) -> list[float]:
    """1, 1/2, ..., 1/2**(steps-1); the default ends at 6.25%."""
    return [0.5 ** k for k in range(steps)]


# --- evaluation ------------------------------------------------------------

@dataclass
class PairResult:
    count: int
    correct: int
    corrected: Optional[int] = None

    @property
    def accuracy(self) -> float:
        return self.correct / self.count if self.count else 0.0

    @property
    def corrected_accuracy(self) -> Optional[float]:
        if self.corrected is None:
            return None
        return self.corrected / self.count if self.count else 0.0

    @property
    def delta(self) -> Optional[float]:
        c = self.corrected_accuracy
        return None if c is None else c - self.accuracy


@dataclass
class EvalReport:
    mode: str                                  # "single" or "ensemble"
    total: int
    correct: int
    member_accuracies: list[float]
    per_pair: dict[Pair, PairResult]
    corrected: Optional[int] = None
    records: list[dict] = field(default_factory=list, repr=False)

    @property
    def accuracy(self) -> float:
        return self.correct / self.total if self.total else 0.0

    @property
    def corrected_accuracy(self) -> Optional[float]:
        if self.corrected is None:
            return None
        return self.corrected / self.total if self.total else 0.0

    @property
    def poet_delta(self) -> Optional[float]:
        c = self.corrected_accuracy
        return None if c is None else c - self.accuracy

    @property
    def member_mean(self) -> float:
        return float(np.mean(self.member_accuracies))

    @property
    def member_std(self) -> float:
        # population standard deviation over ensemble members
        return float(np.std(self.member_accuracies))

    def to_dict(self) -> dict:
        out = {
            "mode": self.mode,
            "total": self.total,
            "correct": self.correct,
            "accuracy": self.accuracy,
            "member_accuracies": self.member_accuracies,
            "member_mean": self.member_mean,
            "member_std": self.member_std,
            "per_pair": [
                {"source_tag": p[0], "target_tag": p[1], "count": r.count, "correct": r.correct,
                 "accuracy": r.accuracy, "poet_accuracy": r.corrected_accuracy, "poet_delta": r.delta}
                for p, r in sorted(self.per_pair.items())
            ],
        }
        if self.corrected is not None:
            out.update(poet_correct=self.corrected, poet_accuracy=self.corrected_accuracy,
                       poet_delta=self.poet_delta)
        return out


def evaluate_predictions(member_predictions: Sequence[Sequence[str]], test: Corpus,
                         poet_store: Optional[PoetStore] = None,
                         rng: Optional[np.random.Generator] = None) -> EvalReport:
    """Score one prediction list per ensemble member against ``test``.

    Members are combined by majority vote; with a store, the voted outputs are
    additionally corrected with POET.
    """
    if not member_predictions:
        raise ValueError("no predictions to evaluate")
    if any(s.target_form is None for s in test):
        raise ValueError("test samples need gold target forms")
    golds = [s.target_form for s in test]
    for preds in member_predictions:
        if len(preds) != len(golds):
            raise ValueError(f"{len(preds)} predictions for {len(golds)} test samples")
    if rng is None:
        rng = np.random.default_rng(0)
    member_acc = [exact_match(list(p), golds) for p in member_predictions]
    voted = [majority_vote(list(v), rng) for v in zip(*member_predictions)]
    fixed = None
    if poet_store is not None:
        fixed = [correct(poet_store, s.source_form, s.source_tag, s.target_tag, p, rng)
                 for s, p in zip(test, voted)]

    per_pair: dict[Pair, PairResult] = {}
    records = []
    for i, s in enumerate(test):
        r = per_pair.setdefault(s.pair, PairResult(0, 0, None if fixed is None else 0))
        r.count += 1
        r.correct += voted[i] == s.target_form
        rec = {"source_tag": s.source_tag, "source_form": s.source_form, "target_tag": s.target_tag,
               "gold": s.target_form, "prediction": voted[i]}
        if fixed is not None:
            r.corrected += fixed[i] == s.target_form
            rec["corrected"] = fixed[i]
        records.append(rec)
    return EvalReport(
        mode="ensemble" if len(member_predictions) > 1 else "single",
        total=len(golds),
        correct=sum(v == g for v, g in zip(voted, golds)),
        member_accuracies=member_acc,
        per_pair=per_pair,
        corrected=None if fixed is None else sum(f == g for f, g in zip(fixed, golds)),
        records=records,
    )


def evaluate(models: Sequence[MedModel], test: Corpus, poet_store: Optional[PoetStore] = None,
             rng: Optional[np.random.Generator] = None, beam_width: Optional[int] = None) -> EvalReport:
    _check_shared_vocab(models)
    if any(s.target_form is None for s in test):
        raise ValueError("test samples need gold target forms")
    preds = [predict_many(m, test.samples, beam_width) for m in models]
    return evaluate_predictions(preds, test, poet_store, rng)


def format_report(report: EvalReport) -> str:
    """Plain-text table, accuracies in percent with one decimal."""
    def pct(x):
        return "-" if x is None else f"{100 * x:.1f}"

    lines = [f"{'source tag':<24} {'target tag':<24} {'n':>6} {'acc':>6} {'poet':>6} {'delta':>6}"]
    for (s, t), r in sorted(report.per_pair.items()):
        delta = "-" if r.delta is None else f"{100 * r.delta:+.1f}"
        lines.append(f"{s:<24} {t:<24} {r.count:>6} {pct(r.accuracy):>6} "
                     f"{pct(r.corrected_accuracy):>6} {delta:>6}")
    lines.append(f"{report.mode} accuracy: {pct(report.accuracy)} ({report.correct}/{report.total})")
    if len(report.member_accuracies) > 1:
        lines.append(f"members: {' '.join(pct(a) for a in report.member_accuracies)}; "
                     f"mean {pct(report.member_mean)} ({100 * report.member_std:.1f})")
    if report.corrected is not None:
        lines.append(f"with POET: {pct(report.corrected_accuracy)} "
                     f"({100 * report.poet_delta:+.1f})")
    return "\n".join(lines)


PREDICTION_COLUMNS = ("source_tag", "source_form", "target_tag", "gold", "prediction", "corrected")


def write_report(report: EvalReport, path) -> Path:
    """Write the JSON report to ``path`` and per-sample predictions next to it.

    Returns the path of the prediction file.
    """
    path = Path(path)
    pred_path = path.with_name(path.name + ".predictions.tsv")
    columns = [c for c in PREDICTION_COLUMNS if c != "corrected" or report.corrected is not None]
    with open(pred_path, "w", encoding="utf-8", newline="\n") as f:
        f.write("#" + "\t".join(columns) + "\n")
        for rec in report.records:
            f.write("\t".join(rec[c] for c in columns) + "\n")
    data = report.to_dict()
    data["predictions_file"] = pred_path.name
    path.write_text(json.dumps(data, indent=1, ensure_ascii=False) + "\n", encoding="utf-8")
    return pred_path


def write_predictions(samples: Iterable[Sample], predictions: Iterable[str], path) -> None:
    """``source_tag, source_form, target_tag, prediction`` per line."""
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for s, p in zip(samples, predictions, strict=True):
            f.write(f"{s.source_tag}\t{s.source_form}\t{s.target_tag}\t{p}\n")


# --- reduction experiments -------------------------------------------------

@dataclass
class CurvePoint:
    fraction: float
    train_size: int
    pair_train_size: int
    accuracy: float


def reduction_curve(train_data: Corpus, test: Corpus, config: MedConfig,
                    fractions: Sequence[float] = tuple(halving_fractions()),
                    pair: Optional[Pair] = None, seed: int = 0,
                    pair_only: bool = False) -> list[CurvePoint]:
    """Accuracy as training data shrinks.

    With ``pair`` set, only that tag pair is reduced and accuracy is measured
    on its test samples (the large-general-set scenario); otherwise every pair
    is reduced and all of ``test`` is scored.  ``pair_only`` trains on the
    reduced pair alone, i.e. one model per tag pair, as a control.
    """
    if pair_only and pair is None:
        raise ValueError("pair_only needs a pair")
    scored = test if pair is None else Corpus([s for s in test if s.pair == tuple(pair)])
    points = []
    for f in fractions:
        data = reduce_all(train_data, f, seed) if pair is None else reduce_tagpair(train_data, pair, f, seed)
        if pair_only:
            data = Corpus([s for s in data if s.pair == tuple(pair)])
        model = train(data, config)
        preds = predict_many(model, scored.samples)
        n_pair = len(data) if pair is None else sum(s.pair == tuple(pair) for s in data)
        points.append(CurvePoint(f, len(data), n_pair, exact_match(preds, [s.target_form for s in scored])))
    return points


def write_curve(points: Sequence[CurvePoint], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("fraction\ttrain_size\tpair_train_size\taccuracy\n")
        for p in points:
            f.write(f"{p.fraction:g}\t{p.train_size}\t{p.pair_train_size}\t{p.accuracy!r}\n")
