"""Prefer Observed Edit Trees: correct predictions with training-set edit trees."""

from __future__ import annotations

from collections import Counter
from pathlib import Path
from typing import Iterable, Mapping, NamedTuple, Optional

import numpy as np

from .corpus import Corpus, Sample
from .edittree import EditTree, apply_edit_tree, build_edit_tree, canonical_key, levenshtein, parse_key

STORE_HEADER = "#poet-store\tversion=1"


class Candidate(NamedTuple):
    form: str
    key: str
    frequency: int


class PoetStore:
    """Edit-tree frequencies per (source tag, target tag).

    Immutable once built; ``trees(s, t)`` maps canonical keys to
    ``(tree, frequency)``.
    """

    def __init__(self, counts: Mapping[tuple[str, str], Mapping[str, int]]):
        self._trees: dict[tuple[str, str], dict[str, tuple[EditTree, int]]] = {}
        for pair, keys in counts.items():
            entry = {}
            for key, freq in keys.items():
                if freq < 1:
                    raise ValueError(f"frequency must be positive, got {freq} for {key!r}")
                entry[key] = (parse_key(key), int(freq))
            if entry:
                self._trees[tuple(pair)] = entry

    @property
    def pairs(self) -> list[tuple[str, str]]:
        return sorted(self._trees)

    def __len__(self):
        return len(self._trees)

    def trees(self, source_tag: str, target_tag: str) -> Mapping[str, tuple[EditTree, int]]:
        return self._trees.get((source_tag, target_tag), {})

    def frequency(self, source_tag: str, target_tag: str, key: str) -> int:
        entry = self.trees(source_tag, target_tag).get(key)
        return entry[1] if entry else 0

    def supports(self, source_form: str, source_tag: str, target_tag: str, form: str) -> bool:
        """Membership test: is e(source_form, form) among the observed trees?"""
        observed = self.trees(source_tag, target_tag)
        if not observed or not form:
            return False
        return canonical_key(build_edit_tree(source_form, form)) in observed

    def counts(self) -> dict[tuple[str, str], dict[str, int]]:
        return {p: {k: f for k, (_, f) in e.items()} for p, e in self._trees.items()}

    def __eq__(self, other):
        if not isinstance(other, PoetStore):
            return NotImplemented
        return self.counts() == other.counts()

    def save(self, path) -> None:
        lines = [STORE_HEADER]
        for pair in self.pairs:
            for key in sorted(self._trees[pair]):
                lines.append(f"{pair[0]}\t{pair[1]}\t{key}\t{self._trees[pair][key][1]}")
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path) -> "PoetStore":
        text = Path(path).read_text(encoding="utf-8").splitlines()
        if not text or text[0] != STORE_HEADER:
            raise ValueError(f"{path}: not a POET store (bad header)")
        counts: dict[tuple[str, str], dict[str, int]] = {}
        for lineno, line in enumerate(text[1:], start=2):
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) != 4:
                raise ValueError(f"{path}: line {lineno}: expected 4 fields")
            s, t, key, freq = fields
            counts.setdefault((s, t), {})[key] = int(freq)
        return cls(counts)


def build_store(corpus: Iterable[Sample]) -> PoetStore:
    counts: dict[tuple[str, str], Counter] = {}
    for x in corpus:
        if x.target_form is None:
            raise ValueError(f"sample {x.source_form!r} has no target form")
        key = canonical_key(build_edit_tree(x.source_form, x.target_form))
        counts.setdefault(x.pair, Counter())[key] += 1
    return PoetStore(counts)


def candidates(
    store: PoetStore, source_form: str, source_tag: str, target_tag: str, prediction: str
) -> list[Candidate]:
    """Supported forms at edit distance exactly one from ``prediction``.

    Every observed tree of the tag pair is applied to the source form; results
    one edit away from the prediction are kept if their own edit tree is in
    the store.  Sorted by frequency (descending), then key, then form.
    """
    observed = store.trees(source_tag, target_tag)
    found: dict[str, Candidate] = {}
    for tree, _ in observed.values():
        form = apply_edit_tree(tree, source_form)
        if not form or form in found or levenshtein(prediction, form) != 1:
            continue
        key = canonical_key(build_edit_tree(source_form, form))
        if key in observed:
            found[form] = Candidate(form, key, observed[key][1])
    return sorted(found.values(), key=lambda c: (-c.frequency, c.key, c.form))


def correct(
    store: PoetStore,
    source_form: str,
    source_tag: str,
    target_tag: str,
    prediction: str,
    rng: Optional[np.random.Generator] = None,
) -> str:
    if store.supports(source_form, source_tag, target_tag, prediction):
        return prediction
    found = candidates(store, source_form, source_tag, target_tag, prediction)
    if not found:
        return prediction
    best = [c for c in found if c.frequency == found[0].frequency]
    if len(best) == 1:
        return best[0].form
    if rng is None:
        rng = np.random.default_rng(0)
    return best[int(rng.integers(len(best)))].form


def correct_corpus(
    store: PoetStore, samples: Iterable[Sample], predictions: Iterable[str], rng=None
) -> list[str]:
    if rng is None:
        rng = np.random.default_rng(0)
    return [
        correct(store, x.source_form, x.source_tag, x.target_tag, p, rng)
        for x, p in zip(samples, predictions, strict=True)
    ]
