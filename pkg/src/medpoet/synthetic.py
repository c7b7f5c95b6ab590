"""Small synthetic reinflection corpora with known rules.

Used by the tests, the acceptance suite and the demo scripts; nothing here is
needed to train on real data.
"""

from __future__ import annotations

from typing import Callable, Optional

import numpy as np

from .corpus import Corpus, Sample

CONSONANTS = "bdfgklmnprst"
VOWELS = "aeiou"

UMLAUT = {"a": "ä", "o": "ö", "u": "ü"}


def random_stem(rng: np.random.Generator, min_syllables: int = 1, max_syllables: int = 3) -> str:
    n = int(rng.integers(min_syllables, max_syllables + 1))
    stem = "".join(CONSONANTS[rng.integers(len(CONSONANTS))] + VOWELS[rng.integers(len(VOWELS))]
                   for _ in range(n))
    if rng.random() < 0.5:
        stem += CONSONANTS[rng.integers(len(CONSONANTS))]
    return stem


def umlaut_first(stem: str) -> str:
    """Replace the first back vowel by its umlaut (stem-vowel substitution)."""
    for i, c in enumerate(stem):
        if c in UMLAUT:
            return stem[:i] + UMLAUT[c] + stem[i + 1:]
    return stem


RULES: dict[str, Callable[[str], str]] = {
    "prefix": lambda s: "ge" + s,
    "suffix": lambda s: s + "en",
    "vowel": umlaut_first,
    "identity": lambda s: s,
}


def _stems(rng, n, condition=None, taken=None):
    taken = set() if taken is None else taken
    out = []
    while len(out) < n:
        s = random_stem(rng)
        if s in taken or (condition is not None and not condition(s)):
            continue
        taken.add(s)
        out.append(s)
    return out


def rules_corpus(per_pair: int = 4, seed: int = 0) -> Corpus:
    """Four rules (prefix, suffix, stem vowel, identity), two tag pairs each.

    Source tags are ``pos=V,form=<rule><k>`` style strings so that every tag
    has two subtags; stems are distinct across the whole corpus.
    """
    rng = np.random.default_rng(seed)
    taken: set[str] = set()
    samples = []
    for rule, fn in RULES.items():
        needs_vowel = (lambda s: umlaut_first(s) != s) if rule == "vowel" else None
        for k in (1, 2):
            src = f"pos=V,src={rule}{k}"
            trg = f"pos=V,trg={rule}{k}"
            for stem in _stems(rng, per_pair, needs_vowel, taken):
                samples.append(Sample(stem, src, trg, fn(stem)))
    return Corpus(samples)


def shared_rule_corpus(per_pair: int, pairs: int = 4, seed: int = 0,
                       suffixes: Optional[list[str]] = None, taken: Optional[set] = None) -> Corpus:
    """``pairs`` tag pairs that all apply one rule, ``ge`` + stem + ``t``.

    The pairs differ only in their tags (the person subtag).  ``suffixes``
    gives each pair its own suffix instead, which makes the pairs share only
    the prefix and the stem copy.
    """
    rng = np.random.default_rng(seed)
    if suffixes is None:
        suffixes = ["t"] * pairs
    if len(suffixes) < pairs:
        raise ValueError("need one suffix per tag pair")
    taken = set() if taken is None else taken
    samples = []
    for k in range(pairs):
        src, trg = f"pos=V,num=SG,per={k + 1}", f"pos=V,tense=PST,per={k + 1}"
        for stem in _stems(rng, per_pair, None, taken):
            samples.append(Sample(stem, src, trg, "ge" + stem + suffixes[k]))
    return Corpus(samples)


def split_shared_rule(train_per_pair: int, test_per_pair: int, pairs: int = 4, seed: int = 0):
    """Disjoint train/test corpora from :func:`shared_rule_corpus`."""
    taken: set[str] = set()
    train = shared_rule_corpus(train_per_pair, pairs, seed, taken=taken)
    test = shared_rule_corpus(test_per_pair, pairs, seed + 1, taken=taken)
    return train, test


def inject_one_edit_error(forms: list[str], every: int = 2, seed: int = 0) -> list[str]:
    """Deterministically corrupt every ``every``-th form by dropping its last
    character (a systematic single-edit error)."""
    out = list(forms)
    for i in range(0, len(out), every):
        if len(out[i]) > 1:
            out[i] = out[i][:-1]
    return out
