"""Reinflection datasets, vocabularies and sequence encoding.

An input sequence is the start symbol, the source subtags (``IN=`` prefixed),
the target subtags (``OUT=`` prefixed), the characters of the source form and
the end symbol.  Output sequences are the characters of the target form
wrapped in the same start/end symbols.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

START = "<w>"
END = "</w>"
UNK = "<unk>"
SPECIALS = (START, END, UNK)

TAG_DELIMITER = ","
VOCAB_FORMAT_VERSION = 1


class MalformedTagError(ValueError):
    pass


class CorpusFormatError(ValueError):
    """A dataset line could not be parsed."""

    def __init__(self, message: str, line: Optional[int] = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


@dataclass(frozen=True)
class Sample:
    source_form: str
    source_tag: str
    target_tag: str
    target_form: Optional[str] = None

    def __post_init__(self):
        if not self.source_form:
            raise ValueError("source form must be non-empty")
        if self.target_form is not None and not self.target_form:
            raise ValueError("target form must be non-empty when present")
        if not self.source_tag or not self.target_tag:
            raise MalformedTagError("tags must be non-empty")

    @property
    def pair(self) -> tuple[str, str]:
        return (self.source_tag, self.target_tag)


@dataclass(frozen=True)
class Corpus:
    samples: tuple[Sample, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "samples", tuple(self.samples))

    def __len__(self):
        return len(self.samples)

    def __iter__(self):
        return iter(self.samples)

    def __getitem__(self, i):
        return self.samples[i]

    @property
    def tag_pairs(self) -> frozenset[tuple[str, str]]:
        return frozenset(s.pair for s in self.samples)

    def by_pair(self) -> dict[tuple[str, str], list[Sample]]:
        """Group samples by (source tag, target tag), keeping corpus order."""
        groups: dict[tuple[str, str], list[Sample]] = {}
        for s in self.samples:
            groups.setdefault(s.pair, []).append(s)
        return groups


def parse_tag(raw: str, side: str) -> list[str]:
    """Split a raw tag into side-prefixed subtag tokens.

    >>> parse_tag("pos=ADJ,case=GEN", "IN")
    ['IN=pos=ADJ', 'IN=case=GEN']
    """
    if side not in ("IN", "OUT"):
        raise ValueError(f"side must be IN or OUT, got {side!r}")
    if not raw:
        raise MalformedTagError("empty tag")
    parts = raw.split(TAG_DELIMITER)
    if any(not p for p in parts):
        raise MalformedTagError(f"empty subtag in {raw!r}")
    return [f"{side}={p}" for p in parts]


def load_tsv(path) -> Corpus:
    """Read ``source_tag<TAB>source_form<TAB>target_tag[<TAB>target_form]`` lines."""
    samples = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.rstrip("\n").rstrip("\r")
            if not line.strip():
                continue
            fields = line.split("\t")
            if len(fields) not in (3, 4):
                raise CorpusFormatError(
                    f"expected 4 tab-separated fields, got {len(fields)}", lineno
                )
            source_tag, source_form, target_tag = fields[:3]
            target_form = fields[3] if len(fields) == 4 and fields[3] else None
            try:
                samples.append(Sample(source_form, source_tag, target_tag, target_form))
            except ValueError as e:
                raise CorpusFormatError(str(e), lineno) from None
    return Corpus(samples)


def write_tsv(corpus: Iterable[Sample], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for s in corpus:
            fields = [s.source_tag, s.source_form, s.target_tag]
            if s.target_form is not None:
                fields.append(s.target_form)
            f.write("\t".join(fields) + "\n")


@dataclass(frozen=True)
class Vocabulary:
    """Token/id maps for the encoder input and the decoder output."""

    input_tokens: tuple[str, ...]
    output_tokens: tuple[str, ...]
    _input_ids: dict = field(init=False, repr=False, compare=False)
    _output_ids: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "input_tokens", tuple(self.input_tokens))
        object.__setattr__(self, "output_tokens", tuple(self.output_tokens))
        for side in (self.input_tokens, self.output_tokens):
            if side[: len(SPECIALS)] != SPECIALS:
                raise ValueError("vocabulary must start with the special tokens")
            if len(set(side)) != len(side):
                raise ValueError("duplicate token in vocabulary")
        object.__setattr__(self, "_input_ids", {t: i for i, t in enumerate(self.input_tokens)})
        object.__setattr__(self, "_output_ids", {t: i for i, t in enumerate(self.output_tokens)})

    @property
    def input_size(self) -> int:
        return len(self.input_tokens)

    @property
    def output_size(self) -> int:
        return len(self.output_tokens)

    @property
    def start_id(self) -> int:
        return 0

    @property
    def end_id(self) -> int:
        return 1

    @property
    def unk_id(self) -> int:
        return 2

    @property
    def characters(self) -> tuple[str, ...]:
        return self.output_tokens[len(SPECIALS):]

    def input_id(self, token: str) -> int:
        return self._input_ids.get(token, self.unk_id)

    def output_id(self, token: str) -> int:
        return self._output_ids.get(token, self.unk_id)

    def to_json(self) -> str:
        return json.dumps(
            {
                "format_version": VOCAB_FORMAT_VERSION,
                "input_tokens": list(self.input_tokens),
                "output_tokens": list(self.output_tokens),
            },
            ensure_ascii=False,
            indent=1,
        )

    @classmethod
    def from_json(cls, text: str) -> "Vocabulary":
        data = json.loads(text)
        if data.get("format_version") != VOCAB_FORMAT_VERSION:
            raise ValueError(f"unsupported vocabulary format version {data.get('format_version')!r}")
        return cls(data["input_tokens"], data["output_tokens"])

    def digest(self) -> str:
        return hashlib.sha256(self.to_json().encode("utf-8")).hexdigest()

    def save(self, path) -> None:
        Path(path).write_text(self.to_json() + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path) -> "Vocabulary":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


def build_vocab(corpus: Corpus) -> Vocabulary:
    if len(corpus) == 0:
        raise ValueError("cannot build a vocabulary from an empty corpus")
    chars: set[str] = set()
    src_subtags: set[str] = set()
    trg_subtags: set[str] = set()
    for s in corpus:
        chars.update(s.source_form)
        if s.target_form is not None:
            chars.update(s.target_form)
        src_subtags.update(parse_tag(s.source_tag, "IN"))
        trg_subtags.update(parse_tag(s.target_tag, "OUT"))
    lang = sorted(chars)
    return Vocabulary(
        SPECIALS + tuple(sorted(src_subtags | trg_subtags | chars)),
        SPECIALS + tuple(lang),
    )


def input_tokens(sample: Sample) -> list[str]:
    return (
        [START]
        + parse_tag(sample.source_tag, "IN")
        + parse_tag(sample.target_tag, "OUT")
        + list(sample.source_form)
        + [END]
    )


def encode_input(sample: Sample, vocab: Vocabulary) -> list[int]:
    return [vocab.input_id(t) for t in input_tokens(sample)]


def encode_output(form: str, vocab: Vocabulary) -> list[int]:
    if not form:
        raise ValueError("cannot encode an empty form")
    return [vocab.start_id] + [vocab.output_id(c) for c in form] + [vocab.end_id]


def decode_output(ids: Sequence[int], vocab: Vocabulary, with_status: bool = False):
    """Turn decoder ids back into a string.

    A leading start symbol is skipped, decoding stops at the first end symbol
    and unknown ids are dropped.  With ``with_status=True`` a pair
    ``(form, terminated)`` is returned, where ``terminated`` tells whether an
    end symbol was seen (a decoder that hits its length cap leaves it False).
    """
    chars = []
    terminated = False
    for pos, i in enumerate(ids):
        i = int(i)
        if i == vocab.end_id:
            terminated = True
            break
        if i == vocab.start_id and pos == 0:
            continue
        if i in (vocab.start_id, vocab.unk_id) or not 0 <= i < vocab.output_size:
            continue
        chars.append(vocab.output_tokens[i])
    form = "".join(chars)
    return (form, terminated) if with_status else form
