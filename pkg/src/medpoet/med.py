"""MED: one attention encoder-decoder for all tag pairs of a language."""

from __future__ import annotations

import dataclasses
import json
import logging
import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from . import neural as nn
from .corpus import Corpus, Sample, Vocabulary, build_vocab, decode_output, encode_input, encode_output

log = logging.getLogger(__name__)

MODEL_MAGIC = "medpoet-model"
MODEL_VERSION = 1


@dataclass(frozen=True)
class MedConfig:
    hidden_size: int = 100
    embedding_size: int = 100
    maxout_pieces: int = 2
    minibatch_size: int = 20
    iterations: int = 20000
    clip_norm: float = 1.0
    adadelta_rho: float = 0.95
    adadelta_eps: float = 1e-6
    # None: input length + 10.  Counts the whole output sequence, start and end symbols included.
    max_decode_length: Optional[int] = None
    beam_width: int = 1
    seed: int = 0
    init: str = "identity"
    dtype: str = "float64"
    log_every: int = 100
    bucket_batches: int = 10

    def __post_init__(self):
        for name in ("hidden_size", "embedding_size", "maxout_pieces", "minibatch_size",
                     "beam_width", "log_every", "bucket_batches"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.iterations < 0:
            raise ValueError("iterations must be >= 0")
        if self.max_decode_length is not None and self.max_decode_length < 2:
            raise ValueError("max_decode_length must be >= 2")
        if self.dtype not in ("float64", "float32"):
            raise ValueError(f"dtype must be float64 or float32, got {self.dtype!r}")
        if not 0.0 < self.adadelta_rho < 1.0 or self.adadelta_eps <= 0:
            raise ValueError("invalid Adadelta settings")

    def replace(self, **changes) -> "MedConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "MedConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(sorted(unknown))}")
        return cls(**data)


def _coerce(field_type: str, raw: str):
    raw = raw.strip()
    if "Optional" in field_type and raw.lower() in ("", "none", "auto"):
        return None
    if "int" in field_type:
        return int(raw)
    if "float" in field_type:
        return float(raw)
    return raw


def load_config(path, **overrides) -> MedConfig:
    """Read a flat ``key = value`` config file (``#`` starts a comment)."""
    types = {f.name: str(f.type) for f in dataclasses.fields(MedConfig)}
    values = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        sep = "=" if "=" in line else (":" if ":" in line else None)
        if sep is None:
            raise ValueError(f"{path}: line {lineno}: expected key = value")
        key, raw = (part.strip() for part in line.split(sep, 1))
        if key not in types:
            raise ValueError(f"{path}: line {lineno}: unknown config key {key!r}")
        try:
            values[key] = _coerce(types[key], raw)
        except ValueError:
            raise ValueError(f"{path}: line {lineno}: bad value for {key}: {raw!r}") from None
    values.update(overrides)
    return MedConfig.from_dict(values)


def dims_for(vocab: Vocabulary, config: MedConfig) -> nn.Dims:
    return nn.Dims(
        input_vocab=vocab.input_size,
        output_vocab=vocab.output_size,
        hidden=config.hidden_size,
        embedding=config.embedding_size,
        maxout_pieces=config.maxout_pieces,
    )


@dataclass
class MedModel:
    vocab: Vocabulary
    params: nn.Params
    config: MedConfig
    log: list[tuple[int, float]] = field(default_factory=list)

    def predict(self, sample: Sample, beam_width: Optional[int] = None) -> str:
        return predict(self, sample, beam_width)

    def predict_many(self, samples: Sequence[Sample], beam_width: Optional[int] = None) -> list[str]:
        return predict_many(self, samples, beam_width)


def initial_model(corpus: Corpus, config: MedConfig, vocab: Optional[Vocabulary] = None) -> MedModel:
    vocab = vocab or build_vocab(corpus)
    init_seq, _ = np.random.SeedSequence(config.seed).spawn(2)
    params = nn.init_params(dims_for(vocab, config), np.random.default_rng(init_seq),
                            config.init, np.dtype(config.dtype))
    return MedModel(vocab, params, config)


def pad(seqs: Sequence[Sequence[int]], fill: int = 0):
    """Right-pad id sequences into an int matrix and a boolean mask."""
    width = max(len(s) for s in seqs)
    ids = np.full((len(seqs), width), fill, dtype=np.int64)
    mask = np.zeros((len(seqs), width), dtype=bool)
    for i, s in enumerate(seqs):
        ids[i, :len(s)] = s
        mask[i, :len(s)] = True
    return ids, mask


def _epoch_batches(lengths: np.ndarray, config: MedConfig, rng: np.random.Generator):
    """Shuffle, bucket by input length within groups of batches, shuffle batches."""
    order = rng.permutation(len(lengths))
    size = config.minibatch_size
    group = size * config.bucket_batches
    batches = []
    for start in range(0, len(order), group):
        chunk = order[start:start + group]
        chunk = chunk[np.argsort(lengths[chunk], kind="stable")]
        batches.extend(chunk[i:i + size] for i in range(0, len(chunk), size))
    return [batches[i] for i in rng.permutation(len(batches))]


def train(corpus: Corpus, config: MedConfig = MedConfig(), vocab: Optional[Vocabulary] = None,
          callback=None) -> MedModel:
    """Train a single model on every sample of ``corpus``, whatever its tag pair.

    ``config.iterations`` counts minibatch updates.  ``callback(iteration,
    model)``, if given, runs after each logged window.
    """
    if len(corpus) == 0:
        raise ValueError("cannot train on an empty corpus")
    if any(s.target_form is None for s in corpus):
        raise ValueError("training samples need target forms")
    model = initial_model(corpus, config, vocab)
    vocab = model.vocab
    _, shuffle_seq = np.random.SeedSequence(config.seed).spawn(2)
    rng = np.random.default_rng(shuffle_seq)

    xs = [encode_input(s, vocab) for s in corpus]
    ys = [encode_output(s.target_form, vocab) for s in corpus]
    lengths = np.array([len(x) for x in xs])
    state = nn.AdadeltaState(model.params, config.adadelta_rho, config.adadelta_eps)

    window = []
    batches = []
    for it in range(1, config.iterations + 1):
        if not batches:
            batches = _epoch_batches(lengths, config, rng)
        idx = batches.pop()
        X, xm = pad([xs[i] for i in idx])
        Y, ym = pad([ys[i] for i in idx])
        loss, grads = nn.loss_and_grads(model.params, X, xm, Y, ym)
        if not math.isfinite(loss):
            raise FloatingPointError(f"training diverged at iteration {it} (loss {loss})")
        nn.adadelta_update(state, model.params, grads, config.clip_norm)
        window.append(loss)
        if it % config.log_every == 0 or it == config.iterations:
            mean = float(np.mean(window))
            model.log.append((it, mean))
            log.debug("iteration %d loss %.4f", it, mean)
            window = []
            if callback is not None:
                callback(it, model)
    return model


def _train_member(args):
    corpus, config = args
    return train(corpus, config)


def train_ensemble(corpus: Corpus, config: MedConfig, seeds: Iterable[int], n_jobs: int = 1) -> list[MedModel]:
    """Independent models that differ only in their seed."""
    configs = [config.replace(seed=s) for s in seeds]
    vocab = build_vocab(corpus)
    if n_jobs <= 1:
        return [train(corpus, c, vocab) for c in configs]
    with ProcessPoolExecutor(max_workers=n_jobs) as pool:
        return list(pool.map(_train_member, [(corpus, c) for c in configs]))


# --- decoding --------------------------------------------------------------

def _decode_limit(model: MedModel, input_len: int) -> int:
    limit = model.config.max_decode_length
    return input_len + 10 if limit is None else limit


def _greedy(model: MedModel, xs: list[list[int]]) -> list[list[int]]:
    params = model.params
    X, xm = pad(xs)
    enc = nn.encode(params, X, xm)
    p = nn.scope(params, "dec")
    W = nn._stacked_input_weights(p)
    b = np.concatenate([p["b_z"], p["b_r"], p["b_h"]])
    pieces = nn._maxout_pieces(params)
    limits = np.array([_decode_limit(model, len(x)) for x in xs])
    end = model.vocab.end_id
    y = np.full(len(xs), model.vocab.start_id, dtype=np.int64)
    s = enc.s0
    done = np.zeros(len(xs), dtype=bool)
    out = []
    for _ in range(int(limits.max()) - 1):
        _, c, _ = nn._attend(params, s, enc)
        s, logits, _ = nn._decoder_core(params, W, b, params["emb_out"][y], c, s, pieces)
        y = logits.argmax(axis=1)
        out.append(y)
        done |= y == end
        if done.all():
            break
    seqs = np.stack(out, axis=1) if out else np.zeros((len(xs), 0), dtype=np.int64)
    return [list(seqs[i, :limits[i] - 1]) for i in range(len(xs))]


def _beam(model: MedModel, x: list[int], width: int) -> list[int]:
    params = model.params
    enc1 = nn.encode(params, np.array([x]), np.ones((1, len(x)), dtype=bool))
    p = nn.scope(params, "dec")
    W = nn._stacked_input_weights(p)
    b = np.concatenate([p["b_z"], p["b_r"], p["b_h"]])
    pieces = nn._maxout_pieces(params)
    end = model.vocab.end_id
    limit = _decode_limit(model, len(x)) - 1

    live = [(0.0, [], enc1.s0[0])]
    finished: list[tuple[float, list[int]]] = []
    for step in range(limit):
        n = len(live)
        enc = nn.Encoding(np.repeat(enc1.annotations, n, 0), np.repeat(enc1.mask, n, 0),
                          None, np.repeat(enc1.projected, n, 0))
        s = np.stack([h[2] for h in live])
        y = np.array([h[1][-1] if h[1] else model.vocab.start_id for h in live])
        _, c, _ = nn._attend(params, s, enc)
        s_new, logits, _ = nn._decoder_core(params, W, b, params["emb_out"][y], c, s, pieces)
        logp = nn.log_softmax(logits)
        expansions = []
        for i, (score, toks, _) in enumerate(live):
            for tok in np.argsort(-logp[i], kind="stable")[:width]:
                expansions.append((score + float(logp[i, tok]), i, int(tok)))
        expansions.sort(key=lambda e: -e[0])
        previous, live = live, []
        for score, i, tok in expansions[:width]:
            toks = previous[i][1] + [tok]
            if tok == end:
                finished.append((score, toks))
            else:
                live.append((score, toks, s_new[i]))
        # log-probabilities only decrease, so no live hypothesis can overtake the best finished one
        if not live or (finished and max(f[0] for f in finished) >= live[0][0]):
            break
    if finished:
        return max(finished, key=lambda f: f[0])[1]
    return live[0][1] if live else []


def predict_many(model: MedModel, samples: Sequence[Sample], beam_width: Optional[int] = None,
                 batch_size: int = 256) -> list[str]:
    width = model.config.beam_width if beam_width is None else beam_width
    if width < 1:
        raise ValueError("beam width must be >= 1")
    xs = [encode_input(s, model.vocab) for s in samples]
    if width == 1:
        ids = []
        for start in range(0, len(xs), batch_size):
            ids.extend(_greedy(model, xs[start:start + batch_size]))
    else:
        ids = [_beam(model, x, width) for x in xs]
    return [decode_output(seq, model.vocab) for seq in ids]


def predict(model: MedModel, sample: Sample, beam_width: Optional[int] = None) -> str:
    return predict_many(model, [sample], beam_width)[0]


def majority_vote(predictions: Sequence[str], rng: Optional[np.random.Generator] = None) -> str:
    """Most frequent string; ties are drawn uniformly (from the sorted modal set)."""
    if not predictions:
        raise ValueError("no predictions to vote on")
    counts = Counter(predictions)
    top = max(counts.values())
    modal = sorted(p for p, c in counts.items() if c == top)
    if len(modal) == 1:
        return modal[0]
    if rng is None:
        rng = np.random.default_rng(0)
    return modal[int(rng.integers(len(modal)))]


def _check_shared_vocab(models: Sequence[MedModel]):
    if not models:
        raise ValueError("an ensemble needs at least one model")
    for m in models[1:]:
        if m.vocab != models[0].vocab:
            raise ValueError("ensemble members have different vocabularies")


def ensemble_predict_many(models: Sequence[MedModel], samples: Sequence[Sample],
                          rng: Optional[np.random.Generator] = None,
                          beam_width: Optional[int] = None) -> list[str]:
    _check_shared_vocab(models)
    if rng is None:
        rng = np.random.default_rng(0)
    member_preds = [predict_many(m, samples, beam_width) for m in models]
    return [majority_vote(votes, rng) for votes in zip(*member_preds)]


def ensemble_predict(models: Sequence[MedModel], sample: Sample,
                     rng: Optional[np.random.Generator] = None,
                     beam_width: Optional[int] = None) -> str:
    return ensemble_predict_many(models, [sample], rng, beam_width)[0]


def exact_match_on(model: MedModel, corpus: Corpus) -> float:
    preds = predict_many(model, corpus.samples)
    return sum(p == s.target_form for p, s in zip(preds, corpus)) / len(corpus)


# --- persistence -----------------------------------------------------------

def save(model: MedModel, path) -> None:
    """Write ``manifest.json``, ``vocab.json`` and ``params.npz`` into directory ``path``."""
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    model.vocab.save(path / "vocab.json")
    nn.save_checkpoint(model.params, path / "params.npz")
    manifest = {
        "magic": MODEL_MAGIC,
        "format_version": MODEL_VERSION,
        "config": model.config.to_dict(),
        "vocab_sha256": model.vocab.digest(),
        "training_log": [list(entry) for entry in model.log],
    }
    (path / "manifest.json").write_text(json.dumps(manifest, indent=1) + "\n", encoding="utf-8")


def load(path) -> MedModel:
    path = Path(path)
    try:
        manifest = json.loads((path / "manifest.json").read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise ValueError(f"{path}: unreadable model manifest ({e})") from None
    if manifest.get("magic") != MODEL_MAGIC:
        raise ValueError(f"{path}: not a MED model directory (bad magic)")
    if manifest.get("format_version") != MODEL_VERSION:
        raise ValueError(f"{path}: unsupported model format {manifest.get('format_version')!r}")
    vocab = Vocabulary.load(path / "vocab.json")
    if vocab.digest() != manifest["vocab_sha256"]:
        raise ValueError(f"{path}: vocabulary does not match the manifest")
    config = MedConfig.from_dict(manifest["config"])
    params = nn.load_checkpoint(path / "params.npz")
    expected = nn.param_shapes(dims_for(vocab, config))
    if {k: v.shape for k, v in params.items()} != expected:
        raise ValueError(f"{path}: parameter shapes do not match the config")
    return MedModel(vocab, params, config, [(int(i), float(l)) for i, l in manifest["training_log"]])
