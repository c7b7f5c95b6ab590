"""Numpy kernels for the attention encoder-decoder, with hand-written gradients.

Parameters live in a flat ``dict[str, np.ndarray]``.  Names are scoped with a
dot, e.g. ``enc_fwd.U_z``; :func:`scope` returns the unprefixed view of one
layer (the arrays are shared, not copied).

Shapes, with H hidden units, D embedding size, A attention size, M readout
units, K maxout pieces and V_in / V_out vocabulary sizes::

    emb_in                  (V_in, D)
    emb_out                 (V_out, D)
    enc_fwd.W_{z,r,h}       (H, D)        enc_bwd.* likewise
    enc_fwd.U_{z,r,h}       (H, H)
    enc_fwd.b_{z,r,h}       (H,)
    dec_init.W, dec_init.b  (H, H), (H,)  initial decoder state from the backward encoder
    att.W_s, att.W_h, att.v (A, H), (A, 2H), (A,)
    dec.W_{z,r,h}           (H, D + 2H)   decoder GRU; input is [embedding; context]
    dec.U_{z,r,h}, dec.b_*  (H, H), (H,)
    readout.U_s             (K*M, H)      pieces are laid out piece-major
    readout.V_e, readout.C_c, readout.b   (K*M, D), (K*M, 2H), (K*M,)
    out.W, out.b            (V_out, M), (V_out,)

Batched functions take padded id matrices plus boolean masks.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, MutableMapping, Optional

import numpy as np

Params = dict[str, np.ndarray]

GATES = ("z", "r", "h")
GRU_LAYERS = ("enc_fwd", "enc_bwd", "dec")


@dataclass(frozen=True)
class Dims:
    input_vocab: int
    output_vocab: int
    hidden: int = 100
    embedding: int = 100
    attention: Optional[int] = None
    readout: Optional[int] = None
    maxout_pieces: int = 2

    def __post_init__(self):
        if self.attention is None:
            object.__setattr__(self, "attention", self.hidden)
        if self.readout is None:
            object.__setattr__(self, "readout", self.hidden)
        for name in ("input_vocab", "output_vocab", "hidden", "embedding",
                     "attention", "readout", "maxout_pieces"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")


def identity_init(rows: int, cols: int, dtype=np.float64) -> np.ndarray:
    """Ones on the main diagonal up to ``min(rows, cols)``, zeros elsewhere."""
    if rows < 1 or cols < 1:
        raise ValueError(f"zero-sized matrix {rows}x{cols}")
    return np.eye(rows, cols, dtype=dtype)


def zero_init(shape, dtype=np.float64) -> np.ndarray:
    shape = (shape,) if isinstance(shape, int) else tuple(shape)
    if any(n < 1 for n in shape):
        raise ValueError(f"zero-sized shape {shape}")
    return np.zeros(shape, dtype=dtype)


def glorot_uniform(rows: int, cols: int, rng: np.random.Generator, dtype=np.float64):
    limit = np.sqrt(6.0 / (rows + cols))
    return rng.uniform(-limit, limit, size=(rows, cols)).astype(dtype)


def param_shapes(dims: Dims) -> dict[str, tuple[int, ...]]:
    H, D, A, M, K = dims.hidden, dims.embedding, dims.attention, dims.readout, dims.maxout_pieces
    shapes = {"emb_in": (dims.input_vocab, D), "emb_out": (dims.output_vocab, D)}
    for layer, in_dim in (("enc_fwd", D), ("enc_bwd", D), ("dec", D + 2 * H)):
        for g in GATES:
            shapes[f"{layer}.W_{g}"] = (H, in_dim)
            shapes[f"{layer}.U_{g}"] = (H, H)
            shapes[f"{layer}.b_{g}"] = (H,)
    shapes.update({
        "dec_init.W": (H, H),
        "dec_init.b": (H,),
        "att.W_s": (A, H),
        "att.W_h": (A, 2 * H),
        "att.v": (A,),
        "readout.U_s": (K * M, H),
        "readout.V_e": (K * M, D),
        "readout.C_c": (K * M, 2 * H),
        "readout.b": (K * M,),
        "out.W": (dims.output_vocab, M),
        "out.b": (dims.output_vocab,),
    })
    return shapes


def init_params(dims: Dims, rng: np.random.Generator, scheme: str = "identity",
                dtype=np.float64) -> Params:
    """Initial parameters.

    ``identity``: every weight matrix is a (rectangular) identity and every
    bias zero, except the decoder GRU weights, which are Glorot-uniform.
    ``glorot``: all weight matrices Glorot-uniform, biases zero.
    ``normal``: every tensor, biases included, drawn from N(0, 0.5^2); only
    meant for gradient checks, where exact symmetries must be avoided.
    """
    params = {}
    for name, shape in param_shapes(dims).items():
        is_bias = name.endswith(".b") or ".b_" in name
        if scheme == "normal":
            params[name] = (0.5 * rng.standard_normal(shape)).astype(dtype)
        elif is_bias:
            params[name] = zero_init(shape, dtype)
        elif scheme == "glorot" or (scheme == "identity" and name.startswith("dec.")):
            rows, cols = (1, shape[0]) if len(shape) == 1 else shape
            params[name] = glorot_uniform(rows, cols, rng, dtype).reshape(shape)
        elif scheme == "identity":
            rows, cols = (1, shape[0]) if len(shape) == 1 else shape
            params[name] = identity_init(rows, cols, dtype).reshape(shape)
        else:
            raise ValueError(f"unknown init scheme {scheme!r}")
    return params


def scope(params: Mapping[str, np.ndarray], prefix: str) -> dict[str, np.ndarray]:
    n = len(prefix) + 1
    return {k[n:]: v for k, v in params.items() if k.startswith(prefix + ".")}


def zeros_like_params(params: Mapping[str, np.ndarray]) -> Params:
    return {k: np.zeros_like(v) for k, v in params.items()}


def sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def softmax(x, axis=-1):
    e = np.exp(x - x.max(axis=axis, keepdims=True))
    return e / e.sum(axis=axis, keepdims=True)


def log_softmax(x, axis=-1):
    shifted = x - x.max(axis=axis, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=axis, keepdims=True))


# --- GRU -------------------------------------------------------------------

def _gru_recurrent(p, xz, xr, xh, h_prev):
    # xz, xr, xh are the input projections W x + b of the three gates.
    z = sigmoid(xz + h_prev @ p["U_z"].T)
    r = sigmoid(xr + h_prev @ p["U_r"].T)
    rh = r * h_prev
    hh = np.tanh(xh + rh @ p["U_h"].T)
    h = h_prev + z * (hh - h_prev)
    return h, (h_prev, z, r, rh, hh)


def _gru_recurrent_backward(p, g, cache, dh):
    """Backprop through one step; returns pre-activation grads and dh_prev."""
    h_prev, z, r, rh, hh = cache
    da_h = dh * z * (1.0 - hh * hh)
    da_z = dh * (hh - h_prev) * z * (1.0 - z)
    drh = da_h @ p["U_h"]
    da_r = drh * h_prev * r * (1.0 - r)
    g["U_h"] += da_h.T @ rh
    g["U_z"] += da_z.T @ h_prev
    g["U_r"] += da_r.T @ h_prev
    dh_prev = dh * (1.0 - z) + drh * r + da_z @ p["U_z"] + da_r @ p["U_r"]
    return da_z, da_r, da_h, dh_prev


def gru_step(p: Mapping[str, np.ndarray], x: np.ndarray, h_prev: np.ndarray) -> np.ndarray:
    """One GRU step; ``p`` holds W_*, U_*, b_* for gates z, r, h."""
    x = np.asarray(x)
    h_prev = np.asarray(h_prev)
    H, D = p["W_z"].shape
    if x.shape[-1] != D or h_prev.shape[-1] != H:
        raise ValueError(f"gru_step: expected x[..., {D}] and h[..., {H}], "
                         f"got {x.shape} and {h_prev.shape}")
    x2, h2 = np.atleast_2d(x), np.atleast_2d(h_prev)
    h, _ = _gru_recurrent(
        p,
        x2 @ p["W_z"].T + p["b_z"],
        x2 @ p["W_r"].T + p["b_r"],
        x2 @ p["W_h"].T + p["b_h"],
        h2,
    )
    return h.reshape(np.broadcast_shapes(x.shape[:-1], h_prev.shape[:-1]) + (H,))


def _stacked_input_weights(p):
    return np.concatenate([p["W_z"], p["W_r"], p["W_h"]], axis=0)


# --- encoder ---------------------------------------------------------------

@dataclass
class Encoding:
    annotations: np.ndarray        # (B, T, 2H)
    mask: np.ndarray               # (B, T) bool
    s0: np.ndarray                 # (B, H) initial decoder state
    projected: np.ndarray          # (B, T, A) annotations @ att.W_h.T
    cache: Optional[dict] = field(default=None, repr=False)


def _run_direction(p, E, mask, reverse, keep_cache):
    B, T, _ = E.shape
    H = p["U_z"].shape[0]
    W = _stacked_input_weights(p)
    b = np.concatenate([p["b_z"], p["b_r"], p["b_h"]])
    proj = E @ W.T + b
    xz, xr, xh = proj[..., :H], proj[..., H:2 * H], proj[..., 2 * H:]
    h = np.zeros((B, H), dtype=E.dtype)
    states = np.zeros((B, T, H), dtype=E.dtype)
    caches = [None] * T
    steps = range(T - 1, -1, -1) if reverse else range(T)
    for t in steps:
        hn, c = _gru_recurrent(p, xz[:, t], xr[:, t], xh[:, t], h)
        h = np.where(mask[:, t, None], hn, h)
        states[:, t] = h
        if keep_cache:
            caches[t] = c
    return states, caches


def encode(params: Mapping[str, np.ndarray], X: np.ndarray, mask: np.ndarray,
           keep_cache: bool = False) -> Encoding:
    """Bidirectional GRU encoder over padded ids ``X`` (B, T)."""
    X = np.asarray(X)
    mask = np.asarray(mask, dtype=bool)
    if X.ndim != 2 or X.shape[1] == 0:
        raise ValueError("encoder input must be a non-empty (batch, time) id matrix")
    if not mask[:, 0].all():
        raise ValueError("every sequence needs at least one token")
    E = params["emb_in"][X]
    fwd, fwd_c = _run_direction(scope(params, "enc_fwd"), E, mask, False, keep_cache)
    bwd, bwd_c = _run_direction(scope(params, "enc_bwd"), E, mask, True, keep_cache)
    ann = np.concatenate([fwd, bwd], axis=-1)
    s0 = np.tanh(bwd[:, 0] @ params["dec_init.W"].T + params["dec_init.b"])
    projected = ann @ params["att.W_h"].T
    cache = None
    if keep_cache:
        cache = {"X": X, "E": E, "fwd": fwd_c, "bwd": bwd_c, "h_first": bwd[:, 0]}
    return Encoding(ann, mask, s0, projected, cache)


def encode_bidirectional(params: Mapping[str, np.ndarray], ids) -> np.ndarray:
    """Annotations (T, 2H) for a single id sequence."""
    ids = np.asarray(ids, dtype=np.int64)
    if ids.ndim != 1 or len(ids) == 0:
        raise ValueError("encode_bidirectional needs a non-empty id sequence")
    return encode(params, ids[None], np.ones((1, len(ids)), dtype=bool)).annotations[0]


# --- attention -------------------------------------------------------------

def _attend(params, s_prev, enc: Encoding):
    q = s_prev @ params["att.W_s"].T
    th = np.tanh(enc.projected + q[:, None, :])
    energies = th @ params["att.v"]
    energies = np.where(enc.mask, energies, -np.inf)
    alpha = softmax(energies, axis=1)
    c = np.einsum("bt,btk->bk", alpha, enc.annotations)
    return alpha, c, th


def attention(params: Mapping[str, np.ndarray], s_prev, annotations, mask=None):
    """Attention weights and context vector.

    Accepts a single state (H,) with annotations (T, 2H), or a batch.
    """
    s_prev = np.asarray(s_prev)
    ann = np.asarray(annotations)
    single = s_prev.ndim == 1
    if single:
        s_prev, ann = s_prev[None], ann[None]
    if mask is None:
        mask = np.ones(ann.shape[:2], dtype=bool)
    mask = np.asarray(mask, dtype=bool).reshape(ann.shape[:2])
    enc = Encoding(ann, mask, s_prev, ann @ params["att.W_h"].T)
    alpha, c, _ = _attend(params, s_prev, enc)
    return (alpha[0], c[0]) if single else (alpha, c)


# --- decoder ---------------------------------------------------------------

def _readout(params, s, e, c, pieces):
    pre = (s @ params["readout.U_s"].T + e @ params["readout.V_e"].T
           + c @ params["readout.C_c"].T + params["readout.b"])
    pre = pre.reshape(pre.shape[0], pieces, -1)
    which = pre.argmax(axis=1)
    r = np.take_along_axis(pre, which[:, None, :], axis=1)[:, 0]
    return r, which


def _decoder_core(params, W_dec, b_dec, e, c, s_prev, pieces):
    H = s_prev.shape[-1]
    x = np.concatenate([e, c], axis=-1)
    proj = x @ W_dec.T + b_dec
    p = scope(params, "dec")
    s, gru_cache = _gru_recurrent(p, proj[:, :H], proj[:, H:2 * H], proj[:, 2 * H:], s_prev)
    r, which = _readout(params, s, e, c, pieces)
    logits = r @ params["out.W"].T + params["out.b"]
    return s, logits, (x, gru_cache, r, which)


def _maxout_pieces(params) -> int:
    return params["readout.U_s"].shape[0] // params["out.W"].shape[1]


def decoder_step(params: Mapping[str, np.ndarray], y_prev_id, s_prev, c):
    """Advance the decoder by one token.

    Returns the new state ``s_t`` and the output logits computed by the maxout
    readout over ``(s_t, embed(y_prev), c)``.  Works on one example or a batch.
    """
    y = np.asarray(y_prev_id)
    single = y.ndim == 0
    y = np.atleast_1d(y)
    V = params["emb_out"].shape[0]
    if y.dtype.kind not in "iu" or (y < 0).any() or (y >= V).any():
        raise ValueError(f"unknown output id {y_prev_id!r}")
    s_prev = np.atleast_2d(s_prev)
    c = np.atleast_2d(c)
    p = scope(params, "dec")
    W = _stacked_input_weights(p)
    b = np.concatenate([p["b_z"], p["b_r"], p["b_h"]])
    s, logits, _ = _decoder_core(params, W, b, params["emb_out"][y], c, s_prev,
                                 _maxout_pieces(params))
    return (s[0], logits[0]) if single else (s, logits)


def softmax_xent(logits, gold_id):
    """Probabilities and the cross-entropy ``-log p(gold)``."""
    logits = np.asarray(logits)
    if logits.dtype.kind != "f":
        logits = logits.astype(np.float64)
    n = logits.shape[-1]
    if not 0 <= int(gold_id) < n:
        raise ValueError(f"gold id {gold_id} out of range for {n} classes")
    logp = log_softmax(logits)
    return np.exp(logp), float(-logp[..., int(gold_id)])


# --- full sequence loss and gradients --------------------------------------

@dataclass
class ForwardRecord:
    loss: float
    enc: Encoding
    Y: np.ndarray
    ymask: np.ndarray
    steps: list
    batch_size: int


def forward(params: Mapping[str, np.ndarray], X, xmask, Y, ymask) -> ForwardRecord:
    """Teacher-forced loss: sum of token cross-entropies per sequence, averaged
    over the batch.  ``Y`` holds start, characters and end symbol per row."""
    Y = np.asarray(Y)
    ymask = np.asarray(ymask, dtype=bool)
    enc = encode(params, X, xmask, keep_cache=True)
    p = scope(params, "dec")
    W = _stacked_input_weights(p)
    b = np.concatenate([p["b_z"], p["b_r"], p["b_h"]])
    pieces = _maxout_pieces(params)
    B = Y.shape[0]
    s = enc.s0
    total = 0.0
    steps = []
    rows = np.arange(B)
    for t in range(1, Y.shape[1]):
        y_prev, gold, m = Y[:, t - 1], Y[:, t], ymask[:, t]
        alpha, c, th = _attend(params, s, enc)
        e = params["emb_out"][y_prev]
        s_new, logits, core = _decoder_core(params, W, b, e, c, s, pieces)
        logp = log_softmax(logits)
        total += float(-(logp[rows, gold] * m).sum())
        steps.append((s, alpha, c, th, e, s_new, np.exp(logp), core))
        s = s_new
    return ForwardRecord(total / B, enc, Y, ymask, steps, B)


def backward(params: Mapping[str, np.ndarray], rec: ForwardRecord) -> Params:
    """Exact gradients of ``rec.loss`` with respect to every parameter."""
    g = zeros_like_params(params)
    enc = rec.enc
    B = rec.batch_size
    H = enc.s0.shape[1]
    D = params["emb_out"].shape[1]
    pieces = _maxout_pieces(params)
    pd, gd = scope(params, "dec"), scope(g, "dec")
    W_dec = _stacked_input_weights(pd)
    rows = np.arange(B)

    d_ann = np.zeros_like(enc.annotations)
    d_proj = np.zeros_like(enc.projected)
    ds = np.zeros_like(enc.s0)
    for t in range(len(rec.steps), 0, -1):
        s_prev, alpha, c, th, e, s, prob, (x, gru_cache, r, which) = rec.steps[t - 1]
        gold, m = rec.Y[:, t], rec.ymask[:, t]

        dlogits = prob.copy()
        dlogits[rows, gold] -= 1.0
        dlogits *= (m / B)[:, None]
        g["out.W"] += dlogits.T @ r
        g["out.b"] += dlogits.sum(axis=0)
        dr = dlogits @ params["out.W"]

        dpre = np.zeros((B, pieces, dr.shape[1]), dtype=dr.dtype)
        np.put_along_axis(dpre, which[:, None, :], dr[:, None, :], axis=1)
        dpre = dpre.reshape(B, -1)
        g["readout.U_s"] += dpre.T @ s
        g["readout.V_e"] += dpre.T @ e
        g["readout.C_c"] += dpre.T @ c
        g["readout.b"] += dpre.sum(axis=0)
        ds = ds + dpre @ params["readout.U_s"]
        de = dpre @ params["readout.V_e"]
        dc = dpre @ params["readout.C_c"]

        da_z, da_r, da_h, ds_prev = _gru_recurrent_backward(pd, gd, gru_cache, ds)
        gd["W_z"] += da_z.T @ x
        gd["W_r"] += da_r.T @ x
        gd["W_h"] += da_h.T @ x
        gd["b_z"] += da_z.sum(axis=0)
        gd["b_r"] += da_r.sum(axis=0)
        gd["b_h"] += da_h.sum(axis=0)
        dx = np.concatenate([da_z, da_r, da_h], axis=1) @ W_dec
        de += dx[:, :D]
        dc += dx[:, D:]
        np.add.at(g["emb_out"], rec.Y[:, t - 1], de)

        # context = sum_j alpha_j h_j ; alpha = softmax(v . tanh(W_s s + W_h h_j))
        d_alpha = np.einsum("bk,btk->bt", dc, enc.annotations)
        d_ann += alpha[:, :, None] * dc[:, None, :]
        d_energy = alpha * (d_alpha - (alpha * d_alpha).sum(axis=1, keepdims=True))
        g["att.v"] += np.einsum("bt,bta->a", d_energy, th)
        d_th = d_energy[:, :, None] * params["att.v"] * (1.0 - th * th)
        d_proj += d_th
        dq = d_th.sum(axis=1)
        g["att.W_s"] += dq.T @ s_prev
        ds = ds_prev + dq @ params["att.W_s"]

    # s0 = tanh(W_init h_first + b_init); projected = annotations @ W_h.T
    s0 = enc.s0
    d_pre0 = ds * (1.0 - s0 * s0)
    g["dec_init.W"] += d_pre0.T @ enc.cache["h_first"]
    g["dec_init.b"] += d_pre0.sum(axis=0)
    g["att.W_h"] += np.einsum("bta,btk->ak", d_proj, enc.annotations)
    d_ann += d_proj @ params["att.W_h"]

    d_fwd, d_bwd = d_ann[..., :H], d_ann[..., H:].copy()
    d_bwd[:, 0] += d_pre0 @ params["dec_init.W"]
    dE = _direction_backward(params, g, "enc_fwd", enc, d_fwd, enc.cache["fwd"], False)
    dE += _direction_backward(params, g, "enc_bwd", enc, d_bwd, enc.cache["bwd"], True)
    np.add.at(g["emb_in"], enc.cache["X"], dE)
    return g


def _direction_backward(params, g, name, enc, d_states, caches, reverse):
    p, gp = scope(params, name), scope(g, name)
    E = enc.cache["E"]
    B, T, H = d_states.shape
    d_pre = np.zeros((B, T, 3 * H), dtype=d_states.dtype)
    carry = np.zeros((B, H), dtype=d_states.dtype)
    steps = range(T) if reverse else range(T - 1, -1, -1)
    for t in steps:
        d = d_states[:, t] + carry
        m = enc.mask[:, t, None]
        d_new = np.where(m, d, 0.0)
        da_z, da_r, da_h, dh_prev = _gru_recurrent_backward(p, gp, caches[t], d_new)
        carry = np.where(m, 0.0, d) + dh_prev
        d_pre[:, t, :H], d_pre[:, t, H:2 * H], d_pre[:, t, 2 * H:] = da_z, da_r, da_h
    for i, gate in enumerate(GATES):
        block = d_pre[..., i * H:(i + 1) * H]
        gp[f"W_{gate}"] += np.einsum("bth,btd->hd", block, E)
        gp[f"b_{gate}"] += block.sum(axis=(0, 1))
    return d_pre @ _stacked_input_weights(p)


def loss_and_grads(params, X, xmask, Y, ymask):
    rec = forward(params, X, xmask, Y, ymask)
    return rec.loss, backward(params, rec)


# --- optimisation ----------------------------------------------------------

def global_norm(grads: Mapping[str, np.ndarray]) -> float:
    return float(np.sqrt(sum(float(np.vdot(v, v)) for v in grads.values())))


def clip_by_global_norm(grads: MutableMapping[str, np.ndarray], max_norm: float) -> float:
    """Rescale ``grads`` in place so their joint norm is at most ``max_norm``.

    Returns the norm before clipping.
    """
    norm = global_norm(grads)
    if max_norm is not None and max_norm > 0 and norm > max_norm:
        scale = max_norm / norm
        for v in grads.values():
            v *= scale
    return norm


class AdadeltaState:
    """Running averages E[g^2] and E[dx^2] for every parameter."""

    def __init__(self, params: Mapping[str, np.ndarray], rho: float = 0.95, eps: float = 1e-6):
        self.rho = rho
        self.eps = eps
        self.sq_grad = zeros_like_params(params)
        self.sq_delta = zeros_like_params(params)


def adadelta_update(state: AdadeltaState, params: MutableMapping[str, np.ndarray],
                    grads: Mapping[str, np.ndarray], clip_norm: Optional[float] = None):
    """One Adadelta step, in place.  Gradients are clipped first (in place)."""
    if clip_norm is not None:
        clip_by_global_norm(grads, clip_norm)
    rho, eps = state.rho, state.eps
    for name, grad in grads.items():
        acc_g = state.sq_grad[name]
        acc_d = state.sq_delta[name]
        acc_g *= rho
        acc_g += (1.0 - rho) * grad * grad
        delta = -np.sqrt(acc_d + eps) / np.sqrt(acc_g + eps) * grad
        acc_d *= rho
        acc_d += (1.0 - rho) * delta * delta
        params[name] += delta
    return params, state


# --- checkpoints -----------------------------------------------------------

CHECKPOINT_MAGIC = "medpoet-params"
CHECKPOINT_VERSION = 1


def save_checkpoint(params: Mapping[str, np.ndarray], path) -> None:
    """Write parameters to an ``.npz`` container (bit-exact round trip)."""
    arrays = {f"p:{k}": np.ascontiguousarray(v) for k, v in params.items()}
    arrays["__magic__"] = np.array(CHECKPOINT_MAGIC)
    arrays["__version__"] = np.array(CHECKPOINT_VERSION)
    with open(path, "wb") as f:
        np.savez(f, **arrays)


def load_checkpoint(path) -> Params:
    try:
        data = np.load(path, allow_pickle=False)
    except (OSError, ValueError) as e:
        raise ValueError(f"{path}: not a parameter checkpoint ({e})") from None
    with data:
        if "__magic__" not in data.files or str(data["__magic__"]) != CHECKPOINT_MAGIC:
            raise ValueError(f"{path}: bad checkpoint magic")
        version = int(data["__version__"])
        if version != CHECKPOINT_VERSION:
            raise ValueError(f"{path}: unsupported checkpoint version {version}")
        return {k[2:]: data[k].copy() for k in data.files if k.startswith("p:")}
