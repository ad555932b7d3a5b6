"""Single-modality encoders: projected-ReLU image regions, BiGRU text.

Image regions (K x d_r) pass through one fully-connected ReLU layer to
give V (K x d). Tokens concatenate their word vector (d_G) and contextual
vector (d_B) and run through a bidirectional gated recurrent layer with
hidden size d/2 per direction; forward and backward states concatenate to
give T (N x d). Pooled features are plain row means.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import tensor as tc
from .tensor import Tensor

DEFAULT_N_MAX = 100

GRU_FIELDS = ("W_z", "U_z", "b_z", "W_r", "U_r", "b_r", "W_h", "U_h", "b_h")


@dataclass
class GruCellParams:
    """One direction's gate parameters; W_*: (h, in), U_*: (h, h), b_*: (h,)."""
    W_z: Tensor
    U_z: Tensor
    b_z: Tensor
    W_r: Tensor
    U_r: Tensor
    b_r: Tensor
    W_h: Tensor
    U_h: Tensor
    b_h: Tensor


@dataclass
class EncoderParams:
    w_v: Tensor  # (d, d_r)
    b_v: Tensor  # (d,)
    fwd: GruCellParams
    bwd: GruCellParams

    @property
    def d(self) -> int:
        return self.w_v.shape[0]


@dataclass
class ModalState:
    V: Tensor        # (K, d)
    T: Tensor        # (N, d)
    f_image: Tensor  # (d,)
    f_text: Tensor   # (d,)


def _uniform(rng, shape, fan_in):
    bound = 1.0 / np.sqrt(fan_in)
    return Tensor(rng.uniform(-bound, bound, size=shape), requires_grad=True)


def _init_gru_cell(rng, input_dim: int, hidden: int) -> GruCellParams:
    kwargs = {}
    for gate in ("z", "r", "h"):
        kwargs[f"W_{gate}"] = _uniform(rng, (hidden, input_dim), input_dim)
        kwargs[f"U_{gate}"] = _uniform(rng, (hidden, hidden), hidden)
        kwargs[f"b_{gate}"] = Tensor(np.zeros(hidden), requires_grad=True)
    return GruCellParams(**kwargs)


def init_encoder_params(d: int, d_r: int, d_G: int, d_B: int, rng) -> EncoderParams:
    if d % 2 != 0:
        raise ValueError(f"d must be even for bidirectional halves, got {d}")
    hidden = d // 2
    return EncoderParams(
        w_v=_uniform(rng, (d, d_r), d_r),
        b_v=Tensor(np.zeros(d), requires_grad=True),
        fwd=_init_gru_cell(rng, d_G + d_B, hidden),
        bwd=_init_gru_cell(rng, d_G + d_B, hidden),
    )


def encode_image(region_feats, params: EncoderParams) -> Tensor:
    """V = relu(region_feats . w_v^T + b_v), rows are encoded regions."""
    x = region_feats if isinstance(region_feats, Tensor) else Tensor(region_feats)
    if x.shape[1] != params.w_v.shape[1]:
        raise tc.ShapeError(
            f"region features have d_r={x.shape[1]} but w_v expects {params.w_v.shape[1]}"
        )
    return tc.relu(tc.add(tc.matmul(x, tc.transpose(params.w_v)), params.b_v))


def _gru_direction(x_seq: Tensor, cell: GruCellParams, order, fused: bool = True) -> list:
    """Run one direction over the token sequence; returns states by position.

    The input projections for all tokens are batched into three matmuls;
    only the recurrent part runs token by token, normally through the
    fused gru_step kernel. fused=False composes the update from primitive
    ops instead; both paths must agree (tested), the composed one exists
    as the readable reference.
    """
    hidden = cell.U_z.shape[0]
    xz_all = tc.add(tc.matmul(x_seq, tc.transpose(cell.W_z)), cell.b_z)
    xr_all = tc.add(tc.matmul(x_seq, tc.transpose(cell.W_r)), cell.b_r)
    xh_all = tc.add(tc.matmul(x_seq, tc.transpose(cell.W_h)), cell.b_h)
    h = Tensor(np.zeros(hidden))
    states = [None] * x_seq.shape[0]
    for j in order:
        if fused:
            h = tc.gru_step(xz_all, xr_all, xh_all, j, h, cell.U_z, cell.U_r, cell.U_h)
        else:
            z = tc.sigmoid(tc.add(tc.row(xz_all, j), tc.matmul(cell.U_z, h)))
            r = tc.sigmoid(tc.add(tc.row(xr_all, j), tc.matmul(cell.U_r, h)))
            cand = tc.tanh(tc.add(tc.row(xh_all, j), tc.matmul(cell.U_h, tc.mul(r, h))))
            # (1 - z) * h + z * cand, written to reuse nodes
            h = tc.add(h, tc.mul(z, tc.sub(cand, h)))
        states[j] = h
    return states


def encode_text(word_vecs, ctx_vecs, params: EncoderParams,
                n_max: int = DEFAULT_N_MAX, fused: bool = True) -> Tensor:
    """T_j = [forward state ++ backward state] over x_j = [word_j ++ ctx_j]."""
    words = np.asarray(word_vecs, dtype=np.float64)
    ctx = np.asarray(ctx_vecs, dtype=np.float64)
    if words.shape[0] == 0:
        raise ValueError("empty token sequence")
    if words.shape[0] != ctx.shape[0]:
        raise tc.ShapeError(
            f"word rows {words.shape[0]} != ctx rows {ctx.shape[0]}"
        )
    if words.shape[0] > n_max:
        words = words[:n_max]
        ctx = ctx[:n_max]
    x_seq = Tensor(np.concatenate([words, ctx], axis=1))
    n = x_seq.shape[0]
    fwd_states = _gru_direction(x_seq, params.fwd, range(n), fused=fused)
    bwd_states = _gru_direction(x_seq, params.bwd, range(n - 1, -1, -1), fused=fused)
    rows = [tc.concat([fwd_states[j], bwd_states[j]]) for j in range(n)]
    return tc.stack_rows(rows)


def mean_pool(s: Tensor) -> Tensor:
    """Arithmetic mean over rows of an (L, d) sequence."""
    if s.ndim != 2:
        raise tc.ShapeError(f"mean_pool needs a matrix, got shape {s.shape}")
    return tc.mean_rows(s)


def encode_pair(record, params: EncoderParams, n_max: int = DEFAULT_N_MAX) -> ModalState:
    v = encode_image(record.region_feats, params)
    t = encode_text(record.word_vecs, record.ctx_vecs, params, n_max=n_max)
    return ModalState(V=v, T=t, f_image=mean_pool(v), f_text=mean_pool(t))
