"""Local stream: interactive attention and pairwise relevance indicators.

Raw scores are plain dot products between region and word encodings.
Each side attends over the other: A_t2v weights words for every region,
A_v2t weights regions for every word. Attended features are compared to
the originals row by row with cosine similarity, and the two indicator
sequences concatenate into the local representation r_l = [t_bar ++ v_bar].

``axis="attended"`` (default) normalizes each attention row over the
attended dimension, making the attended features convex combinations.
``axis="paper_literal"`` normalizes over the first index of the score
matrix instead, kept for fidelity with the formula this follows.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import tensor as tc
from .tensor import Tensor

ATTENTION_AXES = ("attended", "paper_literal")


@dataclass
class AlignmentState:
    S_vt: Tensor    # (K, N) raw scores
    A_t2v: Tensor   # (K, N)
    A_v2t: Tensor   # (N, K)
    V_hat: Tensor   # (K, d) text-guided visual attention features
    T_hat: Tensor   # (N, d) image-guided textual attention features
    v_bar: Tensor   # (K,)
    t_bar: Tensor   # (N,)
    r_l: Tensor     # (K + N,)

    @property
    def K(self) -> int:
        return self.S_vt.shape[0]

    @property
    def N(self) -> int:
        return self.S_vt.shape[1]


def similarity_scores(v: Tensor, t: Tensor) -> Tensor:
    """S[i, j] = V_i . T_j for every region i and word j."""
    if v.shape[1] != t.shape[1]:
        raise tc.ShapeError(
            f"region and word encodings disagree on d: {v.shape} vs {t.shape}"
        )
    return tc.matmul(v, tc.transpose(t))


def interactive_attention(v: Tensor, t: Tensor, axis: str = "attended"):
    """Bidirectional attention; returns (A_t2v, A_v2t, V_hat, T_hat)."""
    if axis not in ATTENTION_AXES:
        raise ValueError(f"axis must be one of {ATTENTION_AXES}, got {axis!r}")
    s = similarity_scores(v, t)
    s_t = tc.transpose(s)
    if axis == "attended":
        a_t2v = tc.rowwise_softmax(s)
        a_v2t = tc.rowwise_softmax(s_t)
    else:
        # literal reading: normalize over the first index of the score matrix
        a_t2v = tc.transpose(tc.rowwise_softmax(s_t))
        a_v2t = tc.transpose(tc.rowwise_softmax(s))
    v_hat = tc.matmul(a_t2v, t)
    t_hat = tc.matmul(a_v2t, v)
    return a_t2v, a_v2t, v_hat, t_hat


def pairwise_comparison(x: Tensor, x_hat: Tensor) -> Tensor:
    """Cosine between each original row and its attended counterpart."""
    return tc.rowwise_cosine(x, x_hat)


def build_local(t_bar: Tensor, v_bar: Tensor) -> Tensor:
    """r_l = [t_bar ++ v_bar], length N + K."""
    return tc.concat([t_bar, v_bar])


def align_pair(v: Tensor, t: Tensor, axis: str = "attended") -> AlignmentState:
    s = similarity_scores(v, t)
    a_t2v, a_v2t, v_hat, t_hat = interactive_attention(v, t, axis=axis)
    v_bar = pairwise_comparison(v, v_hat)
    t_bar = pairwise_comparison(t, t_hat)
    return AlignmentState(
        S_vt=s, A_t2v=a_t2v, A_v2t=a_v2t, V_hat=v_hat, T_hat=t_hat,
        v_bar=v_bar, t_bar=t_bar, r_l=build_local(t_bar, v_bar),
    )


def export_attention(state: AlignmentState, pair_id: str) -> dict:
    """JSON-ready attention dump; ties in the per-word argmax break low."""
    a_t2v = state.A_t2v.data
    a_v2t = state.A_v2t.data
    return {
        "id": pair_id,
        "K": state.K,
        "N": state.N,
        "A_t2v": [float(x) for x in a_t2v.reshape(-1)],
        "A_v2t": [float(x) for x in a_v2t.reshape(-1)],
        "argmax_region_per_word": [int(i) for i in np.argmax(a_v2t, axis=1)],
    }
