"""Late fusion of the two streams' class scores and the training objective."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import tensor as tc
from .tensor import Tensor

N_CLASSES = 3

DEFAULT_LAMBDA = 0.7
DEFAULT_ETA = 1.3
DEFAULT_ALPHA = 0.1
DEFAULT_BETA = 2.0


@dataclass
class FusionParams:
    w_g: Tensor  # (3, len(r_g))
    b_g: Tensor  # (3,)
    w_l: Tensor  # (3, K + N_max)
    b_l: Tensor  # (3,)
    lam: float = DEFAULT_LAMBDA
    eta: float = DEFAULT_ETA


@dataclass
class Prediction:
    logits: Tensor       # (3,), on the tape
    y_hat: np.ndarray    # (3,) softmax probabilities, detached
    predicted: int


@dataclass
class LossBundle:
    L_c: Tensor
    L_i: Tensor
    L_o: Tensor
    L: Tensor
    alpha: float = DEFAULT_ALPHA
    beta: float = DEFAULT_BETA


def init_fusion_params(len_rg: int, len_rl: int, rng,
                       lam: float = DEFAULT_LAMBDA, eta: float = DEFAULT_ETA) -> FusionParams:
    def head(cols):
        bound = 1.0 / np.sqrt(cols)
        return (Tensor(rng.uniform(-bound, bound, size=(N_CLASSES, cols)), requires_grad=True),
                Tensor(np.zeros(N_CLASSES), requires_grad=True))

    w_g, b_g = head(len_rg)
    w_l, b_l = head(len_rl)
    return FusionParams(w_g=w_g, b_g=b_g, w_l=w_l, b_l=b_l, lam=lam, eta=eta)


def _softmax(z: np.ndarray) -> np.ndarray:
    e = np.exp(z - z.max())
    return e / e.sum()


def stream_logits(w: Tensor, r: Tensor, b: Tensor) -> Tensor:
    if w.shape[1] != r.shape[0]:
        raise tc.ShapeError(
            f"representation length {r.shape[0]} does not match head {w.shape}"
        )
    return tc.add(tc.matmul(w, r), b)


def late_fusion(r_g: Tensor, r_l: Tensor, params: FusionParams) -> Prediction:
    """logits = lam * (w_g r_g + b_g) + eta * (w_l r_l + b_l)."""
    logits = tc.add(
        params.lam * stream_logits(params.w_g, r_g, params.b_g),
        params.eta * stream_logits(params.w_l, r_l, params.b_l),
    )
    return prediction_from_logits(logits)


def prediction_from_logits(logits: Tensor) -> Prediction:
    y_hat = _softmax(logits.data)
    return Prediction(logits=logits, y_hat=y_hat, predicted=int(np.argmax(y_hat)))


def classification_loss(y_hat, y: int):
    """Cross entropy -log y_hat[y].

    Given a Prediction, the loss is computed from its logits via
    log-sum-exp (numerically exact, never from clipped probabilities) and
    stays on the tape. Given an explicit probability vector, the literal
    formula is applied and the result is a constant.
    """
    if not 0 <= y < N_CLASSES:
        raise ValueError(f"label {y} out of range for {N_CLASSES} classes")
    if isinstance(y_hat, Prediction):
        return tc.cross_entropy_logits(y_hat.logits, y)
    probs = np.asarray(y_hat, dtype=np.float64)
    if probs[y] <= 0.0:
        raise ValueError(f"probability of the true class is {probs[y]}, cannot take log")
    return Tensor(-np.log(probs[y]))


def total_loss(l_c, l_i, l_o, alpha: float = DEFAULT_ALPHA, beta: float = DEFAULT_BETA) -> Tensor:
    """L = L_c + alpha * L_i + beta * L_o."""
    return tc.add(tc.add(l_c, alpha * l_i), beta * l_o)


def loss_bundle(l_c: Tensor, l_i: Tensor, l_o: Tensor,
                alpha: float = DEFAULT_ALPHA, beta: float = DEFAULT_BETA) -> LossBundle:
    return LossBundle(L_c=l_c, L_i=l_i, L_o=l_o,
                      L=total_loss(l_c, l_i, l_o, alpha, beta),
                      alpha=alpha, beta=beta)
