"""Finite-difference suite over every differentiable op and the whole loss.

Each case builds small random inputs, wraps one op (or a short chain
ending in a scalar) and compares tape gradients against central
differences. Matrix-valued ops are reduced by a fixed random weighting so
no coordinate's gradient can hide behind a symmetric cancellation. All
randomness is frozen before the closures run; a case's closure must
return the same value for the same parameter data.
"""

from __future__ import annotations

import numpy as np

from . import tensor as tc
from .config import RunConfig
from .data import SynthConfig, synthesize_pair
from .gradcheck import GradCheckReport, finite_diff_check
from .model import Model
from .tensor import Tensor

GRADCHECK_TOL = 1e-4


def _leaf(rng, *shape, away_from_zero=False):
    data = rng.standard_normal(shape) if shape else rng.standard_normal()
    if away_from_zero:
        data = np.sign(data) * (np.abs(data) + 0.5)
    return Tensor(data, requires_grad=True)


def _reduce_with(weights: Tensor):
    def reducer(t: Tensor) -> Tensor:
        return tc.tensor_sum(tc.mul(weights, t))
    return reducer


def _op_cases(rng):
    a = _leaf(rng, 4, 3)
    b = _leaf(rng, 4, 3)
    u = _leaf(rng, 5)
    v = _leaf(rng, 5)
    m = _leaf(rng, 3, 4)
    n = _leaf(rng, 4, 2)
    relu_in = _leaf(rng, 4, 3, away_from_zero=True)
    logits = _leaf(rng, 3)

    w43 = _reduce_with(Tensor(rng.standard_normal((4, 3))))
    w34 = _reduce_with(Tensor(rng.standard_normal((3, 4))))
    w32 = _reduce_with(Tensor(rng.standard_normal((3, 2))))
    w25 = _reduce_with(Tensor(rng.standard_normal((2, 5))))
    w42 = _reduce_with(Tensor(rng.standard_normal((4, 2))))
    w3 = _reduce_with(Tensor(rng.standard_normal(3)))
    w2 = _reduce_with(Tensor(rng.standard_normal(2)))
    w4 = _reduce_with(Tensor(rng.standard_normal(4)))
    w10 = _reduce_with(Tensor(rng.standard_normal(10)))
    vec4 = Tensor(rng.standard_normal(4))

    return [
        ("add", [a, b], lambda: w43(tc.add(a, b))),
        ("sub", [a, b], lambda: w43(tc.sub(a, b))),
        ("neg", [a], lambda: w43(tc.neg(a))),
        ("mul", [a, b], lambda: w43(tc.mul(a, b))),
        ("relu", [relu_in], lambda: w43(tc.relu(relu_in))),
        ("sigmoid", [a], lambda: w43(tc.sigmoid(a))),
        ("tanh", [a], lambda: w43(tc.tanh(a))),
        ("exp", [a], lambda: w43(tc.exp(a))),
        ("matmul_mat_mat", [m, n], lambda: w32(tc.matmul(m, n))),
        ("matmul_mat_vec", [m], lambda: w3(tc.matmul(m, vec4))),
        ("matmul_vec_mat", [n], lambda: w2(tc.matmul(vec4, n))),
        ("matmul_vec_vec", [u, v], lambda: tc.matmul(u, v)),
        ("transpose", [m], lambda: w43(tc.transpose(m))),
        ("tensor_sum", [a], lambda: tc.tensor_sum(a)),
        ("mean_rows", [a], lambda: w3(tc.mean_rows(a))),
        ("concat", [u, v], lambda: w10(tc.concat([u, v]))),
        ("stack_rows", [u, v], lambda: w25(tc.stack_rows([u, v]))),
        ("row", [a], lambda: w3(tc.row(a, 1))),
        ("narrow", [u], lambda: w3(tc.narrow(u, 1, 4))),
        ("rowwise_softmax", [a], lambda: w43(tc.rowwise_softmax(a))),
        ("fro_norm", [a], lambda: tc.fro_norm(a)),
        ("cosine", [u, v], lambda: tc.cosine(u, v)),
        ("rowwise_cosine", [a, b], lambda: w4(tc.rowwise_cosine(a, b))),
        ("cross_entropy_logits", [logits], lambda: tc.cross_entropy_logits(logits, 1)),
        _gru_case(rng),
    ]


def _gru_case(rng):
    d = 4
    xz = _leaf(rng, 3, d)
    xr = _leaf(rng, 3, d)
    xh = _leaf(rng, 3, d)
    h0 = _leaf(rng, d)
    uz = _leaf(rng, d, d)
    ur = _leaf(rng, d, d)
    uh = _leaf(rng, d, d)
    wd = _reduce_with(Tensor(rng.standard_normal(d)))

    def f():
        # two chained steps so the recurrent path into h is exercised too
        h1 = tc.gru_step(xz, xr, xh, 0, h0, uz, ur, uh)
        h2 = tc.gru_step(xz, xr, xh, 2, h1, uz, ur, uh)
        return wd(h2)

    return "gru_step", [xz, xr, xh, h0, uz, ur, uh], f


def _toy_model_case():
    """Every parameter of a tiny end-to-end model against the full loss.

    N_max exceeds the record's N so the padded local-stream path is the
    one being differentiated, as in real variable-length batches.
    """
    cfg = RunConfig(d=8, d_r=10, d_G=6, d_B=7, d_inv=2, d_var=2,
                    K=3, N_max=6, seed=5)
    model = Model(cfg)
    record = synthesize_pair(
        SynthConfig(n_per_class=(1, 1, 1), K=3, N=4, d_r=10, d_G=6, d_B=7, seed=5),
        "train", 0, 1)
    params = [p for _, p in model.parameters()]

    def f():
        return model.forward(record).losses.L

    return "full_model_loss", params, f


def run_gradcheck_suite(seed: int = 0, eps: float = 1e-5):
    """All per-op checks plus the end-to-end model check, as reports."""
    rng = np.random.default_rng(seed)
    reports = []
    for name, params, f in _op_cases(rng):
        reports.append(finite_diff_check(f, params, eps=eps, op_name=name))
    name, params, f = _toy_model_case()
    reports.append(finite_diff_check(f, params, eps=eps, op_name=name))
    return reports


def suite_passed(reports, tol: float = GRADCHECK_TOL) -> bool:
    return all(r.ok(tol) for r in reports)


def format_report(report: GradCheckReport, tol: float = GRADCHECK_TOL) -> str:
    status = "ok" if report.ok(tol) else "FAIL"
    return (f"{status:4s} {report.op_name:22s} "
            f"max_rel_err={report.max_relative_error:.3e} "
            f"worst={report.worst_coordinate}")
