"""Central-difference verification of the tape's analytic gradients."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tensor import Tensor

REL_ERR_FLOOR = 1e-8  # denominator floor so zero gradients compare cleanly


@dataclass
class GradCheckReport:
    op_name: str
    max_relative_error: float
    worst_coordinate: tuple
    epsilon: float

    def ok(self, tol: float = 1e-4) -> bool:
        return self.max_relative_error <= tol


def finite_diff_check(f, params, eps: float = 1e-5, op_name: str = "fn") -> GradCheckReport:
    """Compare the tape gradient of ``f()`` against central differences.

    ``f`` is a no-argument callable returning a scalar Tensor built from
    ``params`` (a list of requires_grad tensors). Each coordinate is
    perturbed by +-eps and the relative error uses the denominator
    max(|analytic|, |numeric|, 1e-8).
    """
    if eps <= 0:
        raise ValueError(f"eps must be > 0, got {eps}")
    params = list(params)
    for p in params:
        p.zero_grad()
    loss = f()
    if not isinstance(loss, Tensor) or loss.data.ndim != 0:
        raise ValueError("f() must return a scalar Tensor")
    loss.backward()
    analytic = [p.grad.copy() for p in params]

    worst_err = 0.0
    worst_coord: tuple = ()
    for pi, p in enumerate(params):
        flat = p.data.reshape(-1)
        for ci in range(flat.shape[0]):
            saved = flat[ci]
            flat[ci] = saved + eps
            f_plus = f().item()
            flat[ci] = saved - eps
            f_minus = f().item()
            flat[ci] = saved
            numeric = (f_plus - f_minus) / (2.0 * eps)
            a = analytic[pi].reshape(-1)[ci]
            err = abs(a - numeric) / max(abs(a), abs(numeric), REL_ERR_FLOOR)
            if err > worst_err:
                worst_err = err
                worst_coord = (pi,) + np.unravel_index(ci, p.data.shape)
    return GradCheckReport(op_name, worst_err, worst_coord, eps)
