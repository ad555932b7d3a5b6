"""A walk through the reverse-mode tape that everything else runs on.

Build small tensors, run ops forward, pull gradients back, and compare
one of them against central finite differences.
"""

import numpy as np

from ananet import tensor as tc
from ananet.gradcheck import finite_diff_check
from ananet.tensor import Tensor

# --- forward ops -----------------------------------------------------------
# Tensors wrap float64 numpy arrays. requires_grad opts a leaf into the tape.
x = Tensor(np.array([[1.0, 2.0], [3.0, 4.0]]), requires_grad=True)
w = Tensor(np.array([[0.5, -1.0], [2.0, 0.0]]), requires_grad=True)

y = tc.matmul(x, w)
print("x @ w =\n", y.data)

p = tc.rowwise_softmax(y)
print("rowwise softmax (each row sums to 1):\n", p.data, p.data.sum(axis=1))

# --- backward --------------------------------------------------------------
# backward() runs on scalars only, so reduce first. Gradients accumulate
# into .grad on every requires_grad leaf that contributed.
loss = tc.tensor_sum(tc.mul(y, y))
loss.backward()
print("\nloss = sum((x@w)^2) =", loss.item())
print("dloss/dx =\n", x.grad)
print("dloss/dw =\n", w.grad)

# the analytic answer for dloss/dx is 2 (x@w) w^T
print("analytic    \n", 2.0 * y.data @ w.data.T)

# --- finite differences ----------------------------------------------------
# The same checker the test suite uses: central differences, relative error
# against the tape's gradient, worst coordinate reported.
x.zero_grad()
w.zero_grad()
report = finite_diff_check(lambda: tc.tensor_sum(tc.mul(tc.matmul(x, w),
                                                        tc.matmul(x, w))),
                           [x, w], op_name="matmul_square")
print(f"\nfinite-diff check: max rel err {report.max_relative_error:.2e} "
      f"at {report.worst_coordinate}")

# --- no_grad ---------------------------------------------------------------
# Inside no_grad() nothing is taped, which is how evaluation runs.
with tc.no_grad():
    silent = tc.matmul(x, w)
print("\nunder no_grad, results carry no parents:", silent._parents == ())
