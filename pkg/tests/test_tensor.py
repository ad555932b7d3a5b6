"""Tensor op oracles: hand-computed values, algebraic properties, backward."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

import ananet.tensor as tc
from ananet.tensor import ShapeError, Tensor, no_grad


# ---------------------------------------------------------------------------
# matmul

def test_matmul_identity():
    a = Tensor(np.eye(2))
    b = Tensor([[3.0, 4.0], [5.0, 6.0]])
    assert_allclose(tc.matmul(a, b).data, [[3, 4], [5, 6]])


def test_matmul_hand_product():
    a = Tensor([[1.0, 2.0], [3.0, 4.0]])
    b = Tensor([[0.0, 1.0], [1.0, 0.0]])
    assert_allclose(tc.matmul(a, b).data, [[2, 1], [4, 3]])


def test_matmul_zero_annihilates():
    a = Tensor(np.zeros((2, 2)))
    b = Tensor([[7.0, -1.0], [2.0, 9.0]])
    assert_allclose(tc.matmul(a, b).data, np.zeros((2, 2)))


def test_matmul_shape_error_names_both_shapes():
    with pytest.raises(ShapeError) as exc:
        tc.matmul(Tensor(np.ones((2, 3))), Tensor(np.ones((4, 2))))
    assert "(2, 3)" in str(exc.value) and "(4, 2)" in str(exc.value)


def test_matmul_associative_on_random_triples(rng):
    for _ in range(100):
        a, b, c = (rng.standard_normal((4, 4)) for _ in range(3))
        left = tc.matmul(tc.matmul(Tensor(a), Tensor(b)), Tensor(c)).data
        right = tc.matmul(Tensor(a), tc.matmul(Tensor(b), Tensor(c))).data
        assert_allclose(left, right, atol=1e-9)


def test_matmul_gradients_both_inputs():
    a = Tensor([[1.0, 2.0], [3.0, 4.0]], requires_grad=True)
    b = Tensor([[5.0, 6.0], [7.0, 8.0]], requires_grad=True)
    tc.tensor_sum(tc.matmul(a, b)).backward()
    # d sum(AB) / dA = 1 . B^T, / dB = A^T . 1
    assert_allclose(a.grad, np.ones((2, 2)) @ b.data.T)
    assert_allclose(b.grad, a.data.T @ np.ones((2, 2)))


# ---------------------------------------------------------------------------
# softmax

def test_softmax_uniform_scores():
    out = tc.rowwise_softmax(Tensor(np.zeros((2, 2))))
    assert_allclose(out.data, np.full((2, 2), 0.5))


def test_softmax_ln2_row():
    out = tc.rowwise_softmax(Tensor([[math.log(2.0), 0.0]]))
    assert_allclose(out.data, [[2.0 / 3.0, 1.0 / 3.0]], atol=1e-12)


def test_softmax_shift_invariance(rng):
    for _ in range(100):
        s = rng.standard_normal((3, 5))
        c = rng.standard_normal((3, 1))
        base = tc.rowwise_softmax(Tensor(s)).data
        shifted = tc.rowwise_softmax(Tensor(s + c)).data
        assert_allclose(shifted, base, atol=1e-9)


def test_softmax_rows_sum_to_one(rng):
    for _ in range(100):
        s = rng.standard_normal((4, 6)) * rng.uniform(0.1, 5.0)
        out = tc.rowwise_softmax(Tensor(s)).data
        assert_allclose(out.sum(axis=1), np.ones(4), atol=1e-9)
        assert np.all(out > 0.0) and np.all(out < 1.0)


def test_softmax_survives_huge_scores():
    out = tc.rowwise_softmax(Tensor([[1e9, 0.0, -1e9]]))
    assert np.all(np.isfinite(out.data))
    assert_allclose(out.data.sum(), 1.0)


# ---------------------------------------------------------------------------
# cosine

def test_cosine_identical_unit_vectors():
    u = Tensor([1.0, 0.0])
    assert tc.cosine(u, u).item() == pytest.approx(1.0, abs=1e-8)


def test_cosine_orthogonal():
    assert tc.cosine(Tensor([1.0, 0.0]), Tensor([0.0, 1.0])).item() == 0.0


def test_cosine_hand_value():
    got = tc.cosine(Tensor([1.0, 1.0]), Tensor([1.0, 0.0])).item()
    assert got == pytest.approx(0.70710678, abs=1e-6)


def test_cosine_zero_vector_maps_to_zero():
    assert tc.cosine(Tensor([0.0, 0.0]), Tensor([3.0, 4.0])).item() == 0.0


def test_cosine_symmetric_and_bounded(rng):
    for _ in range(200):
        u = Tensor(rng.standard_normal(5))
        v = Tensor(rng.standard_normal(5))
        a = tc.cosine(u, v).item()
        b = tc.cosine(v, u).item()
        assert a == b
        assert abs(a) <= 1.0 + 1e-9


def test_rowwise_cosine_matches_per_row(rng):
    x = rng.standard_normal((4, 3))
    y = rng.standard_normal((4, 3))
    out = tc.rowwise_cosine(Tensor(x), Tensor(y)).data
    for i in range(4):
        want = tc.cosine(Tensor(x[i]), Tensor(y[i])).item()
        assert out[i] == pytest.approx(want, abs=1e-12)


# ---------------------------------------------------------------------------
# backward and the tape

def test_backward_sum_gives_ones():
    x = Tensor([1.0, 5.0, -2.0], requires_grad=True)
    tc.tensor_sum(x).backward()
    assert_allclose(x.grad, [1.0, 1.0, 1.0])


def test_backward_squared_norm():
    x = Tensor([1.0, 2.0], requires_grad=True)
    tc.tensor_sum(tc.mul(x, x)).backward()
    assert_allclose(x.grad, [2.0, 4.0])


def test_backward_constant_loss_leaves_grads_zero():
    x = Tensor([1.0, 2.0], requires_grad=True)
    loss = tc.tensor_sum(Tensor([3.0]))  # no path to x
    loss.backward()
    assert_allclose(x.grad, [0.0, 0.0])


def test_backward_rejects_non_scalar():
    x = Tensor([1.0, 2.0], requires_grad=True)
    with pytest.raises(ShapeError):
        tc.mul(x, x).backward()


def test_backward_accumulates_across_uses():
    x = Tensor([2.0], requires_grad=True)
    tc.tensor_sum(tc.add(x, x)).backward()
    assert_allclose(x.grad, [2.0])


def test_backward_broadcast_bias():
    b = Tensor([1.0, -1.0], requires_grad=True)
    m = Tensor(np.ones((3, 2)))
    tc.tensor_sum(tc.add(m, b)).backward()
    # the bias was broadcast over 3 rows
    assert_allclose(b.grad, [3.0, 3.0])


def test_backward_deep_chain_no_recursion_limit():
    x = Tensor([0.5], requires_grad=True)
    y = x
    for _ in range(3000):
        y = tc.add(y, Tensor([0.001]))
    tc.tensor_sum(y).backward()
    assert_allclose(x.grad, [1.0])


def test_backward_diamond_graph_counts_both_paths():
    x = Tensor([3.0], requires_grad=True)
    a = tc.mul(x, Tensor([2.0]))
    b = tc.mul(x, Tensor([5.0]))
    tc.tensor_sum(tc.add(a, b)).backward()
    assert_allclose(x.grad, [7.0])


def test_no_grad_suppresses_tape():
    x = Tensor([1.0], requires_grad=True)
    with no_grad():
        y = tc.mul(x, x)
    assert y.requires_grad is False and y._parents == ()


def test_ops_reject_rank_above_three():
    with pytest.raises(ShapeError):
        Tensor(np.zeros((2, 2, 2, 2)))


def test_check_finite_flags_nan():
    t = Tensor([1.0, float("nan")])
    with pytest.raises(ValueError):
        t.check_finite()


# ---------------------------------------------------------------------------
# structural ops

def test_transpose_roundtrip_and_grad():
    a = Tensor([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]], requires_grad=True)
    t = tc.transpose(a)
    assert t.shape == (3, 2)
    tc.tensor_sum(tc.mul(t, t)).backward()
    assert_allclose(a.grad, 2.0 * a.data)


def test_mean_rows_hand():
    out = tc.mean_rows(Tensor([[1.0, 2.0], [3.0, 4.0]]))
    assert_allclose(out.data, [2.0, 3.0])


def test_concat_order_and_grad():
    a = Tensor([1.0, 2.0], requires_grad=True)
    b = Tensor([3.0], requires_grad=True)
    out = tc.concat([a, b])
    assert_allclose(out.data, [1.0, 2.0, 3.0])
    tc.tensor_sum(tc.mul(out, Tensor([1.0, 10.0, 100.0]))).backward()
    assert_allclose(a.grad, [1.0, 10.0])
    assert_allclose(b.grad, [100.0])


def test_stack_rows_and_row_slice_grads():
    r0 = Tensor([1.0, 2.0], requires_grad=True)
    r1 = Tensor([3.0, 4.0], requires_grad=True)
    m = tc.stack_rows([r0, r1])
    assert m.shape == (2, 2)
    picked = tc.row(m, 1)
    tc.tensor_sum(picked).backward()
    assert_allclose(r0.grad, [0.0, 0.0])
    assert_allclose(r1.grad, [1.0, 1.0])


def test_narrow_grad_scatters_back():
    x = Tensor([1.0, 2.0, 3.0, 4.0], requires_grad=True)
    tc.tensor_sum(tc.narrow(x, 1, 3)).backward()
    assert_allclose(x.grad, [0.0, 1.0, 1.0, 0.0])


def test_fro_norm_hand():
    m = Tensor([[3.0, 0.0], [0.0, 4.0]])
    assert tc.fro_norm(m).item() == pytest.approx(5.0, abs=1e-12)


# ---------------------------------------------------------------------------
# cross entropy from logits

def test_cross_entropy_uniform_logits():
    loss = tc.cross_entropy_logits(Tensor([0.0, 0.0, 0.0]), 1)
    assert loss.item() == pytest.approx(math.log(3.0), abs=1e-12)


def test_cross_entropy_matches_log_softmax(rng):
    for _ in range(50):
        z = rng.standard_normal(3)
        y = int(rng.integers(3))
        want = -(z[y] - np.log(np.exp(z).sum()))
        got = tc.cross_entropy_logits(Tensor(z), y).item()
        assert got == pytest.approx(want, abs=1e-10)


def test_cross_entropy_gradient_is_probs_minus_onehot():
    z = Tensor([0.1, -0.2, 0.3], requires_grad=True)
    tc.cross_entropy_logits(z, 2).backward()
    p = np.exp(z.data) / np.exp(z.data).sum()
    want = p.copy()
    want[2] -= 1.0
    assert_allclose(z.grad, want, atol=1e-12)


# ---------------------------------------------------------------------------
# fused recurrent step vs the composed reference

def _random_gru_inputs(rng, n=3, din=4, hidden=3):
    x = rng.standard_normal((n, din))
    mk = lambda *s: Tensor(rng.standard_normal(s) * 0.5, requires_grad=True)
    return (Tensor(x), mk(hidden, din), mk(hidden, din), mk(hidden, din),
            mk(hidden), mk(hidden), mk(hidden),
            mk(hidden, hidden), mk(hidden, hidden), mk(hidden, hidden))


def _run_chain(params, fused):
    (x, wz, wr, wh, bz, br, bh, uz, ur, uh) = params
    xz = tc.add(tc.matmul(x, tc.transpose(wz)), bz)
    xr = tc.add(tc.matmul(x, tc.transpose(wr)), br)
    xh = tc.add(tc.matmul(x, tc.transpose(wh)), bh)
    h = Tensor(np.zeros(uz.shape[0]))
    for j in range(x.shape[0]):
        if fused:
            h = tc.gru_step(xz, xr, xh, j, h, uz, ur, uh)
        else:
            z = tc.sigmoid(tc.add(tc.row(xz, j), tc.matmul(uz, h)))
            r = tc.sigmoid(tc.add(tc.row(xr, j), tc.matmul(ur, h)))
            cand = tc.tanh(tc.add(tc.row(xh, j), tc.matmul(uh, tc.mul(r, h))))
            h = tc.add(h, tc.mul(z, tc.sub(cand, h)))
    return h


def test_gru_step_fused_matches_composed_forward_and_grads(rng):
    raw = np.random.default_rng(7)
    params_a = _random_gru_inputs(raw)
    raw = np.random.default_rng(7)
    params_b = _random_gru_inputs(raw)

    ha = _run_chain(params_a, fused=True)
    hb = _run_chain(params_b, fused=False)
    assert_allclose(ha.data, hb.data, atol=1e-12)

    tc.tensor_sum(ha).backward()
    tc.tensor_sum(hb).backward()
    for pa, pb in zip(params_a[1:], params_b[1:]):
        assert_allclose(pa.grad, pb.grad, atol=1e-12)


def test_gru_step_validates_row_index(rng):
    params = _random_gru_inputs(np.random.default_rng(0))
    (x, wz, wr, wh, bz, br, bh, uz, ur, uh) = params
    xz = tc.add(tc.matmul(x, tc.transpose(wz)), bz)
    xr = tc.add(tc.matmul(x, tc.transpose(wr)), br)
    xh = tc.add(tc.matmul(x, tc.transpose(wh)), bh)
    h = Tensor(np.zeros(3))
    with pytest.raises(ShapeError):
        tc.gru_step(xz, xr, xh, 99, h, uz, ur, uh)
