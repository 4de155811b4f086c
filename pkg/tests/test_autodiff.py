import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import central_diff, naive_conv2d, rel_err
from dprecon.autodiff import (NonFiniteError, Tape, Tensor, add, concat_channels, conv2d,
                              leaky_relu, scale, sum_all, sum_squares, upsample_nearest)


def grad_of(build, *arrays):
    """Autodiff gradients of ``build(tape, *leaves)`` w.r.t. each array."""
    tape = Tape()
    leaves = [tape.leaf(a) for a in arrays]
    g = tape.backward(build(tape, *leaves))
    return [g[t] for t in leaves]


def value_of(build, *arrays):
    return float(build(None, *[Tensor(a) for a in arrays]).data)


def test_conv_identity_kernel(rng):
    x = Tensor(rng.standard_normal((1, 6, 5)))
    w = np.zeros((1, 1, 3, 3))
    w[0, 0, 1, 1] = 1.0
    y = conv2d(x, Tensor(w), Tensor(np.zeros(1)), stride=1, pad=1)
    np.testing.assert_array_equal(y.data, x.data)


def test_conv_zero_weights_gives_bias(rng):
    x = Tensor(rng.standard_normal((3, 5, 5)))
    y = conv2d(x, Tensor(np.zeros((2, 3, 3, 3))), Tensor([0.5, -2.0]), pad=1)
    assert np.all(y.data[0] == 0.5) and np.all(y.data[1] == -2.0)


@pytest.mark.parametrize("stride,pad", [(1, 1), (2, 1), (1, 0), (2, 0)])
def test_conv_matches_naive_loop(rng, stride, pad):
    x = rng.standard_normal((1, 5, 5))
    w = rng.standard_normal((2, 1, 3, 3))
    b = rng.standard_normal(2)
    y = conv2d(Tensor(x), Tensor(w), Tensor(b), stride=stride, pad=pad)
    ref = naive_conv2d(x, w, b, stride, pad)
    assert y.shape == ref.shape
    np.testing.assert_allclose(y.data, ref, rtol=0, atol=1e-13)


def test_conv_output_extent():
    x = Tensor(np.ones((2, 9, 7)))
    y = conv2d(x, Tensor(np.ones((3, 2, 3, 3))), Tensor(np.zeros(3)), stride=2, pad=1)
    assert y.shape == (3, (9 + 2 - 3) // 2 + 1, (7 + 2 - 3) // 2 + 1)


def test_conv_shape_errors():
    x = Tensor(np.ones((2, 4, 4)))
    with pytest.raises(ValueError, match="channels"):
        conv2d(x, Tensor(np.ones((1, 3, 3, 3))), Tensor(np.zeros(1)))
    with pytest.raises(ValueError, match="bias"):
        conv2d(x, Tensor(np.ones((1, 2, 3, 3))), Tensor(np.zeros(2)))
    with pytest.raises(ValueError, match="stride"):
        conv2d(x, Tensor(np.ones((1, 2, 3, 3))), Tensor(np.zeros(1)), stride=3)


def test_conv_non_finite_is_error():
    x = Tensor(np.full((1, 3, 3), 1e308))
    with pytest.raises(NonFiniteError):
        conv2d(x, Tensor(np.full((1, 1, 3, 3), 10.0)), Tensor(np.zeros(1)), pad=1)


def test_leaky_relu_values():
    y = leaky_relu(Tensor([1.0, -2.0]), 0.1)
    np.testing.assert_allclose(y.data, [1.0, -0.2])
    x = np.array([0.5, -3.0, 2.0])
    np.testing.assert_array_equal(leaky_relu(Tensor(x), 0.0).data, [0.5, 0.0, 2.0])


def test_leaky_relu_gradient_vs_fd():
    x = np.array([3.0, -3.0])
    build = lambda tape, t: sum_squares(leaky_relu(t, 0.1, tape), tape)
    (g,) = grad_of(build, x)
    fd = central_diff(lambda a: value_of(build, a), x)
    assert rel_err(g, fd).max() <= 1e-7


def test_leaky_relu_subgradient_at_zero():
    (g,) = grad_of(lambda tape, t: sum_all(leaky_relu(t, 0.25, tape), tape), np.zeros(3))
    np.testing.assert_array_equal(g, 0.25)


def test_leaky_relu_bad_slope():
    with pytest.raises(ValueError):
        leaky_relu(Tensor([1.0]), 1.0)


def test_upsample_identity_and_blocks():
    x = np.array([[[1.0, 2.0], [3.0, 4.0]]])
    np.testing.assert_array_equal(upsample_nearest(Tensor(x), 1).data, x)
    y = upsample_nearest(Tensor(x), 2).data
    expected = np.array([[1, 1, 2, 2], [1, 1, 2, 2], [3, 3, 4, 4], [3, 3, 4, 4]], float)
    np.testing.assert_array_equal(y[0], expected)
    with pytest.raises(ValueError):
        upsample_nearest(Tensor(x), 0)


@pytest.mark.parametrize("factor", [1, 2, 3])
def test_upsample_backward_counts(factor):
    (g,) = grad_of(lambda tape, t: sum_all(upsample_nearest(t, factor, tape), tape),
                   np.ones((2, 3, 4)))
    np.testing.assert_array_equal(g, factor * factor)


def test_concat_shapes_and_empty(rng):
    a = Tensor(rng.standard_normal((2, 4, 4)))
    b = Tensor(rng.standard_normal((3, 4, 4)))
    assert concat_channels(a, b).shape == (5, 4, 4)
    empty = Tensor(np.zeros((0, 4, 4)))
    np.testing.assert_array_equal(concat_channels(a, empty).data, a.data)
    with pytest.raises(ValueError):
        concat_channels(a, Tensor(np.zeros((1, 4, 5))))


def test_concat_backward_split_matches_index_bookkeeping(rng):
    a, b = rng.standard_normal((2, 3, 3)), rng.standard_normal((3, 3, 3))
    weights = rng.standard_normal((5, 3, 3))
    build = lambda tape, x, y: _weighted(concat_channels(x, y, tape), weights, tape)
    ga, gb = grad_of(build, a, b)
    # oracle: channel c of the concat is a[c] for c < 2, else b[c - 2]
    for c in range(5):
        expected = weights[c]
        got = ga[c] if c < 2 else gb[c - 2]
        np.testing.assert_array_equal(got, expected)


def _weighted(t, weights, tape):
    from dprecon.autodiff import external_loss
    return external_loss(t, lambda arr: (float(np.sum(arr * weights)), weights), tape)


def test_backward_simple_losses(rng):
    x = rng.standard_normal((2, 3))
    (g,) = grad_of(lambda tape, t: sum_all(t, tape), x)
    np.testing.assert_array_equal(g, np.ones_like(x))
    (g,) = grad_of(lambda tape, t: sum_squares(t, tape), x)
    np.testing.assert_array_equal(g, 2 * x)


def test_backward_requires_scalar(rng):
    tape = Tape()
    x = tape.leaf(rng.standard_normal((1, 3, 3)))
    with pytest.raises(ValueError, match="scalar"):
        tape.backward(leaky_relu(x, 0.1, tape))


def test_gradients_zeroed_between_backward_passes(rng):
    tape = Tape()
    x = tape.leaf(rng.standard_normal(4))
    loss = sum_squares(x, tape)
    g1 = tape.backward(loss)[x].copy()
    g2 = tape.backward(loss)[x]
    np.testing.assert_array_equal(g1, g2)


def _small_net(tape, x, w1, b1, w2, b2):
    h = leaky_relu(conv2d(x, w1, b1, stride=1, pad=1, tape=tape), 0.1, tape)
    h = upsample_nearest(conv2d(h, w2, b2, stride=2, pad=1, tape=tape), 2, tape)
    h = concat_channels(h, x, tape)
    return sum_squares(h, tape)


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 2 ** 31 - 1), cin=st.integers(1, 3), hw=st.sampled_from([4, 6]))
def test_every_op_gradient_vs_fd(seed, cin, hw):
    r = np.random.default_rng(seed)
    arrays = [r.standard_normal((cin, hw, hw)), r.standard_normal((3, cin, 3, 3)),
              r.standard_normal(3), r.standard_normal((2, 3, 3, 3)), r.standard_normal(2)]
    grads = grad_of(_small_net, *arrays)
    for i, g in enumerate(grads):
        def f(a, i=i):
            args = list(arrays)
            args[i] = a
            return value_of(_small_net, *args)
        fd = central_diff(f, arrays[i])
        err = np.abs(g - fd) / np.maximum(np.maximum(np.abs(g), np.abs(fd)), 1e-6)
        assert err.max() <= 1e-4, (i, err.max())


def test_backward_is_linear(rng):
    arrays = [rng.standard_normal((2, 4, 4)), rng.standard_normal((3, 2, 3, 3)),
              rng.standard_normal(3), rng.standard_normal((2, 3, 3, 3)), rng.standard_normal(2)]
    alpha, beta = 0.7, -1.3

    def l1(tape, *t):
        return _small_net(tape, *t)

    def l2(tape, x, *rest):
        return sum_all(leaky_relu(conv2d(x, rest[0], rest[1], pad=1, tape=tape), 0.1, tape), tape)

    def combo(tape, *t):
        return add(scale(l1(tape, *t), alpha, tape), scale(l2(tape, *t), beta, tape), tape)

    g1 = grad_of(l1, *arrays)
    g2 = grad_of(l2, *arrays)
    gc = grad_of(combo, *arrays)
    for a, b, c in zip(g1, g2, gc):
        expected = alpha * a + beta * b
        np.testing.assert_allclose(c, expected, rtol=1e-12, atol=1e-12 * np.abs(expected).max())


def test_forward_backward_bitwise_repeatable(rng):
    arrays = [rng.standard_normal((2, 8, 8)), rng.standard_normal((3, 2, 3, 3)),
              rng.standard_normal(3), rng.standard_normal((2, 3, 3, 3)), rng.standard_normal(2)]
    first = grad_of(_small_net, *arrays)
    second = grad_of(_small_net, *arrays)
    for a, b in zip(first, second):
        assert a.tobytes() == b.tobytes()


def test_tensor_is_immutable():
    t = Tensor(np.ones(3))
    with pytest.raises(ValueError):
        t.data[0] = 2.0
