import math

import numpy as np
import pytest

from app.modules.nn_ops import (
    Conv2dParams,
    NormMode,
    NormParams,
    bilinear_resize,
    concat_channels,
    conv2d,
    conv_params,
    global_avg_pool,
    init_conv,
    init_norm,
    interpolation_matrix,
    max_pool2d,
    naive_conv2d,
    norm_params,
    normalize,
    param_rng,
    resize_bilinear_array,
    resize_nearest_array,
    slice_channels,
    softmax,
    softmax_ce_loss,
)
from app.modules.tensor_core import Tensor, backward, gradcheck, mul
from app.modules.tensor_core import sum as tensor_sum
from app.utils.errors import ContractError, LabelError, ShapeError


def _project(t, seed=0):
    return tensor_sum(mul(t, Tensor(np.random.default_rng(seed).normal(size=t.shape))))


# conv2d

def test_conv2d_diagonal_kernel():
    x = Tensor(np.array([[[[1.0, 2.0], [3.0, 4.0]]]]))
    w = Tensor(np.array([[[[1.0, 0.0], [0.0, 1.0]]]]))
    assert np.array_equal(conv2d(x, Conv2dParams(w)).data, [[[[5.0]]]])


def test_conv2d_identity_and_tap_count():
    x = np.random.default_rng(0).normal(size=(2, 1, 4, 5))
    out = conv2d(Tensor(x), Conv2dParams(Tensor(np.ones((1, 1, 1, 1))), Tensor(np.zeros(1))))
    assert np.array_equal(out.data, x)

    ones = conv2d(Tensor(np.ones((1, 1, 3, 3))), Conv2dParams(Tensor(np.ones((1, 1, 3, 3)))))
    assert np.array_equal(ones.data, [[[[9.0]]]])


@pytest.mark.parametrize(
    "n,c,h,w,o,k,stride,padding",
    [
        (1, 2, 5, 5, 3, 3, 1, 1),
        (2, 3, 8, 6, 2, 3, 2, 1),
        (1, 1, 7, 7, 1, 5, 2, 2),
        (2, 2, 4, 6, 4, 1, 1, 0),
    ],
)
def test_conv2d_matches_naive_loops(n, c, h, w, o, k, stride, padding):
    rng = np.random.default_rng(n * 100 + k)
    x = rng.normal(size=(n, c, h, w))
    weight = rng.normal(size=(o, c, k, k))
    bias = rng.normal(size=o)
    fast = conv2d(Tensor(x), Conv2dParams(Tensor(weight), Tensor(bias), stride, padding)).data
    assert np.abs(fast - naive_conv2d(x, weight, bias, stride, padding)).max() <= 1e-12


def test_conv2d_shape_errors():
    with pytest.raises(ShapeError):
        conv2d(Tensor(np.ones((1, 2, 4, 4))), Conv2dParams(Tensor(np.ones((1, 3, 3, 3)))))
    with pytest.raises(ShapeError):
        conv2d(Tensor(np.ones((1, 1, 2, 2))), Conv2dParams(Tensor(np.ones((1, 1, 3, 3)))))


def test_conv2d_gradients(rng):
    x = rng.normal(size=(2, 3, 5, 5))
    weight = rng.normal(size=(2, 3, 3, 3))
    bias = rng.normal(size=2)
    assert gradcheck(lambda t: _project(conv2d(t, Conv2dParams(Tensor(weight), Tensor(bias), 2, 1))), Tensor(x)) <= 1e-5
    assert gradcheck(lambda t: _project(conv2d(Tensor(x), Conv2dParams(t, Tensor(bias), 1, 1))), Tensor(weight)) <= 1e-5
    assert gradcheck(lambda t: _project(conv2d(Tensor(x), Conv2dParams(Tensor(weight), t))), Tensor(bias)) <= 1e-5


def test_conv2d_without_bias_output_is_read_only(rng):
    out = conv2d(Tensor(rng.normal(size=(1, 2, 4, 4))), Conv2dParams(Tensor(rng.normal(size=(3, 2, 3, 3)))))
    assert not out.data.flags.writeable
    with pytest.raises(ValueError):
        out.data[0, 0, 0, 0] = 1.0


# pooling

def test_max_pool_value_and_routing():
    x = Tensor(np.array([[[[1.0, 2.0], [3.0, 4.0]]]]), requires_grad=True)
    out = max_pool2d(x)
    assert np.array_equal(out.data, [[[[4.0]]]])
    backward(tensor_sum(out))
    assert np.array_equal(x.grad[0, 0], [[0.0, 0.0], [0.0, 1.0]])


def test_max_pool_constant_and_ties():
    x = Tensor(np.full((1, 1, 4, 4), 7.0), requires_grad=True)
    out = max_pool2d(x)
    assert np.array_equal(out.data, np.full((1, 1, 2, 2), 7.0))
    backward(tensor_sum(out))
    # First occurrence in each window wins the tie
    assert x.grad[0, 0, 0, 0] == 1.0
    assert x.grad[0, 0, 0, 1] == 0.0
    assert x.grad.sum() == 4.0


def test_max_pool_window_too_large():
    with pytest.raises(ShapeError):
        max_pool2d(Tensor(np.ones((1, 1, 1, 1))))


def test_global_avg_pool():
    x = Tensor(np.array([[[[1.0, 2.0], [3.0, 4.0]]]]), requires_grad=True)
    out = global_avg_pool(x)
    assert out.shape == (1, 1, 1, 1)
    assert out.item() == 2.5
    backward(tensor_sum(out))
    assert np.array_equal(x.grad, np.full((1, 1, 2, 2), 0.25))


# resize

def test_bilinear_cell_oracle():
    x = Tensor(np.array([[[[0.0, 1.0], [2.0, 3.0]]]]))
    assert bilinear_resize(x, 4, 4).data[0, 0, 1, 1] == pytest.approx(0.75, abs=1e-12)


def test_bilinear_constant_and_identity(rng):
    const = bilinear_resize(Tensor(np.full((1, 2, 3, 5), 4.2)), 7, 2)
    assert np.allclose(const.data, 4.2, atol=1e-12)
    x = rng.normal(size=(1, 2, 3, 5))
    assert np.array_equal(bilinear_resize(Tensor(x), 3, 5).data, x)


def test_interpolation_rows_sum_to_one():
    for n_in, n_out in [(2, 4), (5, 3), (16, 64), (7, 7)]:
        matrix = interpolation_matrix(n_in, n_out)
        assert matrix.shape == (n_out, n_in)
        assert np.allclose(matrix.sum(axis=1), 1.0, atol=1e-15)


def test_bilinear_gradient(rng):
    x = Tensor(rng.normal(size=(1, 2, 3, 4)))
    assert gradcheck(lambda t: _project(bilinear_resize(t, 6, 3)), x) <= 1e-5


@pytest.mark.parametrize("out_h,out_w", [(7, 9), (2, 3), (16, 16)])
def test_bilinear_stays_within_input_range(rng, out_h, out_w):
    x = rng.uniform(-3.0, 5.0, size=(2, 3, 4, 6))
    out = bilinear_resize(Tensor(x), out_h, out_w).data
    lo = x.min(axis=(2, 3), keepdims=True)
    hi = x.max(axis=(2, 3), keepdims=True)
    assert np.all(out >= lo - 1e-12)
    assert np.all(out <= hi + 1e-12)


def test_array_resizers():
    image = np.arange(2 * 4 * 4, dtype=np.float64).reshape(2, 4, 4)
    assert np.array_equal(resize_bilinear_array(image, 4, 4), image)
    labels = np.array([[0, 1], [2, 3]])
    up = resize_nearest_array(labels, 4, 4)
    assert np.array_equal(up, np.repeat(np.repeat(labels, 2, axis=0), 2, axis=1))
    assert set(np.unique(resize_nearest_array(up, 3, 5))) <= {0, 1, 2, 3}


# normalize

def _norm(channels, mode, scale=1.0, shift=0.0):
    return NormParams(
        Tensor(np.full(channels, scale)),
        Tensor(np.full(channels, shift)),
        mode,
        running_mean=np.zeros(channels),
        running_var=np.ones(channels),
    )


def test_normalize_constant_batch_is_zero():
    out = normalize(Tensor(np.full((2, 3, 4, 4), 5.0)), _norm(3, NormMode.BATCH), training=True)
    assert np.allclose(out.data, 0.0, atol=1e-12)


def test_normalize_disabled_is_affine(rng):
    x = rng.normal(size=(1, 2, 3, 3))
    assert np.array_equal(normalize(Tensor(x), _norm(2, NormMode.DISABLED), True).data, x)
    shifted = normalize(Tensor(x), _norm(2, NormMode.DISABLED, scale=2.0, shift=1.0), False)
    assert np.allclose(shifted.data, 2.0 * x + 1.0)


def test_normalize_running_statistics(rng):
    p = _norm(2, NormMode.BATCH)
    x = rng.normal(loc=3.0, size=(4, 2, 5, 5))
    normalize(Tensor(x), p, training=True)
    expected_mean = 0.1 * x.mean(axis=(0, 2, 3))
    assert np.allclose(p.running_mean, expected_mean)

    # Inference uses the running statistics, not the batch
    out = normalize(Tensor(x), p, training=False)
    manual = (x - p.running_mean.reshape(1, -1, 1, 1)) / np.sqrt(p.running_var.reshape(1, -1, 1, 1) + 1e-5)
    assert np.allclose(out.data, manual)


def test_normalize_inference_needs_running_stats():
    p = NormParams(Tensor(np.ones(1)), Tensor(np.zeros(1)), NormMode.BATCH)
    with pytest.raises(ContractError):
        normalize(Tensor(np.ones((1, 1, 2, 2))), p, training=False)


def test_normalize_training_updates_model_buffers(rng):
    params, buffers = {}, {}
    init_norm(params, buffers, "norm", 2, NormMode.BATCH)
    running_mean = buffers["norm.running_mean"]
    x = rng.normal(loc=2.0, scale=3.0, size=(2, 2, 4, 4))
    for _ in range(2):
        normalize(Tensor(x), norm_params(params, buffers, "norm", NormMode.BATCH), training=True)

    batch_mean = x.mean(axis=(0, 2, 3))
    batch_var = x.var(axis=(0, 2, 3))
    assert buffers["norm.running_mean"] is running_mean
    assert np.allclose(running_mean, 0.19 * batch_mean, atol=1e-12)
    assert np.allclose(buffers["norm.running_var"], 0.81 + 0.19 * batch_var, atol=1e-12)


def test_normalize_batch_gradient(rng):
    p = _norm(3, NormMode.BATCH, scale=1.3, shift=0.2)
    x = Tensor(rng.normal(size=(2, 3, 3, 3)))
    assert gradcheck(lambda t: _project(normalize(t, p, True)), x) <= 1e-5


# channels

def test_concat_and_slice_round_trip(rng):
    a = Tensor(rng.normal(size=(1, 3, 4, 4)))
    b = Tensor(rng.normal(size=(1, 5, 4, 4)))
    both = concat_channels(a, b)
    assert both.shape == (1, 8, 4, 4)
    assert np.array_equal(slice_channels(both, 0, 3).data, a.data)
    assert np.array_equal(slice_channels(both, 3, 8).data, b.data)
    assert np.array_equal(concat_channels(a, Tensor(np.zeros((1, 0, 4, 4)))).data, a.data)


def test_concat_mismatch():
    with pytest.raises(ShapeError):
        concat_channels(Tensor(np.ones((1, 1, 4, 4))), Tensor(np.ones((1, 1, 2, 2))))


# loss

def test_softmax_ce_uniform_logits():
    loss = softmax_ce_loss(Tensor(np.zeros((1, 4, 2, 2))), np.zeros((1, 2, 2), dtype=np.int64))
    assert abs(loss.item() - math.log(4)) <= 1e-12


def test_softmax_ce_saturated():
    labels = np.array([[[0, 2], [1, 3]]])
    logits = np.zeros((1, 4, 2, 2))
    for (i, j), k in np.ndenumerate(labels[0]):
        logits[0, k, i, j] = 40.0
    assert softmax_ce_loss(Tensor(logits), labels).item() <= 1e-15


def test_softmax_ce_ignores_pixels(rng):
    logits = rng.normal(size=(1, 3, 1, 2))
    both = softmax_ce_loss(Tensor(logits), np.array([[[1, 255]]]))
    single = softmax_ce_loss(Tensor(logits[:, :, :, :1]), np.array([[[1]]]))
    assert both.item() == pytest.approx(single.item(), abs=1e-15)


def test_softmax_ce_errors():
    logits = Tensor(np.zeros((1, 3, 1, 2)))
    with pytest.raises(ContractError, match="no valid pixels"):
        softmax_ce_loss(logits, np.full((1, 1, 2), 255))
    with pytest.raises(LabelError):
        softmax_ce_loss(logits, np.array([[[0, 3]]]))
    with pytest.raises(ShapeError):
        softmax_ce_loss(logits, np.zeros((1, 2, 2), dtype=np.int64))


def test_softmax_ce_gradient(rng):
    labels = rng.integers(0, 4, size=(2, 3, 3))
    labels[1, 2, 2] = 255
    logits = Tensor(rng.normal(size=(2, 4, 3, 3)), requires_grad=True)
    backward(softmax_ce_loss(logits, labels))
    # Per-pixel logit gradients sum to zero; ignored pixels get none
    assert np.abs(logits.grad.sum(axis=1)).max() <= 1e-15
    assert np.array_equal(logits.grad[1, :, 2, 2], np.zeros(4))
    assert gradcheck(lambda t: softmax_ce_loss(t, labels), Tensor(logits.data)) <= 1e-5


def test_softmax_is_normalized(rng):
    probs = softmax(rng.normal(scale=10.0, size=(2, 5, 3, 3)))
    assert np.allclose(probs.sum(axis=1), 1.0, atol=1e-12)


# named parameters

def test_param_rng_depends_on_name_only():
    a = param_rng(3, "head.weight").normal(size=4)
    assert np.array_equal(a, param_rng(3, "head.weight").normal(size=4))
    assert not np.array_equal(a, param_rng(3, "aux_c.weight").normal(size=4))


def test_init_and_lookup():
    params, buffers = {}, {}
    init_conv(params, 0, "conv", 4, 2, 3, bias=True)
    init_norm(params, buffers, "norm", 4, NormMode.BATCH)
    assert params["conv.weight"].shape == (4, 2, 3, 3)
    assert np.array_equal(params["conv.bias"].data, np.zeros(4))
    assert np.array_equal(buffers["norm.running_var"], np.ones(4))

    p = conv_params(params, "conv", stride=2, padding=1)
    assert p.stride == 2 and p.bias is not None
    assert norm_params(params, buffers, "norm", NormMode.BATCH).running_mean is buffers["norm.running_mean"]
    with pytest.raises(ContractError):
        conv_params(params, "missing")
