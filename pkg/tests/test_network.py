import numpy as np
import pytest

from app.modules.attention import AttentionHooks, DafmParams, dafm_forward
from app.modules.backbone import encode
from app.modules.network import (
    LossWeights,
    ModelVariant,
    build_baseline,
    build_model,
    combine_losses,
    forward,
    infer_model_config,
    joint_loss,
    model_from_tensors,
)
from app.modules.nn_ops import bilinear_resize
from app.modules.tensor_core import Tensor, gradcheck
from app.utils.errors import LoadError, ShapeError


@pytest.fixture
def image(rng):
    return Tensor(rng.normal(size=(1, 3, 32, 32)))


def test_output_shapes(tiny_config, rng):
    model = build_model(tiny_config.model_copy(update={"num_classes": 4}), seed=0)
    out = forward(model, Tensor(rng.normal(size=(1, 3, 64, 64))))
    for logits in (out.y_p, out.y_c, out.y_s):
        assert logits.shape == (1, 4, 64, 64)
    assert out.record.alpha_low.shape == (1, 4)
    assert out.record.beta.shape == (1, 16, 16)


def test_indivisible_input(tiny_config):
    with pytest.raises(ShapeError):
        forward(build_model(tiny_config), Tensor(np.zeros((1, 3, 40, 32))))


def test_forward_is_deterministic(tiny_config, image):
    model = build_model(tiny_config, seed=1)
    a, b = forward(model, image), forward(model, image)
    assert np.array_equal(a.y_p.data, b.y_p.data)
    assert np.array_equal(a.record.beta, b.record.beta)


def test_attention_weights_are_per_sample(tiny_config, rng):
    """Reordering the batch reorders alpha and beta and changes nothing else."""
    model = build_model(tiny_config, seed=6)
    images = rng.normal(size=(3, 3, 32, 32))
    order = np.array([2, 0, 1])
    a = forward(model, Tensor(images)).record
    b = forward(model, Tensor(images[order])).record
    assert np.abs(a.alpha_low[order] - b.alpha_low).max() <= 1e-12
    assert np.abs(a.alpha_high[order] - b.alpha_high).max() <= 1e-12
    assert np.abs(a.beta[order] - b.beta).max() <= 1e-12

    single = forward(model, Tensor(images[1:2])).record
    assert np.abs(single.beta[0] - a.beta[1]).max() <= 1e-12


def test_zero_beta_leaves_only_context(tiny_config, image):
    """With the confidence map at 0 the fused features are the upsampled context."""
    model = build_model(tiny_config, seed=2)
    out = forward(model, image, hooks=AttentionHooks(beta=0.0))

    pyramid = encode(model.encoder, image)
    context = dafm_forward(pyramid.s3, pyramid.s4, DafmParams.from_params(model.params)).fused
    expected = bilinear_resize(context, *pyramid.s1.shape[2:])
    assert np.array_equal(out.fused_features.data, expected.data)


def test_unit_hooks_reduce_to_baseline(tiny_config, rng):
    full = build_model(tiny_config, seed=4)
    baseline = build_baseline(tiny_config, seed=4)
    hooks = AttentionHooks(alpha=1.0, beta=1.0)
    for _ in range(5):
        x = Tensor(rng.normal(size=(1, 3, 32, 32)))
        a, b = forward(full, x, hooks=hooks), forward(baseline, x)
        assert np.abs(a.y_p.data - b.y_p.data).max() <= 1e-12
        assert np.abs(a.y_c.data - b.y_c.data).max() <= 1e-12
        assert np.abs(a.y_s.data - b.y_s.data).max() <= 1e-12


def test_baseline_layout(tiny_config, image):
    full = build_model(tiny_config, seed=0)
    baseline = build_baseline(tiny_config, seed=0)
    assert baseline.config.variant == ModelVariant.BASELINE
    assert not any(name.startswith(("dafm.branch", "pam.score")) for name in baseline.params)
    # Shared parameters start out identical across variants
    for name, p in baseline.params.items():
        assert np.array_equal(p.data, full.params[name].data)
    assert forward(baseline, image).record is None


def test_joint_loss_arithmetic():
    total = combine_losses(Tensor(1.0), Tensor(2.0), Tensor(3.0), LossWeights())
    assert abs(total.item() - 2.1) <= 1e-15
    zero = combine_losses(Tensor(1.25), Tensor(2.0), Tensor(3.0), LossWeights(lambda_s=0.0, lambda_c=0.0))
    assert zero.item() == 1.25


def test_joint_loss_on_logits(rng):
    labels = rng.integers(0, 3, size=(1, 4, 4))
    heads = [Tensor(rng.normal(size=(1, 3, 4, 4))) for _ in range(3)]
    plain = joint_loss(*heads, labels, LossWeights(lambda_s=0.0, lambda_c=0.0))
    assert plain.total.item() == plain.principal.item()

    saturated = np.zeros((1, 3, 4, 4))
    np.put_along_axis(saturated, labels[:, None], 40.0, axis=1)
    perfect = joint_loss(Tensor(saturated), Tensor(saturated), Tensor(saturated), labels)
    assert perfect.total.item() <= 1e-14


def test_network_gradient_without_norm(tiny_config_no_norm, rng):
    model = build_model(tiny_config_no_norm, seed=5)
    x = rng.normal(size=(1, 3, 32, 32))
    labels = rng.integers(0, 3, size=(1, 32, 32))

    def loss(t):
        out = forward(model, t, training=True)
        return joint_loss(out.y_p, out.y_c, out.y_s, labels).total

    assert gradcheck(loss, Tensor(x), samples=10, seed=1) <= 1e-5


def test_config_inferred_from_tensors(tiny_config, image):
    model = build_model(tiny_config.model_copy(update={"variant": ModelVariant.BASELINE}), seed=3)
    tensors = {name: p.data for name, p in model.params.items()}
    tensors.update(model.buffers)
    assert infer_model_config(tensors) == model.config

    rebuilt = model_from_tensors(tensors)
    assert np.array_equal(forward(rebuilt, image).y_p.data, forward(model, image).y_p.data)

    del tensors["head.weight"]
    with pytest.raises(LoadError):
        model_from_tensors(tensors)
