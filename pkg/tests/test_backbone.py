import numpy as np
import pytest

from app.modules.backbone import (
    STAGE_STRIDES,
    EncoderConfig,
    build_encoder,
    encode,
    residual_block,
)
from app.modules.nn_ops import NormMode
from app.modules.tensor_core import Tensor
from app.utils.errors import ShapeError
from pydantic import ValidationError


@pytest.fixture
def small_encoder_config():
    return EncoderConfig(stage_widths=[4, 6, 8, 10], norm_mode=NormMode.BATCH)


def test_parameter_names_are_unique_and_stable():
    """Test that the registry is deterministic across builds."""
    first = build_encoder(EncoderConfig(), rng_seed=0)
    second = build_encoder(EncoderConfig(), rng_seed=0)
    assert sorted(first.params) == sorted(second.params)
    assert len(set(first.params)) == len(first.params)
    assert "stem.conv.weight" in first.params
    assert "stage2.block1.proj.weight" in first.params
    # Stage 1 keeps the stem width at stride 1, so its block needs no projection
    assert "stage1.block1.proj.weight" not in first.params


def test_same_seed_same_initialization(small_encoder_config):
    a = build_encoder(small_encoder_config, rng_seed=9)
    b = build_encoder(small_encoder_config, rng_seed=9)
    c = build_encoder(small_encoder_config, rng_seed=10)
    assert all(np.array_equal(a.params[k].data, b.params[k].data) for k in a.params)
    assert not np.array_equal(a.params["stem.conv.weight"].data, c.params["stem.conv.weight"].data)


def test_more_blocks_more_parameters(small_encoder_config):
    deeper = small_encoder_config.model_copy(update={"blocks_per_stage": [2, 2, 2, 2]})
    count = lambda enc: sum(t.size for t in enc.params.values())
    assert count(build_encoder(deeper, 0)) > count(build_encoder(small_encoder_config, 0))


def test_default_pyramid_shapes():
    enc = build_encoder(EncoderConfig(), rng_seed=0)
    pyramid = encode(enc, Tensor(np.random.default_rng(0).normal(size=(1, 3, 64, 64))))
    assert pyramid.s1.shape == (1, 32, 16, 16)
    assert pyramid.s3.shape == (1, 128, 4, 4)
    assert pyramid.s4.shape == (1, 256, 2, 2)
    assert STAGE_STRIDES == (4, 8, 16, 32)


def test_rectangular_input(small_encoder_config):
    enc = build_encoder(small_encoder_config, rng_seed=0)
    pyramid = encode(enc, Tensor(np.zeros((2, 3, 96, 64))))
    assert pyramid.s1.shape == (2, 4, 24, 16)
    assert pyramid.s4.shape == (2, 10, 3, 2)


def test_indivisible_input_asks_for_padding(small_encoder_config):
    enc = build_encoder(small_encoder_config, rng_seed=0)
    with pytest.raises(ShapeError, match="pad or crop"):
        encode(enc, Tensor(np.zeros((1, 3, 48, 64))))


def test_zero_branch_block_is_its_shortcut(small_encoder_config):
    """Freshly initialized blocks have a zero final norm scale, so they pass x through."""
    enc = build_encoder(small_encoder_config, rng_seed=0)
    x = np.abs(np.random.default_rng(2).normal(size=(1, 4, 8, 8)))
    out = residual_block(Tensor(x), enc.params, enc.buffers, "stage1.block1", 1, NormMode.BATCH, training=False)
    assert np.array_equal(out.data, x)


def test_encoder_config_validation():
    assert EncoderConfig(stage_widths="8,16,32,64").stage_widths == [8, 16, 32, 64]
    with pytest.raises(ValidationError):
        EncoderConfig(stage_widths=[8, 16, 32])
    with pytest.raises(ValidationError):
        EncoderConfig(blocks_per_stage=[1, 0, 1, 1])
