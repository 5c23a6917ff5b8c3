"""
Self-checks run by ``dfdam verify``.

Each suite returns a measured error and the tolerance it must stay under.
Setting ``DFDAM_VERIFY_FAULT=<suite>`` perturbs that suite's measurement so
the failing exit path can be exercised.
"""
import logging
import math
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np

from app.config import settings
from app.modules.attention import AttentionHooks, PamParams, pam2d_forward, project_spatial
from app.modules.backbone import EncoderConfig
from app.modules.data import decode_pgm, decode_ppm, encode_pgm, encode_ppm
from app.modules.evaluation import ConfusionMatrix, accumulate, miou
from app.modules.network import ModelConfig, build_baseline, build_model, forward, joint_loss
from app.modules.nn_ops import (
    Conv2dParams,
    NormMode,
    NormParams,
    bilinear_resize,
    concat_channels,
    conv2d,
    global_avg_pool,
    max_pool2d,
    naive_conv2d,
    normalize,
    softmax_ce_loss,
)
from app.modules.tensor_core import Tensor, add, gradcheck, mul, relu, sigmoid
from app.modules.tensor_core import sum as tensor_sum
from app.modules.training import OptimizerState, decode_tensors, encode_tensors
from app.modules.training.checkpoint import checkpoint_tensors

logger = logging.getLogger(__name__)

GRAD_TOLERANCE = 1e-5
ORACLE_TOLERANCE = 1e-12
SEEDS = 10


class Check(NamedTuple):
    error: float
    tolerance: float
    detail: str


class SuiteResult(NamedTuple):
    name: str
    passed: bool
    error: float
    tolerance: float
    detail: str


SUITES: dict[str, Callable[[], Check]] = {}


def suite(name: str):
    def register(fn: Callable[[], Check]) -> Callable[[], Check]:
        SUITES[name] = fn
        return fn

    return register


def tiny_model_config(norm_mode: NormMode = NormMode.BATCH, num_classes: int = 3) -> ModelConfig:
    return ModelConfig(
        num_classes=num_classes,
        dim=4,
        encoder=EncoderConfig(stage_widths=[4, 4, 4, 4], norm_mode=norm_mode),
    )


def _project(t: Tensor, seed: int) -> Tensor:
    """Fixed random linear functional of ``t``: a scalar whose gradient touches every output."""
    return tensor_sum(mul(t, Tensor(np.random.default_rng(seed).normal(size=t.shape))))


def _op_checks(rng: np.random.Generator) -> dict[str, tuple[Callable[[Tensor], Tensor], np.ndarray]]:
    x4 = rng.normal(size=(2, 3, 6, 6))
    weight = rng.normal(size=(4, 3, 3, 3))
    bias = rng.normal(size=4)
    scale, shift = rng.uniform(0.5, 1.5, 3), rng.normal(size=3)
    logits = rng.normal(size=(2, 4, 3, 3))
    labels = rng.integers(0, 4, size=(2, 3, 3))
    labels[0, 0, 0] = 255
    other = rng.normal(size=(2, 2, 6, 6))
    r = int(rng.integers(1 << 31))

    def norm(mode):
        return NormParams(Tensor(scale), Tensor(shift), mode, running_mean=np.zeros(3), running_var=np.ones(3))

    return {
        "add": (lambda x: _project(add(x, Tensor(bias[:3])), r), rng.normal(size=(2, 3))),
        "mul": (lambda x: _project(mul(x, Tensor(bias[:3])), r), rng.normal(size=(2, 3))),
        "sigmoid": (lambda x: _project(sigmoid(x), r), rng.normal(size=(3, 4))),
        "relu": (lambda x: _project(relu(x), r), rng.normal(size=(3, 4))),
        "conv2d.input": (
            lambda x: _project(conv2d(x, Conv2dParams(Tensor(weight), Tensor(bias), stride=2, padding=1)), r),
            x4,
        ),
        "conv2d.weight": (
            lambda w: _project(conv2d(Tensor(x4), Conv2dParams(w, Tensor(bias), padding=1)), r),
            weight,
        ),
        "max_pool2d": (lambda x: _project(max_pool2d(x, 2, 2), r), x4),
        "bilinear_resize": (lambda x: _project(bilinear_resize(x, 5, 9), r), x4[:, :, :3, :4]),
        "normalize.batch": (lambda x: _project(normalize(x, norm(NormMode.BATCH), True), r), x4),
        "normalize.disabled": (lambda x: _project(normalize(x, norm(NormMode.DISABLED), True), r), x4),
        "concat_channels": (lambda x: _project(concat_channels(x, Tensor(other)), r), x4),
        "global_avg_pool": (lambda x: _project(global_avg_pool(x), r), x4),
        "softmax_ce_loss": (lambda x: softmax_ce_loss(x, labels), logits),
    }


def _fault(name: str) -> float:
    return 1.0 if settings.verify_fault == name else 0.0


@suite("gradcheck")
def check_gradients() -> Check:
    worst, where = 0.0, ""
    for seed in range(SEEDS):
        rng = np.random.default_rng(seed)
        for op, (f, x) in _op_checks(rng).items():
            err = gradcheck(f, Tensor(x))
            if err > worst:
                worst, where = err, f"{op} (seed {seed})"

    cfg = tiny_model_config(NormMode.DISABLED)
    for seed in range(SEEDS):
        rng = np.random.default_rng(100 + seed)
        model = build_model(cfg, seed)
        image = rng.normal(size=(1, 3, 32, 32))
        labels = rng.integers(0, cfg.num_classes, size=(1, 32, 32))

        def image_loss(x: Tensor) -> Tensor:
            out = forward(model, x, training=True)
            return joint_loss(out.y_p, out.y_c, out.y_s, labels).total

        err = gradcheck(image_loss, Tensor(image), samples=16, seed=seed)
        if err > worst:
            worst, where = err, f"network input (seed {seed})"

        for name in ("pam.score1.weight", "dafm.branch_high.weight", "stage1.block1.conv1.weight"):
            def param_loss(w: Tensor, name=name) -> Tensor:
                out = forward(model.with_params({**model.params, name: w}), Tensor(image), training=True)
                return joint_loss(out.y_p, out.y_c, out.y_s, labels).total

            err = gradcheck(param_loss, model.params[name], samples=8, seed=seed)
            if err > worst:
                worst, where = err, f"network {name} (seed {seed})"
    return Check(worst + _fault("gradcheck"), GRAD_TOLERANCE, f"worst at {where or 'n/a'}")


CONV_GRID = [
    # n, c, h, w, o, k, stride, padding
    (1, 1, 5, 5, 1, 3, 1, 0),
    (2, 3, 7, 6, 4, 3, 1, 1),
    (1, 2, 8, 8, 3, 3, 2, 1),
    (2, 4, 6, 9, 2, 1, 1, 0),
    (1, 3, 9, 7, 5, 5, 2, 2),
    (3, 2, 4, 4, 2, 2, 2, 0),
]


@suite("conv-oracle")
def check_conv_oracle() -> Check:
    rng = np.random.default_rng(0)
    worst = 0.0
    for n, c, h, w, o, k, stride, padding in CONV_GRID:
        x = rng.normal(size=(n, c, h, w))
        weight = rng.normal(size=(o, c, k, k))
        bias = rng.normal(size=o)
        fast = conv2d(Tensor(x), Conv2dParams(Tensor(weight), Tensor(bias), stride, padding)).data
        slow = naive_conv2d(x, weight, bias, stride, padding)
        worst = max(worst, float(np.abs(fast - slow).max()))
    return Check(worst + _fault("conv-oracle"), ORACLE_TOLERANCE, f"{len(CONV_GRID)} shapes")


@suite("bilinear-oracle")
def check_bilinear_oracle() -> Check:
    x = Tensor(np.array([[[[0.0, 1.0], [2.0, 3.0]]]]))
    out = bilinear_resize(x, 4, 4).data[0, 0]
    identity = np.random.default_rng(0).normal(size=(1, 2, 5, 7))
    same = bilinear_resize(Tensor(identity), 5, 7).data
    error = max(abs(out[1, 1] - 0.75), float(np.abs(same - identity).max()))
    return Check(error + _fault("bilinear-oracle"), ORACLE_TOLERANCE, f"out[1][1]={out[1, 1]!r}")


@suite("softmax-ce")
def check_softmax_ce() -> Check:
    worst = 0.0
    for k in (2, 4, 19):
        loss = softmax_ce_loss(Tensor(np.zeros((1, k, 3, 3))), np.zeros((1, 3, 3), dtype=np.int64))
        worst = max(worst, abs(loss.item() - math.log(k)))
    return Check(worst + _fault("softmax-ce"), ORACLE_TOLERANCE, "uniform logits give ln K")


@suite("baseline-reduction")
def check_baseline_reduction() -> Check:
    cfg = tiny_model_config()
    full = build_model(cfg, seed=7)
    baseline = build_baseline(cfg, seed=7)
    # Zero the attention nets; the unit hooks then override their outputs anyway.
    params = dict(full.params)
    for name, p in full.params.items():
        if name.startswith(("dafm.branch_", "pam.score")):
            params[name] = Tensor(np.zeros(p.shape), requires_grad=True)
    full = full.with_params(params)
    hooks = AttentionHooks(alpha=1.0, beta=1.0)

    rng = np.random.default_rng(1)
    worst = 0.0
    for _ in range(5):
        image = Tensor(rng.normal(size=(1, 3, 32, 32)))
        a = forward(full, image, hooks=hooks)
        b = forward(baseline, image)
        for x, y in ((a.y_p, b.y_p), (a.y_c, b.y_c), (a.y_s, b.y_s)):
            worst = max(worst, float(np.abs(x.data - y.data).max()))
    return Check(worst + _fault("baseline-reduction"), ORACLE_TOLERANCE, "5 random inputs")


@suite("position-gating")
def check_position_gating() -> Check:
    model = build_model(tiny_model_config(), seed=3)
    pam = PamParams.from_params(model.params)
    rng = np.random.default_rng(2)
    worst = 0.0
    outside = 0
    for _ in range(100):
        spatial = Tensor(rng.normal(size=(1, 4, 8, 8)))
        context = Tensor(rng.normal(size=(1, 4, 8, 8)))
        gated = pam2d_forward(spatial, context, pam)
        x_si = project_spatial(spatial, pam)
        worst = max(worst, float(np.abs(gated.weighted_spatial.data - gated.beta.data * x_si.data).max()))

        rec = forward(model, Tensor(rng.normal(scale=3.0, size=(1, 3, 32, 32)))).record
        for values in (rec.alpha_low, rec.alpha_high, rec.beta, gated.beta.data):
            outside += int(np.count_nonzero((values <= 0.0) | (values >= 1.0)))
    error = worst + (1.0 if outside else 0.0)
    return Check(error + _fault("position-gating"), 1e-15, f"{outside} weights outside (0, 1)")


@suite("codec-roundtrip")
def check_codecs() -> Check:
    rng = np.random.default_rng(4)
    mismatches = 0
    for h, w in ((1, 1), (3, 5), (32, 17)):
        image = rng.integers(0, 256, size=(3, h, w)).astype(np.float64)
        labels = rng.integers(0, 256, size=(h, w))
        mismatches += int(not np.array_equal(decode_ppm(encode_ppm(image)), image))
        mismatches += int(not np.array_equal(decode_pgm(encode_pgm(labels)), labels))
        mismatches += int(encode_ppm(decode_ppm(encode_ppm(image))) != encode_ppm(image))

    model = build_model(tiny_model_config(), seed=5)
    state = OptimizerState(
        velocity={name: rng.normal(size=p.shape) for name, p in model.params.items()}, iteration=11
    )
    tensors = checkpoint_tensors(model, state, (1.5, 2.5, 3.5))
    decoded, iteration, seed = decode_tensors(encode_tensors(tensors, 11, 5))
    mismatches += int(list(decoded) != list(tensors) or (iteration, seed) != (11, 5))
    mismatches += sum(int(not np.array_equal(decoded[k], np.asarray(v))) for k, v in tensors.items())
    return Check(float(mismatches) + _fault("codec-roundtrip"), 0.0, f"{mismatches} mismatches")


@suite("metrics-oracle")
def check_metrics() -> Check:
    cm = accumulate(ConfusionMatrix.empty(2), np.array([0, 1, 1, 1]), np.array([0, 0, 1, 1]))
    error = float(np.abs(cm.counts - np.array([[1, 1], [0, 2]])).sum())
    error += abs(miou(cm).mean - 7.0 / 12.0)
    labels = np.random.default_rng(6).integers(0, 3, size=(8, 8))
    error += abs(miou(accumulate(ConfusionMatrix.empty(3), labels, labels)).mean - 1.0)
    return Check(error + _fault("metrics-oracle"), ORACLE_TOLERANCE, "hand-counted matrices")


def run_suite(name: str) -> SuiteResult:
    check = SUITES[name]()
    passed = check.error <= check.tolerance
    log = logger.info if passed else logger.error
    log(f"Suite {name}: {'pass' if passed else 'FAIL'} (error {check.error:.3e}, tolerance {check.tolerance:.0e})")
    return SuiteResult(name, passed, check.error, check.tolerance, check.detail)


def run_suites(names: Optional[Sequence[str]] = None) -> list[SuiteResult]:
    return [run_suite(name) for name in (names or list(SUITES))]
