import pytest

from app.config import settings
from app.modules.verification import SUITES, run_suite, run_suites, tiny_model_config
from app.modules.verification import suites as suites_module
from app.modules.network import build_model
from app.modules.nn_ops import NormMode

FAST_SUITES = ["conv-oracle", "bilinear-oracle", "softmax-ce", "codec-roundtrip", "metrics-oracle"]


def test_registry_lists_every_suite():
    assert set(SUITES) == {
        "gradcheck",
        "conv-oracle",
        "bilinear-oracle",
        "softmax-ce",
        "baseline-reduction",
        "position-gating",
        "codec-roundtrip",
        "metrics-oracle",
    }


@pytest.mark.parametrize("name", FAST_SUITES)
def test_fast_suites_pass(name):
    result = run_suite(name)
    assert result.passed, f"{name}: error {result.error} above {result.tolerance} ({result.detail})"
    assert result.name == name


def test_baseline_reduction_suite():
    result = run_suite("baseline-reduction")
    assert result.passed
    assert result.error <= 1e-12


def test_injected_fault_fails_the_suite(monkeypatch):
    monkeypatch.setattr(settings, "verify_fault", "softmax-ce")
    results = {r.name: r for r in run_suites(["softmax-ce", "metrics-oracle"])}
    assert not results["softmax-ce"].passed
    assert results["metrics-oracle"].passed


def test_run_suites_defaults_to_registry(monkeypatch):
    monkeypatch.setattr(suites_module, "SUITES", {"softmax-ce": SUITES["softmax-ce"]})
    assert [r.name for r in run_suites()] == ["softmax-ce"]


def test_tiny_model_config():
    cfg = tiny_model_config(NormMode.DISABLED)
    assert cfg.encoder.norm_mode == NormMode.DISABLED
    assert cfg.dim == 4


def test_gradcheck_suite_covers_every_network_seed(monkeypatch):
    seeds = []

    def recording_build(cfg, seed=0):
        seeds.append(seed)
        return build_model(cfg, seed)

    monkeypatch.setattr(suites_module, "build_model", recording_build)
    monkeypatch.setattr(suites_module, "gradcheck", lambda f, x, samples=None, seed=0: 0.0)
    result = run_suite("gradcheck")
    assert result.passed
    assert seeds == list(range(suites_module.SEEDS))
    assert suites_module.SEEDS == 10
