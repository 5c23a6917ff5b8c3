import logging
import os
import sys
from pathlib import Path

import numpy as np
import pytest

# Keep test runs from writing log files
os.environ.setdefault("DFDAM_LOG_TO_FILE", "false")

# Add the project root to Python path
project_root = str(Path(__file__).parent.parent.absolute())
if project_root not in sys.path:
    sys.path.insert(0, project_root)

from app.modules.backbone import EncoderConfig
from app.modules.network import ModelConfig
from app.modules.nn_ops import NormMode


@pytest.fixture
def rng():
    """Seeded generator so every test is reproducible."""
    return np.random.default_rng(1234)


@pytest.fixture
def tiny_config():
    """Miniature network: widths of 4, D=4, three classes."""
    return ModelConfig(
        num_classes=3,
        dim=4,
        encoder=EncoderConfig(stage_widths=[4, 4, 4, 4], norm_mode=NormMode.BATCH),
    )


@pytest.fixture
def tiny_config_no_norm(tiny_config):
    return tiny_config.model_copy(
        update={"encoder": tiny_config.encoder.model_copy(update={"norm_mode": NormMode.DISABLED})}
    )


@pytest.fixture(autouse=True)
def drop_cli_log_handlers():
    """Remove handlers that commands attach to the root logger during a test."""
    yield
    for name in ("", "app.modules.training"):
        target = logging.getLogger(name)
        for handler in list(target.handlers):
            if getattr(handler, "_dfdam_handler", False):
                target.removeHandler(handler)
