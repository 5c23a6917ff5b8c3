# app/api/__init__.py
from .commands import cli
from .controllers import LabController, lab_controller
from .run_config import RunConfig, load_run_config

__all__ = ["cli", "LabController", "lab_controller", "RunConfig", "load_run_config"]
