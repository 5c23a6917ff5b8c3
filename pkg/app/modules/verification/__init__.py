# app/modules/verification/__init__.py
from .suites import SUITES, Check, SuiteResult, run_suite, run_suites, tiny_model_config

__all__ = ["SUITES", "Check", "SuiteResult", "run_suite", "run_suites", "tiny_model_config"]
