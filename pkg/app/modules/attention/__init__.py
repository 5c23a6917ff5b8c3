# app/modules/attention/__init__.py
from .schemas import (
    AttentionHooks,
    AttentionRecord,
    DafmOutput,
    DafmParams,
    PamOutput,
    PamParams,
)
from .dafm import channel_weights, dafm_forward, project_context, sum_fusion
from .pam import confidence_map, gate_spatial, pam2d_forward, project_spatial

__all__ = [
    "AttentionHooks",
    "AttentionRecord",
    "DafmOutput",
    "DafmParams",
    "PamOutput",
    "PamParams",
    "channel_weights",
    "dafm_forward",
    "project_context",
    "sum_fusion",
    "confidence_map",
    "gate_spatial",
    "pam2d_forward",
    "project_spatial",
]
