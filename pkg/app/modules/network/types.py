from enum import Enum


class ModelVariant(str, Enum):
    FULL = "full"  # DAFM + 2DPAM
    BASELINE = "baseline"  # Sum fusion, attention bypassed
