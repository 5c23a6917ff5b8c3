from enum import Enum


class NormMode(str, Enum):
    BATCH = "batch"
    DISABLED = "disabled"
