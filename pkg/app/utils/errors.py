from typing import Optional


class DfDamError(Exception):
    """Base error; ``exit_code`` is what the command surface exits with."""

    exit_code = 2


class ShapeError(DfDamError):
    pass


class ContractError(DfDamError):
    pass


class LabelError(DfDamError):
    pass


class ConfigError(DfDamError):
    pass


class LoadError(DfDamError):
    pass


class FormatError(DfDamError):
    exit_code = 3

    def __init__(self, message: str, offset: Optional[int] = None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)


class NumericalError(DfDamError):
    exit_code = 4

    def __init__(self, message: str, iteration: Optional[int] = None):
        self.iteration = iteration
        if iteration is not None:
            message = f"{message} at iteration {iteration}"
        super().__init__(message)
