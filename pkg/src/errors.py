# src/errors.py
from typing import Optional, Sequence


class MpsrError(Exception):
    """Base class for every error raised by the toolkit"""

    exit_code = 1


class DimensionError(MpsrError, ValueError):
    """Extents or shapes do not line up"""

    exit_code = 4


class DomainError(MpsrError, ValueError):
    """A value lies outside its documented domain"""

    exit_code = 4


class EmptyInputError(MpsrError, ValueError):
    exit_code = 4


class NumericalError(MpsrError, ArithmeticError):
    """A matrix decomposition failed to converge"""

    def __init__(self, message: str, shape: Optional[Sequence[int]] = None):
        self.shape = tuple(shape) if shape is not None else None
        if self.shape is not None:
            message = f"{message} (input shape {self.shape})"
        super().__init__(message)


class ContractViolation(MpsrError):
    """A precondition of an operation was broken by the caller"""

    exit_code = 4


class ConfigError(ContractViolation):
    exit_code = 4


class CapacityError(MpsrError):
    """The requested work exceeds a configured memory or pair-count cap"""

    exit_code = 3


class FormatError(MpsrError):
    """A file does not follow the expected binary layout"""

    exit_code = 2

    def __init__(self, message: str, offset: Optional[int] = None):
        self.offset = offset
        if offset is not None:
            message = f"{message} at byte offset {offset}"
        super().__init__(message)


class ConsistencyError(FormatError):
    """Two files that belong together disagree"""


class ChecksumError(FormatError):
    pass


class StorageError(MpsrError, OSError):
    """Reading or writing a file failed"""

    exit_code = 1
