"""Exception hierarchy shared across the storage pipeline."""

from typing import Optional


class DnaStoreError(Exception):
    """Base class for every error raised by this package."""


class UncorrectableCodeword(DnaStoreError, ValueError):
    """A Reed-Solomon codeword carries more byte errors than the code corrects."""

    def __init__(self, index: int):
        self.index = index
        super().__init__(f"codeword {index} is uncorrectable")


class MalformedSequence(DnaStoreError, ValueError):
    """A base sequence violates the framing or constraints of its scheme."""


class TableIntegrityError(DnaStoreError):
    """A golden codec table does not match its generator."""


class GenerationExhausted(DnaStoreError):
    """Primer generation hit its draw limit before reaching the requested size."""


class FormatError(DnaStoreError, ValueError):
    """A persisted artifact could not be parsed."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class IoFailure(DnaStoreError, OSError):
    """Reading or writing an artifact failed."""


class WindowTooLong(DnaStoreError, ValueError):
    """The collision window is longer than the primer."""


class WidthMismatch(DnaStoreError, ValueError):
    """Two collision sets are defined over libraries of different sizes."""


class InfeasibleChunk(DnaStoreError, ValueError):
    """A single chunk does not fit the tube its own collisions leave."""

    def __init__(self, chunk_id: int):
        self.chunk_id = chunk_id
        super().__init__(f"chunk {chunk_id} does not fit any tube")


class PairBudgetExceeded(DnaStoreError):
    """A tube needs more primer pairs than it has usable primers for."""


class UnknownFile(DnaStoreError, KeyError):
    """The requested file id is not stored in the plan."""

    def __init__(self, file_id: int):
        self.file_id = file_id
        super().__init__(file_id)

    def __str__(self) -> str:
        return f"file {self.file_id} is not in the plan"
