"""Fixed-size chunking of workload files."""

from dataclasses import dataclass
from typing import Iterable, List

from src.workload import WorkloadFile


@dataclass(frozen=True)
class DataChunk:
    """A piece of one file's bytes with a global chunk id."""

    chunk_id: int
    file_id: int
    data: bytes

    @property
    def byte_len(self) -> int:
        return len(self.data)

    def __repr__(self):
        return f"DataChunk(chunk_id={self.chunk_id}, file_id={self.file_id}, byte_len={self.byte_len})"


class DataChunker:
    """Cuts files into chunk_bytes pieces; only a file's last piece may be shorter."""

    def __init__(self, chunk_bytes: int = 4096):
        """
        Initialize the chunker.

        Args:
            chunk_bytes: Size of each chunk in bytes
        """
        if chunk_bytes <= 0:
            raise ValueError("chunk_bytes must be positive")
        self.chunk_bytes = chunk_bytes

    def chunk_file(self, file: WorkloadFile, first_id: int = 0) -> List[DataChunk]:
        data = file.data
        return [
            DataChunk(chunk_id=first_id + i, file_id=file.file_id, data=data[start:start + self.chunk_bytes])
            for i, start in enumerate(range(0, len(data), self.chunk_bytes))
        ]

    def chunk_files(self, files: Iterable[WorkloadFile]) -> List[DataChunk]:
        """
        Chunk files in order with dense global ids.

        Args:
            files: Files to cut

        Returns:
            Chunks, ids 0..n-1 in file order
        """
        chunks: List[DataChunk] = []
        for file in files:
            chunks.extend(self.chunk_file(file, first_id=len(chunks)))
        return chunks
