"""Seeded synthetic workloads: random-byte files or planted collision sets."""

import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from src.alloc import Chunk
from src.collision import CollisionSet

logger = logging.getLogger(__name__)

MODE_RANDOM = "random"
MODE_PLANTED = "planted"
MODES = (MODE_RANDOM, MODE_PLANTED)

KB = 1024
MB = 1024 * KB


@dataclass(frozen=True)
class FileSizeDistribution:
    """
    Two-part file-size mixture.

    With probability small_fraction a file is uniform in
    [small_min_bytes, small_max_bytes); otherwise uniform in
    [small_max_bytes, large_max_bytes].
    """

    small_fraction: float = 0.4
    small_min_bytes: int = 1 * KB
    small_max_bytes: int = 256 * KB
    large_max_bytes: int = 4 * MB

    def __post_init__(self):
        if not 0.0 <= self.small_fraction <= 1.0:
            raise ValueError("small_fraction must be in [0, 1]")
        if not 0 < self.small_min_bytes < self.small_max_bytes <= self.large_max_bytes:
            raise ValueError("file sizes must satisfy 0 < small_min < small_max <= large_max")

    def sample(self, rng: np.random.Generator) -> int:
        if rng.random() < self.small_fraction:
            return int(rng.integers(self.small_min_bytes, self.small_max_bytes))
        return int(rng.integers(self.small_max_bytes, self.large_max_bytes, endpoint=True))


@dataclass(frozen=True)
class PlantedSpec:
    """Disjoint primer groups; every chunk collides only inside its group."""

    group_count: int = 5
    primers_per_group: int = 40
    chunks_per_group: int = 400
    primers_per_chunk: int = 12
    chunks_per_file: int = 2

    def __post_init__(self):
        for name in ("group_count", "primers_per_group", "chunks_per_group", "chunks_per_file"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1")
        if not 0 <= self.primers_per_chunk <= self.primers_per_group:
            raise ValueError("primers_per_chunk must be in [0, primers_per_group]")

    @property
    def chunk_count(self) -> int:
        return self.group_count * self.chunks_per_group


@dataclass(frozen=True)
class Workload:
    mode: str = MODE_RANDOM
    seed: int = 0
    total_bytes: int = 512 * KB
    distribution: FileSizeDistribution = field(default_factory=FileSizeDistribution)
    planted: Optional[PlantedSpec] = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"Unknown workload mode: {self.mode}")
        if self.total_bytes < 0:
            raise ValueError("total_bytes must be non-negative")
        if self.mode == MODE_PLANTED and self.planted is None:
            object.__setattr__(self, "planted", PlantedSpec())


@dataclass(frozen=True)
class WorkloadFile:
    file_id: int
    data: bytes

    @property
    def byte_len(self) -> int:
        return len(self.data)


def generate_files(workload: Workload) -> List[WorkloadFile]:
    """
    Draw files until their sizes add up to total_bytes.

    Sizes and contents come from one PCG64 stream seeded with workload.seed;
    the last file is cut so the total matches exactly.
    """
    rng = np.random.Generator(np.random.PCG64(workload.seed))
    files = []
    remaining = workload.total_bytes
    while remaining > 0:
        size = min(workload.distribution.sample(rng), remaining)
        files.append(WorkloadFile(file_id=len(files), data=rng.bytes(size)))
        remaining -= size
    logger.info("Generated %d files, %d bytes (seed=%d)", len(files), workload.total_bytes, workload.seed)
    return files


def planted_chunks(workload: Workload, library_size: int, chunk_bytes: int) -> List[Chunk]:
    """
    Build chunks whose collision sets are planted inside disjoint primer groups.

    Group g owns primers perm[g*P:(g+1)*P] of a seeded permutation of the
    library ids. Chunk ids are interleaved across groups, so chunk_id % G is
    the group; each file holds chunks_per_file consecutive chunks of a group.

    Args:
        workload: Workload in planted mode
        library_size: Primers in the library
        chunk_bytes: Size of every chunk

    Returns:
        Chunks ordered by id

    Raises:
        ValueError: the groups do not fit the library
    """
    spec = workload.planted or PlantedSpec()
    need = spec.group_count * spec.primers_per_group
    if need > library_size:
        raise ValueError(f"planted groups need {need} primers, library has {library_size}")
    if chunk_bytes <= 0:
        raise ValueError("chunk_bytes must be positive")

    rng = np.random.Generator(np.random.PCG64(workload.seed))
    perm = rng.permutation(library_size)
    groups = [perm[g * spec.primers_per_group:(g + 1) * spec.primers_per_group]
              for g in range(spec.group_count)]
    files_per_group = -(-spec.chunks_per_group // spec.chunks_per_file)

    chunks = []
    for k in range(spec.chunks_per_group):
        for g, primers in enumerate(groups):
            chunk_id = k * spec.group_count + g
            file_id = g * files_per_group + k // spec.chunks_per_file
            picked = rng.choice(primers, size=spec.primers_per_chunk, replace=False)
            chunks.append(Chunk(
                chunk_id=chunk_id,
                file_id=file_id,
                byte_len=chunk_bytes,
                collisions=CollisionSet.from_ids(library_size, picked),
            ))
    logger.info("Planted %d chunks in %d disjoint groups of %d primers",
                len(chunks), spec.group_count, spec.primers_per_group)
    return chunks
