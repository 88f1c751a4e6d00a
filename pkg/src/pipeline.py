"""Storage pipeline orchestrator: encode, collide, allocate, report."""

import logging
import os
import re
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import cached_property
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import yaml
from dotenv import load_dotenv

from src.alloc import ALLOCATOR_AWARE, AllocConfig, AllocationPlan, Chunk, run_allocator
from src.capacity import CapacityParams, DEFAULT_PARALLEL_FACTOR
from src.chunker import DataChunk, DataChunker
from src.codec import (
    DEFAULT_CAC_CONTEXT,
    DEFAULT_PAYLOAD_LEN,
    CacLiteCodec,
    CodecFactory,
    PayloadFrame,
    SchemeCodec,
    frame_payloads,
    rs_decode,
    rs_encode,
    unframe_payloads,
    verify_tables,
)
from src.collision import (
    CollisionIndex,
    CollisionParams,
    CollisionSet,
    build_collision_index,
    chunk_collision_set,
)
from src.primerlib import PrimerLibrary, generate_library, load_library
from src.report import DEFAULT_RETRIEVAL_SAMPLE, build_report, fixed
from src.workload import (
    MODE_PLANTED,
    FileSizeDistribution,
    PlantedSpec,
    Workload,
    generate_files,
    planted_chunks,
)

logger = logging.getLogger(__name__)

KB = 1024
DEFAULT_SWEEP_CHUNK_SIZES = [1 * KB, 4 * KB, 16 * KB, 256 * KB, 1024 * KB]
DESK_LIBRARY_SIZE = 2_800


@dataclass
class RunResult:
    """Everything one run produced; timings stay outside the report."""

    plan: AllocationPlan
    report: Dict[str, Any]
    chunks: List[Chunk]
    timings: Dict[str, float] = field(default_factory=dict)


# Per-process state for the collision worker pool.
_worker: Dict[str, Any] = {}


def _init_collision_worker(library: PrimerLibrary, params: CollisionParams, scheme: str,
                           context_window: int, payload_len: int, cac_repair: bool) -> None:
    _worker['index'] = build_collision_index(library, params)
    _worker['codec'] = CodecFactory.create_codec(
        scheme,
        context_window=context_window,
        primer_index=_worker['index'] if cac_repair else None,
    )
    _worker['payload_len'] = payload_len


def _collide_in_worker(chunk: DataChunk) -> bytes:
    seq = _worker['codec'].encode(rs_encode(chunk.data))
    frames = frame_payloads(seq, chunk.chunk_id, _worker['payload_len'])
    return chunk_collision_set(frames, _worker['index']).to_bytes()


class StoragePipeline:
    """Runs chunks through encoding, collision detection and allocation."""

    def __init__(
        self,
        library: PrimerLibrary,
        codec: SchemeCodec,
        collision_params: CollisionParams = CollisionParams(),
        payload_len: int = DEFAULT_PAYLOAD_LEN,
        parallel_factor: int = DEFAULT_PARALLEL_FACTOR,
        chunk_bytes: int = 4096,
        k_seq_limit: int = 5,
        workers: int = 1,
        retrieval_sample: int = DEFAULT_RETRIEVAL_SAMPLE,
        sample_seed: int = 0,
        reference_pair_bytes: Optional[int] = None,
        config: Optional[Dict[str, Any]] = None
    ):
        """
        Initialize the pipeline with injected components.

        Args:
            library: Primer library (collision universe and tube tags)
            codec: Encoding scheme codec
            collision_params: Collision definition
            payload_len: Bases per payload
            parallel_factor: Strands per primer pair
            chunk_bytes: Default chunk size for random workloads
            k_seq_limit: Sequencing limit reported per file
            workers: Processes for the collision stage (1 = in-process)
            retrieval_sample: Files sampled for retrieval cost
            sample_seed: Seed of that sample
            reference_pair_bytes: Reference per-pair figure for the report
            config: Optional configuration dictionary
        """
        self.library = library
        self.codec = codec
        self.collision_params = collision_params
        self.payload_len = payload_len
        self.workers = max(1, workers)
        self.retrieval_sample = retrieval_sample
        self.sample_seed = sample_seed
        self.reference_pair_bytes = reference_pair_bytes
        self.config = config or {}
        self.alloc_config = AllocConfig(
            params=CapacityParams(
                payload_len=payload_len,
                density=codec.density,
                parallel_factor=parallel_factor,
                library_size=library.size,
            ),
            chunk_bytes=chunk_bytes,
            k_seq_limit=k_seq_limit,
        )

        self.metrics = {
            'run_count': 0,
            'chunks_collided': 0,
            'total_collide_time': 0.0,
            'total_allocate_time': 0.0,
            'last_run_time': 0.0,
        }

    @cached_property
    def index(self) -> CollisionIndex:
        shared = getattr(self.codec, 'primer_index', None)
        if shared is not None and shared.library is self.library and shared.params == self.collision_params:
            return shared
        return build_collision_index(self.library, self.collision_params)

    def encode_chunk(self, chunk: DataChunk) -> Tuple[List[PayloadFrame], int]:
        """
        Write path for one chunk: RS outer code, scheme encoding, framing.

        Returns:
            (payload frames, encoded sequence length before padding)
        """
        seq = self.codec.encode(rs_encode(chunk.data))
        return frame_payloads(seq, chunk.chunk_id, self.payload_len), len(seq)

    def recover_chunk(self, frames: List[PayloadFrame], encoded_len: int) -> bytes:
        """Inverse of encode_chunk."""
        seq = unframe_payloads(frames, encoded_len)
        return rs_decode(self.codec.decode(seq))

    def collide(self, data_chunks: Sequence[DataChunk]) -> List[Chunk]:
        """
        Collision sets for data chunks, in input order.

        With workers > 1 chunks are spread over a process pool; results are
        gathered in input order so the output does not depend on scheduling.
        """
        start = time.perf_counter()
        width = self.library.size
        if self.workers > 1 and len(data_chunks) > 1:
            with ProcessPoolExecutor(
                max_workers=self.workers,
                initializer=_init_collision_worker,
                initargs=(self.library, self.collision_params, self.codec.scheme.id.value,
                          getattr(self.codec, 'context_window', DEFAULT_CAC_CONTEXT), self.payload_len,
                          getattr(self.codec, 'primer_index', None) is not None),
            ) as pool:
                chunksize = max(1, len(data_chunks) // (4 * self.workers))
                sets = [CollisionSet.from_bytes(width, raw)
                        for raw in pool.map(_collide_in_worker, data_chunks, chunksize=chunksize)]
        else:
            sets = [chunk_collision_set(self.encode_chunk(c)[0], self.index) for c in data_chunks]

        chunks = [
            Chunk(chunk_id=c.chunk_id, file_id=c.file_id, byte_len=c.byte_len, collisions=s)
            for c, s in zip(data_chunks, sets)
        ]
        elapsed = time.perf_counter() - start
        self.metrics['chunks_collided'] += len(chunks)
        self.metrics['total_collide_time'] += elapsed
        logger.info("Collided %d chunks against %d primers in %.2fs", len(chunks), width, elapsed)
        return chunks

    def allocate(self, chunks: List[Chunk], allocator: str = ALLOCATOR_AWARE,
                 chunk_bytes: Optional[int] = None) -> AllocationPlan:
        cfg = self.alloc_config
        if chunk_bytes is not None and chunk_bytes != cfg.chunk_bytes:
            cfg = replace(cfg, chunk_bytes=chunk_bytes)
        start = time.perf_counter()
        plan = run_allocator(allocator, chunks, cfg)
        self.metrics['total_allocate_time'] += time.perf_counter() - start
        return plan

    def make_chunks(self, workload: Workload, chunk_bytes: int) -> Tuple[List[Chunk], Dict[str, float]]:
        timings: Dict[str, float] = {}
        if workload.mode == MODE_PLANTED:
            start = time.perf_counter()
            chunks = planted_chunks(workload, self.library.size, chunk_bytes)
            timings['workload_s'] = time.perf_counter() - start
            return chunks, timings

        start = time.perf_counter()
        files = generate_files(workload)
        data_chunks = DataChunker(chunk_bytes).chunk_files(files)
        timings['workload_s'] = time.perf_counter() - start
        start = time.perf_counter()
        chunks = self.collide(data_chunks)
        timings['collide_s'] = time.perf_counter() - start
        return chunks, timings

    def run(self, workload: Workload, allocator: str = ALLOCATOR_AWARE,
            chunk_bytes: Optional[int] = None) -> RunResult:
        """
        End-to-end run: workload, chunks, collision sets, allocation, report.

        Args:
            workload: Workload description
            allocator: 'aware', 'sequential' or 'upgma'
            chunk_bytes: Chunk size (defaults to the configured size)

        Returns:
            RunResult with plan, report, chunks and stage timings
        """
        chunk_bytes = chunk_bytes or self.alloc_config.chunk_bytes
        started = time.perf_counter()
        chunks, timings = self.make_chunks(workload, chunk_bytes)

        start = time.perf_counter()
        plan = self.allocate(chunks, allocator, chunk_bytes)
        timings['allocate_s'] = time.perf_counter() - start

        report = build_report(plan, self.retrieval_sample, self.sample_seed, self.reference_pair_bytes)
        timings['total_s'] = time.perf_counter() - started
        if timings.get('collide_s'):
            timings['collide_chunks_per_s'] = len(chunks) / timings['collide_s']

        self.metrics['run_count'] += 1
        self.metrics['last_run_time'] = timings['total_s']
        return RunResult(plan=plan, report=report, chunks=chunks, timings=timings)

    def sweep(self, workload: Workload, chunk_sizes: Optional[Sequence[int]] = None,
              allocator: str = ALLOCATOR_AWARE) -> List[Dict[str, Any]]:
        """
        Run the pipeline once per chunk size and collect trade-off rows.

        Returns:
            Rows with chunk_bytes, avg_collided_primers_per_chunk,
            avg_tube_capacity, avg_sequencings_per_file and wall_time
        """
        rows = []
        for size in chunk_sizes or DEFAULT_SWEEP_CHUNK_SIZES:
            result = self.run(workload, allocator, chunk_bytes=size)
            per_chunk = Fraction(sum(c.collisions.popcount for c in result.chunks), len(result.chunks)) \
                if result.chunks else Fraction(0)
            rows.append({
                'chunk_bytes': size,
                'avg_collided_primers_per_chunk': fixed(per_chunk),
                'avg_tube_capacity': result.report['avg_capacity_bytes'],
                'avg_sequencings_per_file': result.report['retrieval']['avg_sequencings'],
                'wall_time': f"{result.timings['total_s']:.3f}",
            })
            logger.info("Sweep %d bytes: %s", size, rows[-1])
        return rows

    def get_performance_metrics(self) -> Dict[str, Any]:
        """
        Get detailed performance metrics.

        Returns:
            Dictionary with stage timing totals and collision throughput
        """
        collide_time = self.metrics['total_collide_time']
        return {
            'run_count': self.metrics['run_count'],
            'chunks_collided': self.metrics['chunks_collided'],
            'total_collide_time_ms': collide_time * 1000,
            'total_allocate_time_ms': self.metrics['total_allocate_time'] * 1000,
            'last_run_time_ms': self.metrics['last_run_time'] * 1000,
            'collide_chunks_per_s': self.metrics['chunks_collided'] / collide_time if collide_time else 0.0,
        }


def load_config(config_path: str) -> Dict[str, Any]:
    """
    Load configuration from YAML file with environment variable substitution.

    A `.env` file, if present, is loaded first.

    Args:
        config_path: Path to configuration file

    Returns:
        Configuration dictionary
    """
    load_dotenv()
    with open(config_path, 'r') as f:
        config_text = f.read()

    env_pattern = re.compile(r'\$\{(\w+)\}')
    config_text = env_pattern.sub(
        lambda m: os.environ.get(m.group(1), m.group(0)),
        config_text
    )
    return yaml.safe_load(config_text) or {}


def library_from_config(config: Dict[str, Any]) -> PrimerLibrary:
    """Load the configured primer library file, or generate it when no file exists."""
    primers = config.get('primers', {})
    path = primers.get('path')
    if path and Path(path).exists():
        return load_library(path)
    return generate_library(
        seed=primers.get('seed', 1),
        size=primers.get('size', DESK_LIBRARY_SIZE),
        primer_len=primers.get('primer_len', 20),
    )


def workload_from_config(config: Dict[str, Any]) -> Workload:
    wl = config.get('workload', {})
    mix = wl.get('file_sizes', {})
    planted = wl.get('planted')
    return Workload(
        mode=wl.get('mode', 'random'),
        seed=wl.get('seed', 0),
        total_bytes=wl.get('total_bytes', 512 * KB),
        distribution=FileSizeDistribution(**mix),
        planted=PlantedSpec(**planted) if planted else None,
    )


def create_pipeline_from_config(
    config: Dict[str, Any],
    library: Optional[PrimerLibrary] = None
) -> StoragePipeline:
    """
    Create a pipeline instance from a configuration dictionary.

    Args:
        config: Configuration with primers, codec, collision, capacity,
            allocation and report sections
        library: Primer library to use instead of the configured one

    Returns:
        Configured StoragePipeline
    """
    codec_config = config.get('codec', {})
    verify_tables(codec_config.get('tables_dir'))
    codec = CodecFactory.create_codec(
        codec_config.get('scheme', 'rotation'),
        context_window=codec_config.get('cac_context_window', DEFAULT_CAC_CONTEXT),
    )

    collision_config = config.get('collision', {})
    collision_params = CollisionParams(
        window_len=collision_config.get('window_len', 12),
        max_edits=collision_config.get('max_edits', 2),
        reverse_complement=collision_config.get('reverse_complement', False),
    )

    library = library or library_from_config(config)
    if isinstance(codec, CacLiteCodec) and codec_config.get('cac_primer_repair', True):
        codec.primer_index = build_collision_index(library, collision_params)

    capacity_config = config.get('capacity', {})
    alloc_config = config.get('allocation', {})
    report_config = config.get('report', {})

    return StoragePipeline(
        library=library,
        codec=codec,
        collision_params=collision_params,
        payload_len=codec_config.get('payload_len', DEFAULT_PAYLOAD_LEN),
        parallel_factor=capacity_config.get('parallel_factor', DEFAULT_PARALLEL_FACTOR),
        chunk_bytes=alloc_config.get('chunk_bytes', 4096),
        k_seq_limit=alloc_config.get('k_seq_limit', 5),
        workers=collision_config.get('workers', 1),
        retrieval_sample=report_config.get('retrieval_sample', DEFAULT_RETRIEVAL_SAMPLE),
        sample_seed=report_config.get('sample_seed', 0),
        reference_pair_bytes=capacity_config.get('reference_pair_capacity_bytes'),
        config=config
    )


def create_pipeline_from_yaml(config_path: str = "config/config.yaml") -> StoragePipeline:
    """
    Create a pipeline instance from a YAML configuration file.

    Example:
        >>> pipeline = create_pipeline_from_yaml("config/config.yaml")
        >>> result = pipeline.run(workload_from_config(pipeline.config))
    """
    config = load_config(config_path)
    return create_pipeline_from_config(config)
