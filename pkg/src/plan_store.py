"""Plan, report and collision-set persistence."""

import json
import logging
import os
import struct
import tempfile
from abc import ABC, abstractmethod
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Tuple, Union

from src.alloc import AllocationPlan, Chunk, SealedTube
from src.capacity import CapacityParams
from src.collision import CollisionSet
from src.errors import FormatError, IoFailure

logger = logging.getLogger(__name__)

PLAN_SCHEMA = "plan v1"
PLAN_FILE = "plan.json"
REPORT_FILE = "report.json"
TIMINGS_FILE = "timings.json"
SWEEP_FILE = "sweep.csv"

CSET_MAGIC = b"CSET v1\n"
_CSET_HEADER = struct.Struct("<II")
_CSET_RECORD = struct.Struct("<III")


def atomic_write(path: Union[str, Path], data: Union[str, bytes]) -> None:
    """
    Write a file through a temporary sibling and os.replace.

    Raises:
        IoFailure: the file could not be written
    """
    path = Path(path)
    payload = data.encode("utf-8") if isinstance(data, str) else data
    tmp = None
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
        with os.fdopen(fd, "wb") as f:
            f.write(payload)
        os.replace(tmp, path)
    except OSError as e:
        if tmp is not None and os.path.exists(tmp):
            os.unlink(tmp)
        raise IoFailure(f"cannot write {path}: {e}") from e


def dump_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _read_json(path: Path) -> Any:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise IoFailure(f"cannot read {path}: {e}") from e
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise FormatError(f"{path.name}: {e.msg}", line=e.lineno) from e


# ---------------------------------------------------------------------------
# Plan encoding

def params_to_dict(params: CapacityParams) -> Dict[str, Any]:
    return {
        'payload_len': params.payload_len,
        'density': str(params.density),
        'parallel_factor': params.parallel_factor,
        'library_size': params.library_size,
    }


def params_from_dict(obj: Dict[str, Any]) -> CapacityParams:
    return CapacityParams(
        payload_len=obj['payload_len'],
        density=Fraction(obj['density']),
        parallel_factor=obj['parallel_factor'],
        library_size=obj['library_size'],
    )


def plan_to_dict(plan: AllocationPlan) -> Dict[str, Any]:
    """Encode a plan as a `plan v1` JSON object."""
    tubes = []
    for tube in plan.tubes:
        tubes.append({
            'tube_id': tube.tube_id,
            'chunks': tube.chunks,
            'usable_primers': tube.usable_primers,
            'capacity_bytes': tube.capacity_bytes,
            'total_bytes': tube.total_bytes,
            'collided': tube.collided.ids(),
            'pair_loads': [[p, load] for p, load in sorted(tube.pair_loads.items())],
            'files': [
                {'file_id': f, 'pairs': [{'pair_id': p, 'chunks': ids} for p, ids in pairs]}
                for f, pairs in sorted(tube.pair_assignments.items())
            ],
        })
    return {
        'schema': PLAN_SCHEMA,
        'allocator': plan.allocator,
        'params': params_to_dict(plan.params),
        'k_seq_limit': plan.k_seq_limit,
        'objective': plan.objective,
        'quarantined': plan.quarantined,
        'tubes': tubes,
    }


def plan_from_dict(obj: Dict[str, Any]) -> AllocationPlan:
    """
    Decode a `plan v1` object.

    Raises:
        FormatError: wrong schema, missing fields, or inconsistent values
    """
    if not isinstance(obj, dict) or obj.get('schema') != PLAN_SCHEMA:
        raise FormatError(f"not a {PLAN_SCHEMA} document")
    try:
        params = params_from_dict(obj['params'])
        width = params.library_size
        plan = AllocationPlan(
            allocator=obj['allocator'],
            params=params,
            k_seq_limit=obj['k_seq_limit'],
            quarantined=list(obj['quarantined']),
        )
        for t in obj['tubes']:
            collided = CollisionSet.from_ids(width, t['collided'])
            if t['usable_primers'] != width - collided.popcount:
                raise FormatError(f"tube {t['tube_id']}: usable_primers disagrees with collided set")
            plan.tubes.append(SealedTube(
                tube_id=t['tube_id'],
                chunks=list(t['chunks']),
                usable_primers=t['usable_primers'],
                pair_assignments={
                    f['file_id']: [(p['pair_id'], list(p['chunks'])) for p in f['pairs']]
                    for f in t['files']
                },
                capacity_bytes=t['capacity_bytes'],
                collided=collided,
                total_bytes=t['total_bytes'],
                pair_loads={p: load for p, load in t['pair_loads']},
            ))
    except FormatError:
        raise
    except (KeyError, TypeError, ValueError) as e:
        raise FormatError(f"malformed plan: {e!r}") from e
    if plan.objective != obj.get('objective'):
        raise FormatError(f"objective {obj.get('objective')} != recomputed {plan.objective}")
    return plan


# ---------------------------------------------------------------------------
# Collision-set dump

def serialize_collision_sets(chunks: List[Chunk], library_size: int) -> bytes:
    """`CSET v1` binary: header, then (chunk_id, file_id, byte_len, bitvec) per chunk."""
    parts = [CSET_MAGIC, _CSET_HEADER.pack(library_size, len(chunks))]
    for c in chunks:
        if c.collisions.width != library_size:
            raise ValueError(f"chunk {c.chunk_id}: collision width {c.collisions.width} != {library_size}")
        parts.append(_CSET_RECORD.pack(c.chunk_id, c.file_id, c.byte_len))
        parts.append(c.collisions.to_bytes())
    return b"".join(parts)


def parse_collision_sets(data: bytes) -> Tuple[int, List[Chunk]]:
    """
    Parse a `CSET v1` dump.

    Returns:
        (library_size, chunks)

    Raises:
        FormatError: bad magic, truncated records or trailing bytes
    """
    if not data.startswith(CSET_MAGIC):
        raise FormatError("missing CSET v1 magic")
    pos = len(CSET_MAGIC)
    if len(data) < pos + _CSET_HEADER.size:
        raise FormatError("truncated CSET header")
    library_size, count = _CSET_HEADER.unpack_from(data, pos)
    pos += _CSET_HEADER.size
    vec_len = (library_size + 7) // 8
    record_len = _CSET_RECORD.size + vec_len
    if len(data) != pos + count * record_len:
        raise FormatError(f"expected {count} records of {record_len} bytes")
    chunks = []
    for _ in range(count):
        chunk_id, file_id, byte_len = _CSET_RECORD.unpack_from(data, pos)
        pos += _CSET_RECORD.size
        try:
            collisions = CollisionSet.from_bytes(library_size, data[pos:pos + vec_len])
            chunks.append(Chunk(chunk_id, file_id, byte_len, collisions))
        except ValueError as e:
            raise FormatError(f"chunk {chunk_id}: {e}") from e
        pos += vec_len
    return library_size, chunks


def save_collision_sets(path: Union[str, Path], chunks: List[Chunk], library_size: int) -> None:
    atomic_write(path, serialize_collision_sets(chunks, library_size))
    logger.info("Saved %d collision sets to %s", len(chunks), path)


def load_collision_sets(path: Union[str, Path]) -> Tuple[int, List[Chunk]]:
    try:
        data = Path(path).read_bytes()
    except OSError as e:
        raise IoFailure(f"cannot read {path}: {e}") from e
    return parse_collision_sets(data)


# ---------------------------------------------------------------------------
# Stores

class PlanStoreInterface(ABC):
    """Abstract base class for run artifact stores."""

    @abstractmethod
    def save_plan(self, plan: AllocationPlan) -> Path:
        """Persist a plan."""
        pass

    @abstractmethod
    def load_plan(self) -> AllocationPlan:
        """Load the stored plan."""
        pass

    @abstractmethod
    def save_report(self, report: Dict[str, Any]) -> Path:
        """Persist a report."""
        pass

    @abstractmethod
    def load_report(self) -> Dict[str, Any]:
        """Load the stored report."""
        pass


class PlanStore(PlanStoreInterface):
    """Run artifacts as files in one output directory."""

    def __init__(self, directory: Union[str, Path] = "./out"):
        """
        Initialize the store.

        Args:
            directory: Output directory, created on first write
        """
        self.directory = Path(directory)

    @property
    def plan_path(self) -> Path:
        return self.directory / PLAN_FILE

    @property
    def report_path(self) -> Path:
        return self.directory / REPORT_FILE

    def save_plan(self, plan: AllocationPlan) -> Path:
        atomic_write(self.plan_path, dump_json(plan_to_dict(plan)))
        logger.info("Wrote %s", self.plan_path)
        return self.plan_path

    def load_plan(self) -> AllocationPlan:
        return plan_from_dict(_read_json(self.plan_path))

    def save_report(self, report: Dict[str, Any]) -> Path:
        atomic_write(self.report_path, dump_json(report))
        logger.info("Wrote %s", self.report_path)
        return self.report_path

    def load_report(self) -> Dict[str, Any]:
        return _read_json(self.report_path)

    def save_timings(self, timings: Dict[str, Any]) -> Path:
        path = self.directory / TIMINGS_FILE
        atomic_write(path, dump_json(timings))
        return path

    def save_sweep(self, rows: List[Dict[str, Any]]) -> Path:
        from src.report import write_sweep_csv

        path = self.directory / SWEEP_FILE
        write_sweep_csv(rows, path)
        return path

    def save_collision_sets(self, chunks: List[Chunk], library_size: int, name: str = "chunks.cset") -> Path:
        path = self.directory / name
        save_collision_sets(path, chunks, library_size)
        return path


def load_plan_file(path: Union[str, Path]) -> AllocationPlan:
    """Load a plan from an explicit path."""
    return plan_from_dict(_read_json(Path(path)))
