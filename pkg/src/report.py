"""Run reports: aggregates over a plan, rendering, schema checks and sweep CSV."""

import csv
import io
import logging
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np

from src.alloc import AllocationPlan, k_limit_violations, retrieval_cost
from src.capacity import pair_capacity_bytes
from src.errors import FormatError

logger = logging.getLogger(__name__)

REPORT_SCHEMA = "report v1"
DEFAULT_RETRIEVAL_SAMPLE = 1000
DEVIATION_WARN = Fraction(5, 100)

SWEEP_COLUMNS = [
    "chunk_bytes",
    "avg_collided_primers_per_chunk",
    "avg_tube_capacity",
    "avg_sequencings_per_file",
    "wall_time",
]

_TUBE_FIELDS = {
    'tube_id': int,
    'chunk_count': int,
    'usable_primers': int,
    'collided_primers': int,
    'capacity_bytes': int,
    'total_bytes': int,
    'pairs_used': int,
}

_REPORT_FIELDS = {
    'schema': str,
    'allocator': str,
    'library_size': int,
    'pair_capacity_bytes': int,
    'tube_count': int,
    'objective': int,
    'quarantined': list,
    'avg_usable_primers': str,
    'avg_capacity_bytes': str,
    'avg_collided_primers': str,
    'k_seq_limit': int,
    'k_limit_violations': list,
    'retrieval': dict,
    'tubes': list,
}


def fixed(value: Fraction, digits: int = 3) -> str:
    """Render an exact rational at fixed precision."""
    return f"{Fraction(value):.{digits}f}"


def _average(values: List[int]) -> Fraction:
    return Fraction(sum(values), len(values)) if values else Fraction(0)


def sample_files(file_ids: List[int], sample_size: int, seed: int) -> List[int]:
    """All files when few enough, otherwise a seeded sample without replacement."""
    if len(file_ids) <= sample_size:
        return list(file_ids)
    rng = np.random.Generator(np.random.PCG64(seed))
    picked = rng.choice(len(file_ids), size=sample_size, replace=False)
    return sorted(file_ids[i] for i in picked)


def build_report(
    plan: AllocationPlan,
    sample_size: int = DEFAULT_RETRIEVAL_SAMPLE,
    sample_seed: int = 0,
    reference_pair_bytes: Optional[int] = None
) -> Dict[str, Any]:
    """
    Aggregate a plan into a `report v1` object.

    Every figure is recomputable from the plan alone; wall-clock times are
    not part of the report.

    Args:
        plan: Allocation plan
        sample_size: Files sampled for retrieval cost
        sample_seed: Seed of the file sample
        reference_pair_bytes: Per-pair figure to compare against, or None

    Returns:
        Report dictionary
    """
    tubes = [
        {
            'tube_id': t.tube_id,
            'chunk_count': len(t.chunks),
            'usable_primers': t.usable_primers,
            'collided_primers': t.collided_count,
            'capacity_bytes': t.capacity_bytes,
            'total_bytes': t.total_bytes,
            'pairs_used': t.pairs_used,
        }
        for t in plan.tubes
    ]
    sampled = sample_files(plan.file_ids(), sample_size, sample_seed)
    costs = [retrieval_cost(plan, f) for f in sampled]
    violations = k_limit_violations(plan)
    if violations:
        logger.warning("%d files exceed the sequencing limit of %d", len(violations), plan.k_seq_limit)

    pair_bytes = pair_capacity_bytes(plan.params)
    report = {
        'schema': REPORT_SCHEMA,
        'allocator': plan.allocator,
        'library_size': plan.library_size,
        'pair_capacity_bytes': pair_bytes,
        'tube_count': len(tubes),
        'objective': plan.objective,
        'quarantined': list(plan.quarantined),
        'avg_usable_primers': fixed(_average([t['usable_primers'] for t in tubes])),
        'avg_capacity_bytes': fixed(_average([t['capacity_bytes'] for t in tubes])),
        'avg_collided_primers': fixed(_average([t['collided_primers'] for t in tubes])),
        'k_seq_limit': plan.k_seq_limit,
        'k_limit_violations': violations,
        'retrieval': {
            'sample_size': sample_size,
            'sample_seed': sample_seed,
            'files_sampled': len(costs),
            'avg_sequencings': fixed(_average(costs)),
            'max_sequencings': max(costs, default=0),
        },
        'tubes': tubes,
    }
    if reference_pair_bytes:
        deviation = Fraction(pair_bytes - reference_pair_bytes, reference_pair_bytes)
        report['reference_pair_capacity_bytes'] = reference_pair_bytes
        report['pair_capacity_deviation'] = fixed(deviation)
        if abs(deviation) > DEVIATION_WARN:
            logger.warning("Pair capacity %d bytes deviates %s from the reference %d",
                           pair_bytes, fixed(deviation), reference_pair_bytes)
    return report


def validate_report(obj: Any) -> None:
    """
    Check an object against the `report v1` layout.

    Raises:
        FormatError: missing field, wrong type or wrong schema tag
    """
    if not isinstance(obj, dict):
        raise FormatError("report must be a JSON object")
    for key, kind in _REPORT_FIELDS.items():
        if key not in obj:
            raise FormatError(f"report is missing '{key}'")
        if not isinstance(obj[key], kind) or (kind is int and isinstance(obj[key], bool)):
            raise FormatError(f"report field '{key}' must be {kind.__name__}")
    if obj['schema'] != REPORT_SCHEMA:
        raise FormatError(f"unsupported report schema {obj['schema']!r}")
    for tube in obj['tubes']:
        if not isinstance(tube, dict):
            raise FormatError("tube entries must be objects")
        for key, kind in _TUBE_FIELDS.items():
            if not isinstance(tube.get(key), kind):
                raise FormatError(f"tube field '{key}' must be {kind.__name__}")
    if obj['tube_count'] != len(obj['tubes']):
        raise FormatError("tube_count disagrees with the tube list")
    for key in ('sample_size', 'sample_seed', 'files_sampled', 'max_sequencings'):
        if not isinstance(obj['retrieval'].get(key), int):
            raise FormatError(f"retrieval field '{key}' must be int")
    if not isinstance(obj['retrieval'].get('avg_sequencings'), str):
        raise FormatError("retrieval field 'avg_sequencings' must be str")


def verify_report(plan: AllocationPlan, report: Dict[str, Any]) -> List[str]:
    """
    Recompute a report from its plan.

    Returns:
        Keys whose stored value differs from the recomputation (empty when consistent)
    """
    retrieval = report.get('retrieval', {})
    fresh = build_report(
        plan,
        sample_size=retrieval.get('sample_size', DEFAULT_RETRIEVAL_SAMPLE),
        sample_seed=retrieval.get('sample_seed', 0),
        reference_pair_bytes=report.get('reference_pair_capacity_bytes'),
    )
    keys = sorted(set(fresh) | set(report))
    return [k for k in keys if fresh.get(k) != report.get(k)]


def render_summary(report: Dict[str, Any]) -> str:
    """Human-readable summary of a report."""
    retrieval = report['retrieval']
    lines = [
        f"Allocator:              {report['allocator']}",
        f"Library size:           {report['library_size']}",
        f"Tubes:                  {report['tube_count']}",
        f"Objective:              {report['objective']} collided primers",
        f"Quarantined chunks:     {len(report['quarantined'])}",
        f"Avg usable primers:     {report['avg_usable_primers']}",
        f"Avg collided primers:   {report['avg_collided_primers']}",
        f"Avg tube capacity:      {report['avg_capacity_bytes']} bytes",
        f"Pair capacity:          {report['pair_capacity_bytes']} bytes",
        f"Avg sequencings/file:   {retrieval['avg_sequencings']} "
        f"(max {retrieval['max_sequencings']}, {retrieval['files_sampled']} files)",
        f"Files over K={report['k_seq_limit']}:          {len(report['k_limit_violations'])}",
    ]
    if 'pair_capacity_deviation' in report:
        lines.append(
            f"Reference pair bytes:   {report['reference_pair_capacity_bytes']} "
            f"(deviation {report['pair_capacity_deviation']})"
        )
    if report['tubes']:
        lines.append("")
        lines.append("tube  chunks  usable  collided  capacity_bytes  total_bytes  pairs")
        for t in report['tubes']:
            lines.append(
                f"{t['tube_id']:>4}  {t['chunk_count']:>6}  {t['usable_primers']:>6}  "
                f"{t['collided_primers']:>8}  {t['capacity_bytes']:>14}  {t['total_bytes']:>11}  {t['pairs_used']:>5}"
            )
    return "\n".join(lines)


def sweep_csv_text(rows: List[Dict[str, Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=SWEEP_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: row[k] for k in SWEEP_COLUMNS})
    return buffer.getvalue()


def write_sweep_csv(rows: List[Dict[str, Any]], path: Union[str, Path]) -> None:
    """Write sweep rows as CSV with the fixed column order."""
    from src.plan_store import atomic_write

    atomic_write(path, sweep_csv_text(rows))
    logger.info("Wrote %d sweep rows to %s", len(rows), path)
