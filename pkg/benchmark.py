#!/usr/bin/env python3
"""Allocation benchmark script.

Acceptance timings that are too slow for the unit suite: indexed detector
against the oracle, allocation scaling from 1,000 to 2,000 planted chunks,
the planted 5-group instance, a desk-scale end-to-end run with a
chunk-size sweep, and a small-file retrieval check. Each section prints
PASS or FAIL.
"""

import statistics
import time
from collections import defaultdict
from fractions import Fraction

import numpy as np

from src.alloc import AllocConfig, allocate, allocate_sequential, allocate_upgma, retrieval_cost
from src.capacity import CapacityParams, pair_capacity_bytes
from src.collision import CollisionIndex, CollisionParams, collides_oracle
from src.pipeline import DEFAULT_SWEEP_CHUNK_SIZES, create_pipeline_from_config, load_config, workload_from_config
from src.primerlib import generate_library
from src.workload import KB, MODE_PLANTED, MODE_RANDOM, PlantedSpec, Workload, planted_chunks

LIBRARY_SIZE = 440
CHUNK_BYTES = 4096
SCALING_RATIO_RANGE = (2.0, 8.0)
REQUIRED_GAIN = Fraction(6, 5)
DESK_TOTAL_BYTES = 8 * 1024 * 1024
SMALL_FILE_TOTAL_BYTES = 1024 * KB
SMALL_FILE_PARALLEL_FACTOR = 128


def planted_instance(chunks_per_group: int, parallel_factor: int, seed: int = 11):
    """Five disjoint 40-primer groups sized so that each group fills one tube."""
    workload = Workload(
        mode=MODE_PLANTED,
        seed=seed,
        planted=PlantedSpec(group_count=5, primers_per_group=40, chunks_per_group=chunks_per_group,
                            primers_per_chunk=12, chunks_per_file=2),
    )
    params = CapacityParams(payload_len=256, density=Fraction(1), parallel_factor=parallel_factor,
                            library_size=LIBRARY_SIZE)
    return planted_chunks(workload, LIBRARY_SIZE, CHUNK_BYTES), AllocConfig(params=params, chunk_bytes=CHUNK_BYTES)


def time_allocate(chunks, cfg, repeats: int = 3) -> float:
    """Median wall time of allocate over several runs."""
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        allocate(chunks, cfg)
        times.append(time.perf_counter() - start)
    return statistics.median(times)

def avg_usable(plan) -> Fraction:
    return Fraction(sum(t.usable_primers for t in plan.tubes), len(plan.tubes)) if plan.tubes else Fraction(0)


def random_bases(rng: np.random.Generator, n: int) -> str:
    return "".join("ACGT"[i] for i in rng.integers(0, 4, size=n))


def substitute(rng: np.random.Generator, window: str, edits: int) -> str:
    chars = list(window)
    for pos in rng.choice(len(chars), size=edits, replace=False):
        chars[pos] = "ACGT"[("ACGT".index(chars[pos]) + int(rng.integers(1, 4))) % 4]
    return "".join(chars)


def benchmark_oracle_agreement(random_pairs: int = 10_000, adversarial_pairs: int = 200) -> bool:
    """Indexed detector against the bit-parallel oracle on random and near-threshold pairs."""
    print("\nCollision detector vs oracle")
    library = generate_library(1, 200, 20)
    index = CollisionIndex(library, CollisionParams())
    rng = np.random.Generator(np.random.PCG64(2024))

    start = time.perf_counter()
    disagreements = 0
    for _ in range(random_pairs):
        pid = int(rng.integers(0, library.size))
        payload = random_bases(rng, 200)
        disagreements += index.collides(pid, payload) != collides_oracle(library[pid].bases, payload)
    for i in range(adversarial_pairs):
        pid = int(rng.integers(0, library.size))
        offset = int(rng.integers(0, 9))
        window = substitute(rng, library[pid].bases[offset:offset + 12], 2 + i % 2)
        payload = random_bases(rng, 90) + window + random_bases(rng, 98)
        disagreements += index.collides(pid, payload) != collides_oracle(library[pid].bases, payload)
    elapsed = time.perf_counter() - start

    print(f"  Pairs: {random_pairs} random + {adversarial_pairs} adversarial")
    print(f"  Disagreements: {disagreements}")
    print(f"  Time: {elapsed:.2f} s (limit 60 s)")
    passed = disagreements == 0 and elapsed < 60
    print(f"  Status: {'PASS' if passed else 'FAIL'}")
    return passed


def benchmark_scaling():
    """Allocation wall time at 1,000 and 2,000 planted chunks, five tubes either way."""
    print("\nScaling (median of 3)")
    small_chunks, small_cfg = planted_instance(chunks_per_group=200, parallel_factor=128)
    large_chunks, large_cfg = planted_instance(chunks_per_group=400, parallel_factor=256)
    t_small = time_allocate(small_chunks, small_cfg)
    t_large = time_allocate(large_chunks, large_cfg)
    ratio = t_large / t_small
    low, high = SCALING_RATIO_RANGE
    print(f"  n={len(small_chunks):>5}: {t_small:>8.2f} s")
    print(f"  n={len(large_chunks):>5}: {t_large:>8.2f} s")
    print(f"  Ratio: {ratio:.2f} (expected {low}-{high})")
    print(f"  Status: {'PASS' if low <= ratio <= high else 'FAIL'}")
    return large_chunks, large_cfg


def benchmark_planted(chunks, cfg) -> bool:
    """The 5-group planted instance against both baselines."""
    print("\nPlanted 5-group instance (2,000 x 4 KB chunks)")
    start = time.perf_counter()
    aware = allocate(chunks, cfg)
    aware_time = time.perf_counter() - start
    sequential = allocate_sequential(chunks, cfg)
    upgma = allocate_upgma(chunks, cfg)

    for plan in (aware, sequential, upgma):
        print(f"  {plan.allocator:<10} tubes={len(plan.tubes):>3}  objective={plan.objective:>5}  "
              f"avg usable={float(avg_usable(plan)):>8.2f}")

    gain = avg_usable(aware) / avg_usable(sequential)
    unions_ok = all(t.collided_count <= 40 for t in aware.tubes)
    print(f"\n  Aware / sequential avg usable primers: {float(gain):.3f} (required >= {float(REQUIRED_GAIN):.1f})")
    print(f"  Every aware tube union <= 40: {unions_ok}")
    print(f"  Aware wall time: {aware_time:.2f} s (limit 300 s)")
    passed = gain >= REQUIRED_GAIN and unions_ok and aware_time < 300
    print(f"  Status: {'PASS' if passed else 'FAIL'}")
    return passed


def non_increasing(values) -> bool:
    return all(a >= b for a, b in zip(values, values[1:]))


def benchmark_desk_run(config_path: str = "config/config.yaml", total_bytes: int = DESK_TOTAL_BYTES) -> bool:
    """Random-bytes run at desk scale: allocator ordering and chunk-size sweep."""
    print(f"\nDesk-scale run ({total_bytes // (1024 * 1024)} MB random workload)")
    config = load_config(config_path)
    workload_config = config.setdefault('workload', {})
    workload_config['mode'] = MODE_RANDOM
    workload_config['total_bytes'] = total_bytes
    pipeline = create_pipeline_from_config(config)
    workload = workload_from_config(config)

    start = time.perf_counter()
    chunks, _ = pipeline.make_chunks(workload, pipeline.alloc_config.chunk_bytes)
    print(f"  Collided {len(chunks)} chunks in {time.perf_counter() - start:.2f} s")
    plans = {name: pipeline.allocate(chunks, name) for name in ("aware", "upgma", "sequential")}
    for name, plan in plans.items():
        print(f"  {name:<10} tubes={len(plan.tubes):>3}  avg usable={float(avg_usable(plan)):>8.2f}")
    ordering_ok = avg_usable(plans['aware']) > avg_usable(plans['sequential']) \
        and avg_usable(plans['aware']) >= avg_usable(plans['upgma'])

    rows = pipeline.sweep(workload, DEFAULT_SWEEP_CHUNK_SIZES)
    for row in rows:
        print("  " + ", ".join(f"{k}={v}" for k, v in row.items()))
    collided = [Fraction(r['avg_collided_primers_per_chunk']) for r in rows]
    sequencings = [Fraction(r['avg_sequencings_per_file']) for r in rows]
    capacity = [Fraction(r['avg_tube_capacity']) for r in rows[1:]]
    sweep_ok = non_increasing(collided[::-1]) and non_increasing(sequencings) and non_increasing(capacity)
    print(f"  Sweep trends hold: {sweep_ok}")

    passed = ordering_ok and sweep_ok
    print(f"  Status: {'PASS' if passed else 'FAIL'}")
    return passed


def benchmark_small_file_retrieval(config_path: str = "config/config.yaml") -> bool:
    """Files no larger than one pair are read back with a single sequencing run."""
    print(f"\nSmall-file retrieval ({SMALL_FILE_TOTAL_BYTES // KB} KB of 1-4 KB files, "
          f"parallel factor {SMALL_FILE_PARALLEL_FACTOR})")
    config = load_config(config_path)
    config.setdefault('capacity', {})['parallel_factor'] = SMALL_FILE_PARALLEL_FACTOR
    config['workload'] = {
        'mode': MODE_RANDOM,
        'seed': 5,
        'total_bytes': SMALL_FILE_TOTAL_BYTES,
        'file_sizes': {'small_fraction': 1.0, 'small_min_bytes': KB,
                       'small_max_bytes': 4 * KB, 'large_max_bytes': 4 * KB},
    }
    pipeline = create_pipeline_from_config(config)
    workload = workload_from_config(config)
    chunks, _ = pipeline.make_chunks(workload, pipeline.alloc_config.chunk_bytes)

    file_bytes = defaultdict(int)
    for c in chunks:
        file_bytes[c.file_id] += c.byte_len
    pair_bytes = pair_capacity_bytes(pipeline.alloc_config.params)
    small_files = [f for f, size in sorted(file_bytes.items()) if size <= pair_bytes]
    assert small_files, f"no file fits one {pair_bytes}-byte pair"
    print(f"  Pair capacity: {pair_bytes} B, small files: {len(small_files)} of {len(file_bytes)}")

    passed = True
    for name in ("aware", "upgma", "sequential"):
        plan = pipeline.allocate(chunks, name)
        placed = set(plan.file_ids())
        costs = [retrieval_cost(plan, f) for f in small_files if f in placed]
        plan_ok = bool(costs) and max(costs) == 1 and max(costs) <= len(plan.tubes)
        print(f"  {name:<10} tubes={len(plan.tubes):>3}  checked={len(costs):>4}  "
              f"max cost={max(costs, default=0)}  ok={plan_ok}")
        passed &= plan_ok
    print(f"  Status: {'PASS' if passed else 'FAIL'}")
    return passed


def main():
    """Run allocation benchmarks."""
    print("=" * 80)
    print("Allocation Benchmark")
    print("=" * 80)

    benchmark_oracle_agreement()
    large_chunks, large_cfg = benchmark_scaling()
    benchmark_planted(large_chunks, large_cfg)
    benchmark_desk_run()
    benchmark_small_file_retrieval()

    print("\n" + "=" * 80)
    print("Benchmark Complete")
    print("=" * 80)


if __name__ == "__main__":
    main()
