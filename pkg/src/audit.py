"""Exhaustive optimum for small allocation instances."""

import logging
from typing import Dict, Iterator, List, Tuple

from src.alloc import AllocationPlan, AllocConfig, Chunk, packs_whole
from src.capacity import fits

logger = logging.getLogger(__name__)

MAX_AUDIT_CHUNKS = 10


def enumerate_partitions(chunks: List[Chunk], cfg: AllocConfig) -> Iterator[List[List[int]]]:
    """
    Yield every partition of the chunks into feasible tubes.

    Blocks are built in restricted-growth order, so each partition appears
    exactly once; a block is abandoned as soon as it stops fitting. A
    finished partition is yielded only if each block keeps its small files
    whole on one primer pair, the same rule sealed tubes follow.

    Args:
        chunks: At most MAX_AUDIT_CHUNKS chunks
        cfg: Allocation settings

    Yields:
        Partitions as lists of chunk-id lists
    """
    if len(chunks) > MAX_AUDIT_CHUNKS:
        raise ValueError(f"exhaustive audit is limited to {MAX_AUDIT_CHUNKS} chunks, got {len(chunks)}")
    chunks = sorted(chunks, key=lambda c: c.chunk_id)
    params = cfg.params
    blocks: List[Tuple[List[Chunk], int, int]] = []
    packed: Dict[Tuple[int, ...], bool] = {}

    def block_packs(members: List[Chunk]) -> bool:
        key = tuple(c.chunk_id for c in members)
        if key not in packed:
            packed[key] = packs_whole(members, cfg)
        return packed[key]

    def place(i: int) -> Iterator[List[List[int]]]:
        if i == len(chunks):
            if all(block_packs(members) for members, _, _ in blocks):
                yield [[c.chunk_id for c in members] for members, _, _ in blocks]
            return
        c = chunks[i]
        for k, (members, bits, total) in enumerate(blocks):
            merged = bits | c.collisions.bits
            if fits(total + c.byte_len, merged.bit_count(), params):
                blocks[k] = (members + [c], merged, total + c.byte_len)
                yield from place(i + 1)
                blocks[k] = (members, bits, total)
        if fits(c.byte_len, c.collisions.popcount, params):
            blocks.append(([c], c.collisions.bits, c.byte_len))
            yield from place(i + 1)
            blocks.pop()

    yield from place(0)


def optimal_objective(chunks: List[Chunk], cfg: AllocConfig) -> int:
    """Smallest sum of per-tube collided primers over all feasible partitions."""
    by_id = {c.chunk_id: c for c in chunks}
    best = None
    for partition in enumerate_partitions(chunks, cfg):
        cost = 0
        for block in partition:
            bits = 0
            for cid in block:
                bits |= by_id[cid].collisions.bits
            cost += bits.bit_count()
        if best is None or cost < best:
            best = cost
    if best is None:
        raise ValueError("no feasible partition exists")
    return best


def optimality_gap(plan: AllocationPlan, chunks: List[Chunk], cfg: AllocConfig) -> int:
    """Plan objective minus the exhaustive optimum; never negative for a valid plan."""
    optimum = optimal_objective(chunks, cfg)
    gap = plan.objective - optimum
    logger.debug("%s objective %d, optimum %d, gap %d", plan.allocator, plan.objective, optimum, gap)
    return gap
