"""Collision-aware chunk-to-tube allocation.

Chunks are grouped into tubes so that the sum over tubes of collided
primers stays small. The collision-aware allocator repeatedly clusters
the remaining chunks bottom-up by merge priority, fills the fullest
cluster with the best-fitting outside chunks, and seals it as a tube.
Sequential and average-linkage (UPGMA) allocators serve as baselines.
"""

import logging
from collections import defaultdict, deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple, Union

import numpy as np

from src.capacity import (
    CapacityParams,
    fits,
    pair_capacity_bytes,
    tube_capacity_array,
    tube_capacity_bytes,
)
from src.collision import CollisionSet
from src.errors import InfeasibleChunk, PairBudgetExceeded, UnknownFile

logger = logging.getLogger(__name__)

MERGE_PRIORITY = "merge_priority"
AVERAGE_LINKAGE = "average"
LINKAGES = (MERGE_PRIORITY, AVERAGE_LINKAGE)

ALLOCATOR_AWARE = "aware"
ALLOCATOR_SEQUENTIAL = "sequential"
ALLOCATOR_UPGMA = "upgma"
ALLOCATORS = (ALLOCATOR_AWARE, ALLOCATOR_SEQUENTIAL, ALLOCATOR_UPGMA)

TIE_BREAK = "smaller-union-then-lowest-id"

_NO_PARTNER = -1
_NEG_INF = -np.inf


@dataclass(frozen=True)
class Chunk:
    """A unit of stored data with the primers its payloads collide with."""

    chunk_id: int
    file_id: int
    byte_len: int
    collisions: CollisionSet

    def __post_init__(self):
        if self.byte_len <= 0:
            raise ValueError(f"chunk {self.chunk_id}: byte_len must be positive")


@dataclass(frozen=True)
class AllocConfig:
    """Allocation settings; tie-breaking is fixed to TIE_BREAK."""

    params: CapacityParams
    chunk_bytes: int = 4096
    k_seq_limit: int = 5
    tie_break: str = TIE_BREAK

    def __post_init__(self):
        if self.chunk_bytes <= 0:
            raise ValueError("chunk_bytes must be positive")
        if self.k_seq_limit < 1:
            raise ValueError("k_seq_limit must be at least 1")
        if self.tie_break != TIE_BREAK:
            raise ValueError(f"unsupported tie_break {self.tie_break!r}")

    @property
    def library_size(self) -> int:
        return self.params.library_size


@dataclass
class Cluster:
    """A group of chunks bound for one tube, with cached union and size."""

    cluster_id: int
    chunks: List[Chunk]
    union_collisions: CollisionSet
    total_bytes: int

    @classmethod
    def from_chunks(cls, cluster_id: int, chunks: Iterable[Chunk], width: Optional[int] = None) -> "Cluster":
        chunks = sorted(chunks, key=lambda c: c.chunk_id)
        if width is None:
            width = chunks[0].collisions.width
        union = reduce(CollisionSet.union, (c.collisions for c in chunks), CollisionSet.empty(width))
        return cls(cluster_id, chunks, union, sum(c.byte_len for c in chunks))

    @property
    def members(self) -> Set[int]:
        return {c.chunk_id for c in self.chunks}

    def is_coherent(self) -> bool:
        """Caches equal a recomputation from the members."""
        fresh = Cluster.from_chunks(self.cluster_id, self.chunks, self.union_collisions.width)
        return fresh.union_collisions == self.union_collisions and fresh.total_bytes == self.total_bytes

    def capacity_bytes(self, params: CapacityParams) -> int:
        return tube_capacity_bytes(params.library_size - self.union_collisions.popcount, params)

    def is_feasible(self, params: CapacityParams) -> bool:
        return fits(self.total_bytes, self.union_collisions.popcount, params)


PairAssignments = Dict[int, List[Tuple[int, List[int]]]]


@dataclass
class SealedTube:
    """A finished tube: members, usable primers and per-file pair placement."""

    tube_id: int
    chunks: List[int]
    usable_primers: int
    pair_assignments: PairAssignments
    capacity_bytes: int
    collided: CollisionSet
    total_bytes: int
    pair_loads: Dict[int, int] = field(default_factory=dict)

    @property
    def collided_count(self) -> int:
        return self.collided.popcount

    @property
    def pairs_used(self) -> int:
        return len(self.pair_loads)


@dataclass
class AllocationPlan:
    """Result of one allocator run."""

    allocator: str
    params: CapacityParams
    k_seq_limit: int
    tubes: List[SealedTube] = field(default_factory=list)
    quarantined: List[int] = field(default_factory=list)

    @property
    def library_size(self) -> int:
        return self.params.library_size

    @property
    def objective(self) -> int:
        """Sum over tubes of collided primers."""
        return sum(t.collided_count for t in self.tubes)

    def file_ids(self) -> List[int]:
        return sorted({f for t in self.tubes for f in t.pair_assignments})


# ---------------------------------------------------------------------------
# Priorities

def _collisions_of(item: Union[Cluster, Chunk, CollisionSet]) -> CollisionSet:
    if isinstance(item, Cluster):
        return item.union_collisions
    if isinstance(item, Chunk):
        return item.collisions
    return item


def merge_priority(a: Union[Cluster, Chunk, CollisionSet], b: Union[Cluster, Chunk, CollisionSet]) -> Fraction:
    """(1 + |A & B|) / (1 + |A | B|) over two collision sets."""
    sa, sb = _collisions_of(a), _collisions_of(b)
    return Fraction(1 + sa.intersection_count(sb), 1 + sa.union_count(sb))


def chunk_distance(x: Chunk, y: Chunk) -> Fraction:
    """Chunk-level distance used by average linkage."""
    return 1 - merge_priority(x, y)


def upgma_distance(a: Cluster, b: Cluster) -> Fraction:
    """Average chunk distance over all member pairs of two clusters."""
    total = sum((chunk_distance(x, y) for x in a.chunks for y in b.chunks), Fraction(0))
    return total / (len(a.chunks) * len(b.chunks))


def _priority_matrix(inter: np.ndarray, union: np.ndarray) -> np.ndarray:
    return (1.0 + inter) / (1.0 + union)


# ---------------------------------------------------------------------------
# Initial clustering

class _Agglomeration:
    """
    Dense agglomerative clustering state over n starting clusters.

    Scores are "higher is better": merge priority, or the negated average
    chunk distance. Each row caches its best partner; after a merge only the
    merged row, its column, and rows whose cached partner disappeared are
    recomputed.
    """

    def __init__(self, chunks: Sequence[Chunk], cfg: AllocConfig, linkage: str):
        self.cfg = cfg
        self.linkage = linkage
        self.width = cfg.library_size
        n = len(chunks)
        self.members: List[List[Chunk]] = [[c] for c in chunks]
        self.vectors = np.stack([c.collisions.to_mask() for c in chunks]).astype(np.float32)
        self.counts = self.vectors.sum(axis=1).astype(np.int64)
        self.sizes = np.array([c.byte_len for c in chunks], dtype=np.int64)
        self.alive = np.ones(n, dtype=bool)
        self.member_counts = np.ones(n, dtype=np.int64)

        inter = np.rint(self.vectors @ self.vectors.T).astype(np.int64)
        self.union = self.counts[:, None] + self.counts[None, :] - inter
        priority = _priority_matrix(inter, self.union)
        if linkage == AVERAGE_LINKAGE:
            self.distance_sums = 1.0 - priority
            self.scores = -self.distance_sums.copy()
        else:
            self.scores = priority
        feasible = self.sizes[:, None] + self.sizes[None, :] <= tube_capacity_array(self.width - self.union, cfg.params)
        self.scores[~feasible] = _NEG_INF
        np.fill_diagonal(self.scores, _NEG_INF)

        self.best_score = np.full(n, _NEG_INF)
        self.best_union = np.zeros(n, dtype=np.int64)
        self.best_partner = np.full(n, _NO_PARTNER, dtype=np.int64)
        self._refresh_rows(np.arange(n))

    def _refresh_rows(self, rows: np.ndarray) -> None:
        if rows.size == 0:
            return
        sub = self.scores[rows]
        top = sub.max(axis=1)
        tied = sub == top[:, None]
        unions = np.where(tied, self.union[rows], np.iinfo(np.int64).max)
        partner = unions.argmin(axis=1)
        has = top > _NEG_INF
        self.best_score[rows] = top
        self.best_union[rows] = unions[np.arange(rows.size), partner]
        self.best_partner[rows] = np.where(has, partner, _NO_PARTNER)

    def _row_scores(self, a: int) -> Tuple[np.ndarray, np.ndarray]:
        inter = np.rint(self.vectors @ self.vectors[a]).astype(np.int64)
        union = self.counts + self.counts[a] - inter
        if self.linkage == AVERAGE_LINKAGE:
            scores = -self.distance_sums[a] / (self.member_counts * self.member_counts[a])
        else:
            scores = _priority_matrix(inter, union)
        feasible = self.sizes + self.sizes[a] <= tube_capacity_array(self.width - union, self.cfg.params)
        scores = np.where(feasible & self.alive, scores, _NEG_INF)
        scores[a] = _NEG_INF
        return scores, union

    def next_pair(self) -> Optional[Tuple[int, int]]:
        """Best feasible pair by (score desc, merged union asc, lowest id)."""
        valid = self.alive & (self.best_partner != _NO_PARTNER)
        if not valid.any():
            return None
        top = self.best_score[valid].max()
        tied = valid & (self.best_score == top)
        smallest = self.best_union[tied].min()
        i = int(np.flatnonzero(tied & (self.best_union == smallest))[0])
        j = int(self.best_partner[i])
        return min(i, j), max(i, j)

    def merge(self, a: int, b: int) -> None:
        self.vectors[a] = np.maximum(self.vectors[a], self.vectors[b])
        self.counts[a] = int(self.vectors[a].sum())
        self.sizes[a] += self.sizes[b]
        self.members[a].extend(self.members[b])
        self.members[b] = []
        self.alive[b] = False
        self.member_counts[a] += self.member_counts[b]
        if self.linkage == AVERAGE_LINKAGE:
            self.distance_sums[a] += self.distance_sums[b]
            self.distance_sums[:, a] = self.distance_sums[a]

        self.scores[b, :] = _NEG_INF
        self.scores[:, b] = _NEG_INF
        row, union = self._row_scores(a)
        self.scores[a, :] = row
        self.scores[:, a] = row
        self.union[a, :] = union
        self.union[:, a] = union

        stale = self.alive & ((self.best_partner == a) | (self.best_partner == b))
        stale[a] = True
        others = np.flatnonzero(self.alive & ~stale)
        cand = row[others]
        cand_union = union[others]
        better = (cand > self.best_score[others]) | (
            (cand == self.best_score[others]) & (cand > _NEG_INF) & (
                (cand_union < self.best_union[others])
                | ((cand_union == self.best_union[others]) & (a < self.best_partner[others]))
            )
        )
        upd = others[better]
        self.best_score[upd] = cand[better]
        self.best_union[upd] = cand_union[better]
        self.best_partner[upd] = a
        self._refresh_rows(np.flatnonzero(stale))

    def clusters(self) -> List[Cluster]:
        groups = [self.members[i] for i in np.flatnonzero(self.alive)]
        out = [Cluster.from_chunks(min(c.chunk_id for c in g), g, self.width) for g in groups]
        return sorted(out, key=lambda c: c.cluster_id)


def initial_clustering(
    chunks: List[Chunk],
    cfg: AllocConfig,
    linkage: str = MERGE_PRIORITY
) -> List[Cluster]:
    """
    Merge singleton clusters greedily until no feasible merge remains.

    Args:
        chunks: Chunks to cluster
        cfg: Allocation settings
        linkage: MERGE_PRIORITY (highest priority first) or AVERAGE_LINKAGE
            (lowest average chunk distance first)

    Returns:
        Clusters ordered by their lowest chunk id

    Raises:
        InfeasibleChunk: a chunk does not fit a tube on its own
    """
    if linkage not in LINKAGES:
        raise ValueError(f"Unknown linkage: {linkage}")
    if not chunks:
        return []
    chunks = sorted(chunks, key=lambda c: c.chunk_id)
    for c in chunks:
        if not fits(c.byte_len, c.collisions.popcount, cfg.params):
            raise InfeasibleChunk(c.chunk_id)

    state = _Agglomeration(chunks, cfg, linkage)
    merges = 0
    while (pair := state.next_pair()) is not None:
        state.merge(*pair)
        merges += 1
    clusters = state.clusters()
    logger.debug("Clustered %d chunks into %d clusters (%d merges, %s)",
                 len(chunks), len(clusters), merges, linkage)
    return clusters


# ---------------------------------------------------------------------------
# Refinement and sealing

def _fill_key(cluster: Cluster, params: CapacityParams) -> Tuple[Fraction, int, int]:
    capacity = cluster.capacity_bytes(params)
    fill = Fraction(cluster.total_bytes, capacity) if capacity else Fraction(0)
    return -fill, cluster.union_collisions.popcount, cluster.cluster_id


def refine_and_seal(
    clusters: List[Cluster],
    cfg: AllocConfig,
    tube_id: int = 0,
    linkage: str = MERGE_PRIORITY
) -> Tuple[SealedTube, List[Cluster]]:
    """
    Fill the fullest cluster with outside chunks and seal it as a tube.

    The cluster closest to its capacity is selected. Outside chunks move in
    one at a time, best priority first (or lowest average distance under
    AVERAGE_LINKAGE), skipping any that would break feasibility, until none
    fits. If the filled tube cannot keep each small file whole on one
    primer pair, the most recently added chunks go back to their clusters.

    Args:
        clusters: Current clusters
        cfg: Allocation settings
        tube_id: Id of the tube to seal
        linkage: Chunk ranking used for migration

    Returns:
        (sealed tube, remaining clusters with caches recomputed)
    """
    if not clusters:
        raise ValueError("refine_and_seal needs at least one cluster")
    params = cfg.params
    width = cfg.library_size
    selected = min(clusters, key=lambda c: _fill_key(c, params))
    members = list(selected.chunks)
    externals = sorted(
        (c for cl in clusters if cl is not selected for c in cl.chunks),
        key=lambda c: c.chunk_id,
    )

    if externals:
        outside = np.stack([c.collisions.to_mask() for c in externals]).astype(np.float32)
        outside_counts = outside.sum(axis=1).astype(np.int64)
        outside_bytes = np.array([c.byte_len for c in externals], dtype=np.int64)
        union_vec = selected.union_collisions.to_mask().astype(np.float32)
        union_count = selected.union_collisions.popcount
        total = selected.total_bytes
        moved = np.zeros(len(externals), dtype=bool)
        if linkage == AVERAGE_LINKAGE:
            distance_sums = np.zeros(len(externals))
            for m in members:
                distance_sums += _distances_to(outside, outside_counts, m.collisions.to_mask())

        while True:
            inter = np.rint(outside @ union_vec).astype(np.int64)
            union = outside_counts + union_count - inter
            ok = ~moved & (total + outside_bytes <= tube_capacity_array(width - union, params))
            if not ok.any():
                break
            if linkage == AVERAGE_LINKAGE:
                scores = -distance_sums / len(members)
            else:
                scores = _priority_matrix(inter, union)
            scores = np.where(ok, scores, _NEG_INF)
            tied = scores == scores.max()
            unions = np.where(tied, union, np.iinfo(np.int64).max)
            k = int(unions.argmin())

            moved[k] = True
            chunk = externals[k]
            members.append(chunk)
            union_vec = np.maximum(union_vec, outside[k])
            union_count = int(union[k])
            total += int(outside_bytes[k])
            if linkage == AVERAGE_LINKAGE:
                distance_sums += _distances_to(outside, outside_counts, outside[k])
            logger.debug("Migrated chunk %d into cluster %d", chunk.chunk_id, selected.cluster_id)

    members, _ = _trim_to_pairs(members, cfg)
    tube = seal_tube(tube_id, members, cfg)
    sealed_ids = {c.chunk_id for c in members}
    remaining = []
    for cl in clusters:
        kept = [c for c in cl.chunks if c.chunk_id not in sealed_ids]
        if kept:
            remaining.append(Cluster.from_chunks(cl.cluster_id, kept, width))
    return tube, remaining


def _distances_to(outside: np.ndarray, outside_counts: np.ndarray, mask: np.ndarray) -> np.ndarray:
    vec = np.asarray(mask, dtype=np.float32)
    inter = np.rint(outside @ vec).astype(np.int64)
    union = outside_counts + int(vec.sum()) - inter
    return 1.0 - _priority_matrix(inter, union)


def packs_whole(chunks: Sequence[Chunk], cfg: AllocConfig) -> bool:
    """
    Check that the chunks fit one tube with every small file on a single pair.

    A file is small when its bytes in the tube fit one pair. First-fit
    decreasing can only fail on a small file of s bytes once every pair in
    the budget holds more than (pair capacity - s) bytes, so totals at or
    below budget * (pair capacity - s) + s for the largest small file are
    accepted without packing.
    """
    bits = 0
    total = 0
    sizes: Dict[int, int] = defaultdict(int)
    for c in chunks:
        bits |= c.collisions.bits
        total += c.byte_len
        sizes[c.file_id] += c.byte_len
    collided = bits.bit_count()
    if not fits(total, collided, cfg.params):
        return False
    pair_cap = pair_capacity_bytes(cfg.params)
    budget = (cfg.library_size - collided) // 2
    largest_small = max((s for s in sizes.values() if s <= pair_cap), default=0)
    if total <= budget * (pair_cap - largest_small) + largest_small:
        return True
    try:
        assign_pairs(list(chunks), cfg.library_size - collided, cfg)
    except PairBudgetExceeded:
        return False
    return True


def _trim_to_pairs(members: List[Chunk], cfg: AllocConfig) -> Tuple[List[Chunk], List[Chunk]]:
    """Drop the last-added members until the rest pack; returns (kept, dropped in order)."""
    kept = list(members)
    dropped: List[Chunk] = []
    while len(kept) > 1 and not packs_whole(kept, cfg):
        dropped.append(kept.pop())
    if dropped:
        logger.info("Deferred %d chunks so small files stay on one primer pair", len(dropped))
    return kept, dropped[::-1]


def seal_tube(tube_id: int, chunks: List[Chunk], cfg: AllocConfig) -> SealedTube:
    """Fix a tube's membership and assign its files to primer pairs."""
    width = cfg.library_size
    chunks = sorted(chunks, key=lambda c: c.chunk_id)
    collided = reduce(CollisionSet.union, (c.collisions for c in chunks), CollisionSet.empty(width))
    usable = width - collided.popcount
    assignments, loads = assign_pairs(chunks, usable, cfg)
    tube = SealedTube(
        tube_id=tube_id,
        chunks=[c.chunk_id for c in chunks],
        usable_primers=usable,
        pair_assignments=assignments,
        capacity_bytes=tube_capacity_bytes(usable, cfg.params),
        collided=collided,
        total_bytes=sum(c.byte_len for c in chunks),
        pair_loads=loads,
    )
    logger.info("Sealed tube %d: %d chunks, %d bytes, %d usable primers",
                tube_id, len(chunks), tube.total_bytes, usable)
    return tube


# ---------------------------------------------------------------------------
# Allocators

def _split_feasible(chunks: List[Chunk], cfg: AllocConfig) -> Tuple[List[Chunk], List[int]]:
    ids = [c.chunk_id for c in chunks]
    if len(set(ids)) != len(ids):
        raise ValueError("chunk ids must be unique")
    for c in chunks:
        if c.collisions.width != cfg.library_size:
            raise ValueError(
                f"chunk {c.chunk_id}: collision width {c.collisions.width} != library size {cfg.library_size}"
            )
    feasible, quarantined = [], []
    for c in sorted(chunks, key=lambda c: c.chunk_id):
        if fits(c.byte_len, c.collisions.popcount, cfg.params):
            feasible.append(c)
        else:
            quarantined.append(c.chunk_id)
            logger.warning("Quarantined chunk %d: %d bytes with %d collided primers does not fit a tube",
                           c.chunk_id, c.byte_len, c.collisions.popcount)
    return feasible, quarantined


def _allocate_clustered(chunks: List[Chunk], cfg: AllocConfig, linkage: str, name: str) -> AllocationPlan:
    remaining, quarantined = _split_feasible(chunks, cfg)
    plan = AllocationPlan(allocator=name, params=cfg.params, k_seq_limit=cfg.k_seq_limit,
                          quarantined=quarantined)
    while remaining:
        clusters = initial_clustering(remaining, cfg, linkage)
        tube, rest = refine_and_seal(clusters, cfg, tube_id=len(plan.tubes), linkage=linkage)
        plan.tubes.append(tube)
        remaining = sorted((c for cl in rest for c in cl.chunks), key=lambda c: c.chunk_id)
    logger.info("%s allocation: %d tubes, objective %d, %d quarantined",
                name, len(plan.tubes), plan.objective, len(quarantined))
    return plan


def allocate(chunks: List[Chunk], cfg: AllocConfig) -> AllocationPlan:
    """Collision-aware allocation: cluster, refine, seal, repeat."""
    return _allocate_clustered(chunks, cfg, MERGE_PRIORITY, ALLOCATOR_AWARE)


def allocate_upgma(chunks: List[Chunk], cfg: AllocConfig) -> AllocationPlan:
    """Same loop as allocate with average-linkage merges and migrations."""
    return _allocate_clustered(chunks, cfg, AVERAGE_LINKAGE, ALLOCATOR_UPGMA)


def allocate_sequential(chunks: List[Chunk], cfg: AllocConfig) -> AllocationPlan:
    """Fill tubes in chunk-id order, opening a new tube when the next chunk does not fit."""
    feasible, quarantined = _split_feasible(chunks, cfg)
    plan = AllocationPlan(allocator=ALLOCATOR_SEQUENTIAL, params=cfg.params,
                          k_seq_limit=cfg.k_seq_limit, quarantined=quarantined)
    queue = deque(feasible)
    while queue:
        current: List[Chunk] = []
        bits = 0
        total = 0
        while queue:
            chunk = queue[0]
            merged = bits | chunk.collisions.bits
            if current and not fits(total + chunk.byte_len, merged.bit_count(), cfg.params):
                break
            current.append(queue.popleft())
            bits = merged
            total += chunk.byte_len
        current, deferred = _trim_to_pairs(current, cfg)
        queue.extendleft(reversed(deferred))
        plan.tubes.append(seal_tube(len(plan.tubes), current, cfg))
    logger.info("sequential allocation: %d tubes, objective %d", len(plan.tubes), plan.objective)
    return plan


def run_allocator(name: str, chunks: List[Chunk], cfg: AllocConfig) -> AllocationPlan:
    """Dispatch by allocator name ('aware', 'sequential' or 'upgma')."""
    if name == ALLOCATOR_AWARE:
        return allocate(chunks, cfg)
    elif name == ALLOCATOR_SEQUENTIAL:
        return allocate_sequential(chunks, cfg)
    elif name == ALLOCATOR_UPGMA:
        return allocate_upgma(chunks, cfg)
    raise ValueError(f"Unknown allocator: {name}")


# ---------------------------------------------------------------------------
# Primer pairs and retrieval

def assign_pairs(
    tube_chunks: List[Chunk],
    usable_primers: int,
    cfg: AllocConfig
) -> Tuple[PairAssignments, Dict[int, int]]:
    """
    Place a tube's files onto primer pairs, first-fit-decreasing by bytes.

    A file that fits one pair goes whole into the first pair with room,
    opening a new pair if none has; it is never split. A larger file fills
    fresh pairs one after another, so it spans ceil(bytes / pair capacity)
    pairs; when the pair budget runs out, its leftover bytes go into free
    space of open pairs, and a chunk may then be split across two pairs.

    Args:
        tube_chunks: Chunks sealed into the tube
        usable_primers: Usable primers of the tube
        cfg: Allocation settings

    Returns:
        (file_id -> [(pair_id, chunk_ids)], pair_id -> assigned bytes)

    Raises:
        PairBudgetExceeded: the chunks need more bytes than the pairs hold,
            or a small file finds no pair with room for all of it
    """
    pair_cap = pair_capacity_bytes(cfg.params)
    budget = usable_primers // 2
    need = sum(c.byte_len for c in tube_chunks)
    if need > budget * pair_cap:
        raise PairBudgetExceeded(
            f"{need} bytes exceed {budget} pairs of {pair_cap} bytes"
        )

    groups: Dict[int, List[Chunk]] = defaultdict(list)
    for c in sorted(tube_chunks, key=lambda c: c.chunk_id):
        groups[c.file_id].append(c)
    order = sorted(groups, key=lambda f: (-sum(c.byte_len for c in groups[f]), f))

    loads: List[int] = []
    assignments: PairAssignments = {}

    def open_pair() -> int:
        loads.append(0)
        return len(loads) - 1

    for file_id in order:
        chunks = groups[file_id]
        size = sum(c.byte_len for c in chunks)
        placed: Dict[int, List[int]] = {}
        if size <= pair_cap:
            target = next((p for p, load in enumerate(loads) if load + size <= pair_cap), None)
            if target is None and len(loads) < budget:
                target = open_pair()
            if target is None:
                raise PairBudgetExceeded(
                    f"file {file_id} ({size} bytes) fits no single pair of {pair_cap} bytes "
                    f"once all {budget} pairs are open"
                )
            loads[target] += size
            placed[target] = [c.chunk_id for c in chunks]
        else:
            current = None
            for c in chunks:
                left = c.byte_len
                while left:
                    if current is None or loads[current] == pair_cap:
                        if len(loads) < budget:
                            current = open_pair()
                        else:
                            current = next(p for p, load in enumerate(loads) if load < pair_cap)
                    take = min(left, pair_cap - loads[current])
                    loads[current] += take
                    left -= take
                    ids = placed.setdefault(current, [])
                    if not ids or ids[-1] != c.chunk_id:
                        ids.append(c.chunk_id)
        assignments[file_id] = sorted(placed.items())

    return assignments, dict(enumerate(loads))


def retrieval_cost(plan: AllocationPlan, file_id: int) -> int:
    """Sequencing runs needed to read a file: distinct pairs summed over tubes."""
    cost = 0
    found = False
    for tube in plan.tubes:
        pairs = tube.pair_assignments.get(file_id)
        if pairs:
            found = True
            cost += len({p for p, _ in pairs})
    if not found:
        raise UnknownFile(file_id)
    return cost


def k_limit_violations(plan: AllocationPlan) -> List[int]:
    """Files whose retrieval cost exceeds the plan's sequencing limit."""
    return [f for f in plan.file_ids() if retrieval_cost(plan, f) > plan.k_seq_limit]
