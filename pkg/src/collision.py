"""Primer-payload collision detection and collision sets.

A primer collides with a payload when some window of `window_len` primer
bases lies within `max_edits` Levenshtein edits of some payload substring.
`collides_oracle` decides this directly with a bit-parallel matcher per
window. `CollisionIndex` answers the same question for a whole library:
a seed table proposes candidate (window, payload segment) pairs and a
vectorised DP verifies every candidate, so both paths agree exactly.
"""

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from src.codec import PayloadFrame
from src.errors import WidthMismatch, WindowTooLong
from src.primerlib import PrimerLibrary, encode_bases

logger = logging.getLogger(__name__)

DEFAULT_WINDOW_LEN = 12
DEFAULT_MAX_EDITS = 2
MAX_SEED_LEN = 16
_SENTINEL = 4
_VERIFY_BATCH = 1 << 16
_COMPLEMENT = str.maketrans("ACGT", "TGCA")


@dataclass(frozen=True)
class CollisionParams:
    """Near-match definition: window length and edit budget."""

    window_len: int = DEFAULT_WINDOW_LEN
    max_edits: int = DEFAULT_MAX_EDITS
    reverse_complement: bool = False

    def __post_init__(self):
        if self.window_len < 1:
            raise ValueError(f"window_len must be >= 1, got {self.window_len}")
        if self.max_edits < 0:
            raise ValueError(f"max_edits must be >= 0, got {self.max_edits}")
        if self.max_edits >= self.window_len:
            raise ValueError("max_edits must be smaller than window_len")

    @property
    def seed_len(self) -> int:
        """Exact seed length guaranteed by pigeonhole over max_edits + 1 pieces."""
        return min(self.window_len // (self.max_edits + 1), MAX_SEED_LEN)

    @property
    def piece_len(self) -> int:
        return self.window_len // (self.max_edits + 1)


# ---------------------------------------------------------------------------
# Collision sets

@dataclass(frozen=True)
class CollisionSet:
    """Fixed-width bit vector over primer ids, backed by a Python int."""

    width: int
    bits: int = 0

    def __post_init__(self):
        if self.width < 0:
            raise ValueError("width must be non-negative")
        if self.bits < 0 or self.bits >> self.width:
            raise ValueError(f"bits exceed width {self.width}")

    @classmethod
    def empty(cls, width: int) -> "CollisionSet":
        return cls(width, 0)

    @classmethod
    def from_ids(cls, width: int, ids: Iterable[int]) -> "CollisionSet":
        bits = 0
        for i in ids:
            i = int(i)
            if not 0 <= i < width:
                raise ValueError(f"primer id {i} outside [0, {width})")
            bits |= 1 << i
        return cls(width, bits)

    @classmethod
    def from_mask(cls, mask: np.ndarray) -> "CollisionSet":
        """Build from a boolean array, index i -> bit i."""
        packed = np.packbits(np.asarray(mask, dtype=bool), bitorder="little")
        return cls(len(mask), int.from_bytes(packed.tobytes(), "little"))

    @classmethod
    def from_bytes(cls, width: int, data: bytes) -> "CollisionSet":
        return cls(width, int.from_bytes(data, "little"))

    @cached_property
    def popcount(self) -> int:
        return self.bits.bit_count()

    def __len__(self) -> int:
        return self.popcount

    def __contains__(self, primer_id: int) -> bool:
        return 0 <= primer_id < self.width and bool(self.bits >> primer_id & 1)

    def ids(self) -> List[int]:
        return np.flatnonzero(self.to_mask()).tolist()

    def to_mask(self) -> np.ndarray:
        raw = np.frombuffer(self.to_bytes(), dtype=np.uint8)
        return np.unpackbits(raw, bitorder="little")[:self.width].astype(bool)

    def to_bytes(self) -> bytes:
        """Little-endian bit order, ceil(width / 8) bytes."""
        return self.bits.to_bytes((self.width + 7) // 8, "little")

    def _check(self, other: "CollisionSet") -> None:
        if self.width != other.width:
            raise WidthMismatch(f"collision set widths differ: {self.width} vs {other.width}")

    def union(self, other: "CollisionSet") -> "CollisionSet":
        self._check(other)
        return CollisionSet(self.width, self.bits | other.bits)

    def intersection_count(self, other: "CollisionSet") -> int:
        self._check(other)
        return (self.bits & other.bits).bit_count()

    def union_count(self, other: "CollisionSet") -> int:
        self._check(other)
        return (self.bits | other.bits).bit_count()

    def issubset(self, other: "CollisionSet") -> bool:
        self._check(other)
        return self.bits & ~other.bits == 0


def set_union(a: CollisionSet, b: CollisionSet) -> CollisionSet:
    return a.union(b)


def set_intersection_count(a: CollisionSet, b: CollisionSet) -> int:
    return a.intersection_count(b)


def set_union_count(a: CollisionSet, b: CollisionSet) -> int:
    return a.union_count(b)


# ---------------------------------------------------------------------------
# Reference distances and the oracle

def reverse_complement(seq: str) -> str:
    return seq.translate(_COMPLEMENT)[::-1]



def substring_distance(pattern: str, text: str) -> int:
    """Minimum Levenshtein distance between pattern and any substring of text."""
    prev = [0] * (len(text) + 1)
    for i, cp in enumerate(pattern, 1):
        cur = [i] + [0] * len(text)
        for j, ct in enumerate(text, 1):
            cur[j] = min(prev[j - 1] + (cp != ct), prev[j] + 1, cur[j - 1] + 1)
        prev = cur
    return min(prev)


def window_distance(primer: str, payload: str, window_len: int) -> int:
    """Best substring distance over every primer window (slow reference)."""
    if window_len > len(primer):
        raise WindowTooLong(f"window_len {window_len} exceeds primer length {len(primer)}")
    return min(
        substring_distance(primer[s:s + window_len], payload)
        for s in range(len(primer) - window_len + 1)
    )


def _within_edits(pattern: str, text: str, max_edits: int) -> bool:
    """
    Myers bit-parallel search: does pattern occur in text with <= max_edits?

    Vertical deltas of the DP column are kept in Pv/Mv; the score tracks the
    last row, which is the distance of the best alignment ending at the
    current text position.
    """
    m = len(pattern)
    mask = (1 << m) - 1
    high = 1 << (m - 1)
    peq: Dict[str, int] = {}
    for i, c in enumerate(pattern):
        peq[c] = peq.get(c, 0) | (1 << i)

    pv, mv, score = mask, 0, m
    for c in text:
        eq = peq.get(c, 0)
        xv = eq | mv
        xh = (((eq & pv) + pv) ^ pv) | eq
        ph = (mv | ~(xh | pv)) & mask
        mh = pv & xh
        if ph & high:
            score += 1
        elif mh & high:
            score -= 1
        ph = (ph << 1) & mask
        mh = (mh << 1) & mask
        pv = (mh | ~(xv | ph)) & mask
        mv = ph & xv
        if score <= max_edits:
            return True
    return False


def collides_oracle(primer: str, payload: str, params: CollisionParams = CollisionParams()) -> bool:
    """
    Decide a primer-payload collision window by window.

    Args:
        primer: Primer bases
        payload: Payload bases
        params: Window length and edit budget

    Returns:
        True iff some primer window is within max_edits of a payload substring

    Raises:
        WindowTooLong: window_len exceeds the primer length
    """
    w = params.window_len
    if w > len(primer):
        raise WindowTooLong(f"window_len {w} exceeds primer length {len(primer)}")
    variants = [primer, reverse_complement(primer)] if params.reverse_complement else [primer]
    for variant in variants:
        for s in range(len(variant) - w + 1):
            if _within_edits(variant[s:s + w], payload, params.max_edits):
                return True
    return False


# ---------------------------------------------------------------------------
# Indexed detector

def _kmer_codes(codes: np.ndarray, k: int) -> np.ndarray:
    """Base-4 code of every k-mer along the last axis; -1 where a k-mer holds a non-base."""
    views = np.lib.stride_tricks.sliding_window_view(codes, k, axis=-1)
    powers = 4 ** np.arange(k - 1, -1, -1, dtype=np.int64)
    kmers = (views.astype(np.int64) * powers).sum(axis=-1)
    invalid = (views > 3).any(axis=-1)
    return np.where(invalid, -1, kmers)


def verify_candidates(windows: np.ndarray, segments: np.ndarray, max_edits: int) -> np.ndarray:
    """
    Semi-global DP for many (window, segment) pairs at once.

    Args:
        windows: (M, w) pattern codes
        segments: (M, L) text codes
        max_edits: Edit budget

    Returns:
        Boolean (M,) array, True where the window matches inside its segment
    """
    count, w = windows.shape
    length = segments.shape[1]
    cols = np.arange(length + 1, dtype=np.int16)
    row = np.zeros((count, length + 1), dtype=np.int16)
    for i in range(1, w + 1):
        mismatch = windows[:, i - 1:i] != segments
        diag = row[:, :-1] + mismatch
        vert = row[:, 1:] + 1
        nxt = np.empty_like(row)
        nxt[:, 0] = i
        np.minimum(diag, vert, out=nxt[:, 1:])
        # horizontal moves: row[j] = min over j' <= j of row[j'] + (j - j')
        row = np.minimum.accumulate(nxt - cols, axis=1) + cols
    return row.min(axis=1) <= max_edits


class CollisionIndex:
    """
    Seed index over every primer window of a library.

    Each window is cut into max_edits + 1 pieces; any match within
    max_edits edits keeps at least one piece intact, so looking up the
    leading seed of each piece finds every colliding window.
    """

    def __init__(self, library: PrimerLibrary, params: CollisionParams = CollisionParams()):
        """
        Build the index.

        Args:
            library: Primer library to index
            params: Collision definition
        """
        w = params.window_len
        if w > library.primer_len:
            raise WindowTooLong(f"window_len {w} exceeds primer length {library.primer_len}")
        self.library = library
        self.params = params
        self.library_size = library.size

        variants = [library.codes]
        if params.reverse_complement:
            variants.append((3 - library.codes)[:, ::-1])
        codes = np.stack(variants)                                       # (V, P, len)
        windows = np.lib.stride_tricks.sliding_window_view(codes, w, axis=-1)  # (V, P, S, w)
        n_var, n_primers, n_starts = windows.shape[:3]
        self._windows = np.ascontiguousarray(windows.reshape(-1, w))

        k = params.seed_len
        piece = params.piece_len
        kmers = _kmer_codes(codes, k)                                    # (V, P, len-k+1)
        keys, window_ids, primer_ids, offsets = [], [], [], []
        window_grid = np.arange(n_var * n_primers * n_starts).reshape(n_var, n_primers, n_starts)
        primer_grid = np.broadcast_to(np.arange(n_primers)[None, :, None], window_grid.shape)
        for j in range(params.max_edits + 1):
            offset = j * piece
            keys.append(kmers[:, :, offset:offset + n_starts].ravel())
            window_ids.append(window_grid.ravel())
            primer_ids.append(primer_grid.ravel())
            offsets.append(np.full(window_grid.size, offset, dtype=np.int64))

        keys = np.concatenate(keys)
        order = np.argsort(keys, kind="stable")
        self._keys = keys[order]
        self._window_ids = np.concatenate(window_ids)[order]
        self._primer_ids = np.concatenate(primer_ids)[order].astype(np.int64)
        self._offsets = np.concatenate(offsets)[order]
        logger.info(
            "Built collision index: %d primers, %d windows, %d seeds (k=%d)",
            n_primers, self._windows.shape[0], self._keys.size, k
        )

    @property
    def seed_len(self) -> int:
        return self.params.seed_len

    def payload_hits(self, payload: str, alive: Optional[np.ndarray] = None) -> np.ndarray:
        """
        Primer ids colliding with one payload.

        Args:
            payload: Payload bases
            alive: Optional boolean mask; primers outside it are not checked

        Returns:
            Sorted array of colliding primer ids
        """
        primers, _ = self._verified(payload, alive)
        return np.unique(primers)

    def hit_segments(self, payload: str) -> Tuple[np.ndarray, np.ndarray]:
        """
        Colliding primer ids with the payload offset of each verified segment.

        A segment spans window_len + 2 * max_edits bases and holds the match;
        offsets may be negative or run past the end near the payload edges.

        Returns:
            (primer ids, segment offsets), one entry per verified window
        """
        return self._verified(payload, None)

    def _verified(self, payload: str, alive: Optional[np.ndarray]) -> Tuple[np.ndarray, np.ndarray]:
        empty = np.empty(0, dtype=np.int64)
        k = self.seed_len
        w, e = self.params.window_len, self.params.max_edits
        if len(payload) < k:
            return empty, empty

        codes = encode_bases(payload)
        qkmers = _kmer_codes(codes, k)
        qpos = np.flatnonzero(qkmers >= 0)
        qkmers = qkmers[qpos]
        lo = np.searchsorted(self._keys, qkmers, side="left")
        hi = np.searchsorted(self._keys, qkmers, side="right")
        counts = hi - lo
        total = int(counts.sum())
        if total == 0:
            return empty, empty

        starts = np.repeat(lo, counts)
        within = np.arange(total) - np.repeat(np.cumsum(counts) - counts, counts)
        entry = starts + within
        primers = self._primer_ids[entry]
        keep = alive[primers] if alive is not None else slice(None)
        entry = entry[keep]
        primers = primers[keep]
        if entry.size == 0:
            return empty, empty

        pad = w + e
        seg_len = w + 2 * e
        padded = np.full(len(payload) + 2 * pad, _SENTINEL, dtype=np.uint8)
        padded[pad:pad + len(payload)] = codes
        seg_start = np.repeat(qpos, counts)[keep] - self._offsets[entry] - e + pad
        windows = self._window_ids[entry]

        stride = padded.size
        pairs = np.unique(windows * stride + seg_start)
        windows, seg_start = np.divmod(pairs, stride)
        primers = self._primer_ids_of(windows)

        hit_primers, hit_starts = [], []
        for b in range(0, pairs.size, _VERIFY_BATCH):
            sl = slice(b, b + _VERIFY_BATCH)
            segments = padded[seg_start[sl, None] + np.arange(seg_len)]
            ok = verify_candidates(self._windows[windows[sl]], segments, e)
            hit_primers.append(primers[sl][ok])
            hit_starts.append(seg_start[sl][ok] - pad)
        return np.concatenate(hit_primers), np.concatenate(hit_starts)

    def _primer_ids_of(self, window_ids: np.ndarray) -> np.ndarray:
        n_starts = self.library.primer_len - self.params.window_len + 1
        return (window_ids // n_starts) % self.library_size

    def collides(self, primer_id: int, payload: str) -> bool:
        """Indexed answer for a single (primer, payload) pair."""
        alive = np.zeros(self.library_size, dtype=bool)
        alive[primer_id] = True
        return bool(self.payload_hits(payload, alive).size)


def build_collision_index(library: PrimerLibrary, params: CollisionParams = CollisionParams()) -> CollisionIndex:
    return CollisionIndex(library, params)


def chunk_collision_set(frames: List[PayloadFrame], index: CollisionIndex) -> CollisionSet:
    """
    Union of primer collisions over every payload of one chunk.

    Primers already known to collide are skipped for later payloads.

    Raises:
        ValueError: frames belong to more than one chunk
    """
    if len({f.chunk_id for f in frames}) > 1:
        raise ValueError("frames of a collision set must share one chunk_id")
    alive = np.ones(index.library_size, dtype=bool)
    for frame in frames:
        hits = index.payload_hits(frame.payload, alive)
        alive[hits] = False
        if not alive.any():
            break
    return CollisionSet.from_mask(~alive)
