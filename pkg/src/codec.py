"""Byte-to-base codecs, Reed-Solomon outer code and payload framing.

Four schemes turn bytes into DNA bases, each with its own constraint on
the emitted sequence:

* rotation: 19 bits -> 12 trits -> 12 bases, never two equal neighbours.
* blawat: one byte -> 5 bases, bases 1-3 never a homopolymer and base 5
  always differs from the first base of the next block.
* grass: 16 bits -> 3 base-47 digits -> 9 bases, runs of at most 3.
* cac: 3 bits -> one of 4 candidate triplets, picked by a local penalty
  and, given a primer index, swapped away from primer near-matches.

Inputs whose bit count is not a multiple of the scheme block are closed by
one shorter final block. Its length follows from the number of leftover
bits, so decoders can recover the exact byte count from the base count.
"""

import hashlib
import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import TYPE_CHECKING, Callable, Dict, List, Optional, Set, Tuple, Union

import reedsolo

from src.errors import MalformedSequence, TableIntegrityError, UncorrectableCodeword

if TYPE_CHECKING:
    from src.collision import CollisionIndex

logger = logging.getLogger(__name__)

BASES = "ACGT"
PAD_CYCLE = "ACGT"
DEFAULT_PAYLOAD_LEN = 200
MIN_PAYLOAD_LEN = 12

RS_DATA_BYTES = 239
RS_PARITY_BYTES = 16
RS_BLOCK_BYTES = RS_DATA_BYTES + RS_PARITY_BYTES

DEFAULT_TABLES_DIR = Path(__file__).resolve().parent.parent / "tables"
BLAWAT_TABLE_FILE = "blawat.tsv"
GRASS_TABLE_FILE = "grass.tsv"


class SchemeId(str, Enum):
    """Names of the supported encoding schemes."""

    ROTATION = "rotation"
    BLAWAT = "blawat"
    GRASS = "grass"
    CAC_LITE = "cac"


@dataclass(frozen=True)
class EncodingScheme:
    """Block geometry of an encoding scheme."""

    id: SchemeId
    block_in_bits: int
    block_out_bases: int

    @property
    def density(self) -> Fraction:
        """Bits stored per base."""
        return Fraction(self.block_in_bits, self.block_out_bases)


SCHEMES: Dict[SchemeId, EncodingScheme] = {
    SchemeId.ROTATION: EncodingScheme(SchemeId.ROTATION, 19, 12),
    SchemeId.BLAWAT: EncodingScheme(SchemeId.BLAWAT, 8, 5),
    SchemeId.GRASS: EncodingScheme(SchemeId.GRASS, 16, 9),
    SchemeId.CAC_LITE: EncodingScheme(SchemeId.CAC_LITE, 3, 3),
}


@dataclass(frozen=True)
class PayloadFrame:
    """One fixed-length payload cut from a chunk's encoded sequence."""

    payload: str
    chunk_id: int
    strand_index: int


# ---------------------------------------------------------------------------
# Reed-Solomon RS(255, 239) over GF(256), primitive polynomial 0x11d

_rs_codec = reedsolo.RSCodec(RS_PARITY_BYTES, nsize=RS_BLOCK_BYTES)


def rs_encode(data: bytes) -> bytes:
    """
    Append 16 parity bytes to every 239-byte block of data.

    The final block is shortened rather than zero-filled, so the output is
    len(data) + 16 * ceil(len(data) / 239) bytes long.

    Args:
        data: Input bytes

    Returns:
        Systematic codewords, data bytes first within each codeword
    """
    if not data:
        return b""
    return bytes(_rs_codec.encode(bytes(data)))


def rs_decode(code: bytes) -> bytes:
    """
    Correct and strip the parity of an rs_encode stream.

    Args:
        code: Concatenated codewords

    Returns:
        The original data bytes

    Raises:
        UncorrectableCodeword: a codeword holds more than 8 byte errors
        ValueError: the final codeword is too short to hold parity
    """
    out = bytearray()
    for index, start in enumerate(range(0, len(code), RS_BLOCK_BYTES)):
        codeword = bytes(code[start:start + RS_BLOCK_BYTES])
        if len(codeword) <= RS_PARITY_BYTES:
            raise ValueError(f"codeword {index} is truncated ({len(codeword)} bytes)")
        try:
            message, repaired, _ = _rs_codec.decode(codeword)
        except reedsolo.ReedSolomonError as e:
            raise UncorrectableCodeword(index) from e
        if not _rs_codec.check(repaired)[0]:
            raise UncorrectableCodeword(index)
        out.extend(message)
    return bytes(out)


# ---------------------------------------------------------------------------
# Shared bit helpers

def _trits_for_bits(bits: int) -> int:
    """Smallest t with 3**t >= 2**bits."""
    t = 0
    while 3 ** t < (1 << bits):
        t += 1
    return t


def _tail_bits(full_blocks: int, block_bits: int, tail_symbols: int,
               symbols_for_bits: Callable[[int], int]) -> int:
    """
    Recover the bit count of a final partial block from its symbol count.

    The byte stream length forces full_blocks * block_bits + r to be a
    multiple of 8, which leaves at most one r per symbol count.
    """
    if tail_symbols == 0:
        if (full_blocks * block_bits) % 8:
            raise MalformedSequence("sequence does not end on a byte boundary")
        return 0
    r = (-full_blocks * block_bits) % 8
    while r < block_bits:
        if r and symbols_for_bits(r) == tail_symbols:
            return r
        r += 8
    raise MalformedSequence(f"final block of {tail_symbols} symbols matches no bit count")


def _blocks_from_bytes(data: bytes, block_bits: int, group_bytes: int) -> Tuple[List[int], int, int]:
    """
    Split data into full block values plus one partial block.

    group_bytes * 8 must be a multiple of block_bits, so each group converts
    independently of the rest of the input.

    Returns:
        (full block values, partial block value, partial block bit count)
    """
    per_group = group_bytes * 8 // block_bits
    mask = (1 << block_bits) - 1
    blocks: List[int] = []
    full_groups = len(data) // group_bytes
    for g in range(full_groups):
        value = int.from_bytes(data[g * group_bytes:(g + 1) * group_bytes], "big")
        for k in range(per_group - 1, -1, -1):
            blocks.append((value >> (k * block_bits)) & mask)

    tail = data[full_groups * group_bytes:]
    bits = len(tail) * 8
    value = int.from_bytes(tail, "big")
    for k in range(bits // block_bits):
        blocks.append((value >> (bits - block_bits * (k + 1))) & mask)
    rem = bits % block_bits
    return blocks, value & ((1 << rem) - 1), rem


def _bytes_from_blocks(blocks: List[int], block_bits: int, group_bytes: int,
                       partial: int, partial_bits: int) -> bytes:
    per_group = group_bytes * 8 // block_bits
    out = bytearray()
    full_groups = len(blocks) // per_group
    for g in range(full_groups):
        value = 0
        for block in blocks[g * per_group:(g + 1) * per_group]:
            value = (value << block_bits) | block
        out.extend(value.to_bytes(group_bytes, "big"))

    value = 0
    rest = blocks[full_groups * per_group:]
    for block in rest:
        value = (value << block_bits) | block
    bits = len(rest) * block_bits
    if partial_bits:
        value = (value << partial_bits) | partial
        bits += partial_bits
    if bits % 8:
        raise MalformedSequence("sequence does not end on a byte boundary")
    out.extend(value.to_bytes(bits // 8, "big"))
    return bytes(out)


# ---------------------------------------------------------------------------
# Rotation

_ROTATION = {p: [b for b in BASES if b != p] for p in BASES}
_ROTATION_BLOCK_BITS = 19
_ROTATION_BLOCK_TRITS = 12
_HALF = 729  # 3**6


def _walk(prev: str, trits: List[int]) -> str:
    out = []
    for t in trits:
        prev = _ROTATION[prev][t]
        out.append(prev)
    return "".join(out)


def _to_trits(value: int, width: int) -> List[int]:
    trits = [0] * width
    for i in range(width - 1, -1, -1):
        value, trits[i] = divmod(value, 3)
    return trits


_SIX_ENCODE: Dict[str, List[str]] = {
    p: [_walk(p, _to_trits(v, 6)) for v in range(_HALF)] for p in BASES
}
_SIX_DECODE: Dict[str, Dict[str, int]] = {
    p: {seq: v for v, seq in enumerate(_SIX_ENCODE[p])} for p in BASES
}


def encode_rotation(data: bytes) -> str:
    """
    Encode bytes so that no two adjacent bases are equal.

    Each 19-bit block becomes 12 trits (most significant first); a trit picks
    one of the three bases that differ from the previous one, starting from
    a virtual previous base A.
    """
    blocks, partial, partial_bits = _blocks_from_bytes(data, _ROTATION_BLOCK_BITS, 19)
    out: List[str] = []
    prev = "A"
    for block in blocks:
        hi, lo = divmod(block, _HALF)
        first = _SIX_ENCODE[prev][hi]
        second = _SIX_ENCODE[first[-1]][lo]
        out.append(first)
        out.append(second)
        prev = second[-1]
    if partial_bits:
        out.append(_walk(prev, _to_trits(partial, _trits_for_bits(partial_bits))))
    return "".join(out)


def _read_trits(prev: str, seq: str) -> Tuple[int, str]:
    value = 0
    for base in seq:
        candidates = _ROTATION.get(prev)
        if candidates is None or base not in candidates:
            raise MalformedSequence(f"base {base!r} cannot follow {prev!r}")
        value = value * 3 + candidates.index(base)
        prev = base
    return value, prev


def decode_rotation(seq: str) -> bytes:
    """Invert encode_rotation."""
    if not seq:
        return b""
    full, tail = divmod(len(seq), _ROTATION_BLOCK_TRITS)
    # An 18-bit final block needs all 12 trits, which looks like a full block.
    if tail == 0 and full % 8 != 0:
        full, tail = full - 1, _ROTATION_BLOCK_TRITS
    partial_bits = _tail_bits(full, _ROTATION_BLOCK_BITS, tail, _trits_for_bits)

    blocks: List[int] = []
    prev = "A"
    limit = 1 << _ROTATION_BLOCK_BITS
    for i in range(full):
        block_seq = seq[i * 12:(i + 1) * 12]
        hi = _SIX_DECODE[prev].get(block_seq[:6])
        lo = _SIX_DECODE[block_seq[5]].get(block_seq[6:]) if hi is not None else None
        if lo is None:
            # slow path only to name the offending base
            _read_trits(prev, block_seq)
            raise MalformedSequence(f"invalid rotation block {i}")
        value = hi * _HALF + lo
        if value >= limit:
            raise MalformedSequence(f"rotation block {i} exceeds 19 bits")
        blocks.append(value)
        prev = block_seq[-1]

    partial = 0
    if partial_bits:
        partial, _ = _read_trits(prev, seq[full * 12:])
        if partial >= 1 << partial_bits:
            raise MalformedSequence("final rotation block out of range")
    return _bytes_from_blocks(blocks, _ROTATION_BLOCK_BITS, 19, partial, partial_bits)


# ---------------------------------------------------------------------------
# Blawat

def _others(base: str) -> List[str]:
    return [b for b in BASES if b != base]


def blawat_table() -> List[str]:
    """
    Build the 256-entry byte -> 5-base table.

    Bit pairs p0..p3 of a byte (most significant first) give bases 1, 2 and 4
    directly. The high bit of p3 picks base 3 among the bases that differ from
    base 2; the low bit picks base 5 among the bases that differ from the
    first base of the next block. Table entries assume a next base of A.
    """
    table = []
    for byte in range(256):
        p0, p1, p2, p3 = (byte >> 6) & 3, (byte >> 4) & 3, (byte >> 2) & 3, byte & 3
        x2 = BASES[p1]
        table.append(
            BASES[p0] + x2 + _others(x2)[p3 >> 1] + BASES[p2] + _others("A")[p3 & 1]
        )
    return table


_BLAWAT = blawat_table()
_BLAWAT_INVERSE = {codeword: byte for byte, codeword in enumerate(_BLAWAT)}


def encode_blawat(data: bytes) -> str:
    """Encode every byte as 5 bases with the block-boundary rule applied."""
    out = []
    n = len(data)
    for i, byte in enumerate(data):
        codeword = _BLAWAT[byte]
        nxt = _BLAWAT[data[i + 1]][0] if i + 1 < n else "A"
        out.append(codeword[:4] + _others(nxt)[byte & 1])
    return "".join(out)


def decode_blawat(seq: str) -> bytes:
    """Invert encode_blawat."""
    if len(seq) % 5:
        raise MalformedSequence(f"blawat sequence length {len(seq)} is not a multiple of 5")
    out = bytearray()
    count = len(seq) // 5
    for i in range(count):
        block = seq[i * 5:(i + 1) * 5]
        nxt = seq[(i + 1) * 5] if i + 1 < count else "A"
        candidates = _others(nxt)
        if block[4] not in candidates[:2]:
            raise MalformedSequence(f"blawat block {i} ends with an invalid base")
        canonical = block[:4] + _others("A")[candidates.index(block[4])]
        byte = _BLAWAT_INVERSE.get(canonical)
        if byte is None:
            raise MalformedSequence(f"blawat block {i} ({block}) is not a table entry")
        out.append(byte)
    return bytes(out)


# ---------------------------------------------------------------------------
# Grass

GRASS_RADIX = 47


def grass_triplets() -> List[str]:
    """First 47 triplets in A<C<G<T order whose second and third bases differ."""
    triplets = [a + b + c for a in BASES for b in BASES for c in BASES if b != c]
    return triplets[:GRASS_RADIX]


_GRASS = grass_triplets()
_GRASS_INVERSE = {t: d for d, t in enumerate(_GRASS)}


def encode_grass(data: bytes) -> str:
    """
    Encode 16-bit blocks as three base-47 digits, one triplet per digit.

    A trailing odd byte becomes two digits (six bases).
    """
    out = []
    n = len(data)
    for i in range(0, n - 1, 2):
        d2, rest = divmod((data[i] << 8) | data[i + 1], GRASS_RADIX * GRASS_RADIX)
        d1, d0 = divmod(rest, GRASS_RADIX)
        out.append(_GRASS[d2] + _GRASS[d1] + _GRASS[d0])
    if n % 2:
        d1, d0 = divmod(data[-1], GRASS_RADIX)
        out.append(_GRASS[d1] + _GRASS[d0])
    return "".join(out)


def _grass_digits(seq: str, offset: int, count: int) -> int:
    value = 0
    for k in range(count):
        triplet = seq[offset + 3 * k:offset + 3 * k + 3]
        digit = _GRASS_INVERSE.get(triplet)
        if digit is None:
            raise MalformedSequence(f"invalid grass triplet {triplet!r} at {offset + 3 * k}")
        value = value * GRASS_RADIX + digit
    return value


def decode_grass(seq: str) -> bytes:
    """Invert encode_grass."""
    full, tail = divmod(len(seq), 9)
    if tail not in (0, 6):
        raise MalformedSequence(f"grass sequence length {len(seq)} is not 9k or 9k+6")
    out = bytearray()
    for i in range(full):
        value = _grass_digits(seq, i * 9, 3)
        if value >= 1 << 16:
            raise MalformedSequence(f"grass block {i} decodes to {value} >= 65536")
        out.extend(value.to_bytes(2, "big"))
    if tail:
        value = _grass_digits(seq, full * 9, 2)
        if value >= 256:
            raise MalformedSequence(f"final grass block decodes to {value} >= 256")
        out.append(value)
    return bytes(out)


# ---------------------------------------------------------------------------
# CAC-lite

DEFAULT_CAC_CONTEXT = 17
DEFAULT_CAC_REPAIR_ROUNDS = 3
_CAC_BLOCK_BITS = 3


def _triplet(index: int) -> str:
    return BASES[index >> 4] + BASES[(index >> 2) & 3] + BASES[index & 3]


_CAC_CANDIDATES: List[List[str]] = [
    [_triplet(v + 8 * j) for j in range(4)] for v in range(8)
]
_CAC_VALUE = {t: v for v, cands in enumerate(_CAC_CANDIDATES) for t in cands}
_GC = frozenset("GC")


def _max_run(seq: str) -> int:
    best = run = 0
    prev = ""
    for base in seq:
        run = run + 1 if base == prev else 1
        prev = base
        best = max(best, run)
    return best


def _repeat_suffix(seq: str) -> int:
    """Length of the longest suffix of seq that also starts earlier in seq."""
    n = len(seq)
    length = 0
    while length + 1 < n and seq.find(seq[n - length - 1:], 0, n - 1) != -1:
        length += 1
    return length


def cac_penalty(window: str, candidate: str) -> int:
    """
    Score a candidate triplet against the trailing window, scaled by 2n.

    The unscaled penalty is 1000 for a homopolymer run above 3, plus
    1000 * |GC fraction - 1/2|, plus the longest repeated suffix. Candidates
    at one position share n = len(window) + 3, so the scaled integers order
    exactly like the unscaled rationals.
    """
    seq = window + candidate
    n = len(seq)
    gc = sum(1 for b in seq if b in _GC)
    homopolymer = _max_run(window[-3:] + candidate) > 3
    return 2000 * n * homopolymer + 1000 * abs(2 * gc - n) + 2 * n * _repeat_suffix(seq)


def encode_cac_lite(
    data: bytes,
    context_window: int = DEFAULT_CAC_CONTEXT,
    primer_index: Optional["CollisionIndex"] = None
) -> str:
    """
    Encode every 3 bits as the best-scoring of its 4 candidate triplets.

    Candidates for value v are the triplets with base-4 index v + 8j; ties go
    to the lowest j. With a primer index, the result then goes through
    repair_cac_collisions.
    """
    if context_window < 0:
        raise ValueError("context_window must be non-negative")
    blocks, partial, partial_bits = _blocks_from_bytes(data, _CAC_BLOCK_BITS, 3)
    if partial_bits:
        blocks.append(partial)
    out: List[str] = []
    window = ""
    for value in blocks:
        best = min(_CAC_CANDIDATES[value], key=lambda c: cac_penalty(window, c))
        out.append(best)
        window = (window + best)[-context_window:] if context_window else ""
    seq = "".join(out)
    if primer_index is not None:
        seq = repair_cac_collisions(seq, primer_index)
    return seq


def repair_cac_collisions(seq: str, primer_index: "CollisionIndex",
                          rounds: int = DEFAULT_CAC_REPAIR_ROUNDS) -> str:
    """
    Swap candidate triplets inside primer near-matches.

    Every triplet overlapping a near-match found by the index is tried with
    the other candidates of its value. A swap is kept only if the primers
    colliding with the surrounding bases become a strict subset of those
    colliding there before, and no run above 3 appears. The output decodes
    to the same bits and collides with a subset of the primers the input
    collides with.

    Args:
        seq: CAC-lite sequence
        primer_index: Collision index of the primer library
        rounds: Passes over the near-matches left by the previous pass

    Returns:
        Repaired sequence
    """
    if len(seq) % 3:
        raise MalformedSequence(f"cac sequence length {len(seq)} is not a multiple of 3")
    params = primer_index.params
    reach = params.window_len + 2 * params.max_edits
    span = -(-reach // 3)
    triplets = [seq[i:i + 3] for i in range(0, len(seq), 3)]
    count = len(triplets)

    def local_hits(lo: int, hi: int, middle: Optional[int] = None, candidate: str = "") -> Set[int]:
        if middle is None:
            text = "".join(triplets[lo:hi])
        else:
            text = "".join(triplets[lo:middle]) + candidate + "".join(triplets[middle + 1:hi])
        return set(primer_index.payload_hits(text).tolist())

    swaps = 0
    for _ in range(rounds):
        _, starts = primer_index.hit_segments("".join(triplets))
        touched = sorted({
            t
            for start in set(starts.tolist())
            for t in range(max(0, start // 3), min(count, (start + reach + 2) // 3))
        })
        changed = False
        for t in touched:
            lo, hi = max(0, t - span), min(count, t + 1 + span)
            before = local_hits(lo, hi)
            if not before:
                continue
            left = triplets[t - 1] if t else ""
            right = triplets[t + 1] if t + 1 < count else ""
            for candidate in _CAC_CANDIDATES[_CAC_VALUE[triplets[t]]]:
                if candidate == triplets[t] or _max_run(left + candidate + right) > 3:
                    continue
                after = local_hits(lo, hi, t, candidate)
                if after < before:
                    triplets[t] = candidate
                    before = after
                    swaps += 1
                    changed = True
                    if not before:
                        break
        if not changed:
            break
    logger.debug("CAC repair swapped %d of %d triplets", swaps, count)
    return "".join(triplets)


def decode_cac_lite(seq: str) -> bytes:
    """Invert encode_cac_lite; each triplet decodes to its index mod 8."""
    if len(seq) % 3:
        raise MalformedSequence(f"cac sequence length {len(seq)} is not a multiple of 3")
    count = len(seq) // 3
    if count == 0:
        return b""
    values = []
    for i in range(count):
        value = _CAC_VALUE.get(seq[i * 3:i * 3 + 3])
        if value is None:
            raise MalformedSequence(f"cac triplet {i} is not a candidate")
        values.append(value)
    partial_bits = (-(count - 1) * _CAC_BLOCK_BITS) % 8
    if not 1 <= partial_bits <= _CAC_BLOCK_BITS:
        raise MalformedSequence(f"{count} cac triplets do not end on a byte boundary")
    if partial_bits == _CAC_BLOCK_BITS:
        return _bytes_from_blocks(values, _CAC_BLOCK_BITS, 3, 0, 0)
    partial = values.pop()
    if partial >= 1 << partial_bits:
        raise MalformedSequence("final cac triplet out of range")
    return _bytes_from_blocks(values, _CAC_BLOCK_BITS, 3, partial, partial_bits)


# ---------------------------------------------------------------------------
# Framing

def frame_payloads(seq: str, chunk_id: int, payload_len: int = DEFAULT_PAYLOAD_LEN) -> List[PayloadFrame]:
    """
    Cut an encoded sequence into fixed-length payloads.

    Args:
        seq: Encoded base sequence of one chunk
        chunk_id: Owning chunk
        payload_len: Bases per payload

    Returns:
        Frames in order; the last one padded with the ACGT cycle
    """
    if payload_len < MIN_PAYLOAD_LEN:
        raise ValueError(f"payload_len must be at least {MIN_PAYLOAD_LEN}, got {payload_len}")
    frames = []
    for index, start in enumerate(range(0, len(seq), payload_len)):
        payload = seq[start:start + payload_len]
        short = payload_len - len(payload)
        if short:
            payload += (PAD_CYCLE * (short // 4 + 1))[:short]
        frames.append(PayloadFrame(payload=payload, chunk_id=chunk_id, strand_index=index))
    return frames


def unframe_payloads(frames: List[PayloadFrame], encoded_len: int) -> str:
    """Join frames and drop padding using the stored encoded length."""
    seq = "".join(f.payload for f in sorted(frames, key=lambda f: f.strand_index))
    if encoded_len > len(seq):
        raise MalformedSequence(f"frames hold {len(seq)} bases, expected at least {encoded_len}")
    return seq[:encoded_len]


# ---------------------------------------------------------------------------
# Golden tables

def _blawat_table_text() -> str:
    return "".join(f"{byte:02x}\t{cw}\n" for byte, cw in enumerate(_BLAWAT))


def _grass_table_text() -> str:
    return "".join(f"{digit}\t{t}\n" for digit, t in enumerate(_GRASS))


def verify_tables(tables_dir: Optional[Union[str, Path]] = None) -> None:
    """
    Check the frozen codec tables against their generators.

    Raises:
        TableIntegrityError: a table file is missing or its hash differs
    """
    directory = Path(tables_dir) if tables_dir else DEFAULT_TABLES_DIR
    for name, text in ((BLAWAT_TABLE_FILE, _blawat_table_text()),
                       (GRASS_TABLE_FILE, _grass_table_text())):
        path = directory / name
        try:
            stored = path.read_bytes()
        except OSError as e:
            raise TableIntegrityError(f"cannot read codec table {path}: {e}") from e
        expected = hashlib.sha256(text.encode("ascii")).hexdigest()
        actual = hashlib.sha256(stored).hexdigest()
        if actual != expected:
            raise TableIntegrityError(
                f"codec table {path} hash {actual[:12]} does not match generator {expected[:12]}"
            )
    logger.debug("Codec tables verified in %s", directory)


# ---------------------------------------------------------------------------
# Codec interface

class SchemeCodec(ABC):
    """Abstract base class for byte <-> base codecs."""

    scheme: EncodingScheme

    @abstractmethod
    def encode(self, data: bytes) -> str:
        """Encode bytes to bases."""
        pass

    @abstractmethod
    def decode(self, seq: str) -> bytes:
        """Decode bases back to bytes."""
        pass

    @property
    def density(self) -> Fraction:
        return self.scheme.density


class RotationCodec(SchemeCodec):
    scheme = SCHEMES[SchemeId.ROTATION]

    def encode(self, data: bytes) -> str:
        return encode_rotation(data)

    def decode(self, seq: str) -> bytes:
        return decode_rotation(seq)


class BlawatCodec(SchemeCodec):
    scheme = SCHEMES[SchemeId.BLAWAT]

    def encode(self, data: bytes) -> str:
        return encode_blawat(data)

    def decode(self, seq: str) -> bytes:
        return decode_blawat(seq)


class GrassCodec(SchemeCodec):
    scheme = SCHEMES[SchemeId.GRASS]

    def encode(self, data: bytes) -> str:
        return encode_grass(data)

    def decode(self, seq: str) -> bytes:
        return decode_grass(seq)


class CacLiteCodec(SchemeCodec):
    """
    CAC-like codec with a configurable trailing context window.

    Given a primer index, encoded sequences are repaired against the
    library's near-matches; decoding never needs the index.
    """

    scheme = SCHEMES[SchemeId.CAC_LITE]

    def __init__(self, context_window: int = DEFAULT_CAC_CONTEXT,
                 primer_index: Optional["CollisionIndex"] = None):
        self.context_window = context_window
        self.primer_index = primer_index

    def encode(self, data: bytes) -> str:
        return encode_cac_lite(data, self.context_window, self.primer_index)

    def decode(self, seq: str) -> bytes:
        return decode_cac_lite(seq)


class CodecFactory:
    """Factory for creating codec instances."""

    _ALIASES = {"cac_lite": SchemeId.CAC_LITE, "caclite": SchemeId.CAC_LITE}

    @staticmethod
    def create_codec(scheme: Union[str, SchemeId], **kwargs) -> SchemeCodec:
        """
        Create a codec instance.

        Args:
            scheme: Scheme name ('rotation', 'blawat', 'grass' or 'cac')
            **kwargs: Scheme-specific arguments (cac: context_window, primer_index)

        Returns:
            SchemeCodec instance
        """
        key = scheme.value if isinstance(scheme, SchemeId) else str(scheme).lower()
        scheme_id = CodecFactory._ALIASES.get(key)
        if scheme_id is None:
            try:
                scheme_id = SchemeId(key)
            except ValueError:
                raise ValueError(f"Unknown scheme: {scheme}") from None

        if scheme_id is SchemeId.ROTATION:
            return RotationCodec()
        elif scheme_id is SchemeId.BLAWAT:
            return BlawatCodec()
        elif scheme_id is SchemeId.GRASS:
            return GrassCodec()
        return CacLiteCodec(
            context_window=kwargs.get('context_window', DEFAULT_CAC_CONTEXT),
            primer_index=kwargs.get('primer_index'),
        )
