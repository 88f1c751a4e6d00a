"""Primer library generation, validation and persistence."""

import logging
import os
import re
import tempfile
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import List, Tuple, Union

import numpy as np

from src.errors import FormatError, GenerationExhausted, IoFailure

logger = logging.getLogger(__name__)

BASES = "ACGT"
DEFAULT_LIBRARY_SIZE = 28_000
DEFAULT_PRIMER_LEN = 20
MIN_PRIMER_LEN = 12
MAX_DRAWS = 10 ** 9
GC_MIN_PERCENT = 45
GC_MAX_PERCENT = 55
MAX_HOMOPOLYMER = 3

_BATCH = 8192
_HEADER = re.compile(r"^#primerlib v1 seed=(\d+) size=(\d+) len=(\d+)$")
_BASE_CODES = np.full(256, 255, dtype=np.uint8)
for _code, _base in enumerate(BASES):
    _BASE_CODES[ord(_base)] = _code


@dataclass(frozen=True)
class Primer:
    """A fixed-length primer and its dense library id."""

    id: int
    bases: str


@dataclass(frozen=True)
class PrimerLibrary:
    """Immutable primer library regenerable from (seed, size, primer_len)."""

    primers: Tuple[Primer, ...]
    seed: int
    primer_len: int

    @property
    def size(self) -> int:
        return len(self.primers)

    @cached_property
    def codes(self) -> np.ndarray:
        """Primer bases as a (size, primer_len) uint8 matrix, A=0 C=1 G=2 T=3."""
        return encode_bases("".join(p.bases for p in self.primers)).reshape(self.size, self.primer_len)

    def __len__(self) -> int:
        return len(self.primers)

    def __getitem__(self, primer_id: int) -> Primer:
        return self.primers[primer_id]


def encode_bases(seq: str) -> np.ndarray:
    """Map a base string to a uint8 code array; other characters map to 255."""
    return _BASE_CODES[np.frombuffer(seq.encode("ascii"), dtype=np.uint8)]


def _rules_mask(codes: np.ndarray) -> np.ndarray:
    """Rows of a code matrix that satisfy the GC and homopolymer rules."""
    length = codes.shape[1]
    gc = ((codes == 1) | (codes == 2)).sum(axis=1)
    ok = (100 * gc >= GC_MIN_PERCENT * length) & (100 * gc <= GC_MAX_PERCENT * length)
    if length > MAX_HOMOPOLYMER:
        same = codes[:, 1:] == codes[:, :-1]
        run4 = same[:, :-2] & same[:, 1:-1] & same[:, 2:]
        ok &= ~run4.any(axis=1)
    return ok


def validate_primer(primer: Union[Primer, str], primer_len: int = DEFAULT_PRIMER_LEN) -> bool:
    """
    Check a primer against the library design rules.

    Args:
        primer: Primer or bare base string
        primer_len: Required length

    Returns:
        True iff length, alphabet, GC in [0.45, 0.55] and runs <= 3 all hold
    """
    bases = primer.bases if isinstance(primer, Primer) else primer
    if len(bases) != primer_len or any(b not in BASES for b in bases):
        return False
    return bool(_rules_mask(encode_bases(bases)[None, :])[0])


def generate_library(
    seed: int,
    size: int = DEFAULT_LIBRARY_SIZE,
    primer_len: int = DEFAULT_PRIMER_LEN,
    max_draws: int = MAX_DRAWS
) -> PrimerLibrary:
    """
    Generate a primer library by seeded rejection sampling.

    Candidates are drawn in batches from numpy's PCG64 generator seeded with
    `seed`; accepted candidates keep their draw order and duplicates are
    dropped, so the result depends only on (seed, size, primer_len).

    Args:
        seed: 64-bit generator seed
        size: Number of primers (>= 2)
        primer_len: Bases per primer (>= 12)
        max_draws: Candidate budget

    Returns:
        PrimerLibrary with ids 0..size-1

    Raises:
        GenerationExhausted: fewer than `size` primers after max_draws draws
    """
    if size < 2:
        raise ValueError(f"size must be at least 2, got {size}")
    if primer_len < MIN_PRIMER_LEN:
        raise ValueError(f"primer_len must be at least {MIN_PRIMER_LEN}, got {primer_len}")

    rng = np.random.Generator(np.random.PCG64(seed))
    lookup = np.frombuffer(BASES.encode("ascii"), dtype=np.uint8)
    accepted: List[str] = []
    seen = set()
    draws = 0

    while len(accepted) < size:
        if draws >= max_draws:
            raise GenerationExhausted(
                f"only {len(accepted)} of {size} primers accepted after {draws} draws"
            )
        batch = min(_BATCH, max_draws - draws)
        codes = rng.integers(0, 4, size=(batch, primer_len), dtype=np.uint8)
        draws += batch
        for row in codes[_rules_mask(codes)]:
            bases = lookup[row].tobytes().decode("ascii")
            if bases in seen:
                continue
            seen.add(bases)
            accepted.append(bases)
            if len(accepted) == size:
                break

    logger.info("Generated %d primers of length %d (seed=%d, %d draws)", size, primer_len, seed, draws)
    primers = tuple(Primer(id=i, bases=b) for i, b in enumerate(accepted))
    return PrimerLibrary(primers=primers, seed=seed, primer_len=primer_len)


def serialize_library(lib: PrimerLibrary) -> str:
    lines = [f"#primerlib v1 seed={lib.seed} size={lib.size} len={lib.primer_len}"]
    lines.extend(f"{p.id}\t{p.bases}" for p in lib.primers)
    return "\n".join(lines) + "\n"


def save_library(lib: PrimerLibrary, path: Union[str, Path]) -> None:
    """
    Write a library file atomically.

    Raises:
        IoFailure: the file could not be written
    """
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
        with os.fdopen(fd, "w", encoding="ascii", newline="\n") as f:
            f.write(serialize_library(lib))
        os.replace(tmp, path)
    except OSError as e:
        raise IoFailure(f"cannot write primer library {path}: {e}") from e
    logger.info("Saved %d primers to %s", lib.size, path)


def load_library(path: Union[str, Path]) -> PrimerLibrary:
    """
    Read a library file written by save_library.

    Raises:
        IoFailure: the file could not be read
        FormatError: the header or a record is invalid
    """
    try:
        text = Path(path).read_text(encoding="ascii")
    except (OSError, UnicodeDecodeError) as e:
        raise IoFailure(f"cannot read primer library {path}: {e}") from e

    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise FormatError("empty primer library file", line=1)
    header = _HEADER.match(lines[0])
    if header is None:
        raise FormatError(f"bad header {lines[0]!r}", line=1)
    seed, size, primer_len = (int(g) for g in header.groups())

    records = lines[1:]
    if len(records) != size:
        raise FormatError(f"header declares {size} primers, file holds {len(records)}",
                          line=len(lines))
    primers = []
    seen = set()
    for offset, record in enumerate(records):
        line_no = offset + 2
        parts = record.split("\t")
        if len(parts) != 2 or parts[0] != str(offset):
            raise FormatError(f"expected '{offset}<TAB><bases>', got {record!r}", line=line_no)
        bases = parts[1]
        if not validate_primer(bases, primer_len):
            raise FormatError(f"primer {offset} violates the design rules or length {primer_len}",
                              line=line_no)
        if bases in seen:
            raise FormatError(f"primer {offset} duplicates an earlier primer", line=line_no)
        seen.add(bases)
        primers.append(Primer(id=offset, bases=bases))

    return PrimerLibrary(primers=tuple(primers), seed=seed, primer_len=primer_len)
