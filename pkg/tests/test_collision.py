"""Tests for collision detection: oracle, seed index and collision sets."""

import numpy as np
import pytest

from src.codec import PayloadFrame
from src.collision import (
    CollisionIndex,
    CollisionParams,
    CollisionSet,
    build_collision_index,
    chunk_collision_set,
    collides_oracle,
    reverse_complement,
    set_intersection_count,
    set_union,
    set_union_count,
    substring_distance,
    window_distance,
)
from src.errors import WidthMismatch, WindowTooLong
from src.primerlib import Primer, PrimerLibrary, generate_library

# 12-base primer over A/C/G; T never matches it, so T filler isolates the planted region
PROBE = "AAAACCCCGGGG"
TWO_EDITS = "AAAACCCGGTG"     # one C deleted, one G -> T
THREE_EDITS = "AAATCCCGGTG"   # plus one A -> T


def random_seq(rng: np.random.Generator, n: int) -> str:
    return "".join("ACGT"[i] for i in rng.integers(0, 4, size=n))


def mutate(rng: np.random.Generator, seq: str, edits: int) -> str:
    chars = list(seq)
    for _ in range(edits):
        op = rng.integers(0, 3)
        pos = int(rng.integers(0, len(chars)))
        if op == 0:
            chars[pos] = "ACGT"[(("ACGT".index(chars[pos])) + 1 + int(rng.integers(0, 3))) % 4]
        elif op == 1 and len(chars) > 1:
            del chars[pos]
        else:
            chars.insert(pos, "ACGT"[int(rng.integers(0, 4))])
    return "".join(chars)


@pytest.fixture(scope="module")
def probe_library():
    return PrimerLibrary(primers=(Primer(id=0, bases=PROBE),), seed=0, primer_len=12)


@pytest.fixture(scope="module")
def library():
    return generate_library(5, 30, 20)


@pytest.fixture(scope="module")
def index(library):
    return build_collision_index(library, CollisionParams())


class TestCollisionParams:
    def test_seed_length(self):
        assert CollisionParams().seed_len == 4
        assert CollisionParams(window_len=16).seed_len == 5

    def test_invalid_params(self):
        with pytest.raises(ValueError):
            CollisionParams(window_len=0)
        with pytest.raises(ValueError):
            CollisionParams(window_len=3, max_edits=3)


class TestOracle:
    def test_reference_distances(self):
        assert substring_distance("ACGT", "TTACGTTT") == 0
        assert substring_distance("ACGT", "TTACTTT") == 1

    def test_verbatim_window(self):
        primer = "ACGTACGTACGT" + "GGCCAGTC"
        payload = "T" * 50 + "ACGTACGTACGT" + "G" * 50
        assert collides_oracle(primer, payload)

    def test_alternating_primer_vs_poly_g(self):
        assert not collides_oracle("AC" * 10, "G" * 200)

    def test_two_edit_construction_collides(self):
        payload = "T" * 20 + TWO_EDITS + "T" * 20
        assert window_distance(PROBE, payload, 12) == 2
        assert collides_oracle(PROBE, payload)

    def test_three_edit_construction_does_not(self):
        payload = "T" * 20 + THREE_EDITS + "T" * 20
        assert window_distance(PROBE, payload, 12) == 3
        assert not collides_oracle(PROBE, payload)

    def test_window_too_long(self):
        with pytest.raises(WindowTooLong):
            collides_oracle("ACGT", "ACGTACGT")

    def test_reverse_complement_switch(self):
        primer = "ACGGTCAGTCCAGTAGCAGT"
        payload = "T" * 30 + reverse_complement(primer) + "T" * 30
        assert not collides_oracle(primer, payload, CollisionParams(window_len=16))
        assert collides_oracle(primer, payload, CollisionParams(window_len=16, reverse_complement=True))

    def test_agrees_with_reference_distance(self):
        """Test the bit-parallel oracle against the plain DP on random near-copies"""
        rng = np.random.Generator(np.random.PCG64(17))
        primer = "ACGGTCAGTCCAGTAGCAGT"
        for _ in range(200):
            window = primer[int(rng.integers(0, 9)):][:12]
            payload = random_seq(rng, 15) + mutate(rng, window, int(rng.integers(0, 5))) + random_seq(rng, 15)
            expected = window_distance(primer, payload, 12) <= 2
            assert collides_oracle(primer, payload) == expected


class TestCollisionIndex:
    def test_single_primer_matches_oracle(self, probe_library):
        # Given: an index over one primer
        idx = CollisionIndex(probe_library)
        rng = np.random.Generator(np.random.PCG64(3))

        # When/Then: random payloads and planted near-copies agree with the oracle
        for trial in range(1000):
            if trial % 4 == 0:
                payload = random_seq(rng, 30) + mutate(rng, PROBE, int(rng.integers(0, 4))) + random_seq(rng, 30)
            else:
                payload = random_seq(rng, 60)
            assert idx.collides(0, payload) == collides_oracle(PROBE, payload), payload

    def test_near_threshold_constructions(self, probe_library):
        idx = CollisionIndex(probe_library)
        assert idx.collides(0, "T" * 20 + TWO_EDITS + "T" * 20)
        assert not idx.collides(0, "T" * 20 + THREE_EDITS + "T" * 20)

    def test_library_matches_oracle(self, library, index):
        rng = np.random.Generator(np.random.PCG64(11))
        for trial in range(60):
            if trial % 2:
                primer = library[int(rng.integers(0, library.size))].bases
                start = int(rng.integers(0, 9))
                planted = mutate(rng, primer[start:start + 12], int(rng.integers(1, 4)))
                payload = random_seq(rng, 90) + planted + random_seq(rng, 90)
            else:
                payload = random_seq(rng, 200)
            expected = [p.id for p in library.primers if collides_oracle(p.bases, payload)]
            assert index.payload_hits(payload).tolist() == expected

    def test_reverse_complement_index_matches_oracle(self, library):
        params = CollisionParams(window_len=16, reverse_complement=True)
        idx = build_collision_index(library, params)
        rng = np.random.Generator(np.random.PCG64(4))
        for _ in range(20):
            primer = library[int(rng.integers(0, library.size))].bases
            payload = random_seq(rng, 60) + mutate(rng, reverse_complement(primer), 1) + random_seq(rng, 60)
            expected = [p.id for p in library.primers if collides_oracle(p.bases, payload, params)]
            assert idx.payload_hits(payload).tolist() == expected

    def test_hit_segments_locate_the_match(self, probe_library):
        idx = CollisionIndex(probe_library)
        primers, starts = idx.hit_segments("T" * 20 + PROBE + "T" * 20)
        assert set(primers.tolist()) == {0}
        # all three seeds of the copy at offset 20 point at the segment max_edits earlier
        assert starts.tolist() == [18]
        assert idx.hit_segments("T" * 50)[0].size == 0

    def test_empty_and_short_payload(self, index):
        assert index.payload_hits("").size == 0
        assert index.payload_hits("ACG").size == 0

    def test_alive_mask_filters(self, library, index):
        payload = "T" * 40 + library[17].bases + "T" * 40
        alive = np.ones(library.size, dtype=bool)
        alive[17] = False
        assert 17 in index.payload_hits(payload).tolist()
        assert 17 not in index.payload_hits(payload, alive).tolist()

    def test_window_too_long(self, library):
        with pytest.raises(WindowTooLong):
            CollisionIndex(library, CollisionParams(window_len=21))


class TestChunkCollisionSet:
    def test_no_shared_seed_gives_empty_set(self, probe_library):
        idx = CollisionIndex(probe_library)
        frames = [PayloadFrame(payload="T" * 200, chunk_id=0, strand_index=i) for i in range(3)]
        assert chunk_collision_set(frames, idx).popcount == 0

    def test_spliced_primer_sets_bit(self, library, index):
        rng = np.random.Generator(np.random.PCG64(8))
        payload = random_seq(rng, 80) + library[17].bases + random_seq(rng, 100)
        cset = chunk_collision_set([PayloadFrame(payload, 2, 0)], index)
        assert 17 in cset
        assert cset.width == library.size

    def test_union_over_frames_matches_oracle(self, library, index):
        rng = np.random.Generator(np.random.PCG64(21))
        frames = [PayloadFrame(random_seq(rng, 200), 5, i) for i in range(4)]
        expected = {
            p.id for p in library.primers
            if any(collides_oracle(p.bases, f.payload) for f in frames)
        }
        assert set(chunk_collision_set(frames, index).ids()) == expected

    def test_adding_frame_never_clears_bits(self, index):
        rng = np.random.Generator(np.random.PCG64(22))
        frames = [PayloadFrame(random_seq(rng, 200), 1, i) for i in range(3)]
        before = chunk_collision_set(frames[:2], index)
        after = chunk_collision_set(frames, index)
        assert before.issubset(after)

    def test_mixed_chunks_rejected(self, index):
        frames = [PayloadFrame("A" * 20, 0, 0), PayloadFrame("A" * 20, 1, 0)]
        with pytest.raises(ValueError):
            chunk_collision_set(frames, index)

    def test_deterministic(self, index):
        rng = np.random.Generator(np.random.PCG64(23))
        frames = [PayloadFrame(random_seq(rng, 200), 1, i) for i in range(3)]
        assert chunk_collision_set(frames, index) == chunk_collision_set(list(reversed(frames)), index)


class TestCollisionSetOps:
    def test_union_identity(self):
        x = CollisionSet.from_ids(16, [1, 5, 9])
        assert set_union(x, CollisionSet.empty(16)) == x

    def test_counts(self):
        a = CollisionSet.from_ids(10, [3, 7])
        b = CollisionSet.from_ids(10, [7, 9])
        assert set_intersection_count(a, b) == 1
        assert set_union_count(a, b) == 3

    def test_inclusion_exclusion(self):
        rng = np.random.Generator(np.random.PCG64(99))
        for _ in range(1000):
            a = CollisionSet.from_mask(rng.random(100) < 0.3)
            b = CollisionSet.from_mask(rng.random(100) < 0.3)
            assert len(a) + len(b) == set_union_count(a, b) + set_intersection_count(a, b)

    def test_width_mismatch(self):
        with pytest.raises(WidthMismatch):
            set_union(CollisionSet.empty(8), CollisionSet.empty(9))

    def test_little_endian_bytes(self):
        cset = CollisionSet.from_ids(10, [0, 9])
        assert cset.to_bytes() == b"\x01\x02"
        assert CollisionSet.from_bytes(10, cset.to_bytes()) == cset

    def test_mask_and_ids(self):
        cset = CollisionSet.from_ids(20, [19, 2, 4])
        assert cset.ids() == [2, 4, 19]
        assert cset.to_mask().sum() == 3
        assert 19 in cset and 20 not in cset

    def test_out_of_range_id(self):
        with pytest.raises(ValueError):
            CollisionSet.from_ids(4, [4])
