"""Tests for primer library generation, validation and storage."""

import pytest

from src.errors import FormatError, GenerationExhausted, IoFailure
from src.primerlib import (
    DEFAULT_LIBRARY_SIZE,
    Primer,
    generate_library,
    load_library,
    save_library,
    serialize_library,
    validate_primer,
)


@pytest.fixture(scope="module")
def small_library():
    return generate_library(1, 100, 20)


class TestValidatePrimer:
    def test_homopolymer_rejected(self):
        assert validate_primer("A" * 20) is False

    def test_balanced_repeat_accepted(self):
        assert validate_primer("ACGT" * 5) is True

    def test_low_gc_rejected(self):
        # 8 G/C of 20 = 0.40
        assert validate_primer("GCGCGCGC" + "ATATATATATAT") is False

    def test_run_of_three_allowed_four_rejected(self):
        assert validate_primer("AAACGTCGTCGATCGATGCA") is True
        assert validate_primer("AAAACGTCGTCGATCGATGC") is False

    def test_length_and_alphabet(self):
        assert validate_primer("ACGT" * 4) is False
        assert validate_primer("ACGN" * 5) is False
        assert validate_primer("ACGT" * 3, primer_len=12) is True

    def test_accepts_primer_objects(self):
        assert validate_primer(Primer(id=0, bases="ACGT" * 5))


class TestGenerateLibrary:
    def test_deterministic(self):
        assert generate_library(1, 10, 20) == generate_library(1, 10, 20)

    def test_seed_changes_library(self):
        assert generate_library(1, 10, 20).primers != generate_library(2, 10, 20).primers

    def test_all_primers_valid_and_distinct(self):
        lib = generate_library(1, 1000, 20)
        assert lib.size == 1000
        assert all(validate_primer(p) for p in lib.primers)
        assert len({p.bases for p in lib.primers}) == 1000
        assert [p.id for p in lib.primers] == list(range(1000))

    def test_codes_matrix(self, small_library):
        codes = small_library.codes
        assert codes.shape == (100, 20)
        assert "".join("ACGT"[c] for c in codes[5]) == small_library[5].bases

    def test_prefix_stability(self):
        # accepted primers keep draw order, so a larger library extends a smaller one
        assert generate_library(3, 50).primers[:20] == generate_library(3, 20).primers

    def test_size_precondition(self):
        with pytest.raises(ValueError):
            generate_library(1, 1)

    def test_primer_len_precondition(self):
        with pytest.raises(ValueError):
            generate_library(1, 10, 11)

    def test_exhausted_budget(self):
        with pytest.raises(GenerationExhausted):
            generate_library(1, 10, 20, max_draws=5)

    def test_default_size(self):
        assert DEFAULT_LIBRARY_SIZE == 28_000


class TestLibraryFile:
    def test_round_trip(self, small_library, tmp_path):
        path = tmp_path / "primers.txt"
        save_library(small_library, path)
        assert load_library(path) == small_library

    def test_header_format(self, small_library):
        text = serialize_library(small_library)
        assert text.startswith("#primerlib v1 seed=1 size=100 len=20\n")
        assert text.splitlines()[1] == f"0\t{small_library[0].bases}"

    def test_short_primer_line(self, small_library, tmp_path):
        lines = serialize_library(small_library).splitlines()
        lines[3] = lines[3][:-1]
        path = tmp_path / "bad.txt"
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(FormatError) as exc_info:
            load_library(path)
        assert exc_info.value.line == 4

    def test_header_size_mismatch(self, small_library, tmp_path):
        text = serialize_library(small_library).replace("size=100", "size=101")
        path = tmp_path / "bad.txt"
        path.write_text(text)
        with pytest.raises(FormatError):
            load_library(path)

    def test_duplicate_primer(self, tmp_path):
        path = tmp_path / "dup.txt"
        path.write_text("#primerlib v1 seed=0 size=2 len=20\n0\t" + "ACGT" * 5 + "\n1\t" + "ACGT" * 5 + "\n")
        with pytest.raises(FormatError, match="duplicates"):
            load_library(path)

    def test_bad_header(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("primers\n")
        with pytest.raises(FormatError) as exc_info:
            load_library(path)
        assert exc_info.value.line == 1

    def test_missing_file(self, tmp_path):
        with pytest.raises(IoFailure):
            load_library(tmp_path / "missing.txt")
