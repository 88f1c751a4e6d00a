"""Tests for report building, validation and rendering."""

import logging
from fractions import Fraction

import pytest

from src.alloc import AllocConfig, AllocationPlan, Chunk, allocate
from src.capacity import CapacityParams
from src.collision import CollisionSet
from src.errors import FormatError
from src.report import (
    SWEEP_COLUMNS,
    build_report,
    fixed,
    render_summary,
    sample_files,
    sweep_csv_text,
    validate_report,
    verify_report,
    write_sweep_csv,
)

TINY = CapacityParams(payload_len=80, density=Fraction(1), parallel_factor=1, library_size=20)


@pytest.fixture
def plan():
    sets = [{1, 2, 3}, {1, 2, 4}, {3, 4}, {1, 2, 5}, {5, 6}]
    chunks = [Chunk(i, i, 21, CollisionSet.from_ids(20, s)) for i, s in enumerate(sets)]
    return allocate(chunks, AllocConfig(params=TINY))


def test_fixed():
    assert fixed(Fraction(2, 3)) == "0.667"
    assert fixed(Fraction(5)) == "5.000"
    assert fixed(Fraction(-1, 8), 2) == "-0.12"


class TestBuildReport:
    def test_empty_plan(self):
        report = build_report(AllocationPlan(allocator="aware", params=TINY, k_seq_limit=5),
                              reference_pair_bytes=None)
        assert report['tube_count'] == 0
        assert report['avg_usable_primers'] == "0.000"
        assert report['retrieval']['files_sampled'] == 0
        assert report['retrieval']['max_sequencings'] == 0
        validate_report(report)

    def test_witness_figures(self, plan):
        report = build_report(plan, reference_pair_bytes=None)
        assert report['objective'] == 8
        assert report['tube_count'] == 2
        assert report['pair_capacity_bytes'] == 10
        # tubes keep 16 and 16 usable primers
        assert report['avg_collided_primers'] == "4.000"
        assert report['avg_usable_primers'] == "16.000"
        assert report['retrieval']['files_sampled'] == 5
        assert 'pair_capacity_deviation' not in report
        validate_report(report)

    def test_reference_deviation_warns(self, plan, caplog):
        with caplog.at_level(logging.WARNING, logger="src.report"):
            report = build_report(plan, reference_pair_bytes=8)
        assert report['pair_capacity_deviation'] == "0.250"
        assert "deviates" in caplog.text

    def test_reference_within_tolerance_is_quiet(self, plan, caplog):
        with caplog.at_level(logging.WARNING, logger="src.report"):
            report = build_report(plan, reference_pair_bytes=10)
        assert report['pair_capacity_deviation'] == "0.000"
        assert "deviates" not in caplog.text

    def test_deterministic(self, plan):
        assert build_report(plan) == build_report(plan)


class TestValidateReport:
    def test_missing_field(self, plan):
        report = build_report(plan)
        del report['objective']
        with pytest.raises(FormatError, match="objective"):
            validate_report(report)

    def test_wrong_type(self, plan):
        report = build_report(plan)
        report['tube_count'] = "2"
        with pytest.raises(FormatError):
            validate_report(report)

    def test_wrong_schema(self, plan):
        report = build_report(plan)
        report['schema'] = "report v2"
        with pytest.raises(FormatError, match="schema"):
            validate_report(report)

    def test_tube_count_mismatch(self, plan):
        report = build_report(plan)
        report['tube_count'] = 3
        with pytest.raises(FormatError):
            validate_report(report)

    def test_not_an_object(self):
        with pytest.raises(FormatError):
            validate_report([])


class TestVerifyReport:
    def test_consistent(self, plan):
        assert verify_report(plan, build_report(plan, sample_seed=4)) == []

    def test_tampered_keys_named(self, plan):
        report = build_report(plan)
        report['objective'] = 7
        report['avg_usable_primers'] = "17.000"
        assert verify_report(plan, report) == ['avg_usable_primers', 'objective']


def test_sample_files():
    ids = list(range(50))
    assert sample_files(ids, 100, 0) == ids
    picked = sample_files(ids, 10, 3)
    assert picked == sample_files(ids, 10, 3)
    assert len(set(picked)) == 10 and picked == sorted(picked)


def test_render_summary(plan):
    text = render_summary(build_report(plan, reference_pair_bytes=10))
    assert "Tubes:                  2" in text
    assert "Objective:              8 collided primers" in text
    assert "deviation" in text
    assert len(text.splitlines()) == 12 + 2 + 2


class TestSweepCsv:
    @pytest.fixture
    def rows(self):
        return [
            {
                'chunk_bytes': size,
                'avg_collided_primers_per_chunk': "1.000",
                'avg_tube_capacity': "10.000",
                'avg_sequencings_per_file': "1.000",
                'wall_time': "0.100",
                'extra': "ignored",
            }
            for size in (1024, 4096, 16384, 262144, 1048576)
        ]

    def test_header_and_rows(self, rows):
        lines = sweep_csv_text(rows).splitlines()
        assert lines[0] == ",".join(SWEEP_COLUMNS)
        assert len(lines) == 6
        assert lines[1] == "1024,1.000,10.000,1.000,0.100"

    def test_write(self, rows, tmp_path):
        path = tmp_path / "sweep.csv"
        write_sweep_csv(rows, path)
        assert path.read_text() == sweep_csv_text(rows)
