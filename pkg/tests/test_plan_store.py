"""Tests for plan, report and collision-set persistence."""

import json
from fractions import Fraction

import pytest

from src.alloc import AllocConfig, Chunk, allocate
from src.capacity import CapacityParams
from src.collision import CollisionSet
from src.errors import FormatError, IoFailure
from src.plan_store import (
    CSET_MAGIC,
    PlanStore,
    atomic_write,
    dump_json,
    load_collision_sets,
    load_plan_file,
    parse_collision_sets,
    plan_from_dict,
    plan_to_dict,
    serialize_collision_sets,
)

TINY = CapacityParams(payload_len=80, density=Fraction(1), parallel_factor=1, library_size=20)


@pytest.fixture
def chunks():
    sets = [{1, 2, 3}, {1, 2, 4}, {3, 4}, {1, 2, 5}, {5, 6}]
    return [Chunk(i, i // 2, 21, CollisionSet.from_ids(20, s)) for i, s in enumerate(sets)]


@pytest.fixture
def plan(chunks):
    return allocate(chunks, AllocConfig(params=TINY))


@pytest.fixture
def store(tmp_path):
    return PlanStore(tmp_path / "out")


class TestPlanRoundTrip:
    def test_store_round_trip(self, plan, store):
        store.save_plan(plan)
        loaded = store.load_plan()
        assert plan_to_dict(loaded) == plan_to_dict(plan)
        assert loaded.objective == plan.objective == 8

    def test_creates_directory(self, plan, store):
        path = store.save_plan(plan)
        assert path == store.plan_path
        assert path.exists()

    def test_json_is_stable(self, plan, store):
        store.save_plan(plan)
        first = store.plan_path.read_bytes()
        store.save_plan(store.load_plan())
        assert store.plan_path.read_bytes() == first
        assert first.endswith(b"}\n")

    def test_density_kept_exact(self, plan):
        obj = plan_to_dict(plan)
        assert obj['params']['density'] == "1"
        assert plan_from_dict(obj).params == TINY

    def test_load_plan_file(self, plan, tmp_path):
        path = tmp_path / "elsewhere.json"
        path.write_text(dump_json(plan_to_dict(plan)))
        assert load_plan_file(path).objective == plan.objective


class TestPlanErrors:
    def test_wrong_schema(self, plan):
        obj = plan_to_dict(plan)
        obj['schema'] = "plan v0"
        with pytest.raises(FormatError):
            plan_from_dict(obj)

    def test_objective_mismatch(self, plan):
        obj = plan_to_dict(plan)
        obj['objective'] += 1
        with pytest.raises(FormatError, match="objective"):
            plan_from_dict(obj)

    def test_usable_disagrees_with_collided(self, plan):
        obj = plan_to_dict(plan)
        obj['tubes'][0]['usable_primers'] -= 1
        with pytest.raises(FormatError, match="usable_primers"):
            plan_from_dict(obj)

    def test_missing_field(self, plan):
        obj = plan_to_dict(plan)
        del obj['tubes'][0]['pair_loads']
        with pytest.raises(FormatError, match="malformed"):
            plan_from_dict(obj)

    def test_bad_json_reports_line(self, store):
        store.directory.mkdir(parents=True)
        store.plan_path.write_text('{\n  "schema": "plan v1",\n  oops\n}\n')
        with pytest.raises(FormatError) as exc_info:
            store.load_plan()
        assert exc_info.value.line == 3

    def test_missing_plan(self, store):
        with pytest.raises(IoFailure):
            store.load_plan()


class TestCollisionSetDump:
    def test_round_trip(self, chunks, store):
        path = store.save_collision_sets(chunks, 20)
        library_size, loaded = load_collision_sets(path)
        assert library_size == 20
        assert loaded == chunks

    def test_layout(self, chunks):
        data = serialize_collision_sets(chunks, 20)
        # magic, 8-byte header, then 12-byte record header plus 3 bitvector bytes per chunk
        assert data.startswith(CSET_MAGIC)
        assert len(data) == len(CSET_MAGIC) + 8 + len(chunks) * (12 + 3)

    def test_empty_dump(self):
        assert parse_collision_sets(serialize_collision_sets([], 9)) == (9, [])

    def test_bad_magic(self, chunks):
        data = serialize_collision_sets(chunks, 20)
        with pytest.raises(FormatError, match="magic"):
            parse_collision_sets(b"CSET v2\n" + data[len(CSET_MAGIC):])

    def test_truncated(self, chunks):
        data = serialize_collision_sets(chunks, 20)
        with pytest.raises(FormatError):
            parse_collision_sets(data[:-1])
        with pytest.raises(FormatError, match="header"):
            parse_collision_sets(CSET_MAGIC + b"\x00")

    def test_width_mismatch(self, chunks):
        with pytest.raises(ValueError):
            serialize_collision_sets(chunks, 21)


class TestReportFiles:
    def test_report_round_trip(self, store):
        report = {'schema': "report v1", 'tubes': [], 'objective': 0}
        store.save_report(report)
        assert store.load_report() == report

    def test_timings_file(self, store):
        path = store.save_timings({'allocate': 0.5})
        assert json.loads(path.read_text()) == {'allocate': 0.5}


def test_atomic_write_replaces_without_leftovers(tmp_path):
    path = tmp_path / "a" / "b.txt"
    atomic_write(path, "one")
    atomic_write(path, b"two")
    assert path.read_text() == "two"
    assert [p.name for p in path.parent.iterdir()] == ["b.txt"]


def test_atomic_write_failure(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(IoFailure):
        atomic_write(blocker / "child.txt", "data")
