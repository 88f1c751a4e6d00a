"""Tests for the command-line interface."""

import json
from fractions import Fraction

import pytest

from main import build_parser, main
from src.primerlib import load_library
from src.report import validate_report

PLANTED_CONFIG = """\
codec:
  scheme: "cac"
  payload_len: 256
capacity:
  parallel_factor: 26
  reference_pair_capacity_bytes: 832
allocation:
  chunk_bytes: 4096
workload:
  mode: "planted"
  seed: 11
  planted:
    group_count: 5
    primers_per_group: 40
    chunks_per_group: 40
    primers_per_chunk: 12
    chunks_per_file: 2
"""


@pytest.fixture(scope="module")
def primer_lib(tmp_path_factory):
    path = tmp_path_factory.mktemp("lib") / "primers.txt"
    main(["gen-primers", "--seed", "1", "--size", "60", "--out", str(path)])
    return path


def run_args(primer_lib, out, *extra):
    return [
        "--config", str(out.parent / "absent.yaml"),
        "run", "--primer-lib", str(primer_lib),
        "--seed", "3", "--total-bytes", "8192", "--chunk-bytes", "1024",
        "--window", "16", "--parallel-factor", "4",
        "--out", str(out), *extra,
    ]


class TestGenPrimers:
    def test_writes_library(self, primer_lib):
        assert load_library(primer_lib).size == 60

    def test_deterministic(self, tmp_path):
        a, b = tmp_path / "a.txt", tmp_path / "b.txt"
        main(["gen-primers", "--seed", "4", "--size", "30", "--out", str(a)])
        main(["gen-primers", "--seed", "4", "--size", "30", "--out", str(b)])
        assert a.read_bytes() == b.read_bytes()

    def test_size_must_be_at_least_two(self, tmp_path):
        with pytest.raises(SystemExit) as exc_info:
            main(["gen-primers", "--size", "0", "--out", str(tmp_path / "x.txt")])
        assert exc_info.value.code == 2


class TestRun:
    def test_writes_artifacts(self, primer_lib, tmp_path):
        out = tmp_path / "out"
        main(run_args(primer_lib, out, "--save-csets"))
        for name in ("plan.json", "report.json", "timings.json", "chunks.cset"):
            assert (out / name).exists()
        report = json.loads((out / "report.json").read_text())
        validate_report(report)
        assert report['library_size'] == 60

    def test_byte_identical_reruns(self, primer_lib, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        main(run_args(primer_lib, a))
        main(run_args(primer_lib, b))
        assert (a / "plan.json").read_bytes() == (b / "plan.json").read_bytes()
        assert (a / "report.json").read_bytes() == (b / "report.json").read_bytes()

    def test_json_output(self, primer_lib, tmp_path, capsys):
        main(run_args(primer_lib, tmp_path / "out", "--json"))
        validate_report(json.loads(capsys.readouterr().out))

    def test_missing_primer_lib(self, tmp_path, capsys):
        with pytest.raises(SystemExit) as exc_info:
            main(run_args(tmp_path / "missing.txt", tmp_path / "out"))
        assert exc_info.value.code == 1
        assert "Error:" in capsys.readouterr().err

    def test_planted_aware_beats_sequential(self, tmp_path, capsys):
        # Given: a 440-primer library and five planted 40-primer groups
        lib = tmp_path / "primers.txt"
        main(["gen-primers", "--seed", "2", "--size", "440", "--out", str(lib)])
        config = tmp_path / "planted.yaml"
        config.write_text(PLANTED_CONFIG)
        capsys.readouterr()

        # When
        usable = {}
        for allocator in ("aware", "sequential"):
            main(["--config", str(config), "run", "--primer-lib", str(lib), "--allocator", allocator,
                  "--out", str(tmp_path / allocator), "--json"])
            usable[allocator] = Fraction(json.loads(capsys.readouterr().out)['avg_usable_primers'])

        # Then
        assert usable["aware"] > usable["sequential"]
        assert usable["aware"] >= 400


class TestReport:
    def test_report_from_plan(self, primer_lib, tmp_path, capsys):
        out = tmp_path / "out"
        main(run_args(primer_lib, out))
        capsys.readouterr()
        main(["report", str(out / "plan.json"), "--json"])
        printed = json.loads(capsys.readouterr().out)
        assert printed == json.loads((out / "report.json").read_text())

    def test_report_without_stored_report(self, primer_lib, tmp_path, capsys):
        out = tmp_path / "out"
        main(run_args(primer_lib, out))
        (out / "report.json").unlink()
        capsys.readouterr()
        main(["report", str(out / "plan.json")])
        assert "Tubes:" in capsys.readouterr().out

    def test_tampered_report(self, primer_lib, tmp_path, capsys):
        out = tmp_path / "out"
        main(run_args(primer_lib, out))
        report = json.loads((out / "report.json").read_text())
        report['objective'] += 1
        (out / "report.json").write_text(json.dumps(report))
        with pytest.raises(SystemExit) as exc_info:
            main(["report", str(out / "plan.json")])
        assert exc_info.value.code == 1
        assert "objective" in capsys.readouterr().err

    def test_malformed_plan(self, tmp_path, capsys):
        path = tmp_path / "plan.json"
        path.write_text("{not json")
        with pytest.raises(SystemExit) as exc_info:
            main(["report", str(path)])
        assert exc_info.value.code == 1


def test_sweep_writes_csv(primer_lib, tmp_path):
    out = tmp_path / "sweep"
    args = run_args(primer_lib, out)
    args[args.index("run")] = "sweep"
    args.remove("--chunk-bytes")
    args.remove("1024")
    main(args + ["--chunk-sizes", "1024", "4096"])
    lines = (out / "sweep.csv").read_text().splitlines()
    assert lines[0].startswith("chunk_bytes,")
    assert [line.split(",")[0] for line in lines[1:]] == ["1024", "4096"]


def test_no_command_exits_2():
    with pytest.raises(SystemExit) as exc_info:
        main([])
    assert exc_info.value.code == 2


def test_parser_rejects_short_payload():
    with pytest.raises(SystemExit):
        build_parser().parse_args(["run", "--payload-len", "8"])
