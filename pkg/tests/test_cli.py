from __future__ import annotations

import json
from pathlib import Path

import pytest

from pmmft.cli import EXIT_DIAGNOSTICS, EXIT_OK, EXIT_USAGE, load_pattern, main
from pmmft.dsl import dump_pattern, pattern_to_json
from pmmft.pattern import build_named, compose_serial

EXAMPLES = Path(__file__).resolve().parent.parent / "examples"


@pytest.fixture
def j0(tmp_path):
    path = tmp_path / "j0.pat"
    path.write_text(dump_pattern(build_named("J", 0)))
    return path


@pytest.fixture
def chain(tmp_path):
    j0 = build_named("J", 0)
    path = tmp_path / "chain.pat"
    path.write_text(dump_pattern(compose_serial(j0, j0)))
    return path


class TestValidate:
    def test_ok(self, j0, capsys):
        assert main(["validate", str(j0)]) == EXIT_OK
        assert capsys.readouterr().out.startswith("ok: 2 qubits")

    def test_diagnostics(self, tmp_path, capsys):
        bad = tmp_path / "bad.pat"
        bad.write_text("IN: 1\nOUT:\nM 1 0\nM 1 0\n")
        assert main(["validate", str(bad)]) == EXIT_DIAGNOSTICS
        assert "double-measure" in capsys.readouterr().out

    def test_parse_error(self, tmp_path, capsys):
        bad = tmp_path / "bad.pat"
        bad.write_text("Q 1\n")
        assert main(["validate", str(bad)]) == EXIT_DIAGNOSTICS
        assert "line 1" in capsys.readouterr().out

    def test_missing_file(self, tmp_path):
        assert main(["validate", str(tmp_path / "none.pat")]) == EXIT_USAGE

    def test_bad_arguments(self):
        assert main(["frobnicate"]) == EXIT_USAGE
        assert main([]) == EXIT_USAGE

    def test_json_input(self, tmp_path):
        path = tmp_path / "j0.json"
        path.write_text(pattern_to_json(build_named("J", 0)))
        assert load_pattern(path) == build_named("J", 0)

    @pytest.mark.parametrize("name", ["j0.pat", "cz.pat", "j0j0.pat"])
    def test_shipped_examples(self, name):
        assert main(["validate", str(EXAMPLES / name)]) == EXIT_OK


class TestStandardize:
    @pytest.mark.parametrize("strategy", ["rtl", "ltr"])
    def test_dsl_and_trace(self, chain, tmp_path, strategy):
        out, trace = tmp_path / "std.pat", tmp_path / "trace.json"
        code = main(["standardize", str(chain), "--strategy", strategy, "--trace", str(trace), "-o", str(out)])
        assert code == EXIT_OK
        from pmmft.pattern import is_standard

        assert is_standard(load_pattern(out))
        doc = json.loads(trace.read_text())
        assert doc["format_version"] == 1 and doc["steps"]

    def test_json_emit(self, chain, capsys):
        assert main(["standardize", str(chain), "--emit", "json"]) == EXIT_OK
        assert json.loads(capsys.readouterr().out)["seq"]


class TestGraph:
    def test_dot(self, chain, capsys):
        assert main(["graph", str(chain)]) == EXIT_OK
        out = capsys.readouterr().out
        assert out.startswith("graph pattern {") and out.rstrip().endswith("// rounds: 1")

    def test_json(self, chain, capsys):
        assert main(["graph", str(chain), "--format", "json", "--frame-tracking"]) == EXIT_OK
        d = json.loads(capsys.readouterr().out)
        assert d["rounds"] == 1 and len(d["vertices"]) == 3


class TestSimulate:
    def test_dense_branches(self, j0, capsys):
        assert main(["simulate", str(j0), "--branches", "--input-state", "zero"]) == EXIT_OK
        d = json.loads(capsys.readouterr().out)
        assert len(d["branches"]) == 2
        assert sum(b["probability"] for b in d["branches"]) == pytest.approx(1.0)

    def test_dense_single(self, j0, capsys):
        assert main(["simulate", str(j0), "--seed", "1", "--input-state", "plus"]) == EXIT_OK
        d = json.loads(capsys.readouterr().out)
        assert d["state"][0] == [1.0, 0.0]

    def test_stab_with_noise(self, j0, tmp_path, capsys):
        noise = tmp_path / "n.json"
        noise.write_text(json.dumps({"p_meas": 1.0}))
        assert main(["simulate", str(j0), "--backend", "stab", "--noise", str(noise), "--seed", "0"]) == EXIT_OK
        d = json.loads(capsys.readouterr().out)
        assert d["noise"][0]["kind"] == "flip" and d["qubits"]

    def test_stab_rejects_branches(self, j0):
        assert main(["simulate", str(j0), "--backend", "stab", "--branches"]) == EXIT_USAGE

    def test_bad_state(self, j0):
        assert main(["simulate", str(j0), "--input-state", "weird"]) == EXIT_DIAGNOSTICS


class TestUnitary:
    def test_j0(self, j0, capsys):
        assert main(["unitary", str(j0)]) == EXIT_OK
        assert "0.707107" in capsys.readouterr().out

    def test_not_deterministic(self, tmp_path, capsys):
        p = tmp_path / "nd.pat"
        p.write_text("IN: 1\nOUT: 2\nN 2\nE 1 2\nM 1 0\n")
        assert main(["unitary", str(p)]) == EXIT_DIAGNOSTICS
        assert "not deterministic" in capsys.readouterr().out


class TestFT:
    def test_json(self, j0, capsys):
        assert main(["ft", str(j0)]) == EXIT_OK
        cap = capsys.readouterr()
        d = json.loads(cap.out)
        assert {"classical", "logical", "code"} <= set(d)
        assert "105 physical qubits" in cap.err

    def test_dsl_flags(self, j0, capsys):
        assert main(["ft", str(j0), "--emit", "dsl", "--no-verify-prep", "--teleport-every-gadget"]) == EXIT_OK
        assert capsys.readouterr().out.startswith("IN:")

    def test_not_pmm(self, tmp_path, capsys):
        p = tmp_path / "t.pat"
        p.write_text(dump_pattern(build_named("J", "pi/4")))
        assert main(["ft", str(p)]) == EXIT_DIAGNOSTICS
        assert "not PMM" in capsys.readouterr().out


class TestMC:
    def test_single_csv(self, tmp_path, capsys):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"format_version": 1, "experiment": {"pattern": "wire", "trials": 2000, "noise": {"p_meas": 0.1}}}))
        assert main(["mc", str(cfg)]) == EXIT_OK
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0].startswith("p_prep,") and len(lines) == 2

    def test_sweep_json_toml(self, tmp_path, capsys):
        cfg = tmp_path / "c.toml"
        cfg.write_text(
            'p_values = [0.02, 0.04]\nmin_failures = 10\n[experiment]\npattern = "wire"\ntrials = 5000\n'
        )
        assert main(["mc", str(cfg), "--format", "json", "--jobs", "2", "--seed", "3"]) == EXIT_OK
        d = json.loads(capsys.readouterr().out)
        assert len(d["rows"]) == 2 and d["slope"] is not None

    def test_output_file(self, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"experiment": {"trials": 100}, "p_values": [0.1, 0.2], "min_failures": 1}))
        out = tmp_path / "rates.csv"
        assert main(["mc", str(cfg), "-o", str(out)]) == EXIT_OK
        assert out.read_text().splitlines()[-1].startswith("# slope")

    @pytest.mark.parametrize(
        "cfg, code",
        [
            ({"format_version": 2}, EXIT_USAGE),
            ({"experimnt": {}}, EXIT_USAGE),
            ({"experiment": {"trails": 3}}, EXIT_DIAGNOSTICS),
            ({"experiment": {}, "p_values": []}, EXIT_DIAGNOSTICS),
        ],
    )
    def test_bad_configs(self, tmp_path, cfg, code):
        path = tmp_path / "c.json"
        path.write_text(json.dumps(cfg))
        assert main(["mc", str(path)]) == code
