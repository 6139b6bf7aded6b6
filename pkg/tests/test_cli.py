"""Command-line interface: output formats, determinism, exit codes."""
import json
import math

import pytest

from fockdistill.cli import format_angle, main, parse_angle

jsonschema = pytest.importorskip("jsonschema")


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def load_schema():
    from importlib import resources
    ref = resources.files("fockdistill") / "schemas" / "cli_output.schema.json"
    return json.loads(ref.read_text())


class TestAngles:
    @pytest.mark.parametrize("text,value", [
        ("pi", math.pi), ("pi/8", math.pi / 8), ("3pi/4", 3 * math.pi / 4),
        ("2pi", 2 * math.pi), ("-pi/2", -math.pi / 2), ("0.5", 0.5),
    ])
    def test_parse(self, text, value):
        assert parse_angle(text) == pytest.approx(value)

    def test_parse_garbage(self):
        with pytest.raises(ValueError):
            parse_angle("pie")

    @pytest.mark.parametrize("value,text", [
        (math.pi, "pi"), (math.pi / 8, "pi/8"), (3 * math.pi / 8, "3pi/8"),
        (0.0, "0"), (2 * math.pi, "2pi"),
    ])
    def test_format(self, value, text):
        assert format_angle(value) == text

    def test_format_irrational(self):
        assert format_angle(1.234567) == "1.234567"

    def test_roundtrip(self):
        for text in ("pi", "pi/16", "5pi/8"):
            assert format_angle(parse_angle(text)) == text


class TestPlanCommand:
    def test_table(self, capsys):
        code, out, _ = run_cli(capsys, "plan", "--target", "51",
                               "--steps", "4")
        assert code == 0
        lines = out.splitlines()
        assert lines[0].split() == ["m", "phi", "theta", "M"]
        body = [l.split() for l in lines[2:]]
        assert body == [["0", "pi", "0", "S"],
                        ["1", "pi/2", "pi/2", "S"],
                        ["2", "pi/4", "3pi/4", "G"],
                        ["3", "pi/8", "3pi/8", "G"]]

    def test_json_schema(self, capsys):
        code, out, _ = run_cli(capsys, "plan", "--target", "100",
                               "--steps", "5", "--format", "json")
        assert code == 0
        jsonschema.validate(json.loads(out), load_schema())


class TestDistillCommand:
    def test_table_matches_reference(self, capsys):
        code, out, _ = run_cli(capsys, "distill", "--target", "100",
                               "--alpha", "10")
        assert code == 0
        assert "0.6424" in out
        assert "pi/16" in out

    def test_json_schema(self, capsys):
        code, out, _ = run_cli(capsys, "distill", "--target", "100",
                               "--alpha", "10", "--format", "json")
        assert code == 0
        payload = json.loads(out)
        jsonschema.validate(payload, load_schema())
        probs = [s["probability"] for s in payload["trajectory"]["steps"]]
        assert probs[-1] == pytest.approx(0.6424, abs=1e-3)

    def test_deterministic(self, capsys):
        _, a, _ = run_cli(capsys, "distill", "--target", "100",
                          "--alpha", "10", "--format", "json")
        _, b, _ = run_cli(capsys, "distill", "--target", "100",
                          "--alpha", "10", "--format", "json")
        assert a == b

    def test_domain_error_exit_1(self, capsys):
        code, out, err = run_cli(capsys, "distill", "--target", "5",
                                 "--alpha", "10")
        assert code == 1
        obj = json.loads(err)
        assert obj["error"] == "InvalidPlanError"

    def test_csv(self, capsys):
        code, out, _ = run_cli(capsys, "distill", "--target", "100",
                               "--alpha", "10", "--format", "csv")
        assert code == 0
        assert out.splitlines()[0] == "m,phi,theta,M,P,survivors"


class TestOtherCommands:
    def test_detuning_table(self, capsys):
        code, out, _ = run_cli(capsys, "detuning-table", "--phases",
                               "pi/2,pi/4,pi/8,pi/16,pi/32",
                               "--cooperativity", "250")
        assert code == 0
        assert "-2.41421" in out and "-20.35547" in out
        assert "0.998" in out

    def test_detuning_json_schema(self, capsys):
        code, out, _ = run_cli(capsys, "detuning-table", "--phases",
                               "pi/2,pi/4", "--format", "json")
        assert code == 0
        jsonschema.validate(json.loads(out), load_schema())

    def test_source_stats(self, capsys):
        code, out, _ = run_cli(capsys, "source-stats", "--alpha", "10",
                               "--squeeze", "0.75", "--format", "json")
        assert code == 0
        payload = json.loads(out)
        jsonschema.validate(payload, load_schema())
        assert payload["iterations_required"] == 4
        assert payload["windowed"]["mandel_q"] < 0

    def test_delete_prime(self, capsys):
        code, out, _ = run_cli(capsys, "delete-prime", "--alpha", "10",
                               "--prime", "101", "--format", "json")
        assert code == 0
        payload = json.loads(out)
        jsonschema.validate(payload, load_schema())
        amps = payload["exact_state"]["amps"]
        lo = payload["exact_state"]["window_lo"]
        assert amps[101 - lo] == [0.0, 0.0]

    def test_explore(self, capsys):
        code, out, _ = run_cli(capsys, "explore", "--alpha", "3",
                               "--depth", "2", "--format", "json")
        assert code == 0
        payload = json.loads(out)
        jsonschema.validate(payload, load_schema())
        total = sum(l["cumulative_probability"] for l in payload["leaves"])
        assert total == pytest.approx(1.0, abs=1e-9)

    def test_pulse_fidelity_small(self, capsys, tmp_path):
        csv = tmp_path / "traj.csv"
        code, out, _ = run_cli(
            capsys, "pulse-fidelity", "--phi", "pi", "--alpha", "0.3",
            "--trunc", "3", "--tau", "8", "--t0", "30", "--t-max", "60",
            "--dt", "0.1", "--sample-every", "100", "--format", "json",
            "--csv", str(csv))
        assert code == 0
        payload = json.loads(out)
        jsonschema.validate(payload, load_schema())
        assert payload["final_fidelity"] > 0.9
        assert csv.read_text().startswith("t,fidelity,trace")

    def test_output_file(self, capsys, tmp_path):
        path = tmp_path / "plan.json"
        code, out, _ = run_cli(capsys, "plan", "--target", "10", "--steps",
                               "3", "--format", "json", "--output", str(path))
        assert code == 0 and out == ""
        jsonschema.validate(json.loads(path.read_text()), load_schema())


class TestConfigFile:
    def test_json_config_defaults(self, capsys, tmp_path):
        cfg = tmp_path / "run.json"
        cfg.write_text(json.dumps({"target": 100, "alpha": 10.0}))
        code, out, _ = run_cli(capsys, "--config", str(cfg), "distill",
                               "--target", "0", "--alpha", "1")
        assert code == 0
        assert "0.6424" in out

    def test_toml_config(self, capsys, tmp_path):
        cfg = tmp_path / "run.toml"
        cfg.write_text('target = 51\nsteps = 4\n')
        code, out, _ = run_cli(capsys, "--config", str(cfg), "plan",
                               "--target", "0", "--steps", "0")
        assert code == 0
        assert "3pi/8" in out


class TestUsageErrors:
    def test_unknown_flag_exit_2(self):
        with pytest.raises(SystemExit) as exc:
            main(["plan", "--target", "1", "--steps", "1", "--bogus"])
        assert exc.value.code == 2

    def test_missing_subcommand_exit_2(self):
        with pytest.raises(SystemExit) as exc:
            main([])
        assert exc.value.code == 2
