import json
import math

import pytest

from annuli.cli import main, parse_config, render_csv, render_json

E_STR = "2.718281828459045"
CANON = ["--r", "1", "--R", "2", "--rstar", "1", "--Rstar", E_STR]


def run_cli(capsys, *args):
    code = main(list(args))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestParseConfig:
    def test_flags_build_a_pair(self):
        cfg = parse_config(["energy", *CANON])
        assert cfg.pair.r == 1.0 and math.isclose(cfg.pair.R_star, math.e)
        assert cfg.grid_n == 1000 and cfg.sphere_order == 32
        assert cfg.radial_order == 64 and cfg.seed == 42
        assert cfg.output_format == "csv"

    def test_flag_overrides_config_file(self, tmp_path):
        f = tmp_path / "c.txt"
        f.write_text("r=1\nR=2\nrstar=1\nRstar=2.0\nseed=9\n")
        cfg = parse_config(["energy", "--config", str(f), "--seed", "7"])
        assert cfg.seed == 7

    def test_json_config_file(self, tmp_path):
        f = tmp_path / "c.json"
        f.write_text(json.dumps({"r": 1, "R": 2, "rstar": 1, "Rstar": 2.0, "format": "json"}))
        cfg = parse_config(["energy", "--config", str(f)])
        assert cfg.output_format == "json"

    def test_swapped_radii_message(self, capsys):
        code, _, err = run_cli(capsys, "energy", "--r", "2", "--R", "1",
                               "--rstar", "1", "--Rstar", "3")
        assert code == 2
        assert "inner radius must be less than outer" in err

    def test_missing_radius_is_a_usage_error(self, capsys):
        code, _, err = run_cli(capsys, "energy", "--r", "1", "--R", "2", "--rstar", "1")
        assert code == 2
        assert "--Rstar" in err

    def test_unknown_config_key_is_diagnosed(self, tmp_path, capsys):
        f = tmp_path / "c.txt"
        f.write_text("bogus=1\n")
        code, _, err = run_cli(capsys, "verify", "--config", str(f))
        assert code == 2 and "bogus" in err

    def test_malformed_config_line_number(self, tmp_path):
        f = tmp_path / "c.txt"
        f.write_text("r=1\nnot a pair\n")
        with pytest.raises(Exception, match="line 2"):
            parse_config(["energy", "--config", str(f)])


class TestRendering:
    def test_csv_uses_12_digit_scientific_floats(self):
        text = render_csv([{"x": 1.0, "flag": True, "empty": None}])
        assert text == "x,flag,empty\n1.000000000000e+00,true,\n"

    def test_json_rounds_and_nests(self):
        text = render_json({"v": 1.23456789012345e-3, "nan": math.nan})
        data = json.loads(text)
        assert data["v"] == float("1.234567890123e-3")
        assert data["nan"] is None


class TestEnergyCommand:
    def test_reference_value_in_csv(self, capsys):
        code, out, _ = run_cli(capsys, "energy", *CANON)
        assert code == 0
        header, row = out.strip().splitlines()
        assert header == "analytic,h1_numeric,h2_numeric,delta"
        analytic = float(row.split(",")[0])
        assert math.isclose(analytic, 16.0 * math.pi, rel_tol=1e-12)

    def test_degenerate_target(self, capsys):
        code, out, _ = run_cli(capsys, "energy", "--r", "1", "--R", "2",
                               "--rstar", "1", "--Rstar", "1")
        assert code == 0
        analytic = float(out.strip().splitlines()[1].split(",")[0])
        assert math.isclose(analytic, 8.0 * math.pi, rel_tol=1e-12)

    def test_json_object_keys(self, capsys):
        code, out, _ = run_cli(capsys, "energy", *CANON, "--format", "json")
        data = json.loads(out)
        assert set(data) == {"analytic", "h1_numeric", "h2_numeric", "delta"}


class TestMinimizeCommand:
    def test_profile_table_shape_and_accuracy(self, capsys):
        code, out, _ = run_cli(capsys, "minimize", *CANON, "--grid-n", "1000")
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0] == "t,H_discrete,H_closed_form,abs_error,el_residual"
        data_lines = [l for l in lines[1:] if not l.startswith(("energy", "analytic", "gap"))]
        assert len(data_lines) == 1001
        max_err = max(float(l.split(",")[3]) for l in data_lines)
        assert max_err <= 1e-5
        assert lines[-1].startswith("gap,")

    def test_error_shrinks_4x_when_n_doubles(self, capsys):
        errs = {}
        for n in (500, 1000):
            _, out, _ = run_cli(capsys, "minimize", *CANON, "--grid-n", str(n))
            rows = [l for l in out.strip().splitlines()[1:]
                    if not l.startswith(("energy", "analytic", "gap"))]
            errs[n] = max(float(l.split(",")[3]) for l in rows)
        assert 3.2 < errs[500] / errs[1000] < 4.8

    def test_constant_solution_for_equal_targets(self, capsys):
        _, out, _ = run_cli(capsys, "minimize", "--r", "1", "--R", "2",
                            "--rstar", "1.5", "--Rstar", "1.5", "--grid-n", "4")
        rows = [l for l in out.strip().splitlines()[1:]
                if not l.startswith(("energy", "analytic", "gap"))]
        assert all(float(l.split(",")[1]) == 1.5 for l in rows)


class TestNitscheCommand:
    def test_admissible_pair(self, capsys):
        code, out, _ = run_cli(capsys, "nitsche", "--r", "1", "--R", "2",
                               "--rstar", "1", "--Rstar", "2")
        assert code == 0
        header, row = out.strip().splitlines()
        vals = dict(zip(header.split(","), row.split(",")))
        assert vals["admissible"] == "true"
        assert math.isclose(float(vals["threshold"]), 12.0 / 17.0, rel_tol=1e-12)
        assert vals["harmonic_energy"] != ""

    def test_inadmissible_pair_has_no_energy_column_value(self, capsys):
        _, out, _ = run_cli(capsys, "nitsche", "--r", "1", "--R", "2",
                            "--rstar", "1", "--Rstar", "1.01")
        row = out.strip().splitlines()[1]
        assert row.endswith(",")  # empty harmonic_energy cell


class TestVerifyCommand:
    def test_passes_and_reports_to_stderr(self, capsys):
        code, out, err = run_cli(capsys, "verify", "--seed", "42")
        assert code == 0
        assert "checks passed" in err
        assert out.startswith("name,passed,")

    def test_byte_identical_outputs(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(["verify", "--seed", "42", "--output", str(a)]) == 0
        assert main(["verify", "--seed", "42", "--output", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_failing_suite_exits_nonzero(self, capsys, monkeypatch):
        import annuli.cli as cli_mod
        from annuli.verify import CheckResult, SuiteReport

        def fake_suite(cfg):
            return SuiteReport([CheckResult("stub", False, 1.0, 0.0, 0.0)], 42, 0.0)

        monkeypatch.setattr(cli_mod, "run_suite", fake_suite)
        code, out, err = run_cli(capsys, "verify")
        assert code == 1
        assert "0/1" in err


class TestSweepCommand:
    def test_single_axis_monotone_energy(self, capsys):
        code, out, _ = run_cli(capsys, "sweep", "--r", "1", "--R", "2", "--rstar", "1",
                               "--sweep", "Rstar=1.1:3:20")
        assert code == 0
        lines = out.strip().splitlines()
        idx = lines[0].split(",").index("analytic_min")
        vals = [float(l.split(",")[idx]) for l in lines[1:]]
        assert len(vals) == 20
        assert all(a < b for a, b in zip(vals, vals[1:]))

    def test_two_axes_row_major(self, capsys):
        code, out, _ = run_cli(capsys, "sweep", "--rstar", "1", "--Rstar", "2",
                               "--sweep", "r=0.5:1:2", "--sweep", "R=2:3:3")
        assert code == 0
        lines = out.strip().splitlines()[1:]
        assert len(lines) == 6
        r_col = [float(l.split(",")[0]) for l in lines]
        assert r_col == [0.5, 0.5, 0.5, 1.0, 1.0, 1.0]

    def test_threshold_column_follows_formula(self, capsys):
        _, out, _ = run_cli(capsys, "sweep", "--R", "2", "--rstar", "1", "--Rstar", "3",
                            "--sweep", "r=0.5:1.5:5")
        lines = out.strip().splitlines()
        hdr = lines[0].split(",")
        for line in lines[1:]:
            vals = dict(zip(hdr, line.split(",")))
            r, R = float(vals["r"]), float(vals["R"])
            expect = 3.0 * r * R * R / (r**3 + 2.0 * R**3)
            assert math.isclose(float(vals["threshold"]), expect, rel_tol=1e-12)

    def test_swept_parameter_needs_no_base_flag(self, capsys):
        code, _, err = run_cli(capsys, "sweep", "--r", "1", "--R", "2", "--rstar", "1",
                               "--sweep", "Rstar=1.5:2:2")
        assert code == 0, err

    def test_bad_sweep_spec(self, capsys):
        code, _, err = run_cli(capsys, "sweep", *CANON, "--sweep", "Rstar=1:2")
        assert code == 2 and "sweep" in err.lower()

    def test_empty_range_rejected(self, capsys):
        code, _, err = run_cli(capsys, "sweep", *CANON, "--sweep", "Rstar=1:2:0")
        assert code == 2

    def test_invalid_pair_on_the_grid_is_an_error(self, capsys):
        code, _, err = run_cli(capsys, "sweep", "--R", "2", "--rstar", "1", "--Rstar", "3",
                               "--sweep", "r=1:3:3")
        assert code == 2 and "invalid pair" in err


class TestOutputFile:
    def test_writes_lf_line_endings(self, tmp_path):
        out = tmp_path / "e.csv"
        assert main(["energy", *CANON, "--output", str(out)]) == 0
        raw = out.read_bytes()
        assert b"\r" not in raw
        assert raw.endswith(b"\n")

    def test_closed_stdout_pipe_is_not_a_crash(self):
        import subprocess
        import sys as _sys

        # stdout becomes a line-buffered pipe whose read end is gone, so
        # the first emitted row raises BrokenPipeError inside main()
        code = (
            "import os, sys\n"
            "r, w = os.pipe()\n"
            "os.close(r)\n"
            "os.dup2(w, 1)\n"
            "sys.stdout = os.fdopen(1, 'w', buffering=1)\n"
            "from annuli.cli import main\n"
            "rc = main(['minimize', '--r', '1', '--R', '2',"
            " '--rstar', '1', '--Rstar', '2.0', '--grid-n', '50'])\n"
            "os.write(2, b'rc=%d' % rc)\n"
        )
        out = subprocess.run([_sys.executable, "-c", code],
                             capture_output=True, text=True, timeout=120)
        assert out.returncode == 0, out.stderr
        assert "rc=1" in out.stderr
        assert "Traceback" not in out.stderr
