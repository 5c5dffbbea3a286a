"""CLI subcommand behavior and exit codes."""

import json

import pytest

from riskfix.cli import main


@pytest.fixture()
def vector_file(tmp_path):
    path = tmp_path / "x.txt"
    path.write_text("-1.0 2.0\n")
    return str(path)


def run(argv):
    return main(argv)


class TestExitCodes:
    def test_project_success(self, vector_file, capsys):
        assert run(["project", "--constraint", "orthant", "--in", vector_file]) == 0
        out = capsys.readouterr().out
        assert "projection: 0.0 2.0" in out
        assert "divergence: 1.0" in out

    def test_domain_error_is_one(self, tmp_path, capsys):
        bad = tmp_path / "bad.txt"
        bad.write_text("nan 1.0\n")
        assert run(["project", "--constraint", "orthant", "--in", str(bad)]) == 1

    def test_missing_file_is_two(self, tmp_path):
        assert run(["project", "--constraint", "orthant", "--in", str(tmp_path / "no.txt")]) == 2

    def test_bad_config_is_two(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text("{not json")
        assert run(["experiment", str(cfg)]) == 2

    def test_unknown_preset_is_two(self):
        assert run(["experiment", "figure9-left"]) == 2


class TestSubcommands:
    def test_kernels_csv(self, tmp_path):
        out = tmp_path / "k.csv"
        assert run(["kernels", "--x-min", "0", "--x-max", "2", "--grid", "5",
                    "--out", str(out)]) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "x,G,H"
        assert len(lines) == 6
        first = lines[1].split(",")
        assert float(first[1]) == 0.5 and float(first[2]) == 0.0

    def test_risk_curve(self, tmp_path):
        out = tmp_path / "curve.csv"
        code = run([
            "risk-curve", "--constraint", "orthant", "--n", "12",
            "--mu0-preset", "zero", "--sigma-min", "0.5", "--sigma-max", "2.0",
            "--grid", "4", "--samples", "200", "--seed", "1", "--out", str(out),
        ])
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "sigma,err_mean,err_se,lrt_mean,lrt_se,dof_mean,dof_se"
        assert len(lines) == 5
        # zero-signal orthant: E err ~ sigma^2 n / 2
        row = lines[1].split(",")
        assert float(row[1]) == pytest.approx(0.25 * 6.0, rel=0.3)

    def test_fixed_point_text_and_json(self, tmp_path, capsys):
        args = ["fixed-point", "--constraint", "orthant", "--n", "50", "--m", "100",
                "--signal", "zero", "--sigma", "1.0"]
        assert run(args) == 0
        out = capsys.readouterr().out
        assert "status: converged" in out
        assert "regime: I" in out

        jpath = tmp_path / "fp.json"
        assert run(args + ["--json", "--out", str(jpath)]) == 0
        payload = json.loads(jpath.read_text())
        assert payload["status"] == "converged"
        assert payload["r_sq"] == pytest.approx(25.0 / 75.0, rel=1e-5)
        assert payload["regime"] == "I"

    def test_fixed_point_prior_signal(self, capsys):
        assert run(["fixed-point", "--constraint", "orthant", "--n", "50", "--m", "100",
                    "--signal", "atoms=0:0.5,5:0.5"]) == 0
        assert "status: converged" in capsys.readouterr().out

    def test_simulate(self, tmp_path):
        out = tmp_path / "sim.csv"
        code = run([
            "simulate", "--constraint", "orthant", "--n", "10", "--m", "30",
            "--signal", "zero", "--replicates", "11", "--seed", "2", "--out", str(out),
        ])
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "replicate_id,risk,objective,iterations,solver,converged"
        assert len(lines) == 12

    def test_simulate_rejects_prior(self):
        assert run(["simulate", "--constraint", "orthant", "--n", "10", "--m", "30",
                    "--signal", "atoms=0:1.0", "--replicates", "10"]) == 1

    def test_experiment_config_roundtrip(self, tmp_path):
        cfg = {
            "name": "cli-tiny",
            "constraint": "orthant",
            "signal": "zero",
            "grid": [[10, 30]],
            "replicates": 10,
            "samples": 200,
            "seed": 3,
        }
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(cfg))
        out1 = tmp_path / "r1.csv"
        out2 = tmp_path / "r2.csv"
        assert run(["experiment", str(cfg_path), "--out", str(out1)]) == 0
        assert run(["experiment", str(cfg_path), "--out", str(out2)]) == 0
        strip = lambda text: [l.rsplit(",", 1)[0] for l in text.splitlines()]
        assert strip(out1.read_text()) == strip(out2.read_text())

    def test_experiment_seed_override_changes_output(self, tmp_path):
        cfg = {
            "name": "cli-tiny", "constraint": "orthant", "signal": "zero",
            "grid": [[10, 30]], "replicates": 10, "samples": 200, "seed": 3,
        }
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(cfg))
        a = tmp_path / "a.csv"
        b = tmp_path / "b.csv"
        assert run(["experiment", str(cfg_path), "--out", str(a)]) == 0
        assert run(["experiment", str(cfg_path), "--seed", "99", "--out", str(b)]) == 0
        assert a.read_text() != b.read_text()

    def test_env_seed_default(self, tmp_path, monkeypatch):
        monkeypatch.setenv("RISKFIX_SEED", "77")
        out1 = tmp_path / "s1.csv"
        code = run(["simulate", "--constraint", "orthant", "--n", "8", "--m", "20",
                    "--signal", "zero", "--replicates", "10", "--out", str(out1)])
        assert code == 0
        out2 = tmp_path / "s2.csv"
        monkeypatch.delenv("RISKFIX_SEED")
        run(["simulate", "--constraint", "orthant", "--n", "8", "--m", "20",
             "--signal", "zero", "--replicates", "10", "--seed", "77", "--out", str(out2)])
        assert out1.read_text() == out2.read_text()

    def test_help_everywhere(self, capsys):
        for sub in ("project", "kernels", "risk-curve", "fixed-point", "simulate", "experiment"):
            with pytest.raises(SystemExit) as exc:
                run([sub, "--help"])
            assert exc.value.code == 0
            out = capsys.readouterr().out
            assert "--seed" in out and "--out" in out
