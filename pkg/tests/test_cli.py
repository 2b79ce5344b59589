"""End-to-end tests of the command-line interface."""

import json
import math
import subprocess
import sys

import pytest

from hirota_trace.cli import dump_config, load_config, main, parse_config
from hirota_trace.errors import ConfigError

CANONICAL = {
    "medium": {"rho": 1.0, "sigma": 1.0, "lambda": 8.0},
    "solitons": [{"p": [1.0, 0.0], "a0": [math.sqrt(2.0), 0.0]}],
    "grid": {"x": [-2.0, 2.0, 5], "t": [0.0, 0.0, 1]},
}

TWO_SOLITON = {
    "medium": {"rho": 1.0, "sigma": 1.0, "lambda": 8.0},
    "solitons": [{"p": [0.5, 0.2], "a0": [1.0, 0.2]},
                 {"p": [1.2, -0.3], "a0": [0.8, -0.5]}],
    "grid": {"x": [-160.0, 160.0, 4001], "t": [-5.0, 5.0, 11]},
}


@pytest.fixture
def canonical_path(tmp_path):
    path = tmp_path / "canonical.json"
    path.write_text(json.dumps(CANONICAL))
    return str(path)


def write_cfg(tmp_path, data, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


class TestConfigParsing:
    def test_defaults_applied(self, canonical_path):
        cfg = load_config(canonical_path)
        assert cfg.tolerance == 1e-8
        assert cfg.series_order == 20
        assert cfg.seed == 42

    @pytest.mark.parametrize("mutate", [
        lambda d: d.pop("medium"),
        lambda d: d["medium"].pop("rho"),
        lambda d: d["medium"].update(bogus=1),
        lambda d: d.update(extra_key=1),
        lambda d: d["solitons"][0].update(p=[1.0]),
        lambda d: d["solitons"][0].update(p=[-1.0, 0.0]),
        lambda d: d["grid"].update(x=[-2.0, 2.0, 5.5]),
        lambda d: d["medium"].update({"lambda": -8.0}),
    ])
    def test_malformed_configs_rejected(self, mutate):
        data = json.loads(json.dumps(CANONICAL))
        mutate(data)
        with pytest.raises(ConfigError):
            parse_config(data)

    def test_unreadable_and_invalid_json(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(str(tmp_path / "missing.json"))
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        with pytest.raises(ConfigError):
            load_config(str(bad))


class TestDumpConfig:
    def test_round_trip_is_byte_identical(self, canonical_path):
        first = dump_config(load_config(canonical_path))
        second = dump_config(parse_config(json.loads(first)))
        assert first == second

    def test_key_order_is_canonical(self, canonical_path):
        text = dump_config(load_config(canonical_path))
        assert text.index('"medium"') < text.index('"solitons"') \
            < text.index('"grid"') < text.index('"options"')

    def test_cli_flag(self, canonical_path, capsys):
        assert main(["field", "--config", canonical_path,
                     "--dump-config"]) == 0
        out1 = capsys.readouterr().out
        assert main(["field", "--config", canonical_path,
                     "--dump-config"]) == 0
        assert capsys.readouterr().out == out1


class TestFieldCommand:
    def test_canonical_csv_row(self, canonical_path, capsys):
        assert main(["field", "--config", canonical_path]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == "x,t,re_psi,im_psi,abs_psi"
        assert len(lines) == 1 + 5
        middle = lines[1 + 2].split(",")
        assert middle[0] == "0" and middle[1] == "0"
        assert float(middle[2]) == pytest.approx(1.0, abs=1e-10)
        assert float(middle[3]) == pytest.approx(0.0, abs=1e-10)
        assert float(middle[4]) == pytest.approx(1.0, abs=1e-10)

    def test_empty_soliton_set(self, tmp_path, capsys):
        data = json.loads(json.dumps(CANONICAL))
        data["solitons"] = []
        assert main(["field", "--config", write_cfg(tmp_path, data)]) == 0
        rows = capsys.readouterr().out.strip().splitlines()[1:]
        assert all(r.split(",")[2:] == ["0", "0", "0"] for r in rows)

    def test_single_point_grid(self, tmp_path, capsys):
        data = json.loads(json.dumps(CANONICAL))
        data["grid"] = {"x": [0.0, 0.0, 1], "t": [0.0, 0.0, 1]}
        assert main(["field", "--config", write_cfg(tmp_path, data)]) == 0
        assert len(capsys.readouterr().out.strip().splitlines()) == 2

    def test_json_format_and_out_file(self, canonical_path, tmp_path):
        out = tmp_path / "field.json"
        assert main(["field", "--config", canonical_path,
                     "--format", "json", "--out", str(out)]) == 0
        records = json.loads(out.read_text())
        assert len(records) == 5
        assert set(records[0]) == {"x", "t", "re_psi", "im_psi", "abs_psi"}

    def test_t_major_row_order(self, tmp_path, capsys):
        data = json.loads(json.dumps(CANONICAL))
        data["grid"] = {"x": [0.0, 1.0, 2], "t": [0.0, 1.0, 2]}
        assert main(["field", "--config", write_cfg(tmp_path, data)]) == 0
        rows = [r.split(",")[:2] for r in
                capsys.readouterr().out.strip().splitlines()[1:]]
        assert rows == [["0", "0"], ["1", "0"], ["0", "1"], ["1", "1"]]

    def test_malformed_config_exit_code(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{}")
        assert main(["field", "--config", str(bad)]) == 1
        assert "config error" in capsys.readouterr().err


class TestResidualCommand:
    def test_hirota_passes(self, canonical_path, capsys):
        assert main(["residual", "--config", canonical_path]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["passed"] is True
        assert report["max_rel"] <= 1e-8

    def test_mismatched_reduction_is_config_error(self, canonical_path,
                                                  capsys):
        assert main(["residual", "--config", canonical_path,
                     "--equation", "nls"]) == 1
        assert main(["residual", "--config", canonical_path,
                     "--equation", "mkdv"]) == 1
        capsys.readouterr()

    def test_tolerance_failure_exit(self, tmp_path, capsys):
        data = json.loads(json.dumps(CANONICAL))
        data["options"] = {"tolerance": 1e-30}
        assert main(["residual", "--config",
                     write_cfg(tmp_path, data)]) == 3
        assert json.loads(capsys.readouterr().out)["passed"] is False

    def test_fd_check_reports_order(self, canonical_path, capsys):
        assert main(["residual", "--config", canonical_path,
                     "--fd-check"]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["fd_order_estimate"] is None \
            or report["fd_order_estimate"] > 3.0


class TestSeriesCommand:
    def test_tail_point_converges(self, canonical_path, capsys):
        assert main(["series", "--config", canonical_path,
                     "--point=-1,0", "--max-order", "20"]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["spectral_radius_q"] == pytest.approx(math.exp(-4.0),
                                                            rel=1e-8)
        assert not report["diverges"]
        assert report["orders"][-1]["error"] <= 1e-12

    def test_core_point_flags_divergence(self, canonical_path, capsys):
        assert main(["series", "--config", canonical_path,
                     "--point", "0,0", "--max-order", "5"]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["diverges"]
        assert report["closed"][0] == pytest.approx(1.0, abs=1e-12)

    def test_order_zero_is_first_term(self, canonical_path, capsys):
        assert main(["series", "--config", canonical_path,
                     "--point=-1,0", "--max-order", "0"]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["orders"][0]["partial"][0] == pytest.approx(
            2 * math.exp(-2.0), rel=1e-12)

    def test_bad_point_is_config_error(self, canonical_path, capsys):
        assert main(["series", "--config", canonical_path,
                     "--point", "nope"]) == 1
        capsys.readouterr()


class TestIdentityCommand:
    def test_suite_passes(self, capsys):
        assert main(["identity", "--n-max", "2", "--trials", "25",
                     "--seed", "7"]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["failures"] == 0


class TestCollideCommand:
    def test_elastic_collision(self, tmp_path, capsys):
        path = write_cfg(tmp_path, TWO_SOLITON)
        assert main(["collide", "--config", path, "--t-far", "20"]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["max_rel_mismatch"] <= 1e-4

    def test_wrong_soliton_count(self, canonical_path, capsys):
        assert main(["collide", "--config", canonical_path]) == 1
        capsys.readouterr()


class TestConsoleScript:
    def test_entry_point_runs(self, canonical_path):
        proc = subprocess.run(
            [sys.executable, "-m", "hirota_trace.cli", "field",
             "--config", canonical_path],
            capture_output=True, text=True)
        assert proc.returncode == 0
        assert proc.stdout.startswith("x,t,re_psi,im_psi,abs_psi")

    def test_determinism(self, canonical_path):
        runs = [subprocess.run(
            [sys.executable, "-m", "hirota_trace.cli", "residual",
             "--config", canonical_path], capture_output=True, text=True)
            for _ in range(2)]
        assert runs[0].stdout == runs[1].stdout
