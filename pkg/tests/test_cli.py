"""CLI tests: config handling, exit codes, file outputs, determinism."""

import json
import subprocess
import sys

import pytest

from quadbeam.cli import main, parse_config_file, resolve_config, build_parser, ConfigError


def write_config(tmp_path, **overrides):
    base = {
        "n_y": 8,
        "n_z": 8,
        "n_beams": 4,
        "trials": 6,
        "seed": 3,
        "snr_db": "0,50",
        "resolution": 64,
        "figures": "false",
        "output_dir": str(tmp_path / "out"),
    }
    base.update(overrides)
    path = tmp_path / "run.cfg"
    path.write_text("\n".join(f"{k} = {v}" for k, v in base.items()) + "\n")
    return path


class TestConfigParsing:
    def test_round_trip(self, tmp_path):
        path = write_config(tmp_path, buffer_gain=0.25, codebooks="proposed,uniform_real")
        raw = parse_config_file(str(path))
        assert raw["n_beams"] == 4
        assert raw["buffer_gain"] == 0.25
        assert raw["codebooks"] == ("proposed", "uniform_real")
        assert raw["snr_db"] == (0.0, 50.0)
        assert raw["figures"] is False

    def test_comments_and_blank_lines(self, tmp_path):
        path = tmp_path / "c.cfg"
        path.write_text("# heading\n\nn_y=4 # trailing\nn_z=4\nn_beams=2\n")
        raw = parse_config_file(str(path))
        assert raw == {"n_y": 4, "n_z": 4, "n_beams": 2}

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "c.cfg"
        path.write_text("n_elements=4\n")
        with pytest.raises(ConfigError):
            parse_config_file(str(path))

    def test_missing_required_keys(self, tmp_path):
        path = tmp_path / "c.cfg"
        path.write_text("n_y=8\n")
        args = build_parser().parse_args(["codebook", "--config", str(path)])
        with pytest.raises(ConfigError):
            resolve_config(args)

    def test_flag_overrides_file(self, tmp_path):
        path = write_config(tmp_path)
        args = build_parser().parse_args(
            ["codebook", "--config", str(path), "--n-beams", "2"]
        )
        cfg = resolve_config(args)
        assert cfg.n_beams == 2


class TestCodebookCommand:
    def test_writes_expected_stage_sizes(self, tmp_path):
        path = write_config(tmp_path)
        assert main(["codebook", "--config", str(path)]) == 0
        out = tmp_path / "out"
        sidecar = json.loads((out / "codebook_proposed.json").read_text())
        assert sidecar["stage_count"] == 4
        for upa in "1234":
            assert sidecar["upas"][upa]["stage_sizes"] == [1, 2, 4, 8, 16]
        lines = (out / "codebook_proposed.csv").read_text().strip().splitlines()
        assert lines[0].startswith("# config:")
        assert len(lines) == 2 + 4 * (1 + 2 + 4 + 8 + 16) * 64

    def test_invalid_beam_count_exits_2(self, tmp_path, capsys):
        path = write_config(tmp_path, n_beams=3)
        assert main(["codebook", "--config", str(path)]) == 2
        assert "power of two" in capsys.readouterr().err

    def test_rerun_is_byte_identical(self, tmp_path):
        path = write_config(tmp_path)
        assert main(["codebook", "--config", str(path)]) == 0
        out = tmp_path / "out"
        first = (out / "codebook_proposed.json").read_bytes()
        first_csv = (out / "codebook_proposed.csv").read_bytes()
        assert main(["codebook", "--config", str(path)]) == 0
        assert (out / "codebook_proposed.json").read_bytes() == first
        assert (out / "codebook_proposed.csv").read_bytes() == first_csv


class TestPatternCommand:
    def test_narrow_and_stage0_rasters(self, tmp_path):
        path = write_config(tmp_path, n_beams=2, resolution=16)
        assert main(["pattern", "--config", str(path), "--stage", "2", "--index", "1"]) == 0
        assert main(["pattern", "--config", str(path), "--stage", "0", "--index", "1"]) == 0
        out = tmp_path / "out"
        csv = (out / "pattern_proposed_u1_s2_i1.csv").read_text().splitlines()
        assert csv[0].startswith("# config:")
        assert csv[1] == "phi_mapped,theta_mapped,phi_rad,theta_rad,gain_linear,gain_db"
        assert len(csv) == 2 + 17 * 17

    def test_out_of_range_stage_exits_2(self, tmp_path):
        path = write_config(tmp_path, n_beams=2)
        assert main(["pattern", "--config", str(path), "--stage", "9", "--index", "1"]) == 2

    def test_out_of_range_index_exits_2(self, tmp_path):
        path = write_config(tmp_path, n_beams=2)
        assert main(["pattern", "--config", str(path), "--stage", "1", "--index", "3"]) == 2

    def test_figure_rendered_when_enabled(self, tmp_path):
        path = write_config(tmp_path, n_beams=2, resolution=16, figures="true")
        assert main(["pattern", "--config", str(path), "--stage", "1", "--index", "1"]) == 0
        assert (tmp_path / "out" / "pattern_proposed_u1_s1_i1.png").exists()


class TestSweepCommand:
    def test_writes_result_blocks(self, tmp_path):
        path = write_config(tmp_path, n_beams=2, trials=5, snr_db="0,20,50")
        assert main(["sweep", "--config", str(path)]) == 0
        doc = json.loads((tmp_path / "out" / "sweep.json").read_text())
        assert {r["codebook"] for r in doc["results"]} == {"proposed", "inverse_no_buffer"}
        for res in doc["results"]:
            assert len(res["points"]) == 3
            assert res["slots_per_trial"] == 10
            assert res["exhaustive_pairs"] == 16 * 2**4
        assert doc["config"]["seed"] == 3

    def test_zero_trials_exits_2(self, tmp_path):
        path = write_config(tmp_path, trials=0)
        assert main(["sweep", "--config", str(path)]) == 2

    def test_narrow_kind_exits_2(self, tmp_path):
        path = write_config(tmp_path, codebooks="uniform_real")
        assert main(["sweep", "--config", str(path)]) == 2

    def test_rerun_identical(self, tmp_path):
        path = write_config(tmp_path, n_beams=2, trials=4, snr_db="0,50")
        assert main(["sweep", "--config", str(path)]) == 0
        first = (tmp_path / "out" / "sweep.json").read_bytes()
        assert main(["sweep", "--config", str(path)]) == 0
        assert (tmp_path / "out" / "sweep.json").read_bytes() == first


class TestWorstcaseCommand:
    def test_table_and_csv(self, tmp_path, capsys):
        path = write_config(tmp_path, n_beams=4, resolution=128)
        args = ["worstcase", "--config", str(path), "--n-sweep", "2,4"]
        assert main(args) == 0
        captured = capsys.readouterr().out
        assert "closed form" in captured
        rows = (tmp_path / "out" / "worstcase.csv").read_text().strip().splitlines()
        assert rows[0].startswith("# config:")
        assert rows[1] == "codebook,n_beams,worst_case_crossover,worst_case_sector,closed_form"
        body = [r.split(",") for r in rows[2:]]
        assert len(body) == 2 * 3  # two N values x three kinds
        for cells in body:
            if cells[0] == "proposed":
                assert cells[4] != ""
            else:
                assert cells[4] == ""

    def test_closed_form_matches_crossover_at_n4(self, tmp_path):
        path = write_config(tmp_path, n_beams=4, resolution=128)
        assert main(["worstcase", "--config", str(path), "--n-sweep", "4"]) == 0
        rows = (tmp_path / "out" / "worstcase.csv").read_text().strip().splitlines()[2:]
        proposed = next(r.split(",") for r in rows if r.startswith("proposed"))
        assert abs(float(proposed[2]) - float(proposed[4])) < 1e-9


class TestSynthesisFailure:
    def test_synthesis_error_exits_3(self, tmp_path, capsys, monkeypatch):
        import quadbeam.cli as cli
        from quadbeam.codebook import SynthesisError

        def boom(kind, cfg):
            raise SynthesisError("degenerate target column")

        monkeypatch.setattr(cli, "build_codebook_set", boom)
        path = write_config(tmp_path, n_beams=2)
        assert main(["codebook", "--config", str(path)]) == 3
        assert "synthesis error" in capsys.readouterr().err


class TestEntryPoint:
    def test_console_script_help(self):
        proc = subprocess.run(
            [sys.executable, "-m", "quadbeam.cli", "--help"],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0
        assert "codebook" in proc.stdout and "worstcase" in proc.stdout
