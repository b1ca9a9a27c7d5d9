import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dce_entanglement import __version__
from dce_entanglement.cli import (EXIT_CONFIG, EXIT_IO, EXIT_OK, format_csv, main, parse_config, parse_csv)
from dce_entanglement.errors import ConfigError
from dce_entanglement.scenarios import Regime

SUM_MINIMAL = 'regime = "Sum3D"\n[state]\nr = 1.0\n'
HARM_SMALL = '''label = "small"
regime = "Harm1D"
[drive]
harmonic_q = 3
[grid]
tau_max = 0.4
samples = 3
[solver]
truncation = 12
'''


@pytest.fixture
def write(tmp_path):
    def _write(text, name="scenario.toml"):
        p = tmp_path / name
        p.write_text(text)
        return p
    return _write


class TestParseConfig:
    def test_minimal_sum_defaults(self, write):
        cfg = parse_config(write(SUM_MINIMAL))
        assert cfg.regime is Regime.SUM_3D
        assert cfg.mode_c.n == (2, 1, 1)
        assert len(cfg.tau) == 101 and cfg.tau[0] == 0.0
        assert cfg.truncation == 40

    def test_even_harmonic_rejected(self, write):
        with pytest.raises(ConfigError, match="harmonic_q must be odd"):
            parse_config(write('regime = "Harm1D"\n[drive]\nharmonic_q = 2\n'))

    def test_syntax_error_has_position(self, write):
        with pytest.raises(ConfigError, match=r"line 2.*column"):
            parse_config(write('regime = "Harm1D"\n[drive\n'))

    def test_every_problem_listed(self, write):
        with pytest.raises(ConfigError) as exc:
            parse_config(write('regime = "Harm1D"\ncolour = 1\n[drive]\nharmonic_q = 2\n[state]\nr = "big"\n'))
        text = str(exc.value)
        for fragment in ("colour", "harmonic_q must be odd", "state.r"):
            assert fragment in text

    def test_unknown_regime(self, write):
        with pytest.raises(ConfigError, match="unknown value"):
            parse_config(write('regime = "Sum2D"\n'))

    def test_label_kept(self):
        cfg = parse_config(Path(__file__).parents[1] / "configs" / "harm1d.toml")
        assert cfg.parameters()["label"] == "third-harmonic-drive"
        assert cfg.parameters()["harmonic_q"] == 3

    def test_truncation_override(self, write):
        assert parse_config(write(HARM_SMALL), truncation=20).truncation == 20

    @pytest.mark.parametrize("name", sorted(p.name for p in (Path(__file__).parents[1] / "configs").glob("*.toml")))
    def test_shipped_configs_valid(self, name):
        parse_config(Path(__file__).parents[1] / "configs" / name)


class TestCsv:
    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.floats(allow_nan=False, allow_infinity=False, width=64), min_size=1, max_size=8))
    def test_round_trip_bytes(self, values):
        text = format_csv({"tau": np.array(values), "N_s": np.array(values[::-1])})
        assert format_csv(parse_csv(text)) == text

    def test_shape(self):
        text = format_csv({"tau": [0.0, 0.5, 1.0], "N_1": [0.1, 0.2, 0.3]})
        assert text.splitlines()[0] == "tau,N_1"
        assert len(text.splitlines()) == 4


class TestRun:
    def test_outputs(self, write, tmp_path):
        out = tmp_path / "out"
        assert main(["--config", str(write(HARM_SMALL)), "--out", str(out)]) == EXIT_OK
        names = sorted(p.name for p in out.iterdir())
        assert names == ["scenario.csv", "scenario.json", "scenario_N.svg", "scenario_logneg.svg",
                         "scenario_mutinfo.svg"]
        lines = (out / "scenario.csv").read_text().splitlines()
        assert len(lines) == 4 and lines[0] == "tau,N_p,N_1,logneg_p_1,mutinfo_p_1"
        doc = json.loads((out / "scenario.json").read_text())
        meta = doc["metadata"]
        assert meta["version"] == __version__
        assert meta["parameters"]["label"] == "small"
        assert {"tolerances", "symplectic_defect", "convergence", "sudden_death", "long_time"} <= set(meta)
        assert meta["convergence"]["applicable"]
        assert doc["series"]["tau"] == [0.0, 0.2, 0.4]
        svg = (out / "scenario_logneg.svg").read_text()
        assert svg.startswith("<svg") and "<polyline" in svg
        assert "http" not in svg.replace('xmlns="http://www.w3.org/2000/svg"', "")
        assert __version__ in svg

    def test_deterministic_bytes(self, write, tmp_path):
        cfg = write(HARM_SMALL)
        main(["--config", str(cfg), "--out", str(tmp_path / "a"), "--emit", "csv"])
        main(["--config", str(cfg), "--out", str(tmp_path / "b"), "--emit", "csv"])
        assert (tmp_path / "a" / "scenario.csv").read_bytes() == (tmp_path / "b" / "scenario.csv").read_bytes()

    def test_emit_subset(self, write, tmp_path):
        out = tmp_path / "out"
        main(["--config", str(write(HARM_SMALL)), "--out", str(out), "--emit", "json"])
        assert [p.name for p in out.iterdir()] == ["scenario.json"]

    def test_missing_config(self, tmp_path):
        out = tmp_path / "out"
        assert main(["--config", str(tmp_path / "nope.toml"), "--out", str(out)]) == EXIT_IO
        assert not out.exists() or not any(out.iterdir())

    def test_config_error_code(self, write, tmp_path, capsys):
        out = tmp_path / "out"
        assert main(["--config", str(write('regime = "Harm1D"\n[drive]\nharmonic_q = 2\n')), "--out", str(out)]) \
            == EXIT_CONFIG
        assert "harmonic_q must be odd" in capsys.readouterr().err
        assert not out.exists()

    def test_refuses_overwrite(self, write, tmp_path):
        cfg, out = write(HARM_SMALL), tmp_path / "out"
        assert main(["--config", str(cfg), "--out", str(out), "--emit", "csv"]) == EXIT_OK
        (out / "scenario.csv").write_text("keep")
        assert main(["--config", str(cfg), "--out", str(out), "--emit", "csv"]) == EXIT_IO
        assert (out / "scenario.csv").read_text() == "keep"
        assert main(["--config", str(cfg), "--out", str(out), "--emit", "csv", "--force"]) == EXIT_OK
        assert (out / "scenario.csv").read_text() != "keep"

    def test_prints_death_and_limit(self, write, tmp_path, capsys):
        main(["--config", str(write(HARM_SMALL.replace("0.4", "1.0"))), "--out", str(tmp_path / "o")])
        text = capsys.readouterr().out
        assert "sudden death" in text and "log_negativity" in text

    def test_batch(self, write, tmp_path):
        write(HARM_SMALL, "a.toml")
        write(HARM_SMALL.replace("small", "other"), "b.toml")
        out = tmp_path / "out"
        assert main(["--batch", str(tmp_path), "--out", str(out), "--emit", "csv"]) == EXIT_OK
        assert (out / "a" / "a.csv").exists() and (out / "b" / "b.csv").exists()

    def test_module_entry_point(self, tmp_path):
        proc = subprocess.run([sys.executable, "-m", "dce_entanglement", "--version"], capture_output=True, text=True)
        assert proc.returncode == 0 and __version__ in proc.stdout
