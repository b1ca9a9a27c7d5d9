import math
from dataclasses import replace

import numpy as np
import pytest

from dce_entanglement.cavity import CavityGeometry, DriveConfig, mode_frequency
from dce_entanglement.errors import ConfigError
from dce_entanglement.gaussian import entropy_function
from dce_entanglement.scenarios import (Regime, ScenarioConfig, long_time_limits, redistribution_map, run_scenario,
                                        sudden_death_time, truncation_report)

CUBE = CavityGeometry.box(1.0, 1.0, 1.0)
LINE = CavityGeometry.one_d(1.0)
W_S, W_C = mode_frequency(CUBE, (1, 1, 1)), mode_frequency(CUBE, (2, 1, 1))


def cube_config(regime, r=1.0, tau=(0.0, 0.5, 1.0), **kw):
    omega = W_S + W_C if regime is Regime.SUM_3D else W_C - W_S
    drive = DriveConfig.for_cavity(CUBE, 0.01, omega, **kw)
    return ScenarioConfig(regime, CUBE, drive, r, (1, 1, 1), tau)


def line_config(q, r=1.0, tau=(0.0, 0.3, 0.6), **kw):
    regime = Regime.FUND_1D if q == 1 else Regime.HARM_1D
    return ScenarioConfig(regime, LINE, DriveConfig.for_cavity(LINE, 0.01, harmonic_q=q), r, 1, tau, **kw)


class TestConfig:
    def test_partner_found(self):
        assert cube_config(Regime.SUM_3D).mode_c.n == (2, 1, 1)

    def test_lists_every_problem(self):
        drive = DriveConfig.for_cavity(LINE, 0.01, harmonic_q=2)
        with pytest.raises(ConfigError) as exc:
            ScenarioConfig(Regime.HARM_1D, LINE, drive, -1.0, 1, ())
        text = str(exc.value)
        assert "harmonic_q must be odd" in text
        assert "r:" in text and "tau:" in text

    def test_dimensionality_mismatch(self):
        drive = DriveConfig.for_cavity(LINE, 0.01, harmonic_q=1)
        with pytest.raises(ConfigError, match="3D cavity"):
            ScenarioConfig(Regime.SUM_3D, LINE, drive, 1.0, 1, (0.0,))

    def test_fundamental_requires_q1(self):
        drive = DriveConfig.for_cavity(LINE, 0.01, harmonic_q=3)
        with pytest.raises(ConfigError, match="harmonic_q = 1"):
            ScenarioConfig(Regime.FUND_1D, LINE, drive, 1.0, 1, (0.0,))

    def test_unsorted_grid(self):
        with pytest.raises(ConfigError):
            line_config(3, tau=(0.3, 0.1))

    def test_missing_partner(self):
        drive = DriveConfig.for_cavity(CUBE, 0.01, 1.234)
        with pytest.raises(ConfigError, match="partner"):
            ScenarioConfig(Regime.SUM_3D, CUBE, drive, 1.0, (1, 1, 1), (0.0,))


class TestSeries:
    def test_columns_and_shape(self):
        series = run_scenario(cube_config(Regime.SUM_3D))
        names = list(series.columns())
        assert names[0] == "tau"
        assert {"N_s", "N_c", "N_p", "logneg_p_s", "mutinfo_p_s"} <= set(names)
        assert all(len(v) == 3 for v in series.columns().values())
        assert series.metadata["symplectic_defect"] < 1e-12

    def test_sum_photon_number_formula(self):
        cfg = cube_config(Regime.SUM_3D, tau=tuple(np.linspace(0, 2, 9)))
        series = run_scenario(cfg)
        x = series.metadata["gamma_minus"] * series.tau
        r = 1.0
        expected = 0.5 * (math.cosh(r) ** 2 * np.cosh(2 * x) + math.sinh(r) ** 2 - 1.0)
        assert np.allclose(series.photon_numbers["s"], expected, rtol=1e-12)

    def test_sum_mutual_information_limit(self):
        cfg = cube_config(Regime.SUM_3D)
        late = replace(cfg, tau=(10.0 / run_scenario(cfg).metadata["gamma_minus"],))
        series = run_scenario(late)
        assert series.mutual_information[("p", "s")][0] == pytest.approx(entropy_function(math.cosh(2.0)), abs=1e-4)

    def test_difference_returns_after_half_period(self):
        cfg = cube_config(Regime.DIFF_3D)
        gp = run_scenario(cfg).metadata["gamma_plus"]
        series = run_scenario(replace(cfg, tau=(0.0, math.pi / gp)))
        for col in series.columns().values():
            if col is not series.tau:
                assert col[1] == pytest.approx(col[0], abs=1e-8)

    def test_freeze_after_shaking_stops(self):
        drive = DriveConfig.for_cavity(LINE, 0.01, harmonic_q=3, t_stop=20.0)
        stop = 2 * drive.tau_stop
        cfg = ScenarioConfig(Regime.HARM_1D, LINE, drive, 1.0, 1, (stop, stop + 0.1, stop + 0.5))
        n = run_scenario(cfg).photon_numbers["1"]
        assert n[1] == n[0] and n[2] == n[0]

    def test_deterministic(self):
        cfg = line_config(3)
        a, b = run_scenario(cfg), run_scenario(cfg)
        for k, v in a.columns().items():
            assert np.array_equal(v, b.columns()[k])


class TestSuddenDeath:
    def test_third_harmonic_has_finite_death(self):
        cfg = line_config(3, tau=tuple(np.linspace(0, 1.0, 21)))
        sd = sudden_death_time(cfg)
        assert sd.tau_star is not None and 0.7 < sd.tau_star < 0.8
        assert not sd.reentry
        lo, hi = sd.bracket
        assert lo < sd.tau_star <= hi

    def test_sum_resonance_never_dies(self):
        assert sudden_death_time(cube_config(Regime.SUM_3D, tau=tuple(np.linspace(0, 5, 11)))).tau_star is None

    def test_requires_initial_entanglement(self):
        with pytest.raises(ValueError):
            sudden_death_time(line_config(3, r=0.0))

    def test_periodic_revival_is_reported(self):
        cfg = cube_config(Regime.DIFF_3D)
        gp = run_scenario(cfg).metadata["gamma_plus"]
        sd = sudden_death_time(replace(cfg, tau=tuple(np.linspace(0, 2 * math.pi / gp, 41))))
        assert sd.reentry
        assert sd.tau_star * gp == pytest.approx(math.pi / 2, rel=1e-5)


class TestRedistribution:
    def test_sum_partner_pairs(self):
        series = redistribution_map(cube_config(Regime.SUM_3D, tau=tuple(np.linspace(0, 3, 7))), ["c"])
        assert np.all(series.log_negativity[("p", "c")] < 1e-10)
        assert np.all(np.diff(series.log_negativity[("s", "c")]) > 0)

    def test_third_harmonic_selection_rule(self):
        series = redistribution_map(line_config(3, tau=tuple(np.linspace(0, 1.2, 7))), [2, 4, 5])
        for j in ("2", "5"):
            assert np.all(series.log_negativity[("p", j)] < 1e-10)
        assert np.max(series.log_negativity[("p", "4")]) > 0.1

    def test_partner_outside_truncation(self):
        with pytest.raises(ConfigError):
            redistribution_map(line_config(1), [41])

    def test_3d_partner_names(self):
        with pytest.raises(ConfigError):
            redistribution_map(cube_config(Regime.SUM_3D), ["d"])


class TestLimits:
    def test_difference_has_no_limit(self):
        with pytest.raises(ValueError):
            long_time_limits(cube_config(Regime.DIFF_3D))

    @pytest.mark.parametrize("r", [0.5, 1.0, 1.5])
    def test_limit_values(self, r):
        assert long_time_limits(cube_config(Regime.SUM_3D, r=r))["mutual_information"] == pytest.approx(
            entropy_function(math.cosh(2 * r)))
        harm = long_time_limits(line_config(3, r=r))
        assert harm["two_nu_minus"] == pytest.approx(math.cosh(2 * r))
        assert harm["log_negativity_exponent"] < 0
        fund = long_time_limits(line_config(1, r=r))
        assert np.allclose(np.diag(fund["covariance_s_p"]), 0.5 * np.array([1, 1, math.cosh(2 * r), math.cosh(2 * r)]))

    def test_truncation_report(self):
        assert truncation_report(cube_config(Regime.SUM_3D)) == {"applicable": False}
        rep = truncation_report(line_config(3))
        assert rep["applicable"] and rep["half_truncation"] == 20
        assert rep["max_overall"] < 1e-8
