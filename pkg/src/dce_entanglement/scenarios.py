"""End-to-end regimes: a static-cavity mode ``p`` entangled with a mode ``s``
of a shaken cavity, observed as the shaking proceeds.

Four regimes are supported:

* ``Sum3D``: 3D cavity driven at ``w_s + w_c`` (pair creation),
* ``Diff3D``: 3D cavity driven at ``|w_s - w_c|`` (exchange),
* ``Fund1D``: 1D cavity driven at the fundamental (``q = 1``),
* ``Harm1D``: 1D cavity driven at an odd harmonic ``q >= 3``.

3D time grids are in the shaker slow time ``tau``. 1D grids are in
``tt = 2 tau``, the variable of the closed-form 1D solution.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .bogoliubov import (BogoliubovTransform, shaker_transform_1d, two_mode_difference_transform,
                         two_mode_rates, two_mode_sum_transform)
from .bogoliubov.hypergeometric import DEFAULT_TRUNCATION
from .cavity import CavityGeometry, DriveConfig, ModeIndex, ResonanceKind, as_mode, resonant_partner
from .errors import ConfigError, DCEError, NumericalError
from .gaussian import (CovarianceState, entanglement_report, entropy_function, initial_tmsv, photon_number,
                       precision_floor, propagate, reduce)

STATIC_MODE = "p"
BISECTION_RTOL = 1e-6


class Regime(enum.Enum):
    SUM_3D = "Sum3D"
    DIFF_3D = "Diff3D"
    FUND_1D = "Fund1D"
    HARM_1D = "Harm1D"

    @property
    def is_1d(self) -> bool:
        return self in (Regime.FUND_1D, Regime.HARM_1D)


@dataclass(frozen=True)
class ScenarioConfig:
    """Fully resolved description of one run.

    Attributes:
        regime: one of the four regimes.
        geometry: shaken cavity.
        drive: wall motion; ``drive.t_stop`` freezes the evolution.
        r: initial two-mode squeezing between ``p`` and ``s``.
        mode_s: cavity mode initially entangled with ``p``.
        mode_c: resonant partner (3D only); found automatically when omitted.
        truncation: tracked 1D input modes ``K``.
        tau: slow-time samples (``tau`` in 3D, ``tt`` in 1D).
        partners: extra cavity modes whose pairs with ``p`` and ``s`` are recorded.
        tail: include untracked 1D input modes as an exact vacuum tail.
        label: free-form tag (e.g. a figure name) copied to the metadata.
    """

    regime: Regime
    geometry: CavityGeometry
    drive: DriveConfig
    r: float
    mode_s: ModeIndex
    tau: tuple
    mode_c: Optional[ModeIndex] = None
    truncation: int = DEFAULT_TRUNCATION
    partners: tuple = ()
    tail: bool = True
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "regime", Regime(self.regime))
        object.__setattr__(self, "mode_s", as_mode(self.mode_s))
        object.__setattr__(self, "tau", tuple(float(t) for t in self.tau))
        problems = self.problems()
        if problems:
            raise ConfigError(problems)
        if not self.regime.is_1d and self.mode_c is None:
            kind = ResonanceKind.SUM if self.regime is Regime.SUM_3D else ResonanceKind.DIFFERENCE
            partner = resonant_partner(self.geometry, self.drive, self.mode_s, kind)
            if partner is None:
                    raise ConfigError([f"mode_c: no {kind.value.lower()}-resonant partner of {self.mode_s} for this drive"])
            object.__setattr__(self, "mode_c", partner)
        elif self.mode_c is not None:
            object.__setattr__(self, "mode_c", as_mode(self.mode_c))
        object.__setattr__(self, "partners", tuple(str(p) for p in self.partners))

    def problems(self) -> list:
        out = []
        geom_1d = self.geometry.is_1d
        if self.regime.is_1d and not geom_1d:
            out.append(f"geometry: regime {self.regime.value} needs a 1D cavity")
        if not self.regime.is_1d and geom_1d:
            out.append(f"geometry: regime {self.regime.value} needs a 3D cavity")
        q = self.drive.harmonic_q
        if self.regime is Regime.FUND_1D and q != 1:
            out.append("harmonic_q: Fund1D requires harmonic_q = 1")
        if self.regime is Regime.HARM_1D:
            if q is not None and q % 2 == 0:
                out.append("harmonic_q must be odd")
            elif q is None or q < 3:
                out.append("harmonic_q: Harm1D requires an odd harmonic_q >= 3")
        if not self.r >= 0:
            out.append("r: squeezing must be nonnegative")
        if self.regime.is_1d:
            bad = [j for j in self.partners if not str(j).isdigit() or not 1 <= int(j) <= self.truncation]
            if bad:
                out.append(f"partners: {bad} are not mode numbers within the truncation")
        elif any(str(j) != "c" for j in self.partners):
            out.append("partners: in 3D the only partner mode is 'c'")
        if len(self.mode_s.n) != (1 if geom_1d else 3):
            out.append("mode_s: index dimensionality does not match the cavity")
        if self.regime.is_1d and self.mode_s.x > self.truncation:
            out.append("mode_s: index exceeds the truncation")
        if self.truncation < 2:
            out.append("truncation: must be at least 2")
        if not self.tau:
            out.append("tau: time grid is empty")
        elif any(t < 0 for t in self.tau) or any(b < a for a, b in zip(self.tau, self.tau[1:])):
            out.append("tau: samples must be nonnegative and nondecreasing")
        return out

    # labels -------------------------------------------------------------
    @property
    def s_label(self) -> str:
        return str(self.mode_s.x) if self.regime.is_1d else "s"

    @property
    def cavity_modes(self) -> tuple:
        """Output modes that are observed (``s`` first)."""
        if self.regime.is_1d:
            mods = [self.s_label] + [p for p in self.partners if p != self.s_label]
            return tuple(mods)
        return ("s", "c")

    @property
    def pairs(self) -> tuple:
        s = self.s_label
        out = [(STATIC_MODE, s)]
        for j in self.partners:
            if j == s:
                continue
            out.append((STATIC_MODE, j))
            out.append((s, j))
        return tuple(dict.fromkeys(out))

    @property
    def time_variable(self) -> str:
        return "tau_tilde" if self.regime.is_1d else "tau"

    def frozen_time(self, t: float) -> float:
        """Sample time clipped to the end of the shaking window."""
        stop = self.drive.tau_stop
        if self.regime.is_1d:
            stop = 2.0 * stop
        return min(t, stop)

    def parameters(self) -> dict:
        """Plain-data view used for metadata."""
        d = self.drive
        return {
            "regime": self.regime.value,
            "label": self.label,
            "lengths": list(self.geometry.lengths),
            "dimensionality": self.geometry.dimensionality.value,
            "epsilon": d.epsilon,
            "omega_drive": d.omega_drive,
            "harmonic_q": d.harmonic_q,
            "t_start": d.t_start,
            "t_stop": d.t_stop if math.isfinite(d.t_stop) else None,
            "r": self.r,
            "mode_s": list(self.mode_s.n),
            "mode_c": list(self.mode_c.n) if self.mode_c is not None else None,
            "truncation": self.truncation,
            "partners": list(self.partners),
            "tail": self.tail,
            "time_variable": self.time_variable,
            "n_samples": len(self.tau),
            "tau_min": self.tau[0],
            "tau_max": self.tau[-1],
        }


@dataclass
class ObservableSeries:
    """Time series of photon numbers and pairwise correlation measures."""

    tau: np.ndarray
    photon_numbers: dict
    log_negativity: dict
    mutual_information: dict
    nu_minus: dict
    metadata: dict = field(default_factory=dict)
    config: Optional[ScenarioConfig] = None

    def columns(self) -> dict:
        """Ordered ``name -> values`` mapping used by the writers."""
        cols = {"tau": self.tau}
        for m, v in self.photon_numbers.items():
            cols[f"N_{m}"] = v
        for (a, b), v in self.log_negativity.items():
            cols[f"logneg_{a}_{b}"] = v
        for (a, b), v in self.mutual_information.items():
            cols[f"mutinfo_{a}_{b}"] = v
        return cols


@dataclass(frozen=True)
class SampleResult:
    state: CovarianceState
    transform: BogoliubovTransform


def _transform(config: ScenarioConfig, t: float) -> BogoliubovTransform:
    t = config.frozen_time(t)
    if config.regime.is_1d:
        rows = [int(m) for m in config.cavity_modes]
        return shaker_transform_1d(config.drive.harmonic_q, t / 2.0, config.truncation, rows=rows,
                                   tail=config.tail)
    rates = two_mode_rates(config.geometry, config.drive, config.mode_s, config.mode_c)
    if config.regime is Regime.SUM_3D:
        return two_mode_sum_transform(rates, t)
    return two_mode_difference_transform(rates, t)


def evolve(config: ScenarioConfig, t: float) -> SampleResult:
    """Global Gaussian state of ``p`` and the observed cavity modes at time ``t``."""
    transform = _transform(config, t)
    state = propagate(initial_tmsv(config.r, mode_s=config.s_label, mode_p=STATIC_MODE), transform)
    keep = (STATIC_MODE,) + tuple(config.cavity_modes)
    return SampleResult(reduce(state, keep), transform)


def run_scenario(config: ScenarioConfig) -> ObservableSeries:
    """Evaluate every sample of the time grid.

    Raises:
        NumericalError: any solver or Gaussian-layer failure, with sample context.
    """
    n = len(config.tau)
    modes = (STATIC_MODE,) + tuple(config.cavity_modes)
    photons = {m: np.empty(n) for m in modes}
    logneg = {p: np.empty(n) for p in config.pairs}
    mutinfo = {p: np.empty(n) for p in config.pairs}
    nu = {p: np.empty(n) for p in config.pairs}
    floors = {p: 0.0 for p in config.pairs}
    worst_defect = 0.0
    worst_leak = 0.0
    for i, t in enumerate(config.tau):
        try:
            res = evolve(config, t)
            for m in modes:
                photons[m][i] = photon_number(res.state, m)
            for pair in config.pairs:
                sub = reduce(res.state, pair)
                floors[pair] = max(floors[pair], precision_floor(sub.covariance))
                rep = entanglement_report(sub)
                logneg[pair][i] = rep.log_negativity
                mutinfo[pair][i] = rep.mutual_information
                nu[pair][i] = rep.nu_minus
        except DCEError as exc:
            raise NumericalError(f"sample {i} ({config.time_variable}={t}): {exc}") from exc
        worst_defect = max(worst_defect, res.transform.max_defect())
        worst_leak = max(worst_leak, float(np.max(res.transform.block_leak())))
    for arr in (*photons.values(), *logneg.values(), *mutinfo.values()):
        if not np.all(np.isfinite(arr)):
            raise NumericalError("non-finite observable in series")
    meta = {
        "parameters": config.parameters(),
        "symplectic_defect": worst_defect,
        "truncation_leak": worst_leak,
        # eps * max|V|^2: spectra of strongly squeezed pairs are not resolved below this
        "measure_precision": {f"{a}_{b}": v for (a, b), v in floors.items()},
        "solver": "two-mode analytic" if not config.regime.is_1d else "hypergeometric + vacuum tail",
        "lab_time_max": config.drive.lab_time(config.tau[-1] / 2.0 if config.regime.is_1d else config.tau[-1]),
    }
    if not config.regime.is_1d:
        rates = two_mode_rates(config.geometry, config.drive, config.mode_s, config.mode_c)
        meta["gamma_minus"] = rates.gamma_minus
        meta["gamma_plus"] = rates.gamma_plus
    return ObservableSeries(np.array(config.tau), photons, logneg, mutinfo, nu, meta, config)


def redistribution_map(config: ScenarioConfig, partner_modes: Sequence) -> ObservableSeries:
    """Pairwise series for ``(p, j)`` and ``(s, j)`` over the requested partners.

    In 3D the only partner is ``c``. In 1D partners are mode numbers within
    the truncation.

    Raises:
        ConfigError: a partner outside the tracked set.
    """
    partners = tuple(str(j) for j in partner_modes)
    return run_scenario(replace(config, partners=partners))


@dataclass(frozen=True)
class SuddenDeath:
    """Result of a sudden-death search.

    ``tau_star`` is ``None`` when the negativity stays positive in the window.
    ``reentry`` is set when the negativity revives after vanishing.
    ``photon_turning_point`` is the first local maximum of ``N_s`` if any,
    reported for comparison only.
    """

    tau_star: Optional[float]
    bracket: Optional[tuple]
    reentry: bool
    photon_turning_point: Optional[float]


def _nu_minus_at(config: ScenarioConfig, pair, t: float) -> float:
    res = evolve(config, t)
    return entanglement_report(reduce(res.state, pair)).nu_minus


def sudden_death_time(series_or_config, pair=None, rtol: float = BISECTION_RTOL) -> SuddenDeath:
    """Earliest time after which the pair's log-negativity stays at zero.

    The crossing is bracketed on the sampled grid and refined by bisection
    on ``nu_minus - 1/2``.

    Raises:
        ValueError: the negativity is zero at the first sample.
    """
    series = series_or_config if isinstance(series_or_config, ObservableSeries) else run_scenario(series_or_config)
    config = series.config
    pair = pair or (STATIC_MODE, config.s_label if config else "s")
    pair = tuple(str(x) for x in pair)
    nu = series.nu_minus[pair]
    ln = series.log_negativity[pair]
    if not ln[0] > 0:
        raise ValueError("sudden death needs a positive initial negativity (r > 0)")
    dead = nu >= 0.5
    photons = series.photon_numbers.get(pair[1])
    turning = None
    if photons is not None:
        peaks = np.where((photons[1:-1] > photons[:-2]) & (photons[1:-1] >= photons[2:]))[0]
        if peaks.size:
            turning = float(series.tau[peaks[0] + 1])
    if not dead.any():
        return SuddenDeath(None, None, False, turning)
    first = int(np.argmax(dead))
    reentry = not dead[first:].all()
    lo, hi = float(series.tau[first - 1]), float(series.tau[first])
    if config is not None:
        # nu_minus - 1/2 changes sign in [lo, hi]
        while hi - lo > rtol * hi:
            mid = 0.5 * (lo + hi)
            if _nu_minus_at(config, pair, mid) >= 0.5:
                hi = mid
            else:
                lo = mid
    return SuddenDeath(hi, (float(series.tau[first - 1]), float(series.tau[first])), reentry, turning)


def long_time_limits(config: ScenarioConfig) -> dict:
    """Closed-form asymptotic predictions for comparison with late samples.

    Raises:
        ValueError: for ``Diff3D``, whose observables are periodic.
    """
    r = config.r
    c2r = math.cosh(2 * r)
    if config.regime is Regime.DIFF_3D:
        raise ValueError("Diff3D has no long-time limit: its observables are periodic")
    if config.regime is Regime.SUM_3D:
        return {"log_negativity": 0.0, "mutual_information": entropy_function(c2r), "det_over_sigma": 0.25}
    if config.regime is Regime.FUND_1D:
        return {
            "covariance_s_p": (0.5 * np.diag([1.0, 1.0, c2r, c2r])).tolist(),
            "photon_number_s": 0.0,
            "log_negativity": 0.0,
            "mutual_information": 0.0,
        }
    return {
        "two_nu_minus": c2r,
        "log_negativity_exponent": -math.log2(c2r),
        "log_negativity": 0.0,
        "mutual_information": 0.0,
    }


def late_time_values(series: ObservableSeries) -> dict:
    """Observables of the ``(p, s)`` pair at the last sample, keyed like :func:`long_time_limits`."""
    config = series.config
    pair = (STATIC_MODE, config.s_label)
    nu = float(series.nu_minus[pair][-1])
    out = {
        "log_negativity": float(series.log_negativity[pair][-1]),
        "mutual_information": float(series.mutual_information[pair][-1]),
    }
    if config.regime is Regime.SUM_3D:
        res = evolve(config, config.tau[-1])
        rep = entanglement_report(reduce(res.state, pair))
        out["det_over_sigma"] = rep.det / rep.sigma
    elif config.regime is Regime.FUND_1D:
        out["photon_number_s"] = float(series.photon_numbers[config.s_label][-1])
    else:
        out["two_nu_minus"] = 2.0 * nu
        out["log_negativity_exponent"] = -math.log2(2.0 * nu)
    return out


def truncation_report(config: ScenarioConfig) -> dict:
    """Compare observables at truncation ``K`` and ``K/2`` (1D regimes only)."""
    if not config.regime.is_1d:
        return {"applicable": False}
    half = max(config.truncation // 2, max(int(m) for m in config.cavity_modes), config.drive.harmonic_q)
    full = run_scenario(config)
    coarse = run_scenario(replace(config, truncation=half))
    diffs = {}
    for name, col in full.columns().items():
        if name == "tau":
            continue
        diffs[name] = float(np.max(np.abs(col - coarse.columns()[name])))
    return {"applicable": True, "truncation": config.truncation, "half_truncation": half,
            "max_abs_difference": diffs, "max_overall": max(diffs.values()) if diffs else 0.0}
