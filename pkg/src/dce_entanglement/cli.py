"""Command line entry point: TOML config in, CSV/JSON/SVG out.

Exit codes: 0 success, 2 invalid configuration, 3 numerical failure,
4 file-system failure (missing config, unwritable or existing output).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .bogoliubov import two_mode_rates
from .bogoliubov.hypergeometric import DEFAULT_TRUNCATION, PRECISION_TOL
from .cavity import DEFAULT_RESONANCE_RTOL, CavityGeometry, DriveConfig, ModeIndex, mode_frequency
from .errors import ConfigError, DCEError
from .gaussian import PHYSICAL_TOL, PROPAGATE_DEFECT_TOL
from .scenarios import (BISECTION_RTOL, ObservableSeries, Regime, ScenarioConfig, late_time_values,
                        long_time_limits, run_scenario, sudden_death_time, truncation_report)
from .svg import line_plot

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

log = logging.getLogger("dce_entanglement")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4

TOOL_NAME = "dce-entangle"
EMIT_CHOICES = ("csv", "json", "svg")
DEFAULT_SAMPLES = 101
DEFAULT_EPSILON = 0.01

_SCHEMA = {
    "": {"label", "regime", "cavity", "drive", "state", "grid", "solver", "redistribution", "plot"},
    "cavity": {"length", "lengths"},
    "drive": {"epsilon", "omega", "harmonic_q", "t_start", "t_stop"},
    "state": {"r", "mode_s", "mode_c"},
    "grid": {"tau_min", "tau_max", "samples", "values"},
    "solver": {"truncation", "tail"},
    "redistribution": {"partners"},
    "plot": {"log_photons"},
}


@dataclass(frozen=True)
class RunManifest:
    """One invocation: which config, where to write, and what to emit.

    No randomness is involved anywhere, so identical manifests give
    identical bytes.
    """

    config_path: Path
    out_dir: Path
    emit: tuple = EMIT_CHOICES
    force: bool = False
    truncation: Optional[int] = None
    version: str = __version__


# config ------------------------------------------------------------------

def read_toml(path) -> dict:
    """Load a TOML file.

    Raises:
        OSError: unreadable file.
        ConfigError: syntax error, reported with line and column.
    """
    path = Path(path)
    with open(path, "rb") as fh:
        try:
            return tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError([f"{path}: {exc}"]) from None


class _Fields:
    """Typed lookups that record every problem instead of stopping at the first."""

    def __init__(self, raw: dict):
        self.raw = raw
        self.problems = []

    def table(self, name: str) -> dict:
        t = self.raw.get(name, {})
        if not isinstance(t, dict):
            self.problems.append(f"{name}: expected a table")
            return {}
        return t

    def get(self, table: str, key: str, kinds, default=None):
        src = self.raw if table == "" else self.table(table)
        if key not in src:
            return default
        value = src[key]
        where = f"{table}.{key}" if table else key
        if isinstance(value, bool) and bool not in kinds:
            self.problems.append(f"{where}: expected {'/'.join(k.__name__ for k in kinds)}, got bool")
            return default
        if not isinstance(value, kinds):
            self.problems.append(f"{where}: expected {'/'.join(k.__name__ for k in kinds)}, got {type(value).__name__}")
            return default
        return value


def _unknown_keys(raw: dict) -> list:
    out = []
    for key in raw:
        if key not in _SCHEMA[""]:
            out.append(f"{key}: unknown key")
    for table, allowed in _SCHEMA.items():
        if table and isinstance(raw.get(table), dict):
            out.extend(f"{table}.{k}: unknown key" for k in raw[table] if k not in allowed)
    return out


def _default_tau_max(regime: Regime, geom, drive, mode_s, mode_c) -> float:
    if regime is Regime.FUND_1D:
        return 6.0
    if regime is Regime.HARM_1D:
        return 1.5
    rates = two_mode_rates(geom, drive, mode_s, mode_c)
    if regime is Regime.SUM_3D:
        return 10.0 / rates.gamma_minus
    return 2.0 * math.pi / rates.gamma_plus


def config_from_mapping(raw: dict, truncation: Optional[int] = None, label: str = "") -> ScenarioConfig:
    """Validate a parsed TOML document and fill in defaults.

    Raises:
        ConfigError: listing every offending field.
    """
    f = _Fields(raw)
    problems = _unknown_keys(raw)
    regime_name = f.get("", "regime", (str,))
    regime = None
    if regime_name is None:
        problems.append("regime: required (Sum3D, Diff3D, Fund1D or Harm1D)")
    else:
        try:
            regime = Regime(regime_name)
        except ValueError:
            problems.append(f"regime: unknown value {regime_name!r} (Sum3D, Diff3D, Fund1D or Harm1D)")
    is_1d = regime.is_1d if regime is not None else False

    length = f.get("cavity", "length", (int, float))
    lengths = f.get("cavity", "lengths", (list,))
    geom = None
    try:
        if is_1d:
            if lengths is not None:
                problems.append("cavity.lengths: a 1D cavity takes a single 'length'")
            geom = CavityGeometry.one_d(float(length if length is not None else 1.0))
        else:
            if length is not None:
                problems.append("cavity.length: a 3D cavity takes 'lengths = [Lx, Ly, Lz]'")
            ls = lengths if lengths is not None else [1.0, 1.0, 1.0]
            if len(ls) != 3 or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in ls):
                problems.append("cavity.lengths: expected three numbers")
            else:
                geom = CavityGeometry.box(*map(float, ls))
    except ValueError as exc:
        problems.append(f"cavity: {exc}")

    r = f.get("state", "r", (int, float), 1.0)
    mode_s_raw = f.get("state", "mode_s", (int, list), 1 if is_1d else [1, 1, 1])
    mode_c_raw = f.get("state", "mode_c", (list,))
    mode_s = mode_c = None
    try:
        mode_s = ModeIndex(tuple(mode_s_raw) if isinstance(mode_s_raw, list) else (mode_s_raw,))
    except (ValueError, TypeError) as exc:
        problems.append(f"state.mode_s: {exc}")
    if is_1d and mode_c_raw is not None:
        problems.append("state.mode_c: only used in 3D regimes")
    if regime is not None and not is_1d and mode_s is not None:
        try:
            if mode_c_raw is not None:
                mode_c = ModeIndex(tuple(mode_c_raw))
            elif len(mode_s.n) == 3:
                mode_c = ModeIndex((mode_s.n[0] + 1,) + mode_s.n[1:])
        except (ValueError, TypeError) as exc:
            problems.append(f"state.mode_c: {exc}")

    epsilon = f.get("drive", "epsilon", (int, float), DEFAULT_EPSILON)
    omega = f.get("drive", "omega", (int, float))
    q = f.get("drive", "harmonic_q", (int,))
    t_start = f.get("drive", "t_start", (int, float), 0.0)
    t_stop = f.get("drive", "t_stop", (int, float), math.inf)
    if regime is Regime.FUND_1D and q is None:
        q = 1
    if regime is Regime.HARM_1D and q is None:
        q = 3
    if q is not None and is_1d and q % 2 == 0:
        problems.append("harmonic_q must be odd")
    if q is not None and not is_1d and regime is not None:
        problems.append("drive.harmonic_q: only used in 1D regimes")
        q = None
    drive = None
    if geom is not None and (is_1d or (mode_s is not None and mode_c is not None)):
        try:
            if omega is None and not is_1d:
                ws, wc = mode_frequency(geom, mode_s), mode_frequency(geom, mode_c)
                omega = ws + wc if regime is Regime.SUM_3D else abs(ws - wc)
            drive = DriveConfig.for_cavity(geom, float(epsilon), None if omega is None else float(omega),
                                           harmonic_q=q, t_start=float(t_start), t_stop=float(t_stop))
        except (ValueError, DCEError) as exc:
            problems.append(f"drive: {exc}")

    trunc = f.get("solver", "truncation", (int,), DEFAULT_TRUNCATION)
    if truncation is not None:
        trunc = truncation
    tail = f.get("solver", "tail", (bool,), True)
    partners = f.get("redistribution", "partners", (list,), [])
    f.get("plot", "log_photons", (bool,))
    label = f.get("", "label", (str,), label)

    values = f.get("grid", "values", (list,))
    tau_min = f.get("grid", "tau_min", (int, float), 0.0)
    tau_max = f.get("grid", "tau_max", (int, float))
    samples = f.get("grid", "samples", (int,), DEFAULT_SAMPLES)
    tau = None
    if values is not None:
        if tau_max is not None or "samples" in raw.get("grid", {}):
            problems.append("grid.values: give either explicit values or tau_max/samples, not both")
        if not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in values):
            problems.append("grid.values: expected numbers")
        else:
            tau = tuple(float(v) for v in values)
    else:
        if samples < 2:
            problems.append("grid.samples: need at least 2 samples")
        if tau_max is None and drive is not None and mode_s is not None:
            try:
                tau_max = _default_tau_max(regime, geom, drive, mode_s, mode_c)
            except (ValueError, DCEError) as exc:
                problems.append(f"grid.tau_max: no default ({exc})")
        if tau_max is not None and samples >= 2:
            if not tau_max > tau_min:
                problems.append("grid.tau_max: must exceed tau_min")
            else:
                tau = tuple(float(v) for v in np.linspace(tau_min, tau_max, samples))

    problems.extend(f.problems)
    if problems or regime is None or drive is None or mode_s is None or tau is None:
        raise ConfigError(problems or ["configuration incomplete"])
    try:
        return ScenarioConfig(regime, geom, drive, float(r), mode_s, tau, mode_c=mode_c, truncation=int(trunc),
                              partners=tuple(str(p) for p in partners), tail=tail, label=label)
    except ConfigError as exc:
        raise ConfigError([p for p in exc.problems if p not in problems]) from None
    except (ValueError, DCEError) as exc:
        raise ConfigError([str(exc)]) from None


def parse_config(path, truncation: Optional[int] = None) -> ScenarioConfig:
    """Read and validate a scenario file; ``truncation`` overrides the file."""
    path = Path(path)
    return config_from_mapping(read_toml(path), truncation, label=path.stem)


# emission ------------------------------------------------------------------

def format_csv(columns: dict) -> str:
    """CSV text with shortest round-trip float formatting."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    names = list(columns)
    writer.writerow(names)
    for row in zip(*(columns[n] for n in names)):
        writer.writerow([repr(float(v)) for v in row])
    return buf.getvalue()


def parse_csv(text: str) -> dict:
    """Inverse of :func:`format_csv`."""
    rows = list(csv.reader(io.StringIO(text)))
    names = rows[0]
    cols = {n: [] for n in names}
    for row in rows[1:]:
        for n, v in zip(names, row):
            cols[n].append(float(v))
    return {n: np.array(v) for n, v in cols.items()}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def tolerances() -> dict:
    return {
        "resonance_rtol": DEFAULT_RESONANCE_RTOL,
        "physical_tol": PHYSICAL_TOL,
        "propagate_defect_tol": PROPAGATE_DEFECT_TOL,
        "series_precision_tol": PRECISION_TOL,
        "sudden_death_rtol": BISECTION_RTOL,
    }


def analyse(series: ObservableSeries) -> dict:
    """Sudden-death time and long-time comparison, when they apply."""
    config = series.config
    out = {}
    pair = ("p", config.s_label)
    if series.log_negativity[pair][0] > 0:
        sd = sudden_death_time(series, pair)
        out["sudden_death"] = {"tau_star": sd.tau_star, "bracket": sd.bracket, "reentry": sd.reentry,
                               "photon_turning_point": sd.photon_turning_point}
    if config.regime is not Regime.DIFF_3D:
        predicted = long_time_limits(config)
        observed = late_time_values(series)
        out["long_time"] = {k: {"predicted": predicted[k], "observed": observed[k]}
                            for k in predicted if k in observed}
    return out


def build_metadata(series: ObservableSeries, manifest: RunManifest, extra: dict) -> dict:
    return {
        "tool": TOOL_NAME,
        "version": manifest.version,
        "determinism": "no randomness; identical inputs give identical output bytes",
        "config": str(manifest.config_path),
        **series.metadata,
        "tolerances": tolerances(),
        **extra,
    }


def render_outputs(series: ObservableSeries, manifest: RunManifest, metadata: dict,
                   log_photons: bool = True) -> dict:
    """All output files as ``name -> text``; nothing touches the disk here."""
    stem = manifest.config_path.stem
    cols = series.columns()
    files = {}
    if "csv" in manifest.emit:
        files[f"{stem}.csv"] = format_csv(cols)
    if "json" in manifest.emit:
        doc = {"metadata": metadata, "series": cols}
        files[f"{stem}.json"] = json.dumps(_jsonable(doc), indent=2, sort_keys=False) + "\n"
    if "svg" in manifest.emit:
        tag = json.dumps(_jsonable({"tool": TOOL_NAME, "version": manifest.version,
                                    "parameters": metadata["parameters"]}), sort_keys=True)
        xlabel = "slow time τ̃" if series.config.regime.is_1d else "slow time τ"
        families = [
            ("N", "mean photon number", {k[2:]: v for k, v in cols.items() if k.startswith("N_")}, log_photons),
            ("logneg", "log-negativity (bits)", {k[7:]: v for k, v in cols.items() if k.startswith("logneg_")}, False),
            ("mutinfo", "mutual information (bits)",
             {k[8:]: v for k, v in cols.items() if k.startswith("mutinfo_")}, False),
        ]
        for name, ylabel, curves, log_y in families:
            title = f"{series.config.regime.value} {series.config.label}: {ylabel}".strip()
            files[f"{stem}_{name}.svg"] = line_plot(cols["tau"], curves, title=title, xlabel=xlabel,
                                                    ylabel=ylabel, log_y=log_y, metadata=tag)
    return files


def write_outputs(files: dict, out_dir: Path, force: bool) -> list:
    """Write every file or none.

    Raises:
        FileExistsError: a target exists and ``force`` is off.
        OSError: the directory is not writable.
    """
    out_dir.mkdir(parents=True, exist_ok=True)
    targets = [out_dir / name for name in files]
    existing = [str(t) for t in targets if t.exists()]
    if existing and not force:
        raise FileExistsError(f"refusing to overwrite {', '.join(existing)} (use --force)")
    staged = []
    try:
        for target, text in zip(targets, files.values()):
            tmp = target.with_name(f".{target.name}.tmp")
            tmp.write_text(text, encoding="utf-8")
            staged.append((tmp, target))
    except OSError:
        for tmp, _ in staged:
            tmp.unlink(missing_ok=True)
        raise
    for tmp, target in staged:
        os.replace(tmp, target)
    return targets


def summary_lines(series: ObservableSeries, extra: dict) -> list:
    cfg = series.config
    lines = [f"{cfg.regime.value} {cfg.label}: {len(series.tau)} samples, "
             f"symplectic defect {series.metadata['symplectic_defect']:.2e}"]
    sd = extra.get("sudden_death")
    if sd is not None:
        if sd["tau_star"] is None:
            lines.append("sudden death: none within the sampled window")
        else:
            lines.append(f"sudden death: {cfg.time_variable}* = {sd['tau_star']:.8g}"
                         + (" (negativity revives later)" if sd["reentry"] else ""))
    lt = extra.get("long_time")
    if lt:
        lines.append(f"{'quantity':<26}{'limit':>16}{'last sample':>16}{'|diff|':>12}")
        for k, v in lt.items():
            p, o = v["predicted"], v["observed"]
            if isinstance(p, (int, float)):
                lines.append(f"{k:<26}{p:>16.8g}{o:>16.8g}{abs(p - o):>12.3e}")
    return lines


def run(manifest: RunManifest, verbose: bool = False) -> int:
    """Parse, run and emit one scenario; returns an exit code."""
    try:
        raw = read_toml(manifest.config_path)
        config = config_from_mapping(raw, manifest.truncation, label=manifest.config_path.stem)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    log_photons = bool(raw.get("plot", {}).get("log_photons", config.regime.is_1d))
    try:
        series = run_scenario(config)
        extra = analyse(series)
        extra["convergence"] = truncation_report(config)
    except (DCEError, ArithmeticError, ValueError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    metadata = build_metadata(series, manifest, extra)
    files = render_outputs(series, manifest, metadata, log_photons)
    try:
        written = write_outputs(files, manifest.out_dir, manifest.force)
    except OSError as exc:
        print(f"output error: {exc}", file=sys.stderr)
        return EXIT_IO
    for line in summary_lines(series, extra):
        print(line)
    if verbose:
        for p in written:
            print(f"wrote {p}")
    return EXIT_OK


def _emit_list(text: str) -> tuple:
    items = tuple(x.strip() for x in text.split(",") if x.strip())
    bad = [x for x in items if x not in EMIT_CHOICES]
    if bad or not items:
        raise argparse.ArgumentTypeError(f"--emit takes a subset of {','.join(EMIT_CHOICES)}")
    return items


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog=TOOL_NAME,
                                description="Entanglement dynamics of a cavity mode under resonant shaking.")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", type=Path, help="scenario TOML file")
    src.add_argument("--batch", type=Path, help="directory of scenario TOML files, run in name order")
    p.add_argument("--out", type=Path, default=Path("out"), help="output directory (default: ./out)")
    p.add_argument("--emit", type=_emit_list, default=EMIT_CHOICES, help="comma list of csv,json,svg")
    p.add_argument("--force", action="store_true", help="overwrite existing outputs")
    p.add_argument("--truncation", type=int, help="override the tracked 1D mode count K")
    p.add_argument("--verbose", action="store_true")
    p.add_argument("--version", action="version", version=f"{TOOL_NAME} {__version__}")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    if args.truncation is not None and args.truncation < 2:
        print("config error: --truncation must be at least 2", file=sys.stderr)
        return EXIT_CONFIG
    if args.config is not None:
        manifest = RunManifest(args.config, args.out, args.emit, args.force, args.truncation)
        return run(manifest, args.verbose)
    if not args.batch.is_dir():
        print(f"cannot read batch directory {args.batch}", file=sys.stderr)
        return EXIT_IO
    configs = sorted(args.batch.glob("*.toml"))
    if not configs:
        print(f"no .toml files in {args.batch}", file=sys.stderr)
        return EXIT_IO
    worst = EXIT_OK
    for path in configs:
        log.info("running %s", path)
        manifest = RunManifest(path, args.out / path.stem, args.emit, args.force, args.truncation)
        worst = max(worst, run(manifest, args.verbose))
    return worst


if __name__ == "__main__":
    sys.exit(main())
