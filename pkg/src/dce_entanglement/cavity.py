"""Cavity geometry, mode spectra, coupling matrices and resonance search.

Natural units (c = 1) are used throughout. A one-dimensional cavity only
uses ``L_x``; a three-dimensional box uses all three lengths.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DimensionalityError, ResonanceAmbiguityError

#: Relative resonance tolerance, multiplied by the fundamental frequency.
DEFAULT_RESONANCE_RTOL = 1e-9


class Dimensionality(enum.Enum):
    ONE_D = "OneD"
    THREE_D = "ThreeD"


class CouplingVariant(enum.Enum):
    SHAKER = "Shaker"
    SINGLE_WALL = "SingleWall"


class ResonanceKind(enum.Enum):
    SUM = "Sum"
    DIFFERENCE = "Difference"


@dataclass(frozen=True)
class CavityGeometry:
    """Rectangular cavity.

    Attributes:
        lengths: ``(L_x, L_y, L_z)``, all strictly positive.
        dimensionality: ``Dimensionality.ONE_D`` ignores ``L_y`` and ``L_z``.
    """

    lengths: tuple
    dimensionality: Dimensionality = Dimensionality.THREE_D

    def __post_init__(self):
        lengths = tuple(float(x) for x in self.lengths)
        if len(lengths) == 1:
            lengths = (lengths[0], 1.0, 1.0)
        if len(lengths) != 3:
            raise ValueError("lengths must have three components")
        if not all(np.isfinite(x) and x > 0 for x in lengths):
            raise ValueError(f"cavity lengths must be positive, got {lengths}")
        object.__setattr__(self, "lengths", lengths)
        object.__setattr__(self, "dimensionality", Dimensionality(self.dimensionality))

    @classmethod
    def one_d(cls, length: float) -> "CavityGeometry":
        return cls((length, 1.0, 1.0), Dimensionality.ONE_D)

    @classmethod
    def box(cls, lx: float, ly: float, lz: float) -> "CavityGeometry":
        return cls((lx, ly, lz), Dimensionality.THREE_D)

    @property
    def is_1d(self) -> bool:
        return self.dimensionality is Dimensionality.ONE_D

    @property
    def fundamental(self) -> "ModeIndex":
        """Lowest mode of the cavity."""
        return ModeIndex((1,)) if self.is_1d else ModeIndex((1, 1, 1))

    @property
    def omega1(self) -> float:
        """Frequency of the lowest mode, the unit used for slow time."""
        return mode_frequency(self, self.fundamental)


@dataclass(frozen=True, order=True)
class ModeIndex:
    """Integer mode label: ``(n,)`` in 1D, ``(n_x, n_y, n_z)`` in 3D."""

    n: tuple

    def __post_init__(self):
        n = (self.n,) if isinstance(self.n, (int, np.integer)) else tuple(self.n)
        if len(n) not in (1, 3):
            raise DimensionalityError(f"mode index must have 1 or 3 components, got {n}")
        if any(int(v) != v or v < 1 for v in n):
            raise ValueError(f"mode index components must be integers >= 1, got {n}")
        object.__setattr__(self, "n", tuple(int(v) for v in n))

    @property
    def x(self) -> int:
        return self.n[0]

    @property
    def transverse(self) -> tuple:
        return self.n[1:]

    @property
    def label(self) -> str:
        return "-".join(str(v) for v in self.n)

    def __str__(self):
        return self.label


def as_mode(m) -> ModeIndex:
    return m if isinstance(m, ModeIndex) else ModeIndex(m)


def _check_dims(geom: CavityGeometry, m: ModeIndex):
    want = 1 if geom.is_1d else 3
    if len(m.n) != want:
        raise DimensionalityError(
            f"mode {m.n} has {len(m.n)} components but the cavity is {geom.dimensionality.value}"
        )


def mode_frequency(geom: CavityGeometry, m) -> float:
    """Angular frequency ``|k|`` of a cavity mode.

    Args:
        geom: cavity geometry.
        m: mode index matching the geometry's dimensionality.

    Returns:
        ``n pi / L_x`` in 1D, ``sqrt(sum (n_i pi / L_i)^2)`` in 3D.
    """
    m = as_mode(m)
    _check_dims(geom, m)
    if geom.is_1d:
        return m.x * np.pi / geom.lengths[0]
    k = [n * np.pi / length for n, length in zip(m.n, geom.lengths)]
    return float(np.sqrt(k[0] ** 2 + k[1] ** 2 + k[2] ** 2))


@dataclass(frozen=True)
class DriveConfig:
    """Harmonic wall displacement ``r(t) = epsilon sin(omega_drive t)``.

    Attributes:
        epsilon: displacement amplitude.
        omega_drive: drive angular frequency.
        harmonic_q: optional harmonic number with ``omega_drive = q omega1``.
        t_start, t_stop: lab-time window during which the walls move.
        length_x: cavity length along the shaking axis.
        omega1: fundamental frequency defining the slow time.
    """

    epsilon: float
    omega_drive: float
    length_x: float
    omega1: float
    harmonic_q: Optional[int] = None
    t_start: float = 0.0
    t_stop: float = float("inf")

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if not self.omega_drive > 0:
            raise ValueError("omega_drive must be positive")
        if not self.t_start < self.t_stop:
            raise ValueError("t_start must precede t_stop")
        if self.harmonic_q is not None:
            tol = DEFAULT_RESONANCE_RTOL * self.omega1
            if abs(self.omega_drive - self.harmonic_q * self.omega1) >= tol:
                raise ValueError("omega_drive is not harmonic_q times the fundamental frequency")

    @classmethod
    def for_cavity(cls, geom: CavityGeometry, epsilon: float, omega_drive: float = None,
                   harmonic_q: int = None, t_start: float = 0.0, t_stop: float = float("inf")):
        """Build a drive for ``geom``; ``omega_drive`` defaults to ``harmonic_q * omega1``."""
        w1 = geom.omega1
        if omega_drive is None:
            if harmonic_q is None:
                raise ValueError("need omega_drive or harmonic_q")
            omega_drive = harmonic_q * w1
        return cls(epsilon, omega_drive, geom.lengths[0], w1, harmonic_q, t_start, t_stop)

    def slow_time(self, t: float) -> float:
        """Slow time ``epsilon omega1 t / (2 L_x)`` elapsed after ``t_start``."""
        t_eff = min(max(t, self.t_start), self.t_stop) - self.t_start
        return self.epsilon * self.omega1 * t_eff / (2.0 * self.length_x)

    def lab_time(self, tau: float) -> float:
        """Inverse of :meth:`slow_time` inside the drive window."""
        return self.t_start + 2.0 * self.length_x * tau / (self.epsilon * self.omega1)

    @property
    def tau_stop(self) -> float:
        """Slow time at which the shaking ends (``inf`` for an open window)."""
        return self.slow_time(self.t_stop) if np.isfinite(self.t_stop) else float("inf")


@dataclass(frozen=True)
class CouplingMatrix:
    entries: np.ndarray
    variant: CouplingVariant
    modes: tuple = field(default=())

    def __post_init__(self):
        e = np.array(self.entries, dtype=float)
        e.setflags(write=False)
        object.__setattr__(self, "entries", e)

    def __getitem__(self, idx):
        return self.entries[idx]


def shaker_coupling(kx: int, jx: int) -> float:
    """Rigid-translation coupling between x-indices ``kx`` and ``jx``.

    Sign fixed by the overlap integral of the mode derivative with
    respect to the wall displacement; zero for even ``kx + jx``.
    """
    if (kx + jx) % 2 == 0:
        return 0.0
    return 4.0 * kx * jx / (kx * kx - jx * jx)


def single_wall_coupling(k: int, j: int) -> float:
    """Single moving wall coupling ``2kj/(k^2 - j^2)``, zero on the diagonal."""
    if k == j:
        return 0.0
    return 2.0 * k * j / (k * k - j * j)


def coupling_matrix(geom: CavityGeometry, modes: Sequence, variant=CouplingVariant.SHAKER) -> CouplingMatrix:
    """Dense coupling matrix over an ordered mode set.

    Shaker couplings only connect modes sharing transverse indices.
    The single-wall variant is only defined for a 1D cavity.
    """
    variant = CouplingVariant(variant)
    modes = tuple(as_mode(m) for m in modes)
    if not modes:
        raise ValueError("mode set must be nonempty")
    for m in modes:
        _check_dims(geom, m)
    if variant is CouplingVariant.SINGLE_WALL and not geom.is_1d:
        raise DimensionalityError("single-wall coupling is defined for 1D cavities only")
    g = np.zeros((len(modes), len(modes)))
    for a, k in enumerate(modes):
        for b, j in enumerate(modes):
            if k.transverse != j.transverse:
                continue
            if variant is CouplingVariant.SHAKER:
                g[a, b] = shaker_coupling(k.x, j.x)
            else:
                g[a, b] = single_wall_coupling(k.x, j.x)
    return CouplingMatrix(g, variant, modes)


def enumerate_modes(geom: CavityGeometry, cutoff) -> list:
    """All modes with every index component in ``1..cutoff``.

    ``cutoff`` may be an int or a per-axis tuple (ignored beyond x in 1D).
    """
    if geom.is_1d:
        nmax = cutoff if isinstance(cutoff, int) else cutoff[0]
        return [ModeIndex((n,)) for n in range(1, nmax + 1)]
    cut = (cutoff,) * 3 if isinstance(cutoff, int) else tuple(cutoff)
    axes = [range(1, c + 1) for c in cut]
    return [ModeIndex(n) for n in itertools.product(*axes)]


def resonant_partner(geom: CavityGeometry, drive: DriveConfig, s, kind=ResonanceKind.SUM,
                     tol: float = None, cutoff=12) -> Optional[ModeIndex]:
    """Find the mode ``c`` resonantly coupled to ``s`` by the drive.

    Args:
        geom: cavity geometry.
        drive: drive configuration supplying ``omega_drive``.
        s: reference mode.
        kind: ``Sum`` for ``Omega = w_s + w_c``, ``Difference`` for ``Omega = |w_s - w_c|``.
        tol: absolute frequency tolerance; defaults to ``1e-9 * omega1``.
        cutoff: maximum index per axis searched.

    Returns:
        The unique partner with nonzero shaker coupling, or ``None``.

    Raises:
        ResonanceAmbiguityError: more than one candidate matches.
    """
    s = as_mode(s)
    _check_dims(geom, s)
    kind = ResonanceKind(kind)
    if tol is None:
        tol = DEFAULT_RESONANCE_RTOL * geom.omega1
    if not tol > 0:
        raise ValueError("tol must be positive")
    ws = mode_frequency(geom, s)
    matches = []
    for c in enumerate_modes(geom, cutoff):
        if c.transverse != s.transverse or shaker_coupling(s.x, c.x) == 0.0:
            continue
        wc = mode_frequency(geom, c)
        detuning = drive.omega_drive - (ws + wc if kind is ResonanceKind.SUM else abs(ws - wc))
        if abs(detuning) < tol:
            matches.append(c)
    if len(matches) > 1:
        raise ResonanceAmbiguityError(
            f"{len(matches)} modes resonate with {s} ({', '.join(map(str, matches))}); "
            "the spectrum is equidistant, use the 1D solver"
        )
    return matches[0] if matches else None
