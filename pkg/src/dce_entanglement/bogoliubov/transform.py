"""Bogoliubov transform container and the two-mode analytic solutions."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..cavity import CavityGeometry, DriveConfig, DEFAULT_RESONANCE_RTOL, as_mode, mode_frequency, shaker_coupling
from ..errors import DegenerateResonanceError


def _frozen(a, dtype):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class BogoliubovTransform:
    """Linear map ``a_out[n] = sum_k alpha[n, k] a_in[k] + conj(beta[n, k]) a_in[k]^dagger``.

    Rows are labelled by ``row_modes`` (output modes) and columns by
    ``mode_set`` (tracked input modes); they coincide for square transforms.
    Input modes outside ``mode_set`` are assumed to be in vacuum. Their
    summed effect is carried by ``tail_gram`` (the quadrature Gram matrix
    ``sum_k S_k S_k^T`` over untracked inputs, shape ``2R x 2R``) and
    ``tail_norms`` (per row, ``sum |alpha|^2`` and ``sum |beta|^2``).
    """

    alpha: np.ndarray
    beta: np.ndarray
    tau: float
    mode_set: tuple
    row_modes: tuple = None
    tail_gram: Optional[np.ndarray] = None
    tail_norms: Optional[np.ndarray] = None
    warning: Optional[str] = None
    info: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        alpha = _frozen(self.alpha, complex)
        beta = _frozen(self.beta, complex)
        cols = tuple(str(m) for m in self.mode_set)
        rows = cols if self.row_modes is None else tuple(str(m) for m in self.row_modes)
        if alpha.shape != beta.shape or alpha.shape != (len(rows), len(cols)):
            raise ValueError(
                f"alpha {alpha.shape} / beta {beta.shape} do not match {len(rows)} rows x {len(cols)} columns"
            )
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "mode_set", cols)
        object.__setattr__(self, "row_modes", rows)
        if self.tail_gram is not None:
            object.__setattr__(self, "tail_gram", _frozen(self.tail_gram, float))
        if self.tail_norms is not None:
            object.__setattr__(self, "tail_norms", _frozen(self.tail_norms, float))

    @classmethod
    def identity(cls, modes, tau: float = 0.0, **kw) -> "BogoliubovTransform":
        n = len(modes)
        return cls(np.eye(n), np.zeros((n, n)), tau, tuple(modes), **kw)

    @property
    def is_square(self) -> bool:
        return self.row_modes == self.mode_set

    def row_sums(self) -> np.ndarray:
        """``sum_k |alpha|^2 - |beta|^2`` per row, including any vacuum tail."""
        sums = np.sum(np.abs(self.alpha) ** 2 - np.abs(self.beta) ** 2, axis=1)
        if self.tail_norms is not None:
            sums = sums + self.tail_norms[:, 0] - self.tail_norms[:, 1]
        return sums

    def row_defect(self) -> np.ndarray:
        return np.abs(self.row_sums() - 1.0)

    def max_defect(self) -> float:
        return float(np.max(self.row_defect())) if self.alpha.size else 0.0

    def block_leak(self) -> np.ndarray:
        """Row defect of the tracked block alone, i.e. weight carried by the tail."""
        sums = np.sum(np.abs(self.alpha) ** 2 - np.abs(self.beta) ** 2, axis=1)
        return np.abs(sums - 1.0)

    def quadrature_matrix(self) -> np.ndarray:
        """Real ``2R x 2C`` matrix acting on interleaved ``(q, p)`` quadratures.

        With ``X = alpha + conj(beta)`` and ``Y = alpha - conj(beta)`` each
        2x2 block is ``[[Re X, -Im Y], [Im X, Re Y]]``.
        """
        x = self.alpha + np.conj(self.beta)
        y = self.alpha - np.conj(self.beta)
        nr, nc = self.alpha.shape
        s = np.empty((2 * nr, 2 * nc))
        s[0::2, 0::2] = x.real
        s[0::2, 1::2] = -y.imag
        s[1::2, 0::2] = x.imag
        s[1::2, 1::2] = y.real
        return s

    def vacuum_photon_numbers(self) -> np.ndarray:
        """Photon number per output mode for an all-vacuum input, ``sum_k |beta|^2``."""
        n = np.sum(np.abs(self.beta) ** 2, axis=1)
        if self.tail_norms is not None:
            n = n + self.tail_norms[:, 1]
        return n


@dataclass(frozen=True)
class TwoModeRates:
    """Two-mode resonance rates in slow time.

    ``gamma_minus`` drives the sum resonance (pair creation) and
    ``gamma_plus`` the difference resonance (exchange). The orientation
    signs record the sign of the underlying coupling, which fixes the
    sign of the off-diagonal coefficients.
    """

    gamma_minus: float
    gamma_plus: float
    orientation_minus: int = 1
    orientation_plus: int = 1

    def __post_init__(self):
        if self.gamma_minus < 0 or self.gamma_plus < 0:
            raise ValueError("rates must be nonnegative")
        if self.orientation_minus not in (1, -1) or self.orientation_plus not in (1, -1):
            raise ValueError("orientations must be +1 or -1")


def two_mode_rates(geom: CavityGeometry, drive: DriveConfig, s, c, tol: float = None) -> TwoModeRates:
    """Rates for the resonant pair ``(s, c)`` of a shaken 3D cavity.

    ``gamma_minus = Omega |g| |w_s - w_c| / (2 w1 sqrt(w_s w_c))`` and
    ``gamma_plus = Omega |g| (w_s + w_c) / (2 w1 sqrt(w_s w_c))`` with
    ``w1`` the fundamental frequency.

    Raises:
        DegenerateResonanceError: ``w_s == w_c``.
    """
    s, c = as_mode(s), as_mode(c)
    ws, wc = mode_frequency(geom, s), mode_frequency(geom, c)
    w1 = geom.omega1
    if tol is None:
        tol = DEFAULT_RESONANCE_RTOL * w1
    if abs(ws - wc) < tol:
        raise DegenerateResonanceError(f"modes {s} and {c} are degenerate (w = {ws}); no two-mode solution")
    g = shaker_coupling(s.x, c.x) if s.transverse == c.transverse else 0.0
    pref = drive.omega_drive * g / (w1 * np.sqrt(ws * wc))
    sum_coeff = pref * (ws - wc) / 2.0
    diff_coeff = pref * (ws + wc) / 2.0
    return TwoModeRates(
        abs(sum_coeff), abs(diff_coeff),
        1 if sum_coeff >= 0 else -1,
        1 if diff_coeff >= 0 else -1,
    )


def _check_tau(tau):
    if tau < 0:
        raise ValueError(f"tau must be nonnegative, got {tau}")


def two_mode_sum_transform(rates: TwoModeRates, tau: float, modes=("s", "c")) -> BogoliubovTransform:
    """Two-mode squeezer ``a_s -> cosh(g tau) a_s + sinh(g tau) a_c^dagger`` (and s <-> c)."""
    _check_tau(tau)
    x = rates.gamma_minus * tau
    sh = rates.orientation_minus * np.sinh(x)
    alpha = np.cosh(x) * np.eye(2)
    beta = np.array([[0.0, sh], [sh, 0.0]])
    return BogoliubovTransform(alpha, beta, tau, tuple(modes), info={"solver": "analytic-sum"})


def two_mode_difference_transform(rates: TwoModeRates, tau: float, modes=("s", "c")) -> BogoliubovTransform:
    """Beam-splitter rotation by angle ``gamma_plus tau`` on ``(s, c)``; ``beta = 0``."""
    _check_tau(tau)
    x = rates.gamma_plus * tau
    sn = rates.orientation_plus * np.sin(x)
    alpha = np.array([[np.cos(x), sn], [-sn, np.cos(x)]])
    return BogoliubovTransform(alpha, np.zeros((2, 2)), tau, tuple(modes), info={"solver": "analytic-difference"})
