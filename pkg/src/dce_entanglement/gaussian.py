"""Gaussian states: covariance algebra, propagation and correlation measures.

Quadratures are ``q = (a + a^dagger)/sqrt(2)`` and ``p = -i (a - a^dagger)/sqrt(2)``,
interleaved per mode as ``(q_1, p_1, q_2, p_2, ...)``. The vacuum block is
``I/2``. All logarithms are base 2, so measures are in bits.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .bogoliubov.transform import BogoliubovTransform
from .errors import InvalidCovarianceError, SymplecticDefectError, UnknownModeError

PHYSICAL_TOL = 1e-9
PROPAGATE_DEFECT_TOL = 1e-6
_SERIES_SWITCH = 1e-8
# relative gap below which two symplectic eigenvalues count as degenerate
_SEPARATION = 1e-6


def symplectic_form(n_modes: int) -> np.ndarray:
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


@dataclass(frozen=True)
class CovarianceState:
    """Gaussian state over an ordered list of mode labels.

    Attributes:
        displacement: first moments, length ``2n``.
        covariance: symmetric ``2n x 2n`` matrix of symmetrized second moments.
        basis: mode labels, one per ``(q, p)`` pair.
    """

    displacement: np.ndarray
    covariance: np.ndarray
    basis: tuple

    def __post_init__(self):
        basis = tuple(str(b) for b in self.basis)
        v = np.array(self.covariance, dtype=float)
        d = np.array(self.displacement, dtype=float)
        if v.shape != (2 * len(basis), 2 * len(basis)) or d.shape != (2 * len(basis),):
            raise ValueError("covariance and displacement must match the basis size")
        if len(set(basis)) != len(basis):
            raise ValueError(f"duplicate mode labels in {basis}")
        scale = max(1.0, float(np.max(np.abs(v)))) if v.size else 1.0
        if not np.allclose(v, v.T, atol=1e-12 * scale, rtol=0):
            raise InvalidCovarianceError("covariance matrix is not symmetric")
        v = 0.5 * (v + v.T)
        v.setflags(write=False)
        d.setflags(write=False)
        object.__setattr__(self, "covariance", v)
        object.__setattr__(self, "displacement", d)
        object.__setattr__(self, "basis", basis)

    @classmethod
    def vacuum(cls, modes: Sequence) -> "CovarianceState":
        n = len(modes)
        return cls(np.zeros(2 * n), 0.5 * np.eye(2 * n), tuple(modes))

    def index(self, mode) -> int:
        try:
            return self.basis.index(str(mode))
        except ValueError:
            raise UnknownModeError(f"mode {mode!r} not in basis {self.basis}") from None

    def block(self, a, b=None) -> np.ndarray:
        """2x2 covariance block between modes ``a`` and ``b`` (``b`` defaults to ``a``)."""
        i, j = self.index(a), self.index(a if b is None else b)
        return self.covariance[2 * i:2 * i + 2, 2 * j:2 * j + 2]

    def is_physical(self, tol: float = PHYSICAL_TOL) -> bool:
        return bool(np.min(symplectic_eigenvalues(self.covariance)) >= 0.5 - tol)


@dataclass(frozen=True)
class SqueezeParams:
    r: float

    def __post_init__(self):
        if not self.r >= 0:
            raise ValueError(f"squeezing must be nonnegative, got {self.r}")


@dataclass(frozen=True)
class EntanglementReport:
    """Correlation measures of a two-mode reduction.

    ``eta_minus``/``eta_plus`` are the symplectic eigenvalues of ``2V``;
    ``clamped`` flags a slightly negative radicand set to zero.
    """

    nu_minus: float
    log_negativity: float
    mutual_information: float
    eta_plus: float
    eta_minus: float
    sigma: float
    det: float
    clamped: bool = False


def initial_tmsv(r, mode_s="s", mode_p="p") -> CovarianceState:
    """Two-mode squeezed vacuum in basis ``(p, s)``.

    Diagonal blocks ``cosh(2r)/2 I``, cross block ``diag(sinh 2r, -sinh 2r)/2``.
    """
    r = r.r if isinstance(r, SqueezeParams) else SqueezeParams(float(r)).r
    c, s = math.cosh(2 * r) / 2, math.sinh(2 * r) / 2
    v = np.array([
        [c, 0, s, 0],
        [0, c, 0, -s],
        [s, 0, c, 0],
        [0, -s, 0, c],
    ])
    return CovarianceState(np.zeros(4), v, (mode_p, mode_s))


def propagate(state: CovarianceState, transform: BogoliubovTransform,
              defect_tol: float = PROPAGATE_DEFECT_TOL) -> CovarianceState:
    """Apply a Bogoliubov transform to the modes it acts on.

    Input modes of the transform missing from ``state`` are added in
    vacuum. Modes outside the transform pass through unchanged. The output
    basis lists untouched modes first, then the transform's output rows.
    Untracked vacuum inputs contribute ``tail_gram / 2``.

    Raises:
        SymplecticDefectError: the transform's row defect exceeds ``defect_tol``.
    """
    defect = transform.max_defect()
    if defect > defect_tol:
        raise SymplecticDefectError(f"transform row defect {defect:.2e} exceeds {defect_tol:.1e}")
    cols = list(transform.mode_set)
    rows = list(transform.row_modes)
    untouched = [m for m in state.basis if m not in cols]
    clash = set(untouched) & set(rows)
    if clash:
        raise ValueError(f"output modes {sorted(clash)} collide with untouched modes")
    in_basis = untouched + cols
    # embed the state into the input basis, new modes in vacuum
    n_in = len(in_basis)
    v_in = 0.5 * np.eye(2 * n_in)
    d_in = np.zeros(2 * n_in)
    pos = [in_basis.index(m) for m in state.basis]
    idx = np.array([2 * p + o for p in pos for o in (0, 1)], dtype=int)
    v_in[np.ix_(idx, idx)] = state.covariance
    d_in[idx] = state.displacement
    nu, nr = len(untouched), len(rows)
    s = np.zeros((2 * (nu + nr), 2 * n_in))
    s[:2 * nu, :2 * nu] = np.eye(2 * nu)
    s[2 * nu:, 2 * nu:] = transform.quadrature_matrix()
    v_out = s @ v_in @ s.T
    if transform.tail_gram is not None:
        v_out[2 * nu:, 2 * nu:] += 0.5 * transform.tail_gram
    return CovarianceState(s @ d_in, v_out, tuple(untouched + rows))


def reduce(state: CovarianceState, pair) -> CovarianceState:
    """Restrict ``state`` to the listed modes (usually a pair)."""
    idx = [state.index(m) for m in pair]
    q = np.array([2 * i + o for i in idx for o in (0, 1)], dtype=int)
    return CovarianceState(state.displacement[q], state.covariance[np.ix_(q, q)], tuple(str(m) for m in pair))


def symplectic_eigenvalues(v: np.ndarray) -> np.ndarray:
    """Symplectic spectrum: moduli of the eigenvalues of ``i Omega V``, one per mode, ascending.

    For positive definite ``V = L L^T`` the same spectrum is obtained from the
    Hermitian matrix ``L^T (i Omega) L``, whose eigenvalues are accurate to
    ``eps ||V||`` even when they are degenerate (pure states). Otherwise the
    general eigensolver is used.
    """
    v = np.asarray(v, dtype=float)
    if v.ndim != 2 or v.shape[0] != v.shape[1] or v.shape[0] % 2:
        raise ValueError("covariance must be square with even dimension")
    if not np.all(np.isfinite(v)):
        raise np.linalg.LinAlgError("non-finite covariance")
    omega = symplectic_form(v.shape[0] // 2)
    try:
        low = np.linalg.cholesky(0.5 * (v + v.T))
        ev = np.linalg.eigvalsh(1j * (low.T @ omega @ low))
    except np.linalg.LinAlgError:
        ev = np.linalg.eigvals(1j * omega @ v)
    # eigenvalues come in +/- pairs
    return np.sort(np.abs(ev))[::2]


def partial_transpose(v4: np.ndarray) -> np.ndarray:
    """Flip the momentum of the second mode of a two-mode covariance."""
    flip = np.diag([1.0, 1.0, 1.0, -1.0])
    return flip @ np.asarray(v4, dtype=float) @ flip


def precision_floor(v: np.ndarray) -> float:
    """Rough absolute uncertainty of symplectic eigenvalues of a rounded covariance.

    Rounding the entries perturbs the spectrum by up to ``eps ||V||^2``.
    """
    return float(np.finfo(float).eps * np.max(np.abs(v)) ** 2)


def _spectral_tol(v: np.ndarray, tol: float) -> float:
    return tol + 64.0 * precision_floor(v)


def two_mode_spectrum(v4: np.ndarray, transpose: bool = False) -> tuple:
    """Symplectic eigenvalues ``(small, large)`` of a 4x4 covariance.

    Uses the local invariants ``Delta = det A + det B +/- 2 det C`` and
    ``det V`` (the minus sign gives the partial transpose). The small root is
    taken as ``det V / large``, which keeps relative accuracy when one mode
    is strongly squeezed. Nearly degenerate roots fall back to the Hermitian
    eigensolve, where the quadratic formula would lose half the digits.
    """
    v4 = np.asarray(v4, dtype=float)
    det_a, det_b, det_c, det_v = _dets(v4)
    delta = det_a + det_b + (-2.0 if transpose else 2.0) * det_c
    disc = delta * delta - 4.0 * det_v
    if delta > 0 and det_v > 0 and disc > _SEPARATION * delta * delta:
        big = 0.5 * (delta + math.sqrt(disc))
        return math.sqrt(det_v / big), math.sqrt(big)
    small, large = symplectic_eigenvalues(partial_transpose(v4) if transpose else v4)
    return float(small), float(large)


def entropy_function(x: float) -> float:
    """``f(x) = ((x+1)/2) log2((x+1)/2) - ((x-1)/2) log2((x-1)/2)``, with ``f(1) = 0``."""
    u = 0.5 * (x - 1.0)
    if u < 0:
        raise ValueError(f"f(x) needs x >= 1, got {x}")
    if u < 0.5 * _SERIES_SWITCH:
        # (1+u) ln(1+u) - u ln u to third order
        head = u + 0.5 * u * u - u ** 3 / 6.0
        return (head - (u * math.log(u) if u > 0 else 0.0)) / math.log(2.0)
    return (1 + u) * math.log2(1 + u) - u * math.log2(u)


def _dets(v4):
    a, b, c = v4[:2, :2], v4[2:, 2:], v4[:2, 2:]
    return np.linalg.det(a), np.linalg.det(b), np.linalg.det(c), np.linalg.det(v4)


def log_negativity(state4: CovarianceState, tol: float = PHYSICAL_TOL) -> tuple:
    """Smallest partially transposed symplectic eigenvalue and log-negativity.

    Returns:
        ``(nu_minus, log_neg, sigma, det, clamped)``.

    Raises:
        InvalidCovarianceError: ``sigma^2 - 4 det V`` below ``-tol``.
    """
    v4 = _as4(state4)
    det_a, det_b, det_c, det_v = _dets(v4)
    sigma = det_a + det_b - 2.0 * det_c
    disc = sigma * sigma - 4.0 * det_v
    clamped = False
    if disc < 0:
        if disc < -max(tol, 64.0 * precision_floor(v4)) * max(1.0, sigma * sigma):
            raise InvalidCovarianceError(f"sigma^2 - 4 det V = {disc:.3e} < 0")
        disc, clamped = 0.0, True
    nu_minus = two_mode_spectrum(v4, transpose=True)[0]
    logneg = max(0.0, -math.log2(2.0 * nu_minus)) if nu_minus > 0 else math.inf
    return nu_minus, logneg, sigma, det_v, clamped


def mutual_information(state4: CovarianceState, tol: float = PHYSICAL_TOL) -> tuple:
    """Mutual information in bits and the symplectic eigenvalues of ``2V``.

    Returns:
        ``(I, eta_plus, eta_minus)``.

    Raises:
        InvalidCovarianceError: a symplectic eigenvalue of ``2V`` below ``1 - tol``.
    """
    v4 = _as4(state4)
    eta_minus, eta_plus = two_mode_spectrum(2.0 * v4)
    if eta_minus < 1.0 - _spectral_tol(2.0 * v4, tol):
        raise InvalidCovarianceError(f"symplectic eigenvalue {eta_minus} of 2V is below 1")
    local_a = math.sqrt(max(np.linalg.det(2.0 * v4[:2, :2]), 1.0))
    local_b = math.sqrt(max(np.linalg.det(2.0 * v4[2:, 2:]), 1.0))
    clip = lambda x: max(x, 1.0)
    info = (entropy_function(local_a) + entropy_function(local_b)
            - entropy_function(clip(eta_minus)) - entropy_function(clip(eta_plus)))
    return max(info, 0.0), float(eta_plus), float(eta_minus)


def entanglement_report(state4: CovarianceState, tol: float = PHYSICAL_TOL) -> EntanglementReport:
    nu, logneg, sigma, det_v, clamped = log_negativity(state4, tol)
    info, eta_p, eta_m = mutual_information(state4, tol)
    return EntanglementReport(nu, logneg, info, eta_p, eta_m, sigma, det_v, clamped)


def photon_number(state: CovarianceState, mode) -> float:
    """Mean photon number ``(V_qq + V_pp - 1)/2 + (d_q^2 + d_p^2)/2``."""
    i = state.index(mode)
    v = state.covariance
    d = state.displacement
    return float(0.5 * (v[2 * i, 2 * i] + v[2 * i + 1, 2 * i + 1] - 1.0)
                 + 0.5 * (d[2 * i] ** 2 + d[2 * i + 1] ** 2))


def _as4(state4) -> np.ndarray:
    v = state4.covariance if isinstance(state4, CovarianceState) else np.asarray(state4, dtype=float)
    if v.shape != (4, 4):
        raise ValueError("two-mode measures need a 4x4 covariance")
    return v
