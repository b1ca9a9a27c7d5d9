"""Closed-form 1D solution for a wall driven at ``q`` times the fundamental.

The coefficients ``rho[nu, mu]`` (positive output index ``nu``, signed
input index ``mu``) vanish unless ``nu = mu (mod q)``. Writing
``nu = j + n q`` and ``mu = j + m q``,

    rho = (s k)^(n-m) Gamma(1 + n + j/q) / Gamma(1 + m + j/q)
          * F(n + j/q, -m - j/q; 1 + n - m; k^2) / Gamma(1 + n - m),

with ``k = tanh(q tt)`` and ``s = (-1)^q``. ``F / Gamma(c)`` is taken as the
regularized function, so the ``n < m`` entries are finite and generally
nonzero. The ``mu = 0`` column is kept (``rho[jq, 0] = (s k)^n``) although
it drops out of the Bogoliubov coefficients through the ``sqrt(mu)`` weight.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .. import special
from ..errors import SeriesConvergenceError, SeriesRangeError
from .circle_map import vacuum_tail
from .transform import BogoliubovTransform

#: Largest admissible ``tanh(q tt)^2``.
KAPPA_SQ_MAX = 1.0 - 1e-6
#: Entries whose estimated rounding error exceeds this are refused.
PRECISION_TOL = 1e-8
DEFAULT_TRUNCATION = 40
# prefactors below exp(-700) underflow and are dropped
_LOG_TINY = -700.0


@dataclass(frozen=True)
class RhoCoefficients:
    """Coefficient table ``rho[nu - 1, mu + K]`` for ``nu = 1..K``, ``mu = -K..K``."""

    rho: np.ndarray
    q: int
    kappa: float
    sigma: int
    tau_tilde: float
    truncation: int
    error_estimate: float = 0.0

    def value(self, nu: int, mu: int) -> float:
        return float(self.rho[nu - 1, mu + self.truncation])


def _check_args(q, tau_tilde, truncation):
    if int(q) != q or q < 1 or q % 2 == 0:
        raise ValueError(f"q must be an odd positive integer, got {q}")
    if tau_tilde < 0:
        raise ValueError(f"slow time must be nonnegative, got {tau_tilde}")
    if truncation < q:
        raise ValueError(f"truncation {truncation} must be at least q = {q}")
    kappa = math.tanh(q * tau_tilde)
    if kappa * kappa > KAPPA_SQ_MAX:
        raise SeriesRangeError(
            f"tanh(q tt)^2 = {kappa * kappa:.10f} exceeds {KAPPA_SQ_MAX}; slow time {tau_tilde} too large"
        )
    return kappa


def rho_entry(q: int, nu: int, mu: int, kappa: float) -> tuple:
    """Single coefficient and its absolute error estimate.

    Returns ``(0.0, 0.0)`` off the residue class and where the
    denominator Gamma has a pole.
    """
    j = nu % q
    if (mu - j) % q:
        return 0.0, 0.0
    n = (nu - j) // q
    m = (mu - j) // q
    frac = j / q
    if special.lgamma_abs(1 + m + frac)[1] == 0:
        return 0.0, 0.0
    a, b = n + frac, -m - frac
    d = n - m
    sigma = -1 if q % 2 else 1  # kept general; callers restrict to odd q
    # prefactor in log space: both Gammas and Pochhammers overflow past index ~170
    log_pref = special.lgamma_abs(1 + n + frac)[0] - special.lgamma_abs(1 + m + frac)[0]
    sign = special.lgamma_abs(1 + n + frac)[1] * special.lgamma_abs(1 + m + frac)[1]
    k0 = abs(d)
    if d < 0:
        la, sa = special.log_pochhammer(a, k0)
        lb, sb = special.log_pochhammer(b, k0)
        if sa == 0 or sb == 0:
            return 0.0, 0.0
        log_pref += la + lb
        sign *= sa * sb
        a, b = a + k0, b + k0
    if k0:
        if kappa == 0.0:
            return 0.0, 0.0
        log_pref += k0 * math.log(kappa) - math.lgamma(k0 + 1)
    if log_pref < _LOG_TINY:
        return 0.0, 0.0
    pref = sign * math.exp(log_pref)
    f, err = special.hyp2f1(a, b, 1 + k0, kappa * kappa,
                            target_error=0.01 * PRECISION_TOL / abs(pref))
    parity = sigma ** (d % 2)
    return parity * pref * f, abs(pref) * err


def rho_coefficients(q: int, tau_tilde: float, truncation: int = DEFAULT_TRUNCATION) -> RhoCoefficients:
    """Full coefficient table up to index ``truncation``.

    Raises:
        SeriesRangeError: ``tanh(q tt)^2`` beyond ``1 - 1e-6``.
        SeriesConvergenceError: a series fails to converge.
    """
    kappa = _check_args(q, tau_tilde, truncation)
    kmax = truncation
    rho = np.zeros((kmax, 2 * kmax + 1))
    worst = 0.0
    for nu in range(1, kmax + 1):
        for mu in range(-kmax, kmax + 1):
            v, e = rho_entry(q, nu, mu, kappa)
            rho[nu - 1, mu + kmax] = v
            worst = max(worst, e)
    rho.setflags(write=False)
    sigma = -1 if q % 2 else 1
    return RhoCoefficients(rho, int(q), kappa, sigma, float(tau_tilde), kmax, worst)


def _unitarity_tail(alpha: np.ndarray, rows: Sequence[int]):
    # q = 1 creates no pairs, so each full row is a unit vector and the
    # missing weight follows from orthonormality
    r = len(rows)
    overlap = np.eye(r) - alpha @ alpha.T
    gram = np.zeros((2 * r, 2 * r))
    gram[0::2, 0::2] = overlap
    gram[1::2, 1::2] = overlap
    norms = np.stack([np.diag(overlap), np.zeros(r)], axis=1)
    return gram, norms, {"tail_method": "unitarity"}


def single_wall_transform(q: int, tau_tilde: float, truncation: int = DEFAULT_TRUNCATION,
                          rows: Optional[Sequence[int]] = None, tail: bool = False) -> BogoliubovTransform:
    """Bogoliubov transform of a 1D cavity with one wall driven at ``q w1``.

    ``alpha[m, n] = sqrt(m/n) rho[n, m]`` and ``beta[m, n] = -sqrt(m/n) rho[n, -m]``.

    Args:
        q: harmonic number.
        tau_tilde: single-wall slow time ``epsilon w1 t / L_x``.
        truncation: number of tracked input modes ``K``.
        rows: output modes to compute (default ``1..K``).
        tail: also compute the vacuum contribution of input modes beyond
            ``K``. Uses unitarity for ``q = 1`` and circle-map rows otherwise.

    Raises:
        SeriesRangeError, SeriesConvergenceError: from the coefficient series,
            including loss of precision beyond ``PRECISION_TOL``.
    """
    kappa = _check_args(q, tau_tilde, truncation)
    rows = list(range(1, truncation + 1)) if rows is None else [int(r) for r in rows]
    if any(r < 1 for r in rows):
        raise ValueError("row modes must be positive")
    alpha = np.zeros((len(rows), truncation))
    beta = np.zeros((len(rows), truncation))
    worst = 0.0
    for i, m in enumerate(rows):
        for n in range(1, truncation + 1):
            w = math.sqrt(m / n)
            va, ea = rho_entry(q, n, m, kappa)
            vb, eb = rho_entry(q, n, -m, kappa)
            alpha[i, n - 1] = w * va
            beta[i, n - 1] = -w * vb
            worst = max(worst, w * ea, w * eb)
    if worst > PRECISION_TOL:
        raise SeriesConvergenceError(
            f"hypergeometric series lost precision (error ~{worst:.1e}) at tt={tau_tilde}, q={q}; "
            "reduce the truncation or the requested rows"
        )
    info = {"solver": "hypergeometric", "q": int(q), "tau_tilde": float(tau_tilde),
            "kappa": kappa, "series_error": worst}
    gram = norms = None
    if tail:
        if q == 1:
            gram, norms, extra = _unitarity_tail(alpha, rows)
        else:
            gram, norms, extra = vacuum_tail(q, tau_tilde, rows, truncation)
            extra = dict(extra, tail_method="circle-map")
        info.update(extra)
    return BogoliubovTransform(alpha, beta, float(tau_tilde), tuple(str(n) for n in range(1, truncation + 1)),
                               row_modes=tuple(str(m) for m in rows), tail_gram=gram, tail_norms=norms, info=info)


def shaker_transform_1d(q: int, tau: float, truncation: int = DEFAULT_TRUNCATION,
                        rows: Optional[Sequence[int]] = None, tail: bool = False) -> BogoliubovTransform:
    """Transform of a rigidly shaken 1D cavity at shaker slow time ``tau``.

    Equal to :func:`single_wall_transform` at ``tt = 2 tau``. Even ``q``
    couples nothing and yields the identity with a warning attached.
    """
    if tau < 0:
        raise ValueError(f"tau must be nonnegative, got {tau}")
    if q % 2 == 0:
        modes = tuple(str(n) for n in range(1, truncation + 1))
        rows_ = modes if rows is None else tuple(str(r) for r in rows)
        alpha = np.array([[1.0 if r == c else 0.0 for c in modes] for r in rows_])
        return BogoliubovTransform(alpha, np.zeros_like(alpha), float(tau), modes, row_modes=rows_,
                                   warning="even harmonic: shaker evolution is trivial",
                                   info={"solver": "identity", "q": int(q)})
    t = single_wall_transform(q, 2.0 * tau, truncation, rows, tail)
    return BogoliubovTransform(t.alpha, t.beta, float(tau), t.mode_set, row_modes=t.row_modes,
                               tail_gram=t.tail_gram, tail_norms=t.tail_norms,
                               info=dict(t.info, solver="hypergeometric-shaker"))
