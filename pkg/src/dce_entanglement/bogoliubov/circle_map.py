"""Full Bogoliubov rows of the 1D harmonic solution via a circle map.

For harmonic number ``q`` at slow time ``tt`` the output mode ``n`` has

    alpha[n, k] = sqrt(k / n) Re c_n(k),    beta[n, k] = sqrt(k / n) Re c_n(-k),

where ``c_n(k)`` are the Fourier coefficients of ``exp(i n phi(theta))`` and

    phi(theta) = theta + [arg(1 + a e^{-i q theta}) - arg(1 + a e^{i q theta})] / q,
    a = -(-1)^q tanh(q tt).

These are the same coefficients as the hypergeometric closed form, but
the FFT produces every input mode at once. That is what the vacuum tail
beyond a finite truncation needs.
"""
from __future__ import annotations

import numpy as np

from ..errors import SeriesRangeError

ALIAS_TOL = 1e-14
MAX_FFT_SIZE = 2 ** 24


def _initial_size(n_max: int, a: float) -> int:
    # instantaneous harmonic number of exp(i n phi) peaks at n (1+|a|)/(1-|a|)
    spread = 4.0 * (n_max + 2) * (1.0 + abs(a)) / (1.0 - abs(a)) + 256.0
    return int(2 ** np.ceil(np.log2(spread)))


def fourier_rows(q: int, tau_tilde: float, rows, n_fft: int = None):
    """Rows of alpha and beta over input modes ``1..M`` for output modes ``rows``.

    Args:
        q: harmonic number.
        tau_tilde: single-wall slow time.
        rows: output mode numbers.
        n_fft: FFT size; chosen adaptively when omitted.

    Returns:
        ``(alpha, beta, alias)`` with arrays of shape ``(len(rows), M)``
        and the largest Fourier magnitude near the Nyquist band.
    """
    rows = [int(r) for r in rows]
    kappa = np.tanh(q * tau_tilde)
    a = -((-1) ** q) * kappa
    if abs(a) >= 1.0:
        raise SeriesRangeError("kappa reached 1; slow time too large")
    size = n_fft or _initial_size(max(rows), a)
    while True:
        theta = 2.0 * np.pi * np.arange(size) / size
        w = np.exp(1j * q * theta)
        phi = theta + (np.angle(1.0 + a * np.conj(w)) - np.angle(1.0 + a * w)) / q
        k = np.arange(1, size // 2)
        alpha = np.empty((len(rows), k.size))
        beta = np.empty((len(rows), k.size))
        alias = 0.0
        for i, n in enumerate(rows):
            c = np.fft.fft(np.exp(1j * n * phi)) / size
            band = np.abs(c[size // 2 - size // 16: size // 2 + size // 16])
            alias = max(alias, float(band.max()))
            weight = np.sqrt(k / n)
            alpha[i] = weight * c[k].real
            beta[i] = weight * c[size - k].real
        if alias < ALIAS_TOL or n_fft is not None:
            return alpha, beta, alias
        if size >= MAX_FFT_SIZE:
            raise SeriesRangeError(f"circle-map rows need more than {MAX_FFT_SIZE} samples at tt={tau_tilde}")
        size *= 2


def vacuum_tail(q: int, tau_tilde: float, rows, truncation: int):
    """Gram matrix and norms of the input modes beyond ``truncation``.

    Returns:
        ``(gram, norms, info)``: ``gram`` is ``2R x 2R`` on interleaved
        quadratures, ``norms[:, 0]`` and ``norms[:, 1]`` are the tail sums of
        ``alpha^2`` and ``beta^2``, and ``info`` carries FFT diagnostics.
    """
    alpha, beta, alias = fourier_rows(q, tau_tilde, rows)
    ta, tb = alpha[:, truncation:], beta[:, truncation:]
    x, y = ta + tb, ta - tb
    r = len(rows)
    gram = np.zeros((2 * r, 2 * r))
    gram[0::2, 0::2] = x @ x.T
    gram[1::2, 1::2] = y @ y.T
    norms = np.stack([np.sum(ta ** 2, axis=1), np.sum(tb ** 2, axis=1)], axis=1)
    info = {
        "fft_size": 2 * (alpha.shape[1] + 1),
        "alias": alias,
        "full_row_defect": float(np.max(np.abs(np.sum(alpha ** 2 - beta ** 2, axis=1) - 1.0))),
    }
    return gram, norms, info
