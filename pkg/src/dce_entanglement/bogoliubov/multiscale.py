"""Fixed-step RK4 integration of the averaged (multiple-scale) mode equations.

Mode-function coefficients ``A[n, k]`` and ``B[n, k]`` evolve in slow time as

    A[n, k]' = sum_j c_kj [ (w_j - W/2) d(w_j - w_k - W) + (w_j + W/2) d(w_k - w_j - W) ] A[n, j]
             + sum_j c_kj (W/2 - w_j) d(W - w_j - w_k) B[n, j]

and the same with ``A`` and ``B`` exchanged. Here
``c_kj = W g_kj / (w1 sqrt(w_k w_j))`` and ``d`` is a tolerance-gated
Kronecker delta. The single-wall system adds ``-(w_k / w1) B`` to ``A'``
(and vice versa) for the mode with ``2 w_k = W``. The operator
coefficients are the transposes: ``alpha = A^T``, ``beta = B^T``.
"""
from __future__ import annotations

import enum
import math
from typing import Sequence

import numpy as np

from ..cavity import (CavityGeometry, DriveConfig, DEFAULT_RESONANCE_RTOL, as_mode, mode_frequency,
                      shaker_coupling, single_wall_coupling)
from ..errors import DimensionalityError, SymplecticDefectError
from .transform import BogoliubovTransform

DEFAULT_STEP = 1e-3
DEFAULT_DEFECT_BOUND = 1e-6
CHECK_EVERY = 100


class MultiscaleSystem(enum.Enum):
    THREE_D = "ThreeD"
    ONE_D_SHAKER = "OneDShaker"
    ONE_D_SINGLE_WALL = "OneDSingleWall"


def multiscale_generator(system, geom: CavityGeometry, drive: DriveConfig, modes: Sequence,
                         tol: float = None) -> np.ndarray:
    """Real ``2K x 2K`` generator ``M`` with ``d[A B]/dtau = [A B] M^T``."""
    system = MultiscaleSystem(system)
    modes = [as_mode(m) for m in modes]
    if system is MultiscaleSystem.THREE_D and geom.is_1d:
        raise DimensionalityError("ThreeD system needs a 3D cavity")
    if system is not MultiscaleSystem.THREE_D and not geom.is_1d:
        raise DimensionalityError(f"{system.value} system needs a 1D cavity")
    w1 = geom.omega1
    big_w = drive.omega_drive
    if tol is None:
        tol = DEFAULT_RESONANCE_RTOL * w1
    w = np.array([mode_frequency(geom, m) for m in modes])
    k = len(modes)
    gen = np.zeros((2 * k, 2 * k))
    for a, ma in enumerate(modes):
        for b, mb in enumerate(modes):
            if ma.transverse != mb.transverse:
                continue
            if system is MultiscaleSystem.ONE_D_SINGLE_WALL:
                g = single_wall_coupling(ma.x, mb.x)
            else:
                g = shaker_coupling(ma.x, mb.x)
            if g == 0.0:
                continue
            c = big_w * g / (w1 * math.sqrt(w[a] * w[b]))
            exchange = 0.0
            if abs(w[b] - w[a] - big_w) < tol:
                exchange += c * (w[b] - big_w / 2)
            if abs(w[a] - w[b] - big_w) < tol:
                exchange += c * (w[b] + big_w / 2)
            gen[a, b] += exchange
            gen[k + a, k + b] += exchange
            if abs(big_w - w[a] - w[b]) < tol:
                gen[a, k + b] += c * (big_w / 2 - w[b])
                gen[k + a, b] += c * (big_w / 2 - w[b])
    if system is MultiscaleSystem.ONE_D_SINGLE_WALL:
        for a in range(k):
            if abs(2 * w[a] - big_w) < tol:
                gen[a, k + a] -= w[a] / w1
                gen[k + a, a] -= w[a] / w1
    return gen


def _row_defect(state: np.ndarray, k: int) -> float:
    a, b = state[:, :k], state[:, k:]
    return float(np.max(np.abs(np.sum(a * a - b * b, axis=1) - 1.0)))


def integrate_multiscale(system, geom: CavityGeometry, drive: DriveConfig, modes: Sequence,
                         tau_end: float, step: float = DEFAULT_STEP, defect_bound: float = DEFAULT_DEFECT_BOUND,
                         tol: float = None) -> BogoliubovTransform:
    """Integrate the averaged equations for all rows at once with classical RK4.

    ``tau_end`` is in the system's own slow time. That is the shaker
    ``tau`` for ``ThreeD`` and ``OneDShaker``, and ``tt = 2 tau`` for
    ``OneDSingleWall``. The uniform step is the largest value ``<= step``
    that lands exactly on ``tau_end``.

    Raises:
        SymplecticDefectError: row defect above ``defect_bound`` at a check.
    """
    if not step > 0:
        raise ValueError("step must be positive")
    if tau_end < 0:
        raise ValueError("tau_end must be nonnegative")
    modes = [as_mode(m) for m in modes]
    labels = tuple(m.label for m in modes)
    gen = multiscale_generator(system, geom, drive, modes, tol)
    k = len(modes)
    info = {"solver": "rk4", "system": MultiscaleSystem(system).value, "step": step}
    if not gen.any() or tau_end == 0:
        return BogoliubovTransform.identity(labels, float(tau_end), info=dict(info, steps=0, defect=0.0))
    n_steps = max(1, math.ceil(tau_end / step - 1e-12))
    h = tau_end / n_steps
    gt = gen.T.copy()
    state = np.hstack([np.eye(k), np.zeros((k, k))])
    worst = 0.0
    for i in range(1, n_steps + 1):
        k1 = state @ gt
        k2 = (state + 0.5 * h * k1) @ gt
        k3 = (state + 0.5 * h * k2) @ gt
        k4 = (state + h * k3) @ gt
        state = state + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if i % CHECK_EVERY == 0 or i == n_steps:
            worst = max(worst, _row_defect(state, k))
            if worst > defect_bound:
                raise SymplecticDefectError(
                    f"row defect {worst:.2e} exceeds {defect_bound:.1e} at step {i}; reduce the step"
                )
    alpha = state[:, :k].T
    beta = state[:, k:].T
    return BogoliubovTransform(alpha, beta, float(tau_end), labels,
                               info=dict(info, steps=n_steps, defect=worst))
