"""Bogoliubov coefficients from analytic and numerical solvers."""
from .transform import (BogoliubovTransform, TwoModeRates, two_mode_rates, two_mode_sum_transform,
                        two_mode_difference_transform)
from .hypergeometric import (RhoCoefficients, rho_coefficients, rho_entry, single_wall_transform,
                             shaker_transform_1d, DEFAULT_TRUNCATION, KAPPA_SQ_MAX)
from .circle_map import fourier_rows, vacuum_tail
from .multiscale import MultiscaleSystem, integrate_multiscale, multiscale_generator

__all__ = [
    "BogoliubovTransform", "TwoModeRates", "two_mode_rates", "two_mode_sum_transform",
    "two_mode_difference_transform", "RhoCoefficients", "rho_coefficients", "rho_entry",
    "single_wall_transform", "shaker_transform_1d", "DEFAULT_TRUNCATION", "KAPPA_SQ_MAX",
    "fourier_rows", "vacuum_tail", "MultiscaleSystem", "integrate_multiscale", "multiscale_generator",
]
