"""Indistinguishability, efficiency and the phonon-sideband filter fraction.

Numeric figures come from two-colour spectra; analytic ones from the
weak-coupling closed forms in terms of Gamma_B, the Purcell rate
Gamma_cav = 4 g^2 / kappa, the radiation rate, B and the filter fraction F.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .constants import HBAR
from .errors import DegenerateError
from .phonons import PhononCorrelation, PhononEnvironment, phonon_correlation_table, psb_lineshape
from .photonic import WaveguideCavity, filter_function
from .spectra import TwoColourSpectrum, filter_intensity, power_guided, trapezoid_weights

RANGE_TOL = 1e-6
# numeric I may overshoot 1 by quadrature noise of this size before it is an error
I_CLAMP_TOL = 1e-3


@dataclass(frozen=True)
class FigureOfMerit:
    I: float
    E: float
    P_B: float
    P_R: float
    F: float
    method: str = "numeric"

    def __post_init__(self):
        if not -RANGE_TOL <= self.I <= 1 + RANGE_TOL:
            raise ValueError(f"indistinguishability {self.I} outside [0, 1]")
        if not 0 <= self.E <= 1 + RANGE_TOL:
            raise ValueError(f"efficiency {self.E} outside [0, 1]")
        if self.method not in ("numeric", "analytic"):
            raise ValueError("method must be 'numeric' or 'analytic'")


class Rates(NamedTuple):
    """Rates entering the analytic formulas (ueV)."""

    gammaB: float
    gamma_cav: float
    gammaR: float
    gammaB0: float

    @property
    def total(self) -> float:
        return self.gamma_cav + self.gammaB + self.gammaR


def purcell_rate(g: float, kappa: float) -> float:
    """Resonant weak-coupling Purcell rate 4 g^2 / kappa."""
    if kappa == 0:
        raise DegenerateError("Purcell rate needs kappa > 0")
    return 4.0 * g * g / kappa


def _clamp_unit(x: float, tol: float) -> float:
    if x < 0:
        return 0.0
    if 1.0 < x <= 1.0 + tol:
        return 1.0
    return x


def indistinguishability_numeric(S: TwoColourSpectrum, structure: WaveguideCavity) -> float:
    """I = [2 P_B / Gamma_B0]^-2 int int |G*(w) G(w') S(w, w')|^2 dw dw'.

    With rates in ueV and the measure d(omega) / (2 pi hbar) the prefactor is
    [2 P_B hbar / Gamma_B0]^-2.
    """
    P_B = power_guided(S, structure)
    if P_B <= 0:
        raise DegenerateError("no emission into the guided mode (P_B = 0)")
    norm = 2.0 * P_B * HBAR / structure.gammaB0
    I = S.filtered_overlap(filter_intensity(structure)) / norm**2
    return _clamp_unit(I, I_CLAMP_TOL)


def efficiency_numeric(P_B: float, P_R: float) -> float:
    if P_B + P_R <= 0:
        raise DegenerateError("no emitted power")
    return P_B / (P_B + P_R)


def psb_filter_fraction(S_psb: TwoColourSpectrum, structure: WaveguideCavity) -> float:
    """F = (1/4) int |G|^2 S_PSB(w, w) dw / int S_PSB(w, w) dw; 0 for an empty sideband."""
    total = S_psb.diagonal_integral("psb")
    if abs(total) < 1e-14 * max(abs(S_psb.diagonal_integral("total")), 1e-300) or total == 0:
        return 0.0
    G2 = filter_intensity(structure)(S_psb.diag_omega)
    return 0.25 * S_psb.diagonal_integral("psb", weight=G2) / total


def psb_filter_fraction_lineshape(env: PhononEnvironment, structure: WaveguideCavity,
                                  table: PhononCorrelation | None = None, omega_X: float | None = None,
                                  half_width: float = 2.0e4, n: int = 8001) -> float:
    """F from the sideband of a non-decaying emitter; used by the analytic route."""
    if env.alpha == 0:
        return 0.0
    if table is None:
        table = phonon_correlation_table(env)
    if omega_X is None:
        omega_X = structure.omega_c
    d = np.linspace(-half_width, half_width, n)
    s = psb_lineshape(env, d, table)
    w = trapezoid_weights(d)
    G2 = np.abs(filter_function(structure, omega_X + d)) ** 2
    return 0.25 * float(np.dot(w, G2 * s) / np.dot(w, s))


def _zpl_fraction(rates: Rates, B: float, F: float) -> tuple[float, float]:
    zpl = (rates.gammaB + rates.gamma_cav) * B * B
    psb = 2.0 * rates.gammaB0 * F * (1.0 - B * B)
    return zpl, psb


def indistinguishability_analytic(rates: Rates, B: float, F: float, gamma_tot: float) -> float:
    """Gamma_tot/(Gamma_tot + 2 gamma_tot) * [(G_B + G_cav) B^2 / ((G_B + G_cav) B^2 + 2 G_B0 F (1 - B^2))]^2."""
    zpl, psb = _zpl_fraction(rates, B, F)
    if rates.total + 2.0 * gamma_tot <= 0 or zpl + psb <= 0:
        raise DegenerateError("degenerate rates in the analytic indistinguishability")
    return rates.total / (rates.total + 2.0 * gamma_tot) * (zpl / (zpl + psb)) ** 2


def efficiency_analytic(rates: Rates, B: float, F: float) -> float:
    """[(G_cav + G_B) B^2 + 2 G_B0 F (1 - B^2)] / [same + G_R]."""
    zpl, psb = _zpl_fraction(rates, B, F)
    if zpl + psb + rates.gammaR <= 0:
        raise DegenerateError("degenerate rates in the analytic efficiency")
    return (zpl + psb) / (zpl + psb + rates.gammaR)
