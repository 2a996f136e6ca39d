"""Parameter point to figures of merit: decompose, renormalise, evolve, transform."""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dynamics import RegressionModel, SystemConfig, basis_state, build_generator
from .errors import NumericalError, PreconditionError
from .merit import (FigureOfMerit, Rates, efficiency_analytic, efficiency_numeric,
                    indistinguishability_analytic, indistinguishability_numeric,
                    psb_filter_fraction, psb_filter_fraction_lineshape, purcell_rate)
from .phonons import PhononCorrelation, PhononEnvironment, enhanced_dephasing, phonon_correlation_table
from .photonic import CavityParams, WaveguideCavity, back_mirror_params, radiation_rate
from .spectra import TwoColourSpectrum, decompose_spectrum, power_guided, power_radiation, spectrum_from_model

METHODS = ("numeric", "analytic", "both")


@dataclass(frozen=True)
class PointResult:
    r2: float
    T: float
    params: CavityParams | None
    gamma_tot: float = math.nan
    numeric: FigureOfMerit | None = None
    analytic: FigureOfMerit | None = None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


def mode_parameters(params: CavityParams) -> tuple[float, float]:
    """(g, kappa) of the lossy mode whose emitter LDOS equals the fitted Lorentzian.

    A mode with coupling g' and energy decay kappa' adds
    g'^2 kappa' / ((kappa'/2)^2 + delta^2) to the emitter LDOS.  The fitted
    Lorentzian has half-width kappa and peak 4 g^2 / kappa, hence
    kappa' = 2 kappa and g' = sqrt(2) g (same Purcell rate, same width).
    """
    return math.sqrt(2.0) * params.g, 2.0 * params.kappa


def system_config(structure: WaveguideCavity, params: CavityParams, env: PhononEnvironment,
                  B: float, n_max: int = 2) -> SystemConfig:
    """Resonant emitter in the renormalised (back-mirror) cavity."""
    gamma_tot = enhanced_dephasing(env, params.g, params.kappa, B)
    g_mode, kappa_mode = mode_parameters(params)
    return SystemConfig(omega_X=structure.omega_c, detuning=0.0, g=g_mode, kappa=kappa_mode,
                        gammaB=params.gammaB, gammaR=radiation_rate(structure, structure.omega_c),
                        gamma_tot_pd=gamma_tot, B=B, n_max=n_max)


def numeric_spectrum(structure: WaveguideCavity, config: SystemConfig,
                     table: PhononCorrelation | None) -> TwoColourSpectrum:
    gen = build_generator(config)
    model = RegressionModel.from_generator(gen, basis_state(config.n_max, True))
    return spectrum_from_model(model, phonons=table, filter_width=config.kappa, fsr=structure.fsr)



def numeric_fom(S: TwoColourSpectrum, structure: WaveguideCavity, gammaR: float) -> FigureOfMerit:
    P_B = power_guided(S, structure)
    P_R = power_radiation(S, gammaR)
    _, S_psb = decompose_spectrum(S)
    F = psb_filter_fraction(S_psb, structure)
    return FigureOfMerit(indistinguishability_numeric(S, structure), efficiency_numeric(P_B, P_R),
                         P_B, P_R, F, "numeric")


def analytic_fom(structure: WaveguideCavity, config: SystemConfig, env: PhononEnvironment,
                 table: PhononCorrelation | None) -> FigureOfMerit:
    # 4 g^2 / kappa is the same for the fitted and the mode parameters
    rates = Rates(config.gammaB, purcell_rate(config.g, config.kappa), config.gammaR, structure.gammaB0)
    F = psb_filter_fraction_lineshape(env, structure, table) if env.alpha > 0 else 0.0
    I = indistinguishability_analytic(rates, config.B, F, config.gamma_tot_pd)
    E = efficiency_analytic(rates, config.B, F)
    # photon yields implied by the same rate balance
    B2 = config.B**2
    emitted = (rates.gammaB + rates.gamma_cav) * B2 + 2.0 * rates.gammaB0 * F * (1.0 - B2)
    total = rates.gammaB + rates.gamma_cav * B2 + rates.gammaR
    return FigureOfMerit(I, E, emitted / total, rates.gammaR / total, F, "analytic")


def fom_point(structure: WaveguideCavity, env: PhononEnvironment, method: str = "both",
              n_max: int = 2, table: PhononCorrelation | None = None) -> PointResult:
    """Figures of merit for a perfect back mirror and output mirror ``structure.mirror2``."""
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}")
    if structure.mirror1.r != 1.0:
        raise PreconditionError("figure-of-merit sweeps need a perfect back mirror (r1 = 1)")
    r2 = structure.mirror2.r
    T = 1.0 - r2 * r2
    if table is None and env.alpha > 0:
        table = phonon_correlation_table(env)
    B = table.B if table is not None else 1.0
    params = back_mirror_params(structure)
    config = system_config(structure, params, env, B, n_max)
    numeric = analytic = None
    if method in ("numeric", "both"):
        S = numeric_spectrum(structure, config, table)
        numeric = numeric_fom(S, structure, config.gammaR)
    if method in ("analytic", "both"):
        analytic = analytic_fom(structure, config, env, table)
    return PointResult(r2, T, params, config.gamma_tot_pd, numeric, analytic)


def _point_task(args) -> PointResult:
    structure, env, method, n_max, table = args
    r2 = structure.mirror2.r
    try:
        return fom_point(structure, env, method, n_max, table)
    except (NumericalError, PreconditionError, ValueError) as exc:
        return PointResult(r2, 1.0 - r2 * r2, None, error=f"{type(exc).__name__}: {exc}")


def transmission_grid(n: int = 60, T_min: float = 1e-3, T_max: float = 1.0) -> np.ndarray:
    """Default sweep axis: n log-spaced points of T = 1 - r2^2."""
    return np.logspace(math.log10(T_min), math.log10(T_max), n)


def fom_points(structures: Sequence[WaveguideCavity], env: PhononEnvironment, method: str = "both",
               n_max: int = 2, workers: int = 1) -> list[PointResult]:
    """Evaluate a list of structures; failures are recorded per point.

    Results are returned in input order whatever the number of workers.
    """
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}")
    table = phonon_correlation_table(env) if env.alpha > 0 else None
    tasks = [(s, env, method, n_max, table) for s in structures]
    if workers <= 1 or len(tasks) <= 1:
        return [_point_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as pool:
        return list(pool.map(_point_task, tasks))


def fom_sweep(structure: WaveguideCavity, env: PhononEnvironment, T_values: Sequence[float],
              method: str = "both", n_max: int = 2, workers: int = 1) -> list[PointResult]:
    """Sweep the output-mirror transmission T = 1 - r2^2 with a perfect back mirror."""
    structures = [structure.with_mirrors(1.0, math.sqrt(max(0.0, 1.0 - float(T)))) for T in T_values]
    return fom_points(structures, env, method, n_max, workers)
