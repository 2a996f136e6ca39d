"""Local density of states of a mirror-terminated waveguide.

The emitter sits in the middle of a Fabry-Perot cavity of length ``L`` cut
into a waveguide.  Each mirror is seen from the emitter through the
effective reflectivity ``r_j exp(i[phi0_j + n_eff L omega / (hbar c)])``;
the guided LDOS follows from the interference of the direct emission with
all multiply reflected partial waves.

All energies are hbar*omega in ueV and lengths in um.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import NamedTuple, Sequence

import numpy as np
from scipy.optimize import least_squares

from .constants import HBAR_C, wavelength_to_energy
from .errors import FitError, PoleError, PreconditionError

POLE_TOL = 1e-12
DEFAULT_OMEGA_C = wavelength_to_energy(0.95)


@dataclass(frozen=True)
class MirrorSpec:
    """A lossless mirror; ``t`` defaults to sqrt(1 - r**2)."""

    r: float
    phi0: float = 0.0
    t: float | None = None

    def __post_init__(self):
        if not 0.0 <= self.r <= 1.0:
            raise ValueError(f"mirror reflectivity must lie in [0, 1], got {self.r}")
        if self.t is None:
            object.__setattr__(self, "t", math.sqrt(max(0.0, 1.0 - self.r**2)))
        elif abs(self.r**2 + self.t**2 - 1.0) > 1e-9:
            raise ValueError("lossless mirror requires r**2 + t**2 = 1")


@dataclass(frozen=True)
class ModeFamily:
    """A guided mode family other than the one of interest."""

    gamma0: float
    r1: float
    r2: float
    n_eff: float
    phi1: float = 0.0
    phi2: float = 0.0

    def __post_init__(self):
        if self.gamma0 < 0 or self.n_eff <= 0:
            raise ValueError("mode family needs gamma0 >= 0 and n_eff > 0")
        if not (0 <= self.r1 <= 1 and 0 <= self.r2 <= 1):
            raise ValueError("mode family reflectivities must lie in [0, 1]")


@dataclass(frozen=True)
class WaveguideCavity:
    """Geometry and bare rates of the waveguide cavity.

    ``omega_c`` is the cavity resonance; the mirror phases are referenced to
    it so that the emitter sits on a field antinode at ``omega_c``.
    """

    L: float
    n_eff: float
    gammaB0: float
    gammaRM: float = 0.0
    mirror1: MirrorSpec = field(default_factory=lambda: MirrorSpec(0.0))
    mirror2: MirrorSpec = field(default_factory=lambda: MirrorSpec(0.0))
    extra_families: tuple[ModeFamily, ...] = ()
    omega_c: float = DEFAULT_OMEGA_C

    def __post_init__(self):
        if self.L <= 0 or self.n_eff <= 0:
            raise ValueError("cavity length and effective index must be positive")
        if self.gammaB0 < 0 or self.gammaRM < 0:
            raise ValueError("bare rates must be non-negative")
        object.__setattr__(self, "extra_families", tuple(self.extra_families))

    @classmethod
    def symmetric(cls, r: float, **kwargs) -> "WaveguideCavity":
        return cls(mirror1=MirrorSpec(r), mirror2=MirrorSpec(r), **kwargs)

    @property
    def fsr(self) -> float:
        """Period of the guided LDOS in hbar*omega (ueV)."""
        return 2.0 * math.pi * HBAR_C / (self.n_eff * self.L)

    @property
    def phase_scale(self) -> float:
        """Dimensionless frequency per ueV, L n_eff / (hbar c)."""
        return self.L * self.n_eff / HBAR_C

    def phase(self, omega):
        """Propagation phase relative to the pinned resonance."""
        return self.phase_scale * (np.asarray(omega, dtype=float) - self.omega_c)

    def with_mirrors(self, r1: float, r2: float) -> "WaveguideCavity":
        return replace(self, mirror1=MirrorSpec(r1, self.mirror1.phi0),
                        mirror2=MirrorSpec(r2, self.mirror2.phi0))


@dataclass(frozen=True)
class CavityParams:
    gammaB: float
    Lc: float
    kappa: float
    g: float
    g_max: float
    kappa_max: float
    fit_residual: float = 0.0

    @property
    def kappa_tilde(self) -> float:
        return 2.0 * self.kappa / self.kappa_max


def effective_reflectivity(mirror: MirrorSpec, omega, L: float, n_eff: float):
    """r exp(i[phi0 + n_eff omega L / (hbar c)]) for absolute energies ``omega``."""
    theta = mirror.phi0 + n_eff * np.asarray(omega, dtype=float) * L / HBAR_C
    return mirror.r * np.exp(1j * theta)


def _airy_ldos(gamma0, rt1, rt2, family=None):
    den = 1.0 - rt1 * rt2
    if np.any(np.abs(den) < POLE_TOL):
        raise PoleError("lossless cavity pole: |1 - r1 r2| < 1e-12", family=family)
    return gamma0 * np.real((1.0 + rt1) * (1.0 + rt2) / den)


def _guided_reflectivities(structure: WaveguideCavity, omega):
    theta = structure.phase(omega)
    m1, m2 = structure.mirror1, structure.mirror2
    return m1.r * np.exp(1j * (m1.phi0 + theta)), m2.r * np.exp(1j * (m2.phi0 + theta))


def ldos_guided(structure: WaveguideCavity, omega):
    """Guided-mode LDOS (ueV) at energies ``omega`` (ueV)."""
    rt1, rt2 = _guided_reflectivities(structure, omega)
    return _airy_ldos(structure.gammaB0, rt1, rt2)


def ldos_radiation(structure: WaveguideCavity, omega):
    """Radiation-reservoir LDOS: radiation modes plus every other mode family."""
    omega = np.asarray(omega, dtype=float)
    total = np.full(omega.shape, float(structure.gammaRM))
    for m, fam in enumerate(structure.extra_families):
        theta = fam.n_eff * omega * structure.L / HBAR_C
        rt1 = fam.r1 * np.exp(1j * (fam.phi1 + theta))
        rt2 = fam.r2 * np.exp(1j * (fam.phi2 + theta))
        total = total + _airy_ldos(fam.gamma0, rt1, rt2, family=m)
    return total if total.ndim else float(total)


def radiation_rate(structure: WaveguideCavity, omega_X: float) -> float:
    return float(ldos_radiation(structure, omega_X))


def radiation_rate_from_beta(beta: float, gammaB0: float) -> float:
    """Radiation rate giving a mirrorless waveguide beta factor ``beta``."""
    if not 0 < beta <= 1:
        raise ValueError("beta must lie in (0, 1]")
    return gammaB0 * (1.0 - beta) / beta


def filter_function(structure: WaveguideCavity, omega):
    """Amplitude filter [1 + r1~] t2 / [1 - r1~ r2~] of the output through mirror 2."""
    rt1, rt2 = _guided_reflectivities(structure, omega)
    den = 1.0 - rt1 * rt2
    if np.any(np.abs(den) < POLE_TOL):
        raise PoleError("lossless cavity pole: |1 - r1 r2| < 1e-12")
    return (1.0 + rt1) * structure.mirror2.t / den


def limit_values(structure: WaveguideCavity) -> tuple[float, float]:
    """(g_max, kappa_max) in ueV."""
    g_max = math.sqrt(structure.gammaB0 * HBAR_C / (2.0 * structure.L * structure.n_eff))
    kappa_max = 2.0 * HBAR_C / (structure.n_eff * structure.L)
    return g_max, kappa_max


def coupling_from_weight(Lc: float, L: float, n_eff: float) -> float:
    return math.sqrt(HBAR_C * Lc / (4.0 * L * n_eff))


def lorentzian_background(w, gammaB, Lc, kt):
    return gammaB + Lc * kt / (kt * kt + w * w)


@lru_cache(maxsize=1)
def small_r_kappa_tilde() -> float:
    """Fitted width as r -> 0: best background+Lorentzian fit of cos(w) on one period.

    To first order in r the LDOS is Gamma_B0 [1 + (r1 + r2) cos w]; the width of
    the fit does not depend on the amplitude of the cosine.
    """
    w = np.linspace(-math.pi, math.pi, 4001)
    y = np.cos(w)

    def resid(p):
        return lorentzian_background(w, p[0], p[1], p[2]) - y

    sol = least_squares(resid, [-1.0, 4.0, 2.0], bounds=([-np.inf, 0, 1e-6], np.inf),
                        xtol=1e-15, ftol=1e-15, gtol=1e-15)
    return float(sol.x[2])


def decompose_ldos(structure: WaveguideCavity, n_samples: int | None = None) -> CavityParams:
    """Split the guided LDOS into a flat background and a cavity Lorentzian.

    The Lorentzian-plus-constant model is least-squares fitted to the exact
    LDOS sampled uniformly over one period centred on the cavity resonance.
    The fitted dimensionless width is converted to a linewidth in ueV and the
    Lorentzian weight to the emitter-cavity coupling.
    """
    r1, r2 = structure.mirror1.r, structure.mirror2.r
    g_max, kappa_max = limit_values(structure)
    scale = HBAR_C / (structure.L * structure.n_eff)
    if r1 >= 1.0 and r2 >= 1.0:
        raise PreconditionError("decomposition needs at least one partially transmitting mirror")
    if r1 == 0.0 and r2 == 0.0:
        return CavityParams(structure.gammaB0, 0.0, small_r_kappa_tilde() * scale, 0.0,
                            g_max, kappa_max, 0.0)

    R = r1 * r2
    kt0 = min(max((1.0 - R) / (2.0 * math.sqrt(R)), 1e-6), 2.0) if R > 0 else 2.0
    if n_samples is None:
        n_samples = max(4001, int(math.ceil(40.0 * math.pi / kt0)) | 1)
    n_samples = max(int(n_samples), 1001)
    w = np.linspace(-math.pi, math.pi, n_samples)
    omega = structure.omega_c + w * scale
    y = ldos_guided(structure, omega)

    peak = float(ldos_guided(structure, structure.omega_c))
    anti = float(ldos_guided(structure, structure.omega_c + 0.5 * math.pi * scale))
    p0 = [max(anti, 0.0), max(peak - anti, 1e-12) * kt0, kt0]

    def resid(p):
        return lorentzian_background(w, *p) - y

    sol = least_squares(resid, p0, bounds=([0.0, 0.0, 1e-9], np.inf), x_scale="jac",
                        xtol=1e-13, ftol=1e-13, gtol=1e-13, max_nfev=2000)
    if not sol.success or not np.all(np.isfinite(sol.x)):
        raise FitError(f"LDOS decomposition did not converge for r1={r1}, r2={r2}: {sol.message}")
    gammaB, Lc, kt = (float(v) for v in sol.x)
    rel = float(np.sqrt(np.mean(sol.fun**2) / np.mean(y**2)))
    return CavityParams(gammaB, Lc, kt * scale, coupling_from_weight(Lc, structure.L, structure.n_eff),
                        g_max, kappa_max, rel)


class RenormalizedRates(NamedTuple):
    gammaB0: float
    kappa: float
    beta: float


def back_mirror_renormalize(structure: WaveguideCavity) -> RenormalizedRates:
    """Rates for a perfect back mirror with the emitter on an antinode.

    The front mirror of reflectivity r is treated through the symmetric
    cavity (r, r): the bare guided rate doubles, the linewidth halves and the
    mirrorless beta factor becomes 2 beta / (beta + 1).
    """
    if structure.mirror1.r != 1.0:
        raise PreconditionError("back-mirror renormalisation needs mirror1.r == 1")
    sym = decompose_ldos(structure.with_mirrors(structure.mirror2.r, structure.mirror2.r))
    gR = radiation_rate(structure, structure.omega_c)
    beta = structure.gammaB0 / (structure.gammaB0 + gR) if structure.gammaB0 + gR > 0 else 1.0
    return RenormalizedRates(2.0 * structure.gammaB0, 0.5 * sym.kappa, 2.0 * beta / (beta + 1.0))


def back_mirror_params(structure: WaveguideCavity) -> CavityParams:
    """Full effective parameter set for the perfect-back-mirror geometry.

    Relative to the symmetric (r, r) cavity the background doubles, the width
    halves and the Lorentzian weight (hence g) is unchanged: the peak height
    doubles while the linewidth halves.
    """
    if structure.mirror1.r != 1.0:
        raise PreconditionError("back-mirror renormalisation needs mirror1.r == 1")
    r = structure.mirror2.r
    sym = decompose_ldos(structure.with_mirrors(r, r))
    return CavityParams(2.0 * sym.gammaB, sym.Lc, 0.5 * sym.kappa, sym.g, sym.g_max,
                        0.5 * sym.kappa_max, sym.fit_residual)


def beta_star(beta: float) -> float:
    return 2.0 * beta / (beta + 1.0)


def sweep_params(structure: WaveguideCavity, r_values: Sequence[float]) -> list[CavityParams]:
    """Symmetric-cavity decomposition over a list of reflectivities."""
    return [decompose_ldos(structure.with_mirrors(r, r)) for r in r_values]
