"""Longitudinal-acoustic phonon bath in the independent-boson picture.

The bath enters only through the super-Ohmic spectral density
``J(nu) = alpha nu^3 exp(-nu^2 / nu_c^2)``.  From it follow the
Franck-Condon factor ``B``, the phonon correlation function ``phi(t)``
(with ``exp(-phi(0)) = B^2``) and the sideband correlator
``B^2 (exp(phi(t)) - 1)`` whose transform is the phonon sideband.

Units: ``alpha`` in ps^2, ``nu`` in rad/ps, ``t`` in ps, ``T`` in K.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import CubicSpline

from .constants import HBAR, K_B
from .errors import DegenerateError, QuadratureError, RangeError

QUAD_RTOL = 1e-8
CUTOFF_FACTOR = 8.0


@dataclass(frozen=True)
class PhononEnvironment:
    alpha: float
    nu_c: float
    T: float
    gamma_pd: float = 0.0

    def __post_init__(self):
        if self.alpha < 0 or self.nu_c <= 0 or self.T < 0 or self.gamma_pd < 0:
            raise ValueError("need alpha >= 0, nu_c > 0, T >= 0, gamma_pd >= 0")

    @property
    def kT(self) -> float:
        """k_B T / hbar in rad/ps."""
        return K_B * self.T / HBAR

    @property
    def nu_max(self) -> float:
        return CUTOFF_FACTOR * self.nu_c


def spectral_density(env: PhononEnvironment, nu):
    nu = np.asarray(nu, dtype=float)
    out = env.alpha * nu**3 * np.exp(-(nu / env.nu_c) ** 2)
    return out if out.ndim else float(out)


def _nu_coth(nu, kT):
    """nu * coth(nu / 2kT), finite at nu = 0 and exact at T = 0."""
    nu = np.asarray(nu, dtype=float)
    if kT == 0.0:
        return np.abs(nu)
    with np.errstate(over="ignore"):
        x = nu / (2.0 * kT)
    small = np.abs(x) < 1e-6
    xs = np.where(small, 1.0, x)
    with np.errstate(over="ignore"):
        return np.where(small, 2.0 * kT * (1.0 + x * x / 3.0), nu / np.tanh(xs))


def _reorganisation_integrand(nu, env):
    # J(nu)/nu^2 * coth(nu/2kT) with the nu^2 cancelled analytically
    return env.alpha * np.exp(-(nu / env.nu_c) ** 2) * _nu_coth(nu, env.kT)


def _tail_bound(env: PhononEnvironment) -> float:
    """Bound on the integral of J coth / nu^2 beyond the cutoff CUTOFF_FACTOR * nu_c."""
    a = env.nu_max
    coth = 1.0 if env.kT == 0 else 1.0 / math.tanh(a / (2.0 * env.kT))
    return env.alpha * coth * 0.5 * env.nu_c**2 * math.exp(-(a / env.nu_c) ** 2)


def franck_condon(env: PhononEnvironment) -> float:
    """Thermal Franck-Condon factor B = exp(-1/2 int J(nu)/nu^2 coth(nu/2kT) dnu)."""
    if env.alpha == 0.0:
        return 1.0
    val, err = quad(_reorganisation_integrand, 0.0, env.nu_max, args=(env,),
                    epsabs=0.0, epsrel=1e-11, limit=200)
    if err > QUAD_RTOL * abs(val):
        raise QuadratureError(f"Franck-Condon integral error {err:.2e} exceeds tolerance")
    return math.exp(-0.5 * (val + _tail_bound(env)))


def calibrate_alpha(B4: float, nu_c: float, T: float) -> float:
    """Coupling alpha giving B**4 == ``B4`` at fixed cutoff and temperature.

    The exponent of B is linear in alpha, so this is a single quadrature.
    """
    unit = PhononEnvironment(1.0, nu_c, T)
    val, err = quad(_reorganisation_integrand, 0.0, unit.nu_max, args=(unit,),
                    epsabs=0.0, epsrel=1e-12, limit=200)
    return -math.log(B4) / (2.0 * (val + _tail_bound(unit)))


def _gauss_nodes(env: PhononEnvironment, n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    nu = 0.5 * env.nu_max * (x + 1.0)
    return nu, 0.5 * env.nu_max * w


def _phi_gauss(env: PhononEnvironment, t, n: int):
    nu, w = _gauss_nodes(env, n)
    amp = env.alpha * np.exp(-(nu / env.nu_c) ** 2)
    re_w = w * amp * _nu_coth(nu, env.kT)
    im_w = w * amp * nu
    ph = np.outer(np.atleast_1d(t), nu)
    return np.cos(ph) @ re_w - 1j * (np.sin(ph) @ im_w)


def phonon_correlation(env: PhononEnvironment, t):
    """phi(t) = int J/nu^2 [coth(nu/2kT) cos(nu t) - i sin(nu t)] dnu.

    Evaluated by Gauss-Legendre quadrature on [0, 8 nu_c]; the node count is
    doubled until successive results agree to 1e-8 relative to phi(0).
    """
    t = np.asarray(t, dtype=float)
    flat = np.atleast_1d(t).ravel()
    if env.alpha == 0.0:
        out = np.zeros(flat.shape, dtype=complex)
        return out.reshape(t.shape) if t.ndim else complex(out[0])
    tmax = float(np.max(np.abs(flat))) if flat.size else 0.0
    n = int(64 + 2.0 * env.nu_max * tmax / math.pi)
    ref = abs(complex(_phi_gauss(env, 0.0, 64)[0]))
    prev = _phi_gauss(env, flat, n)
    for _ in range(8):
        n *= 2
        cur = _phi_gauss(env, flat, n)
        if np.max(np.abs(cur - prev)) <= QUAD_RTOL * ref:
            break
        prev = cur
    else:
        raise QuadratureError("phonon correlation quadrature did not converge")
    return cur.reshape(t.shape) if t.ndim else complex(cur[0])


def phonon_correlation_quad(env: PhononEnvironment, t: float) -> complex:
    """Single-point phi(t) by adaptive oscillatory quadrature (independent route)."""
    if env.alpha == 0.0:
        return 0j
    f = lambda nu: _reorganisation_integrand(nu, env)
    g = lambda nu: env.alpha * nu * math.exp(-(nu / env.nu_c) ** 2)
    if t == 0.0:
        re, err_re = quad(f, 0.0, env.nu_max, epsabs=0.0, epsrel=1e-11, limit=400)
        im, err_im = 0.0, 0.0
    else:
        re, err_re = quad(f, 0.0, env.nu_max, weight="cos", wvar=t, epsabs=1e-14, epsrel=1e-12, limit=800)
        im, err_im = quad(g, 0.0, env.nu_max, weight="sin", wvar=t, epsabs=1e-14, epsrel=1e-12, limit=800)
    scale = env.alpha * env.nu_c**2
    if max(err_re, err_im) > QUAD_RTOL * scale:
        raise QuadratureError(f"phi({t}) quadrature error {max(err_re, err_im):.2e}")
    return complex(re, -im)


def sideband_correlator(env: PhononEnvironment, t, B: float | None = None):
    """B^2 (exp(phi(t)) - 1); its transform is the phonon sideband."""
    if B is None:
        B = franck_condon(env)
    return B * B * np.expm1(phonon_correlation(env, t))


@dataclass(frozen=True)
class PhononCorrelation:
    """phi(t) tabulated on t >= 0; negative times follow from phi(-t) = phi(t)*."""

    t: np.ndarray
    values: np.ndarray
    B: float

    @property
    def t_max(self) -> float:
        return float(self.t[-1])

    @property
    def decayed(self) -> bool:
        """True if phi is negligible (< 1e-8 of phi(0)) over the last tenth of the table."""
        tail = self.values[int(0.9 * len(self.values)):]
        return bool(np.max(np.abs(tail)) <= 1e-8 * max(abs(self.values[0]), 1e-300))

    def __call__(self, tau):
        tau = np.asarray(tau, dtype=float)
        a = np.abs(tau)
        out = np.zeros(tau.shape, dtype=complex)
        inside = a <= self.t_max
        if np.any(~inside) and not self.decayed:
            raise RangeError(f"|t - t'| up to {a.max():.3g} ps exceeds phonon table range {self.t_max:.3g} ps")
        if np.any(inside):
            re = CubicSpline(self.t, self.values.real)(a[inside])
            im = CubicSpline(self.t, self.values.imag)(a[inside])
            out[inside] = re + 1j * np.sign(tau[inside]) * im
        return out


def phonon_correlation_table(env: PhononEnvironment, t_max: float | None = None,
                             dt: float | None = None, tol: float = 1e-9) -> PhononCorrelation:
    """Tabulate phi(t) on [0, t_max].

    Without ``t_max`` the table extends until |phi| stays below ``tol`` times
    phi(0) (at most 400 ps).
    """
    B = franck_condon(env)
    if dt is None:
        dt = min(0.02, 0.1 / env.nu_c)
    if env.alpha == 0.0:
        t = np.arange(0.0, (t_max or 1.0) + 0.5 * dt, dt)
        return PhononCorrelation(t, np.zeros(t.shape, complex), 1.0)
    if t_max is None:
        span = 40.0 / env.nu_c
        while True:
            t = np.arange(0.0, span + 0.5 * dt, dt)
            vals = phonon_correlation(env, t)
            mag = np.abs(vals)
            above = np.nonzero(mag > tol * mag[0])[0]
            last = above[-1] if above.size else 0
            if last < 0.8 * len(t) or span >= 400.0:
                end = min(len(t), int(1.25 * (last + 1)) + 2)
                return PhononCorrelation(t[:end], vals[:end], B)
            span *= 2.0
    t = np.arange(0.0, t_max + 0.5 * dt, dt)
    return PhononCorrelation(t, phonon_correlation(env, t), B)


def psb_lineshape(env: PhononEnvironment, delta, table: PhononCorrelation | None = None):
    """Phonon sideband of an ideal (non-decaying) emitter versus detuning (ueV).

    Returns the Fourier transform of the sideband correlator in ps, with
    sign convention such that phonon emission appears at negative detuning;
    integrated with measure d(delta) / (2 pi hbar) it gives 1 - B^2.
    """
    if table is None:
        table = phonon_correlation_table(env)
    delta = np.asarray(delta, dtype=float)
    w = np.full(table.t.shape, table.t[1] - table.t[0])
    w[0] *= 0.5
    w[-1] *= 0.5
    k = table.B**2 * np.expm1(table.values) * w
    out = 2.0 * np.real(np.exp(-1j * np.outer(delta / HBAR, table.t)) @ k)
    return out


def enhanced_dephasing(env: PhononEnvironment, g: float, kappa: float, B: float) -> float:
    """gamma + 2 pi (gB/kappa)^2 J(2gB) coth(gB / k_B T), all rates in ueV."""
    if kappa == 0:
        raise DegenerateError("enhanced dephasing needs kappa > 0")
    gB = g * B
    if gB == 0.0 or env.alpha == 0.0:
        return env.gamma_pd
    J = HBAR * spectral_density(env, 2.0 * gB / HBAR)
    coth = 1.0 if K_B * env.T == 0 else 1.0 / math.tanh(gB / (K_B * env.T))
    return env.gamma_pd + 2.0 * math.pi * (gB / kappa) ** 2 * J * coth
