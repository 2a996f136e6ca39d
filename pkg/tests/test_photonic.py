import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wgcqed.constants import HBAR_C
from wgcqed.errors import PoleError, PreconditionError
from wgcqed.photonic import (MirrorSpec, ModeFamily, WaveguideCavity, back_mirror_params,
                             back_mirror_renormalize, beta_star, decompose_ldos, effective_reflectivity,
                             filter_function, ldos_guided, ldos_radiation, limit_values,
                             radiation_rate, radiation_rate_from_beta, sweep_params)

from oracles import dense_ldos_fit

refl = st.floats(0.0, 0.99)


def cavity(r1, r2, L=1.0, gammaB0=0.3, **kw):
    return WaveguideCavity(L, 2.5, gammaB0, mirror1=MirrorSpec(r1), mirror2=MirrorSpec(r2), **kw)


@given(refl, refl)
@settings(max_examples=60, deadline=None)
def test_peak_and_antiresonance_closed_forms(r1, r2):
    s = cavity(r1, r2)
    peak = ldos_guided(s, s.omega_c)
    anti = ldos_guided(s, s.omega_c + 0.25 * s.fsr)
    node = ldos_guided(s, s.omega_c + 0.5 * s.fsr)
    assert peak == pytest.approx(0.3 * (1 + r1) * (1 + r2) / (1 - r1 * r2), rel=1e-10)
    assert anti == pytest.approx(0.3 * (1 - r1 * r2) / (1 + r1 * r2), rel=1e-10)
    # the next cavity mode has a node at the emitter
    assert node == pytest.approx(0.3 * (1 - r1) * (1 - r2) / (1 - r1 * r2), rel=1e-10, abs=1e-15)


@given(refl, refl, st.floats(-0.5, 0.5))
@settings(max_examples=40, deadline=None)
def test_period_average_and_periodicity(r1, r2, start):
    s = cavity(r1, r2)
    # uniform sampling of a smooth periodic function: exponentially accurate mean
    x = start + np.arange(4096) / 4096
    rho = ldos_guided(s, s.omega_c + x * s.fsr)
    assert rho.mean() == pytest.approx(0.3, rel=1e-9)
    assert np.allclose(ldos_guided(s, s.omega_c + (x + 1) * s.fsr), rho, rtol=1e-8)
    assert np.all(rho >= 0)


def test_no_mirrors_is_flat():
    s = cavity(0, 0)
    w = s.omega_c + np.linspace(-2, 2, 101) * s.fsr
    assert np.allclose(ldos_guided(s, w), 0.3, rtol=1e-14)


def test_effective_reflectivity_modulus_and_phase():
    m = MirrorSpec(0.6, phi0=0.3)
    rt = effective_reflectivity(m, 1000.0, 1.0, 2.5)
    assert abs(rt) == pytest.approx(0.6)
    assert np.angle(rt) == pytest.approx(math.remainder(0.3 + 2.5 * 1000.0 / HBAR_C, 2 * math.pi))


def test_mirror_validation():
    with pytest.raises(ValueError):
        MirrorSpec(1.2)
    with pytest.raises(ValueError):
        MirrorSpec(0.5, t=0.5)
    assert MirrorSpec(0.6).t == pytest.approx(0.8)


def test_lossless_pole_raises():
    s = cavity(1.0, 1.0)
    with pytest.raises(PoleError):
        ldos_guided(s, s.omega_c)
    with pytest.raises(PoleError):
        filter_function(s, s.omega_c)


@given(st.floats(0.0, 0.99), st.floats(-1, 1))
@settings(max_examples=40, deadline=None)
def test_back_mirror_ldos_is_filter_intensity(r2, x):
    s = cavity(1.0, r2)
    w = s.omega_c + x * s.fsr
    assert ldos_guided(s, w) == pytest.approx(0.5 * 0.3 * abs(filter_function(s, w)) ** 2, rel=1e-9, abs=1e-15)


def test_radiation_reservoir_sums_families():
    fam = ModeFamily(0.2, 0.5, 0.5, 2.0)
    s = cavity(0.3, 0.3, gammaRM=0.05, extra_families=(fam,))
    w = np.linspace(s.omega_c - 1e4, s.omega_c + 1e4, 11)
    extra = ldos_radiation(s, w) - 0.05
    assert np.all(extra > 0)
    assert radiation_rate(cavity(0, 0, gammaRM=0.05), s.omega_c) == pytest.approx(0.05)


def test_radiation_rate_from_beta_roundtrip():
    g = radiation_rate_from_beta(0.9, 1.1)
    assert 1.1 / (1.1 + g) == pytest.approx(0.9)
    assert beta_star(1.0) == 1.0
    with pytest.raises(ValueError):
        radiation_rate_from_beta(0.0, 1.0)


def test_limit_values():
    g_max, kappa_max = limit_values(cavity(0, 0))
    assert g_max == pytest.approx(108.81, abs=0.01)
    assert kappa_max == pytest.approx(157.86e3, rel=1e-4)
    g4, k4 = limit_values(cavity(0, 0, L=4.0))
    assert g4 == pytest.approx(54.405, abs=0.001)
    assert k4 == pytest.approx(39.47e3, rel=1e-3)


@pytest.mark.parametrize("r", [0.2, 0.5, 0.9])
def test_decompose_matches_dense_oracle(r):
    p = decompose_ldos(cavity(r, r))
    gB, Lc, kappa = dense_ldos_fit(cavity(r, r))
    assert p.gammaB == pytest.approx(gB, rel=1e-3)
    assert p.Lc == pytest.approx(Lc, rel=1e-3)
    assert p.kappa == pytest.approx(kappa, rel=1e-3)


def test_decompose_high_r_is_a_pure_lorentzian():
    s = cavity(0.99, 0.99)
    p = decompose_ldos(s)
    assert p.fit_residual < 1e-3
    assert p.kappa_tilde == pytest.approx((1 - 0.99**2) / (2 * 0.99), rel=1e-2)
    # one period holds the whole Lorentzian: background + Lc/2 recovers the bare rate
    assert p.gammaB + 0.5 * p.Lc == pytest.approx(0.3, rel=1e-2)


def test_decompose_zero_reflectivity():
    p = decompose_ldos(cavity(0, 0))
    assert p.g == 0 and p.Lc == 0 and p.gammaB == 0.3
    assert p.kappa == pytest.approx(p.kappa_max, rel=0.25)


@pytest.mark.parametrize("L", [1.0, 4.0])
def test_fig2_trends(L):
    r = np.linspace(0.0, 0.99, 34)
    ps = sweep_params(cavity(0, 0, L=L), r)
    g = np.array([p.g for p in ps])
    k = np.array([p.kappa for p in ps])
    assert np.all(np.diff(g) > 0)
    assert np.all(np.diff(k) < 0)
    assert 0.98 <= g[-1] / ps[-1].g_max <= 1.0


def test_back_mirror_relations():
    s = cavity(1.0, 0.8)
    sym = decompose_ldos(cavity(0.8, 0.8))
    p = back_mirror_params(s)
    assert p.gammaB == pytest.approx(2 * sym.gammaB)
    assert p.kappa == pytest.approx(0.5 * sym.kappa)
    assert p.g == pytest.approx(sym.g)
    rr = back_mirror_renormalize(cavity(1.0, 0.8, gammaRM=0.1))
    assert rr.gammaB0 == pytest.approx(0.6)
    assert rr.beta == pytest.approx(beta_star(0.3 / 0.4))
    with pytest.raises(PreconditionError):
        back_mirror_params(cavity(0.9, 0.8))


def test_back_mirror_peak_matches_model():
    # background 2 Gamma_B plus Lorentzian peak with halved width reproduces the exact peak
    s = cavity(1.0, 0.95)
    p = back_mirror_params(s)
    kt = p.kappa * s.phase_scale
    model_peak = p.gammaB + p.Lc / kt
    assert model_peak == pytest.approx(ldos_guided(s, s.omega_c), rel=2e-2)
