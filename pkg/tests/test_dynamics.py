import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wgcqed.constants import HBAR
from wgcqed.dynamics import (SystemConfig, TwoTimeCorrelator, basis_state, build_generator, check_state,
                             dress_with_phonons, excited_population, operators, propagate,
                             regression_correlator, trace_row)
from wgcqed.errors import PropagationError, TruncationError
from wgcqed.phonons import PhononEnvironment, phonon_correlation_table


def config(**kw):
    base = dict(omega_X=1.3e6, detuning=0.0, g=0.0, kappa=0.0, gammaB=1.0, gammaR=0.0,
                gamma_tot_pd=0.0, B=1.0, n_max=2)
    base.update(kw)
    return SystemConfig(**base)


def test_operators():
    sigma, a = operators(3)
    assert sigma.shape == (8, 8)
    comm = a @ a.conj().T - a.conj().T @ a
    assert np.allclose(np.diag(comm)[:3], 1.0)
    assert np.allclose(sigma @ a, a @ sigma)
    with pytest.raises(TruncationError):
        operators(0)


def test_config_validation():
    with pytest.raises(ValueError):
        config(kappa=-1.0)
    with pytest.raises(ValueError):
        config(B=0.0)


rates = st.floats(0.0, 50.0)


@given(g=rates, kappa=rates, gB=rates, gR=rates, gam=rates, det=st.floats(-30, 30), B=st.floats(0.5, 1.0))
@settings(max_examples=30, deadline=None)
def test_generator_preserves_trace_and_hermiticity(g, kappa, gB, gR, gam, det, B):
    gen = build_generator(config(g=g, kappa=kappa, gammaB=gB, gammaR=gR, gamma_tot_pd=gam, detuning=det, B=B))
    d = gen.dim
    assert np.allclose(trace_row(np.eye(d)) @ gen.matrix, 0, atol=1e-12)
    rng = np.random.default_rng(0)
    X = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    X = X + X.conj().T
    Y = gen.apply(X)
    assert np.allclose(Y, Y.conj().T, atol=1e-12)
    assert np.all(gen.eigenvalues.real <= 1e-9)


def test_invariants_over_thousand_steps():
    gen = build_generator(config(g=60.0, kappa=40.0, gammaB=1.0, gammaR=0.2, gamma_tot_pd=3.0, B=0.95))
    t = np.linspace(0.0, 200.0, 1001)
    states = propagate(gen, basis_state(2, True), t, validate=True)
    for rho in states:
        check_state(rho)
    assert np.allclose(np.trace(states, axis1=1, axis2=2), 1.0, atol=1e-10)


def test_bare_decay_is_exponential():
    gen = build_generator(config(gammaB=0.8, gammaR=0.3))
    t = np.linspace(0.0, 3000.0, 301)
    pe = excited_population(propagate(gen, basis_state(2, True), t), gen)
    assert np.allclose(pe, np.exp(-1.1 * t / HBAR), atol=1e-6, rtol=0)


def test_lossless_rabi_oscillation():
    g, B = 20.0, 0.9
    gen = build_generator(config(g=g, gammaB=0.0, B=B))
    t = np.linspace(0.0, 300.0, 151)
    pe = excited_population(propagate(gen, basis_state(2, True), t), gen)
    assert np.allclose(pe, np.cos(g * B * t / HBAR) ** 2, atol=1e-9)


def test_single_excitation_truncation_converged():
    t = np.linspace(0.0, 100.0, 51)
    pops = []
    for n_max in (1, 2, 4):
        gen = build_generator(config(g=50.0, kappa=30.0, gamma_tot_pd=2.0, n_max=n_max))
        pops.append(excited_population(propagate(gen, basis_state(n_max, True), t), gen))
    assert np.allclose(pops[0], pops[1], atol=1e-12)
    assert np.allclose(pops[1], pops[2], atol=1e-12)


def test_propagate_rejects_bad_grid():
    gen = build_generator(config())
    with pytest.raises(ValueError):
        propagate(gen, basis_state(2, True), [1.0, 2.0])
    with pytest.raises(ValueError):
        propagate(gen, basis_state(2, True), [0.0, 2.0, 1.0])


def test_check_state_flags_bad_states():
    with pytest.raises(PropagationError):
        check_state(np.diag([1.5, -0.5]).astype(complex))
    with pytest.raises(PropagationError):
        check_state(np.array([[0.5, 0.1], [0.3, 0.5]], dtype=complex))


def test_correlator_matches_closed_form():
    G, gam = 1.0, 0.5
    gen = build_generator(config(gammaB=G, gamma_tot_pd=gam))
    t = np.linspace(0.0, 4000.0, 81)
    C = regression_correlator(gen, basis_state(2, True), t)
    tt, tp = np.meshgrid(t, t, indexing="ij")
    lo, hi = np.minimum(tt, tp), np.abs(tt - tp)
    exact = np.exp(-G * lo / HBAR) * np.exp(-(G / 2 + gam) * hi / HBAR)
    assert np.allclose(C.values, exact, atol=1e-12)
    assert np.allclose(C.values, C.values.conj().T)
    assert np.allclose(C.populations(), np.exp(-G * t / HBAR))


def test_correlator_populations_match_propagation():
    gen = build_generator(config(g=40.0, kappa=25.0, gamma_tot_pd=1.0))
    t = np.linspace(0.0, 150.0, 61)
    C = regression_correlator(gen, basis_state(2, True), t)
    pe = excited_population(propagate(gen, basis_state(2, True), t), gen)
    assert np.allclose(C.populations(), pe, atol=1e-12)


def test_correlator_tau_grid_extends_table():
    gen = build_generator(config(gammaB=5.0))
    t = np.arange(0.0, 10.0, 0.5)
    C = regression_correlator(gen, basis_state(2, True), t, tau_grid=np.arange(0.0, 5.0, 0.5))
    assert C.t[-1] == pytest.approx(14.0)
    assert np.allclose(np.diff(C.t), 0.5)
    with pytest.raises(ValueError):
        regression_correlator(gen, basis_state(2, True), t, tau_grid=np.arange(0.0, 5.0, 0.25))
    with pytest.raises(ValueError):
        regression_correlator(gen, basis_state(2, True), [0.0, 1.0, 3.0])


def test_phonon_dressing_splits_parts():
    gen = build_generator(config(gammaB=20.0))
    t = np.arange(0.0, 40.0, 0.05)
    C = regression_correlator(gen, basis_state(2, True), t)
    env = PhononEnvironment(0.03, 2.2, 4.2)
    D = dress_with_phonons(C, env)
    assert D.dressed
    assert np.allclose(D.zpl + D.psb, D.values)
    # equal times: B^2 exp(phi(0)) = 1
    assert np.allclose(np.diag(D.values), np.diag(C.values), atol=1e-9)
    assert np.allclose(D.zpl, D.B**2 * C.values)
    D2 = dress_with_phonons(C, phonon_correlation_table(env))
    assert np.allclose(D2.values, D.values)
    with pytest.raises(TypeError):
        dress_with_phonons(C, 1.0)


def test_lab_frame_and_csv(tmp_path):
    gen = build_generator(config(gammaB=5.0))
    C = regression_correlator(gen, basis_state(2, True), np.linspace(0, 10, 6))
    lab = C.lab_frame()
    assert np.allclose(np.abs(lab), np.abs(C.values))
    p = tmp_path / "c.csv"
    C.to_csv(p)
    data = np.loadtxt(p, delimiter=",", skiprows=1)
    assert open(p).readline().strip() == "t_ps,tprime_ps,re,im"
    assert data.shape == (36, 4)
