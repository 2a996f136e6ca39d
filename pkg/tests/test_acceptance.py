"""The seven acceptance criteria at their stated tolerances.

Each criterion records one PASS/FAIL line; the lines are printed at the end
of the pytest run (see conftest.py) or directly when run as a script.
"""
import math
import os
import sys
import time

import numpy as np
import pytest

from wgcqed.config import environment_from, load_config, structure_from
from wgcqed.dynamics import (RegressionModel, SystemConfig, basis_state, build_generator, check_state,
                             excited_population, propagate)
from wgcqed.merit import indistinguishability_numeric
from wgcqed.phonons import PhononEnvironment, franck_condon, phonon_correlation
from wgcqed.photonic import MirrorSpec, WaveguideCavity, decompose_ldos, ldos_guided, sweep_params
from wgcqed.pipeline import fom_sweep, transmission_grid
from wgcqed.spectra import spectrum_from_model
from wgcqed.constants import HBAR

sys.path.insert(0, os.path.dirname(__file__))
from oracles import dense_ldos_fit  # noqa: E402

RESULTS = []


def report(n, title, ok, detail, elapsed):
    line = f"criterion {n} [{'PASS' if ok else 'FAIL'}] {title}: {detail} ({elapsed:.1f} s)"
    RESULTS.append(line)
    print(line)
    return ok


def test_criterion_1_ldos_identities():
    t0 = time.perf_counter()
    rng = np.random.default_rng(20240601)
    worst_peak = worst_anti = worst_avg = 0.0
    x = np.arange(8192) / 8192
    for r1, r2 in rng.uniform(0.0, 0.99, size=(20, 2)):
        s = WaveguideCavity(1.0, 2.5, 0.3, mirror1=MirrorSpec(r1), mirror2=MirrorSpec(r2))
        peak = 0.3 * (1 + r1) * (1 + r2) / (1 - r1 * r2)
        anti = 0.3 * (1 - r1 * r2) / (1 + r1 * r2)
        # resonance at omega_c; antiresonance a quarter period (pi/2 in phase) away
        worst_peak = max(worst_peak, abs(ldos_guided(s, s.omega_c) / peak - 1))
        worst_anti = max(worst_anti, abs(ldos_guided(s, s.omega_c + 0.25 * s.fsr) / anti - 1))
        worst_avg = max(worst_avg, abs(ldos_guided(s, s.omega_c + x * s.fsr).mean() / 0.3 - 1))
    elapsed = time.perf_counter() - t0
    ok = worst_peak < 1e-10 and worst_anti < 1e-10 and worst_avg < 1e-6 and elapsed < 5
    assert report(1, "LDOS identities", ok,
                  f"max rel err peak {worst_peak:.1e}, antiresonance {worst_anti:.1e}, period mean {worst_avg:.1e}",
                  elapsed)


def test_criterion_2_fig2_limits():
    t0 = time.perf_counter()
    r = np.linspace(0.0, 0.99, 100)
    details, ok = [], True
    for L, g_ref, k_ref in ((1.0, 108.8, 157.9e3), (4.0, 54.4, 39.5e3)):
        base = WaveguideCavity(L, 2.5, 0.3)
        ps = sweep_params(base, r)
        g = np.array([p.g for p in ps])
        k = np.array([p.kappa for p in ps])
        k001 = decompose_ldos(base.with_mirrors(0.01, 0.01)).kappa
        g_max, kappa_max = ps[0].g_max, ps[0].kappa_max
        ratio = g[-1] / g_max
        this = (np.all(np.diff(g) > 0) and np.all(np.diff(k) < 0) and 0.98 <= ratio <= 1.0
                and abs(g_max - g_ref) < 0.05 and abs(kappa_max - k_ref) < 0.05e3
                and abs(k001 / kappa_max - 1) <= 0.25)
        ok &= bool(this)
        details.append(f"L={L:g}: g(0.99)/g_max={ratio:.4f}, kappa(0.01)/kappa_max={k001 / kappa_max:.3f}")
    elapsed = time.perf_counter() - t0
    ok = ok and elapsed < 60
    assert report(2, "g and kappa versus reflectivity", ok, "; ".join(details), elapsed)


def test_criterion_3_phonons():
    t0 = time.perf_counter()
    env0 = PhononEnvironment(0.03, 2.2, 0.0)
    e1 = abs(franck_condon(env0) / math.exp(-0.03 * 2.2**2 / 4) - 1)
    env = PhononEnvironment(0.03, 2.2, 4.2)
    B = franck_condon(env)
    e2 = abs(math.exp(-phonon_correlation(env, 0.0).real) / B**2 - 1)
    fig3 = environment_from(load_config(preset="fig3-short"))
    B4 = franck_condon(fig3) ** 4
    elapsed = time.perf_counter() - t0
    ok = e1 < 1e-6 and e2 < 1e-6 and abs(B4 - 0.826) <= 0.001 and elapsed < 10
    assert report(3, "phonon module", ok,
                  f"B(T=0) rel err {e1:.1e}, exp(-Re phi(0))/B^2 rel err {e2:.1e}, calibrated B^4 = {B4:.6f}",
                  elapsed)


def test_criterion_4_dynamics():
    t0 = time.perf_counter()
    base = dict(omega_X=1.3e6, detuning=0.0, g=0.0, kappa=0.0, gammaB=1.0, gammaR=0.0,
                gamma_tot_pd=0.0, B=1.0, n_max=2)
    gen = build_generator(SystemConfig(**dict(base, g=60.0, kappa=40.0, gammaR=0.2, gamma_tot_pd=3.0, B=0.95)))
    states = propagate(gen, basis_state(2, True), np.linspace(0.0, 200.0, 1001), validate=True)
    invariants = True
    try:
        for rho in states:
            check_state(rho)
    except Exception:
        invariants = False
    gen0 = build_generator(SystemConfig(**base))
    t = np.linspace(0.0, 3000.0, 301)
    decay_err = float(np.max(np.abs(excited_population(propagate(gen0, basis_state(2, True), t), gen0)
                                    - np.exp(-t / HBAR))))
    flat = WaveguideCavity(1.0, 2.5, 1.0)
    worst = 0.0
    for ratio in (0.1, 1.0, 10.0):
        g = build_generator(SystemConfig(**dict(base, gamma_tot_pd=ratio)))
        S = spectrum_from_model(RegressionModel.from_generator(g, basis_state(2, True)))
        I = indistinguishability_numeric(S, flat)
        worst = max(worst, abs(I * (1 + 2 * ratio) - 1))
    elapsed = time.perf_counter() - t0
    ok = invariants and decay_err < 1e-6 and worst < 0.01 and elapsed < 30
    assert report(4, "dynamics sanity", ok,
                  f"invariants over 1000 steps {'hold' if invariants else 'violated'}, decay err {decay_err:.1e}, "
                  f"max rel err of I vs Gamma/(Gamma+2 gamma) {worst:.1e}", elapsed)


@pytest.fixture(scope="module")
def fig3_sweeps():
    t0 = time.perf_counter()
    out = {}
    workers = os.cpu_count() or 1
    for preset in ("fig3-short", "fig3-long"):
        cfg = load_config(preset=preset)
        out[preset] = fom_sweep(structure_from(cfg), environment_from(cfg), transmission_grid(60),
                                workers=workers)
    return out, time.perf_counter() - t0


def _smooth(y):
    """No kinks on the log-T grid and at most three turning points above 1e-3."""
    d = np.diff(y)
    big = d[np.abs(d) > 1e-3]
    turns = int(np.sum(np.sign(big[1:]) != np.sign(big[:-1])))
    return bool(np.max(np.abs(np.diff(y, 2))) <= 0.05 and turns <= 3), turns


def test_criterion_5_fig3(fig3_sweeps):
    sweeps, elapsed = fig3_sweeps
    ok, details, max_I = True, [], {}
    for preset, res in sweeps.items():
        failed = [r for r in res if not r.ok]
        if failed:
            ok = False
            details.append(f"{preset}: {len(failed)} failed points")
            continue
        I = np.array([r.numeric.I for r in res])
        E = np.array([r.numeric.E for r in res])
        end = res[-1]
        smooth_I, tI = _smooth(I)
        smooth_E, tE = _smooth(E)
        this = (abs(end.numeric.E - 0.974) <= 0.005 and abs(end.numeric.I - 0.826) <= 0.02
                and np.all((E >= 0) & (E <= 1)) and smooth_I and smooth_E)
        ok &= bool(this)
        max_I[preset] = I.max()
        details.append(f"{preset}: E(T=1)={end.numeric.E:.4f}, I(T=1)={end.numeric.I:.4f}, max I={I.max():.4f}")
    ok = ok and max_I.get("fig3-long", 0) > max_I.get("fig3-short", 1) and elapsed < 15 * 60
    assert report(5, "transmission sweeps: open-cavity endpoint and shape", ok, "; ".join(details), elapsed)


def test_criterion_6_numeric_vs_analytic(fig3_sweeps):
    t0 = time.perf_counter()
    sweeps, _ = fig3_sweeps
    worst_I = worst_E = 0.0
    n = 0
    for res in sweeps.values():
        for r in res:
            if not r.ok or r.params.kappa <= 10 * r.params.g:
                continue
            n += 1
            worst_I = max(worst_I, abs(r.numeric.I / r.analytic.I - 1))
            worst_E = max(worst_E, abs(r.numeric.E / r.analytic.E - 1))
    ok = n > 0 and worst_I <= 0.05 and worst_E <= 0.05
    assert report(6, "numeric vs analytic for kappa > 10 g", ok,
                  f"{n} points, max rel diff I {worst_I:.3f}, E {worst_E:.4f}", time.perf_counter() - t0)


def test_criterion_7_decomposition_oracle():
    t0 = time.perf_counter()
    worst = 0.0
    for r in (0.2, 0.5, 0.9):
        s = WaveguideCavity(1.0, 2.5, 0.3, mirror1=MirrorSpec(r), mirror2=MirrorSpec(r))
        p = decompose_ldos(s)
        gB, Lc, kappa = dense_ldos_fit(s)
        worst = max(worst, abs(p.gammaB / gB - 1), abs(p.Lc / Lc - 1), abs(p.kappa / kappa - 1))
    ok = worst < 5e-4
    assert report(7, "decompose_ldos vs dense least-squares oracle", ok,
                  f"max rel diff {worst:.1e} (3 significant digits needs < 5e-4)", time.perf_counter() - t0)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
