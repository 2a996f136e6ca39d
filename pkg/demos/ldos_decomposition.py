"""Guided LDOS of a symmetric cavity and its background + Lorentzian split.

    python3 demos/ldos_decomposition.py
"""
import numpy as np

from wgcqed.photonic import WaveguideCavity, decompose_ldos, ldos_guided, lorentzian_background

base = WaveguideCavity(1.0, 2.5, 0.3)
x = np.linspace(-0.5, 0.5, 11)  # in units of the LDOS period

for r in (0.0, 0.2, 0.9):
    s = base.with_mirrors(r, r)
    p = decompose_ldos(s)
    exact = ldos_guided(s, s.omega_c + x * s.fsr)
    model = lorentzian_background(2 * np.pi * x, p.gammaB, p.Lc, p.kappa * s.phase_scale)
    print(f"r = {r}: Gamma_B = {p.gammaB:.4f} ueV, g = {p.g:.2f} ueV, kappa = {p.kappa / 1e3:.2f} meV, "
          f"rms misfit {p.fit_residual:.1e}")
    for xi, e, m in zip(x, exact, model):
        print(f"   {xi:+.2f}  {e:9.5f}  {m:9.5f}")
