"""Phonon-dressed emission spectrum of an emitter in a cavity.

Prints the diagonal S(w, w) with its zero-phonon and sideband parts and
writes it to emission_spectrum.csv.

    python3 demos/emission_spectrum.py
"""
import numpy as np

from wgcqed.dynamics import RegressionModel, SystemConfig, basis_state, build_generator
from wgcqed.phonons import PhononEnvironment, phonon_correlation_table
from wgcqed.spectra import decompose_spectrum, spectrum_from_model

env = PhononEnvironment(0.03, 2.2, 4.2)
table = phonon_correlation_table(env)
cfg = SystemConfig(g=40.0, kappa=200.0, gammaB=0.5, gammaR=0.05, gamma_tot_pd=0.1, B=table.B)
gen = build_generator(cfg)
S = spectrum_from_model(RegressionModel.from_generator(gen, basis_state(cfg.n_max, True)), phonons=table)
zpl, psb = decompose_spectrum(S)

print(f"B^2 = {table.B**2:.4f}")
print(f"ZPL weight {zpl.diagonal_integral() / S.diagonal_integral():.4f}, "
      f"sideband weight {psb.diagonal_integral() / S.diagonal_integral():.4f}")
print(f"population integral {S.metadata['population_integral']:.3f} ps, "
      f"spectral truncation {S.metadata['truncated_fraction']:.1e}")
pick = np.searchsorted(S.diag_delta, [-3000, -1000, -300, -40, 0, 40, 300, 1000, 3000])
for k in pick:
    print(f"  {S.diag_delta[k]:9.1f} ueV  S={S.diag_values[k]:.4e}  zpl={S.diag_zpl[k]:.4e}  psb={S.diag_psb[k]:.4e}")
S.diag_to_csv("emission_spectrum.csv")
