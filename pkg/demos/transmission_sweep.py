"""Efficiency and indistinguishability versus output-mirror transmission.

Runs both cavity-length presets on a coarse grid and prints a table; the
command-line equivalent is

    wgcqed fom --preset fig3-long --grid 1e-3:1:60:log --out long.csv
"""
import sys

from wgcqed.config import environment_from, load_config, structure_from
from wgcqed.pipeline import fom_sweep, transmission_grid

n = int(sys.argv[1]) if len(sys.argv) > 1 else 12
for preset in ("fig3-short", "fig3-long"):
    cfg = load_config(preset=preset)
    res = fom_sweep(structure_from(cfg), environment_from(cfg), transmission_grid(n))
    print(f"{preset} (L = {cfg['L_um']:.3g} um)")
    print("       T      g     kappa   I_num  I_ana  E_num  E_ana")
    for r in res:
        if not r.ok:
            print(f"  {r.T:.4f}  failed: {r.error}")
            continue
        print(f"  {r.T:.4f} {r.params.g:6.1f} {r.params.kappa:9.1f}  {r.numeric.I:.3f}  {r.analytic.I:.3f}"
              f"  {r.numeric.E:.3f}  {r.analytic.E:.3f}")
