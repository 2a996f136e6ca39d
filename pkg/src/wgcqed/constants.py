"""Physical constants in the package's unit system.

Energies and rates are hbar*omega in micro-eV, lengths in micrometres,
times in picoseconds and phonon frequencies in rad/ps.
"""

HBAR_C = 197326.9804  # ueV * um
HBAR = 658.2119569  # ueV * ps
K_B = 86.17333262  # ueV / K


def wavelength_to_energy(lambda_um: float) -> float:
    """Photon energy hbar*omega (ueV) for a vacuum wavelength in um."""
    return 2.0 * 3.141592653589793 * HBAR_C / lambda_um
