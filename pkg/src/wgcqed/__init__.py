"""Photon sources in mirror-terminated waveguide cavities.

LDOS decomposition, phonon-dressed emitter dynamics, two-colour spectra and
the resulting efficiency and indistinguishability.
"""
__version__ = "0.1.0"
