"""Two-colour dipole spectrum, its ZPL/PSB split and emitted powers.

Convention: with detunings delta = hbar*omega - hbar*omega_X (ueV) and the
correlator in the frame rotating at omega_X,

    S(delta, delta') = int int exp(-i (delta t - delta' t') / hbar) C(t, t') dt dt'

in ps^2.  The emission line then sits at delta = 0 and phonon emission on
the red side.  Frequency integrals use the measure d(delta) / (2 pi hbar), so
that int S(delta, delta) d(delta) / (2 pi hbar) = int C(t, t) dt and powers
come out as photon numbers per excitation.

Two routes produce the same object:

* closed form, when the correlator carries its regression model: the
  transforms reduce to resolvents of the generator and the phonon sideband
  to one finite time integral over the phonon kernel;
* tabulated quadrature of a correlator sampled on a uniform time grid
  (trapezoid rule), used as an independent check.

A spectrum holds a two-dimensional block on a mesh refined around the
emission lines and the diagonal on a composite grid that reaches over the
whole phonon sideband.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.linalg import expm

from .constants import HBAR
from .dynamics import RegressionModel, TwoTimeCorrelator
from .errors import WindowError
from .photonic import WaveguideCavity, filter_function

DECAY_TOL = 1e-6
MEASURE = 2.0 * math.pi * HBAR
_CHUNK = 4096
PSB_TABLE_SPACING = 2.0  # ueV


def trapezoid_weights(x, tails: bool = False) -> np.ndarray:
    """Trapezoid weights; ``tails`` adds the integral of a 1/x^2 decay beyond each end."""
    x = np.asarray(x, dtype=float)
    w = np.zeros_like(x)
    if x.size > 1:
        dx = np.diff(x)
        w[:-1] += 0.5 * dx
        w[1:] += 0.5 * dx
        if tails and x[0] < 0 < x[-1]:
            w[0] += -x[0]
            w[-1] += x[-1]
    return w


@dataclass(frozen=True)
class FrequencyGrid:
    """Detuning grids (ueV): ``fine`` for the 2D block, ``diag`` for the diagonal.

    ``offsets`` is the mesh in delta - delta' used by the closed-form overlap
    integral; it defaults to the fine mesh.
    """

    fine: np.ndarray
    diag: np.ndarray
    offsets: np.ndarray | None = None
    info: dict = field(default_factory=dict)

    @classmethod
    def uniform(cls, half_width: float, n: int) -> "FrequencyGrid":
        x = np.linspace(-half_width, half_width, n)
        return cls(x, x, None, {"kind": "uniform"})


# ---------------------------------------------------------------- reduction

@dataclass(frozen=True, eq=False)
class _Reduced:
    """Emission correlator in the form u exp(Mc tau) Scp exp(Mp t') b.

    For single-excitation initial states Mc acts on the one-photon coherences
    |g,0><e,0|, |g,0><g,1| and Mp on the one-excitation populations; both
    blocks are invariant, so the reduction is exact.  Otherwise the full
    generator is used, deflated by its stationary projector.
    """

    Mc: np.ndarray
    Mp: np.ndarray
    u: np.ndarray
    Scp: np.ndarray
    b: np.ndarray
    n_e: np.ndarray


def _coherence_blocks(model: RegressionModel):
    d = int(round(math.sqrt(model.L.shape[0])))
    one = [d // 2, 1]  # |e,0> and |g,1>
    rho0 = model.rho0.reshape(d, d)
    mask = np.zeros((d, d), bool)
    mask[np.ix_(one, one)] = True
    if np.max(np.abs(rho0[~mask]), initial=0.0) > 1e-14:
        return None
    coh = list(one)  # |g,0><x|; the ground state has index 0
    pop = [i * d + j for i in one for j in one]
    return coh, pop


def _detach_idle(M):
    """Give decoupled, non-decaying basis elements (an idle lossless cavity) unit decay.

    Such elements neither receive nor pass on amplitude, so this only keeps
    the resolvents regular.
    """
    M = M.copy()
    off = np.abs(M - np.diag(np.diag(M)))
    for i in range(len(M)):
        if M[i, i] == 0 and off[i].max() == 0 and off[:, i].max() == 0:
            M[i, i] = -1.0
    return M


def reduce_model(model: RegressionModel) -> _Reduced:
    blocks = _coherence_blocks(model)
    L = model.L
    if blocks is None:
        P = model.stationary_projector
        Q = np.eye(len(P)) - P
        if np.abs(model.S @ (P @ model.rho0)).max() > 1e-10:
            raise WindowError("stationary state emits: spectrum is not integrable")
        M = L - P
        return _Reduced(M, M, model.u @ Q, model.S, Q @ model.rho0, model.n_e)
    coh, pop = blocks
    return _Reduced(_detach_idle(L[np.ix_(coh, coh)]), _detach_idle(L[np.ix_(pop, pop)]),
                    model.u[coh], model.S[np.ix_(coh, pop)], model.rho0[pop], model.n_e[pop])


def _mode_weights(M, row, col):
    lam, V = np.linalg.eig(M)
    Vi = np.linalg.inv(V)
    return lam, np.abs(row @ V) * np.abs(Vi @ col)


def relevant_eigenvalues(model: RegressionModel, rel_weight: float = 1e-6):
    """(coherence, population) eigenvalues in ps^-1 that shape the emission spectrum."""
    red = reduce_model(model)
    lam_c, w_c = _mode_weights(red.Mc, red.u, np.ones(len(red.Mc)))
    lam_p, w_p = _mode_weights(red.Mp, np.abs(red.Scp).sum(axis=0), red.b)
    keep_c = (w_c > rel_weight * max(w_c.max(), 1e-300)) & (np.abs(lam_c) > 0)
    keep_p = (w_p > rel_weight * max(w_p.max(), 1e-300)) & (np.abs(lam_p) > 0)
    return lam_c[keep_c], lam_p[keep_p]


def check_decay(model: RegressionModel):
    """Relevant eigenvalues, raising WindowError if an emitting mode does not decay."""
    lam_c, lam_p = relevant_eigenvalues(model)
    lam = np.concatenate([lam_c, lam_p])
    scale = max(np.abs(lam).max(initial=0.0), 1e-300)
    if lam_c.size == 0 or np.any(lam.real >= -1e-12 * scale):
        raise WindowError("correlator does not decay: generator has a non-decaying emitting mode")
    return lam_c, lam_p


# ---------------------------------------------------------------- grid design

def _mesh(lines, edge: float, ratio: float, cap: float | None = None, cap_until: float = 0.0,
          core: float = 5.0) -> np.ndarray:
    """Symmetric mesh on [-edge, edge] refined around each (centre, hwhm) line.

    Spacing is hwhm/2 within ``core`` half-widths of a line and grows by
    ``ratio`` times the distance beyond; ``cap`` bounds the spacing for
    |x| < cap_until.
    """
    cs = np.array([abs(c) for c, _ in lines])
    gs = np.array([g for _, g in lines])
    xs = [0.0]
    x = 0.0
    while x < edge:
        s = np.min(np.maximum(0.5 * gs, ratio * (np.abs(x - cs) - core * gs)))
        if cap is not None and x < cap_until:
            s = min(s, cap)
        x = min(x + s, edge)
        xs.append(x)
    xs = np.asarray(xs)
    return np.concatenate([-xs[:0:-1], xs])


def design_grid(model: RegressionModel, filter_width: float | None = None,
                fsr: float | None = None) -> FrequencyGrid:
    """Grids adapted to the relevant lines of the generator.

    Every mesh resolves the lines it sees at half their half-width and grows
    geometrically away from them.  The 2D meshes reach 4000 half-widths
    beyond the outermost line; the diagonal grid keeps at most 10 ueV spacing
    out to +-10 meV (the phonon sideband) and ends at 1e4 half-widths of the
    broadest line, clipped to [10, 100] meV and to 0.45 of the free spectral
    range.  ``filter_width`` is the FWHM of the output filter.
    """
    lam_c, lam_p = check_decay(model)
    coh = [(HBAR * l.imag, -HBAR * l.real) for l in lam_c]
    pop = [(HBAR * l.imag, -HBAR * l.real) for l in lam_p]
    filt = [(0.0, 0.5 * filter_width)] if filter_width else []
    hw_c = -HBAR * lam_c.real
    reach = float(np.max(np.abs(HBAR * lam_c.imag)))
    edge = float(np.clip(1e4 * hw_c.max(), 1.0e4, 1.0e5))
    if fsr is not None:
        edge = min(edge, 0.45 * fsr)
    edge2 = min(edge, reach + 4000.0 * hw_c.max())
    fine = _mesh(coh + filt, edge2, 0.03)
    shifted = [(c, g) for c, _ in coh for g in [hw for _, hw in coh + filt]]
    offsets = _mesh(pop + coh + filt + shifted, edge2, 0.03)
    diag = _mesh(coh + filt, edge, 0.03, cap=10.0, cap_until=1.0e4)
    info = {"edge": edge, "edge_2d": edge2, "narrowest_hwhm": float(hw_c.min()),
            "broadest_hwhm": float(hw_c.max()), "n_2d": int(fine.size),
            "n_offsets": int(offsets.size), "n_diag": int(diag.size)}
    return FrequencyGrid(fine, diag, offsets, info)


# -------------------------------------------------------------- closed form

def _emission_rows(red: _Reduced, delta) -> np.ndarray:
    """Rows u (i delta/hbar - Mc)^-1 Scp."""
    n = red.Mc.shape[0]
    delta = np.asarray(delta, float).ravel()
    A = (1j * delta[:, None, None] / HBAR) * np.eye(n) - red.Mc
    rhs = np.broadcast_to(red.u, (delta.size, n))[..., None]
    rows = np.linalg.solve(np.transpose(A, (0, 2, 1)), rhs)[..., 0]
    return rows @ red.Scp


def _state_columns(red: _Reduced, w) -> np.ndarray:
    """(i w/hbar - Mp)^-1 b for each offset w; shape w.shape + (n,)."""
    n = red.Mp.shape[0]
    w = np.asarray(w, float)
    A = (1j * w.ravel()[:, None, None] / HBAR) * np.eye(n) - red.Mp
    x = np.linalg.solve(A, np.broadcast_to(red.b, (A.shape[0], n))[..., None])[..., 0]
    return x.reshape(w.shape + (n,))


@dataclass(frozen=True, eq=False)
class SpectralKernel:
    """Closed-form pieces of S_+(d, d') = R(d) . X(d - d').

    R = B^2 R_zpl + R_psb, where the sideband row is the finite time integral
    sum_k w_k exp(-i d tau_k / hbar) B^2 (e^phi(tau_k) - 1) u exp(Mc tau_k) Scp.
    ``parts`` selects the components carried by a decomposed spectrum.
    """

    red: _Reduced
    phonons: object | None = None
    parts: tuple = ("zpl", "psb")

    @property
    def B2(self) -> float:
        return 1.0 if self.phonons is None else self.phonons.B**2

    @cached_property
    def _psb_kernel(self):
        """Time samples tau_k and weighted sideband rows w_k B^2 (e^phi - 1) u exp(Mc tau_k) Scp."""
        ph = self.phonons
        t = ph.t
        dt = t[1] - t[0]
        E = expm(self.red.Mc * dt)
        base = np.empty((t.size, self.red.Mc.shape[0]), dtype=complex)
        r = self.red.u.astype(complex)
        for k in range(t.size):
            base[k] = r
            r = r @ E
        w = np.full(t.size, dt)
        w[0] *= 0.5
        w[-1] *= 0.5
        return t, ((ph.B**2 * np.expm1(ph.values) * w)[:, None] * base) @ self.red.Scp

    def psb_rows_direct(self, delta) -> np.ndarray:
        """Sideband rows by direct summation over the phonon time grid."""
        t, kern = self._psb_kernel
        delta = np.asarray(delta, float).ravel()
        out = np.empty((delta.size, kern.shape[1]), dtype=complex)
        for s in range(0, delta.size, _CHUNK):
            out[s:s + _CHUNK] = np.exp(-1j * np.outer(delta[s:s + _CHUNK] / HBAR, t)) @ kern
        return out

    @cached_property
    def _psb_spline(self):
        # the rows are a trigonometric polynomial in delta with period 2 pi hbar / dt:
        # tabulate one period by FFT and interpolate with a periodic spline
        t, kern = self._psb_kernel
        dt = t[1] - t[0]
        n = 1 << int(math.ceil(math.log2(MEASURE / (dt * PSB_TABLE_SPACING))))
        vals = np.fft.fft(np.vstack([kern, np.zeros((n - t.size, kern.shape[1]))]), axis=0)
        h = MEASURE / (n * dt)
        x = h * np.arange(n + 1)
        vals = np.vstack([vals, vals[:1]])
        return n * h, CubicSpline(x, vals, bc_type="periodic", axis=0)

    def _psb_rows(self, delta) -> np.ndarray:
        period, spline = self._psb_spline
        return spline(np.mod(np.asarray(delta, float).ravel(), period))

    def rows(self, delta):
        """(zpl, psb) emission rows at the detunings ``delta``."""
        delta = np.asarray(delta, float).ravel()
        zr = self.B2 * _emission_rows(self.red, delta)
        pr = self._psb_rows(delta) if self.phonons is not None else np.zeros_like(zr)
        if "zpl" not in self.parts:
            zr = np.zeros_like(zr)
        if "psb" not in self.parts:
            pr = np.zeros_like(pr)
        return zr, pr

    def columns(self, w):
        return _state_columns(self.red, w)


def spectrum_from_model(model: RegressionModel, grid: FrequencyGrid | None = None,
                        phonons=None, **grid_kw) -> "TwoColourSpectrum":
    """Exact transform of the regression correlator (optionally phonon dressed).

    With R(d) the emission row and X(w) = (i w - Mp)^-1 b the transformed
    state, S_+(d, d') = R(d) . X(d - d') and S = S_+ + S_+^H.
    """
    designed = grid is None
    if designed:
        grid = design_grid(model, **grid_kw)
    else:
        check_decay(model)
    kernel = SpectralKernel(reduce_model(model), phonons)

    d = np.asarray(grid.fine, dtype=float)
    zr, pr = kernel.rows(d)
    X = kernel.columns(d[:, None] - d[None, :])
    zpl_p = np.einsum("ik,ijk->ij", zr, X)
    psb_p = np.einsum("ik,ijk->ij", pr, X)
    zpl = zpl_p + zpl_p.conj().T
    psb = psb_p + psb_p.conj().T

    dd = np.asarray(grid.diag, dtype=float)
    x0 = kernel.columns(np.zeros(1))[0]
    dzr, dpr = kernel.rows(dd)
    dzpl = 2.0 * np.real(dzr @ x0)
    dpsb = 2.0 * np.real(dpr @ x0)

    meta = dict(grid.info)
    meta["method"] = "resolvent"
    # int C(t, t) dt in closed form, the Parseval reference
    meta["population_integral"] = float(np.real(kernel.red.n_e @ x0))
    S = TwoColourSpectrum(d, zpl + psb, zpl, psb, dd, dzpl + dpsb, dzpl, dpsb, model.omega_X,
                          1.0 if phonons is None else phonons.B, meta, kernel,
                          grid.offsets if grid.offsets is not None else d, designed)
    meta["truncated_fraction"] = 1.0 - S.diagonal_integral() / meta["population_integral"]
    return S


# ------------------------------------------------------------- the spectrum

@dataclass(frozen=True, eq=False)
class TwoColourSpectrum:
    """S(delta, delta') on the 2D mesh and S(delta, delta) on the diagonal grid.

    Spectra from the closed-form route also carry their ``kernel``, which
    allows the filtered overlap integral to be evaluated exactly along the
    diagonal ridge.
    """

    delta: np.ndarray
    values: np.ndarray
    zpl: np.ndarray
    psb: np.ndarray
    diag_delta: np.ndarray
    diag_values: np.ndarray
    diag_zpl: np.ndarray
    diag_psb: np.ndarray
    omega_X: float
    B: float = 1.0
    metadata: dict = field(default_factory=dict)
    kernel: SpectralKernel | None = None
    offsets: np.ndarray | None = None
    tails: bool = False

    @property
    def omega(self) -> np.ndarray:
        return self.omega_X + self.delta

    @property
    def diag_omega(self) -> np.ndarray:
        return self.omega_X + self.diag_delta

    @property
    def weights(self) -> np.ndarray:
        return trapezoid_weights(self.delta, self.tails)

    @property
    def diag_weights(self) -> np.ndarray:
        return trapezoid_weights(self.diag_delta, self.tails)

    def diagonal_integral(self, which: str = "total", weight=None) -> float:
        """int w(delta) S(delta, delta) d(delta) / (2 pi hbar)  (ps)."""
        s = {"total": self.diag_values, "zpl": self.diag_zpl, "psb": self.diag_psb}[which]
        if weight is not None:
            s = s * weight
        return float(np.dot(self.diag_weights, s) / MEASURE)

    def filtered_overlap(self, G2=None) -> float:
        """int int |G(d)|^2 |G(d')|^2 |S(d, d')|^2 dd dd' / (2 pi hbar)^2  (ps^2).

        ``G2`` maps absolute energies (ueV) to |G|^2; None means no filter.
        With a kernel the integral is done in (d, w = d - d') coordinates:
        |S|^2 = |S_+|^2 + |S_+^H|^2 + 2 Re S_+ conj(S_+^H), the first two
        terms being equal by symmetry.
        """
        g2 = (lambda w: np.ones_like(w)) if G2 is None else G2
        if self.kernel is None:
            w = self.weights
            gd = g2(self.omega)
            return float(np.sum(np.outer(w * gd, w * gd) * np.abs(self.values) ** 2) / MEASURE**2)
        d, off = self.delta, self.offsets
        wd, wo = trapezoid_weights(d, self.tails), trapezoid_weights(off, self.tails)
        zr, pr = self.kernel.rows(d)
        R = zr + pr
        Xp = self.kernel.columns(off)
        Xm = self.kernel.columns(-off)
        A = R @ Xp.T  # S_+(d_i, d_i - w_k)
        dp = d[:, None] - off[None, :]
        zr2, pr2 = self.kernel.rows(dp.ravel())
        R2 = (zr2 + pr2).reshape(dp.shape + (-1,))
        Bc = np.einsum("ikn,kn->ik", R2, Xm)  # S_+(d_i - w_k, d_i)
        G = g2(self.omega_X + d)[:, None] * g2(self.omega_X + dp)
        W = wd[:, None] * wo[None, :] * G
        total = 2.0 * np.sum(W * np.abs(A) ** 2) + 2.0 * np.real(np.sum(W * A * Bc))
        return float(total / MEASURE**2)

    def to_csv(self, path) -> None:
        """Rows (omega_ueV, omegaprime_ueV, re, im) of the 2D block."""
        w = self.omega
        a, b = np.meshgrid(w, w, indexing="ij")
        data = np.column_stack([a.ravel(), b.ravel(), self.values.real.ravel(), self.values.imag.ravel()])
        np.savetxt(path, data, delimiter=",", fmt="%.12g", header="omega_ueV,omegaprime_ueV,re,im", comments="")

    def diag_to_csv(self, path) -> None:
        data = np.column_stack([self.diag_omega, self.diag_values, self.diag_zpl, self.diag_psb])
        np.savetxt(path, data, delimiter=",", fmt="%.12g", header="omega_ueV,S,S_zpl,S_psb", comments="")


# ------------------------------------------------------ tabulated quadrature

def _check_window(C: TwoTimeCorrelator) -> None:
    v = np.abs(C.values)
    peak = v.max()
    edge = max(v[-1, :].max(), v[:, -1].max())
    if peak == 0 or edge > DECAY_TOL * peak:
        raise WindowError(f"correlator at the window edge is {edge / max(peak, 1e-300):.2e} of its peak")


def _quadrature(C: TwoTimeCorrelator, values, d):
    w = trapezoid_weights(C.t)
    E = np.exp(-1j * np.outer(d, C.t) / HBAR) * w
    return E @ values @ E.conj().T


def _quadrature_diag(C: TwoTimeCorrelator, values, d):
    w = trapezoid_weights(C.t)
    E = np.exp(-1j * np.outer(d, C.t) / HBAR) * w
    return np.real(np.einsum("ij,ij->i", E @ values, E.conj()))


def spectrum_from_table(C: TwoTimeCorrelator, grid: FrequencyGrid) -> TwoColourSpectrum:
    """Direct double trapezoid transform of a tabulated correlator."""
    _check_window(C)
    zpl_t = C.zpl if C.zpl is not None else C.values
    psb_t = C.psb if C.psb is not None else np.zeros_like(C.values)
    d = np.asarray(grid.fine, float)
    dd = np.asarray(grid.diag, float)
    zpl = _quadrature(C, zpl_t, d)
    psb = _quadrature(C, psb_t, d)
    zpl = 0.5 * (zpl + zpl.conj().T)
    psb = 0.5 * (psb + psb.conj().T)
    dzpl = _quadrature_diag(C, zpl_t, dd)
    dpsb = _quadrature_diag(C, psb_t, dd)
    meta = dict(grid.info)
    meta["method"] = "quadrature"
    pop = float(np.dot(trapezoid_weights(C.t), np.diag(C.values).real))
    meta["population_integral"] = pop
    S = TwoColourSpectrum(d, zpl + psb, zpl, psb, dd, dzpl + dpsb, dzpl, dpsb, C.omega_X, C.B, meta)
    meta["truncated_fraction"] = 1.0 - S.diagonal_integral() / pop
    return S


def two_colour_spectrum(C: TwoTimeCorrelator, grid: FrequencyGrid | None = None,
                        method: str = "auto", **grid_kw) -> TwoColourSpectrum:
    """Two-colour spectrum of a (possibly phonon-dressed) correlator.

    ``method`` is "resolvent", "quadrature" or "auto" (resolvent whenever the
    correlator carries its regression model).
    """
    if method == "auto":
        method = "resolvent" if C.model is not None else "quadrature"
    if method == "resolvent":
        if C.model is None:
            raise ValueError("closed-form transform needs the regression model")
        return spectrum_from_model(C.model, grid, C.phonons, **grid_kw)
    if method == "quadrature":
        if grid is None:
            raise ValueError("quadrature transform needs an explicit frequency grid")
        return spectrum_from_table(C, grid)
    raise ValueError(f"unknown method {method!r}")


def decompose_spectrum(S: TwoColourSpectrum) -> tuple[TwoColourSpectrum, TwoColourSpectrum]:
    """(ZPL, PSB) spectra; each is a TwoColourSpectrum holding one component."""
    z0, d0 = np.zeros_like(S.values), np.zeros_like(S.diag_values)
    kz = replace(S.kernel, parts=("zpl",)) if S.kernel is not None else None
    kp = replace(S.kernel, parts=("psb",)) if S.kernel is not None else None
    zpl = replace(S, values=S.zpl, psb=z0, diag_values=S.diag_zpl, diag_psb=d0, kernel=kz)
    psb = replace(S, values=S.psb, zpl=z0, diag_values=S.diag_psb, diag_zpl=d0, kernel=kp)
    return zpl, psb


def filter_intensity(structure: WaveguideCavity):
    """omega -> |G(omega)|^2 for the output through mirror 2."""
    return lambda omega: np.abs(filter_function(structure, omega)) ** 2


def power_guided(S: TwoColourSpectrum, structure: WaveguideCavity) -> float:
    """P_B = (Gamma_B0 / 2 hbar) int |G|^2 S(delta, delta) d(delta) / (2 pi hbar)."""
    G2 = filter_intensity(structure)(S.diag_omega)
    return max(0.0, 0.5 * structure.gammaB0 / HBAR * S.diagonal_integral(weight=G2))


def power_radiation(S: TwoColourSpectrum, gammaR: float) -> float:
    """P_R = (Gamma_R / hbar) int S(delta, delta) d(delta) / (2 pi hbar)."""
    if gammaR == 0:
        return 0.0
    return max(0.0, gammaR / HBAR * S.diagonal_integral())
