"""Lindblad dynamics of the emitter coupled to a truncated cavity mode.

The generator is built in the frame rotating at the emitter frequency, in
the polaron picture: the coherent coupling is renormalised to ``g*B`` and
phonon-induced dephasing enters through a pure-dephasing dissipator.  Time
is in ps, rates are given in ueV and converted with hbar.

Superoperators act on row-major flattened density matrices, so that
``vec(A X B) = kron(A, B.T) @ vec(X)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np
from scipy.linalg import expm

from .constants import HBAR
from .errors import PropagationError, TruncationError
from .photonic import DEFAULT_OMEGA_C

TRACE_TOL = 1e-10
HERM_TOL = 1e-12
POS_TOL = 1e-8


@dataclass(frozen=True)
class SystemConfig:
    omega_X: float = DEFAULT_OMEGA_C
    detuning: float = 0.0
    g: float = 0.0
    kappa: float = 0.0
    gammaB: float = 0.0
    gammaR: float = 0.0
    gamma_tot_pd: float = 0.0
    B: float = 1.0
    n_max: int = 2

    def __post_init__(self):
        for name in ("g", "kappa", "gammaB", "gammaR", "gamma_tot_pd"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if not 0 < self.B <= 1:
            raise ValueError("Franck-Condon factor must lie in (0, 1]")

    @property
    def emitter_decay(self) -> float:
        return self.gammaB + self.gammaR


def operators(n_max: int):
    """(sigma, a) on the emitter (x) cavity space; emitter index is the slow one."""
    if n_max < 1:
        raise TruncationError("cavity truncation needs n_max >= 1")
    nc = n_max + 1
    sm = np.array([[0.0, 1.0], [0.0, 0.0]])  # |g><e| with |g> = 0, |e> = 1
    a = np.diag(np.sqrt(np.arange(1, nc)), 1)
    return np.kron(sm, np.eye(nc)).astype(complex), np.kron(np.eye(2), a).astype(complex)


def basis_state(n_max: int, excited: bool, n: int = 0) -> np.ndarray:
    """Density matrix |e or g, n><e or g, n|."""
    nc = n_max + 1
    psi = np.zeros(2 * nc)
    psi[(1 if excited else 0) * nc + n] = 1.0
    return np.outer(psi, psi).astype(complex)


def _dissipator(L):
    d = L.shape[0]
    eye = np.eye(d)
    LdL = L.conj().T @ L
    return np.kron(L, L.conj()) - 0.5 * (np.kron(LdL, eye) + np.kron(eye, LdL.T))


def left_multiplication(A):
    """Superoperator X -> A X."""
    return np.kron(A, np.eye(A.shape[0]))


def trace_row(A):
    """Row vector r with r @ vec(X) == Tr[A X]."""
    return np.asarray(A).T.reshape(-1)


@dataclass(frozen=True, eq=False)
class Generator:
    """Lindblad superoperator (ps^-1) plus the operators it was built from."""

    matrix: np.ndarray
    sigma: np.ndarray
    a: np.ndarray
    config: SystemConfig

    @property
    def dim(self) -> int:
        return self.sigma.shape[0]

    def apply(self, rho):
        d = self.dim
        return (self.matrix @ np.asarray(rho).reshape(-1)).reshape(d, d)

    @cached_property
    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvals(self.matrix)

    def step(self, dt: float) -> np.ndarray:
        return expm(self.matrix * dt)


def build_generator(config: SystemConfig) -> Generator:
    """Master-equation generator with polaron-renormalised coupling g*B.

    Dissipators: D[sigma] at Gamma_B + Gamma_R, D[a] at kappa and
    D[sigma^dag sigma] at 2*gamma_tot (so coherences dephase at gamma_tot).
    """
    sigma, a = operators(config.n_max)
    d = sigma.shape[0]
    eye = np.eye(d)
    gB = config.g * config.B / HBAR
    H = -(config.detuning / HBAR) * (a.conj().T @ a) + gB * (a.conj().T @ sigma + a @ sigma.conj().T)
    L = -1j * (np.kron(H, eye) - np.kron(eye, H.T))
    if config.emitter_decay > 0:
        L = L + (config.emitter_decay / HBAR) * _dissipator(sigma)
    if config.kappa > 0:
        L = L + (config.kappa / HBAR) * _dissipator(a)
    if config.gamma_tot_pd > 0:
        L = L + (2.0 * config.gamma_tot_pd / HBAR) * _dissipator(sigma.conj().T @ sigma)
    return Generator(L, sigma, a, config)


def check_state(rho, trace_tol=TRACE_TOL, herm_tol=HERM_TOL, pos_tol=POS_TOL) -> None:
    """Raise PropagationError unless ``rho`` is a valid density matrix."""
    if not np.all(np.isfinite(rho)):
        raise PropagationError("non-finite density matrix")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > trace_tol:
        raise PropagationError(f"trace deviates from 1 by {abs(tr - 1.0):.2e}")
    if np.max(np.abs(rho - rho.conj().T)) > herm_tol:
        raise PropagationError("density matrix is not Hermitian")
    if np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min() < -pos_tol:
        raise PropagationError("density matrix has a negative eigenvalue")


def propagate(gen: Generator, rho0, t_grid, validate: bool = False) -> np.ndarray:
    """States at the times of ``t_grid`` (ps, ascending from 0), shape (n, d, d).

    Each step applies the exact propagator exp(L dt); propagators are cached
    per distinct step length.
    """
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size == 0 or t[0] != 0.0 or np.any(np.diff(t) < 0):
        raise ValueError("t_grid must be ascending and start at 0")
    d = gen.dim
    v = np.asarray(rho0, dtype=complex).reshape(-1)
    out = np.empty((t.size, d, d), dtype=complex)
    out[0] = v.reshape(d, d)
    cache: dict[float, np.ndarray] = {}
    for k in range(1, t.size):
        dt = t[k] - t[k - 1]
        key = round(dt, 15)
        if key not in cache:
            cache[key] = gen.step(dt)
        v = cache[key] @ v
        if not np.all(np.isfinite(v)):
            raise PropagationError(f"propagation failed at t = {t[k]:.6g} ps", time=t[k])
        out[k] = v.reshape(d, d)
        if validate:
            try:
                check_state(out[k])
            except PropagationError as exc:
                raise PropagationError(f"{exc} at t = {t[k]:.6g} ps", time=t[k]) from None
    return out


def excited_population(states: np.ndarray, gen: Generator) -> np.ndarray:
    n_e = gen.sigma.conj().T @ gen.sigma
    return np.einsum("ij,kji->k", n_e, states).real


@dataclass(frozen=True, eq=False)
class RegressionModel:
    """Everything needed to evaluate <sigma^dag(t) sigma(t')> in closed form.

    C(t' + tau, t') = u exp(L tau) S exp(L t') rho0 for tau >= 0, with u the
    trace row of sigma^dag and S left multiplication by sigma.
    """

    L: np.ndarray
    rho0: np.ndarray
    u: np.ndarray
    S: np.ndarray
    n_e: np.ndarray
    omega_X: float

    @classmethod
    def from_generator(cls, gen: Generator, rho0) -> "RegressionModel":
        sd = gen.sigma.conj().T
        return cls(gen.matrix, np.asarray(rho0, dtype=complex).reshape(-1), trace_row(sd),
                   left_multiplication(gen.sigma), trace_row(sd @ gen.sigma), gen.config.omega_X)

    @cached_property
    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvals(self.L)

    @cached_property
    def stationary_projector(self) -> np.ndarray:
        """Spectral projector onto the kernel of L (semisimple for a Lindbladian)."""
        U, s, Vh = np.linalg.svd(self.L)
        tol = 1e-10 * max(s[0], 1e-300)
        R = Vh[s <= tol].conj().T
        Ul, sl, Vlh = np.linalg.svd(self.L.conj().T)
        Lv = Vlh[sl <= tol].conj().T
        if R.shape[1] == 0:
            return np.zeros_like(self.L)
        return R @ np.linalg.solve(Lv.conj().T @ R, Lv.conj().T)


@dataclass(frozen=True, eq=False)
class TwoTimeCorrelator:
    """<sigma^dag(t) sigma(t')> on a square grid, in the frame rotating at omega_X.

    Dressed correlators carry the zero-phonon and sideband parts separately
    (``zpl + psb == values``) together with the phonon table that produced
    them; ``model`` allows closed-form transforms.
    """

    t: np.ndarray
    values: np.ndarray
    omega_X: float
    model: RegressionModel | None = None
    B: float = 1.0
    phonons: object | None = None
    zpl: np.ndarray | None = None
    psb: np.ndarray | None = None

    @property
    def dressed(self) -> bool:
        return self.phonons is not None

    def lab_frame(self) -> np.ndarray:
        """Values including the optical phase exp(i omega_X (t - t') / hbar)."""
        tau = self.t[:, None] - self.t[None, :]
        return self.values * np.exp(1j * self.omega_X * tau / HBAR)

    def populations(self) -> np.ndarray:
        return np.diag(self.values).real

    def to_csv(self, path) -> None:
        """Rows (t_ps, tprime_ps, re, im)."""
        tt, tp = np.meshgrid(self.t, self.t, indexing="ij")
        data = np.column_stack([tt.ravel(), tp.ravel(), self.values.real.ravel(), self.values.imag.ravel()])
        np.savetxt(path, data, delimiter=",", fmt="%.12g", header="t_ps,tprime_ps,re,im", comments="")


def _uniform(t) -> float:
    dt = np.diff(t)
    if t.size > 1 and np.max(np.abs(dt - dt[0])) > 1e-9 * max(dt[0], 1e-300):
        raise ValueError("correlator tabulation needs a uniform time grid")
    return float(dt[0]) if t.size > 1 else 0.0


def regression_correlator(gen: Generator, rho0, t_grid, tau_grid=None) -> TwoTimeCorrelator:
    """Tabulate <sigma^dag(t_i) sigma(t_j)> by the quantum regression theorem.

    For t_i >= t_j the operator sigma rho(t_j) is propagated by t_i - t_j and
    traced against sigma^dag; the other triangle follows from
    C(t, t') = C(t', t)*.

    ``tau_grid`` (delays, same step as ``t_grid``, starting at 0) extends the
    square table so that every delay is available from every t in ``t_grid``.
    """
    t = np.asarray(t_grid, dtype=float)
    dt = _uniform(t)
    if tau_grid is not None:
        tau = np.asarray(tau_grid, dtype=float)
        dtau = _uniform(tau)
        if tau.size == 0 or tau[0] != 0.0:
            raise ValueError("tau_grid must start at 0")
        if tau.size > 1 and t.size > 1 and abs(dtau - dt) > 1e-9 * dt:
            raise ValueError("tau_grid and t_grid need the same step")
        step = dt or dtau
        extra = int(round(tau[-1] / step)) if step else 0
        if extra:
            t = np.concatenate([t, t[-1] + step * np.arange(1, extra + 1)])
            dt = step
    model = RegressionModel.from_generator(gen, rho0)
    states = propagate(gen, rho0, t)
    d2 = gen.dim**2
    W = model.S @ states.reshape(t.size, d2).T  # columns sigma rho(t_j)
    n = t.size
    C = np.zeros((n, n), dtype=complex)
    E = gen.step(dt) if n > 1 else np.eye(d2)
    for k in range(n):
        vals = model.u @ W[:, : n - k]
        idx = np.arange(n - k)
        C[idx + k, idx] = vals
        W = E @ W[:, : n - k - 1] if k < n - 1 else W
    lower = np.tril(C, -1)
    C = lower + lower.conj().T + np.diag(np.diag(C).real)
    return TwoTimeCorrelator(t, C, gen.config.omega_X, model)


def dress_with_phonons(C: TwoTimeCorrelator, phonons) -> TwoTimeCorrelator:
    """Multiply by B^2 exp(phi(t - t')) and tag the ZPL (B^2 C) and PSB parts.

    ``phonons`` is a PhononEnvironment or a precomputed PhononCorrelation.
    """
    from .phonons import PhononCorrelation, PhononEnvironment, phonon_correlation_table

    if isinstance(phonons, PhononEnvironment):
        phonons = phonon_correlation_table(phonons)
    if not isinstance(phonons, PhononCorrelation):
        raise TypeError("expected a PhononEnvironment or PhononCorrelation")
    B2 = phonons.B**2
    tau = C.t[:, None] - C.t[None, :]
    phi = phonons(tau)
    zpl = B2 * C.values
    psb = B2 * np.expm1(phi) * C.values
    return replace(C, values=zpl + psb, B=phonons.B, phonons=phonons, zpl=zpl, psb=psb)
