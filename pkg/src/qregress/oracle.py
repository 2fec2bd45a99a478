"""Brute-force system-bath dilations used as ground truth.

Decay: the qubit plus ``N`` discrete bath modes restricted to the
0/1-excitation sector, ordered ``[|g,0>, |e,0>, |g,1_1>, ..., |g,1_N>]``.
In the frame that removes ``w0/2`` from every single-excitation
amplitude, the sector Hamiltonian is ``K = [[0, g^T], [g^*, diag(w_q - w0)]]``
and Schrodinger amplitudes follow as ``exp(-i w0 t/2)`` times the frame
amplitudes, while ``|g,0>`` carries ``exp(+i w0 t/2)``.

Dephasing: per-mode displacement algebra for the thermal bath and direct
unitary evolution per photon frequency for the engineered model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import solve_ivp

from .errors import SectorLeakageError, StepSizeError
from .models import DecayMap
from .qalg import P_DOWN, P_UP, SM, SP
from .spectral import EngineeredDistribution, LorentzianBath, OhmicBath, engineered_fsq

__all__ = [
    "DiscretizedBath", "DilationState", "PQTerms", "DecayDilation", "DiscreteAmplitude",
    "discretize", "evolve_decay", "oracle_tpcf_decay", "pq_decomposition",
    "unitary_coefficients", "oracle_tpcf_dephasing", "dephasing_modes_tpcf", "oracle_tpcf_engineered",
    "recurrence_horizon",
]

LEAKAGE_TOL = 1e-8


@dataclass(frozen=True)
class DiscretizedBath:
    """Discrete modes ``(omega_k, g_k)`` standing in for a continuum.

    Attributes
    ----------
    omega : ndarray
    g : ndarray
        Complex couplings with ``|g_k|^2 = J(omega_k) w_k``.
    scheme : str
        ``"midpoint"`` or ``"gauss"``.
    window : (float, float)
    omega0 : float
        Qubit frequency (decay baths only; 0 otherwise).
    metadata : dict
        Includes ``missing_mass_fraction`` and, if above 1%, a ``warning``.
    """

    omega: np.ndarray
    g: np.ndarray
    scheme: str
    window: tuple
    omega0: float = 0.0
    metadata: dict = field(default_factory=dict)

    @property
    def n_modes(self) -> int:
        return len(self.omega)


def recurrence_horizon(db: DiscretizedBath) -> float:
    """Half the recurrence time ``2 pi / d_omega`` of a uniform midpoint grid."""
    if db.n_modes < 2:
        return math.inf
    dw = (db.window[1] - db.window[0]) / db.n_modes
    return 0.5 * 2 * math.pi / dw


def _default_window(bath) -> tuple:
    if isinstance(bath, LorentzianBath):
        return (bath.center - 80 * bath.lam, bath.center + 80 * bath.lam)
    if isinstance(bath, OhmicBath):
        return (0.0, 1000.0)
    raise TypeError("unsupported bath type")


def discretize(bath, N: int, window: Optional[tuple] = None, scheme: str = "midpoint",
               order: int = 16) -> DiscretizedBath:
    """Discretise a spectral density into ``N`` modes.

    Parameters
    ----------
    bath : LorentzianBath or OhmicBath
    N : int
        Number of modes.
    window : (float, float), optional
        Defaults to the Lorentzian centre +/- 80 widths, or ``[0, 1000]``
        for the Ohmic bath.
    scheme : {"midpoint", "gauss"}
        Cell midpoints with ``|g_k|^2 = J(w_k) dw``, or Gauss-Legendre
        nodes of order ``order`` on ``N/order`` equal panels.

    Returns
    -------
    DiscretizedBath
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    lo, hi = window if window is not None else _default_window(bath)
    if not hi > lo:
        raise ValueError("window must satisfy lo < hi")
    if scheme == "midpoint":
        dw = (hi - lo) / N
        w = lo + dw * (np.arange(N) + 0.5)
        weights = np.full(N, dw)
    elif scheme == "gauss":
        if N % order:
            raise ValueError(f"gauss scheme needs N divisible by {order}")
        x, wq = np.polynomial.legendre.leggauss(order)
        edges = np.linspace(lo, hi, N // order + 1)
        half = 0.5 * np.diff(edges)
        mid = 0.5 * (edges[1:] + edges[:-1])
        w = (mid[:, None] + half[:, None] * x[None, :]).ravel()
        weights = (half[:, None] * wq[None, :]).ravel()
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    g = np.sqrt(bath.J(w) * weights).astype(complex)
    meta = {"n_modes": N, "scheme": scheme, "window": (float(lo), float(hi))}
    if isinstance(bath, LorentzianBath):
        total = bath.total_mass
        missing = 1.0 - bath.mass(lo, hi) / total if total > 0 else 0.0
        meta["missing_mass_fraction"] = missing
        meta["discrete_mass_error"] = (
            float(np.sum(np.abs(g) ** 2) / bath.mass(lo, hi) - 1) if total > 0 else 0.0)
        if missing > 0.01:
            meta["warning"] = f"window misses {100 * missing:.2f}% of the spectral mass"
        omega0 = bath.omega0
    else:
        omega0 = 0.0
    if scheme == "midpoint" and N >= 2:
        meta["recurrence_horizon"] = 0.5 * 2 * math.pi / ((hi - lo) / N)
    return DiscretizedBath(w, g, scheme, (float(lo), float(hi)), float(omega0), meta)


@dataclass(frozen=True)
class DilationState:
    """Schrodinger-picture amplitudes in the 0/1-excitation sector."""

    c0: complex
    c1: complex
    lam: np.ndarray

    @classmethod
    def excited(cls, n_modes: int) -> "DilationState":
        return cls(0j, 1 + 0j, np.zeros(n_modes, dtype=complex))

    @classmethod
    def from_vector(cls, v: np.ndarray) -> "DilationState":
        return cls(complex(v[0]), complex(v[1]), np.array(v[2:], dtype=complex))

    def vector(self) -> np.ndarray:
        return np.concatenate([[self.c0, self.c1], self.lam]).astype(complex)

    def norm2(self) -> float:
        return float(abs(self.c0) ** 2 + abs(self.c1) ** 2 + np.sum(np.abs(self.lam) ** 2))


class DecayDilation:
    """Exact single-excitation propagator of the decay dilation.

    Parameters
    ----------
    db : DiscretizedBath
    omega0 : float, optional
        Defaults to ``db.omega0``.
    """

    def __init__(self, db: DiscretizedBath, omega0: Optional[float] = None):
        self.db = db
        self.omega0 = float(db.omega0 if omega0 is None else omega0)
        n = db.n_modes
        K = np.zeros((n + 1, n + 1), dtype=complex)
        K[0, 1:] = db.g
        K[1:, 0] = np.conj(db.g)
        K[np.arange(1, n + 1), np.arange(1, n + 1)] = db.omega - self.omega0
        self.K = K
        self.energies, self.vectors = np.linalg.eigh(K)

    @property
    def dim(self) -> int:
        return self.db.n_modes + 2

    def frame_propagator(self, t: float) -> np.ndarray:
        """``exp(-i K t)`` on the single-excitation block."""
        V = self.vectors
        return (V * np.exp(-1j * self.energies * t)) @ V.conj().T

    def propagator(self, t: float) -> np.ndarray:
        """Full sector propagator ``U(t)`` in the Schrodinger picture."""
        U = np.zeros((self.dim, self.dim), dtype=complex)
        U[0, 0] = np.exp(0.5j * self.omega0 * t)
        U[1:, 1:] = np.exp(-0.5j * self.omega0 * t) * self.frame_propagator(t)
        return U

    def evolve(self, v: np.ndarray, t: float) -> np.ndarray:
        """Apply ``U(t)`` to a sector vector via the eigenbasis."""
        v = np.asarray(v, dtype=complex)
        out = np.empty_like(v)
        out[0] = np.exp(0.5j * self.omega0 * t) * v[0]
        V = self.vectors
        out[1:] = np.exp(-0.5j * self.omega0 * t) * (V @ (np.exp(-1j * self.energies * t) * (V.conj().T @ v[1:])))
        return out

    def evolve_ode(self, v: np.ndarray, t: float, rtol: float = 1e-10, atol: float = 1e-12) -> np.ndarray:
        """Apply ``U(t)`` by integrating the frame equations with RK45."""
        v = np.asarray(v, dtype=complex)
        out = np.empty_like(v)
        out[0] = np.exp(0.5j * self.omega0 * t) * v[0]
        if t == 0:
            out[1:] = v[1:]
            return out
        K = self.K
        sol = solve_ivp(lambda _, y: -1j * (K @ y), (0.0, t), v[1:], method="RK45",
                        rtol=rtol, atol=atol)
        if sol.status != 0:
            raise StepSizeError(f"ODE integration failed: {sol.message}")
        out[1:] = np.exp(-0.5j * self.omega0 * t) * sol.y[:, -1]
        return out

    def amplitude(self) -> "DiscreteAmplitude":
        return DiscreteAmplitude(self)

    def reduced_map(self) -> DecayMap:
        """Reduced decay map built from this dilation's own amplitude."""
        return DecayMap(self.omega0, self.amplitude())


class DiscreteAmplitude:
    """``G(t) = <e,0| exp(-i K t) |e,0>`` of a finite dilation."""

    def __init__(self, dil: DecayDilation):
        self._w = np.abs(dil.vectors[0, :]) ** 2
        self._e = dil.energies

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return np.exp(-1j * np.multiply.outer(t, self._e)) @ self._w

    def derivative(self, t):
        t = np.asarray(t, dtype=float)
        return np.exp(-1j * np.multiply.outer(t, self._e)) @ (-1j * self._e * self._w)

    def first_zero_below(self, floor, t):
        return None


def evolve_decay(db: DiscretizedBath, psi0: DilationState, t: float,
                 method: str = "ode") -> DilationState:
    """Evolve a sector state for time ``t``.

    ``method="ode"`` integrates the frame equations with an adaptive
    4th/5th-order scheme (rtol 1e-10, atol 1e-12); ``method="eig"`` uses
    the exact eigen-decomposition.
    """
    dil = DecayDilation(db)
    v = psi0.vector()
    if method == "ode":
        return DilationState.from_vector(dil.evolve_ode(v, t))
    if method == "eig":
        return DilationState.from_vector(dil.evolve(v, t))
    raise ValueError(f"unknown method {method!r}")


def unitary_coefficients(db: DiscretizedBath, t: float) -> dict:
    """Full frame propagator reconstructed from ``c1(t)`` and ``lam_q(t)`` alone.

    Unitarity and ``[U, K] = 0`` give, with ``nu_q = w_q - w0``,

    * ``mu_q = (g_q / g_q^*) lam_q``  (amplitude ``|1_q> -> |e>``),
    * ``c[q, p] = g_p (g_q^* lam_p / g_p^* - lam_q) / (w_p - w_q)`` for ``q != p``,
    * ``c[q, q] = c1 + (nu_q lam_q - sum_{p != q} c[q, p] g_p^*) / g_q^*``.

    Modes must have distinct frequencies and nonzero couplings.
    """
    dil = DecayDilation(db)
    U = dil.frame_propagator(t)
    c1 = U[0, 0]
    lam = U[1:, 0]
    g = db.g
    w = db.omega
    nu = w - dil.omega0
    mu = g / np.conj(g) * lam
    num = g[None, :] * (np.conj(g)[:, None] * lam[None, :] / np.conj(g)[None, :] - lam[:, None])
    den = w[None, :] - w[:, None]
    np.fill_diagonal(den, 1.0)
    c = num / den
    np.fill_diagonal(c, 0.0)
    diag = c1 + (nu * lam - c @ np.conj(g)) / np.conj(g)
    c[np.arange(len(g)), np.arange(len(g))] = diag
    full = np.empty_like(U)
    full[0, 0] = c1
    full[1:, 0] = lam
    full[0, 1:] = mu
    full[1:, 1:] = c
    return {"c1": c1, "lam": lam, "mu": mu, "c": c, "matrix": full}


# -- sector operators ---------------------------------------------------------------

def _system_vector(rho_or_psi) -> np.ndarray:
    """Sector vector of a pure system state (index 0 excited) times vacuum."""
    psi = np.asarray(rho_or_psi, dtype=complex)
    if psi.shape != (2,):
        raise ValueError("expected a 2-component system state vector")
    v = np.zeros(2, dtype=complex)
    v[1] = psi[0]  # excited
    v[0] = psi[1]  # ground
    return v


def _apply_system_op(o: np.ndarray, v: np.ndarray, check_leak: bool) -> np.ndarray:
    """``(o x 1) v`` restricted to the sector; raising photon states leaves it."""
    o = np.asarray(o, dtype=complex)
    out = np.zeros_like(v)
    # system basis (e, g) <-> sector (1, 0)
    out[1] = o[0, 0] * v[1] + o[0, 1] * v[0]
    out[0] = o[1, 0] * v[1] + o[1, 1] * v[0]
    out[2:] = o[1, 1] * v[2:]
    if check_leak:
        leak = abs(o[0, 1]) ** 2 * float(np.sum(np.abs(v[2:]) ** 2))
        if leak > LEAKAGE_TOL:
            raise SectorLeakageError(f"operator drives {leak:.3e} population out of the sector")
    return out


def _sector_op_matrix(o: np.ndarray, dim: int) -> np.ndarray:
    o = np.asarray(o, dtype=complex)
    M = np.zeros((dim, dim), dtype=complex)
    M[1, 1], M[1, 0], M[0, 1], M[0, 0] = o[0, 0], o[0, 1], o[1, 0], o[1, 1]
    idx = np.arange(2, dim)
    M[idx, idx] = o[1, 1]
    return M


def oracle_tpcf_decay(db: DiscretizedBath, t1: float, t2: float, o1=SM, o2=SP,
                      psi0=None, method: str = "eig", dilation: Optional[DecayDilation] = None) -> complex:
    """Exact ``<o2(t2) o1(t1)>`` from three state propagations.

    ``<psi(t2)| o2 U(t2 - t1) o1 |psi(t1)>`` with ``psi(t) = U(t) psi0``;
    no reduced-map assumption is used.

    Parameters
    ----------
    db : DiscretizedBath
    t1, t2 : float
        Earlier and later time.
    o1, o2 : (2, 2) arrays
        ``o1`` must not raise photon-carrying components (leakage check).
    psi0 : (2,) array, optional
        Pure system state (index 0 excited); defaults to the excited state.
    method : {"eig", "ode"}
    """
    if t2 < t1:
        raise ValueError("t2 must be >= t1")
    dil = dilation or DecayDilation(db)
    prop = dil.evolve if method == "eig" else dil.evolve_ode
    v0 = np.zeros(dil.dim, dtype=complex)
    v0[:2] = _system_vector(np.array([1, 0]) if psi0 is None else psi0)
    a = prop(v0, t1)
    b = prop(v0, t2)
    x = _apply_system_op(o1, a, check_leak=True)
    x = prop(x, t2 - t1)
    x = _apply_system_op(o2, x, check_leak=False)
    return complex(np.vdot(b, x))


@dataclass(frozen=True)
class PQTerms:
    """Eight contributions keyed by ``(X3, X2, X1)`` with each ``X`` in ``{"P", "Q"}``.

    ``X1`` acts on the initial state, ``X2`` at ``t1`` before ``o1``, and
    ``X3`` at ``t2`` before the final partial trace.
    """

    terms: dict

    def __getitem__(self, key):
        if isinstance(key, str):
            key = tuple(key)
        return self.terms[key]

    def total(self) -> complex:
        return complex(sum(self.terms.values()))


def _P(X: np.ndarray) -> np.ndarray:
    out = np.zeros_like(X)
    out[1, 1] = X[1, 1]
    out[1, 0] = X[1, 0]
    out[0, 1] = X[0, 1]
    out[0, 0] = X[0, 0] + np.trace(X[2:, 2:])
    return out


def _reduced(X: np.ndarray) -> np.ndarray:
    """System operator ``Tr_E X`` in the (excited, ground) basis."""
    P = _P(X)
    return np.array([[P[1, 1], P[1, 0]], [P[0, 1], P[0, 0]]])


def pq_decomposition(db: DiscretizedBath, t1: float, t2: float, o1=SM, o2=SP,
                     psi0=None, dilation: Optional[DecayDilation] = None) -> PQTerms:
    """Split the exact two-point correlator into its eight P/Q terms.

    ``P[X] = Tr_E[X] x |vac><vac|`` and ``Q = 1 - P``; the term
    ``(X3, X2, X1)`` is ``Tr_S[o2 Tr_E[X3 S_{t1}^{t2}[o1 X2 S_0^{t1}[X1 rho0]]]]``.

    Raises
    ------
    SectorLeakageError
        If ``o1`` would move more than 1e-8 population out of the sector.
    """
    if t2 < t1:
        raise ValueError("t2 must be >= t1")
    dil = dilation or DecayDilation(db)
    dim = dil.dim
    v0 = np.zeros(dim, dtype=complex)
    v0[:2] = _system_vector(np.array([1, 0]) if psi0 is None else psi0)
    rho0 = np.outer(v0, v0.conj())
    U1 = dil.propagator(t1)
    U2 = dil.propagator(t2 - t1)
    O1 = _sector_op_matrix(o1, dim)
    o2 = np.asarray(o2, dtype=complex)
    o1 = np.asarray(o1, dtype=complex)

    def split(X):
        p = _P(X)
        return {"P": p, "Q": X - p}

    terms = {}
    for k1, Y1 in split(rho0).items():
        Z1 = U1 @ Y1 @ U1.conj().T
        for k2, Y2 in split(Z1).items():
            if abs(o1[0, 1]) > 0:
                leak = abs(o1[0, 1]) * float(np.linalg.norm(Y2[2:, :]))
                if leak > LEAKAGE_TOL:
                    raise SectorLeakageError(f"operator drives {leak:.3e} weight out of the sector")
            Z2 = U2 @ (O1 @ Y2) @ U2.conj().T
            for k3, Y3 in split(Z2).items():
                terms[(k3, k2, k1)] = complex(np.trace(o2 @ _reduced(Y3)))
    return PQTerms(terms)


# -- dephasing oracles -------------------------------------------------------------

_SIGNS = (1, -1)
_PROJ = {1: P_UP, -1: P_DOWN}


def oracle_tpcf_dephasing(bath: OhmicBath, N: int, o1, o2, t1: float, t2: float, rho0,
                          window: tuple = (0.0, 1000.0), order: int = 16) -> complex:
    """Exact ``<o2(t2) o1(t1)>`` for thermal dephasing from discrete modes.

    Each mode contributes the displacement characteristic factor
    ``exp(i Im(u v^*) - |u + v|^2 coth(beta w/2) / 2)`` with
    ``u = (b - d) alpha(t2)``, ``v = (a - b) alpha(t1)`` and
    ``alpha(t) = g (1 - exp(i w t)) / w``; the factors multiply and weight
    ``Tr[P_d o2 P_b o1 P_a rho0]``.

    Parameters
    ----------
    bath : OhmicBath
    N : int
        Mode count (Gauss-Legendre nodes, divisible by ``order``).
    t1, t2 : float
        Earlier and later time.
    """
    if t2 < t1:
        raise ValueError("t2 must be >= t1")
    db = discretize(bath, N, window, scheme="gauss", order=order)
    return dephasing_modes_tpcf(db.omega, db.g, bath.beta, o1, o2, t1, t2, rho0)


def dephasing_modes_tpcf(omega, g, beta: float, o1, o2, t1: float, t2: float, rho0) -> complex:
    """Product formula of :func:`oracle_tpcf_dephasing` for explicit modes.

    The coupling is ``sz (g^* b + g b^dag)`` per mode with the mode in a
    thermal state at inverse temperature ``beta`` (``inf`` for vacuum).
    """
    w = np.asarray(omega, dtype=float)
    g2 = np.abs(np.asarray(g)) ** 2
    c = np.ones_like(w) if np.isinf(beta) else 1.0 / np.tanh(0.5 * beta * w)
    aL = (1 - np.exp(1j * w * t2)) / w
    aE = (1 - np.exp(1j * w * t1)) / w
    o1 = np.asarray(o1, dtype=complex)
    o2 = np.asarray(o2, dtype=complex)
    rho0 = np.asarray(rho0, dtype=complex)
    total = 0j
    for a in _SIGNS:
        for b in _SIGNS:
            for d in _SIGNS:
                tr = np.trace(_PROJ[d] @ o2 @ _PROJ[b] @ o1 @ _PROJ[a] @ rho0)
                if tr == 0:
                    continue
                u = (b - d) * aL
                v = (a - b) * aE
                expo = np.sum(g2 * (1j * np.imag(u * np.conj(v)) - 0.5 * np.abs(u + v) ** 2 * c))
                total += np.exp(expo) * tr
    return complex(total)


def oracle_tpcf_engineered(dist: EngineeredDistribution, o1, o2, t1: float, t2: float, rho0,
                           n_modes: int = 4096) -> complex:
    """Exact ``<o2(t2) o1(t1)>`` by evolving the polarisation per photon frequency.

    For each frequency ``w`` the joint unitary acts on the polarisation as
    ``W(t) = diag(exp(i dn w t/2), exp(-i dn w t/2))``; the correlator
    ``Tr[o2 W(t2) W(t1)^dag o1 W(t1) rho0 W(t2)^dag]`` is averaged with
    weights ``|f(w)|^2 dw`` on Gauss-Legendre panels.
    """
    order = 16
    lo, hi = dist.window()
    x, wq = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(lo, hi, max(1, n_modes // order) + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    w = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    p = (half[:, None] * wq[None, :]).ravel() * engineered_fsq(dist, w)
    ph1 = 0.5 * dist.delta_n * w * t1
    ph2 = 0.5 * dist.delta_n * w * t2
    # diagonal unitaries as (n, 2) phase vectors
    W1 = np.stack([np.exp(1j * ph1), np.exp(-1j * ph1)], axis=-1)
    W2 = np.stack([np.exp(1j * ph2), np.exp(-1j * ph2)], axis=-1)
    o1 = np.asarray(o1, dtype=complex)
    o2 = np.asarray(o2, dtype=complex)
    rho0 = np.asarray(rho0, dtype=complex)
    # M = W2 W1^dag o1 W1 rho0 W2^dag, built entrywise
    A = (W2 * np.conj(W1))[:, :, None] * o1[None, :, :] * W1[:, None, :]
    B = np.einsum("nij,jk->nik", A, rho0) * np.conj(W2)[:, None, :]
    vals = np.einsum("ij,nji->n", o2, B)
    return complex(np.sum(p * vals))
