"""Exactly solvable qubit models: amplitudes, rates, maps and exact correlators.

Phase convention
----------------
Everything is in the Schrodinger picture with ``H_S = (w0/2) sz``.  The
excited amplitude of the decay model is ``c1(t) = exp(-i w0 t/2) G(t)``
and the ground amplitude ``c0(t) = exp(+i w0 t/2)``, so the coherence
``|e><g|`` of the reduced state picks up ``exp(-i w0 t) G(t)``.  Exact
and map-built correlators both use this convention.

Two-time correlators are written ``<o2(t2) o1(t1)>`` with ``t1`` the
earlier and ``t2`` the later time.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.interpolate import CubicHermiteSpline
from scipy.optimize import minimize_scalar

from .errors import InstabilityError, MapSingularityError, SingularRateError
from .qalg import (P_DOWN, P_UP, SZ, DampingBasis, MapFactors, apply_map,
                   decay_operator_basis, dephasing_operator_basis,
                   engineered_operator_basis)
from .quadrature import DEFAULT_SPEC, QuadratureSpec
from .spectral import (EngineeredDistribution, LorentzianBath, OhmicBath,
                       bath_corr_f_closed, dephasing_g, dephasing_g_rate,
                       dephasing_h, engineered_g, engineered_g_derivative)

__all__ = [
    "DecayAmplitude", "ClosedAmplitude", "DecayRates",
    "closed_G_lorentzian", "closed_G_derivative", "solve_G_volterra",
    "decay_rates", "decay_damping_basis",
    "ModelMap", "DecayMap", "ThermalDephasingMap", "EngineeredDephasingMap",
    "GKSLDephasingMap", "model_map", "build_model",
    "exact_tpcf_decay", "exact_tpcf_dephasing", "exact_tpcf_engineered",
    "dephasing_weights", "SINGULAR_FLOOR", "RATE_FLOOR",
]

SINGULAR_FLOOR = 1e-12
RATE_FLOOR = 1e-8

DECAY_BASIS = DampingBasis.from_operators(decay_operator_basis(), name="decay")
DEPHASING_BASIS = DampingBasis.from_operators(dephasing_operator_basis(), name="dephasing")
ENGINEERED_BASIS = DampingBasis.from_operators(engineered_operator_basis(), name="engineered")


# -- decay amplitude -----------------------------------------------------------

def _shc(x):
    """``sinh(x)/x`` with a Taylor branch near zero."""
    x = np.asarray(x, dtype=complex)
    small = np.abs(x) < 1e-4
    safe = np.where(small, 1.0, x)
    x2 = x * x
    return np.where(small, 1 + x2 / 6 + x2 * x2 / 120, np.sinh(safe) / safe)


def _decay_constants(bath: LorentzianBath):
    a = bath.lam - 1j * bath.delta
    k = 0.5 * bath.gamma0 * bath.lam
    d = np.sqrt(a * a - 4 * k)
    return a, k, d


def closed_G_lorentzian(bath: LorentzianBath, t):
    """Closed-form excited amplitude ``G(t)`` for the Lorentzian bath.

    With ``a = lam - i Delta`` and ``d = sqrt(a^2 - 2 g0 lam)``,
    ``G = exp(-a t/2) [cosh(d t/2) + (a t/2) sinh(d t/2)/(d t/2)]``.
    The ``sinh(x)/x`` form removes the confluent ``d = 0`` singularity.
    """
    a, _, d = _decay_constants(bath)
    t = np.asarray(t, dtype=float)
    x = 0.5 * d * t
    return np.exp(-0.5 * a * t) * (np.cosh(x) + 0.5 * a * t * _shc(x))


def closed_G_derivative(bath: LorentzianBath, t):
    """``dG/dt = -k t exp(-a t/2) sinh(d t/2)/(d t/2)`` with ``k = g0 lam / 2``."""
    a, k, d = _decay_constants(bath)
    t = np.asarray(t, dtype=float)
    return -k * t * np.exp(-0.5 * a * t) * _shc(0.5 * d * t)


@dataclass(frozen=True)
class ClosedAmplitude:
    """Analytic amplitude source for a Lorentzian bath."""

    bath: LorentzianBath

    def __call__(self, t):
        return closed_G_lorentzian(self.bath, t)

    def derivative(self, t):
        return closed_G_derivative(self.bath, t)

    def first_zero_below(self, floor: float, t: float) -> Optional[float]:
        return None


@dataclass(frozen=True)
class DecayAmplitude:
    """Sampled amplitude ``G(t)`` on a uniform grid.

    Attributes
    ----------
    dt : float
        Grid step.
    t : ndarray
        Grid ``0, dt, ..., t_max``.
    G : ndarray
        Amplitude samples, ``G[0] = 1``.
    derivative_samples : ndarray
        ``dG/dt`` samples.
    """

    dt: float
    t: np.ndarray
    G: np.ndarray
    derivative_samples: np.ndarray
    _spline: CubicHermiteSpline = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_spline",
                           CubicHermiteSpline(self.t, self.G, self.derivative_samples))

    def _check(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < -1e-12) or np.any(t > self.t[-1] + 1e-12):
            raise ValueError(f"time outside the solved grid [0, {self.t[-1]}]")
        return np.clip(t, 0.0, self.t[-1])

    def __call__(self, t):
        return self._spline(self._check(t))

    def derivative(self, t):
        return self._spline(self._check(t), 1)

    def first_zero_below(self, floor: float, t: float) -> Optional[float]:
        """First grid time ``<= t`` with ``|G| <= floor``, if any."""
        mask = (self.t <= t + 1e-12) & (np.abs(self.G) <= floor)
        return float(self.t[np.argmax(mask)]) if np.any(mask) else None


def _volterra_run(fk: np.ndarray, dt: float, n: int, guard: float):
    """Trapezoid convolution with an implicit trapezoid step.

    The corrector equation is linear in ``G[n+1]`` and is solved exactly.
    Returns the amplitude and the memory integral ``I = -dG/dt``.
    """
    G = np.empty(n + 1, dtype=complex)
    I = np.empty(n + 1, dtype=complex)
    G[0] = 1.0
    I[0] = 0.0
    f0 = fk[0]
    denom = 1.0 + 0.25 * dt * dt * f0
    for m in range(n):
        # S = dt*(f_{m+1} G_0 / 2 + sum_{j=1}^{m} f_{m+1-j} G_j)
        s = 0.5 * fk[m + 1] * G[0]
        if m:
            s += np.dot(fk[m:0:-1], G[1:m + 1])
        s *= dt
        g_next = (G[m] - 0.5 * dt * (I[m] + s)) / denom
        G[m + 1] = g_next
        I[m + 1] = s + 0.5 * dt * f0 * g_next
        if abs(g_next) > guard:
            raise InstabilityError(
                f"Volterra solver unstable: |G| = {abs(g_next):.6f} at t = {(m + 1) * dt:.6g}")
    return G, I


def solve_G_volterra(bath: LorentzianBath, t_max: float, dt: float = 1e-3, kernel=None,
                     richardson: bool = True, check_step: bool = True) -> DecayAmplitude:
    """Solve ``dG/dt = -int_0^t f(t - s) G(s) ds`` with ``G(0) = 1``.

    Parameters
    ----------
    bath : LorentzianBath
    t_max : float
    dt : float
        Output grid step.
    kernel : callable, optional
        ``f(t)`` on arrays; defaults to the closed-form Lorentzian kernel.
    richardson : bool
        Combine runs at ``dt`` and ``dt/2`` to cancel the leading
        ``O(dt^2)`` error.
    check_step : bool
        Enforce ``dt <= min(1/lam, 1/sqrt(g0 lam))/50``.

    Returns
    -------
    DecayAmplitude

    Raises
    ------
    InstabilityError
        If the step bound is violated or ``|G|`` exceeds ``1 + 1e-6``.
    """
    if dt <= 0 or t_max <= 0:
        raise ValueError("dt and t_max must be positive")
    scale = 1.0 / bath.lam
    if bath.gamma0 > 0:
        scale = min(scale, 1.0 / np.sqrt(bath.gamma0 * bath.lam))
    if check_step and dt > scale / 50 * (1 + 1e-12):
        raise InstabilityError(
            f"dt = {dt} exceeds the stability bound {scale / 50:.3e}")
    if kernel is None:
        def kernel(t):
            return bath_corr_f_closed(bath, t)
    n = int(round(t_max / dt))
    grid = dt * np.arange(n + 1)
    guard = 1.0 + 1e-6
    fk = np.asarray(kernel(grid), dtype=complex)
    G, I = _volterra_run(fk, dt, n, guard)
    if richardson:
        h = 0.5 * dt
        fh = np.asarray(kernel(h * np.arange(2 * n + 1)), dtype=complex)
        Gh, Ih = _volterra_run(fh, h, 2 * n, guard)
        G = (4 * Gh[::2] - G) / 3
        I = (4 * Ih[::2] - I) / 3
    return DecayAmplitude(dt, grid, G, -I)


# -- rates and damping basis ----------------------------------------------------

@dataclass(frozen=True)
class DecayRates:
    """Time-local rates ``gamma(t) + i S(t) = -2 G'(t)/G(t)``."""

    amplitude: object
    omega0: float
    rate_floor: float = RATE_FLOOR

    def complex_rate(self, t):
        G = self.amplitude(t)
        if np.any(np.abs(G) <= self.rate_floor):
            tmax = float(np.max(t))
            t0 = self.amplitude.first_zero_below(self.rate_floor, tmax)
            if t0 is None:
                tt = np.atleast_1d(np.asarray(t, dtype=float))
                t0 = float(tt[np.argmax(np.abs(np.atleast_1d(G)) <= self.rate_floor)])
            raise SingularRateError(
                f"|G| fell below the rate floor {self.rate_floor:g} at t = {t0:.6g}", t=t0)
        return -2.0 * self.amplitude.derivative(t) / G

    def gamma(self, t):
        return np.real(self.complex_rate(t))

    def S(self, t):
        return np.imag(self.complex_rate(t))


def decay_rates(A, t, rate_floor: float = RATE_FLOOR):
    """Return ``(gamma(t), S(t))`` from an amplitude source.

    Raises
    ------
    SingularRateError
        If ``|G(t)| <= rate_floor``; the error names the first crossing time.
    """
    r = DecayRates(A, 0.0, rate_floor).complex_rate(t)
    return np.real(r), np.imag(r)


def decay_damping_basis(rates: DecayRates) -> DampingBasis:
    """Damping basis of the decay generator with its eigenvalue functions.

    ``lambda_0 = 0``, ``lambda_1 = -i(w0 + S/2) - gamma/2``,
    ``lambda_2 = conj(lambda_1)``, ``lambda_3 = -gamma``.  Integrals are
    taken from the amplitude: ``exp(L_1) = exp(-i w0 dt) G(t2)/G(t1)`` and
    ``exp(L_3) = |G(t2)/G(t1)|^2``.
    """
    w0 = rates.omega0
    A = rates.amplitude

    def eig(i, t):
        if i == 0:
            return 0j
        r = rates.complex_rate(t)
        l1 = -1j * w0 - 0.5 * r
        return {1: l1, 2: np.conj(l1), 3: -np.real(r) + 0j}[i]

    def integral(i, t1, t2):
        if i == 0:
            return 0j
        g1, g2 = A(t1), A(t2)
        if abs(g1) <= rates.rate_floor:
            raise SingularRateError(f"|G| below the rate floor at t = {t1:.6g}", t=t1)
        l1 = -1j * w0 * (t2 - t1) + np.log(g2 / g1)
        return {1: l1, 2: np.conj(l1), 3: 2 * np.log(abs(g2 / g1)) + 0j}[i]

    return DampingBasis(DECAY_BASIS.basis, DECAY_BASIS.duals, eig, integral, "decay")


# -- model maps -------------------------------------------------------------------

class ModelMap:
    """A family of reduced maps diagonal in a fixed damping basis.

    Subclasses provide ``scales(t)``, the factors of ``Phi_0^t``, and
    ``log_rates(t)``, the generator eigenvalues ``d/dt log scales``.
    """

    kind: str = ""
    basis: DampingBasis

    def scales(self, t) -> np.ndarray:
        raise NotImplementedError

    def log_rates(self, t) -> np.ndarray:
        raise NotImplementedError

    def from_zero(self, t) -> MapFactors:
        """``Phi_0^t``."""
        return MapFactors(self.basis, self.scales(t))

    def reference(self, t1: float, t2: float) -> MapFactors:
        """Reference-state propagator over ``[t1, t2]``, equal to ``Phi_0^{t2 - t1}``.

        For a time-independent total Hamiltonian this is the exact meaning
        of ``Tr_E U(t2, t1) [X x rho_E] U^dag(t2, t1)``.
        """
        if t2 < t1:
            raise ValueError("t2 must be >= t1")
        return MapFactors(self.basis, self.scales(t2 - t1))

    def factors(self, t1: float, t2: float) -> MapFactors:
        """Composed two-time map ``Phi_0^{t2} o (Phi_0^{t1})^{-1}``.

        Raises
        ------
        MapSingularityError
            If a factor of ``Phi_0^{t1}`` has modulus below 1e-12.
        """
        if t2 < t1:
            raise ValueError("t2 must be >= t1")
        if t1 == t2:
            return MapFactors(self.basis, np.ones(4))
        s1 = self.scales(t1)
        small = np.abs(s1) < SINGULAR_FLOOR
        if np.any(small):
            raise MapSingularityError(f"map not invertible at t = {t1:.6g}", t=t1)
        return MapFactors(self.basis, self.scales(t2) / s1)

    def apply(self, rho, t):
        return apply_map(self.from_zero(t), rho)

    def singular_times(self, t_max: float, dt: float, floor: float = RATE_FLOOR) -> list:
        """Times in ``[0, t_max]`` where a factor of ``Phi_0^t`` vanishes.

        Local minima of the smallest factor modulus on the grid are refined
        by golden-section search, which resolves the kink of ``|s|`` at a
        simple zero to near machine precision, and kept if they fall below
        ``floor``.  Flat stretches (a factor constant on the grid) are skipped.
        """
        n = max(2, int(round(t_max / dt)))
        t = np.linspace(0.0, t_max, n + 1)

        def smallest(x):
            return np.min(np.abs(self.scales(x)), axis=-1)

        def obj(x):
            return float(smallest(np.array([x]))[0])

        v = smallest(t)
        out = []
        for k in range(len(t)):
            left = v[k - 1] if k > 0 else np.inf
            right = v[k + 1] if k < len(t) - 1 else np.inf
            if not (v[k] <= left and v[k] <= right) or (v[k] == left and v[k] == right):
                continue
            lo, hi = t[max(k - 1, 0)], t[min(k + 1, len(t) - 1)]
            best, tk = float(v[k]), float(t[k])
            res = None
            if lo < t[k] < hi:
                try:
                    res = minimize_scalar(obj, bracket=(lo, t[k], hi), method="golden",
                                          options={"xtol": 1e-15})
                except ValueError:
                    res = None
                if res is not None and not lo <= res.x <= hi:
                    res = None
            if res is None:
                res = minimize_scalar(obj, bounds=(lo, hi), method="bounded",
                                      options={"xatol": 1e-14})
            if res.fun < best:
                best, tk = float(res.fun), float(res.x)
            if best < floor and (not out or abs(out[-1] - tk) > dt):
                out.append(tk)
        return out


class DecayMap(ModelMap):
    """Amplitude-damping family built from any amplitude source ``G``."""

    kind = "decay"

    def __init__(self, omega0: float, amplitude, rate_floor: float = RATE_FLOOR):
        self.omega0 = float(omega0)
        self.amplitude = amplitude
        self.rates = DecayRates(amplitude, self.omega0, rate_floor)
        self.basis = decay_damping_basis(self.rates)

    @classmethod
    def closed(cls, bath: LorentzianBath) -> "DecayMap":
        return cls(bath.omega0, ClosedAmplitude(bath))

    def scales(self, t):
        t = np.asarray(t, dtype=float)
        G = np.asarray(self.amplitude(t), dtype=complex)
        s1 = np.exp(-1j * self.omega0 * t) * G
        return np.stack([np.ones_like(s1), s1, np.conj(s1), np.abs(G) ** 2 + 0j], axis=-1)

    def log_rates(self, t):
        r = self.rates.complex_rate(t)
        l1 = -1j * self.omega0 - 0.5 * r
        return np.stack([np.zeros_like(l1), l1, np.conj(l1), -np.real(r) + 0j], axis=-1)


@functools.lru_cache(maxsize=200_000)
def _unit_g(lam: float, beta: float, t: float, abs_tol: float, rel_tol: float) -> float:
    spec = QuadratureSpec(abs_tol, rel_tol)
    return dephasing_g(OhmicBath(1.0, lam, beta), t, spec)


@functools.lru_cache(maxsize=200_000)
def _unit_h(lam: float, beta: float, t1: float, t2: float, abs_tol: float, rel_tol: float) -> complex:
    spec = QuadratureSpec(abs_tol, rel_tol)
    return dephasing_h(OhmicBath(1.0, lam, beta), t1, t2, spec)


class ThermalDephasingMap(ModelMap):
    """Pure dephasing ``Phi_0^t: s+- -> exp(-g(t)) s+-`` from an Ohmic bath.

    ``g`` is linear in the coupling, so unit-coupling values are cached
    and rescaled.
    """

    kind = "dephasing_thermal"

    def __init__(self, bath: OhmicBath, spec: QuadratureSpec = DEFAULT_SPEC):
        self.bath = bath
        self.spec = spec
        self.basis = DEPHASING_BASIS

    def g(self, t) -> np.ndarray:
        b = self.bath
        # unit-coupling tolerances tightened so the rescaled value keeps spec accuracy
        scale = max(b.gamma0, 1.0)
        tt = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.array([_unit_g(b.lam, b.beta, float(x), self.spec.abs_tol / scale,
                                self.spec.rel_tol) for x in tt.ravel()]).reshape(tt.shape)
        out = b.gamma0 * out
        return out if np.ndim(t) else float(out[0])

    def h(self, t1: float, t2: float) -> complex:
        b = self.bath
        scale = max(b.gamma0, 1.0)
        return b.gamma0 * _unit_h(b.lam, b.beta, float(t1), float(t2),
                                  self.spec.abs_tol / scale, self.spec.rel_tol)

    def scales(self, t):
        e = np.exp(-np.asarray(self.g(t)))
        one = np.ones_like(e)
        return np.stack([one, e, e, one], axis=-1).astype(complex)

    def log_rates(self, t):
        tt = np.atleast_1d(np.asarray(t, dtype=float))
        r = np.array([dephasing_g_rate(self.bath, float(x), self.spec) for x in tt.ravel()])
        r = r.reshape(tt.shape)
        z = np.zeros_like(r)
        out = np.stack([z, -r, -r, z], axis=-1).astype(complex)
        return out if np.ndim(t) else out[0]


class EngineeredDephasingMap(ModelMap):
    """Polarisation dephasing ``|H><V| -> g*(t)|H><V|``, ``|V><H| -> g(t)|V><H|``.

    Polarisation ``H`` is matrix index 0.
    """

    kind = "dephasing_engineered"

    def __init__(self, dist: EngineeredDistribution):
        self.dist = dist
        self.basis = ENGINEERED_BASIS

    def g(self, t):
        return engineered_g(self.dist, t)

    def scales(self, t):
        g = np.asarray(self.g(t), dtype=complex)
        one = np.ones_like(g)
        return np.stack([one, one, np.conj(g), g], axis=-1)

    def log_rates(self, t):
        g = np.asarray(self.g(t), dtype=complex)
        if np.any(np.abs(g) < SINGULAR_FLOOR):
            raise MapSingularityError("generator undefined at a zero of g", t=float(np.max(t)))
        r = engineered_g_derivative(self.dist, t) / g
        z = np.zeros_like(r)
        return np.stack([z, z, np.conj(r), r], axis=-1)


class GKSLDephasingMap(ModelMap):
    """Constant-rate Lindblad dephasing with optional precession.

    Generated by ``H = (w/2) sz`` and the jump operator ``sqrt(rate/2) sz``,
    so coherences scale as ``exp((-/+ i w - rate) t)``.
    """

    kind = "gksl_dephasing"

    def __init__(self, rate: float, omega: float = 0.0):
        if rate < 0:
            raise ValueError("rate must be >= 0")
        self.rate = float(rate)
        self.omega = float(omega)
        self.basis = DEPHASING_BASIS

    def scales(self, t):
        t = np.asarray(t, dtype=float)
        e = np.exp((-1j * self.omega - self.rate) * t)
        one = np.ones_like(e)
        return np.stack([one, e, np.conj(e), one], axis=-1)

    def log_rates(self, t):
        t = np.asarray(t, dtype=float)
        l1 = (-1j * self.omega - self.rate) * np.ones_like(t)
        z = np.zeros_like(l1)
        return np.stack([z, l1, np.conj(l1), z], axis=-1)

    def superoperator(self) -> np.ndarray:
        """Lindblad generator on row-major ``vec(rho)``."""
        I = np.eye(2)
        H = 0.5 * self.omega * SZ
        L = np.sqrt(0.5 * self.rate) * SZ
        LdL = L.conj().T @ L
        gen = -1j * (np.kron(H, I) - np.kron(I, H.T))
        gen += np.kron(L, L.conj()) - 0.5 * np.kron(LdL, I) - 0.5 * np.kron(I, LdL.T)
        return gen


def build_model(kind: str, params: dict) -> ModelMap:
    """Construct a model map from a kind tag and a parameter dictionary."""
    p = dict(params)
    if kind == "decay":
        bath = LorentzianBath(p["gamma0"], p.get("lam", 1.1), p.get("delta", 0.2), p.get("omega0", 20.0))
        return DecayMap.closed(bath)
    if kind == "dephasing_thermal":
        return ThermalDephasingMap(OhmicBath(p["gamma0"], p.get("lam", 1.0), p.get("beta", 10.0)))
    if kind == "dephasing_engineered":
        return EngineeredDephasingMap(EngineeredDistribution(
            p["gamma0"], p.get("omega_bar", 1.0), p.get("sigma", 0.1),
            p.get("delta_max", 0.5), p.get("delta_n", 1.0)))
    if kind == "gksl_dephasing":
        return GKSLDephasingMap(p["rate"], p.get("omega", 0.0))
    raise ValueError(f"unknown model kind {kind!r}")


def model_map(kind: str, params: dict, t1: float, t2: float) -> MapFactors:
    """Two-time map ``Phi_{t1}^{t2}`` of a model, composed from ``Phi_0^t``."""
    return build_model(kind, params).factors(t1, t2)


# -- exact correlators ------------------------------------------------------------

def exact_tpcf_decay(bath_or_amplitude, t1: float, t2: float, omega0: Optional[float] = None) -> complex:
    """Exact ``<s+(t2) s-(t1)>`` for the excited qubit in the vacuum.

    Equals ``conj(G(t2)) G(t1) exp(i w0 (t2 - t1))``.

    Parameters
    ----------
    bath_or_amplitude : LorentzianBath or amplitude source
        An amplitude source needs ``omega0`` as well.
    t1, t2 : float
        Earlier and later time.
    """
    if t2 < t1:
        raise ValueError("t2 must be >= t1")
    if isinstance(bath_or_amplitude, LorentzianBath):
        A = ClosedAmplitude(bath_or_amplitude)
        omega0 = bath_or_amplitude.omega0
    else:
        A = bath_or_amplitude
        if omega0 is None:
            raise ValueError("omega0 is required with an amplitude source")
    return complex(np.conj(A(t2)) * A(t1) * np.exp(1j * omega0 * (t2 - t1)))


def dephasing_weights(g_late: float, g_early: float, h: complex):
    """Weights ``(f1, f2, f3, f4)`` of the exact dephasing correlator.

    With ``X = exp(-g_late - g_early + 2 h)``:
    ``f1 = (1 + e^-gE + e^-gL + X)/4``, ``f2 = (1 - e^-gE - e^-gL + X)/4``,
    ``f3 = (1 - e^-gE + e^-gL - X)/4``, ``f4 = (1 + e^-gE - e^-gL - X)/4``.
    """
    eL = np.exp(-g_late)
    eE = np.exp(-g_early)
    X = np.exp(-g_late - g_early + 2 * h)
    return (0.25 * (1 + eE + eL + X), 0.25 * (1 - eE - eL + X),
            0.25 * (1 - eE + eL - X), 0.25 * (1 + eE - eL - X))


def exact_tpcf_dephasing(bath, o1, o2, t1: float, t2: float, rho0,
                         spec: QuadratureSpec = DEFAULT_SPEC) -> complex:
    """Exact ``<o2(t2) o1(t1)>`` for thermal pure dephasing, ``t2 >= t1``.

    ``Tr[(f1 o2 o1 + f2 sz o2 o1 sz + f3 o2 sz o1 sz + f4 sz o2 sz o1) rho0]``
    with weights from :func:`dephasing_weights`, using ``g(t2)``, ``g(t1)``
    and ``h(t2, t1)``.

    Parameters
    ----------
    bath : OhmicBath or ThermalDephasingMap
        A map instance reuses its cached dephasing integrals.
    """
    if t2 < t1:
        raise ValueError("t2 must be >= t1 (earlier time first)")
    m = bath if isinstance(bath, ThermalDephasingMap) else ThermalDephasingMap(bath, spec)
    gL, gE = m.g(t2), m.g(t1)
    h = m.h(t2, t1)
    f1, f2, f3, f4 = dephasing_weights(gL, gE, h)
    o1 = np.asarray(o1, dtype=complex)
    o2 = np.asarray(o2, dtype=complex)
    rho0 = np.asarray(rho0, dtype=complex)
    op = (f1 * o2 @ o1 + f2 * SZ @ o2 @ o1 @ SZ + f3 * o2 @ SZ @ o1 @ SZ
          + f4 * SZ @ o2 @ SZ @ o1)
    return complex(np.trace(op @ rho0))


_PROJ = {+1: P_UP, -1: P_DOWN}


def exact_tpcf_engineered(dist: EngineeredDistribution, o1, o2, t1: float, t2: float, rho0) -> complex:
    """Exact ``<o2(t2) o1(t1)>`` for the engineered dephasing model.

    Sums ``g(s) Tr[P_d o2 P_b o1 P_a rho0]`` over polarisation projectors,
    with ``s = ((d - b) t2 + (b - a) t1)/2`` and ``g(-s) = conj(g(s))``.
    """
    o1 = np.asarray(o1, dtype=complex)
    o2 = np.asarray(o2, dtype=complex)
    rho0 = np.asarray(rho0, dtype=complex)
    total = 0j
    for a in (1, -1):
        for b in (1, -1):
            for d in (1, -1):
                tr = np.trace(_PROJ[d] @ o2 @ _PROJ[b] @ o1 @ _PROJ[a] @ rho0)
                if tr == 0:
                    continue
                s = 0.5 * ((d - b) * t2 + (b - a) * t1)
                total += complex(engineered_g(dist, s)) * tr
    return complex(total)
