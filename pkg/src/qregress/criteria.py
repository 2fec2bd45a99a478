"""Markovianity criteria: map-built correlators, epsilon, BLP and RHP measures."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.integrate import trapezoid
from scipy.linalg import expm
from scipy.optimize import minimize_scalar

from .errors import MapSingularityError
from .models import SINGULAR_FLOOR, GKSLDephasingMap, ModelMap
from .qalg import (MapFactors, apply_map, bloch_state, correlator_matrices,
                   damping_expand, eigvalsh2, ket_minus, ket_plus, projector,
                   trace_norm_4)
from .quadrature import QuadratureSpec, integrate

__all__ = [
    "EpsilonRecord", "MeasureResult", "qrt_npcf", "qrt_npcf_gksl_direct", "epsilon",
    "trace_distance_curve", "blp_measure", "blp_max", "antipodal_pairs",
    "rhp_rate", "rhp_divisibility", "divisible_completion", "DEGENERATE_FLOOR",
]

DEGENERATE_FLOOR = 1e-12
RHP_CLAMP = 1e-9


# -- map-built correlators -----------------------------------------------------

def _propagator(m: ModelMap, kind: str):
    if kind == "reference":
        return m.reference
    if kind == "composed":
        return m.factors
    raise ValueError(f"unknown propagator {kind!r}")


def qrt_npcf(m: ModelMap, ops: Sequence[np.ndarray], times: Sequence[float], rho0,
             propagator: str = "reference", method: str = "direct") -> complex:
    """Correlator ``Tr[o_n P_n ... o_1 P_1 rho0]`` built from the reduced map alone.

    Parameters
    ----------
    m : ModelMap
    ops : sequence of (2, 2) arrays
        ``ops[k]`` acts at ``times[k]``.
    times : sequence of float
        Nondecreasing, all ``>= 0``; propagation starts at ``t = 0``.
    rho0 : (2, 2) array
    propagator : {"reference", "composed"}
        Leg ``[s, t]`` is propagated with ``Phi_0^{t - s}`` (the bath reset to
        its reference state at each insertion) or with the composed
        two-time map ``Phi_0^t (Phi_0^s)^{-1}``.
    method : {"direct", "contraction"}
        Repeated operator-level map application, or the equivalent
        contraction of damping-basis coefficient vectors with the
        ``A_alpha`` matrices.

    Returns
    -------
    complex
    """
    if len(ops) != len(times):
        raise ValueError("ops and times must have the same length")
    times = [float(t) for t in times]
    if any(t < 0 for t in times) or any(b < a for a, b in zip(times, times[1:])):
        raise ValueError("times must be nonnegative and nondecreasing")
    prop = _propagator(m, propagator)
    rho0 = np.asarray(rho0, dtype=complex)
    prev = 0.0
    if method == "direct":
        x = rho0
        for o, t in zip(ops, times):
            x = np.asarray(o, dtype=complex) @ apply_map(prop(prev, t), x)
            prev = t
        return complex(np.trace(x))
    if method == "contraction":
        basis = m.basis
        mats = correlator_matrices(basis, {k: o for k, o in enumerate(ops)})
        c = damping_expand(rho0, basis)
        for k, t in enumerate(times):
            c = (c * prop(prev, t).scale) @ mats[k]
            prev = t
        return complex(c @ basis.traces)
    raise ValueError(f"unknown method {method!r}")


def qrt_npcf_gksl_direct(m: GKSLDephasingMap, ops, times, rho0) -> complex:
    """Same correlator for a Lindblad semigroup via matrix exponentials of its generator."""
    gen = m.superoperator()
    x = np.asarray(rho0, dtype=complex).reshape(4)
    prev = 0.0
    for o, t in zip(ops, times):
        x = expm(gen * (t - prev)) @ x
        x = (np.asarray(o, dtype=complex) @ x.reshape(2, 2)).reshape(4)
        prev = t
    return complex(np.trace(x.reshape(2, 2)))


@dataclass(frozen=True)
class EpsilonRecord:
    """Relative change ``1 - markov/exact`` at one point.

    ``degenerate`` marks ``|exact| < 1e-12``; ``epsilon`` is then 0 and
    carries no information.
    """

    t1: float
    t2: float
    exact: complex
    markov: complex
    epsilon: complex
    epsilon_abs: float
    degenerate: bool = False


def epsilon(exact: complex, markov: complex, t1: float = float("nan"), t2: float = float("nan"),
            floor: float = DEGENERATE_FLOOR) -> EpsilonRecord:
    """Build an :class:`EpsilonRecord`, flagging a degenerate denominator."""
    exact = complex(exact)
    markov = complex(markov)
    if abs(exact) < floor:
        return EpsilonRecord(t1, t2, exact, markov, 0j, 0.0, True)
    eps = 1 - markov / exact
    return EpsilonRecord(t1, t2, exact, markov, eps, abs(eps), False)


# -- BLP ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MeasureResult:
    """Integrated positive part of a rate on a time grid.

    Attributes
    ----------
    value : float
    contributing_intervals : list of (float, float)
    grid_spec : (float, float)
        ``(t_max, dt)``.
    singular_at : float or None
        First time the map became singular, if evaluation stopped early.
    parts : list of float
        Contribution of each interval; sums to ``value``.
    """

    value: float
    contributing_intervals: list
    grid_spec: tuple
    singular_at: Optional[float] = None
    parts: list = field(default_factory=list)


def trace_distance_curve(m: ModelMap, rho1, rho2, t) -> np.ndarray:
    """``D(Phi_0^t rho1, Phi_0^t rho2)`` on an array of times."""
    t = np.asarray(t, dtype=float)
    diff = damping_expand(np.asarray(rho1) - np.asarray(rho2), m.basis)
    evolved = np.einsum("...i,ikl->...kl", m.scales(t) * diff, m.basis.basis)
    return 0.5 * np.sum(np.abs(eigvalsh2(evolved)), axis=-1)


def _grid(t_max: float, dt: float) -> np.ndarray:
    if t_max <= 0 or dt <= 0:
        raise ValueError("t_max and dt must be positive")
    n = max(1, int(round(t_max / dt)))
    return np.linspace(0.0, t_max, n + 1)


def _refine(fun, lo: float, hi: float, maximize: bool) -> tuple:
    """Locate an extremum inside ``[lo, hi]``, which brackets a grid extremum.

    Golden-section search on the bracket resolves kinks (zeros of ``|g|``)
    to ~1e-15; the bounded Brent fallback stops at ~sqrt(eps) relative.
    """
    sign = -1.0 if maximize else 1.0

    def obj(x):
        return sign * fun(x)

    mid = 0.5 * (lo + hi)
    try:
        res = minimize_scalar(obj, bracket=(lo, mid, hi), method="golden",
                              options={"xtol": 1e-15})
        if lo <= res.x <= hi:
            return float(res.x), float(fun(res.x))
    except ValueError:
        pass
    res = minimize_scalar(obj, bounds=(lo, hi), method="bounded", options={"xatol": 1e-13})
    return float(res.x), float(fun(res.x))


def blp_measure(m: ModelMap, pair, t_max: float, dt: float) -> MeasureResult:
    """Trace-distance backflow ``N = int_{dD/dt > 0} dD/dt`` for one state pair.

    The positive increments of ``D`` on the grid are summed (the
    trapezoid integral of the positive part of the piecewise-linear
    derivative); each rising run is then sharpened by locating its
    bounding minimum and maximum with a bounded scalar search, which makes
    the result insensitive to the grid step.

    Parameters
    ----------
    m : ModelMap
    pair : (rho1, rho2)
    t_max, dt : float
    """
    rho1, rho2 = (np.asarray(r, dtype=complex) for r in pair)
    t = _grid(t_max, dt)
    D = trace_distance_curve(m, rho1, rho2, t)

    def dfun(x):
        return float(trace_distance_curve(m, rho1, rho2, np.array([x]))[0])

    inc = np.diff(D)
    rising = inc > 0
    intervals, parts = [], []
    k = 0
    n = len(inc)
    while k < n:
        if not rising[k]:
            k += 1
            continue
        k0 = k
        while k < n and rising[k]:
            k += 1
        k1 = k  # run covers grid nodes k0 .. k1
        ts, ds = t[k0], D[k0]
        if k0 > 0:
            x, v = _refine(dfun, t[k0 - 1], t[k0 + 1], maximize=False)
            if v < ds:
                ts, ds = x, v
        te, de = t[k1], D[k1]
        if k1 < n:
            x, v = _refine(dfun, t[k1 - 1], t[k1 + 1], maximize=True)
            if v > de:
                te, de = x, v
        intervals.append((ts, te))
        parts.append(de - ds)
    return MeasureResult(float(sum(parts)), intervals, (t_max, dt), None, parts)


def antipodal_pairs(n_grid: int = 12):
    """``|+>,|->`` followed by antipodal Bloch pairs on an ``n_grid x n_grid`` grid."""
    pairs = [(projector(ket_plus()), projector(ket_minus()))]
    if n_grid <= 0:
        return pairs
    for theta in np.linspace(0.0, np.pi / 2, n_grid):
        for phi in np.linspace(0.0, 2 * np.pi, n_grid, endpoint=False):
            n = (np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta))
            pairs.append((bloch_state(*n), bloch_state(*(-x for x in n))))
    return pairs


def blp_max(m: ModelMap, t_max: float, dt: float, n_grid: int = 12):
    """Largest BLP value over :func:`antipodal_pairs`.

    Returns
    -------
    (MeasureResult, int)
        Best result and the index of the winning pair (0 is ``|+-'>``).
    """
    best, best_k = None, -1
    for k, pair in enumerate(antipodal_pairs(n_grid)):
        r = blp_measure(m, pair, t_max, dt)
        if best is None or r.value > best.value + 1e-15:
            best, best_k = r, k
    return best, best_k


# -- RHP ---------------------------------------------------------------------------

def _choi_batch(basis, scales: np.ndarray, amplitude: float) -> np.ndarray:
    units = np.zeros((2, 2, 2, 2), dtype=complex)
    for i in range(2):
        for j in range(2):
            units[i, j, i, j] = 1.0
    coef = np.einsum("ikl,ablk->abi", basis.duals, units)               # (2,2,4)
    images = np.einsum("abi,...i,ikl->...abkl", coef, scales, basis.basis)
    c = amplitude ** 2 * np.einsum("...ijab->...aibj", images)
    return c.reshape(scales.shape[:-1] + (4, 4))


def rhp_rate(m: ModelMap, t, eps_step: float = 1e-4, amplitude: float = 1 / np.sqrt(2),
             richardson: bool = True) -> np.ndarray:
    """Finite-difference ``d(t) = (||(Phi_t^{t+e} x 1)|Psi><Psi| ||_1 - 1)/e``.

    Values below 1e-9 are clamped to zero.

    Raises
    ------
    MapSingularityError
        At the first grid time where ``Phi_0^t`` is not invertible.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    s0 = m.scales(t)
    bad = np.any(np.abs(s0) < SINGULAR_FLOOR, axis=-1)
    if np.any(bad):
        t_bad = float(t[np.argmax(bad)])
        raise MapSingularityError(f"map not invertible at t = {t_bad:.6g}", t=t_bad)
    s0 = np.where(np.abs(s0) < SINGULAR_FLOOR, 1.0, s0)

    def d_at(e):
        choi = _choi_batch(m.basis, m.scales(t + e) / s0, amplitude)
        return (trace_norm_4(choi) - 1.0) / e

    d = d_at(eps_step)
    if richardson:
        d = 2 * d_at(0.5 * eps_step) - d
    d = np.where(d < RHP_CLAMP, 0.0, d)
    return d


def rhp_divisibility(m: ModelMap, t_max: float, dt: float, eps_step: float = 1e-4,
                     amplitude: float = 1 / np.sqrt(2), on_singular: str = "raise") -> MeasureResult:
    """Divisibility measure ``I = int d(t) dt`` on ``[0, t_max]``.

    Parameters
    ----------
    m : ModelMap
    t_max, dt : float
    eps_step : float
        Finite step for the intermediate map; one Richardson step is applied.
    amplitude : float
        Amplitude of ``|00>`` and ``|11>`` in the entangled reference state;
        ``1/sqrt(2)`` gives a normalised state.
    on_singular : {"raise", "excise"}
        Behaviour when ``Phi_0^t`` is not invertible somewhere on the
        window.  With "excise", grid nodes within ``2 dt`` of a singular
        time are dropped, the remaining segments are integrated, and the
        first singular time is recorded in ``singular_at``.  The true
        measure diverges there, so an excised value is only a finite
        grid-dependent proxy.

    Raises
    ------
    MapSingularityError
        With ``on_singular="raise"`` when a singular time exists.
    """
    if on_singular not in ("raise", "excise"):
        raise ValueError("on_singular must be 'raise' or 'excise'")
    t = _grid(t_max, dt)
    sing = m.singular_times(t_max + eps_step, dt)
    singular_at = sing[0] if sing else None
    if sing and on_singular == "raise":
        raise MapSingularityError(f"map not invertible at t = {sing[0]:.6g}", t=sing[0])
    keep = np.ones(t.shape, dtype=bool)
    for ts in sing:
        keep &= np.abs(t - ts) > 2 * dt
    d = np.zeros_like(t)
    if np.any(keep):
        d[keep] = rhp_rate(m, t[keep], eps_step, amplitude)
    intervals, parts = [], []
    k, n = 0, len(t)
    while k < n:
        if not (keep[k] and d[k] > 0):
            k += 1
            continue
        k0 = k
        while k < n and keep[k] and d[k] > 0:
            k += 1
        lo = k0 - 1 if k0 > 0 and keep[k0 - 1] else k0
        hi = k if k < n and keep[k] else k - 1
        seg = float(trapezoid(d[lo:hi + 1], t[lo:hi + 1])) if hi > lo else 0.0
        intervals.append((float(t[lo]), float(t[hi])))
        parts.append(seg)
    return MeasureResult(float(sum(parts)), intervals, (t_max, dt), singular_at, parts)


# -- divisible completion ----------------------------------------------------------

def divisible_completion(m: ModelMap, t1: float, t2: float,
                         spec: QuadratureSpec = QuadratureSpec(1e-13, 1e-12)) -> MapFactors:
    """``D_{t1}^{t2} = T exp(int_{t1}^{t2} G(s) ds)`` with ``G = dPhi/ds Phi^{-1}``.

    In the shared damping basis the generator is diagonal with entries
    ``lambda_i(s)``, so the time-ordered exponential reduces to
    ``exp(int lambda_i)``.  The integrals are evaluated by quadrature of
    the generator eigenvalues, independently of the map factors.
    """
    if t2 < t1:
        raise ValueError("t2 must be >= t1")
    if t1 == t2:
        return MapFactors(m.basis, np.ones(4))
    memo = {}

    def rates(x):
        key = x.tobytes()
        if key not in memo:
            memo.clear()
            memo[key] = np.asarray(m.log_rates(x), dtype=complex)
        return memo[key]

    logs = np.zeros(4, dtype=complex)
    for i in range(4):
        logs[i] = integrate(lambda x, i=i: rates(x)[..., i], t1, t2, spec).value
    return MapFactors(m.basis, np.exp(logs))
