"""Bath spectral densities, correlation functions and dephasing integrals.

Three bath families are supported:

* :class:`LorentzianBath` for spontaneous decay into a structured vacuum,
  ``J(w) = g0 lam^2 / (2 pi ((w - w0 + Delta)^2 + lam^2))``.
* :class:`OhmicBath` for thermal pure dephasing,
  ``J(w) = g0 lam^2 w / (2 pi (w^2 + lam^2))`` on ``w > 0``.
* :class:`EngineeredDistribution`, a two-Gaussian photon frequency
  distribution driving polarisation dephasing.

Semi-infinite frequency tails are added in closed form with the complex
exponential integral, so quadrature only ever runs on finite windows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import exp1

from .quadrature import DEFAULT_SPEC, QuadratureSpec, integrate, integrate_gl

__all__ = [
    "LorentzianBath", "OhmicBath", "EngineeredDistribution",
    "exp_tail", "bath_corr_f", "bath_corr_f_closed", "bath_corr_f_quad",
    "dephasing_g", "dephasing_h", "dephasing_g_rate",
    "engineered_fsq", "engineered_g", "engineered_g_derivative", "peak_count",
]


@dataclass(frozen=True)
class LorentzianBath:
    """Lorentzian spectral density centred at ``omega0 - delta``.

    Attributes
    ----------
    gamma0 : float
        Coupling strength (inverse time), ``>= 0``.
    lam : float
        Spectral width, ``> 0``.
    delta : float
        Detuning of the qubit from the bath centre.
    omega0 : float
        Qubit frequency.
    """

    gamma0: float
    lam: float = 1.1
    delta: float = 0.2
    omega0: float = 20.0

    def __post_init__(self):
        if not self.gamma0 >= 0:
            raise ValueError("gamma0 must be >= 0")
        if not self.lam > 0:
            raise ValueError("lam must be > 0")

    @property
    def center(self) -> float:
        return self.omega0 - self.delta

    def J(self, w):
        w = np.asarray(w, dtype=float)
        return self.gamma0 * self.lam ** 2 / (2 * np.pi * ((w - self.center) ** 2 + self.lam ** 2))

    @property
    def total_mass(self) -> float:
        """``int J`` over the whole real line."""
        return 0.5 * self.gamma0 * self.lam

    def mass(self, lo: float, hi: float) -> float:
        """``int_lo^hi J`` in closed form."""
        c, lam = self.center, self.lam
        return self.gamma0 * lam / (2 * np.pi) * (math.atan((hi - c) / lam) - math.atan((lo - c) / lam))


@dataclass(frozen=True)
class OhmicBath:
    """Ohmic spectral density with Lorentz cutoff at inverse temperature ``beta``.

    ``beta = inf`` selects the zero-temperature vacuum.
    """

    gamma0: float
    lam: float = 1.0
    beta: float = 10.0

    def __post_init__(self):
        if not self.gamma0 >= 0:
            raise ValueError("gamma0 must be >= 0")
        if not self.lam > 0:
            raise ValueError("lam must be > 0")
        if not self.beta > 0:
            raise ValueError("beta must be > 0")

    def J(self, w):
        w = np.asarray(w, dtype=float)
        return self.gamma0 * self.lam ** 2 * w / (2 * np.pi * (w ** 2 + self.lam ** 2))

    def coth(self, w):
        """``coth(beta w / 2)``; identically 1 at zero temperature."""
        w = np.asarray(w, dtype=float)
        if np.isinf(self.beta):
            return np.ones_like(w)
        return 1.0 / np.tanh(0.5 * self.beta * w)

    def mass(self, lo: float, hi: float) -> float:
        """``int_lo^hi J`` in closed form (``0 < lo < hi``)."""
        lam2 = self.lam ** 2
        return self.gamma0 * lam2 / (4 * np.pi) * math.log((hi ** 2 + lam2) / (lo ** 2 + lam2))

    def cutoff(self) -> float:
        """Frequency beyond which the thermal factor equals 1 to ~1e-26."""
        c = 50.0 * self.lam
        if np.isfinite(self.beta):
            c = max(c, 60.0 / self.beta)
        return c


@dataclass(frozen=True)
class EngineeredDistribution:
    """Equal-weight two-Gaussian photon frequency distribution.

    Peaks sit at ``omega_bar -/+ delta`` with ``delta = delta_max |2 gamma0 - 1|``,
    so the distribution is single-peaked at ``gamma0 = 1/2`` and
    double-peaked near the ends of ``[0, 1]``.
    """

    gamma0: float
    omega_bar: float = 1.0
    sigma: float = 0.1
    delta_max: float = 0.5
    delta_n: float = 1.0

    def __post_init__(self):
        if not 0 <= self.gamma0 <= 1:
            raise ValueError("gamma0 must lie in [0, 1]")
        if not self.sigma > 0:
            raise ValueError("sigma must be > 0")

    @property
    def delta(self) -> float:
        return self.delta_max * abs(2 * self.gamma0 - 1)

    def window(self, width: float = 15.0):
        return (self.omega_bar - self.delta - width * self.sigma,
                self.omega_bar + self.delta + width * self.sigma)


# -- closed-form tails --------------------------------------------------------

def exp_tail(a: float, z: complex, t: float) -> complex:
    """``int_a^inf exp(-i w t) / (w - z) dw`` for ``t > 0``.

    Uses ``exp(-i z t) E1(i (a - z) t)``; the straight path from
    ``i (a - z) t`` to ``+i inf`` must not cross the branch cut of ``E1``,
    which excludes ``Im z < 0`` together with ``a < Re z``.
    """
    z = complex(z)
    if t <= 0:
        raise ValueError("exp_tail requires t > 0")
    if z.imag < 0 and a < z.real:
        raise ValueError("tail path crosses the E1 branch cut")
    if z.imag == 0 and a <= z.real:
        raise ValueError("pole on the integration path")
    arg = 1j * (a - z) * t
    # exp(-i z t) E1(arg) with the large exponentials combined
    return complex(np.exp(-1j * z * t) * exp1(arg))


def _lorentz_tail(a: float, center: float, lam: float, t: float) -> complex:
    """``int_a^inf exp(-i w t) / ((w - center)^2 + lam^2) dw`` for ``a > center``."""
    if t == 0:
        return (0.5 * np.pi - math.atan((a - center) / lam)) / lam
    return (exp_tail(a, center + 1j * lam, t) - exp_tail(a, center - 1j * lam, t)) / (2j * lam)


def _rational_tail(omega_c: float, s: float, lam: float) -> complex:
    """``C(s) = int_Wc^inf exp(-i w s) / (w (w^2 + lam^2)) dw`` for ``s >= 0``."""
    lam2 = lam * lam
    if s == 0:
        return 0.5 / lam2 * math.log1p(lam2 / omega_c ** 2)
    return (exp_tail(omega_c, 0.0, s)
            - 0.5 * exp_tail(omega_c, 1j * lam, s)
            - 0.5 * exp_tail(omega_c, -1j * lam, s)) / lam2


# -- Lorentzian correlation function ------------------------------------------

def bath_corr_f_closed(bath: LorentzianBath, t):
    """Correlation ``f(t) = int J(w) exp(-i (w - w0) t) dw`` over the real line.

    Equals ``(g0 lam / 2) exp(-(lam - i Delta) t)``.
    """
    t = np.asarray(t, dtype=float)
    return 0.5 * bath.gamma0 * bath.lam * np.exp(-(bath.lam - 1j * bath.delta) * t)


def bath_corr_f_quad(bath: LorentzianBath, t: float, window=None, tails: bool = False,
                     spec: QuadratureSpec = DEFAULT_SPEC) -> complex:
    """Correlation function by adaptive quadrature over a finite window.

    Parameters
    ----------
    bath : LorentzianBath
    t : float
        Time, ``>= 0``.
    window : (float, float), optional
        Integration window; defaults to ``[0, omega0 + 40 lam]``.
    tails : bool
        If True, the two semi-infinite pieces outside the window are added
        in closed form so the result approximates the full-line integral.
    spec : QuadratureSpec

    Returns
    -------
    complex
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    lo, hi = window if window is not None else (0.0, bath.omega0 + 40 * bath.lam)
    period = 2 * np.pi / t if t > 0 else None
    w0 = bath.omega0

    def integrand(w):
        return bath.J(w) * np.exp(-1j * (w - w0) * t)

    val = integrate(integrand, lo, hi, spec.with_period(period)).value
    if tails:
        pref = bath.gamma0 * bath.lam ** 2 / (2 * np.pi)
        c = bath.center
        upper = _lorentz_tail(hi, c, bath.lam, t)
        # substitute w -> -w for the lower tail
        lower = np.conj(_lorentz_tail(-lo, -c, bath.lam, t))
        val += pref * np.exp(1j * w0 * t) * (upper + lower)
    return complex(val)


def bath_corr_f(bath: LorentzianBath, t, method: str = "closed", **kwargs):
    """Bath correlation function; ``method`` is ``"closed"`` or ``"quad"``."""
    if method == "closed":
        return bath_corr_f_closed(bath, t)
    if method == "quad":
        return bath_corr_f_quad(bath, t, **kwargs)
    raise ValueError(f"unknown method {method!r}")


# -- thermal dephasing integrals ----------------------------------------------

def _unit_g_integrand(bath: OhmicBath, t: float):
    lam2 = bath.lam ** 2

    def f(w):
        s = np.sin(0.5 * w * t)
        return 2 * s * s * bath.coth(w) / (w * (w * w + lam2))
    return f


def _run(f, a, b, spec, method, period):
    if method == "gk":
        return integrate(f, a, b, spec.with_period(period)).value
    if method == "gl":
        n0 = 8 if period is None else max(8, int(math.ceil((b - a) / period)))
        return integrate_gl(f, a, b, tol=min(spec.abs_tol, 1e-12), start_panels=n0).value
    raise ValueError(f"unknown quadrature method {method!r}")


def dephasing_g(bath: OhmicBath, t: float, spec: QuadratureSpec = DEFAULT_SPEC,
                method: str = "gk") -> float:
    """Decoherence exponent ``g(t) = 4 int (J/w^2)(1 - cos w t) coth(beta w/2) dw``.

    Parameters
    ----------
    bath : OhmicBath
    t : float
        Time, ``>= 0``.
    spec : QuadratureSpec
    method : {"gk", "gl"}
        Adaptive Gauss-Kronrod or composite Gauss-Legendre on the finite
        window; the tail above the thermal cutoff is closed form.

    Returns
    -------
    float
        Nonnegative exponent; zero at ``t = 0``.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    if t == 0 or bath.gamma0 == 0:
        return 0.0
    wc = bath.cutoff()
    pref = 2 * bath.gamma0 * bath.lam ** 2 / np.pi
    body = _run(_unit_g_integrand(bath, t), 0.0, wc, spec, method, 2 * np.pi / t)
    tail = _rational_tail(wc, 0.0, bath.lam) - _rational_tail(wc, t, bath.lam).real
    return float(pref * (np.real(body) + tail))


def dephasing_g_rate(bath: OhmicBath, t: float, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Time derivative ``dg/dt = 4 int (J/w) sin(w t) coth(beta w/2) dw``."""
    if t == 0 or bath.gamma0 == 0:
        return 0.0
    wc = bath.cutoff()
    lam2 = bath.lam ** 2
    pref = 2 * bath.gamma0 * lam2 / np.pi

    def f(w):
        return np.sin(w * t) * bath.coth(w) / (w * w + lam2)

    body = integrate(f, 0.0, wc, spec.with_period(2 * np.pi / t)).value
    # int_wc^inf sin(w t)/(w^2+lam^2) dw = -Im of the shifted Lorentz tail
    tail = -_lorentz_tail(wc, 0.0, bath.lam, t).imag
    return float(pref * (np.real(body) + tail))


def dephasing_h(bath: OhmicBath, t1: float, t2: float, spec: QuadratureSpec = DEFAULT_SPEC,
                method: str = "gk") -> complex:
    """Two-time dephasing function for ``t1 >= t2 >= 0``.

    ``h(t1, t2) = 2 int (J/w^2) [coth(beta w/2) Re K + i Im K] dw`` with
    ``K = (1 - exp(-i w t1)) (1 - exp(i w t2))``.  The thermal factor
    multiplies only the real part of ``K``.  It satisfies
    ``h(t, t) = g(t)`` and ``h(t, 0) = 0``.
    """
    if not t1 >= t2 >= 0:
        raise ValueError("dephasing_h requires t1 >= t2 >= 0")
    if bath.gamma0 == 0 or t2 == 0:
        return 0j
    tau = t1 - t2
    lam2 = bath.lam ** 2
    wc = bath.cutoff()

    def f(w):
        re_k = 2 * (np.sin(0.5 * w * t1) ** 2 + np.sin(0.5 * w * t2) ** 2 - np.sin(0.5 * w * tau) ** 2)
        im_k = np.sin(w * t1) - np.sin(w * t2) - np.sin(w * tau)
        return (bath.coth(w) * re_k + 1j * im_k) / (w * (w * w + lam2))

    body = _run(f, 0.0, wc, spec, method, 2 * np.pi / t1)
    c = {s: _rational_tail(wc, s, bath.lam) for s in {0.0, t1, t2, tau}}
    re_tail = (c[0.0] - c[t1] - c[t2] + c[tau]).real
    # sin(w s) = -Im exp(-i w s)
    im_tail = -(c[t1] - c[t2] - c[tau]).imag
    pref = bath.gamma0 * lam2 / np.pi
    return complex(pref * (body + re_tail + 1j * im_tail))


# -- engineered distribution --------------------------------------------------

def engineered_fsq(dist: EngineeredDistribution, w):
    """Photon frequency density ``|f(w)|^2`` (unit area)."""
    w = np.asarray(w, dtype=float)
    s = dist.sigma
    norm = 1.0 / (s * np.sqrt(2 * np.pi))
    lo = np.exp(-0.5 * ((w - dist.omega_bar + dist.delta) / s) ** 2)
    hi = np.exp(-0.5 * ((w - dist.omega_bar - dist.delta) / s) ** 2)
    return 0.5 * norm * (lo + hi)


def engineered_g(dist: EngineeredDistribution, t, method: str = "closed",
                 spec: QuadratureSpec = DEFAULT_SPEC):
    """Coherence factor ``g(t) = int |f(w)|^2 exp(-i dn w t) dw``.

    The closed form is ``exp(-i dn wbar t) exp(-sigma^2 dn^2 t^2 / 2) cos(delta dn t)``.
    """
    dn = dist.delta_n
    if method == "closed":
        t = np.asarray(t, dtype=float)
        return (np.exp(-1j * dn * dist.omega_bar * t)
                * np.exp(-0.5 * (dist.sigma * dn * t) ** 2)
                * np.cos(dist.delta * dn * t))
    if method == "quad":
        lo, hi = dist.window()
        period = 2 * np.pi / (dn * abs(t)) if t != 0 else None
        return integrate(lambda w: engineered_fsq(dist, w) * np.exp(-1j * dn * w * t),
                         lo, hi, spec.with_period(period)).value
    raise ValueError(f"unknown method {method!r}")


def engineered_g_derivative(dist: EngineeredDistribution, t):
    """Analytic ``dg/dt`` of the closed form."""
    t = np.asarray(t, dtype=float)
    dn = dist.delta_n
    a = dist.delta * dn
    env = np.exp(-1j * dn * dist.omega_bar * t) * np.exp(-0.5 * (dist.sigma * dn * t) ** 2)
    dlog = -1j * dn * dist.omega_bar - (dist.sigma * dn) ** 2 * t
    return env * (dlog * np.cos(a * t) - a * np.sin(a * t))


def peak_count(dist: EngineeredDistribution, n_points: int = 4001, rel_prominence: float = 1e-9) -> int:
    """Number of local maxima of ``|f(w)|^2`` on a fine grid.

    Maxima whose dip to the neighbouring maximum is below
    ``rel_prominence`` of the peak height are merged.
    """
    lo, hi = dist.window(6.0)
    w = np.linspace(lo, hi, n_points)
    y = engineered_fsq(dist, w)
    idx = [i for i in range(1, n_points - 1) if y[i] > y[i - 1] and y[i] >= y[i + 1]]
    if len(idx) <= 1:
        return len(idx)
    peaks = [idx[0]]
    for i in idx[1:]:
        dip = np.min(y[peaks[-1]:i + 1])
        if min(y[peaks[-1]], y[i]) - dip > rel_prominence * max(y[peaks[-1]], y[i]):
            peaks.append(i)
        elif y[i] > y[peaks[-1]]:
            peaks[-1] = i
    return len(peaks)
