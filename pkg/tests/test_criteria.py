import numpy as np
import pytest

from qregress.criteria import (antipodal_pairs, blp_max, blp_measure, divisible_completion,
                               epsilon, qrt_npcf, qrt_npcf_gksl_direct, rhp_divisibility,
                               rhp_rate, trace_distance_curve)
from qregress.errors import MapSingularityError
from qregress.models import (DecayMap, EngineeredDephasingMap, GKSLDephasingMap, ModelMap,
                             ThermalDephasingMap, DEPHASING_BASIS, exact_tpcf_decay)
from qregress.qalg import P_UP, SM, SP, SX, SZ, ket_minus, ket_plus, projector
from qregress.spectral import EngineeredDistribution, LorentzianBath, OhmicBath

from conftest import random_density

FIG1 = dict(lam=1.1, delta=0.2, omega0=20.0)
PM = (projector(ket_plus()), projector(ket_minus()))


class ScalarDephasing(ModelMap):
    """Dephasing with a user-supplied real coherence factor."""

    def __init__(self, fn):
        self.fn = fn
        self.basis = DEPHASING_BASIS

    def scales(self, t):
        e = np.asarray(self.fn(np.asarray(t, dtype=float)), dtype=complex)
        one = np.ones_like(e)
        return np.stack([one, e, e, one], axis=-1)


def test_npcf_trivial_cases(rng):
    m = DecayMap.closed(LorentzianBath(1.0, **FIG1))
    rho = random_density(rng)
    assert abs(qrt_npcf(m, [SZ], [1.3], rho) - np.trace(SZ @ m.apply(rho, 1.3))) < 1e-14
    assert abs(qrt_npcf(m, [SP, SM, SZ], [0.0, 0.0, 0.0], rho) - np.trace(SZ @ SM @ SP @ rho)) < 1e-14
    with pytest.raises(ValueError):
        qrt_npcf(m, [SP, SM], [1.0, 0.5], rho)


@pytest.mark.parametrize("propagator", ["reference", "composed"])
def test_npcf_contraction_matches_direct(propagator, rng):
    ops = [SP, SM, SZ, SX]
    for _ in range(30):
        m = DecayMap.closed(LorentzianBath(rng.uniform(0, 2), **FIG1))
        t1, t2 = sorted(rng.uniform(0, 5, 2))
        o1, o2 = (ops[k] for k in rng.integers(0, 4, 2))
        rho = random_density(rng)
        a = qrt_npcf(m, [o1, o2], [t1, t2], rho, propagator, "direct")
        b = qrt_npcf(m, [o1, o2], [t1, t2], rho, propagator, "contraction")
        assert abs(a - b) < 1e-12


def test_npcf_gksl_two_paths(rng):
    for _ in range(100):
        m = GKSLDephasingMap(rng.uniform(0, 2), rng.uniform(-3, 3))
        t1, t2 = sorted(rng.uniform(0, 5, 2))
        ops = [rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)) for _ in range(2)]
        rho = random_density(rng)
        a = qrt_npcf(m, ops, [t1, t2], rho, method="contraction")
        b = qrt_npcf_gksl_direct(m, ops, [t1, t2], rho)
        assert abs(a - b) < 1e-12


def test_epsilon_record():
    assert epsilon(1 + 1j, 1 + 1j).epsilon == 0
    assert epsilon(0.5, 0.0).epsilon == 1
    r = epsilon(1e-14, 0.3)
    assert r.degenerate and r.epsilon == 0


def test_decay_epsilon_weak_coupling():
    m = DecayMap.closed(LorentzianBath(1e-3, **FIG1))
    for tau in np.linspace(0.0, 10.0, 21):
        ex = exact_tpcf_decay(m.amplitude.bath, 0.1, 0.1 + tau)
        mk = qrt_npcf(m, [SM, SP], [0.1, 0.1 + tau], P_UP)
        assert epsilon(ex, mk).epsilon_abs < 1e-2


def test_decay_epsilon_grows_with_coupling():
    def eps(g0):
        m = DecayMap.closed(LorentzianBath(g0, **FIG1))
        ex = exact_tpcf_decay(m.amplitude.bath, 0.1, 1.1)
        return epsilon(ex, qrt_npcf(m, [SM, SP], [0.1, 1.1], P_UP)).epsilon_abs

    assert eps(1.0) > 5 * eps(0.1)
    assert eps(0.1) > 0


def test_composed_propagator_reproduces_decay_exactly():
    # the composed two-time map gives the exact value for this model
    m = DecayMap.closed(LorentzianBath(1.0, **FIG1))
    for tau in (0.5, 1.0, 3.0):
        ex = exact_tpcf_decay(m.amplitude.bath, 0.1, 0.1 + tau)
        mk = qrt_npcf(m, [SM, SP], [0.1, 0.1 + tau], P_UP, propagator="composed")
        assert epsilon(ex, mk).epsilon_abs < 1e-12


def test_trace_distance_curve_dephasing():
    m = ThermalDephasingMap(OhmicBath(1.0))
    t = np.linspace(0.0, 5.0, 11)
    assert np.allclose(trace_distance_curve(m, *PM, t), np.exp(-m.g(t)), atol=1e-14)


def test_blp_thermal_is_zero():
    r = blp_measure(ThermalDephasingMap(OhmicBath(1.0)), PM, 10.0, 0.05)
    assert r.value <= 1e-10


def test_blp_engineered():
    t_max = np.pi / 0.2
    assert blp_measure(EngineeredDephasingMap(EngineeredDistribution(0.5)), PM, t_max, 1e-2).value <= 1e-8
    for g0 in (0.0, 1.0):
        assert blp_measure(EngineeredDephasingMap(EngineeredDistribution(g0)), PM, t_max, 1e-2).value > 1e-4


def test_blp_equals_sum_of_recurrence_rises():
    from scipy.optimize import minimize_scalar
    d = EngineeredDistribution(0.0)
    m = EngineeredDephasingMap(d)
    t_max = np.pi / 0.2
    r = blp_measure(m, PM, t_max, 1e-3)

    def mod(t):
        return abs(complex(m.g(t)))

    # zeros of cos(delta t) are minima of |g|; maxima lie between consecutive zeros
    zeros = [(k + 0.5) * np.pi / d.delta for k in range(20) if (k + 0.5) * np.pi / d.delta < t_max]
    rise = 0.0
    for k, z in enumerate(zeros):
        hi = zeros[k + 1] if k + 1 < len(zeros) else t_max
        peak = minimize_scalar(lambda x: -mod(x), bounds=(z, hi), method="bounded",
                               options={"xatol": 1e-13})
        top = mod(peak.x) if k + 1 < len(zeros) else max(mod(peak.x), mod(t_max))
        rise += top - mod(z)
    assert abs(mod(zeros[0])) < 1e-15
    assert abs(r.value - rise) < 1e-9


def test_blp_grid_convergence():
    m = EngineeredDephasingMap(EngineeredDistribution(0.2))
    t_max = np.pi / 0.2
    a = blp_measure(m, PM, t_max, 2e-3).value
    b = blp_measure(m, PM, t_max, 1e-3).value
    assert abs(a - b) < 1e-6


def test_blp_grid_search_confirms_equatorial_pair():
    for g0 in (0.1, 0.3):
        m = EngineeredDephasingMap(EngineeredDistribution(g0))
        best, k = blp_max(m, np.pi / 0.2, 1e-2, n_grid=6)
        ref = blp_measure(m, PM, np.pi / 0.2, 1e-2)
        assert best.value == pytest.approx(ref.value, abs=1e-9)


def test_antipodal_pairs_are_orthogonal():
    for r1, r2 in antipodal_pairs(4):
        assert abs(np.trace(r1 @ r2)) < 1e-14


def test_rhp_constant_rate_is_zero():
    r = rhp_divisibility(GKSLDephasingMap(0.7, 1.0), 10.0, 1e-2)
    assert r.value <= 1e-10


def test_rhp_detects_nonmonotone_factor():
    # |factor| rises on (1, 2) only
    def fn(t):
        return np.where(t < 1, np.exp(-t), np.where(t < 2, np.exp(-1) * (1 + 0.5 * (t - 1)),
                                                     1.5 * np.exp(-1) * np.exp(-(t - 2))))

    m = ScalarDephasing(fn)
    r = rhp_divisibility(m, 4.0, 1e-2, eps_step=1e-5)
    assert r.value > 0
    for lo, hi in r.contributing_intervals:
        assert lo >= 1 - 2e-2 and hi <= 2 + 2e-2
    # d(t) from explicit Choi eigenvalues at one interior point
    t, e = 1.5, 1e-5
    f = fn(np.array([t, t + e]))
    ratio = f[1] / f[0]
    # Choi eigenvalues of a dephasing map with factor q: (1 +/- q)/2 and 0, 0
    assert rhp_rate(m, t, eps_step=e, richardson=False)[0] == pytest.approx((abs(ratio) - 1) / e, rel=1e-6)


def test_rhp_nonnegative_and_zero_for_divisible_models():
    for m in (DecayMap.closed(LorentzianBath(0.3, **FIG1)), ThermalDephasingMap(OhmicBath(1.0)),
              EngineeredDephasingMap(EngineeredDistribution(0.5))):
        r = rhp_divisibility(m, 8.0, 5e-2)
        assert 0 <= r.value <= 1e-8


def test_rhp_singular_engineered_map():
    m = EngineeredDephasingMap(EngineeredDistribution(0.0))
    with pytest.raises(MapSingularityError):
        rhp_divisibility(m, 10.0, 1e-2)
    r = rhp_divisibility(m, 10.0, 1e-2, on_singular="excise")
    assert r.singular_at == pytest.approx(np.pi, abs=1e-7)
    assert r.value > 0
    half = rhp_divisibility(m, 10.0, 1e-2, amplitude=0.5, on_singular="excise")
    assert half.value == 0


def test_divisible_completion_examples(rng):
    m = DecayMap.closed(LorentzianBath(1.0, **FIG1))
    assert np.allclose(divisible_completion(m, 1.2, 1.2).scale, 1)
    for t1, t2 in [(0.0, 0.5), (0.3, 2.0), (1.0, 4.0)]:
        d = divisible_completion(m, t1, t2).scale
        assert np.max(np.abs(d - m.factors(t1, t2).scale)) < 1e-10
