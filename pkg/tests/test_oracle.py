import numpy as np
import pytest
from scipy.linalg import expm

from qregress.criteria import qrt_npcf
from qregress.errors import SectorLeakageError
from qregress.models import closed_G_lorentzian, exact_tpcf_decay, exact_tpcf_dephasing, exact_tpcf_engineered
from qregress.oracle import (DecayDilation, DilationState, dephasing_modes_tpcf, discretize,
                             evolve_decay, oracle_tpcf_decay, oracle_tpcf_dephasing,
                             oracle_tpcf_engineered, pq_decomposition, recurrence_horizon,
                             unitary_coefficients)
from qregress.qalg import P_UP, SM, SP, SX, SZ, ket_plus, projector
from qregress.spectral import EngineeredDistribution, LorentzianBath, OhmicBath

FIG1 = dict(lam=1.1, delta=0.2, omega0=20.0)


def fock_dephasing_tpcf(w, g, beta, o1, o2, t1, t2, rho_s, nf=60):
    """<o2(t2) o1(t1)> for a qubit coupled as sz (g^* b + g b^dag) to one thermal mode."""
    b = np.diag(np.sqrt(np.arange(1, nf)), 1)
    If, I2 = np.eye(nf), np.eye(2)
    H = (np.kron(I2, w * b.conj().T @ b)
         + np.kron(np.diag([1.0, -1.0]), np.conj(g) * b + g * b.conj().T))
    if np.isinf(beta):
        p = np.zeros(nf)
        p[0] = 1.0
    else:
        p = np.exp(-beta * w * np.arange(nf))
        p /= p.sum()
    rho = np.kron(rho_s, np.diag(p))

    def heis(o, t):
        U = expm(-1j * H * t)
        return U.conj().T @ np.kron(o, If) @ U

    return np.trace(heis(o2, t2) @ heis(o1, t1) @ rho)


def test_discretize_midpoint():
    b = LorentzianBath(1.0, **FIG1)
    db = discretize(b, 1, window=(19.0, 21.0))
    assert db.n_modes == 1
    assert abs(abs(db.g[0]) ** 2 - b.J(20.0) * 2.0) < 1e-15
    db = discretize(b, 512, window=(b.omega0 - 40 * b.lam, b.omega0 + 40 * b.lam))
    assert abs(np.sum(np.abs(db.g) ** 2) / b.mass(*db.window) - 1) < 5e-3
    assert "warning" in db.metadata  # the omega0 +/- 40 lam window misses > 1% of the mass
    db = discretize(b, 512)
    assert "warning" not in db.metadata
    assert db.metadata["missing_mass_fraction"] < 0.01
    assert recurrence_horizon(db) == pytest.approx(db.metadata["recurrence_horizon"])


def test_discretize_errors():
    with pytest.raises(ValueError):
        discretize(LorentzianBath(1.0), 0)
    with pytest.raises(ValueError):
        discretize(OhmicBath(1.0), 100, scheme="gauss")


def test_rabi_single_mode():
    b = LorentzianBath(1.0, **FIG1)
    db = discretize(b, 1, window=(19.5, 20.5))
    dil = DecayDilation(db)
    g = abs(db.g[0])
    for t in (0.3, 1.7, 4.0):
        assert abs(dil.amplitude()(t) - np.cos(g * t)) < 1e-13


def test_zero_coupling_amplitude():
    db = discretize(LorentzianBath(0.0, **FIG1), 16)
    dil = DecayDilation(db)
    assert np.allclose(dil.amplitude()(np.linspace(0, 5, 6)), 1.0)
    free = oracle_tpcf_decay(db, 0.3, 1.3)
    assert abs(free - np.exp(1j * 20.0)) < 1e-13


def test_evolve_ode_and_eig_agree_and_conserve_norm():
    db = discretize(LorentzianBath(1.0, **FIG1), 128)
    psi = DilationState.excited(db.n_modes)
    for t in (1.0, 5.0, 10.0):
        a = evolve_decay(db, psi, t, method="ode")
        b = evolve_decay(db, psi, t, method="eig")
        assert np.max(np.abs(a.vector() - b.vector())) < 1e-8
        assert abs(a.norm2() - 1) < 1e-10
        assert abs(b.norm2() - 1) < 1e-12


def test_discrete_amplitude_matches_continuum():
    b = LorentzianBath(1.0, **FIG1)
    dil = DecayDilation(discretize(b, 512))
    t = np.linspace(0.0, 5.0, 26)
    G = closed_G_lorentzian(b, t)
    rel = np.abs(dil.amplitude()(t) - G) / np.maximum(np.abs(G), 1e-300)
    assert np.max(rel[np.abs(G) > 1e-3]) < 1e-3


def test_unitary_coefficients_reconstruct_propagator():
    db = discretize(LorentzianBath(1.0, **FIG1), 64)
    dil = DecayDilation(db)
    for t in (0.5, 2.0):
        c = unitary_coefficients(db, t)
        assert np.max(np.abs(c["matrix"] - dil.frame_propagator(t))) < 1e-10
        U = c["matrix"]
        assert np.max(np.abs(U @ U.conj().T - np.eye(U.shape[0]))) < 1e-10


def test_oracle_decay_examples():
    b = LorentzianBath(1.0, **FIG1)
    db = discretize(b, 512)
    assert abs(oracle_tpcf_decay(db, 0.0, 0.0) - 1) < 1e-14
    ex = exact_tpcf_decay(b, 0.1, 0.6)
    orc = oracle_tpcf_decay(db, 0.1, 0.6)
    assert abs(ex - orc) / abs(orc) < 1e-3
    assert abs(orc - oracle_tpcf_decay(db, 0.1, 0.6, method="ode")) < 1e-8


def test_oracle_leakage_check():
    db = discretize(LorentzianBath(1.0, **FIG1), 64)
    with pytest.raises(SectorLeakageError):
        oracle_tpcf_decay(db, 1.0, 2.0, o1=SP, o2=SM)


def test_pq_terms():
    b = LorentzianBath(1.0, **FIG1)
    db = discretize(b, 128)
    dil = DecayDilation(db)
    terms = pq_decomposition(db, 0.1, 1.1, dilation=dil)
    orc = oracle_tpcf_decay(db, 0.1, 1.1, dilation=dil)
    assert abs(terms.total() - orc) < 1e-12
    # Q on the factorised initial state vanishes
    for key, val in terms.terms.items():
        if key[2] == "Q":
            assert abs(val) < 1e-15
    ppp = qrt_npcf(dil.reduced_map(), [SM, SP], [0.1, 1.1], P_UP)
    assert abs(terms["PPP"] - ppp) < 1e-10
    # the system-bath correlations carried by Q are visible at strong coupling
    assert abs(terms["PPP"] - terms.total()) > 1e-3


def test_fock_helper_zero_temperature_free_mode():
    # g = 0: free qubit, the correlator is Tr[o2 o1 rho] for sz-diagonal dynamics with no H_S
    rho = projector(ket_plus())
    assert abs(fock_dephasing_tpcf(1.0, 0.0, np.inf, SM, SP, 0.4, 1.2, rho, nf=4) - 0.5) < 1e-14


@pytest.mark.parametrize("beta", [np.inf, 2.0])
def test_mode_product_formula_matches_fock_space(beta):
    w, g = 1.3, 0.35 + 0.2j
    rho = projector(ket_plus())
    for o1, o2 in ((SM, SP), (SZ, SZ), (SX, SM)):
        for t1, t2 in ((0.7, 1.9), (0.0, 2.2), (1.5, 1.5)):
            ref = fock_dephasing_tpcf(w, g, beta, o1, o2, t1, t2, rho)
            val = dephasing_modes_tpcf([w], [g], beta, o1, o2, t1, t2, rho)
            assert abs(val - ref) < 1e-10


def test_dephasing_oracle_matches_continuum():
    b = OhmicBath(1.0, 1.0, 10.0)
    rho = projector(ket_plus())
    assert abs(oracle_tpcf_dephasing(b, 4096, SM, SP, 0.0, 0.0, rho) - np.trace(SP @ SM @ rho)) < 1e-14
    for t1, t2 in ((1.0, 2.0), (0.5, 4.0)):
        ex = exact_tpcf_dephasing(b, SM, SP, t1, t2, rho)
        orc = oracle_tpcf_dephasing(b, 4096, SM, SP, t1, t2, rho)
        assert abs(ex - orc) < 1e-6


def test_engineered_oracle_matches_projector_formula(rng):
    rho = projector(ket_plus())
    for g0 in (0.0, 0.3, 0.5):
        d = EngineeredDistribution(g0)
        for _ in range(3):
            t1, t2 = sorted(rng.uniform(0, 10, 2))
            for o1, o2 in ((SM, SP), (SZ, SZ), (SX, SM)):
                ex = exact_tpcf_engineered(d, o1, o2, t1, t2, rho)
                orc = oracle_tpcf_engineered(d, o1, o2, t1, t2, rho)
                assert abs(ex - orc) < 1e-10
