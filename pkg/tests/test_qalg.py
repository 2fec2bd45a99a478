import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qregress.errors import NotHermitianError
from qregress.qalg import (ID2, P_DOWN, P_UP, SM, SP, SZ, DampingBasis, MapFactors, apply_map,
                           bloch_state, choi_state, compose, correlator_matrices,
                           damping_expand, decay_operator_basis, dephasing_operator_basis,
                           engineered_operator_basis, is_density, jacobi_eigh, ket_minus,
                           ket_plus, projector, trace_distance, trace_norm_4)

from conftest import random_density


BASES = {
    "decay": DampingBasis.from_operators(decay_operator_basis()),
    "dephasing": DampingBasis.from_operators(dephasing_operator_basis()),
    "engineered": DampingBasis.from_operators(engineered_operator_basis()),
}


def dephase(rho, factor):
    out = np.array(rho, dtype=complex)
    out[0, 1] *= factor
    out[1, 0] *= factor
    return out


def test_trace_distance_examples():
    rho = projector(ket_plus())
    assert trace_distance(rho, rho) == 0.0
    assert abs(trace_distance(P_UP, P_DOWN) - 1) < 1e-15
    e = np.exp(-0.7)
    d = trace_distance(dephase(projector(ket_plus()), e), dephase(projector(ket_minus()), e))
    assert abs(d - e) < 1e-14
    assert abs(d - 0.4966) < 1e-4


def test_trace_distance_rejects_non_hermitian():
    with pytest.raises(NotHermitianError):
        trace_distance(SP, P_UP)


def test_trace_distance_axioms(rng):
    for _ in range(1000):
        a, b, c = (random_density(rng) for _ in range(3))
        dab = trace_distance(a, b)
        assert dab >= 0
        assert dab == trace_distance(b, a)
        assert dab <= trace_distance(a, c) + trace_distance(c, b) + 1e-12
        assert dab <= 1 + 1e-12


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(-1, 1), min_size=6, max_size=6))
def test_trace_distance_is_half_bloch_distance(x):
    n1, n2 = np.array(x[:3]), np.array(x[3:])
    n1 = n1 / max(1.0, np.linalg.norm(n1))
    n2 = n2 / max(1.0, np.linalg.norm(n2))
    d = trace_distance(bloch_state(*n1), bloch_state(*n2))
    assert abs(d - 0.5 * np.linalg.norm(n1 - n2)) < 1e-12


def test_jacobi_matches_numpy(rng):
    m = rng.normal(size=(50, 4, 4)) + 1j * rng.normal(size=(50, 4, 4))
    m = m + np.swapaxes(m, -1, -2).conj()
    w, v = jacobi_eigh(m)
    ref = np.linalg.eigvalsh(m)
    assert np.max(np.abs(np.sort(w, axis=-1) - ref)) < 1e-12
    # eigenvectors reconstruct the matrix
    rec = np.einsum("...ij,...j,...kj->...ik", v, w, v.conj())
    assert np.max(np.abs(rec - m)) < 1e-12


def test_trace_norm_examples():
    assert abs(trace_norm_4(np.diag([1.0, -1.0, 2.0, -2.0])) - 6) < 1e-14
    ident = MapFactors(BASES["dephasing"], np.ones(4))
    assert abs(trace_norm_4(choi_state(ident)) - 1) < 1e-14
    half = MapFactors(BASES["dephasing"], [1, 0.5, 0.5, 1])
    c = choi_state(half)
    assert np.min(np.linalg.eigvalsh(c)) > -1e-14
    assert abs(trace_norm_4(c) - 1) < 1e-14


@pytest.mark.parametrize("name", sorted(BASES))
def test_basis_biorthogonal_and_complete(name, rng):
    b = BASES[name]
    assert np.max(np.abs(b.gram() - np.eye(4))) < 1e-14
    for _ in range(20):
        o = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        c = damping_expand(o, b)
        assert np.max(np.abs(np.einsum("i,ikl->kl", c, b.basis) - o)) < 1e-13


def test_expand_examples():
    dec = BASES["decay"]
    assert np.allclose(damping_expand(SM, dec), [0, 0, 1, 0], atol=1e-15)
    # identity = 2 (1 - sz)/2 + sz
    assert np.allclose(damping_expand(ID2, dec), [2, 0, 0, 1], atol=1e-15)
    assert np.allclose(damping_expand(P_UP, BASES["dephasing"]), [0.5, 0, 0, 0.5], atol=1e-15)
    assert np.allclose(BASES["dephasing"].traces, [2, 0, 0, 0])


def test_apply_map_examples():
    b = BASES["dephasing"]
    o = np.array([[1, 2], [3, 4]], dtype=complex)
    assert np.allclose(apply_map(MapFactors(b, np.ones(4)), o), o)
    e = np.exp(-0.3)
    assert np.allclose(apply_map(MapFactors(b, [1, e, e, 1]), SP), e * SP)
    # amplitude damping: |G|^2 on the sz factor, |1><1| -> diag(|G|^2, 1 - |G|^2)
    G = 0.6 * np.exp(0.4j)
    out = apply_map(MapFactors(BASES["decay"], [1, G, np.conj(G), abs(G) ** 2]), P_UP)
    assert np.allclose(out, np.diag([abs(G) ** 2, 1 - abs(G) ** 2]))


def test_choi_examples():
    b = BASES["dephasing"]
    full = choi_state(MapFactors(b, [1, 0, 0, 1]))
    expected = np.zeros((4, 4))
    expected[0, 0] = expected[3, 3] = 0.5
    assert np.allclose(full, expected)
    G = np.sqrt(0.5)
    c = choi_state(MapFactors(BASES["decay"], [1, G, G, 0.5]))
    # output ground, input excited: rows ordered (output, input), index 0 = excited
    assert abs(c[2, 2] - 0.25) < 1e-15
    assert abs(c[1, 1]) < 1e-15
    assert abs(np.trace(c) - 1) < 1e-15


def test_choi_half_amplitude_is_subnormalised():
    c = choi_state(MapFactors(BASES["dephasing"], np.ones(4)), amplitude=0.5)
    assert abs(np.trace(c) - 0.5) < 1e-15


def test_compose_multiplies_factors():
    b = BASES["engineered"]
    f1 = MapFactors(b, [1, 1, 0.5j, -0.5j])
    f2 = MapFactors(b, [1, 1, 0.3, 0.3])
    o = projector(ket_plus())
    assert np.allclose(apply_map(compose(f2, f1), o), apply_map(f2, apply_map(f1, o)))


def test_correlator_matrices_left_multiplication(rng):
    b = BASES["decay"]
    mats = correlator_matrices(b, {"p": SP, "z": SZ})
    for _ in range(10):
        o = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        c = damping_expand(o, b)
        for op, key in ((SP, "p"), (SZ, "z")):
            assert np.allclose(c @ mats[key], damping_expand(op @ o, b), atol=1e-14)


def test_is_density():
    assert is_density(projector(ket_plus()))
    assert not is_density(SZ)
    assert not is_density(2 * P_UP)
