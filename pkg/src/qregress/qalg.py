"""Dense 2x2 and 4x4 complex algebra for qubit maps.

Conventions
-----------
Matrix index 0 is the excited (spin-up) state and index 1 the ground
state, so ``SZ = diag(1, -1)``, ``SP = |0><1|`` raises and ``SM = |1><0|``
lowers.  Operators are plain ``numpy`` arrays of shape ``(2, 2)`` or
``(4, 4)``; batched routines accept a leading stack of matrices.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import NotHermitianError

__all__ = [
    "ID2", "SP", "SM", "SZ", "SX", "SY", "P_UP", "P_DOWN",
    "ket_plus", "ket_minus", "projector", "bloch_state",
    "check_hermitian", "is_density", "eigvalsh2", "jacobi_eigh",
    "trace_distance", "trace_norm_4",
    "DampingBasis", "CorrelatorMatrices", "MapFactors",
    "damping_expand", "apply_map", "compose", "choi_state",
    "correlator_matrices", "decay_operator_basis", "dephasing_operator_basis",
    "engineered_operator_basis",
]

ID2 = np.eye(2, dtype=complex)
SP = np.array([[0, 1], [0, 0]], dtype=complex)
SM = np.array([[0, 0], [1, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
P_UP = np.array([[1, 0], [0, 0]], dtype=complex)
P_DOWN = np.array([[0, 0], [0, 1]], dtype=complex)

HERMITIAN_TOL = 1e-10


def projector(psi) -> np.ndarray:
    """Return ``|psi><psi|`` for a normalised copy of ``psi``."""
    psi = np.asarray(psi, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


def ket_plus() -> np.ndarray:
    return np.array([1, 1], dtype=complex) / np.sqrt(2)


def ket_minus() -> np.ndarray:
    return np.array([1, -1], dtype=complex) / np.sqrt(2)


def bloch_state(nx: float, ny: float, nz: float) -> np.ndarray:
    """Density matrix ``(1 + n.sigma)/2`` for a Bloch vector with ``|n| <= 1``."""
    return 0.5 * (ID2 + nx * SX + ny * SY + nz * SZ)


def check_hermitian(m: np.ndarray, tol: float = HERMITIAN_TOL) -> None:
    """Raise :class:`NotHermitianError` if ``m`` deviates from its adjoint."""
    m = np.asarray(m)
    asym = np.max(np.abs(m - np.swapaxes(m, -1, -2).conj())) if m.size else 0.0
    if asym > tol:
        raise NotHermitianError(f"operator is not Hermitian (asymmetry {asym:.3e})")


def is_density(rho: np.ndarray, tol: float = 1e-12) -> bool:
    """True if ``rho`` is Hermitian, unit trace and positive within ``tol``."""
    rho = np.asarray(rho, dtype=complex)
    if np.max(np.abs(rho - rho.conj().T)) > 1e-14:
        return False
    if abs(np.trace(rho) - 1) > tol:
        return False
    return bool(np.min(np.linalg.eigvalsh(rho)) >= -tol)


def eigvalsh2(m: np.ndarray) -> np.ndarray:
    """Closed-form eigenvalues of a Hermitian 2x2 matrix, ascending."""
    a = m[..., 0, 0].real
    d = m[..., 1, 1].real
    b = m[..., 0, 1]
    mean = 0.5 * (a + d)
    rad = np.hypot(0.5 * (a - d), np.abs(b))
    return np.stack([mean - rad, mean + rad], axis=-1)


def trace_distance(rho1: np.ndarray, rho2: np.ndarray) -> float:
    """Trace distance ``(1/2) sum |chi_i|`` over eigenvalues of ``rho1 - rho2``.

    Parameters
    ----------
    rho1, rho2 : ndarray, shape (2, 2)
        Density matrices.

    Returns
    -------
    float
        Value in ``[0, 1]``.

    Raises
    ------
    NotHermitianError
        If either input is not Hermitian to 1e-10.
    """
    rho1 = np.asarray(rho1, dtype=complex)
    rho2 = np.asarray(rho2, dtype=complex)
    check_hermitian(rho1)
    check_hermitian(rho2)
    chi = eigvalsh2(rho1 - rho2)
    return float(0.5 * np.sum(np.abs(chi)))


def jacobi_eigh(m: np.ndarray, tol: float = 1e-14, max_sweeps: int = 100):
    """Cyclic Jacobi eigen-decomposition of Hermitian matrices.

    Works on a single matrix or a stack of shape ``(..., n, n)``; all
    matrices in the stack are rotated together.

    Parameters
    ----------
    m : ndarray
        Hermitian matrix or stack of matrices.
    tol : float
        Convergence threshold on the off-diagonal Frobenius norm, relative
        to ``max(1, ||m||_F)``.
    max_sweeps : int
        Upper bound on full cyclic sweeps.

    Returns
    -------
    w : ndarray
        Eigenvalues (unsorted), shape ``(..., n)``.
    v : ndarray
        Unitary whose columns are the eigenvectors.
    """
    a = np.array(m, dtype=complex, copy=True)
    check_hermitian(a)
    a = 0.5 * (a + np.swapaxes(a, -1, -2).conj())
    n = a.shape[-1]
    v = np.broadcast_to(np.eye(n, dtype=complex), a.shape).copy()
    scale = np.maximum(1.0, np.sqrt(np.sum(np.abs(a) ** 2, axis=(-2, -1))))
    offmask = ~np.eye(n, dtype=bool)
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.abs(a[..., offmask]) ** 2, axis=-1))
        if np.all(off <= tol * scale):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[..., p, q]
                r = np.abs(apq)
                active = r > 0
                if not np.any(active):
                    continue
                safe_r = np.where(active, r, 1.0)
                phase = np.where(active, apq / safe_r, 1.0)
                app = a[..., p, p].real
                aqq = a[..., q, q].real
                tau = (aqq - app) / (2.0 * safe_r)
                t = np.where(tau >= 0, 1.0, -1.0) / (np.abs(tau) + np.sqrt(1.0 + tau * tau))
                t = np.where(active, t, 0.0)
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                # J = diag(1, conj(phase)) applied to the real rotation
                jpp = c
                jpq = s
                jqp = -s * phase.conj()
                jqq = c * phase.conj()
                ap = a[..., :, p].copy()
                aq = a[..., :, q].copy()
                a[..., :, p] = ap * jpp[..., None] + aq * jqp[..., None]
                a[..., :, q] = ap * jpq[..., None] + aq * jqq[..., None]
                ap = a[..., p, :].copy()
                aq = a[..., q, :].copy()
                a[..., p, :] = ap * np.conj(jpp)[..., None] + aq * np.conj(jqp)[..., None]
                a[..., q, :] = ap * np.conj(jpq)[..., None] + aq * np.conj(jqq)[..., None]
                vp = v[..., :, p].copy()
                vq = v[..., :, q].copy()
                v[..., :, p] = vp * jpp[..., None] + vq * jqp[..., None]
                v[..., :, q] = vp * jpq[..., None] + vq * jqq[..., None]
    w = np.real(np.diagonal(a, axis1=-2, axis2=-1)).copy()
    return w, v


def trace_norm_4(m: np.ndarray) -> np.ndarray | float:
    """Trace norm of a Hermitian 4x4 matrix (or stack) via Jacobi eigenvalues."""
    m = np.asarray(m, dtype=complex)
    w, _ = jacobi_eigh(m)
    out = np.sum(np.abs(w), axis=-1)
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class DampingBasis:
    """Eigen-operator basis of a time-local qubit generator.

    Attributes
    ----------
    basis : ndarray, shape (4, 2, 2)
        Eigen-operators ``Lambda_i``.
    duals : ndarray, shape (4, 2, 2)
        Dual operators with ``Tr[duals[i] @ basis[j]] = delta_ij``.
    eigenvalue_fn : callable, optional
        ``(i, t) -> lambda_i(t)``.
    eigenvalue_integral_fn : callable, optional
        ``(i, t1, t2) -> int_{t1}^{t2} lambda_i``.
    name : str
    """

    basis: np.ndarray
    duals: np.ndarray
    eigenvalue_fn: Optional[Callable[[int, float], complex]] = field(default=None, compare=False)
    eigenvalue_integral_fn: Optional[Callable[[int, float, float], complex]] = field(
        default=None, compare=False)
    name: str = ""

    @classmethod
    def from_operators(cls, ops: Sequence[np.ndarray], eigenvalue_fn=None,
                       eigenvalue_integral_fn=None, name: str = "") -> "DampingBasis":
        """Build the basis and solve the biorthogonality system for the duals.

        Each dual has four unknown entries, so the conditions
        ``Tr[D^i L_j] = delta_ij`` form a 16x16 linear system.
        """
        basis = np.array([np.asarray(o, dtype=complex) for o in ops])
        if basis.shape != (4, 2, 2):
            raise ValueError("a qubit damping basis needs four 2x2 operators")
        # Tr[D L_j] = sum_kl D_kl (L_j)_lk = vec(D) . vec(L_j^T)
        rows = np.array([b.T.reshape(4) for b in basis])          # (j, kl)
        system = np.kron(np.eye(4), rows)                         # (i*4+j, i*4+kl)
        rhs = np.eye(4).reshape(16)
        sol = np.linalg.solve(system, rhs.astype(complex))
        duals = sol.reshape(4, 2, 2)
        return cls(basis, duals, eigenvalue_fn, eigenvalue_integral_fn, name)

    @property
    def traces(self) -> np.ndarray:
        """``Tr[Lambda_i]`` for each basis element."""
        return np.trace(self.basis, axis1=1, axis2=2)

    def gram(self) -> np.ndarray:
        """Matrix ``Tr[duals[i] basis[j]]``; identity for a valid basis."""
        return np.einsum("ikl,jlk->ij", self.duals, self.basis)


def decay_operator_basis() -> list[np.ndarray]:
    """``[(1 - sz)/2, s+, s-, sz]`` as used for amplitude damping."""
    return [0.5 * (ID2 - SZ), SP, SM, SZ]


def dephasing_operator_basis() -> list[np.ndarray]:
    """``[1, s+, s-, sz]``."""
    return [ID2, SP, SM, SZ]


def engineered_operator_basis() -> list[np.ndarray]:
    """``[P_H, P_V, |H><V|, |V><H|]`` with ``H`` stored at index 0."""
    return [P_UP, P_DOWN, SP, SM]


def damping_expand(o: np.ndarray, basis: DampingBasis) -> np.ndarray:
    """Coefficients ``c^i = Tr[dual_i O]``."""
    o = np.asarray(o, dtype=complex)
    return np.einsum("ikl,lk->i", basis.duals, o)


@dataclass(frozen=True)
class MapFactors:
    """A map diagonal in a damping basis: ``Lambda_i -> scale[i] Lambda_i``."""

    basis: DampingBasis
    scale: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "scale", np.asarray(self.scale, dtype=complex).reshape(4))

    def matrix(self) -> np.ndarray:
        """Superoperator in the row-major ``vec`` convention, shape (4, 4)."""
        cols = []
        for k in range(4):
            e = np.zeros(4, dtype=complex)
            e[k] = 1
            cols.append(apply_map(self, e.reshape(2, 2)).reshape(4))
        return np.array(cols).T


def apply_map(f: MapFactors, o: np.ndarray) -> np.ndarray:
    """Apply ``sum_i v_i c^i Lambda_i`` to an operator (or stack of operators)."""
    o = np.asarray(o, dtype=complex)
    c = np.einsum("ikl,...lk->...i", f.basis.duals, o)
    return np.einsum("...i,ikl->...kl", c * f.scale, f.basis.basis)


def compose(later: MapFactors, earlier: MapFactors) -> MapFactors:
    """Composition ``later o earlier`` of two maps sharing a basis."""
    if later.basis is not earlier.basis and not np.allclose(later.basis.basis, earlier.basis.basis):
        raise ValueError("maps must share a damping basis to compose factor-wise")
    return MapFactors(later.basis, later.scale * earlier.scale)


def choi_state(f: MapFactors, amplitude: float = 1 / np.sqrt(2)) -> np.ndarray:
    """Choi state ``(Phi x 1)|Psi><Psi|`` with ``|Psi> = amplitude (|00> + |11>)``.

    The map acts on the first tensor factor.  The default amplitude gives
    a unit-norm ``|Psi>``; other values are accepted to study alternative
    normalisations.
    """
    units = np.zeros((2, 2, 2, 2), dtype=complex)
    for i in range(2):
        for j in range(2):
            units[i, j, i, j] = 1.0
    images = apply_map(f, units)                      # (i, j, a, a')
    # C[(a, i), (a', j)] = amp^2 Phi(E_ij)[a, a']
    c = amplitude ** 2 * np.einsum("ijab->aibj", images)
    return c.reshape(4, 4)


@dataclass(frozen=True)
class CorrelatorMatrices:
    """Matrices ``(A_alpha)[i, j] = Tr[dual_j sigma_alpha Lambda_i]``.

    Left multiplication by ``sigma_alpha`` maps coefficient vector ``c``
    to ``c @ A_alpha``.
    """

    basis: DampingBasis
    A: dict

    def __getitem__(self, label):
        return self.A[label]


def correlator_matrices(basis: DampingBasis, observables: dict) -> CorrelatorMatrices:
    """Build ``A_alpha`` for each named observable."""
    out = {}
    for label, op in observables.items():
        op = np.asarray(op, dtype=complex)
        out[label] = np.einsum("jkl,lm,imk->ij", basis.duals, op, basis.basis)
    return CorrelatorMatrices(basis, out)
