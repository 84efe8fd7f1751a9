"""Dense complex linear algebra for 4x4 (two-qubit) problems.

Everything downstream (partial transpose, matrix square roots, fidelities,
Fisher information) reduces to Hermitian eigenproblems of tiny matrices, so
the eigensolver is a self-contained cyclic Jacobi iteration instead of a
LAPACK binding: for dim <= 4 it converges in a handful of sweeps and keeps
the numerical path fully under our control.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

# Pauli-Y in the sign convention used throughout this package.
SIGMA_Y = np.array([[0.0, 1.0j], [-1.0j, 0.0]])

HERMITICITY_TOL = 1e-10
JACOBI_OFF_TOL = 1e-14
PSD_CLAMP_TOL = 1e-10


def frobenius(a: np.ndarray) -> float:
    """Frobenius norm ||A||_F."""
    return float(np.sqrt(np.sum(np.abs(a) ** 2)))


def require_square(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {a.shape}")
    return a


def require_hermitian(a: np.ndarray, tol: float = HERMITICITY_TOL) -> np.ndarray:
    """Check ||A - A^dag||_F <= tol and return the hermitized (A + A^dag)/2."""
    a = require_square(a)
    dev = frobenius(a - a.conj().T)
    if dev > tol:
        raise DomainError(f"matrix is not Hermitian within {tol:g} (deviation {dev:.3e})")
    return 0.5 * (a + a.conj().T)


@dataclass
class HermitianEigen:
    """Eigenvalues (ascending, real) and orthonormal eigenvector columns."""

    values: np.ndarray
    vectors: np.ndarray


def _jacobi_rotation(app: float, aqq: float, apq: complex) -> tuple[float, complex]:
    """Return (c, s_phase) for the 2x2 unitary zeroing the (p,q) pivot.

    The rotation is [[c, s*e^{i phi}], [-s*e^{-i phi}, c]] with apq = |apq| e^{i phi};
    the smaller-angle root is chosen for stability.
    """
    mod = abs(apq)
    phase = apq / mod
    tau = (aqq - app) / (2.0 * mod)
    if tau >= 0.0:
        t = 1.0 / (tau + np.hypot(1.0, tau))
    else:
        t = -1.0 / (-tau + np.hypot(1.0, tau))
    c = 1.0 / np.sqrt(1.0 + t * t)
    return c, t * c * phase


def hermitian_eig(a: np.ndarray, tol: float = HERMITICITY_TOL) -> HermitianEigen:
    """Full eigensystem of a Hermitian matrix by cyclic Jacobi sweeps.

    Sweeps run until the off-diagonal Frobenius mass drops below 1e-14, which
    for dim <= 4 typically takes < 10 sweeps and reconstructs A to ~1e-14.
    """
    a = require_hermitian(a, tol)
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    scale = max(frobenius(a), 1e-300)
    for _ in range(100):
        off_part = a - np.diag(np.diag(a))
        if frobenius(off_part) < JACOBI_OFF_TOL:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if abs(a[p, q]) <= 1e-18 * scale:
                    continue
                c, s = _jacobi_rotation(a[p, p].real, a[q, q].real, a[p, q])
                g = np.eye(n, dtype=complex)
                g[p, p] = c
                g[p, q] = s
                g[q, p] = -np.conj(s)
                g[q, q] = c
                a = g.conj().T @ a @ g
                v = v @ g
    else:
        raise DomainError("Jacobi eigensolver failed to converge in 100 sweeps")
    values = np.diag(a).real.copy()
    order = np.argsort(values, kind="stable")
    return HermitianEigen(values[order], v[:, order])


def clamp_psd_spectrum(values: np.ndarray, tol: float = PSD_CLAMP_TOL) -> np.ndarray:
    """Zero out round-off negatives in [-tol, 0); anything below -tol is a real error."""
    values = np.asarray(values, dtype=float)
    if np.min(values) < -tol:
        raise DomainError(f"spectrum has eigenvalue {np.min(values):.3e} below -{tol:g}")
    return np.where(values < 0.0, 0.0, values)


def trace_norm(a: np.ndarray) -> float:
    """Trace norm ||A||_1 (sum of singular values; sum |eig| for Hermitian A)."""
    a = require_square(a)
    if frobenius(a - a.conj().T) <= HERMITICITY_TOL:
        return float(np.sum(np.abs(hermitian_eig(a).values)))
    gram = hermitian_eig(a.conj().T @ a)
    return float(np.sum(np.sqrt(clamp_psd_spectrum(gram.values, tol=1e-8))))


def partial_transpose_a(rho: np.ndarray) -> np.ndarray:
    """Transpose the first-qubit indices of a 4x4 two-qubit operator.

    Index convention: row (a,b), column (c,d) with a,c the first qubit;
    output[(a,b),(c,d)] = input[(c,b),(a,d)].
    """
    rho = require_square(rho)
    if rho.shape != (4, 4):
        raise DomainError(f"partial transpose expects a 4x4 matrix, got {rho.shape}")
    return rho.reshape(2, 2, 2, 2).transpose(2, 1, 0, 3).reshape(4, 4).copy()


def psd_sqrt(a: np.ndarray) -> np.ndarray:
    """Hermitian square root S of a PSD matrix A, with S @ S ~ A to 1e-9."""
    eig = hermitian_eig(a)
    vals = clamp_psd_spectrum(eig.values)
    s = (eig.vectors * np.sqrt(vals)) @ eig.vectors.conj().T
    return 0.5 * (s + s.conj().T)


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product of two single-qubit (2x2) operators."""
    a = require_square(a)
    b = require_square(b)
    if a.shape != (2, 2) or b.shape != (2, 2):
        raise DomainError(f"kron expects 2x2 factors, got {a.shape} and {b.shape}")
    return np.kron(a, b)
