"""Two-qubit state family, entanglement measures, fidelity, family fitting.

The workbench is built around a two-parameter family of polarization states
in the product basis (|HH>, |HV>, |VH>, |VV>):

    rho(p, q) = (1 - p) * rho_deph + p * |psi_q><psi_q|,
    |psi_q>   = sqrt(q) |HV> - sqrt(1 - q) |VH>,

where rho_deph = diag(0, 1/2, 1/2, 0) is the fully dephased 50/50 mixture of
|HV> and |VH> (the p -> 0 decoherence limit; any variant of this family with
a negative diagonal entry is not a physical state). p interpolates from that
mixture to the pure state |psi_q>; at q = 1/2, p = 1 the state is the singlet.

Closed forms on the family: negativity N = 2 p sqrt(q (1 - q)), log-negativity
L = log2(1 + N), concurrence C = N, and geometric discord Q = N^2 / 2.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import matcore
from .errors import DomainError

DENSITY_TOL = 1e-10

# Measure kinds used across estimation, sweeps and reports.
NEGATIVITY = "negativity"
LOG_NEGATIVITY = "log_negativity"
CONCURRENCE = "concurrence"
QGD = "qgd"
MEASURE_KINDS = (NEGATIVITY, LOG_NEGATIVITY, CONCURRENCE, QGD)

# Valid range of each measure on two qubits.
MEASURE_RANGE = {
    NEGATIVITY: (0.0, 1.0),
    LOG_NEGATIVITY: (0.0, 1.0),
    CONCURRENCE: (0.0, 1.0),
    QGD: (0.0, 0.5),
}


def validate_density_matrix(rho: np.ndarray, tol: float = DENSITY_TOL) -> np.ndarray:
    """Hermitian within tol, unit trace within tol, spectrum >= -tol."""
    rho = matcore.require_hermitian(rho, tol)
    if rho.shape != (4, 4):
        raise DomainError(f"expected a 4x4 density matrix, got shape {rho.shape}")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > tol:
        raise DomainError(f"trace {tr!r} deviates from 1 beyond {tol:g}")
    matcore.clamp_psd_spectrum(matcore.hermitian_eig(rho).values, tol=tol)
    return rho


def _family_matrix(p: float, q: float) -> np.ndarray:
    """Family matrix without range validation (internal; Fisher paths poke
    a half-step outside [0, 1] for central differences)."""
    s = np.sqrt(q * (1.0 - q)) if 0.0 <= q <= 1.0 else np.sqrt(abs(q * (1.0 - q)))
    rho = np.zeros((4, 4), dtype=complex)
    rho[1, 1] = (1.0 - p) / 2.0 + p * q
    rho[2, 2] = (1.0 - p) / 2.0 + p * (1.0 - q)
    rho[1, 2] = rho[2, 1] = -p * s
    return rho


def family_state(p: float, q: float) -> np.ndarray:
    """Density matrix rho(p, q); p, q must lie in [0, 1]."""
    if not (0.0 <= p <= 1.0) or not (0.0 <= q <= 1.0):
        raise DomainError(f"family parameters out of range: p={p!r}, q={q!r}")
    return _family_matrix(float(p), float(q))


def singlet() -> np.ndarray:
    """(|HV> - |VH>)/sqrt(2) as a density matrix; equals family_state(1, 1/2)."""
    return family_state(1.0, 0.5)


def dephased_mixture() -> np.ndarray:
    """diag(0, 1/2, 1/2, 0); equals family_state(0, q) for any q."""
    return family_state(0.0, 0.5)


# --- measures ---------------------------------------------------------------

def _sqrt_spectrum(values: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    """sqrt of a PSD spectrum with round-off dust zeroed first.

    Eigenvalues below 1e-13 of the largest are numerical zeros; taking sqrt
    of such dust would amplify ~1e-17 noise to ~1e-9 absolute error.
    """
    vals = matcore.clamp_psd_spectrum(values, tol=tol)
    top = float(np.max(vals, initial=0.0))
    vals = np.where(vals < 1e-13 * top, 0.0, vals)
    return np.sqrt(vals)


def negativity(rho: np.ndarray) -> float:
    """N(rho) = ||rho^{T_A}||_1 - 1, clamped to [0, 1]."""
    rho = validate_density_matrix(rho)
    tn = matcore.trace_norm(matcore.partial_transpose_a(rho))
    return float(np.clip(tn - 1.0, 0.0, 1.0))


def negativity_closed(p: float, q: float) -> float:
    """N(p, q) = 2 p sqrt(q (1 - q))."""
    return float(2.0 * p * np.sqrt(q * (1.0 - q)))


def log_negativity(rho: np.ndarray) -> float:
    """L(rho) = log2 ||rho^{T_A}||_1, clamped to [0, 1]."""
    rho = validate_density_matrix(rho)
    tn = matcore.trace_norm(matcore.partial_transpose_a(rho))
    return float(np.log2(np.clip(tn, 1.0, 2.0)))


def log_negativity_closed(p: float, q: float) -> float:
    """L(p, q) = log2(1 + N(p, q))."""
    return float(np.log2(1.0 + negativity_closed(p, q)))


def concurrence(rho: np.ndarray) -> float:
    """Wootters concurrence max(0, l1 - l2 - l3 - l4).

    The l_i are the descending eigenvalues of
    R = sqrt(sqrt(rho) rho~ sqrt(rho)) with the spin-flipped
    rho~ = (sy x sy) rho* (sy x sy).
    """
    rho = validate_density_matrix(rho)
    yy = matcore.kron(matcore.SIGMA_Y, matcore.SIGMA_Y)
    flipped = yy @ rho.conj() @ yy
    root = matcore.psd_sqrt(rho)
    inner = root @ flipped @ root
    lam = _sqrt_spectrum(matcore.hermitian_eig(inner).values)
    lam = np.sort(lam)[::-1]
    return float(np.clip(lam[0] - lam[1] - lam[2] - lam[3], 0.0, 1.0))


def concurrence_closed(p: float, q: float) -> float:
    """On this family the concurrence coincides with the negativity."""
    return negativity_closed(p, q)


def qgd(rho: np.ndarray) -> float:
    """Geometric discord via the family relation Q = N^2 / 2.

    Valid on (and near) the state family this package studies; it is not a
    general-state geometric-discord formula.
    """
    n = negativity(rho)
    return float(0.5 * n * n)


def qgd_closed(p: float, q: float) -> float:
    """Q(p, q) = N(p, q)^2 / 2."""
    n = negativity_closed(p, q)
    return float(0.5 * n * n)


def measures(rho: np.ndarray) -> dict[str, float]:
    """All four measure values of a state."""
    return {
        NEGATIVITY: negativity(rho),
        LOG_NEGATIVITY: log_negativity(rho),
        CONCURRENCE: concurrence(rho),
        QGD: qgd(rho),
    }


def fidelity(rho_a: np.ndarray, rho_b: np.ndarray) -> float:
    """Uhlmann fidelity F = Tr sqrt(sqrt(a) b sqrt(a)), clamped to [0, 1]."""
    rho_a = validate_density_matrix(rho_a)
    rho_b = validate_density_matrix(rho_b)
    root = matcore.psd_sqrt(rho_a)
    inner = root @ rho_b @ root
    return float(np.clip(np.sum(_sqrt_spectrum(matcore.hermitian_eig(inner).values)), 0.0, 1.0))


# --- family fitting -----------------------------------------------------------

@dataclass
class FamilyFit:
    """Least-squares projection of a state onto the family.

    residual is the Frobenius distance at the optimum. degenerate means p ~ 0
    where q is unidentifiable (q is reported as 1/2). out_of_family flags a
    residual above 0.05.
    """

    p: float
    q: float
    residual: float
    degenerate: bool = False
    out_of_family: bool = False


DEGENERATE_P = 0.01
OUT_OF_FAMILY_RESIDUAL = 0.05


def _fit_terms(rho: np.ndarray) -> tuple[float, float, complex, float]:
    """(d1, d2, c, K): middle-block data and the constant off-family mass."""
    d1 = rho[1, 1].real
    d2 = rho[2, 2].real
    c = complex(rho[1, 2])
    mask = np.ones((4, 4), dtype=bool)
    mask[1, 1] = mask[2, 2] = mask[1, 2] = mask[2, 1] = False
    k = float(np.sum(np.abs(rho[mask]) ** 2))
    return d1, d2, c, k


def _best_p(d1: float, d2: float, c: complex, q: float) -> float:
    # closed-form linear least squares in p at fixed q (denominator is 1/2 exactly)
    s = np.sqrt(q * (1.0 - q))
    p = 2.0 * ((d1 - d2) * (q - 0.5) - 2.0 * c.real * s)
    return float(np.clip(p, 0.0, 1.0))


def _objective(d1: float, d2: float, c: complex, k: float, p, q):
    s = np.sqrt(q * (1.0 - q))
    f1 = 0.5 + p * (q - 0.5)
    f2 = 0.5 + p * (0.5 - q)
    off = -p * s
    return (d1 - f1) ** 2 + (d2 - f2) ** 2 + 2.0 * ((c.real - off) ** 2 + c.imag ** 2) + k


def fit_family_params(rho: np.ndarray) -> FamilyFit:
    """Project a density matrix onto the family by least squares.

    Coarse 101x101 grid over (p, q), then descent on the profile objective
    (p re-solved in closed form at each q, golden-section in q) down to
    parameter changes below 1e-10.
    """
    rho = validate_density_matrix(rho)
    d1, d2, c, k = _fit_terms(rho)

    grid = np.linspace(0.0, 1.0, 101)
    pg, qg = np.meshgrid(grid, grid, indexing="ij")
    vals = _objective(d1, d2, c, k, pg, qg)
    i, j = np.unravel_index(np.argmin(vals), vals.shape)
    q_hat = float(grid[j])

    def profile(q: float) -> float:
        return float(_objective(d1, d2, c, k, _best_p(d1, d2, c, q), q))

    lo = max(0.0, q_hat - 0.015)
    hi = min(1.0, q_hat + 0.015)
    # expand the bracket while the minimum sits on an edge
    for _ in range(80):
        if profile(lo) < profile(lo + 1e-4) and lo > 0.0:
            lo = max(0.0, lo - 0.03)
        elif profile(hi) < profile(hi - 1e-4) and hi < 1.0:
            hi = min(1.0, hi + 0.03)
        else:
            break

    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    x1 = b - invphi * (b - a)
    x2 = a + invphi * (b - a)
    f1v, f2v = profile(x1), profile(x2)
    while b - a > 1e-12:
        if f1v < f2v:
            b, x2, f2v = x2, x1, f1v
            x1 = b - invphi * (b - a)
            f1v = profile(x1)
        else:
            a, x1, f1v = x1, x2, f2v
            x2 = a + invphi * (b - a)
            f2v = profile(x2)
    candidates = [a, x1, x2, b, lo, hi]
    q_hat = min(candidates, key=profile)
    p_hat = _best_p(d1, d2, c, q_hat)

    residual = float(np.sqrt(max(0.0, _objective(d1, d2, c, k, p_hat, q_hat))))
    degenerate = p_hat < DEGENERATE_P
    if degenerate:
        q_hat = 0.5
    return FamilyFit(
        p=float(p_hat),
        q=float(q_hat),
        residual=residual,
        degenerate=degenerate,
        out_of_family=residual > OUT_OF_FAMILY_RESIDUAL,
    )
