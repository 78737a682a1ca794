"""Two-qubit entanglement and mixedness measures."""

from __future__ import annotations

import numpy as np

_SY = np.array([[0.0, -1.0j], [1.0j, 0.0]])

#: sigma_y x sigma_y spin-flip matrix (real entries).
SPIN_FLIP = np.kron(_SY, _SY).real.astype(float)


class InvalidDensityMatrix(ValueError):
    """Input is not a density matrix within tolerance."""


def _check_density(rho: np.ndarray, trace_tol: float = 1e-6,
                   eig_tol: float = 1e-6) -> None:
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise InvalidDensityMatrix(f"expected a square matrix, got {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T)) > trace_tol:
        raise InvalidDensityMatrix("matrix is not Hermitian")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > trace_tol:
        raise InvalidDensityMatrix(f"trace deviates from 1 by {abs(tr - 1.0):.3e}")
    evals = np.linalg.eigvalsh(rho)
    if evals.min() < -eig_tol:
        raise InvalidDensityMatrix(f"negative eigenvalue {evals.min():.3e}")


def wootters_concurrence(rho: np.ndarray) -> float:
    """Concurrence C = max{0, l1 - l2 - l3 - l4} of a 4x4 density matrix.

    The l_i are the decreasing square roots of the eigenvalues of
    rho (sy x sy) rho* (sy x sy).  Eigensolving that product (or its
    Hermitian similarity) squares the small l_i and halves their
    precision; instead the l_i are computed as the singular values of the
    complex-symmetric matrix X^T (sy x sy) X with rho = X X^H, which is
    algebraically identical and keeps near-zero l_i at full accuracy.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise InvalidDensityMatrix(f"expected a 4x4 matrix, got {rho.shape}")
    _check_density(rho)
    evals, vecs = np.linalg.eigh(rho)
    X = vecs * np.sqrt(np.clip(evals, 0.0, None))
    tau = X.T @ SPIN_FLIP @ X
    lam = np.linalg.svd(tau, compute_uv=False)
    c = lam[0] - lam[1] - lam[2] - lam[3]
    return float(min(max(c, 0.0), 1.0))


def linear_entropy_general(rho: np.ndarray) -> float:
    """Linear entropy S = 1 - Tr(rho^2) of a density matrix of any dimension."""
    rho = np.asarray(rho, dtype=complex)
    _check_density(rho)
    purity = np.trace(rho @ rho).real
    return float(max(1.0 - purity, 0.0))
