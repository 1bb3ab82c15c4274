"""Complex-Hermitian linear algebra kernel.

Eigendecomposition, PSD projection and the rank-one residual
``trace(Q) - lambda_max(Q)`` that the SCA machinery is built on.  All
functions are pure; matrices are plain ``complex128`` ndarrays.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels

HERMITIAN_TOL = 1e-12  # relative to the largest entry magnitude
PSD_TOL = 1e-9


class NonHermitianError(ValueError):
    """Input violates the Hermitian symmetry invariant."""


class NotPsdError(ValueError):
    """Input is indefinite beyond tolerance where PSD is required."""


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues sorted descending; column k of ``eigenvectors`` pairs with
    ``eigenvalues[k]``."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def _check_hermitian(a):
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise NonHermitianError(f"expected a square matrix, got shape {a.shape}")
    dev = np.abs(a - a.conj().T)
    scale = np.abs(a).max()
    worst = float(dev.max())
    if worst > HERMITIAN_TOL * max(scale, 1e-300):
        i, j = np.unravel_index(int(dev.argmax()), dev.shape)
        raise NonHermitianError(
            f"matrix is not Hermitian: entry ({i},{j})={a[i, j]!r} vs "
            f"conj(({j},{i}))={np.conj(a[j, i])!r}, deviation {worst:.3e} "
            f"exceeds {HERMITIAN_TOL:.1e} * max|entry| = {HERMITIAN_TOL * scale:.3e}"
        )
    return a


def hermitian_eig(a) -> EigenDecomposition:
    """Full eigendecomposition of a Hermitian matrix, eigenvalues descending.

    Raises :class:`NonHermitianError` when the symmetry invariant is violated,
    naming the worst entry pair.
    """
    a = _check_hermitian(a)
    w, v = _kernels.eigh_stack(a[None, :, :])
    # LAPACK returns ascending order
    return EigenDecomposition(w[0, ::-1].copy(), np.ascontiguousarray(v[0, :, ::-1]))


def max_eigpair(a):
    """Largest eigenvalue and a unit-norm eigenvector of a Hermitian matrix."""
    a = _check_hermitian(a)
    w, v = _kernels.eigh_stack(a[None, :, :])
    return float(w[0, -1]), v[0, :, -1].copy()


def psd_project(a):
    """Frobenius-nearest PSD matrix: clamp negative eigenvalues to zero."""
    a = _check_hermitian(a)
    p, _ = _kernels.psd_project_stack(a[None, :, :])
    return p[0]


def rank_one_residual(q) -> float:
    """``trace(Q) - lambda_max(Q)`` for PSD ``Q``; zero iff at most one
    eigenvalue is nonzero."""
    q = _check_hermitian(q)
    w = _kernels.eigvalsh_stack(q[None, :, :])[0]
    if w[0] < -PSD_TOL:
        raise NotPsdError(
            f"matrix is indefinite: smallest eigenvalue {w[0]:.3e} < -{PSD_TOL:.1e}"
        )
    return float(w.sum() - w[-1])
