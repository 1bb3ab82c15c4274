"""Numpy fallback for the Hermitian eigendecomposition kernels.

``np.linalg.eigh`` accepts stacked operands, so the whole stack goes through
a single LAPACK dispatch; this keeps the fallback usable inside the solver
loop even without the compiled extension.
"""

import numpy as np

NAME = "numpy"


def eigh_stack(a):
    a = np.ascontiguousarray(a, dtype=np.complex128)
    w, v = np.linalg.eigh(a)
    return w, v


def eigvalsh_stack(a):
    a = np.ascontiguousarray(a, dtype=np.complex128)
    return np.linalg.eigvalsh(a)


def psd_project_stack(a):
    w, v = eigh_stack(a)
    min_eig = w[:, 0].copy()
    wc = np.maximum(w, 0.0)
    # v @ diag(wc) @ v^H, batched
    p = np.einsum("kij,kj,klj->kil", v, wc, v.conj(), optimize=True)
    return p, min_eig
