"""Backend selection for the eigendecomposition hot kernels.

The QSDP solver spends nearly all of its time projecting small Hermitian
matrices onto the PSD cone, one eigendecomposition per matrix per iteration.
Two interchangeable backends provide that kernel:

* ``compiled`` -- Cython extension calling LAPACK ``zheevd`` directly with
  preallocated workspaces (no per-call Python/numpy dispatch overhead).
* ``numpy``    -- batched ``np.linalg.eigh`` fallback, always available.

The compiled backend is used when the extension was built; set
``STARFD_BACKEND=numpy`` or ``STARFD_BACKEND=compiled`` to force a choice.

Both backends expose the same surface:

``eigh_stack(a)``         -> (w, v) with ``a`` of shape (k, m, m), eigenvalues
                             ascending, column ``v[i][:, j]`` paired to ``w[i][j]``.
``eigvalsh_stack(a)``     -> w only.
``psd_project_stack(a)``  -> (p, min_eig) where ``p`` clamps negative
                             eigenvalues to zero and ``min_eig[i]`` is the
                             pre-clamp smallest eigenvalue of ``a[i]``.
"""

import os

from . import _numpy_core

_requested = os.environ.get("STARFD_BACKEND", "auto").lower()

_impl = None
if _requested in ("auto", "compiled"):
    try:
        from . import _lapack_core as _impl  # type: ignore[attr-defined]
    except ImportError:
        _impl = None
        if _requested == "compiled":
            raise
if _impl is None:
    _impl = _numpy_core

BACKEND = _impl.NAME

eigh_stack = _impl.eigh_stack
eigvalsh_stack = _impl.eigvalsh_stack
psd_project_stack = _impl.psd_project_stack
# fused solver iteration; compiled backend only (None selects the plain path)
admm_step = getattr(_impl, "admm_step", None)


def available_backends():
    """Names of the backends importable in this environment."""
    names = [_numpy_core.NAME]
    try:
        from . import _lapack_core  # noqa: F401

        names.insert(0, _lapack_core.NAME)
    except ImportError:
        pass
    return names


def get_backend(name):
    """Return the backend module for ``name`` ('compiled' or 'numpy')."""
    if name == _numpy_core.NAME:
        return _numpy_core
    if name == "compiled":
        from . import _lapack_core

        return _lapack_core
    raise ValueError(f"unknown kernel backend {name!r}")
