# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled Hermitian eigendecomposition kernels.

Calls LAPACK ``zheevd`` directly on preallocated buffers, skipping the
per-call Python dispatch that dominates the numpy path for the small
matrices this package works with.  The PSD projection fuses the
reconstruction so no eigenvector array is ever materialized on the Python
side.
"""

import numpy as np

cimport numpy as cnp
from libc.string cimport memcpy
from scipy.linalg.cython_lapack cimport zheevd

cnp.import_array()

NAME = "compiled"

ctypedef double complex zcomplex


cdef int _zheevd_work(int m, char jobz, int* lwork, int* lrwork, int* liwork) nogil:
    # workspace query
    cdef zcomplex wq
    cdef double rwq
    cdef int iwq, info, n = m, lda = m
    cdef int lw = -1, lrw = -1, liw = -1
    cdef double wdummy
    zheevd(&jobz, 'L', &n, NULL, &lda, &wdummy, &wq, &lw, &rwq, &lrw, &iwq, &liw, &info)
    lwork[0] = <int>wq.real
    lrwork[0] = <int>rwq
    liwork[0] = iwq
    return info


def eigh_stack(a):
    """Eigendecomposition of a stack of Hermitian matrices.

    Returns ``(w, v)`` with eigenvalues ascending and ``v[k][:, j]`` the
    eigenvector for ``w[k][j]``.
    """
    cdef cnp.ndarray[zcomplex, ndim=3] arr = np.ascontiguousarray(a, dtype=np.complex128)
    cdef int k = arr.shape[0], m = arr.shape[1]
    cdef cnp.ndarray[double, ndim=2] w = np.empty((k, m), dtype=np.float64)
    cdef cnp.ndarray[zcomplex, ndim=3] v = np.empty((k, m, m), dtype=np.complex128)
    cdef cnp.ndarray[zcomplex, ndim=1] buf = np.empty(m * m, dtype=np.complex128)
    cdef int lwork, lrwork, liwork, info = 0, n = m, lda = m
    _zheevd_work(m, b'V', &lwork, &lrwork, &liwork)
    cdef cnp.ndarray[zcomplex, ndim=1] work = np.empty(lwork, dtype=np.complex128)
    cdef cnp.ndarray[double, ndim=1] rwork = np.empty(lrwork, dtype=np.float64)
    cdef cnp.ndarray[int, ndim=1] iwork = np.empty(liwork, dtype=np.intc)
    cdef Py_ssize_t t, i, j
    cdef zcomplex* src
    cdef zcomplex* vb
    for t in range(k):
        src = &arr[t, 0, 0]
        memcpy(&buf[0], src, m * m * sizeof(zcomplex))
        zheevd(b'V', b'L', &n, &buf[0], &lda, &w[t, 0], &work[0], &lwork,
               &rwork[0], &lrwork, <int*>&iwork[0], &liwork, &info)
        if info != 0:
            raise np.linalg.LinAlgError(f"zheevd failed with info={info}")
        # buf holds (column-major) eigenvectors of conj(A); conjugate back
        vb = &v[t, 0, 0]
        for j in range(m):
            for i in range(m):
                vb[i * m + j] = buf[j * m + i].conjugate()
    return w, v


def eigvalsh_stack(a):
    """Eigenvalues (ascending) of a stack of Hermitian matrices."""
    cdef cnp.ndarray[zcomplex, ndim=3] arr = np.ascontiguousarray(a, dtype=np.complex128)
    cdef int k = arr.shape[0], m = arr.shape[1]
    cdef cnp.ndarray[double, ndim=2] w = np.empty((k, m), dtype=np.float64)
    cdef cnp.ndarray[zcomplex, ndim=1] buf = np.empty(m * m, dtype=np.complex128)
    cdef int lwork, lrwork, liwork, info = 0, n = m, lda = m
    _zheevd_work(m, b'N', &lwork, &lrwork, &liwork)
    cdef cnp.ndarray[zcomplex, ndim=1] work = np.empty(lwork, dtype=np.complex128)
    cdef cnp.ndarray[double, ndim=1] rwork = np.empty(max(lrwork, 1), dtype=np.float64)
    cdef cnp.ndarray[int, ndim=1] iwork = np.empty(max(liwork, 1), dtype=np.intc)
    cdef Py_ssize_t t
    for t in range(k):
        memcpy(&buf[0], &arr[t, 0, 0], m * m * sizeof(zcomplex))
        zheevd(b'N', b'L', &n, &buf[0], &lda, &w[t, 0], &work[0], &lwork,
               &rwork[0], &lrwork, <int*>&iwork[0], &liwork, &info)
        if info != 0:
            raise np.linalg.LinAlgError(f"zheevd failed with info={info}")
    return w


def admm_step(
    cnp.ndarray[zcomplex, ndim=3] z,
    cnp.ndarray[double, ndim=1] zs,
    cnp.ndarray[zcomplex, ndim=3] u,
    cnp.ndarray[double, ndim=1] us,
    cnp.ndarray[zcomplex, ndim=3] c,
    cnp.ndarray[double, ndim=2] g_inv,
    cnp.ndarray[double, ndim=1] rhs,
    cnp.ndarray[cnp.int64_t, ndim=1] coupled_flat,
    cnp.ndarray[cnp.int64_t, ndim=1] fixed_target,
    cnp.ndarray[cnp.int64_t, ndim=1] fixed_flat,
    cnp.ndarray[cnp.int64_t, ndim=1] ineq_target,
    cnp.ndarray[zcomplex, ndim=2] ineq_mats,
    double sigma,
    double rho,
    double relax,
):
    """One fused consensus-ADMM iteration, updating the state in place.

    Performs the affine block (cached Gram inverse), over-relaxation, PSD
    projection and dual ascent without returning to Python; returns
    ``(r_prim, r_dual)``.
    """
    cdef int m = z.shape[1]
    cdef int mm = m * m
    cdef Py_ssize_t nc = coupled_flat.shape[0]
    cdef Py_ssize_t nf = fixed_target.shape[0]
    cdef Py_ssize_t ni = ineq_target.shape[0]
    cdef Py_ssize_t n_rows = nc + nf + ni
    cdef double alpha = 1.0 / (rho + sigma)
    cdef double beta = 1.0 / sigma

    cdef cnp.ndarray[zcomplex, ndim=3] x = np.empty((2, m, m), dtype=np.complex128)
    cdef cnp.ndarray[double, ndim=1] s = np.empty(max(ni, 1), dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] rvec = np.empty(max(n_rows, 1), dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] nu = np.empty(max(n_rows, 1), dtype=np.float64)

    cdef zcomplex* zp = &z[0, 0, 0]
    cdef zcomplex* up = &u[0, 0, 0]
    cdef zcomplex* cp = &c[0, 0, 0]
    cdef zcomplex* xp = &x[0, 0, 0]
    cdef zcomplex* ap
    cdef Py_ssize_t i, j, k, t, base
    cdef zcomplex acc
    cdef double val, corr

    # affine block: x = alpha * (sigma*(z - u) - c)
    for i in range(2 * mm):
        xp[i] = alpha * (sigma * (zp[i] - up[i]) - cp[i])
    for k in range(ni):
        s[k] = zs[k] - us[k]
    # row values minus rhs
    for j in range(nc):
        rvec[j] = xp[coupled_flat[j]].real + xp[mm + coupled_flat[j]].real - rhs[j]
    for j in range(nf):
        rvec[nc + j] = xp[fixed_target[j] * mm + fixed_flat[j]].real - rhs[nc + j]
    base = nc + nf
    for k in range(ni):
        ap = &ineq_mats[k, 0]
        t = ineq_target[k]
        acc = 0
        for i in range(mm):
            acc = acc + ap[i].conjugate() * xp[t * mm + i]
        rvec[base + k] = acc.real - s[k] - rhs[base + k]
    # multipliers and corrections
    for j in range(n_rows):
        val = 0.0
        for i in range(n_rows):
            val += g_inv[j, i] * rvec[i]
        nu[j] = val
    for j in range(nc):
        corr = alpha * nu[j]
        xp[coupled_flat[j]] -= corr
        xp[mm + coupled_flat[j]] -= corr
    for j in range(nf):
        xp[fixed_target[j] * mm + fixed_flat[j]] -= alpha * nu[nc + j]
    for k in range(ni):
        ap = &ineq_mats[k, 0]
        t = ineq_target[k]
        corr = alpha * nu[base + k]
        for i in range(mm):
            xp[t * mm + i] = xp[t * mm + i] - corr * ap[i]
        s[k] += beta * nu[base + k]

    # over-relaxation and cone input: xh = relax*x + (1-relax)*z + u
    cdef double om = 1.0 - relax
    cdef cnp.ndarray[zcomplex, ndim=3] xh = np.empty((2, m, m), dtype=np.complex128)
    cdef zcomplex* hp = &xh[0, 0, 0]
    for i in range(2 * mm):
        hp[i] = relax * xp[i] + om * zp[i] + up[i]

    # PSD projection of xh into znew (buffered), plus dual ascent
    cdef cnp.ndarray[double, ndim=1] w = np.empty(m, dtype=np.float64)
    cdef cnp.ndarray[zcomplex, ndim=1] buf = np.empty(mm, dtype=np.complex128)
    cdef int lwork, lrwork, liwork, info = 0, n = m, lda = m
    _zheevd_work(m, b'V', &lwork, &lrwork, &liwork)
    cdef cnp.ndarray[zcomplex, ndim=1] work = np.empty(lwork, dtype=np.complex128)
    cdef cnp.ndarray[double, ndim=1] rwork = np.empty(lrwork, dtype=np.float64)
    cdef cnp.ndarray[int, ndim=1] iwork = np.empty(liwork, dtype=np.intc)
    cdef cnp.ndarray[zcomplex, ndim=1] znew = np.empty(mm, dtype=np.complex128)
    cdef zcomplex* znp = &znew[0]
    cdef Py_ssize_t blk, l, j0
    cdef double wj, r_prim2 = 0.0, r_dual2 = 0.0
    cdef zcomplex diff
    cdef double sh, zs_new

    for blk in range(2):
        memcpy(&buf[0], hp + blk * mm, mm * sizeof(zcomplex))
        zheevd(b'V', b'L', &n, &buf[0], &lda, &w[0], &work[0], &lwork,
               &rwork[0], &lrwork, <int*>&iwork[0], &liwork, &info)
        if info != 0:
            raise np.linalg.LinAlgError(f"zheevd failed with info={info}")
        j0 = 0
        while j0 < m and w[j0] <= 0.0:
            j0 += 1
        for i in range(m):
            for l in range(i, m):
                acc = 0
                for j in range(j0, m):
                    wj = w[j]
                    acc = acc + wj * buf[i + j * m].conjugate() * buf[l + j * m]
                if l == i:
                    znp[i * m + i] = acc.real
                else:
                    znp[i * m + l] = acc
                    znp[l * m + i] = acc.conjugate()
        for i in range(mm):
            diff = xp[blk * mm + i] - znp[i]  # true x minus z_new
            r_prim2 += diff.real * diff.real + diff.imag * diff.imag
            acc = znp[i] - zp[blk * mm + i]
            r_dual2 += acc.real * acc.real + acc.imag * acc.imag
            up[blk * mm + i] = hp[blk * mm + i] - znp[i]  # xh + u_old - z_new
            zp[blk * mm + i] = znp[i]
    for k in range(ni):
        sh = relax * s[k] + om * zs[k]
        zs_new = sh + us[k]
        if zs_new < 0.0:
            zs_new = 0.0
        r_prim2 += (s[k] - zs_new) * (s[k] - zs_new)
        r_dual2 += (zs_new - zs[k]) * (zs_new - zs[k])
        us[k] = us[k] + sh - zs_new
        zs[k] = zs_new
    return np.sqrt(r_prim2), sigma * np.sqrt(r_dual2)


def psd_project_stack(a):
    """Clamp negative eigenvalues of each matrix in the stack.

    Returns ``(p, min_eig)``; the reconstruction runs fused in C so only the
    projected matrices cross back into Python.
    """
    cdef cnp.ndarray[zcomplex, ndim=3] arr = np.ascontiguousarray(a, dtype=np.complex128)
    cdef int k = arr.shape[0], m = arr.shape[1]
    cdef cnp.ndarray[zcomplex, ndim=3] out = np.empty((k, m, m), dtype=np.complex128)
    cdef cnp.ndarray[double, ndim=1] min_eig = np.empty(k, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] w = np.empty(m, dtype=np.float64)
    cdef cnp.ndarray[zcomplex, ndim=1] buf = np.empty(m * m, dtype=np.complex128)
    cdef int lwork, lrwork, liwork, info = 0, n = m, lda = m
    _zheevd_work(m, b'V', &lwork, &lrwork, &liwork)
    cdef cnp.ndarray[zcomplex, ndim=1] work = np.empty(lwork, dtype=np.complex128)
    cdef cnp.ndarray[double, ndim=1] rwork = np.empty(lrwork, dtype=np.float64)
    cdef cnp.ndarray[int, ndim=1] iwork = np.empty(liwork, dtype=np.intc)
    cdef Py_ssize_t t, i, j, l, j0
    cdef double wj
    cdef zcomplex acc
    cdef zcomplex* ob
    for t in range(k):
        memcpy(&buf[0], &arr[t, 0, 0], m * m * sizeof(zcomplex))
        zheevd(b'V', b'L', &n, &buf[0], &lda, &w[0], &work[0], &lwork,
               &rwork[0], &lrwork, <int*>&iwork[0], &liwork, &info)
        if info != 0:
            raise np.linalg.LinAlgError(f"zheevd failed with info={info}")
        min_eig[t] = w[0]
        # first nonnegative eigenvalue (they are ascending)
        j0 = 0
        while j0 < m and w[j0] <= 0.0:
            j0 += 1
        ob = &out[t, 0, 0]
        # P[i,l] = sum_j wc_j u_j[i] conj(u_j[l]); buf column j holds
        # conj(u_j), so u_j[i] = conj(buf[i + j*m])
        for i in range(m):
            for l in range(i, m):
                acc = 0
                for j in range(j0, m):
                    wj = w[j]
                    acc = acc + wj * buf[i + j * m].conjugate() * buf[l + j * m]
                if l == i:
                    ob[i * m + i] = acc.real  # diagonal is exactly real
                else:
                    ob[i * m + l] = acc
                    ob[l * m + i] = acc.conjugate()
    return out, min_eig
