import numpy as np
import pytest

from starfd.numerics import (
    EigenDecomposition,
    NonHermitianError,
    NotPsdError,
    hermitian_eig,
    max_eigpair,
    psd_project,
    rank_one_residual,
)


def rand_hermitian(rng, m, scale=1.0):
    a = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
    return scale * (a + a.conj().T) / 2.0


def rand_unitary(rng, m):
    a = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
    q, _ = np.linalg.qr(a)
    return q


def cubic_roots_hermitian(a):
    """Closed-form (trigonometric) real roots of the characteristic
    polynomial of a Hermitian matrix with m <= 3."""
    m = a.shape[0]
    if m == 1:
        return np.array([a[0, 0].real])
    if m == 2:
        tr = a[0, 0].real + a[1, 1].real
        det = (a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]).real
        disc = np.sqrt(max(tr * tr / 4.0 - det, 0.0))
        return np.array([tr / 2.0 + disc, tr / 2.0 - disc])
    c2 = -np.trace(a).real
    c1 = 0.5 * (np.trace(a).real ** 2 - np.trace(a @ a).real)
    c0 = -np.linalg.det(a).real
    # depressed cubic t^3 + p t + q with x = t - c2/3
    p = c1 - c2 * c2 / 3.0
    q = 2.0 * c2**3 / 27.0 - c2 * c1 / 3.0 + c0
    r = np.sqrt(max(-p / 3.0, 1e-300))
    arg = np.clip(3.0 * q / (2.0 * p * r), -1.0, 1.0)
    phi = np.arccos(arg) / 3.0
    roots = [2.0 * r * np.cos(phi - 2.0 * np.pi * k / 3.0) - c2 / 3.0 for k in range(3)]
    return np.sort(np.array(roots))[::-1]


class TestHermitianEig:
    def test_identity(self):
        dec = hermitian_eig(np.eye(3, dtype=complex))
        assert np.allclose(dec.eigenvalues, [1.0, 1.0, 1.0])
        gram = dec.eigenvectors.conj().T @ dec.eigenvectors
        assert np.abs(gram - np.eye(3)).max() <= 1e-9

    def test_diagonal(self):
        dec = hermitian_eig(np.diag([5.0, -2.0]).astype(complex))
        assert np.allclose(dec.eigenvalues, [5.0, -2.0])
        assert np.abs(np.abs(dec.eigenvectors) - np.eye(2)).max() < 1e-12

    def test_reconstruction_oracle(self):
        rng = np.random.default_rng(3)
        a = rand_hermitian(rng, 6)
        dec = hermitian_eig(a)
        rec = dec.eigenvectors @ np.diag(dec.eigenvalues) @ dec.eigenvectors.conj().T
        assert np.linalg.norm(rec - a) <= 1e-9 * np.linalg.norm(a)
        assert (np.diff(dec.eigenvalues) <= 1e-12).all()  # descending

    def test_orthonormal_columns(self):
        rng = np.random.default_rng(4)
        dec = hermitian_eig(rand_hermitian(rng, 8))
        gram = dec.eigenvectors.conj().T @ dec.eigenvectors
        assert np.abs(gram - np.eye(8)).max() <= 1e-9

    def test_rejects_non_hermitian_with_diagnostic(self):
        a = np.eye(4, dtype=complex)
        a[1, 2] = 0.5
        with pytest.raises(NonHermitianError, match=r"\(1,2\)|\(2,1\)"):
            hermitian_eig(a)

    def test_characteristic_polynomial_roots(self):
        rng = np.random.default_rng(5)
        for m in (1, 2, 3):
            for _ in range(20):
                a = rand_hermitian(rng, m, scale=rng.uniform(0.1, 5.0))
                dec = hermitian_eig(a)
                roots = cubic_roots_hermitian(a)
                assert np.abs(np.sort(dec.eigenvalues) - np.sort(roots)).max() < 1e-8

    def test_returns_type(self):
        dec = hermitian_eig(np.eye(2, dtype=complex))
        assert isinstance(dec, EigenDecomposition)


class TestMaxEigpair:
    def test_diagonal(self):
        lam, u = max_eigpair(np.diag([1.0, 3.0, 2.0]).astype(complex))
        assert lam == pytest.approx(3.0)
        assert np.abs(np.abs(u) - [0, 1, 0]).max() < 1e-12

    def test_rank_one(self):
        rng = np.random.default_rng(6)
        q = rng.standard_normal(5) + 1j * rng.standard_normal(5)
        q /= np.linalg.norm(q)
        lam, u = max_eigpair(np.outer(q, q.conj()))
        assert lam == pytest.approx(1.0, abs=1e-12)
        assert abs(abs(np.vdot(q, u)) - 1.0) < 1e-9  # equal up to global phase

    def test_matches_full_decomposition(self):
        rng = np.random.default_rng(7)
        a = rand_hermitian(rng, 5)
        lam, u = max_eigpair(a)
        dec = hermitian_eig(a)
        assert lam == pytest.approx(dec.eigenvalues[0], abs=1e-12)
        assert np.linalg.norm(a @ u - lam * u) <= 1e-9


class TestPsdProject:
    def test_clamps_diagonal(self):
        p = psd_project(np.diag([3.0, -1.0]).astype(complex))
        assert np.allclose(p, np.diag([3.0, 0.0]))

    def test_idempotent_on_cone(self):
        rng = np.random.default_rng(8)
        b = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        a = b @ b.conj().T
        assert np.abs(psd_project(a) - a).max() <= 1e-9 * np.abs(a).max()

    def test_nearest_point_oracle(self):
        rng = np.random.default_rng(9)
        a = rand_hermitian(rng, 4)
        p = psd_project(a)
        d_star = np.linalg.norm(p - a)
        for _ in range(1000):
            b = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
            cand = b @ b.conj().T * rng.uniform(0, 2)
            assert d_star <= np.linalg.norm(cand - a) + 1e-12

    def test_trace_identity(self):
        rng = np.random.default_rng(10)
        for _ in range(10):
            a = rand_hermitian(rng, 5)
            w = np.linalg.eigvalsh(a)
            expected = np.trace(a).real - w[w < 0].sum()
            assert np.trace(psd_project(a)).real == pytest.approx(expected, abs=1e-9)


class TestRankOneResidual:
    def test_exact_rank_one(self):
        rng = np.random.default_rng(11)
        q = rng.standard_normal(6) + 1j * rng.standard_normal(6)
        assert rank_one_residual(np.outer(q, q.conj())) == pytest.approx(0.0, abs=1e-9)

    def test_identity(self):
        assert rank_one_residual(np.eye(4, dtype=complex)) == pytest.approx(3.0)

    def test_eigenvalue_sum_oracle(self):
        rng = np.random.default_rng(12)
        b = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
        q = b @ b.conj().T
        w = np.sort(np.linalg.eigvalsh(q))
        assert rank_one_residual(q) == pytest.approx(w[:-1].sum(), rel=1e-9)

    def test_rejects_indefinite(self):
        with pytest.raises(NotPsdError):
            rank_one_residual(np.diag([1.0, -0.5]).astype(complex))

    def test_unitary_invariance(self):
        rng = np.random.default_rng(13)
        b = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
        q = b @ b.conj().T
        base = rank_one_residual(q)
        for _ in range(5):
            u = rand_unitary(rng, 6)
            assert rank_one_residual(u.conj().T @ q @ u) == pytest.approx(base, abs=1e-9)
