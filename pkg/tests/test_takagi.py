"""Tests for the Takagi factorization of complex symmetric matrices."""

import numpy as np
import pytest

from twinbeams.takagi import (
    TakagiFactors,
    takagi_general,
    takagi_real_symmetric,
    takagi_residual,
)

np.random.seed(42)


def random_symmetric(n, complex_valued=True):
    a = np.random.randn(n, n)
    if complex_valued:
        a = a + 1j * np.random.randn(n, n)
    return a + a.T


def random_unitary(n):
    q, r = np.linalg.qr(np.random.randn(n, n) + 1j * np.random.randn(n, n))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def check_factors(a, factors, res_tol=1e-10, uni_tol=1e-12):
    n = a.shape[0]
    assert takagi_residual(a, factors) <= res_tol
    assert np.abs(factors.v.conj().T @ factors.v - np.eye(n)).max() <= uni_tol
    assert np.all(factors.r >= 0)
    assert np.all(np.diff(factors.r) <= 1e-12 * max(factors.r[0], 1.0))


class TestRealSymmetric:
    """Spectral shortcut for real symmetric input."""

    def test_random_matrices(self):
        for n in (2, 5, 16):
            for _ in range(10):
                a = random_symmetric(n, complex_valued=False)
                check_factors(a, takagi_real_symmetric(a))

    def test_negative_eigenvalues_get_imaginary_columns(self):
        a = np.diag([3.0, -2.0])
        factors = takagi_real_symmetric(a)
        assert np.allclose(factors.r, [3.0, 2.0], atol=1e-14, rtol=0)
        # The column carrying the negative eigenvalue is purely imaginary.
        assert np.abs(factors.v[:, 1].real).max() < 1e-14
        assert np.abs(factors.v[:, 0].imag).max() < 1e-14
        check_factors(a, factors, res_tol=1e-14)

    def test_columns_real_or_imaginary(self):
        a = random_symmetric(8, complex_valued=False)
        factors = takagi_real_symmetric(a)
        for j in range(8):
            col = factors.v[:, j]
            assert min(np.abs(col.real).max(), np.abs(col.imag).max()) < 1e-14

    def test_deterministic(self):
        a = random_symmetric(6, complex_valued=False)
        f1 = takagi_real_symmetric(a)
        f2 = takagi_real_symmetric(a)
        assert np.array_equal(f1.v, f2.v)
        assert np.array_equal(f1.r, f2.r)

    def test_accepts_complex_dtype_with_zero_imag(self):
        a = random_symmetric(4, complex_valued=False).astype(complex)
        check_factors(a, takagi_real_symmetric(a))

    def test_rejects_truly_complex_input(self):
        a = random_symmetric(4, complex_valued=True)
        with pytest.raises(ValueError, match="imaginary part"):
            takagi_real_symmetric(a)


class TestGeneral:
    """SVD-plus-balancing path for arbitrary complex symmetric matrices."""

    def test_random_matrices(self):
        for n in (2, 8, 64):
            for _ in range(10):
                a = random_symmetric(n)
                check_factors(a, takagi_general(a))

    def test_agrees_with_real_path(self):
        """Both algorithms reconstruct the same real matrix to 1e-10."""
        for n in (2, 8, 64):
            a = random_symmetric(n, complex_valued=False)
            fr = takagi_real_symmetric(a)
            fg = takagi_general(a)
            assert np.allclose(fr.r, fg.r, atol=1e-10 * max(fr.r[0], 1.0), rtol=0)
            recon_r = (fr.v * fr.r) @ fr.v.T
            recon_g = (fg.v * fg.r) @ fg.v.T
            assert np.abs(recon_r - recon_g).max() <= 1e-10 * max(fr.r[0], 1.0)

    def test_constructed_degenerate_spectrum(self):
        """Exactly repeated singular values exercise the cluster balancing."""
        r = np.array([2.0, 2.0, 1.0, 1.0, 1.0, 0.5, 0.5, 0.0])
        for _ in range(10):
            v = random_unitary(8)
            a = (v * r) @ v.T
            factors = takagi_general(a)
            assert np.allclose(factors.r, r, atol=1e-12, rtol=0)
            check_factors(a, factors)

    def test_twin_beam_duo_matrix(self):
        """An off-diagonal real duo has a balancing eigenvalue at -1."""
        a = np.array([[0.0, 0.7], [0.7, 0.0]], dtype=complex)
        factors = takagi_general(a)
        assert np.allclose(factors.r, [0.7, 0.7], atol=1e-14, rtol=0)
        check_factors(a, factors, res_tol=1e-14)

    def test_deep_geometric_duo_spectrum(self):
        """Duos far below the leading value stay paired despite ulp splitting."""
        k = np.arange(32)
        r = np.repeat(0.5**k, 2)  # last duo sits near 2e-10 * r[0]
        v = random_unitary(64)
        a = (v * r) @ v.T
        factors = takagi_general(a)
        check_factors(a, factors)
        assert np.allclose(factors.r, r, atol=1e-12, rtol=0)

    def test_zero_matrix(self):
        factors = takagi_general(np.zeros((5, 5)))
        assert np.array_equal(factors.r, np.zeros(5))
        assert np.array_equal(factors.v, np.eye(5, dtype=complex))

    def test_rejects_nonsquare(self):
        with pytest.raises(ValueError, match="square matrix"):
            takagi_general(np.zeros((3, 4)))

    def test_rejects_nonsymmetric(self):
        a = np.random.randn(4, 4) + 1j * np.random.randn(4, 4)
        with pytest.raises(ValueError, match="not symmetric"):
            takagi_general(a)


class TestResidual:
    """Reconstruction-quality measure."""

    def test_perfect_factors_give_zero(self):
        r = np.array([2.0, 1.0])
        v = np.eye(2, dtype=complex)
        assert takagi_residual(np.diag(r), TakagiFactors(v=v, r=r)) == 0.0

    def test_scale_invariant(self):
        a = random_symmetric(4)
        factors = takagi_general(a)
        wrong = TakagiFactors(v=factors.v, r=factors.r * 1.01)
        r_small = takagi_residual(a, wrong)
        r_large = takagi_residual(a * 1e6, TakagiFactors(v=wrong.v, r=wrong.r * 1e6))
        assert np.allclose(r_small, r_large, atol=1e-12, rtol=0)

    def test_dimension_mismatch_raises(self):
        factors = TakagiFactors(v=np.eye(3, dtype=complex), r=np.ones(3))
        with pytest.raises(ValueError, match="do not match"):
            takagi_residual(np.zeros((4, 4)), factors)
