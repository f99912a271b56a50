import numpy as np
import pytest
from numpy.testing import assert_allclose

from src.errors import DimensionError, NumericalError
from src.tensor import as_tensor, contract, lq, qr, svd, truncate


def cplx(rng, *shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


class TestContract:
    def test_matches_einsum(self, rng):
        a = cplx(rng, 3, 4, 5)
        b = cplx(rng, 5, 2, 4)
        out = contract(a, b, [(1, 2), (2, 0)])
        assert_allclose(out, np.einsum("ijk,kbj->ib", a, b), atol=1e-12)

    def test_no_pairs_is_outer_product(self, rng):
        a = cplx(rng, 2)
        b = cplx(rng, 3)
        assert_allclose(contract(a, b, []), np.outer(a, b), atol=1e-14)

    def test_mismatched_extents(self, rng):
        with pytest.raises(DimensionError):
            contract(cplx(rng, 3, 4), cplx(rng, 5, 2), [(1, 0)])

    def test_axis_out_of_range(self, rng):
        with pytest.raises(DimensionError):
            contract(cplx(rng, 3, 4), cplx(rng, 4, 2), [(2, 0)])

    def test_associative(self, rng):
        a = cplx(rng, 2, 3)
        b = cplx(rng, 3, 4, 5)
        c = cplx(rng, 5, 2)
        left = contract(contract(a, b, [(1, 0)]), c, [(2, 0)])
        right = contract(a, contract(b, c, [(2, 0)]), [(1, 0)])
        assert left.shape == right.shape == (2, 4, 2)
        assert_allclose(left, right, atol=1e-12)

    def test_inputs_untouched(self, rng):
        a = cplx(rng, 3, 3)
        before = a.copy()
        contract(a, a, [(1, 0)])
        assert np.array_equal(a, before)


class TestSvd:
    def test_reconstructs(self, rng):
        m = cplx(rng, 6, 4)
        u, s, vh = svd(m)
        assert u.shape == (6, 4) and vh.shape == (4, 4)
        assert np.all(np.diff(s) <= 0) and np.all(s >= 0)
        assert_allclose(u @ np.diag(s) @ vh, m, atol=1e-12)

    def test_rejects_rank_three(self, rng):
        with pytest.raises(DimensionError):
            svd(cplx(rng, 2, 2, 2))

    def test_non_finite_input(self):
        with pytest.raises(NumericalError):
            svd(np.array([[1.0, np.nan], [0.0, 1.0]]))

    def test_diagonal(self):
        _, s, _ = svd(np.diag([3.0, 1.0]))
        assert_allclose(s, [3.0, 1.0], atol=1e-15)

    def test_zero_matrix(self):
        u, s, vh = svd(np.zeros((2, 2)))
        assert_allclose(s, [0.0, 0.0])
        assert_allclose(u @ np.diag(s) @ vh, np.zeros((2, 2)))

    def test_low_rank_reconstructs_exactly(self, rng):
        m = cplx(rng, 6, 2) @ cplx(rng, 2, 5)
        u, s, vh, discarded = truncate(*svd(m), 2)
        assert discarded <= 1e-24 * np.sum(np.abs(m) ** 2)
        assert_allclose(u @ np.diag(s) @ vh, m, atol=1e-12 * np.max(np.abs(m)))

    def test_empty(self):
        u, s, vh = svd(np.zeros((0, 3)))
        assert s.shape == (0,)


class TestTruncate:
    def setup_method(self):
        self.s = np.array([4.0, 2.0, 1.0, 0.5])
        self.u = np.eye(4, dtype=np.complex128)
        self.vh = np.eye(4, dtype=np.complex128)

    def test_chi_only(self):
        u, s, vh, discarded = truncate(self.u, self.s, self.vh, 2)
        assert_allclose(s, [4.0, 2.0])
        assert u.shape == (4, 2) and vh.shape == (2, 4)
        assert discarded == pytest.approx(1.25)

    def test_eps_rule(self):
        total = np.sum(self.s ** 2)
        # dropping 0.5 costs 0.25, dropping 1 and 0.5 costs 1.25
        _, s, _, discarded = truncate(self.u, self.s, self.vh, 4, eps_cut=0.3 / total)
        assert len(s) == 3
        assert discarded == pytest.approx(0.25)

    def test_keeps_at_least_one(self):
        _, s, _, _ = truncate(self.u, self.s, self.vh, 4, eps_cut=1.0)
        assert len(s) == 1

    def test_no_truncation(self):
        _, s, _, discarded = truncate(self.u, self.s, self.vh, 10)
        assert len(s) == 4 and discarded == 0.0

    def test_best_rank_two_approximation(self, rng):
        m = cplx(rng, 3, 3)
        u, s, vh, discarded = truncate(*svd(m), 2)
        error = np.sum(np.abs(m - u @ np.diag(s) @ vh) ** 2)
        _, full, _ = svd(m)
        assert error == pytest.approx(full[2] ** 2, rel=1e-10)
        assert discarded == pytest.approx(error, rel=1e-10)
        for _ in range(200):
            other = cplx(rng, 3, 2) @ cplx(rng, 2, 3)
            assert np.sum(np.abs(m - other) ** 2) >= error

    def test_invalid_chi(self):
        with pytest.raises(DimensionError):
            truncate(self.u, self.s, self.vh, 0)


class TestQrLq:
    def test_qr(self, rng):
        m = cplx(rng, 6, 3)
        q, r = qr(m)
        assert_allclose(q.conj().T @ q, np.eye(3), atol=1e-12)
        assert_allclose(q @ r, m, atol=1e-12)
        diag = np.diagonal(r)
        assert np.all(diag.real >= 0)
        assert_allclose(diag.imag, 0, atol=1e-12)
        assert_allclose(np.tril(r, -1), 0, atol=1e-14)

    def test_qr_wide(self, rng):
        m = cplx(rng, 2, 5)
        q, r = qr(m)
        assert q.shape == (2, 2) and r.shape == (2, 5)
        assert_allclose(q @ r, m, atol=1e-12)

    def test_lq(self, rng):
        m = cplx(rng, 3, 6)
        l, q = lq(m)
        assert_allclose(q @ q.conj().T, np.eye(3), atol=1e-12)
        assert_allclose(l @ q, m, atol=1e-12)
        assert_allclose(np.triu(l, 1), 0, atol=1e-14)

    def test_qr_identity(self):
        q, r = qr(np.eye(3))
        assert_allclose(q, np.eye(3), atol=1e-15)
        assert_allclose(r, np.eye(3), atol=1e-15)

    def test_qr_column(self, rng):
        v = cplx(rng, 4, 1)
        q, r = qr(v)
        assert r.shape == (1, 1)
        assert r[0, 0] == pytest.approx(np.linalg.norm(v), rel=1e-12)
        assert_allclose(q @ r, v, atol=1e-12)

    def test_as_tensor_dtype(self):
        t = as_tensor([[1, 2], [3, 4]])
        assert t.dtype == np.complex128 and t.flags.c_contiguous

