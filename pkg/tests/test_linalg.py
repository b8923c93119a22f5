import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rminimax import linalg
from rminimax.linalg import (NodeSystem, arnoldi_null_basis, cauchy_matrix,
                             delta_weights, explicit_qr, node_system,
                             scaled_product, symmetric_eig)


def sorted_points(rng, n, lo=-1.0, hi=1.0):
    return np.sort(rng.uniform(lo, hi, n))


class TestScaledProducts:
    def test_matches_direct_product(self, rng):
        f = rng.uniform(-2, 2, (5, 9))
        s = scaled_product(f, axis=1)
        assert np.allclose(s.to_float(), np.prod(f, axis=1), rtol=1e-14)

    def test_no_overflow_for_extreme_products(self):
        f = np.full((1, 400), 1e-12)
        s = scaled_product(f, axis=1)
        # value is 1e-4800, far below double range, but logs remain exact
        assert np.isclose(s.log2abs()[0], 400 * np.log2(1e-12))

    def test_sqrt(self):
        v = np.array([1e-280, 9.0, 2.0])
        s = linalg.scaled_sqrt(linalg.scaled_from(v))
        assert np.allclose(s.to_float(), np.sqrt(v))


class TestCauchy:
    def test_single_entry(self):
        assert cauchy_matrix([0.0], [1.0]) == pytest.approx(np.array([[-1.0]]))

    def test_column(self):
        C = cauchy_matrix([0.0, 2.0], [1.0])
        assert C == pytest.approx(np.array([[-1.0], [1.0]]))

    def test_elementwise_formula(self, rng):
        rows = sorted_points(rng, 6)
        cols = sorted_points(rng, 3, 2.0, 3.0)
        C = cauchy_matrix(rows, cols)
        for i in range(6):
            for j in range(3):
                assert C[i, j] == pytest.approx(1 / (rows[i] - cols[j]), abs=1e-16)

    def test_coincident_rejected(self):
        with pytest.raises(ValueError):
            cauchy_matrix([0.0, 1.0], [1.0])


class TestDeltaWeights:
    def test_hand_computed_value(self):
        sys_ = node_system([0.0, 1.0, 2.0, 3.0], [0.5, 2.5])
        d = delta_weights(sys_)
        assert d[0] == pytest.approx(1.5625 / -6.0, rel=1e-14)

    def test_sign_alternation(self, rng):
        for _ in range(25):
            L = rng.integers(4, 24)
            refs = sorted_points(rng, int(L))
            sup = sorted_points(rng, max(2, int(L) // 2 - 1), 2.0, 3.0)
            d = delta_weights(node_system(refs, sup))
            signs = np.sign(d)
            expected = np.array([(-1.0) ** (refs.size - 1 - l) * signs[-1]
                                 for l in range(refs.size)])
            assert np.array_equal(signs, expected)

    def test_lemma3_annihilation(self, rng):
        # C^T diag(delta) C = 0 for admissible systems up to n = 10
        for n in (2, 5, 10):
            refs = sorted_points(rng, 2 * n + 2)
            mids = 0.5 * (refs[1::2][:-1] + refs[2::2])
            sup = np.sort(np.concatenate([mids, [refs[-1] + 0.3]]))
            sys_ = node_system(refs, sup)
            C = cauchy_matrix(refs, sup)
            d = delta_weights(sys_)
            resid = np.max(np.abs(C.T @ (d[:, None] * C)))
            bound = 1e-12 * np.max(np.abs(C)) ** 2 * np.max(np.abs(d))
            assert resid <= bound

    def test_rejects_coincident(self):
        with pytest.raises(ValueError):
            delta_weights(node_system([0.0, 1.0, 2.0, 3.0], [1.0, 2.5]))


class TestLemma2:
    def test_vandermonde_cauchy_identity(self, rng):
        for n in (2, 4, 8):
            refs = sorted_points(rng, 2 * n + 2)
            sup = sorted_points(rng, n + 1, 1.5, 2.5)
            C = cauchy_matrix(refs, sup)
            Vx = np.vander(refs, n + 1, increasing=True)
            Vt = np.vander(sup, n + 1, increasing=True)
            wt = np.array([np.prod(r - sup) for r in refs])
            wtp = np.array([np.prod(np.delete(t - sup, k))
                            for k, t in enumerate(sup)])
            lhs = Vx / wt[:, None]
            rhs = C @ (Vt / wtp[:, None])
            assert np.max(np.abs(lhs - rhs)) <= 1e-10 * np.max(np.abs(lhs))


class TestExplicitQR:
    @pytest.mark.parametrize("n", [1, 3, 8, 14, 20])
    def test_orthonormal_columns(self, rng, n):
        refs = sorted_points(rng, 2 * n + 2)
        Q1, R = explicit_qr(refs)
        assert np.max(np.abs(Q1.T @ Q1 - np.eye(n + 1))) <= 1e-13

    def test_odd_rows_pattern(self, rng):
        refs = sorted_points(rng, 10)
        Q1, _ = explicit_qr(refs)
        odd = Q1[1::2]
        assert np.allclose(np.diag(odd), 1 / np.sqrt(2))
        assert np.max(np.abs(odd - np.diag(np.diag(odd)))) == 0.0

    def test_sq1_orthogonal_to_q1(self, rng):
        refs = sorted_points(rng, 16)
        Q1, _ = explicit_qr(refs)
        s = np.where(np.arange(16) % 2 == 1, 1.0, -1.0)
        assert np.max(np.abs((s[:, None] * Q1).T @ Q1)) <= 1e-13

    def test_reproduces_weighted_cauchy(self, rng):
        # Q1 @ R equals the limit form of |Delta|^{1/2} C
        refs = sorted_points(rng, 8)
        Q1, R = explicit_qr(refs)
        sys_ = node_system(refs, refs[1::2])
        M = linalg.scaled_basis_matrix(sys_)
        prod = Q1 @ R
        scale = prod[1, 0] / M[1, 0]
        assert np.allclose(M * scale, prod, rtol=1e-12, atol=1e-13)

    def test_rejects_non_interlaced(self, rng):
        refs = sorted_points(rng, 8)
        with pytest.raises(ValueError):
            explicit_qr(refs, refs[0::2])


class TestTheorem41:
    @pytest.mark.parametrize("n", [2, 5, 11])
    def test_scaled_cauchy_orthogonal(self, rng, n):
        # the full interlaced construction yields an orthogonal matrix
        x = sorted_points(rng, 2 * n + 2)
        y = np.empty(2 * n + 2)
        y[:-1] = rng.uniform(x[:-1], x[1:])
        y[-1] = x[-1] + rng.uniform(0.1, 0.5)
        wy_x = np.array([np.prod(xi - y) for xi in x])
        wx_y = np.array([np.prod(yi - x) for yi in y])
        wxp = np.array([np.prod(np.delete(xi - x, i)) for i, xi in enumerate(x)])
        wyp = np.array([np.prod(np.delete(yi - y, i)) for i, yi in enumerate(y)])
        D1 = np.diag(np.sqrt(np.abs(wy_x / wxp)))
        D2 = np.diag(np.sqrt(np.abs(wx_y / wyp)))
        Cxy = cauchy_matrix(x, y)
        Q = D1 @ Cxy @ D2
        assert np.max(np.abs(Q.T @ Q - np.eye(2 * n + 2))) <= 1e-12


class TestArnoldiNullBasis:
    def test_three_point_hand_case(self):
        nb = arnoldi_null_basis(np.array([0.0, 1.0, 2.0]), 2)
        expected = np.array([1.0, -2.0, 1.0]) / np.sqrt(6)
        p = nb.matrix.ravel()
        assert np.allclose(np.abs(p), np.abs(expected), atol=1e-14)
        V = np.array([[1.0, 1.0, 1.0], [0.0, 1.0, 2.0]])
        assert np.max(np.abs(V @ nb.matrix)) <= 1e-13

    def test_orthonormality(self, rng):
        for _ in range(20):
            k1 = int(rng.integers(4, 26))
            deficiency = int(rng.integers(1, min(6, k1 - 1)))
            pts = sorted_points(rng, k1)
            nb = arnoldi_null_basis(pts, deficiency)
            P = nb.matrix
            assert np.max(np.abs(P.T @ P - np.eye(P.shape[1]))) <= 1e-14

    def test_vandermonde_annihilation(self, rng):
        # V_m P_m = 0 for random points, deficiency up to 5, size up to 26
        for _ in range(20):
            k1 = int(rng.integers(6, 27))
            deficiency = int(rng.integers(1, 6))
            pts = sorted_points(rng, k1)
            nb = arnoldi_null_basis(pts, deficiency)
            V = np.vander(pts, deficiency, increasing=True).T
            assert np.max(np.abs(V @ nb.matrix)) <= 1e-10 * np.max(np.abs(V))

    def test_breakdown_on_degenerate_seed(self):
        with pytest.raises(ValueError, match="breakdown"):
            arnoldi_null_basis(np.array([0.0, 1.0, 2.0]), 2,
                               seed=np.zeros(3))


class TestSymmetricEig:
    def test_identity(self):
        w, v = symmetric_eig(np.eye(3))
        assert np.allclose(w, 1.0)

    def test_diagonal(self):
        w, v = symmetric_eig(np.diag([5.0, -2.0]))
        assert np.allclose(w, [-2.0, 5.0])
        assert np.allclose(np.abs(v), np.eye(2)[::-1].T)

    def test_exchange_matrix(self):
        w, v = symmetric_eig(np.array([[0.0, 1.0], [1.0, 0.0]]))
        assert np.allclose(w, [-1.0, 1.0])
        assert np.allclose(np.abs(v), 1 / np.sqrt(2))

    def test_residuals(self, rng):
        A = rng.standard_normal((12, 12))
        A = A + A.T
        w, v = symmetric_eig(A)
        nrm = np.linalg.norm(A, 2)
        for i in range(12):
            assert np.linalg.norm(A @ v[:, i] - w[i] * v[:, i]) <= 1e-12 * nrm

    def test_rejects_asymmetric(self):
        with pytest.raises(ValueError):
            symmetric_eig(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            symmetric_eig(np.array([[np.inf, 0.0], [0.0, 0.0]]))


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=6, max_size=20, unique=True))
def test_delta_sign_alternation_property(vals):
    refs = np.sort(np.asarray(vals))
    if np.min(np.diff(refs)) < 1e-6:
        return
    sup = 0.5 * (refs[:-1:2] + refs[1::2])
    sup = sup[~np.isin(sup, refs)]
    if sup.size < 1:
        return
    d = delta_weights(node_system(refs, sup))
    signs = np.sign(d)
    assert np.all(signs[:-1] == -signs[1:])
