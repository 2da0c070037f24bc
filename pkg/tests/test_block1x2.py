import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blockpinv import (
    Partition1x2,
    ValidationError,
    complement_c,
    verify_penrose,
    weighted_pinv_oracle,
    wpinv_1x2_thm32,
    wpinv_1x2_thm33,
    wpinv_1x2_unified,
    wpinv_1x2_via_thm32,
    wpinv_1x2_xu,
)
from blockpinv.block1x2 import thm33_parts, xu_parts
from blockpinv.linalg import eye, rel_residual
from blockpinv.testing import random_matrix, random_partition1x2, random_weight

from conftest import assert_rel_close, frac_matrix


def _coupled(rng, m=5, p=2, q=3, rank_a=None):
    """Random partition whose domain weight has a nonzero coupling block ``L``."""
    part = random_partition1x2(rng, m, p, q, rank_a=rank_a)
    assert np.linalg.norm(part.L) > 0
    return part


def _oracle(part):
    return weighted_pinv_oracle(part.AB, part.M, part.N)


class TestPartition:
    def test_defaults(self, rng):
        part = Partition1x2(random_matrix(rng, 3, 2), random_matrix(rng, 3, 1))
        np.testing.assert_array_equal(part.N.value, np.eye(3))
        np.testing.assert_array_equal(part.L, 0)

    def test_row_mismatch(self, rng):
        with pytest.raises(ValidationError):
            Partition1x2(random_matrix(rng, 3, 2), random_matrix(rng, 4, 1))

    def test_indefinite_assembled_weight(self):
        with pytest.raises(ValidationError):
            Partition1x2(np.eye(2)[:, :1], np.eye(2)[:, 1:], L=[[2.0]])

    def test_from_weights_splits_n(self, rng):
        N = random_weight(rng, 5)
        part = Partition1x2.from_weights(random_matrix(rng, 4, 2), random_matrix(rng, 4, 3), None, N)
        np.testing.assert_allclose(part.N.value, N, atol=1e-15)
        np.testing.assert_allclose(part.SN.value, N[2:, 2:] - N[2:, :2] @ np.linalg.inv(N[:2, :2]) @ N[:2, 2:],
                                   atol=1e-12)


class TestComplementC:
    def test_zero_b(self, rng):
        part = Partition1x2(random_matrix(rng, 4, 2), np.zeros((4, 2)))
        np.testing.assert_array_equal(complement_c(part), 0)

    def test_invertible_a(self, rng):
        part = random_partition1x2(rng, 3, 3, 2)
        np.testing.assert_allclose(complement_c(part), 0, atol=1e-12)

    def test_small_case(self):
        part = Partition1x2([[1, 0], [0, 0]], [[1, -1], [1, 3]])
        np.testing.assert_allclose(complement_c(part), [[0, 0], [1, 3]], atol=1e-15)

    def test_m_orthogonal_to_a(self, rng):
        part = _coupled(rng, rank_a=1)
        C = complement_c(part)
        np.testing.assert_allclose(C.conj().T @ part.M.value @ part.A, 0, atol=1e-10)


class TestThm32:
    def test_trivial_coupling(self, rng):
        A = random_matrix(rng, 4, 2)
        M, N1 = random_weight(rng, 4), random_weight(rng, 2)
        out = wpinv_1x2_thm32(Partition1x2(A, np.zeros((4, 2)), M, N1))
        assert_rel_close(out.X1, weighted_pinv_oracle(A, M, N1))
        np.testing.assert_allclose(out.X2, 0, atol=1e-14)

    def test_matches_oracle_on_ac(self, rng):
        part = random_partition1x2(rng, 4, 2, 2, rank_a=1)
        AC = np.hstack([part.A, part.C])
        assert_rel_close(wpinv_1x2_thm32(part).X, weighted_pinv_oracle(AC, part.M, part.N, atol=part.c_floor))

    def test_zero_a(self, rng):
        part = _coupled(rng)
        part = Partition1x2(np.zeros_like(part.A), part.B, part.M, part.N1, part.L, part.N2)
        out = wpinv_1x2_thm32(part)
        U = weighted_pinv_oracle(part.B, part.M, part.SN)
        assert_rel_close(out.X2, U)
        assert_rel_close(out.X1, -part.N1.inverse @ part.L @ U)
        assert_rel_close(out.X, _oracle(part))

    def test_mapped_back_matches_oracle(self, rng):
        part = _coupled(rng, rank_a=1)
        assert_rel_close(wpinv_1x2_via_thm32(part).X, _oracle(part))


class TestThm33:
    def test_trivial_coupling(self, rng):
        A = random_matrix(rng, 4, 2, rank=1)
        M, N1 = random_weight(rng, 4), random_weight(rng, 2)
        out = wpinv_1x2_thm33(Partition1x2(A, np.zeros((4, 3)), M, N1))
        assert_rel_close(out.X1, weighted_pinv_oracle(A, M, N1))
        np.testing.assert_allclose(out.X2, 0, atol=1e-14)

    def test_worked_example_sub_problem(self):
        SM = frac_matrix([["1/2", 0], [0, 1]])
        M11 = frac_matrix([[2, 0], [0, 1]])
        T = frac_matrix([[-1, "-1/3"], [0, 0]])
        parts = thm33_parts(Partition1x2(T, np.eye(2), SM, M11, np.zeros((2, 2)), SM))
        np.testing.assert_allclose(parts.D, frac_matrix([["-9/11", 0], ["-6/11", 0]]), atol=1e-12)
        np.testing.assert_allclose(parts.S_tilde, frac_matrix([["47/22", 0], [0, 1]]), atol=1e-12)
        np.testing.assert_allclose(parts.C, frac_matrix([[0, 0], [0, 1]]), atol=1e-12)
        np.testing.assert_allclose(parts.C_pinv, parts.C, atol=1e-12)
        np.testing.assert_allclose(parts.U_tilde, frac_matrix([["36/47", 0], [0, 1]]), atol=1e-12)
        np.testing.assert_allclose(parts.result.X, frac_matrix([["-9/47", 0], ["-6/47", 0], ["36/47", 0], [0, 1]]),
                                   atol=1e-12)

    def test_matches_oracle_with_coupling(self, rng):
        part = _coupled(rng)
        assert_rel_close(wpinv_1x2_thm33(part).X, _oracle(part))


class TestUnified:
    def test_s_tilde_reduces_to_thm33(self, rng):
        part = _coupled(rng, rank_a=1)
        St = thm33_parts(part).S_tilde
        assert_rel_close(wpinv_1x2_unified(part, St).X, wpinv_1x2_thm33(part).X)

    def test_default_equals_xu(self, rng):
        part = _coupled(rng, rank_a=1)
        assert_rel_close(wpinv_1x2_unified(part).X, wpinv_1x2_xu(part).X)

    def test_independent_of_n3(self, rng):
        part = _coupled(rng, rank_a=1)
        X1 = wpinv_1x2_unified(part, random_weight(rng, part.q))
        X2 = wpinv_1x2_unified(part, random_weight(rng, part.q))
        assert_rel_close(X1.X, X2.X)
        assert_rel_close(X1.X, _oracle(part))

    def test_rejects_bad_n3(self, rng):
        part = _coupled(rng)
        with pytest.raises(ValidationError):
            wpinv_1x2_unified(part, np.eye(part.q + 1))


class TestXu:
    def test_decoupled_case(self, rng):
        # A^dag B = 0 when range(B) is M-orthogonal to range(A)
        A = random_matrix(rng, 5, 2)
        M = random_weight(rng, 5)
        B = (eye(5) - A @ weighted_pinv_oracle(A, M, None)) @ random_matrix(rng, 5, 2)
        part = Partition1x2(A, B, M, random_weight(rng, 2), None, random_weight(rng, 2))
        parts = xu_parts(part)
        np.testing.assert_allclose(parts.Sigma, 0, atol=1e-12)
        assert_rel_close(parts.Omega, weighted_pinv_oracle(part.C, part.M, part.SN))
        assert_rel_close(parts.result.X1, part.A_pinv)

    def test_matches_oracle_and_thm33(self, rng):
        part = _coupled(rng, rank_a=1)
        X = wpinv_1x2_xu(part).X
        assert_rel_close(X, _oracle(part))
        assert_rel_close(X, wpinv_1x2_thm33(part).X)


class TestProperties:
    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), m=st.integers(1, 7), p=st.integers(1, 4), q=st.integers(1, 4),
           data=st.data())
    def test_four_way_agreement(self, seed, m, p, q, data):
        rank_ab = data.draw(st.integers(0, min(m, p + q)))
        rng = np.random.default_rng(seed)
        part = random_partition1x2(rng, m, p, q, rank_ab=rank_ab, cond=10)
        ref = _oracle(part)
        outs = {
            "thm32": wpinv_1x2_via_thm32(part).X,
            "thm33": wpinv_1x2_thm33(part).X,
            "unified": wpinv_1x2_unified(part, random_weight(rng, q)).X,
            "xu": wpinv_1x2_xu(part).X,
        }
        for X in outs.values():
            assert_rel_close(X, ref)
            assert verify_penrose(part.AB, X, part.M, part.N).ok(1e-8)

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), rank_a=st.integers(0, 3))
    def test_complement_identities_and_definiteness(self, seed, rank_a):
        rng = np.random.default_rng(seed)
        part = random_partition1x2(rng, 5, 3, 2, rank_a=rank_a)
        A, C = part.A, part.C
        P = A @ part.A_pinv
        xi, eta = random_matrix(rng, 5, 1), random_matrix(rng, 5, 1)
        zeta = P.conj().T @ xi + (eye(5) - P).conj().T @ eta
        assert rel_residual(A.conj().T @ (zeta - xi), A.conj().T @ xi) <= 1e-8
        assert rel_residual(C.conj().T @ (zeta - eta), C.conj().T @ eta) <= 1e-8
        K = part._off_range_scaled @ A.conj().T
        assert np.linalg.norm(K) <= 1e-8 * max(1.0, np.linalg.norm(A))
        S = part.N2 - part.L.conj().T @ part._off_range_scaled @ part.L
        assert np.linalg.eigvalsh((S + S.conj().T) / 2).min() > 0
        assert np.linalg.eigvalsh(thm33_parts(part).S_tilde).min() > 0
