import numpy as np
import pytest

from conftest import random_rank_matrix
from projbound.experiments import example_41_pair, example_42_pair
from projbound.identities import (
    DeviationPair,
    IdentityId,
    IdentityResidualReport,
    TraceSandwich,
    all_identities,
    cor25_identities,
    deviation_exact,
    lemma22_expressions,
    lemma23_identities,
    trace_inequality_check,
)
from projbound.linalg import frobenius_norm_sq as fro2
from projbound.linalg import make_pair


def by_id(reports):
    return {r.identity_id: r for r in reports}


class TestDeviation:
    @pytest.mark.parametrize("eps", [0.11, 0.3, 0.5, 0.77, 0.99])
    def test_example_41_primal_is_one(self, eps):
        assert deviation_exact(example_41_pair(eps)).primal == pytest.approx(1.0, abs=1e-15)

    def test_unperturbed(self, rng):
        A = random_rank_matrix(rng, 4, 3, 2)
        assert deviation_exact(make_pair(A, A)) == DeviationPair(0.0, 0.0)

    def test_example_42(self):
        assert deviation_exact(example_42_pair(0.5)) == (1.0, 1.0)

    def test_symmetric_under_swap(self, rng):
        p = make_pair(random_rank_matrix(rng, 5, 4, 2), random_rank_matrix(rng, 5, 4, 3))
        assert deviation_exact(p.swapped()) == pytest.approx(deviation_exact(p), rel=1e-14)

    def test_bounded_by_rank_sum(self, rng):
        p = make_pair(random_rank_matrix(rng, 6, 5, 2), random_rank_matrix(rng, 6, 5, 3))
        d = deviation_exact(p)
        assert 0 <= d.primal <= 5 + 1e-12
        assert 0 <= d.dual <= 5 + 1e-12


class TestBlockExpressions:
    def test_example_41_half(self):
        reps = by_id(lemma22_expressions(example_41_pair(0.5)))
        r = reps[IdentityId.EXP_1_1]
        assert r.rhs == pytest.approx(1.0, abs=1e-15)
        assert r.within()
        assert not reps[IdentityId.EXP_2_1].applicable

    def test_unperturbed_blocks_zero(self, rng):
        A = random_rank_matrix(rng, 5, 3, 2)
        for r in lemma22_expressions(make_pair(A, A)):
            assert r.rhs == pytest.approx(0.0, abs=1e-28)
            assert all(abs(a) < 1e-28 for a in r.alternatives)

    def test_random_equal_rank(self, rng):
        p = make_pair(random_rank_matrix(rng, 6, 4, 2), random_rank_matrix(rng, 6, 4, 2))
        reps = lemma22_expressions(p)
        assert all(r.applicable for r in reps)
        for r in reps:
            assert r.max_residual < 1e-10
        # Both two-term forms exist and agree with each other.
        e21 = by_id(reps)[IdentityId.EXP_2_1]
        assert e21.rhs == pytest.approx(e21.alternatives[0], abs=1e-10)


class TestPseudoinverseIdentities:
    def test_example_41_terms(self):
        eps = 0.5
        p = example_41_pair(eps)
        EAp = p.E @ p.pinv_a
        EBp = p.E @ p.pinv_b
        assert fro2(EAp) == pytest.approx(1 / (1 + eps) ** 2, rel=1e-14)
        assert fro2(EBp) == pytest.approx(1 / eps ** 2 + 1, rel=1e-14)
        assert fro2(p.P_b @ EAp) == pytest.approx(1 / (1 + eps) ** 2, rel=1e-14)
        assert fro2(p.P_a @ EBp) == pytest.approx(1 / eps ** 2, rel=1e-14)
        r = by_id(lemma23_identities(p))[IdentityId.IDE_1_1]
        assert r.rhs == pytest.approx(1.0, abs=1e-13)

    def test_unperturbed(self, rng):
        A = random_rank_matrix(rng, 4, 4, 3)
        for r in lemma23_identities(make_pair(A, A)):
            assert r.rhs == 0.0

    def test_random_unequal_rank(self, rng):
        p = make_pair(random_rank_matrix(rng, 5, 6, 2), random_rank_matrix(rng, 5, 6, 4))
        reps = by_id(lemma23_identities(p))
        for i in (IdentityId.IDE_1_1, IdentityId.IDE_1_2):
            assert reps[i].applicable and reps[i].abs_residual < 1e-10
        for i in (IdentityId.IDE_2_1, IdentityId.IDE_2_2):
            assert not reps[i].applicable
            assert reps[i].within()


class TestTildeIdentities:
    def test_example_41_expansion(self):
        p = example_41_pair(0.5)
        Et = p.E_tilde
        np.testing.assert_allclose(p.A @ Et, np.diag([2.0, 0.0]), atol=1e-14)
        np.testing.assert_allclose(p.B @ Et, np.diag([2 / 3, 1.0]), atol=1e-14)
        np.testing.assert_allclose(p.A @ Et @ p.P_b, np.diag([2.0, 0.0]), atol=1e-14)
        np.testing.assert_allclose(p.B @ Et @ p.P_a, np.diag([2 / 3, 0.0]), atol=1e-14)
        r = by_id(cor25_identities(p))[IdentityId.COR_IDE_PRIMAL]
        assert r.rhs == pytest.approx(1.0, abs=1e-13)

    def test_unperturbed(self, rng):
        A = random_rank_matrix(rng, 3, 5, 2)
        for r in cor25_identities(make_pair(A, A)):
            assert r.rhs == 0.0

    def test_random(self, rng):
        p = make_pair(random_rank_matrix(rng, 7, 4, 3), random_rank_matrix(rng, 7, 4, 3))
        for r in cor25_identities(p):
            assert r.max_residual < 1e-10
            assert len(r.alternatives) == 2


class TestReports:
    def test_all_ten_in_order(self, rng):
        p = make_pair(random_rank_matrix(rng, 4, 4, 2), random_rank_matrix(rng, 4, 4, 2))
        reps = all_identities(p)
        assert [r.identity_id for r in reps] == list(IdentityId)
        assert all(r.within() for r in reps)

    def test_residual_fields(self):
        r = IdentityResidualReport(IdentityId.EXP_1_1, 2.0, 1.5, True, (2.25,))
        assert r.abs_residual == 0.5
        assert r.max_residual == 0.5
        assert not r.within()
        assert IdentityResidualReport(IdentityId.EXP_2_1, 2.0, 0.0, False).within()

    def test_relative_tolerance_scales_with_lhs(self):
        assert IdentityResidualReport(IdentityId.IDE_1_1, 1e6, 1e6 + 1e-4, True).within(1e-9)
        assert not IdentityResidualReport(IdentityId.IDE_1_1, 1e6, 1e6 + 1e-2, True).within(1e-9)


class TestTraceInequality:
    def test_identity(self):
        assert trace_inequality_check(np.eye(2), np.eye(2)) == TraceSandwich(2.0, 2.0, 2.0)

    def test_diagonal(self):
        s = trace_inequality_check(np.diag([2.0, 1.0]), np.diag([3.0, 0.0]))
        assert s == TraceSandwich(3.0, 6.0, 6.0)
        assert s.holds()

    def test_random_hermitian(self, rng):
        for _ in range(100):
            X = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
            Y = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
            assert trace_inequality_check(X + X.conj().T, Y + Y.conj().T).holds(1e-9)

    def test_aligned_eigenvectors_attain_upper(self, rng):
        q, _ = np.linalg.qr(rng.standard_normal((4, 4)))
        M = q @ np.diag([4.0, 3.0, 2.0, 1.0]) @ q.T
        N = q @ np.diag([1.0, 0.5, 0.2, 0.1]) @ q.T
        s = trace_inequality_check(M, N)
        assert s.value == pytest.approx(s.upper, rel=1e-12)

    def test_non_hermitian_rejected(self):
        with pytest.raises(ValueError, match="not Hermitian"):
            trace_inequality_check([[0, 1], [0, 0]], np.eye(2))

    def test_non_square_rejected(self):
        with pytest.raises(ValueError, match="square"):
            trace_inequality_check(np.ones((2, 3)), np.eye(2))

    def test_order_mismatch(self):
        with pytest.raises(ValueError, match="order mismatch"):
            trace_inequality_check(np.eye(2), np.eye(3))
