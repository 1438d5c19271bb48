"""Exact identities for the squared Frobenius deviation of projectors.

Every identity is evaluated numerically and compared against the deviation
computed directly from the projectors, so the reports double as a test of the
underlying factorizations.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple

import numpy as np

from .linalg import PerturbationPair, as_matrix, frobenius_norm_sq as fro2

__all__ = [
    "IdentityId",
    "DeviationPair",
    "IdentityResidualReport",
    "TraceSandwich",
    "deviation_exact",
    "lemma22_expressions",
    "lemma23_identities",
    "cor25_identities",
    "all_identities",
    "trace_inequality_check",
    "HERMITIAN_ATOL",
    "DEFAULT_RTOL",
]

HERMITIAN_ATOL = 1e-12
DEFAULT_RTOL = 1e-9


class IdentityId(str, Enum):
    EXP_1_1 = "EXP_1_1"
    EXP_1_2 = "EXP_1_2"
    EXP_2_1 = "EXP_2_1"
    EXP_2_2 = "EXP_2_2"
    IDE_1_1 = "IDE_1_1"
    IDE_1_2 = "IDE_1_2"
    IDE_2_1 = "IDE_2_1"
    IDE_2_2 = "IDE_2_2"
    COR_IDE_PRIMAL = "COR_IDE_PRIMAL"
    COR_IDE_DUAL = "COR_IDE_DUAL"


class DeviationPair(NamedTuple):
    """``primal = ||P_B - P_A||_F^2`` and ``dual = ||P_B* - P_A*||_F^2``."""

    primal: float
    dual: float


@dataclass(frozen=True)
class IdentityResidualReport:
    """One identity evaluated on one pair.

    ``rhs`` is the first (or only) right-hand side.  Equal-rank identities
    come in two equivalent forms; the second lives in ``alternatives``.
    """

    identity_id: IdentityId
    lhs: float
    rhs: float
    applicable: bool
    alternatives: tuple[float, ...] = field(default=())

    @property
    def abs_residual(self) -> float:
        return abs(self.lhs - self.rhs)

    @property
    def max_residual(self) -> float:
        """Largest ``|lhs - form|`` over the primary and alternative forms."""
        return max([self.abs_residual] + [abs(self.lhs - a) for a in self.alternatives])

    def within(self, rtol: float = DEFAULT_RTOL) -> bool:
        """True when not applicable or every form matches ``lhs`` to ``rtol * max(1, lhs)``."""
        return (not self.applicable) or self.max_residual <= rtol * max(1.0, abs(self.lhs))


def deviation_exact(pair: PerturbationPair) -> DeviationPair:
    return DeviationPair(
        primal=fro2(pair.P_b - pair.P_a),
        dual=fro2(pair.P_b_star - pair.P_a_star),
    )


def _h(x: np.ndarray) -> np.ndarray:
    return x.conj().T


def lemma22_expressions(pair: PerturbationPair, deviation: DeviationPair | None = None) -> list[IdentityResidualReport]:
    """Deviations through the cross blocks of the two SVD bases."""
    dev = deviation or deviation_exact(pair)
    fa, fb = pair.svd_a, pair.svd_b
    u12 = fro2(_h(fb.u1) @ fa.u2)  # ||U~_1^* U_2||^2
    u21 = fro2(_h(fb.u2) @ fa.u1)  # ||U~_2^* U_1||^2
    v12 = fro2(_h(fb.v1) @ fa.v2)
    v21 = fro2(_h(fb.v2) @ fa.v1)
    eq = pair.equal_rank
    return [
        IdentityResidualReport(IdentityId.EXP_1_1, dev.primal, u12 + u21, True),
        IdentityResidualReport(IdentityId.EXP_1_2, dev.dual, v12 + v21, True),
        IdentityResidualReport(IdentityId.EXP_2_1, dev.primal, 2 * u12, eq, (2 * u21,)),
        IdentityResidualReport(IdentityId.EXP_2_2, dev.dual, 2 * v12, eq, (2 * v21,)),
    ]


def lemma23_identities(pair: PerturbationPair, deviation: DeviationPair | None = None) -> list[IdentityResidualReport]:
    """Deviations through ``E = B - A`` and the pseudoinverses only."""
    dev = deviation or deviation_exact(pair)
    E, Ap, Bp = pair.E, pair.pinv_a, pair.pinv_b
    EAp, EBp = E @ Ap, E @ Bp
    ApE, BpE = Ap @ E, Bp @ E
    t_eap, t_ebp = fro2(EAp), fro2(EBp)
    t_bbeap = fro2(pair.P_b @ EAp)
    t_aaebp = fro2(pair.P_a @ EBp)
    t_ape, t_bpe = fro2(ApE), fro2(BpE)
    t_apebb = fro2(ApE @ pair.P_b_star)
    t_bpeaa = fro2(BpE @ pair.P_a_star)
    eq = pair.equal_rank
    return [
        IdentityResidualReport(IdentityId.IDE_1_1, dev.primal, t_eap + t_ebp - t_bbeap - t_aaebp, True),
        IdentityResidualReport(IdentityId.IDE_1_2, dev.dual, t_ape + t_bpe - t_apebb - t_bpeaa, True),
        IdentityResidualReport(IdentityId.IDE_2_1, dev.primal, 2 * (t_eap - t_bbeap), eq, (2 * (t_ebp - t_aaebp),)),
        IdentityResidualReport(IdentityId.IDE_2_2, dev.dual, 2 * (t_ape - t_apebb), eq, (2 * (t_bpe - t_bpeaa),)),
    ]


def cor25_identities(pair: PerturbationPair, deviation: DeviationPair | None = None) -> list[IdentityResidualReport]:
    """Deviations through ``E_tilde = B^dagger - A^dagger``.

    When the ranks agree the two-term forms are attached as alternatives.
    """
    dev = deviation or deviation_exact(pair)
    A, B, Et = pair.A, pair.B, pair.E_tilde
    AEt, BEt = A @ Et, B @ Et
    EtA, EtB = Et @ A, Et @ B
    t_aet, t_bet = fro2(AEt), fro2(BEt)
    t_aetbb = fro2(AEt @ pair.P_b)
    t_betaa = fro2(BEt @ pair.P_a)
    t_eta, t_etb = fro2(EtA), fro2(EtB)
    t_bbeta = fro2(pair.P_b_star @ EtA)
    t_aaetb = fro2(pair.P_a_star @ EtB)
    eq = pair.equal_rank
    primal_alt = (2 * (t_aet - t_aetbb), 2 * (t_bet - t_betaa)) if eq else ()
    dual_alt = (2 * (t_eta - t_bbeta), 2 * (t_etb - t_aaetb)) if eq else ()
    return [
        IdentityResidualReport(IdentityId.COR_IDE_PRIMAL, dev.primal, t_aet + t_bet - t_aetbb - t_betaa, True, primal_alt),
        IdentityResidualReport(IdentityId.COR_IDE_DUAL, dev.dual, t_eta + t_etb - t_bbeta - t_aaetb, True, dual_alt),
    ]


def all_identities(pair: PerturbationPair) -> list[IdentityResidualReport]:
    """All ten identity reports, in :class:`IdentityId` order."""
    dev = deviation_exact(pair)
    return lemma22_expressions(pair, dev) + lemma23_identities(pair, dev) + cor25_identities(pair, dev)


class TraceSandwich(NamedTuple):
    lower: float
    value: float
    upper: float

    def holds(self, rtol: float = DEFAULT_RTOL) -> bool:
        slack = rtol * max(1.0, abs(self.lower), abs(self.upper))
        return self.lower - slack <= self.value <= self.upper + slack


def _check_hermitian(M: np.ndarray, name: str) -> None:
    if M.shape[0] != M.shape[1]:
        raise ValueError(f"{name} must be square, got shape {M.shape}")
    skew = np.sqrt(fro2(M - _h(M)))
    if skew > HERMITIAN_ATOL:
        raise ValueError(f"{name} is not Hermitian (||M - M*||_F = {skew:.3e})")


def trace_inequality_check(M, N) -> TraceSandwich:
    """Bracket ``tr(MN)`` by the anti-sorted and sorted eigenvalue products.

    Raises ``ValueError`` for non-square, mismatched or non-Hermitian input.
    """
    M, N = as_matrix(M), as_matrix(N)
    _check_hermitian(M, "M")
    _check_hermitian(N, "N")
    if M.shape != N.shape:
        raise ValueError(f"order mismatch: {M.shape} vs {N.shape}")
    lam = np.sort(np.linalg.eigvalsh(M))[::-1]
    mu = np.sort(np.linalg.eigvalsh(N))[::-1]
    value = float(np.trace(M @ N).real)
    return TraceSandwich(float(lam @ mu[::-1]), value, float(lam @ mu))
