"""Upper, lower and combined bounds on projector deviations.

Each bound is returned as a :class:`BoundRecord` carrying its value and
whether it applies to the pair at hand.  Bounds that need ``||A^dagger||`` or
``||B^dagger||`` are reported as not applicable when ``A`` or ``B`` is zero;
the equal-rank variants are not applicable when the numerical ranks differ.

All records are computed from a single :class:`PairNorms` snapshot, so no
factorization is repeated across bounds or parameter values.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, fields
from enum import Enum
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .identities import DeviationPair
from .linalg import PerturbationPair, SvdFactorization, frobenius_norm_sq as fro2

__all__ = [
    "BoundKind",
    "Target",
    "BoundRecord",
    "PairNorms",
    "AuxiliaryQuantities",
    "CombinedParams",
    "DEFAULT_GRID",
    "SANDWICH_RTOL",
    "DOMINANCE",
    "FORMULA_NOTES",
    "pair_norms",
    "auxiliary_quantities",
    "classical_bounds",
    "classical_combined_bounds",
    "rank_bounds",
    "new_upper_bounds",
    "new_lower_bounds",
    "phi",
    "psi",
    "i_weight",
    "j_weight",
    "combined_upper",
    "combined_lower",
    "evaluate_all",
    "param_grid",
]

SANDWICH_RTOL = 1e-9
DEFAULT_GRID = (0.0, 0.25, 0.5, 0.75, 1.0)

# Readings of ambiguous formula notation, echoed into every JSON report.
FORMULA_NOTES = {
    "beta2": "second branch read as ||B||_2^2 * (||E~||_F^2 - ||E~ A A+||_F^2)",
    "COMB_UP_WEIGHTED": "dual weight is the single min ratio, not per-side weights",
}


class BoundKind(str, Enum):
    UPPER = "UPPER"
    LOWER = "LOWER"


class Target(str, Enum):
    PRIMAL = "PRIMAL"
    COMBINED = "COMBINED"


@dataclass(frozen=True)
class BoundRecord:
    """An evaluated bound.

    For ``COMBINED`` targets the bounded quantity is
    ``w_primal * primal + w_dual * dual`` with ``combined_weights = (w_primal, w_dual)``.
    ``params`` records the family parameters (``lambda``, ``mu``, ``xi``, ``eta``)
    for parameterized records.
    """

    bound_id: str
    kind: BoundKind
    target: Target
    value: float
    applicable: bool = True
    inapplicability_reason: Optional[str] = None
    combined_weights: Optional[tuple[float, float]] = None
    params: tuple[tuple[str, float], ...] = ()

    def __post_init__(self):
        if self.target is Target.COMBINED:
            if self.combined_weights is None:
                raise ValueError(f"{self.bound_id}: combined target needs weights")
            if self.applicable and not (self.combined_weights[0] > 0 and self.combined_weights[1] >= 0):
                raise ValueError(f"{self.bound_id}: invalid weights {self.combined_weights}")
        if self.applicable and not np.isfinite(self.value):
            raise ValueError(f"{self.bound_id}: applicable bound with non-finite value")

    @property
    def key(self) -> str:
        """``bound_id`` plus the parameter values, unique within one evaluation."""
        if not self.params:
            return self.bound_id
        inner = ",".join(f"{k}={v:g}" for k, v in self.params)
        return f"{self.bound_id}[{inner}]"

    def exact_target(self, dev: DeviationPair) -> float:
        if self.target is Target.PRIMAL:
            return dev.primal
        wp, wd = self.combined_weights
        return wp * dev.primal + wd * dev.dual

    def slack(self, dev: DeviationPair) -> float:
        """Signed margin by which the bound holds (negative means violated)."""
        exact = self.exact_target(dev)
        return self.value - exact if self.kind is BoundKind.UPPER else exact - self.value

    def satisfied(self, dev: DeviationPair, rtol: float = SANDWICH_RTOL) -> bool:
        if not self.applicable:
            return True
        return self.slack(dev) >= -rtol * max(1.0, abs(self.exact_target(dev)))


@dataclass(frozen=True)
class PairNorms:
    """Every scalar the bounds need.  All are squared norms.

    ``a``/``b`` are ``||A^dagger||_2^2`` and ``||B^dagger||_2^2``; ``na``/``nb``
    are ``||A||_2^2`` and ``||B||_2^2``; the rest are Frobenius.

    Differences such as ``||E||^2 - ||B B+ E||^2`` are stored as the single
    norm they equal (here ``||(I - P_B) E||^2``).  Subtracting the two
    squared norms loses everything when ``A`` or ``B`` is ill conditioned.
    """

    m: int
    rank_a: int
    rank_b: int
    a: float
    b: float
    na: float
    nb: float
    e: float            # ||E||
    et: float           # ||E~||
    eap: float          # ||E A+||
    ebp: float          # ||E B+||
    ape: float          # ||A+ E||
    bpe: float          # ||B+ E||
    bpeap: float        # ||B+ E A+||
    apebp: float        # ||A+ E B+||
    bet_a: float        # ||B E~ A||
    aet_b: float        # ||A E~ B||
    e_out_b: float      # ||E||^2 - ||B B+ E||^2
    e_out_a: float      # ||E||^2 - ||A A+ E||^2
    et_out_b: float     # ||E~||^2 - ||E~ B B+||^2
    et_out_a: float     # ||E~||^2 - ||E~ A A+||^2
    eapa_out: float     # ||E A+ A||^2 - ||B E~ A||^2
    ebpb_out: float     # ||E B+ B||^2 - ||A E~ B||^2
    apaet_out: float    # ||A+ A E~||^2 - ||A+ E B+||^2
    bpbet_out: float    # ||B+ B E~||^2 - ||B+ E A+||^2
    e_off_ab: float     # ||E||^2 - ||A E~ B||^2
    e_off_ba: float     # ||E||^2 - ||B E~ A||^2
    et_off_ba: float    # ||E~||^2 - ||B+ E A+||^2
    et_off_ab: float    # ||E~||^2 - ||A+ E B+||^2

    @property
    def nonzero(self) -> bool:
        return self.rank_a > 0 and self.rank_b > 0

    @property
    def equal_rank(self) -> bool:
        return self.rank_a == self.rank_b


def pair_norms(pair: PerturbationPair) -> PairNorms:
    E, Et = pair.E, pair.E_tilde
    A, B, Ap, Bp = pair.A, pair.B, pair.pinv_a, pair.pinv_b
    Pa, Pb, Pas, Pbs = pair.P_a, pair.P_b, pair.P_a_star, pair.P_b_star
    EAp, EBp = E @ Ap, E @ Bp
    EPas, EPbs = E @ Pas, E @ Pbs
    PasEt, PbsEt = Pas @ Et, Pbs @ Et
    return PairNorms(
        m=pair.shape[0],
        rank_a=pair.rank_a,
        rank_b=pair.rank_b,
        a=pair.svd_a.pinv_norm2 ** 2,
        b=pair.svd_b.pinv_norm2 ** 2,
        na=pair.svd_a.norm2 ** 2,
        nb=pair.svd_b.norm2 ** 2,
        e=fro2(E),
        et=fro2(Et),
        eap=fro2(EAp),
        ebp=fro2(EBp),
        ape=fro2(Ap @ E),
        bpe=fro2(Bp @ E),
        bpeap=fro2(Bp @ EAp),
        apebp=fro2(Ap @ EBp),
        # B E~ A = P_B A - B P_A*,  A E~ B = A P_B* - P_A B
        bet_a=fro2(Pb @ A - B @ Pas),
        aet_b=fro2(A @ Pbs - Pa @ B),
        e_out_b=fro2(E - Pb @ E),
        e_out_a=fro2(E - Pa @ E),
        et_out_b=fro2(Et - Et @ Pb),
        et_out_a=fro2(Et - Et @ Pa),
        eapa_out=fro2(EPas - Pb @ EPas),
        ebpb_out=fro2(EPbs - Pa @ EPbs),
        apaet_out=fro2(PasEt - PasEt @ Pb),
        bpbet_out=fro2(PbsEt - PbsEt @ Pa),
        # A E~ B = -P_A E P_B*  and  B+ E A+ = -P_B* E~ P_A, so each
        # difference splits into two orthogonal pieces.
        e_off_ab=fro2(E - Pa @ E) + fro2(Pa @ E - Pa @ EPbs),
        e_off_ba=fro2(E - Pb @ E) + fro2(Pb @ E - Pb @ EPas),
        et_off_ba=fro2(Et - Pbs @ Et) + fro2(PbsEt - PbsEt @ Pa),
        et_off_ab=fro2(Et - Pas @ Et) + fro2(PasEt - PasEt @ Pb),
    )


def _norms(source: Union[PerturbationPair, PairNorms]) -> PairNorms:
    return source if isinstance(source, PairNorms) else pair_norms(source)


@dataclass(frozen=True)
class AuxiliaryQuantities:
    alpha1: float
    alpha2: float
    alpha1p: float
    alpha2p: float
    beta1: float
    beta2: float
    beta1p: float
    beta2p: float
    gamma1: float
    gamma2: float
    gamma1p: float
    gamma2p: float

    def as_dict(self) -> dict[str, float]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def auxiliary_quantities(source: Union[PerturbationPair, PairNorms]) -> AuxiliaryQuantities:
    """The max/min ratio terms feeding the new upper and lower bounds.

    Needs ``A != 0`` and ``B != 0``.  ``beta2`` reads its second branch as
    ``||B||_2^2 * (||E~||^2 - ||E~ A A+||^2)``.
    """
    q = _norms(source)
    if not q.nonzero:
        raise ValueError("auxiliary quantities need nonzero A and B")
    a, b, na, nb = q.a, q.b, q.na, q.nb
    return AuxiliaryQuantities(
        alpha1=max(q.bpeap / b, q.bet_a / na),
        alpha2=max(q.apebp / a, q.aet_b / nb),
        alpha1p=min(nb * q.bpeap, a * q.bet_a),
        alpha2p=min(na * q.apebp, b * q.aet_b),
        beta1=min(a * q.e_out_b, na * q.et_out_b),
        beta2=min(b * q.e_out_a, nb * q.et_out_a),
        beta1p=max(q.e_out_b / na, q.et_out_b / a),
        beta2p=max(q.e_out_a / nb, q.et_out_a / b),
        gamma1=min(a * q.eapa_out, na * q.apaet_out),
        gamma2=min(b * q.ebpb_out, nb * q.bpbet_out),
        gamma1p=max(q.eapa_out / na, q.apaet_out / a),
        gamma2p=max(q.ebpb_out / nb, q.bpbet_out / b),
    )


_ZERO_REASON = "A or B is zero; pseudoinverse norms undefined"
_RANK_REASON = "numerical ranks differ"
_FORCED_REASON = "general-rank formulas forced"


class _Emitter:
    """Collects records, handling the zero-matrix and equal-rank gates."""

    def __init__(self, q: PairNorms, force_general_rank: bool = False):
        self.q = q
        self.force_general_rank = force_general_rank
        self.records: list[BoundRecord] = []

    def eqrank_reason(self) -> Optional[str]:
        if self.force_general_rank:
            return _FORCED_REASON
        if not self.q.equal_rank:
            return _RANK_REASON
        return None

    def emit(self, bound_id, kind, value_fn, *, eqrank=False, weights_fn=None, params=()):
        reason = None
        if not self.q.nonzero:
            reason = _ZERO_REASON
        elif eqrank:
            reason = self.eqrank_reason()
        target = Target.PRIMAL if weights_fn is None else Target.COMBINED
        if reason is None:
            value = float(value_fn())
            weights = None if weights_fn is None else tuple(float(w) for w in weights_fn())
            rec = BoundRecord(bound_id, kind, target, value, True, None, weights, params)
        else:
            weights = None if weights_fn is None else (float("nan"), float("nan"))
            rec = BoundRecord(bound_id, kind, target, float("nan"), False, reason, weights, params)
        self.records.append(rec)
        return rec


def classical_bounds(source, force_general_rank: bool = False) -> list[BoundRecord]:
    """Prior single-deviation upper bounds, general and equal-rank forms."""
    q = _norms(source)
    out = _Emitter(q, force_general_rank)
    U = BoundKind.UPPER
    out.emit("SUN_UP", U, lambda: (q.a + q.b) * q.e)
    out.emit("SUN_UP_EQRANK", U, lambda: 2 * min(q.a, q.b) * q.e, eqrank=True)
    out.emit("CHEN_UP", U, lambda: q.eap + q.ebp)
    out.emit("CHEN_UP_EQRANK", U, lambda: 2 * min(q.eap, q.ebp), eqrank=True)
    out.emit("LI_UP", U, lambda: (q.a + q.b) * q.e - (q.b / q.a) * q.ape - (q.a / q.b) * q.bpe)
    out.emit(
        "LI_UP_EQRANK", U,
        lambda: 2 * min(q.b * q.e - (q.b / q.a) * q.ape, q.a * q.e - (q.a / q.b) * q.bpe),
        eqrank=True,
    )
    return out.records


def classical_combined_bounds(source, force_general_rank: bool = False) -> list[BoundRecord]:
    """Prior combined upper bounds on weighted sums of both deviations."""
    q = _norms(source)
    out = _Emitter(q, force_general_rank)
    U = BoundKind.UPPER
    ratio = lambda: (1.0, min(q.a / q.b, q.b / q.a))  # noqa: E731
    ones = lambda: (1.0, 1.0)  # noqa: E731
    harmonic = lambda: 2 * q.a * q.b / (q.a + q.b)  # noqa: E731
    cross = lambda: q.apebp + q.bpeap  # noqa: E731
    out.emit("CHEN_COMB1", U, lambda: (q.a + q.b) * q.e, weights_fn=ratio)
    out.emit("CHEN_COMB2", U, lambda: 2 * min(q.a, q.b) * q.e, eqrank=True, weights_fn=ratio)
    out.emit("CHEN_COMB3", U, lambda: harmonic() * (2 * q.e), eqrank=True, weights_fn=ones)
    out.emit("LI_COMB1", U, lambda: 2 * max(q.a, q.b) * q.e - cross() / min(q.a, q.b), weights_fn=ones)
    out.emit(
        "LI_COMB2", U,
        lambda: harmonic() * (2 * q.e) - 2 * cross() / (q.a + q.b),
        eqrank=True, weights_fn=ones,
    )
    return out.records


def rank_bounds(source) -> tuple[BoundRecord, BoundRecord]:
    """Deviation bounds that depend only on ``m``, ``rank(A)`` and ``rank(B)``."""
    q = _norms(source)
    r, s, m = q.rank_a, q.rank_b, q.m
    upper = s + r if s + r <= m else 2 * m - s - r
    return (
        BoundRecord("RANK_LOW", BoundKind.LOWER, Target.PRIMAL, float(abs(s - r))),
        BoundRecord("RANK_UP", BoundKind.UPPER, Target.PRIMAL, float(upper)),
    )


def _aux_or_none(q: PairNorms) -> Optional[AuxiliaryQuantities]:
    return auxiliary_quantities(q) if q.nonzero else None


def new_upper_bounds(source, force_general_rank: bool = False):
    """Returns ``(aux, records)``; ``aux`` is ``None`` when A or B is zero."""
    q = _norms(source)
    x = _aux_or_none(q)
    out = _Emitter(q, force_general_rank)
    U = BoundKind.UPPER
    out.emit("NEW_UP1", U, lambda: q.eap + q.ebp - x.alpha1 - x.alpha2)
    out.emit("NEW_UP1_EQRANK", U, lambda: 2 * min(q.eap - x.alpha1, q.ebp - x.alpha2), eqrank=True)
    out.emit("NEW_UP2", U, lambda: x.beta1 + x.beta2)
    out.emit("NEW_UP2_EQRANK", U, lambda: 2 * min(x.beta1, x.beta2), eqrank=True)
    out.emit("NEW_UP3", U, lambda: x.gamma1 + x.gamma2)
    out.emit("NEW_UP3_EQRANK", U, lambda: 2 * min(x.gamma1, x.gamma2), eqrank=True)
    return x, out.records


def new_lower_bounds(source, force_general_rank: bool = False):
    """Returns ``(aux, records)``; ``aux`` is ``None`` when A or B is zero."""
    q = _norms(source)
    x = _aux_or_none(q)
    out = _Emitter(q, force_general_rank)
    L = BoundKind.LOWER
    out.emit("NEW_LOW1", L, lambda: q.eap + q.ebp - x.alpha1p - x.alpha2p)
    out.emit("NEW_LOW1_EQRANK", L, lambda: 2 * max(q.eap - x.alpha1p, q.ebp - x.alpha2p), eqrank=True)
    out.emit("NEW_LOW2", L, lambda: x.beta1p + x.beta2p)
    out.emit("NEW_LOW2_EQRANK", L, lambda: 2 * max(x.beta1p, x.beta2p), eqrank=True)
    out.emit("NEW_LOW3", L, lambda: x.gamma1p + x.gamma2p)
    out.emit("NEW_LOW3_EQRANK", L, lambda: 2 * max(x.gamma1p, x.gamma2p), eqrank=True)
    return x, out.records


def _check_unit(name: str, t: float) -> float:
    t = float(t)
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {t}")
    return t


@dataclass(frozen=True)
class CombinedParams:
    """Family parameters: ``lam``/``mu`` for combined upper bounds, ``xi``/``eta`` for lower."""

    lam: float = 1.0
    mu: float = 1.0
    xi: float = 0.0
    eta: float = 0.0

    def __post_init__(self):
        for f in fields(self):
            object.__setattr__(self, f.name, _check_unit(f.name, getattr(self, f.name)))


def phi(source, lam: float) -> float:
    q = _norms(source)
    lam = _check_unit("lambda", lam)
    return lam * q.e_off_ab + (1 - lam) * q.et_off_ba


def psi(source, mu: float) -> float:
    q = _norms(source)
    mu = _check_unit("mu", mu)
    return mu * q.e_off_ba + (1 - mu) * q.et_off_ab


def _norm_pair(M) -> tuple[float, float]:
    """``(||M||_2^2, ||M^dagger||_2^2)`` for a factorization or a pair of squared norms."""
    if isinstance(M, SvdFactorization):
        if M.rank == 0:
            raise ValueError("weight undefined for the zero matrix")
        return M.norm2 ** 2, M.pinv_norm2 ** 2
    n2, p2 = M
    if n2 <= 0 or p2 <= 0:
        raise ValueError("weight undefined for the zero matrix")
    return float(n2), float(p2)


def i_weight(M, t: float) -> float:
    """``t / ||M^dagger||^2 + (1 - t) / ||M||^2``.

    ``M`` is an :class:`SvdFactorization` or ``(||M||_2^2, ||M^dagger||_2^2)``.
    """
    n2, p2 = _norm_pair(M)
    t = _check_unit("t", t)
    return t / p2 + (1 - t) / n2


def j_weight(M, t: float) -> float:
    """``t ||M||^2 + (1 - t) ||M^dagger||^2``; same ``M`` conventions as :func:`i_weight`."""
    n2, p2 = _norm_pair(M)
    t = _check_unit("t", t)
    return t * n2 + (1 - t) * p2


def combined_upper(source, params: CombinedParams = CombinedParams(), *,
                   force_general_rank: bool = False, include_corollary: bool = True) -> list[BoundRecord]:
    """Parameterized combined upper bounds at ``(lam, mu)``, plus the ``lam = mu = 1`` corollary."""
    q = _norms(source)
    out = _Emitter(q, force_general_rank)
    U = BoundKind.UPPER
    lam, mu = params.lam, params.mu
    p = (("lambda", lam), ("mu", mu))
    A_, B_ = (q.na, q.a), (q.nb, q.b)

    def w():
        ia_l, ib_l, ia_m, ib_m = i_weight(A_, lam), i_weight(B_, lam), i_weight(A_, mu), i_weight(B_, mu)
        return ia_l, ib_l, ia_m, ib_m, phi(q, lam), psi(q, mu)

    def weighted():
        ia_l, ib_l, ia_m, ib_m, f, g = w()
        return f / ib_l + g / ia_m

    def weighted_w():
        ia_l, ib_l, ia_m, ib_m, _, _ = w()
        return 1.0, min(ia_l / ib_l, ib_m / ia_m)

    def summed():
        ia_l, ib_l, ia_m, ib_m, f, g = w()
        return (f + g) / min(ia_l, ib_l, ia_m, ib_m)

    out.emit("COMB_UP_WEIGHTED", U, weighted, weights_fn=weighted_w, params=p)
    out.emit("COMB_UP_SUM", U, summed, weights_fn=lambda: (1.0, 1.0), params=p)
    out.emit("COMB_UP_EQRANK1", U, lambda: 2 * phi(q, lam) / i_weight(B_, lam), eqrank=True,
             weights_fn=lambda: (1.0, i_weight(A_, lam) / i_weight(B_, lam)), params=(("lambda", lam),))
    out.emit("COMB_UP_EQRANK2", U, lambda: 2 * psi(q, mu) / i_weight(A_, mu), eqrank=True,
             weights_fn=lambda: (1.0, i_weight(B_, mu) / i_weight(A_, mu)), params=(("mu", mu),))

    if include_corollary:
        ratio = lambda: (1.0, min(q.a / q.b, q.b / q.a))  # noqa: E731
        ones = lambda: (1.0, 1.0)  # noqa: E731
        out.emit("CORUP_1_1", U, lambda: q.b * q.e_off_ab + q.a * q.e_off_ba, weights_fn=ratio)
        out.emit("CORUP_1_2", U, lambda: max(q.a, q.b) * (q.e_off_ab + q.e_off_ba), weights_fn=ones)
        out.emit("CORUP_2_1", U, lambda: 2 * min(q.a * q.e_off_ba, q.b * q.e_off_ab),
                 eqrank=True, weights_fn=ratio)
        out.emit("CORUP_2_2", U, lambda: (2 * q.a * q.b / (q.a + q.b)) * (q.e_off_ab + q.e_off_ba),
                 eqrank=True, weights_fn=ones)
    return out.records


def combined_lower(source, params: CombinedParams = CombinedParams(), *,
                   force_general_rank: bool = False, include_corollary: bool = True) -> list[BoundRecord]:
    """Parameterized combined lower bounds at ``(xi, eta)``, plus the ``xi = eta = 0`` corollary."""
    q = _norms(source)
    out = _Emitter(q, force_general_rank)
    L = BoundKind.LOWER
    xi, eta = params.xi, params.eta
    p = (("xi", xi), ("eta", eta))
    A_, B_ = (q.na, q.a), (q.nb, q.b)

    def w():
        return (j_weight(A_, xi), j_weight(B_, xi), j_weight(A_, eta), j_weight(B_, eta),
                phi(q, xi), psi(q, eta))

    def weighted():
        ja_x, jb_x, ja_e, jb_e, f, g = w()
        return f / jb_x + g / ja_e

    def weighted_w():
        ja_x, jb_x, ja_e, jb_e, _, _ = w()
        return 1.0, max(ja_x / jb_x, jb_e / ja_e)

    def summed():
        ja_x, jb_x, ja_e, jb_e, f, g = w()
        return (f + g) / max(ja_x, jb_x, ja_e, jb_e)

    out.emit("COMB_LOW_WEIGHTED", L, weighted, weights_fn=weighted_w, params=p)
    out.emit("COMB_LOW_SUM", L, summed, weights_fn=lambda: (1.0, 1.0), params=p)
    out.emit("COMB_LOW_EQRANK1", L, lambda: 2 * phi(q, xi) / j_weight(B_, xi), eqrank=True,
             weights_fn=lambda: (1.0, j_weight(A_, xi) / j_weight(B_, xi)), params=(("xi", xi),))
    out.emit("COMB_LOW_EQRANK2", L, lambda: 2 * psi(q, eta) / j_weight(A_, eta), eqrank=True,
             weights_fn=lambda: (1.0, j_weight(B_, eta) / j_weight(A_, eta)), params=(("eta", eta),))

    if include_corollary:
        ratio = lambda: (1.0, max(q.a / q.b, q.b / q.a))  # noqa: E731
        ones = lambda: (1.0, 1.0)  # noqa: E731
        out.emit("CORLOW_1_1", L, lambda: q.et_off_ab / q.a + q.et_off_ba / q.b,
                 weights_fn=ratio)
        out.emit("CORLOW_1_2", L, lambda: (q.et_off_ab + q.et_off_ba) / max(q.a, q.b), weights_fn=ones)
        out.emit("CORLOW_2_1", L, lambda: 2 * max(q.et_off_ba / q.b, q.et_off_ab / q.a),
                 eqrank=True, weights_fn=ratio)
        out.emit("CORLOW_2_2", L, lambda: 2 / (q.a + q.b) * (q.et_off_ab + q.et_off_ba),
                 eqrank=True, weights_fn=ones)
    return out.records


def param_grid(values: Sequence[float] = DEFAULT_GRID) -> list[tuple[float, float]]:
    """Exhaustive cross product of ``values`` with itself."""
    return list(itertools.product(values, values))


def _dedupe(records: Iterable[BoundRecord]) -> list[BoundRecord]:
    seen, out = set(), []
    for r in records:
        if r.key not in seen:
            seen.add(r.key)
            out.append(r)
    return out


def evaluate_all(source, grid: Optional[Sequence[float]] = DEFAULT_GRID,
                 force_general_rank: bool = False) -> list[BoundRecord]:
    """Every bound in the catalog.

    The parameterized combined families are evaluated on ``grid x grid``
    (``(lambda, mu)`` for upper, ``(xi, eta)`` for lower).  ``grid=None`` keeps
    only the corollary points ``lambda = mu = 1`` and ``xi = eta = 0``.
    """
    q = _norms(source)
    fg = force_general_rank
    recs: list[BoundRecord] = []
    recs += rank_bounds(q)
    recs += classical_bounds(q, fg)
    recs += classical_combined_bounds(q, fg)
    recs += new_upper_bounds(q, fg)[1]
    recs += new_lower_bounds(q, fg)[1]
    points = param_grid(grid) if grid is not None else [(None, None)]
    first = True
    for s, t in points:
        up = CombinedParams(lam=1.0 if s is None else s, mu=1.0 if t is None else t)
        recs += combined_upper(q, up, force_general_rank=fg, include_corollary=first)
        first = False
    first = True
    for s, t in points:
        low = CombinedParams(xi=0.0 if s is None else s, eta=0.0 if t is None else t)
        recs += combined_lower(q, low, force_general_rank=fg, include_corollary=first)
        first = False
    # The single-parameter equal-rank records repeat across the grid.
    return _dedupe(recs)


# (sharper, weaker) pairs whose ordering holds for every input.
DOMINANCE = (
    ("NEW_UP1", "CHEN_UP"),
    ("NEW_UP2", "LI_UP"),
    ("CORUP_1_1", "CHEN_COMB1"),
    ("CORUP_1_2", "LI_COMB1"),
    ("NEW_UP1_EQRANK", "CHEN_UP_EQRANK"),
    ("NEW_UP2_EQRANK", "LI_UP_EQRANK"),
    ("CORUP_2_1", "CHEN_COMB2"),
    ("CORUP_2_2", "CHEN_COMB3"),
    ("CORUP_2_2", "LI_COMB2"),
)
