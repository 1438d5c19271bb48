"""Dense complex linear algebra used by the projection-perturbation tools.

Matrices are plain ``numpy`` arrays of dtype ``complex128``.  Everything in
this module is a pure function of its inputs; returned arrays are marked
read-only so cached values inside a :class:`PerturbationPair` cannot be
mutated by accident.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

EPS = np.finfo(np.float64).eps

__all__ = [
    "EPS",
    "DimensionError",
    "SvdConvergenceError",
    "TolerancePolicy",
    "SvdFactorization",
    "PerturbationPair",
    "as_matrix",
    "svd",
    "jacobi_svd",
    "pinv",
    "projector",
    "frobenius_norm_sq",
    "spectral_norm",
    "trace",
    "make_pair",
]


class DimensionError(ValueError):
    """Raised for incompatible or unsupported matrix shapes."""


class SvdConvergenceError(np.linalg.LinAlgError):
    """The iterative SVD did not converge within its sweep budget."""

    def __init__(self, sweeps: int, off: float):
        self.sweeps = sweeps
        self.off = off
        super().__init__(
            f"Jacobi SVD did not converge after {sweeps} sweeps "
            f"(largest relative off-diagonal {off:.3e})"
        )


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def as_matrix(data) -> np.ndarray:
    """Return ``data`` as a finite, non-empty, 2-D complex128 array (a copy)."""
    m = np.array(data, dtype=np.complex128)
    if m.ndim != 2:
        raise DimensionError(f"expected a 2-D matrix, got ndim={m.ndim}")
    if m.shape[0] == 0 or m.shape[1] == 0:
        raise DimensionError(f"empty matrix of shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return _frozen(m)


@dataclass(frozen=True)
class TolerancePolicy:
    """How the numerical-rank cutoff is derived from the largest singular value.

    ``atol`` wins when given.  Otherwise the cutoff is ``rtol * sigma_1`` with
    ``rtol`` defaulting to ``max(m, n) * eps``.
    """

    rtol: Optional[float] = None
    atol: Optional[float] = None

    def __post_init__(self):
        for name in ("rtol", "atol"):
            v = getattr(self, name)
            if v is not None and not (np.isfinite(v) and v >= 0):
                raise ValueError(f"{name} must be a non-negative finite number")

    def cutoff(self, shape: tuple[int, int], sigma_max: float) -> float:
        if self.atol is not None:
            return float(self.atol)
        rtol = self.rtol if self.rtol is not None else max(shape) * EPS
        return float(rtol * sigma_max)


DEFAULT_POLICY = TolerancePolicy()


@dataclass(frozen=True)
class SvdFactorization:
    """Full SVD ``M = U diag(s) V*`` with a numerical-rank split.

    ``u`` is m x m, ``v`` is n x n (not ``V*``), ``s`` holds the
    ``min(m, n)`` singular values in non-increasing order.
    """

    u: np.ndarray
    s: np.ndarray
    v: np.ndarray
    rank: int
    tolerance: float

    @property
    def shape(self) -> tuple[int, int]:
        return (self.u.shape[0], self.v.shape[0])

    @property
    def u1(self) -> np.ndarray:
        return self.u[:, : self.rank]

    @property
    def u2(self) -> np.ndarray:
        return self.u[:, self.rank:]

    @property
    def v1(self) -> np.ndarray:
        return self.v[:, : self.rank]

    @property
    def v2(self) -> np.ndarray:
        return self.v[:, self.rank:]

    @property
    def sigma1(self) -> np.ndarray:
        """Nonzero singular values (the diagonal of Sigma_1)."""
        return self.s[: self.rank]

    @property
    def norm2(self) -> float:
        """Spectral norm of the factored matrix."""
        return float(self.s[0]) if self.s.size else 0.0

    @property
    def pinv_norm2(self) -> float:
        """Spectral norm of the pseudoinverse, 0 for a zero-rank matrix."""
        return 1.0 / float(self.s[self.rank - 1]) if self.rank else 0.0

    def reconstruct(self) -> np.ndarray:
        k = self.s.size
        return (self.u[:, :k] * self.s) @ self.v[:, :k].conj().T


def _complete_unitary(q: np.ndarray, m: int) -> np.ndarray:
    """Extend orthonormal columns ``q`` (m x k) to an m x m unitary matrix."""
    k = q.shape[1]
    if k == m:
        return q
    full, _ = np.linalg.qr(q, mode="complete")
    return np.hstack([q, full[:, k:]])


def jacobi_svd(M, max_sweeps: int = 60) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """One-sided (Hestenes) Jacobi SVD of a complex matrix.

    Returns ``(u, s, v)`` with ``u`` m x m, ``v`` n x n unitary and ``s``
    sorted non-increasing.  Raises :class:`SvdConvergenceError` when the
    columns are not mutually orthogonal after ``max_sweeps`` sweeps.
    """
    a = np.array(M, dtype=np.complex128)
    m, n = a.shape
    if m < n:
        v, s, u = jacobi_svd(a.conj().T, max_sweeps)
        return u, s, v

    w = a.copy()
    v = np.eye(n, dtype=np.complex128)
    tol = n * EPS
    off = 0.0
    for sweep in range(1, max_sweeps + 1):
        off = 0.0
        for i in range(n - 1):
            for j in range(i + 1, n):
                alpha = np.vdot(w[:, i], w[:, i]).real
                beta = np.vdot(w[:, j], w[:, j]).real
                gamma = np.vdot(w[:, i], w[:, j])
                g = abs(gamma)
                if g == 0.0:
                    continue
                rel = g / np.sqrt(alpha * beta)
                off = max(off, rel)
                if rel <= tol:
                    continue
                phase = gamma / g
                zeta = (beta - alpha) / (2.0 * g)
                t = np.copysign(1.0, zeta) / (abs(zeta) + np.hypot(1.0, zeta))
                c = 1.0 / np.hypot(1.0, t)
                sn = c * t
                # Rotate w_i and (phase-aligned) w_j so their inner product vanishes.
                wi, wj = w[:, i].copy(), w[:, j] * np.conj(phase)
                w[:, i] = c * wi - sn * wj
                w[:, j] = sn * wi + c * wj
                vi, vj = v[:, i].copy(), v[:, j] * np.conj(phase)
                v[:, i] = c * vi - sn * vj
                v[:, j] = sn * vi + c * vj
        if off <= tol:
            break
    else:
        raise SvdConvergenceError(max_sweeps, off)

    s = np.linalg.norm(w, axis=0)
    order = np.argsort(-s, kind="stable")
    s, w, v = s[order], w[:, order], v[:, order]
    keep = int(np.count_nonzero(s > (s[0] if s.size else 0.0) * n * EPS)) if s.size else 0
    q = w[:, :keep] / s[:keep]
    u = _complete_unitary(q, m)
    return u, s, v


def svd(M, tol_policy: TolerancePolicy = DEFAULT_POLICY, method: str = "lapack") -> SvdFactorization:
    """Full SVD with numerical rank.

    ``method="lapack"`` uses ``numpy.linalg.svd`` and falls back to the Jacobi
    routine if LAPACK reports non-convergence; ``method="jacobi"`` forces the
    Jacobi routine.
    """
    a = as_matrix(M)
    if method == "lapack":
        try:
            u, s, vh = np.linalg.svd(a, full_matrices=True)
            v = vh.conj().T
        except np.linalg.LinAlgError:
            u, s, v = jacobi_svd(a)
    elif method == "jacobi":
        u, s, v = jacobi_svd(a)
    else:
        raise ValueError(f"unknown SVD method {method!r}")
    sigma_max = float(s[0]) if s.size else 0.0
    cutoff = tol_policy.cutoff(a.shape, sigma_max)
    rank = int(np.count_nonzero(s > cutoff))
    return SvdFactorization(
        u=_frozen(np.ascontiguousarray(u)),
        s=_frozen(np.asarray(s, dtype=np.float64)),
        v=_frozen(np.ascontiguousarray(v)),
        rank=rank,
        tolerance=cutoff,
    )


def pinv(F: SvdFactorization) -> np.ndarray:
    """Moore-Penrose inverse ``V_1 Sigma_1^{-1} U_1^*`` from a factorization."""
    m, n = F.shape
    if F.rank == 0:
        return _frozen(np.zeros((n, m), dtype=np.complex128))
    return _frozen((F.v1 / F.sigma1) @ F.u1.conj().T)


def _range_projector(q: np.ndarray) -> np.ndarray:
    # q q^* is Hermitian to the last bit: entry (i, j) is the conjugate of (j, i).
    return _frozen(q @ q.conj().T)


def projector(M, tol_policy: TolerancePolicy = DEFAULT_POLICY) -> np.ndarray:
    """Orthogonal projector ``M M^dagger`` onto the column space of ``M``."""
    return _range_projector(svd(M, tol_policy).u1)


def frobenius_norm_sq(M) -> float:
    a = np.asarray(M)
    return float(np.sum(a.real ** 2 + a.imag ** 2)) if np.iscomplexobj(a) else float(np.sum(a ** 2))


def spectral_norm(M) -> float:
    a = np.asarray(M, dtype=np.complex128)
    if a.size == 0:
        return 0.0
    return float(np.linalg.svd(a, compute_uv=False)[0])


def trace(M) -> complex:
    a = np.asarray(M)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"trace needs a square matrix, got shape {a.shape}")
    return complex(np.trace(a))


@dataclass(frozen=True)
class PerturbationPair:
    """A matrix ``A`` and its perturbation ``B`` with every derived quantity.

    ``E = B - A`` and ``E_tilde = B^dagger - A^dagger``.  ``P_a``/``P_b`` are
    the m x m column-space projectors, ``P_a_star``/``P_b_star`` the n x n
    row-space projectors.
    """

    A: np.ndarray
    B: np.ndarray
    svd_a: SvdFactorization
    svd_b: SvdFactorization
    pinv_a: np.ndarray
    pinv_b: np.ndarray
    E: np.ndarray
    E_tilde: np.ndarray
    P_a: np.ndarray
    P_b: np.ndarray
    P_a_star: np.ndarray
    P_b_star: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return self.A.shape

    @property
    def rank_a(self) -> int:
        return self.svd_a.rank

    @property
    def rank_b(self) -> int:
        return self.svd_b.rank

    @property
    def equal_rank(self) -> bool:
        return self.svd_a.rank == self.svd_b.rank

    def swapped(self) -> "PerturbationPair":
        """The pair ``(B, A)``, reusing the cached factorizations."""
        return PerturbationPair(
            A=self.B, B=self.A, svd_a=self.svd_b, svd_b=self.svd_a,
            pinv_a=self.pinv_b, pinv_b=self.pinv_a,
            E=_frozen(-self.E), E_tilde=_frozen(-self.E_tilde),
            P_a=self.P_b, P_b=self.P_a, P_a_star=self.P_b_star, P_b_star=self.P_a_star,
        )


def make_pair(A, B, tol_policy: TolerancePolicy = DEFAULT_POLICY, method: str = "lapack") -> PerturbationPair:
    a = as_matrix(A)
    b = as_matrix(B)
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch: A is {a.shape}, B is {b.shape}")
    fa = svd(a, tol_policy, method)
    fb = svd(b, tol_policy, method)
    pa, pb = pinv(fa), pinv(fb)
    return PerturbationPair(
        A=a, B=b, svd_a=fa, svd_b=fb, pinv_a=pa, pinv_b=pb,
        E=_frozen(b - a), E_tilde=_frozen(pb - pa),
        P_a=_range_projector(fa.u1), P_b=_range_projector(fb.u1),
        P_a_star=_range_projector(fa.v1), P_b_star=_range_projector(fb.v1),
    )
