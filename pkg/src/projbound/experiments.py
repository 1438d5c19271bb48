"""Random matrix pairs, epsilon sweeps over the worked examples, and bound benchmarks.

Randomness comes from numpy's Philox-4x64 counter-based generator seeded with
``SeedSequence(seed)``.  Per-sample streams use ``SeedSequence(seed,
spawn_key=(index,))``, so a sample's matrices depend only on ``(seed, index)``
and serial and parallel runs agree bit for bit.
"""
from __future__ import annotations

import datetime as _dt
import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, Union

import numpy as np

from .bounds import BoundKind, BoundRecord, SANDWICH_RTOL, evaluate_all
from .identities import DeviationPair, deviation_exact
from .linalg import PerturbationPair, TolerancePolicy, make_pair

__all__ = [
    "SvProfile",
    "EnsembleSpec",
    "SweepRow",
    "SweepReport",
    "BenchmarkResult",
    "rng_for",
    "derive_seed",
    "haar_unitary",
    "gen_matrices",
    "gen_pair",
    "mixed_ensemble",
    "equal_rank_ensemble",
    "example_41_pair",
    "example_42_pair",
    "intro_pair",
    "example_41_sweep",
    "example_42_sweep",
    "intro_examples",
    "tightness_benchmark",
    "DEFAULT_EPSILON_GRID",
    "TIE_ATOL",
]

DEFAULT_EPSILON_GRID = tuple(np.linspace(0.11, 0.99, 90).tolist())
TIE_ATOL = 1e-12
NEAR_DEFICIENT_SIGMA = 1e-6


def rng_for(seed: int, index: Optional[int] = None) -> np.random.Generator:
    ss = np.random.SeedSequence(seed) if index is None else np.random.SeedSequence(seed, spawn_key=(index,))
    return np.random.Generator(np.random.Philox(ss))


def derive_seed(seed: int, index: int) -> int:
    """64-bit seed for sample ``index`` of a run seeded with ``seed``."""
    state = np.random.SeedSequence(seed, spawn_key=(index,)).generate_state(1, np.uint64)
    return int(state[0])


@dataclass(frozen=True)
class SvProfile:
    """Singular value profile.

    * ``uniform``: i.i.d. Uniform[0.1, 1], sorted non-increasing.
    * ``geometric``: ``1, 1/ratio, 1/ratio^2, ...``.
    * ``explicit``: the given values (length must equal the rank).
    """

    kind: str = "uniform"
    ratio: Optional[float] = None
    values: Optional[tuple[float, ...]] = None

    def __post_init__(self):
        if self.kind not in ("uniform", "geometric", "explicit"):
            raise ValueError(f"unknown profile {self.kind!r}")
        if self.kind == "geometric" and not (self.ratio and self.ratio > 0):
            raise ValueError("geometric profile needs ratio > 0")
        if self.kind == "explicit":
            if not self.values or any(v <= 0 for v in self.values):
                raise ValueError("explicit profile needs positive values")

    @classmethod
    def parse(cls, text: str) -> "SvProfile":
        """``uniform`` | ``geometric:<ratio>`` | ``explicit:<v1>,<v2>,...``"""
        kind, _, arg = text.partition(":")
        kind = kind.strip().lower()
        if kind == "geometric":
            return cls(kind, ratio=float(arg))
        if kind == "explicit":
            return cls(kind, values=tuple(float(v) for v in arg.split(",")))
        return cls(kind)

    def sample(self, rank: int, rng: np.random.Generator) -> np.ndarray:
        if self.kind == "uniform":
            return np.sort(rng.uniform(0.1, 1.0, rank))[::-1]
        if self.kind == "geometric":
            return self.ratio ** -np.arange(rank, dtype=float)
        if len(self.values) != rank:
            raise ValueError(f"explicit profile has {len(self.values)} values, rank is {rank}")
        return np.sort(np.asarray(self.values, dtype=float))[::-1]

    def __str__(self):
        if self.kind == "geometric":
            return f"geometric:{self.ratio:g}"
        if self.kind == "explicit":
            return "explicit:" + ",".join(f"{v:g}" for v in self.values)
        return self.kind


@dataclass(frozen=True)
class EnsembleSpec:
    """Recipe for one random pair.

    ``perturb_scale=None`` draws ``B`` independently of ``A``.  Otherwise
    ``B = A + perturb_scale * G`` with ``G`` complex Gaussian normalized to unit
    spectral norm, truncated to its best rank-``rank_b`` approximation when
    ``rank_b < min(m, n)``.  ``perturb_scale=0`` gives ``B`` equal to ``A``.
    """

    m: int
    n: int
    rank_a: int
    rank_b: int
    sv_profile: SvProfile = SvProfile()
    perturb_scale: Optional[float] = None
    seed: int = 0
    sv_profile_b: Optional[SvProfile] = None

    def __post_init__(self):
        k = min(self.m, self.n)
        if self.m < 1 or self.n < 1:
            raise ValueError("dimensions must be positive")
        if not (0 <= self.rank_a <= k and 0 <= self.rank_b <= k):
            raise ValueError(f"infeasible rank: ranks ({self.rank_a}, {self.rank_b}) with min(m, n) = {k}")
        if self.perturb_scale is not None and self.perturb_scale < 0:
            raise ValueError("perturb_scale must be non-negative")


def haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary: QR of a complex Gaussian with phase-fixed R."""
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def _with_singular_values(m: int, n: int, sigma: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    u = haar_unitary(m, rng)
    v = haar_unitary(n, rng)
    k = sigma.size
    return (u[:, :k] * sigma) @ v[:, :k].conj().T


def gen_matrices(spec: EnsembleSpec) -> tuple[np.ndarray, np.ndarray]:
    rng = rng_for(spec.seed)
    m, n = spec.m, spec.n
    a = _with_singular_values(m, n, spec.sv_profile.sample(spec.rank_a, rng), rng)
    if spec.perturb_scale is None:
        prof = spec.sv_profile_b or spec.sv_profile
        b = _with_singular_values(m, n, prof.sample(spec.rank_b, rng), rng)
        return a, b
    if spec.perturb_scale == 0:
        return a, a.copy()
    g = rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n))
    g /= np.linalg.norm(g, 2)
    b = a + spec.perturb_scale * g
    if spec.rank_b < min(m, n):
        u, s, vh = np.linalg.svd(b, full_matrices=False)
        k = spec.rank_b
        b = (u[:, :k] * s[:k]) @ vh[:k]
    return a, b


def gen_pair(spec: EnsembleSpec, tol_policy: TolerancePolicy = TolerancePolicy()) -> PerturbationPair:
    """Build the pair and check its numerical ranks hit the targets."""
    a, b = gen_matrices(spec)
    pair = make_pair(a, b, tol_policy)
    if (pair.rank_a, pair.rank_b) != (spec.rank_a, spec.rank_b):
        raise ValueError(
            f"infeasible rank: wanted ({spec.rank_a}, {spec.rank_b}), "
            f"got ({pair.rank_a}, {pair.rank_b})"
        )
    return pair


def mixed_ensemble(count: int, seed: int, max_m: int = 20, max_n: int = 15) -> list[EnsembleSpec]:
    """Mixed shapes and ranks.

    Sample ``i`` with ``i % 10 == 0`` is near rank deficient (smallest nonzero
    singular value of ``A`` is 1e-6, ``B`` a rank-preserving perturbation of
    size 1e-6).  ``i % 10 in (1, 2)`` are equal rank.  The rest draw both
    ranks independently; a third of those perturb ``A`` instead of drawing
    ``B`` afresh.
    """
    specs = []
    for i in range(count):
        rng = rng_for(seed, i)
        m = int(rng.integers(2, max_m + 1))
        n = int(rng.integers(2, max_n + 1))
        k = min(m, n)
        sub = derive_seed(seed, i)
        slot = i % 10
        if slot == 0:
            r = int(rng.integers(2, k + 1))
            head = np.sort(rng.uniform(0.1, 1.0, r - 1))[::-1]
            prof = SvProfile("explicit", values=tuple(head.tolist()) + (NEAR_DEFICIENT_SIGMA,))
            specs.append(EnsembleSpec(m, n, r, r, prof, NEAR_DEFICIENT_SIGMA, sub))
        elif slot in (1, 2):
            r = int(rng.integers(1, k + 1))
            scale = None if rng.random() < 0.5 else float(10.0 ** rng.uniform(-4, -1))
            specs.append(EnsembleSpec(m, n, r, r, SvProfile(), scale, sub))
        else:
            r = int(rng.integers(1, k + 1))
            s = int(rng.integers(1, k + 1))
            scale = None if rng.random() < 2 / 3 else float(10.0 ** rng.uniform(-3, 0))
            specs.append(EnsembleSpec(m, n, r, s, SvProfile(), scale, sub))
    return specs


def equal_rank_ensemble(count: int, seed: int, max_m: int = 20, max_n: int = 15) -> list[EnsembleSpec]:
    """Equal-rank pairs, half independent and half perturbative."""
    specs = []
    for i in range(count):
        rng = rng_for(seed, i)
        m = int(rng.integers(2, max_m + 1))
        n = int(rng.integers(2, max_n + 1))
        r = int(rng.integers(1, min(m, n) + 1))
        scale = None if i % 2 == 0 else float(10.0 ** rng.uniform(-4, 0))
        specs.append(EnsembleSpec(m, n, r, r, SvProfile(), scale, derive_seed(seed, i)))
    return specs


# -- worked examples ---------------------------------------------------------

def example_41_pair(eps: float) -> PerturbationPair:
    return make_pair([[1, 0], [0, 0]], [[eps / (1 + eps), 0], [0, eps / 10]])


def example_42_pair(eps: float) -> PerturbationPair:
    return make_pair([[1, 0], [0, 0]], [[2 * eps / (1 + eps), 0], [0, eps]])


def intro_pair() -> PerturbationPair:
    return make_pair([[1, 0], [0, 0]], [[0.5, 1], [0, 1]])


@dataclass
class SweepRow:
    label: str
    epsilon: Optional[float]
    deviation: DeviationPair
    records: list[BoundRecord]
    reference: dict[str, float] = field(default_factory=dict)

    def value(self, key: str) -> float:
        for r in self.records:
            if r.key == key:
                return r.value
        raise KeyError(key)


@dataclass
class SweepReport:
    scenario_id: str
    epsilon_grid: list[float]
    rows: list[SweepRow]
    metadata: dict = field(default_factory=dict)


def _metadata(**extra) -> dict:
    meta = {
        "sandwich_rtol": SANDWICH_RTOL,
        "rank_rtol": "max(m,n)*eps",
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    }
    meta.update(extra)
    return meta


def _check_grid(grid: Sequence[float]) -> list[float]:
    grid = [float(e) for e in grid]
    bad = [e for e in grid if not 0.1 < e < 1.0]
    if bad:
        raise ValueError(f"epsilon values outside (0.1, 1): {bad}")
    return grid


def _row(label, eps, pair, reference, grid, force_general_rank=False) -> SweepRow:
    return SweepRow(label, eps, deviation_exact(pair), evaluate_all(pair, grid, force_general_rank), reference)


def example_41_sweep(epsilon_grid: Sequence[float] = DEFAULT_EPSILON_GRID, param_grid=None,
                     force_general_rank: bool = False) -> SweepReport:
    """Single-deviation bounds on ``A = diag(1, 0)``, ``B = diag(eps/(1+eps), eps/10)``."""
    grid = _check_grid(epsilon_grid)
    rows = []
    for e in grid:
        ref = {
            "exact": 1.0,
            "ref_chen": 1 + 1 / e ** 2 + 1 / (1 + e) ** 2,
            "ref_li": 0.99 + 1 / (1 + e) ** 2,
            "ref_new": 1.0,
        }
        rows.append(_row(f"eps={e:.17g}", e, example_41_pair(e), ref, param_grid, force_general_rank))
    return SweepReport("example_4_1", grid, rows, _metadata())


def example_42_sweep(epsilon_grid: Sequence[float] = DEFAULT_EPSILON_GRID, param_grid=None,
                     force_general_rank: bool = False) -> SweepReport:
    """Combined bounds on ``A = diag(1, 0)``, ``B = diag(2 eps/(1+eps), eps)``."""
    grid = _check_grid(epsilon_grid)
    rows = []
    for e in grid:
        pair = example_42_pair(e)
        a, b = pair.svd_a.pinv_norm2 ** 2, pair.svd_b.pinv_norm2 ** 2
        dev = deviation_exact(pair)
        frac = (1 - e) ** 2 / (1 + e) ** 2
        ref = {
            "C1": dev.primal + min(a / b, b / a) * dev.dual,
            "C2": dev.primal + dev.dual,
            "L1": dev.primal + max(a / b, b / a) * dev.dual,
            "ref_C1": 1 + e ** 2,
            "ref_C2": 2.0,
            "ref_chen_comb1": 1 + e ** 2 + (1 + 1 / e ** 2) * frac,
            "ref_li_comb1": 2 + 2 * (1 - e) ** 2 / (e ** 2 * (1 + e) ** 2) - (1 - e) ** 2 / (2 * e ** 2),
        }
        rows.append(SweepRow(f"eps={e:.17g}", e, dev, evaluate_all(pair, param_grid, force_general_rank), ref))
    return SweepReport("example_4_2", grid, rows, _metadata())


def intro_examples(epsilons: Sequence[float] = (0.2, 0.5, 0.9)) -> SweepReport:
    """Both introductory pairs, showing neither single-deviation classical bound dominates.

    Raises ``AssertionError`` if the expected orderings do not hold.
    """
    rows = []
    pair = intro_pair()
    rows.append(_row("second_pair", None, pair, {
        "ref_chen": 25 / 4, "ref_li": (18 + 3 * math.sqrt(65)) / 4}, None))
    for e in epsilons:
        if not 0 < e < 1:
            raise ValueError(f"epsilon {e} outside (0, 1)")
        rows.append(_row(f"ex0 eps={e:.17g}", float(e), example_41_pair(e), {
            "ref_chen": 1 + 1 / e ** 2 + 1 / (1 + e) ** 2, "ref_li": 0.99 + 1 / (1 + e) ** 2}, None))
    chen_wins = rows[0].value("CHEN_UP") < rows[0].value("LI_UP")
    li_wins = all(r.value("LI_UP") < r.value("CHEN_UP") for r in rows[1:])
    report = SweepReport("intro", [float(e) for e in epsilons], rows,
                         _metadata(chen_tighter_on_second_pair=chen_wins, li_tighter_on_ex0=li_wins))
    if not (chen_wins and li_wins):
        raise AssertionError("expected CHEN_UP and LI_UP to be incomparable on the introductory pairs")
    return report


# -- benchmark ---------------------------------------------------------------

@dataclass
class BenchmarkResult:
    n_samples: int
    stats: dict[str, dict[str, float]]
    win_rate: dict[str, dict[str, float]]
    ties: dict[str, dict[str, int]]
    violations: int
    violation_keys: list[str]
    kinds: dict[str, str] = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)


def _evaluate_spec(args) -> tuple[DeviationPair, list[BoundRecord]]:
    spec, grid, tol_policy, force_general_rank = args
    pair = gen_pair(spec, tol_policy)
    return deviation_exact(pair), evaluate_all(pair, grid, force_general_rank)


def tightness_benchmark(spec: Union[EnsembleSpec, Sequence[EnsembleSpec]], n_samples: Optional[int] = None, *,
                        grid=None, workers: int = 1,
                        tol_policy: TolerancePolicy = TolerancePolicy(),
                        force_general_rank: bool = False) -> BenchmarkResult:
    """Relative gaps, pairwise win rates and sandwich violations over an ensemble.

    A single ``spec`` is replicated ``n_samples`` times with seeds derived from
    ``(spec.seed, index)``; a sequence of specs is used as given.  The relative
    gap of a record is ``|value - exact| / max(1, exact)``.  Win rates compare
    records of the same kind over samples where both apply; gaps within
    ``TIE_ATOL`` count as a win for both sides and are tallied in ``ties``.
    """
    if isinstance(spec, EnsembleSpec):
        if n_samples is None or n_samples < 1:
            raise ValueError("n_samples must be >= 1")
        specs = [replace(spec, seed=derive_seed(spec.seed, i)) for i in range(n_samples)]
    else:
        specs = list(spec)
        if not specs:
            raise ValueError("empty ensemble")
    jobs = [(s, grid, tol_policy, force_general_rank) for s in specs]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_evaluate_spec, jobs, chunksize=16))
    else:
        results = [_evaluate_spec(j) for j in jobs]

    gaps: dict[str, list[Optional[float]]] = {}
    kinds: dict[str, BoundKind] = {}
    violations, violation_keys = 0, []
    for idx, (dev, records) in enumerate(results):
        for rec in records:
            kinds.setdefault(rec.key, rec.kind)
            col = gaps.setdefault(rec.key, [None] * len(results))
            if not rec.applicable:
                continue
            exact = rec.exact_target(dev)
            col[idx] = abs(rec.value - exact) / max(1.0, abs(exact))
            if not rec.satisfied(dev):
                violations += 1
                violation_keys.append(f"{idx}:{rec.key}")

    stats = {}
    for key, col in gaps.items():
        vals = [g for g in col if g is not None]
        stats[key] = {
            "applicable": len(vals),
            "mean_gap": statistics.fmean(vals) if vals else math.nan,
            "median_gap": statistics.median(vals) if vals else math.nan,
            "max_gap": max(vals) if vals else math.nan,
        }

    # Win rates only among the unparameterized records.
    keys = [k for k in gaps if "[" not in k]
    win_rate: dict[str, dict[str, float]] = {}
    ties: dict[str, dict[str, int]] = {}
    for ki in keys:
        win_rate[ki], ties[ki] = {}, {}
        for kj in keys:
            if ki == kj or kinds[ki] is not kinds[kj]:
                continue
            both = [(x, y) for x, y in zip(gaps[ki], gaps[kj]) if x is not None and y is not None]
            if not both:
                continue
            tie = sum(1 for x, y in both if abs(x - y) <= TIE_ATOL)
            wins = sum(1 for x, y in both if x < y or abs(x - y) <= TIE_ATOL)
            win_rate[ki][kj] = wins / len(both)
            ties[ki][kj] = tie

    return BenchmarkResult(len(results), stats, win_rate, ties, violations, violation_keys,
                           {k: v.value for k, v in kinds.items()},
                           _metadata(grid=list(grid) if grid is not None else None))
