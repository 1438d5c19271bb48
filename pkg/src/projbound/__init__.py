"""Exact deviations of orthogonal projectors under matrix perturbation, and bounds on them.

The package is organised as

* :mod:`projbound.linalg`: SVD, numerical rank, pseudoinverse and projectors;
* :mod:`projbound.identities`: exact expressions for the projector deviations;
* :mod:`projbound.bounds`: upper, lower and combined bounds as records;
* :mod:`projbound.experiments`: random pairs, example sweeps and benchmarks;
* :mod:`projbound.cli`: the ``projbound`` command.
"""
__version__ = "0.1.0"

from .linalg import (  # noqa: E402
    DimensionError,
    PerturbationPair,
    SvdConvergenceError,
    SvdFactorization,
    TolerancePolicy,
    frobenius_norm_sq,
    make_pair,
    pinv,
    projector,
    spectral_norm,
    svd,
    trace,
)
from .identities import DeviationPair, all_identities, deviation_exact, trace_inequality_check  # noqa: E402
from .bounds import BoundKind, BoundRecord, CombinedParams, Target, evaluate_all  # noqa: E402

__all__ = [
    "__version__",
    "DimensionError",
    "PerturbationPair",
    "SvdConvergenceError",
    "SvdFactorization",
    "TolerancePolicy",
    "frobenius_norm_sq",
    "make_pair",
    "pinv",
    "projector",
    "spectral_norm",
    "svd",
    "trace",
    "DeviationPair",
    "all_identities",
    "deviation_exact",
    "trace_inequality_check",
    "BoundKind",
    "BoundRecord",
    "CombinedParams",
    "Target",
    "evaluate_all",
]
