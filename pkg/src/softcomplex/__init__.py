"""Soft random simplicial complexes: sampling, thinning, homology and pattern statistics.

Modules
-------
geometry
    Point processes on the unit cube or ball, geometric graphs, enclosing balls.
complex
    Rips and Čech complexes, hierarchical thinning, standard complexes, text format.
homology
    Betti numbers over Z/2 and the Euler characteristic.
census
    Connected components and the hollow-simplex, cross-polytope and
    large-component counts.
morse
    The norm-ordered discrete gradient field and its critical faces.
experiments
    Trial runner, estimators, closed-form predictions and regime sweeps.
cli
    The ``softcomplex`` command.
"""

from softcomplex.census import CensusReport, census
from softcomplex.complex import (
    ProbabilityVector,
    SimplicialComplex,
    build_cech,
    build_rips,
    cross_polytope,
    simplex,
    simplex_boundary,
    thin,
)
from softcomplex.experiments import EstimatorResult, RegimeSpec, TrialConfig, estimate, run_trial
from softcomplex.geometry import Domain, PointCloud, build_graph, sample_binomial, sample_poisson
from softcomplex.homology import BettiVector, betti, euler_characteristic
from softcomplex.morse import MorseMatching, build_gradient_field, critical_counts, verify_gradient

__version__ = "0.1.0"

__all__ = [
    "CensusReport",
    "census",
    "ProbabilityVector",
    "SimplicialComplex",
    "build_cech",
    "build_rips",
    "cross_polytope",
    "simplex",
    "simplex_boundary",
    "thin",
    "EstimatorResult",
    "RegimeSpec",
    "TrialConfig",
    "estimate",
    "run_trial",
    "Domain",
    "PointCloud",
    "build_graph",
    "sample_binomial",
    "sample_poisson",
    "BettiVector",
    "betti",
    "euler_characteristic",
    "MorseMatching",
    "build_gradient_field",
    "critical_counts",
    "verify_gradient",
]
