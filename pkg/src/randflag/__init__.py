"""Random flag complexes: clique homology, spectral certificates, thresholds."""

from .certify import (
    LinkFailure,
    PipelineResult,
    PropertyTCertificate,
    VanishingCertificate,
    garland_certify,
    vanishing_pipeline,
    zuk_certify,
)
from .complex import (
    FlagSkeleton,
    build_skeleton,
    count_maximal_cliques,
    is_pure,
    link_graph,
    skeleton_from_json,
    skeleton_to_json,
)
from .experiments import (
    TrialConfig,
    critical_p,
    expected_maximal_cliques,
    lower_threshold,
    pittel_probability,
    poisson_fit,
    poisson_mean,
    run_trials,
    sweep,
    upper_threshold,
)
from .graph import EdgeListError, Graph, Seed, is_connected, parse_edge_list, sample_gnp
from .homology import BettiVector, betti, boundary_matrix, rank_exact, rank_modular
from .spectral import Spectrum, lambda2, laplacian, perturbation_check, spectrum

__version__ = "0.1.0"

__all__ = [
    "betti",
    "BettiVector",
    "boundary_matrix",
    "build_skeleton",
    "count_maximal_cliques",
    "critical_p",
    "EdgeListError",
    "expected_maximal_cliques",
    "FlagSkeleton",
    "garland_certify",
    "Graph",
    "is_connected",
    "is_pure",
    "lambda2",
    "laplacian",
    "link_graph",
    "LinkFailure",
    "lower_threshold",
    "parse_edge_list",
    "perturbation_check",
    "PipelineResult",
    "pittel_probability",
    "poisson_fit",
    "poisson_mean",
    "PropertyTCertificate",
    "rank_exact",
    "rank_modular",
    "run_trials",
    "sample_gnp",
    "Seed",
    "skeleton_from_json",
    "skeleton_to_json",
    "Spectrum",
    "spectrum",
    "sweep",
    "TrialConfig",
    "upper_threshold",
    "vanishing_pipeline",
    "VanishingCertificate",
    "zuk_certify",
]
