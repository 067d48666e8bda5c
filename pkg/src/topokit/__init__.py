"""Persistent homology for point clouds and images, with topology-aware losses."""
from .estimators import AlphaPersistence, LPVIInterpolator, TopologyAwareFitter
from .exceptions import TopoKitError
from .lpvi import LpviConfig, LpviReport, lpvi
from .metrics import (bottleneck, injective_matching_cost, topo_diff, total_persistence,
                      wasserstein)
from .optimizer import (OptimizerConfig, TheoremConstants, ToyProblem, estimate_constants,
                        optimize, step_size_bound, total_loss, verify_lemma2, verify_lemma3)
from .persistence import (FilteredComplex, PersistenceDiagram, alpha_filtration,
                          alpha_persistence, compute_persistence, lower_star_filtration,
                          truncate_topk)
from .persloss import persloss, persloss_gradient, reshape_to_rgb
from .rank_oracle import betti_rank_oracle

__version__ = "0.1.0"

__all__ = [
    "AlphaPersistence", "FilteredComplex", "LPVIInterpolator", "LpviConfig", "LpviReport",
    "OptimizerConfig", "PersistenceDiagram", "TheoremConstants", "TopoKitError",
    "TopologyAwareFitter", "ToyProblem", "alpha_filtration", "alpha_persistence",
    "betti_rank_oracle", "bottleneck", "compute_persistence", "estimate_constants",
    "injective_matching_cost", "lower_star_filtration", "lpvi", "optimize", "persloss",
    "persloss_gradient", "reshape_to_rgb", "step_size_bound", "topo_diff", "total_loss",
    "total_persistence", "truncate_topk", "verify_lemma2", "verify_lemma3", "wasserstein",
]
