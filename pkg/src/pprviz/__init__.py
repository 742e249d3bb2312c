"""Multi-level graph visualization engine.

Pipeline: load a directed graph, cluster it into a bounded-fanout supernode
hierarchy, estimate degree-weighted proximity between the children of any
supernode with tau-gated bidirectional pushes, convert to clamped log-scale
distances, and embed with stress majorization.  Served through a CLI and a
small HTTP JSON API for the browser explorer.
"""

from .graphio import DirectedGraph, load_edge_list, neighbors
from .hierarchy import SupergraphHierarchy, build_hierarchy, modularity_gain
from .layout import Layout, loss, normalize_layout, stress_majorization
from .metrics import (MetricReport, check_aesthetic_bounds, node_distribution,
                      ulcv)
from .pdist import (PDistMatrix, accuracy_params_for_pdist, build_pdist_matrix,
                    dppr_to_pdist)
from .ppr import (DprIndex, PprParams, compute_dpr, exact_level_dppr, gbp,
                  gfp, gfra, ppr_single_source_pi, tau_push)
from .service import (Workspace, preprocess, serve, visualize,
                      visualize_single_level)

__version__ = "0.1.0"

__all__ = [
    "DirectedGraph", "load_edge_list", "neighbors",
    "SupergraphHierarchy", "build_hierarchy", "modularity_gain",
    "Layout", "loss", "normalize_layout", "stress_majorization",
    "MetricReport", "check_aesthetic_bounds", "node_distribution", "ulcv",
    "PDistMatrix", "accuracy_params_for_pdist", "build_pdist_matrix",
    "dppr_to_pdist",
    "DprIndex", "PprParams", "compute_dpr", "exact_level_dppr", "gbp", "gfp",
    "gfra", "ppr_single_source_pi", "tau_push",
    "Workspace", "preprocess", "serve", "visualize", "visualize_single_level",
    "__version__",
]
