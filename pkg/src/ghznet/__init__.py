"""Entanglement distribution with GHZ fusions on repeater networks."""
from .topology import (
    DegreeDistribution,
    Topology,
    apply_brickwork_coloring,
    build_configuration_graph,
    build_square_grid,
    color_bounded_black,
    divide_network,
)
from .protocol import (
    GhzRecord,
    ProtocolConfig,
    RateEstimate,
    count_shared_ghz,
    estimate_rate,
    fuse_ghz_records,
    resolve_cycle,
    run_cycle,
    sample_link_outcomes,
    select_fusions,
)

__version__ = "0.1.0"

__all__ = [
    "DegreeDistribution",
    "Topology",
    "apply_brickwork_coloring",
    "build_configuration_graph",
    "build_square_grid",
    "color_bounded_black",
    "divide_network",
    "GhzRecord",
    "ProtocolConfig",
    "RateEstimate",
    "count_shared_ghz",
    "estimate_rate",
    "fuse_ghz_records",
    "resolve_cycle",
    "run_cycle",
    "sample_link_outcomes",
    "select_fusions",
]
