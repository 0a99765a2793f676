"""Rate regions: couplings, rate bounds, coupling search and frontiers."""

from .coupling import (
    AuxiliaryCoupling,
    CascadeCoupling,
    MembershipReport,
    RatePoint,
    RelayCoupling,
    cardinality_bounds,
    check_membership_D,
    general_cascade_rates,
    general_task_coupling,
    rate_triple,
    scatter_relay_coupling,
    scatter_target,
    task_coupling,
    task_rates,
    task_target,
    variation_rates,
)
from .frontier import (
    Corner,
    RegionFrontier,
    point_in_region,
    scatter_empirical_rate,
    scatter_relay_region,
    scatter_summary,
    task_region,
)
from .search import (
    OptimizerConfig,
    cascade_common_information,
    minimize_rates,
    triple_wyner,
    wyner_common_information,
)

__all__ = [
    "AuxiliaryCoupling",
    "CascadeCoupling",
    "Corner",
    "MembershipReport",
    "OptimizerConfig",
    "RatePoint",
    "RegionFrontier",
    "RelayCoupling",
    "cardinality_bounds",
    "cascade_common_information",
    "check_membership_D",
    "general_cascade_rates",
    "general_task_coupling",
    "minimize_rates",
    "point_in_region",
    "rate_triple",
    "scatter_empirical_rate",
    "scatter_relay_coupling",
    "scatter_relay_region",
    "scatter_summary",
    "scatter_target",
    "task_coupling",
    "task_rates",
    "task_region",
    "task_target",
    "triple_wyner",
    "variation_rates",
    "wyner_common_information",
]
