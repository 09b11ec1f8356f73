"""Express freight train service network design under highway competition."""
from .assignment import (
    DemandDecision,
    GeneralCost,
    LMSolution,
    assign_aon,
    assign_logit,
    general_cost,
    logit_probability,
    rail_general_cost,
    solve_lower,
)
from .network import (
    BlockSwapPlan,
    Demand,
    ExpressService,
    GlobalParams,
    Mode,
    Network,
    ServiceArc,
    ServicePlan,
    Station,
    TariffTable,
    TrainClass,
    arc_capacity,
    train_frequency,
    validate_network,
)
from .pathgen import (
    Path,
    RouteSpec,
    enumerate_block_swap_plans,
    enumerate_rail_paths,
    highway_travel_time,
    path_time,
    path_unit_cost,
)
from .scenario import Scenario, load_scenario
from .sndet import (
    ObjectivePoint,
    SearchConfig,
    enumerate_pareto_exact,
    evaluate_plan,
    rail_revenue,
    search_services,
    upper_cost,
)

__version__ = "0.1.0"
