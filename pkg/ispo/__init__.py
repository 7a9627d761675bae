# ========= Copyright 2023-2024 @ CAMEL-AI.org. All Rights Reserved. =========
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
# ========= Copyright 2023-2024 @ CAMEL-AI.org. All Rights Reserved. =========
from .adjust import AdjustProblem, AdjustSolution, solve_integral, solve_relaxed
from .bnb import BnbParams, IspoSolution, brute_force_ispo, solve_ispo_exact
from .bounds import (
    BoundTable,
    bound_itemwise,
    bound_itemwise_supply,
    bound_lotwise,
    compute_bound_table,
    exact_bound,
    gamma,
)
from .cli import export_lp, lp_family_counts
from .exceptions import (
    InfeasibleError,
    InstanceValidationError,
    IspoError,
    NonConvexError,
    OddBranchCountError,
    RroUndefinedError,
    WilcoxonTieError,
    WorkLimitExceeded,
)
from .field import (
    FieldStudy,
    compute_rro,
    realize_sales,
    rhpop_step,
    run_field_study,
    wilcoxon_exact_tail,
    wilcoxon_signed_rank,
)
from .model import (
    GeneratorConfig,
    Instance,
    LotAssignment,
    generate_instance,
    inventory_from_assignment,
    ispo_objective,
    load_instance,
    validate_instance,
)
from .pingpong import PingPongParams, solve_pingpong
from .salesdyn import simulate_sales, solve_pop_exact
from .sop import SfaParams, modified_costs, sfa_heuristic, solve_sop_exact
from .trajectory import (
    PriceTrajectory,
    ScenarioTrajectoryMap,
    enumerate_trajectories,
    trajectory_count,
)

__version__ = "0.0.1"

__all__ = [
    "AdjustProblem",
    "AdjustSolution",
    "solve_integral",
    "solve_relaxed",
    "BnbParams",
    "IspoSolution",
    "brute_force_ispo",
    "solve_ispo_exact",
    "BoundTable",
    "bound_itemwise",
    "bound_itemwise_supply",
    "bound_lotwise",
    "compute_bound_table",
    "exact_bound",
    "gamma",
    "export_lp",
    "lp_family_counts",
    "InfeasibleError",
    "InstanceValidationError",
    "IspoError",
    "NonConvexError",
    "OddBranchCountError",
    "RroUndefinedError",
    "WilcoxonTieError",
    "WorkLimitExceeded",
    "FieldStudy",
    "compute_rro",
    "realize_sales",
    "rhpop_step",
    "run_field_study",
    "wilcoxon_exact_tail",
    "wilcoxon_signed_rank",
    "GeneratorConfig",
    "Instance",
    "LotAssignment",
    "generate_instance",
    "inventory_from_assignment",
    "ispo_objective",
    "load_instance",
    "validate_instance",
    "PingPongParams",
    "solve_pingpong",
    "simulate_sales",
    "solve_pop_exact",
    "SfaParams",
    "modified_costs",
    "sfa_heuristic",
    "solve_sop_exact",
    "PriceTrajectory",
    "ScenarioTrajectoryMap",
    "enumerate_trajectories",
    "trajectory_count",
]
