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
from typing import List, Optional, Set, Tuple

import pandas as pd
from camel.logger import get_logger
from pydantic import BaseModel, ConfigDict, Field

from .bnb import HEURISTIC, IspoSolution
from .bounds import BoundTable, compute_bound_table
from .model import (
    Instance,
    LotAssignment,
    inventory_from_assignment,
    map_markdown_cost,
    supply_cost,
)
from .salesdyn import solve_pop_exact
from .sop import SfaParams, modified_costs, sfa_heuristic
from .trajectory import PriceTrajectory, ScenarioTrajectoryMap, enumerate_trajectories

logger = get_logger(__name__)


class PingPongParams(BaseModel):
    r"""Parameters of the alternating heuristic.

    Args:
        max_iters (int): Iteration cap. (default: :obj:`10`)
        sfa (SfaParams): Parameters of the supply heuristic.
        workers (int): Threads for bounds and POP. (default: :obj:`1`)
    """

    model_config = ConfigDict(frozen=True)

    max_iters: int = Field(default=10, ge=1)
    sfa: SfaParams = Field(default_factory=SfaParams)
    workers: int = Field(default=1, ge=1)


class IterationRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    iteration: int
    sop_value: float
    pop_value: float
    map_changed: bool
    trajectories: str


class PingPongResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    solution: IspoSolution
    trace: Tuple[IterationRecord, ...]
    stop_reason: str

    def trace_frame(self) -> pd.DataFrame:
        return pd.DataFrame([record.model_dump() for record in self.trace])


def initial_map(table: BoundTable, num_scenarios: int) -> ScenarioTrajectoryMap:
    r"""Trajectory with the largest bound in every scenario."""
    return ScenarioTrajectoryMap(
        trajectories=tuple(
            table.trajectories[table.best(e)] for e in range(num_scenarios)
        )
    )


def solve_pingpong(
    instance: Instance,
    params: Optional[PingPongParams] = None,
    trajectories: Optional[List[PriceTrajectory]] = None,
    table: Optional[BoundTable] = None,
) -> PingPongResult:
    r"""Alternate between the supply and the pricing problem.

    Starting from the best-bounded trajectory of every scenario, the supply
    is fixed by the score-and-fix heuristic under the current map, then the
    map is re-optimized for that supply. The loop ends when the map stops
    changing, a pair repeats or the iteration cap is hit; the best supply
    step solution is returned.

    Args:
        instance (Instance): The instance.
        params (PingPongParams, optional): Parameters. (default: :obj:`None`)
        trajectories (List[PriceTrajectory], optional): Candidate set.
            (default: :obj:`None`)
        table (BoundTable, optional): Precomputed bounds.
            (default: :obj:`None`)

    Returns:
        PingPongResult: Best solution, per-iteration trace and stop reason.
    """
    params = params or PingPongParams()
    if trajectories is None:
        trajectories = enumerate_trajectories(
            instance.k_max, instance.p_max, instance.k_observ
        )
    if table is None:
        table = compute_bound_table(instance, trajectories, workers=params.workers)
    dual = table.dual_bound(instance.probabilities)

    current = initial_map(table, instance.num_scenarios)
    seen: Set[Tuple[LotAssignment, ScenarioTrajectoryMap]] = set()
    trace: List[IterationRecord] = []
    best: Optional[Tuple[float, LotAssignment, ScenarioTrajectoryMap]] = None
    stop_reason = "iteration-cap"

    for iteration in range(1, params.max_iters + 1):
        coeffs = modified_costs(instance, current)
        sop = sfa_heuristic(coeffs, instance, params.sfa)
        sop_value = sop.value - map_markdown_cost(current, instance)
        if best is None or sop_value > best[0]:
            best = (sop_value, sop.assignment, current)

        supply, _ = inventory_from_assignment(sop.assignment, instance)
        pop = solve_pop_exact(supply, instance, trajectories, workers=params.workers)
        pop_value = pop.expected_value - supply_cost(sop.assignment, instance)
        changed = pop.trajectory_map != current
        trace.append(
            IterationRecord(
                iteration=iteration,
                sop_value=sop_value,
                pop_value=pop_value,
                map_changed=changed,
                trajectories=pop.trajectory_map.label(),
            )
        )
        logger.debug(
            f"Ping-pong iteration {iteration}: SOP {sop_value:.4f}, "
            f"POP {pop_value:.4f}, map changed: {changed}"
        )
        if not changed:
            stop_reason = "converged"
            break
        pair = (sop.assignment, pop.trajectory_map)
        if pair in seen:
            stop_reason = "cycle"
            break
        seen.add(pair)
        current = pop.trajectory_map

    value, assignment, trajectory_map = best
    logger.info(
        f"Ping-pong stopped ({stop_reason}) after {len(trace)} iterations: "
        f"objective {value:.4f}, dual bound {dual:.4f}"
    )
    solution = IspoSolution(
        assignment=assignment,
        trajectory_map=trajectory_map,
        objective=value,
        status=HEURISTIC,
        dual_bound=dual,
        stats={"iterations": len(trace), "bound_evaluations": len(table)},
    )
    return PingPongResult(
        solution=solution, trace=tuple(trace), stop_reason=stop_reason
    )

