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
import threading
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from camel.logger import get_logger
from pydantic import BaseModel, ConfigDict

from .adjust import AdjustProblem, solve_relaxed
from .exceptions import InfeasibleError, NonConvexError
from .model import Instance
from .salesdyn import markdown_cost, yield_table
from .sop import (
    ProfitCoefficients,
    _mask_unusable,
    lot_yields,
    scenario_lot_yields,
    solve_sop_exact,
)
from .trajectory import PriceTrajectory, enumerate_trajectories
from .utils.common import ordered_map

logger = get_logger(__name__)

ITEMWISE = "bound-1"
ITEMWISE_SUPPLY = "bound-2"
LOTWISE = "bound-3"
EXACT = "exact"


class BoundEntry(BaseModel):
    r"""An upper bound on the single-scenario optimum and where it came
    from."""

    model_config = ConfigDict(frozen=True)

    value: float
    provenance: str


class BoundTable:
    r"""Best known upper bound ``Gamma(e, t)`` per scenario and trajectory.

    Updates only ever lower an entry; concurrent writers are serialized.

    Args:
        trajectories (Sequence[PriceTrajectory]): Trajectory set; entries
            are keyed by position in it.
        num_scenarios (int): Number of scenarios.
    """

    def __init__(self, trajectories: Sequence[PriceTrajectory], num_scenarios: int):
        self.trajectories = list(trajectories)
        self.num_scenarios = num_scenarios
        self._entries: Dict[Tuple[int, int], BoundEntry] = {}
        self._lock = threading.Lock()

    def __len__(self) -> int:
        return len(self._entries)

    def update(
        self, scenario: int, trajectory: int, value: float, provenance: str
    ) -> BoundEntry:
        with self._lock:
            current = self._entries.get((scenario, trajectory))
            if current is None or value < current.value:
                current = BoundEntry(value=float(value), provenance=provenance)
                self._entries[(scenario, trajectory)] = current
            return current

    def entry(self, scenario: int, trajectory: int) -> BoundEntry:
        return self._entries[(scenario, trajectory)]

    def value(self, scenario: int, trajectory: int) -> float:
        return self._entries[(scenario, trajectory)].value

    def values(self, scenario: int) -> np.ndarray:
        return np.array(
            [self.value(scenario, t) for t in range(len(self.trajectories))]
        )

    def best(self, scenario: int) -> int:
        r"""Position of the trajectory with the largest bound (first on
        ties)."""
        return int(np.argmax(self.values(scenario)))

    def dual_bound(self, probabilities: Sequence[float]) -> float:
        r"""``sum_e prob(e) * max_t Gamma(e, t)``."""
        return float(
            sum(
                prob * self.values(e).max()
                for e, prob in enumerate(probabilities)
            )
        )

    def to_frame(self) -> pd.DataFrame:
        rows = [
            {
                "scenario": e,
                "trajectory": t,
                "prices": self.trajectories[t].label(),
                "bound": entry.value,
                "provenance": entry.provenance,
            }
            for (e, t), entry in sorted(self._entries.items())
        ]
        return pd.DataFrame(rows)


def _apportioned_costs(instance: Instance) -> np.ndarray:
    r"""Per-piece handling rate ``(B, S)``: the cheapest cost per piece of
    any lot choice containing the size."""
    mults = np.asarray(instance.multiplicities, dtype=float)
    pieces = instance.lot_sizes[:, None] * mults[None, :]
    per_piece = instance.handling_table / pieces[None, :, :]
    rate = np.zeros((instance.num_branches, instance.num_sizes))
    for s in range(instance.num_sizes):
        lots = [
            l for l in instance.usable_lot_types if instance.lot_matrix[l, s] > 0
        ]
        if lots:
            rate[:, s] = per_piece[:, lots, :].min(axis=(1, 2))
    return rate


def _max_concave(values: np.ndarray, caps: np.ndarray) -> np.ndarray:
    r"""Row maxima of ``values`` over ``[0, caps]``, by nested intervals on
    rows that are concave there and by a full scan elsewhere."""
    rows = np.arange(values.shape[0])
    levels = np.arange(values.shape[1])
    inside = levels[None, :] <= caps[:, None]
    scale = max(1.0, float(np.abs(values[inside]).max(initial=0.0)))
    with np.errstate(invalid="ignore"):
        second = values[:, 2:] - 2 * values[:, 1:-1] + values[:, :-2]
        concave = ~((second > 1e-9 * scale) & inside[:, 2:]).any(axis=1)

    lo = np.zeros(len(rows), dtype=int)
    hi = caps.astype(int).copy()
    while (lo < hi).any():
        active = lo < hi
        mid = (lo + hi) // 2
        up = values[rows, np.minimum(mid + 1, values.shape[1] - 1)] > values[rows, mid]
        lo = np.where(active & up, mid + 1, lo)
        hi = np.where(active & ~up, mid, hi)
    result = values[rows, lo]
    scanned = np.where(inside, values, -np.inf).max(axis=1)
    return np.where(concave, result, scanned)


class ScenarioBounds:
    r"""Bounds of one scenario for a set of trajectories, sharing one yield
    table.

    Args:
        instance (Instance): The instance.
        scenario (int): Scenario index.
        trajectories (Sequence[PriceTrajectory]): Trajectories to bound.
    """

    def __init__(
        self,
        instance: Instance,
        scenario: int,
        trajectories: Sequence[PriceTrajectory],
    ):
        self.instance = instance
        self.scenario = scenario
        self.trajectories = list(trajectories)
        self.table = yield_table(instance, scenario, self.trajectories)
        levels = np.arange(self.table.shape[-1])
        self.item_cost = _apportioned_costs(instance)[:, :, None] * levels
        self.caps = np.broadcast_to(
            instance.level_caps, (instance.num_branches, instance.num_sizes)
        )
        self.markdown = np.array(
            [markdown_cost(instance, t) for t in self.trajectories]
        )

    def _constant(self, index: int) -> float:
        return -self.instance.opening_costs[0] - self.markdown[index]

    def _cell_values(self, index: int) -> np.ndarray:
        values = self.table[index] - self.item_cost
        levels = np.arange(values.shape[-1])
        return np.where(levels <= self.caps[..., None], values, -np.inf)

    def itemwise(self, index: int) -> float:
        r"""Every cell takes its own best supply level."""
        values = self._cell_values(index)
        flat = values.reshape(-1, values.shape[-1])
        best = _max_concave(flat, self.caps.reshape(-1))
        return self._constant(index) + float(best.sum())

    def itemwise_supply(self, index: int) -> float:
        r"""Cells share the total supply range; relaxed adjustment."""
        values = self._cell_values(index)
        cost = -values.reshape(-1, 1, values.shape[-1])
        resource = np.arange(values.shape[-1], dtype=float)[None, :]
        problem = AdjustProblem(
            cost,
            resource,
            lower=self.instance.supply_lower,
            upper=self.instance.supply_cap,
        )
        try:
            solution = solve_relaxed(problem)
        except NonConvexError:
            logger.warning(
                f"Non-convex cell profits in scenario {self.scenario}; "
                "supply bound falls back to the itemwise bound"
            )
            return self.itemwise(index)
        except InfeasibleError:
            raise InfeasibleError(
                f"instance infeasible at scenario {self.scenario}, "
                f"trajectory {self.trajectories[index].label()}"
            ) from None
        return self._constant(index) - solution.objective

    def lotwise(self, index: int) -> float:
        r"""Every branch picks its own lot choice; no lot-type limit."""
        instance = self.instance
        profit = _mask_unusable(
            instance,
            lot_yields(instance, self.table[index]) - instance.handling_table,
        )
        mults = np.asarray(instance.multiplicities, dtype=float)
        problem = AdjustProblem(
            -profit,
            instance.lot_sizes[:, None] * mults[None, :],
            lower=instance.supply_lower,
            upper=instance.supply_cap,
        )
        try:
            solution = solve_relaxed(problem)
        except NonConvexError:
            logger.debug(
                f"Non-convex lot profits in scenario {self.scenario}; "
                "lotwise bound drops the supply range"
            )
            return self._constant(index) + float(profit.max(axis=(1, 2)).sum())
        except InfeasibleError:
            raise InfeasibleError(
                f"instance infeasible at scenario {self.scenario}, "
                f"trajectory {self.trajectories[index].label()}"
            ) from None
        return self._constant(index) - solution.objective

    def gamma(self, index: int) -> BoundEntry:
        candidates = [
            (self.itemwise(index), ITEMWISE),
            (self.itemwise_supply(index), ITEMWISE_SUPPLY),
            (self.lotwise(index), LOTWISE),
        ]
        value, provenance = min(candidates, key=lambda c: c[0])
        return BoundEntry(value=value, provenance=provenance)


def bound_itemwise(instance: Instance, scenario: int, trajectory: PriceTrajectory) -> float:
    return ScenarioBounds(instance, scenario, [trajectory]).itemwise(0)


def bound_itemwise_supply(
    instance: Instance, scenario: int, trajectory: PriceTrajectory
) -> float:
    return ScenarioBounds(instance, scenario, [trajectory]).itemwise_supply(0)


def bound_lotwise(instance: Instance, scenario: int, trajectory: PriceTrajectory) -> float:
    return ScenarioBounds(instance, scenario, [trajectory]).lotwise(0)


def gamma(instance: Instance, scenario: int, trajectory: PriceTrajectory) -> BoundEntry:
    r"""Smallest of the three combinatorial bounds for one ``(e, t)``."""
    return ScenarioBounds(instance, scenario, [trajectory]).gamma(0)


def exact_bound(
    instance: Instance,
    scenario: int,
    trajectory: PriceTrajectory,
    work_limit: int = 10_000,
) -> float:
    r"""Exact single-scenario optimum for a fixed trajectory."""
    values = scenario_lot_yields(instance, scenario, trajectory) - instance.handling_table
    coeffs = ProfitCoefficients(values=_mask_unusable(instance, values))
    result = solve_sop_exact(coeffs, instance, work_limit=work_limit)
    return result.value - markdown_cost(instance, trajectory)


def compute_bound_table(
    instance: Instance,
    trajectories: Optional[List[PriceTrajectory]] = None,
    workers: int = 1,
    progress: bool = False,
) -> BoundTable:
    r"""Compute ``Gamma(e, t)`` for every scenario and trajectory.

    Args:
        instance (Instance): The instance.
        trajectories (List[PriceTrajectory], optional): Trajectory set;
            defaults to every admissible trajectory. (default: :obj:`None`)
        workers (int): Threads, one scenario each. (default: :obj:`1`)
        progress (bool): Show a progress bar. (default: :obj:`False`)

    Returns:
        BoundTable: The filled table.
    """
    if trajectories is None:
        trajectories = enumerate_trajectories(
            instance.k_max, instance.p_max, instance.k_observ
        )
    table = BoundTable(trajectories, instance.num_scenarios)

    def fill(scenario: int) -> int:
        bounds = ScenarioBounds(instance, scenario, trajectories)
        for index in range(len(trajectories)):
            entry = bounds.gamma(index)
            table.update(scenario, index, entry.value, entry.provenance)
        return scenario

    ordered_map(
        fill,
        range(instance.num_scenarios),
        workers=workers,
        progress=progress,
        desc="bounds",
    )
    logger.info(
        f"Bound table: {len(table)} entries, dual bound "
        f"{table.dual_bound(instance.probabilities):.4f}"
    )
    return table
