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
from typing import TYPE_CHECKING, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from camel.logger import get_logger
from pydantic import BaseModel, ConfigDict

from .trajectory import (
    PriceTrajectory,
    ScenarioTrajectoryMap,
    enumerate_trajectories,
    select_best,
    trajectory_array,
)
from .utils.common import ordered_map

if TYPE_CHECKING:
    from .model import Instance

logger = get_logger(__name__)


def run_dynamics(
    initial_stock: np.ndarray, demand_path: np.ndarray
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    r"""Sell ``min(stock, demand)`` period after period.

    Args:
        initial_stock (np.ndarray): Stock before period 0, broadcastable
            against ``demand_path[k]``.
        demand_path (np.ndarray): Demand per period, leading axis = period.

    Returns:
        Tuple[np.ndarray, np.ndarray, np.ndarray]: Stock before each period,
            sales per period and the terminal stock.
    """
    shape = np.broadcast_shapes(np.shape(initial_stock), demand_path.shape[1:])
    stock = np.broadcast_to(np.asarray(initial_stock, dtype=float), shape).copy()
    stocks = np.empty((demand_path.shape[0],) + shape)
    sales = np.empty_like(stocks)
    for k in range(demand_path.shape[0]):
        stocks[k] = stock
        sales[k] = np.minimum(stock, demand_path[k])
        stock = stock - sales[k]
    return stocks, sales, stock


def demand_path(instance: "Instance", scenario: int, trajectory: PriceTrajectory) -> np.ndarray:
    r"""Demand ``(k_max + 1, B, S)`` along a trajectory in one scenario."""
    periods = np.arange(instance.k_max + 1)
    return instance.demand[scenario][periods, np.asarray(trajectory.prices)]


def markdown_cost(instance: "Instance", trajectory: PriceTrajectory) -> float:
    r"""Discounted mark-down cost ``sum_k exp(-rho k) gamma_k mkdn_k``."""
    flags = np.asarray(trajectory.markdown_flags, dtype=float)
    return float(
        (instance.discount_factors * instance.markdown_cost_array * flags).sum()
    )


class SimulationResult(BaseModel):
    r"""Per-period trace of one scenario under one trajectory.

    Arrays have a leading period axis of length ``k_max + 1`` followed by
    ``(B, S)``.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    scenario: int
    trajectory: PriceTrajectory
    stock: np.ndarray
    sales: np.ndarray
    yields: np.ndarray
    terminal_stock: np.ndarray
    markdown: Tuple[int, ...]
    value: float

    def to_frame(self, instance: "Instance") -> pd.DataFrame:
        periods, branches, sizes = np.indices(self.sales.shape)
        prices = np.asarray(self.trajectory.prices)[periods]
        return pd.DataFrame(
            {
                "scenario": self.scenario,
                "period": periods.ravel(),
                "branch": np.asarray(instance.branches)[branches.ravel()],
                "size": np.asarray(instance.sizes)[sizes.ravel()],
                "price_index": prices.ravel(),
                "stock": self.stock.ravel(),
                "sales": self.sales.ravel(),
                "yield": self.yields.ravel(),
            }
        )


def simulate_sales(
    supply: np.ndarray,
    scenario: int,
    trajectory: PriceTrajectory,
    instance: "Instance",
) -> SimulationResult:
    r"""Simulate the deterministic sales process of one scenario.

    Args:
        supply (np.ndarray): Initial stock per branch and size ``(B, S)``.
        scenario (int): Scenario index.
        trajectory (PriceTrajectory): Price index per period.
        instance (Instance): The instance.

    Returns:
        SimulationResult: Stock, sales and yields per period with the
            discounted value ``sum_k exp(-rho k) (yield_k - gamma_k mkdn_k)``.
    """
    if len(trajectory.prices) != instance.k_max + 1:
        raise ValueError(
            f"trajectory spans {len(trajectory.prices) - 1} periods, "
            f"instance has k_max={instance.k_max}"
        )
    path = demand_path(instance, scenario, trajectory)
    stocks, sales, terminal = run_dynamics(np.asarray(supply, dtype=float), path)
    prices = instance.price_array[np.asarray(trajectory.prices)]
    yields = sales * prices[:, None, None]
    value = float(
        (instance.discount_factors * yields.sum(axis=(1, 2))).sum()
    ) - markdown_cost(instance, trajectory)
    return SimulationResult(
        scenario=scenario,
        trajectory=trajectory,
        stock=stocks,
        sales=sales,
        yields=yields,
        terminal_stock=terminal,
        markdown=trajectory.markdown_flags,
        value=value,
    )


def branch_size_profit(
    instance: "Instance",
    scenario: int,
    trajectory: PriceTrajectory,
    branch: int,
    size: int,
    level: float,
) -> float:
    r"""Discounted yield of ``level`` pieces in one branch and size,
    without mark-down costs."""
    path = demand_path(instance, scenario, trajectory)[:, branch, size]
    _, sales, _ = run_dynamics(np.asarray(float(level)), path)
    prices = instance.price_array[np.asarray(trajectory.prices)]
    return float((instance.discount_factors * prices * sales).sum())


def yield_table(
    instance: "Instance",
    scenario: int,
    trajectories: Sequence[PriceTrajectory],
    max_level: Optional[int] = None,
) -> np.ndarray:
    r"""Discounted yield of every supply level in every cell.

    Args:
        instance (Instance): The instance.
        scenario (int): Scenario index.
        trajectories (Sequence[PriceTrajectory]): Trajectories to tabulate.
        max_level (int, optional): Largest supply level; defaults to the
            largest single-branch supply of any size. (default: :obj:`None`)

    Returns:
        np.ndarray: Shape ``(T, B, S, max_level + 1)``.
    """
    if max_level is None:
        max_level = instance.max_level
    paths = trajectory_array(trajectories)
    periods = np.arange(instance.k_max + 1)
    demand = instance.demand[scenario]
    weights = (
        instance.discount_factors[None, :] * instance.price_array[paths]
    )
    stock = np.broadcast_to(
        np.arange(max_level + 1, dtype=float),
        (len(paths), instance.num_branches, instance.num_sizes, max_level + 1),
    ).copy()
    table = np.zeros_like(stock)
    for k in periods:
        sold = np.minimum(stock, demand[k, paths[:, k]][..., None])
        table += weights[:, k, None, None, None] * sold
        stock -= sold
    return table


class PopSolution(BaseModel):
    r"""Best trajectory and value per scenario for a fixed supply."""

    model_config = ConfigDict(frozen=True)

    trajectory_map: ScenarioTrajectoryMap
    values: Tuple[float, ...]
    expected_value: float


def _scenario_values(
    supply: np.ndarray,
    instance: "Instance",
    scenario: int,
    trajectories: Sequence[PriceTrajectory],
) -> np.ndarray:
    paths = trajectory_array(trajectories)
    demand = instance.demand[scenario]
    stock = np.broadcast_to(
        np.asarray(supply, dtype=float), (len(paths),) + np.shape(supply)
    ).copy()
    values = np.zeros(len(paths))
    for k in range(instance.k_max + 1):
        sold = np.minimum(stock, demand[k, paths[:, k]])
        values += (
            instance.discount_factors[k]
            * instance.price_array[paths[:, k]]
            * sold.sum(axis=(1, 2))
        )
        stock -= sold
    flags = np.array([t.markdown_flags for t in trajectories], dtype=float)
    values -= (
        flags * (instance.discount_factors * instance.markdown_cost_array)
    ).sum(axis=1)
    return values


def solve_pop_exact(
    supply: np.ndarray,
    instance: "Instance",
    trajectories: Optional[List[PriceTrajectory]] = None,
    workers: int = 1,
) -> PopSolution:
    r"""Choose the best trajectory of every scenario for a fixed supply.

    Scenarios are independent once the supply is fixed and are evaluated
    concurrently; results are merged in scenario order.

    Args:
        supply (np.ndarray): Initial stock ``(B, S)``.
        instance (Instance): The instance.
        trajectories (List[PriceTrajectory], optional): Candidate set;
            defaults to every admissible trajectory. (default: :obj:`None`)
        workers (int): Worker threads. (default: :obj:`1`)

    Returns:
        PopSolution: Per-scenario optimum and the expected POP value.
    """
    if trajectories is None:
        trajectories = enumerate_trajectories(
            instance.k_max, instance.p_max, instance.k_observ
        )

    def solve(scenario: int) -> Tuple[PriceTrajectory, float]:
        values = _scenario_values(supply, instance, scenario, trajectories)
        best = select_best(values, trajectories)
        return trajectories[best], float(values[best])

    results = ordered_map(solve, range(instance.num_scenarios), workers=workers)
    values = tuple(value for _, value in results)
    expected = float(np.dot(instance.probabilities, values))
    return PopSolution(
        trajectory_map=ScenarioTrajectoryMap(
            trajectories=tuple(t for t, _ in results)
        ),
        values=values,
        expected_value=expected,
    )
