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
from itertools import product

import numpy as np
import pytest

from conftest import tiny_instances
from ispo.bnb import solve_ispo_exact
from ispo.bounds import (
    EXACT,
    ITEMWISE,
    LOTWISE,
    BoundTable,
    ScenarioBounds,
    bound_itemwise,
    bound_itemwise_supply,
    bound_lotwise,
    compute_bound_table,
    exact_bound,
    gamma,
)
from ispo.exceptions import InfeasibleError
from ispo.model import (
    LotAssignment,
    inventory_from_assignment,
    supply_cost,
    validate_instance,
)
from ispo.salesdyn import demand_path, markdown_cost, run_dynamics
from ispo.trajectory import PriceTrajectory, enumerate_trajectories


@pytest.mark.parametrize(
    "instance", tiny_instances(4), ids=[f"seed{seed}" for seed in range(4)]
)
def test_every_bound_dominates_the_exact_optimum(instance):
    trajectories = enumerate_trajectories(instance.k_max, instance.p_max)
    for e in range(instance.num_scenarios):
        bounds = ScenarioBounds(instance, e, trajectories)
        for index, trajectory in enumerate(trajectories):
            exact = exact_bound(instance, e, trajectory)
            tol = 1e-9 * max(1.0, abs(exact))
            assert bounds.itemwise(index) >= exact - tol
            assert bounds.itemwise_supply(index) >= exact - tol
            assert bounds.lotwise(index) >= exact - tol
            entry = bounds.gamma(index)
            assert entry.value == pytest.approx(
                min(
                    bounds.itemwise(index),
                    bounds.itemwise_supply(index),
                    bounds.lotwise(index),
                )
            )


def admissible_supplies(instance):
    choices = [
        (lot, multiplicity)
        for lot in instance.usable_lot_types
        for multiplicity in instance.multiplicities
    ]
    supplies, costs = [], []
    for combo in product(choices, repeat=instance.num_branches):
        assignment = LotAssignment(choices=combo)
        try:
            assignment.check(instance)
        except InfeasibleError:
            continue
        supplies.append(inventory_from_assignment(assignment, instance)[0])
        costs.append(supply_cost(assignment, instance))
    return np.array(supplies, dtype=float), np.array(costs)


def best_profit_per_trajectory(instance, scenario, trajectories, supplies, costs):
    r"""Best single-scenario profit of any admissible assignment, one value
    per trajectory, by simulating every assignment at once."""
    best = []
    for trajectory in trajectories:
        path = demand_path(instance, scenario, trajectory)
        _, sales, _ = run_dynamics(supplies, path)
        weights = instance.discount_factors * instance.price_array[
            np.asarray(trajectory.prices)
        ]
        revenue = np.einsum("k,knbs->n", weights, sales)
        best.append(
            float((revenue - costs).max()) - markdown_cost(instance, trajectory)
        )
    return best


@pytest.mark.slow
def test_bounds_dominate_every_assignment_on_random_instances():
    for instance in tiny_instances(200):
        supplies, costs = admissible_supplies(instance)
        assert len(supplies) > 0
        trajectories = enumerate_trajectories(instance.k_max, instance.p_max)
        for e in range(instance.num_scenarios):
            bounds = ScenarioBounds(instance, e, trajectories)
            optima = best_profit_per_trajectory(
                instance, e, trajectories, supplies, costs
            )
            for index, optimum in enumerate(optima):
                tol = 1e-9 * max(1.0, abs(optimum))
                assert bounds.itemwise(index) >= optimum - tol
                assert bounds.itemwise_supply(index) >= optimum - tol
                assert bounds.itemwise_supply(index) <= bounds.itemwise(index) + tol
                assert bounds.lotwise(index) >= optimum - tol
                assert bounds.gamma(index).value >= optimum - tol


def test_single_trajectory_helpers_agree(tiny1):
    trajectory = PriceTrajectory(prices=(0, 0, 1, 1, 2))
    bounds = ScenarioBounds(tiny1, 1, [trajectory])
    assert bound_itemwise(tiny1, 1, trajectory) == pytest.approx(bounds.itemwise(0))
    assert bound_itemwise_supply(tiny1, 1, trajectory) == pytest.approx(
        bounds.itemwise_supply(0)
    )
    assert bound_lotwise(tiny1, 1, trajectory) == pytest.approx(bounds.lotwise(0))
    assert gamma(tiny1, 1, trajectory) == bounds.gamma(0)


def test_bound_table_keeps_the_minimum():
    trajectories = enumerate_trajectories(3, 2)
    table = BoundTable(trajectories, 1)
    table.update(0, 0, 10.0, ITEMWISE)
    assert table.update(0, 0, 12.0, LOTWISE).provenance == ITEMWISE
    assert table.update(0, 0, 7.5, EXACT).value == 7.5
    assert table.entry(0, 0).provenance == EXACT
    assert len(table) == 1


def test_bound_table_dual_and_frame():
    trajectories = enumerate_trajectories(3, 2)
    table = BoundTable(trajectories, 2)
    for e in range(2):
        for t in range(len(trajectories)):
            table.update(e, t, float(10 * e + t), ITEMWISE)
    assert table.best(0) == len(trajectories) - 1
    np.testing.assert_array_equal(table.values(1), 10.0 + np.arange(len(trajectories)))
    expected = 0.25 * (len(trajectories) - 1) + 0.75 * (10 + len(trajectories) - 1)
    assert table.dual_bound((0.25, 0.75)) == pytest.approx(expected)
    frame = table.to_frame()
    assert list(frame.columns) == ["scenario", "trajectory", "prices", "bound", "provenance"]
    assert len(frame) == 2 * len(trajectories)


def test_bound_table_size_and_dual(tiny1):
    table = compute_bound_table(tiny1, workers=2)
    trajectories = enumerate_trajectories(tiny1.k_max, tiny1.p_max, tiny1.k_observ)
    assert len(table) == tiny1.num_scenarios * len(trajectories)
    optimum = solve_ispo_exact(tiny1).objective
    assert table.dual_bound(tiny1.probabilities) >= optimum - 1e-9


def test_compute_bound_table_is_deterministic(tiny1):
    first = compute_bound_table(tiny1).to_frame()
    second = compute_bound_table(tiny1, workers=2).to_frame()
    assert first.equals(second)


def test_infeasible_supply_range(tiny_document):
    tiny_document["supply_bounds"] = [1000, 2000]
    instance = validate_instance(tiny_document)
    trajectory = PriceTrajectory(prices=(0, 0, 1, 1, 2))
    with pytest.raises(InfeasibleError):
        gamma(instance, 0, trajectory)


@pytest.fixture
def free_document(tiny_document):
    tiny_document["costs"]["markdown"] = 0.0
    tiny_document["costs"]["handling"] = {"acquisition_per_item": 0.0, "pick_cost": 0.0}
    return tiny_document


def test_zero_demand_bounds_equal_first_opening_cost(free_document):
    for scenario in free_document["scenarios"]:
        scenario["demand"] = np.zeros((5, 3, 4, 2)).tolist()
    free_document["supply_bounds"] = [0, "inf"]
    instance = validate_instance(free_document)
    kappa = instance.opening_costs[0]
    for trajectory in enumerate_trajectories(instance.k_max, instance.p_max):
        assert bound_itemwise(instance, 0, trajectory) == pytest.approx(-kappa)
        assert bound_itemwise_supply(instance, 0, trajectory) == pytest.approx(-kappa)
        assert bound_lotwise(instance, 1, trajectory) == pytest.approx(-kappa)
        assert gamma(instance, 1, trajectory).value == pytest.approx(-kappa)


def test_no_supply_allowed_bounds_equal_first_opening_cost(free_document):
    free_document["supply_bounds"] = [0, 0]
    instance = validate_instance(free_document)
    trajectory = PriceTrajectory(prices=(0, 0, 1, 1, 2))
    for e in range(instance.num_scenarios):
        assert bound_itemwise_supply(instance, e, trajectory) == pytest.approx(
            -instance.opening_costs[0]
        )


def test_open_supply_range_matches_itemwise(tiny_document):
    tiny_document["supply_bounds"] = [0, "inf"]
    instance = validate_instance(tiny_document)
    trajectories = enumerate_trajectories(instance.k_max, instance.p_max)
    for e in range(instance.num_scenarios):
        bounds = ScenarioBounds(instance, e, trajectories)
        for index in range(len(trajectories)):
            assert bounds.itemwise_supply(index) == pytest.approx(
                bounds.itemwise(index), rel=1e-9, abs=1e-9
            )
