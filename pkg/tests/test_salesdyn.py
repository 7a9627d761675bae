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
import numpy as np
import pytest

from ispo.model import GeneratorConfig, generate_instance, validate_instance
from ispo.salesdyn import (
    branch_size_profit,
    markdown_cost,
    run_dynamics,
    simulate_sales,
    solve_pop_exact,
    yield_table,
)
from ispo.trajectory import PriceTrajectory, enumerate_trajectories


def test_run_dynamics_example():
    stocks, sales, terminal = run_dynamics(
        np.array(5.0), np.array([2.0, 4.0, 3.0])
    )
    np.testing.assert_array_equal(stocks, [5.0, 3.0, 0.0])
    np.testing.assert_array_equal(sales, [2.0, 3.0, 0.0])
    assert terminal == 0.0


def test_run_dynamics_broadcasts_stock():
    demand = np.full((3, 2, 2), 1.5)
    stocks, sales, terminal = run_dynamics(np.array([[4.0, 1.0], [0.0, 2.0]]), demand)
    assert stocks.shape == (3, 2, 2)
    np.testing.assert_allclose(sales.sum(axis=0), [[4.0, 1.0], [0.0, 2.0]])
    np.testing.assert_allclose(terminal, 0.0)


def test_simulation_conserves_stock(tiny1):
    supply = np.array([[1, 2], [3, 0], [2, 2], [0, 1]])
    for e in range(tiny1.num_scenarios):
        for trajectory in enumerate_trajectories(tiny1.k_max, tiny1.p_max):
            result = simulate_sales(supply, e, trajectory, tiny1)
            assert (result.sales >= 0).all()
            assert (result.sales <= result.stock + 1e-12).all()
            np.testing.assert_allclose(
                result.sales.sum(axis=0) + result.terminal_stock, supply
            )
            # unbounded salvage demand clears the remaining stock
            np.testing.assert_allclose(result.terminal_stock, 0.0)


def test_simulation_rejects_short_trajectory(tiny1):
    with pytest.raises(ValueError, match="k_max=4"):
        simulate_sales(
            np.ones((4, 2)), 0, PriceTrajectory(prices=(0, 0, 1, 2)), tiny1
        )


def test_simulation_frame(tiny1):
    trajectory = PriceTrajectory(prices=(0, 0, 1, 1, 2))
    result = simulate_sales(np.ones((4, 2)), 1, trajectory, tiny1)
    frame = result.to_frame(tiny1)
    assert len(frame) == 5 * 4 * 2
    assert frame["sales"].sum() == pytest.approx(8.0)
    assert set(frame["price_index"]) == {0, 1, 2}


def test_markdown_cost_is_charged(tiny_document):
    tiny_document["costs"]["markdown"] = 1.5
    tiny_document["costs"]["discount_rate"] = 0.0
    instance = validate_instance(tiny_document)
    trajectory = PriceTrajectory(prices=(0, 1, 1, 1, 2))
    assert markdown_cost(instance, trajectory) == pytest.approx(3.0)
    supply = np.ones((4, 2))
    charged = simulate_sales(supply, 0, trajectory, instance)
    assert charged.value == pytest.approx(charged.yields.sum() - 3.0)


def test_yield_table_matches_single_cell(tiny1):
    trajectories = enumerate_trajectories(tiny1.k_max, tiny1.p_max)
    table = yield_table(tiny1, 1, trajectories)
    assert table.shape == (len(trajectories), 4, 2, tiny1.max_level + 1)
    for t, trajectory in enumerate(trajectories):
        for level in range(tiny1.max_level + 1):
            expected = branch_size_profit(tiny1, 1, trajectory, 2, 1, level)
            assert table[t, 2, 1, level] == pytest.approx(expected)
    assert (table[:, :, :, 0] == 0).all()
    assert (np.diff(table, axis=-1) >= -1e-12).all()


def test_pop_picks_the_best_simulated_trajectory(tiny1):
    supply = np.array([[1, 1], [2, 2], [1, 0], [3, 1]])
    solution = solve_pop_exact(supply, tiny1)
    trajectories = enumerate_trajectories(tiny1.k_max, tiny1.p_max)
    for e in range(tiny1.num_scenarios):
        best = max(simulate_sales(supply, e, t, tiny1).value for t in trajectories)
        assert solution.values[e] == pytest.approx(best)
        chosen = simulate_sales(supply, e, solution.trajectory_map.trajectories[e], tiny1)
        assert chosen.value == pytest.approx(best)
    assert solution.expected_value == pytest.approx(
        np.dot(tiny1.probabilities, solution.values)
    )


def test_pop_with_workers_is_deterministic():
    instance = generate_instance(GeneratorConfig(scenario_multipliers=(0.5, 1.0, 1.5)), 3)
    supply = np.full((4, 2), 2)
    assert solve_pop_exact(supply, instance, workers=3) == solve_pop_exact(supply, instance)


@pytest.fixture
def single_cell():
    demand = [[[[1.0]], [[2.0]], [[3.0]]] for _ in range(4)]
    demand[3][2] = [["inf"]]
    return validate_instance(
        {
            "branches": ["b0"],
            "sizes": ["M"],
            "lot_types": [[1]],
            "multiplicities": [1],
            "max_lot_types": 1,
            "supply_bounds": [0, "inf"],
            "periods": {"k_max": 3, "k_observ": 1},
            "prices": [10.0, 7.0, 4.0],
            "scenarios": [{"prob": 1.0, "demand": demand}],
            "costs": {
                "handling": {"acquisition_per_item": 0.0, "pick_cost": 0.0},
                "opening": [0.0],
                "markdown": 0.0,
                "discount_rate": 0.0,
            },
        }
    )


def test_single_cell_season(single_cell):
    trajectory = PriceTrajectory(prices=(0, 0, 1, 2))
    result = simulate_sales(np.array([[5.0]]), 0, trajectory, single_cell)
    np.testing.assert_allclose(result.sales[:, 0, 0], [1.0, 1.0, 2.0, 1.0])
    np.testing.assert_allclose(result.stock[:, 0, 0], [5.0, 4.0, 3.0, 1.0])
    assert result.value == pytest.approx(38.0)
    assert result.markdown == (0, 0, 1, 1)


def test_single_cell_pop_is_the_best_of_three(single_cell):
    trajectories = enumerate_trajectories(3, 2)
    assert len(trajectories) == 3
    supply = np.array([[5.0]])
    values = [simulate_sales(supply, 0, t, single_cell).value for t in trajectories]
    solution = solve_pop_exact(supply, single_cell)
    assert solution.values[0] == pytest.approx(max(values))
    assert solution.values[0] == pytest.approx(38.0)


def test_single_cell_profit_by_level(single_cell):
    trajectory = PriceTrajectory(prices=(0, 0, 1, 2))
    profits = [
        branch_size_profit(single_cell, 0, trajectory, 0, 0, level) for level in range(9)
    ]
    assert profits[0] == 0.0
    assert profits[3] == pytest.approx(27.0)
    assert profits[5] == pytest.approx(38.0)
    assert all(b >= a for a, b in zip(profits, profits[1:]))


def test_zero_supply_earns_nothing(tiny_document):
    tiny_document["costs"]["markdown"] = 0.0
    instance = validate_instance(tiny_document)
    for trajectory in enumerate_trajectories(instance.k_max, instance.p_max):
        result = simulate_sales(np.zeros((4, 2)), 1, trajectory, instance)
        assert (result.sales == 0).all()
        assert result.value == pytest.approx(0.0)


@pytest.fixture
def no_demand_document(tiny_document):
    for scenario in tiny_document["scenarios"]:
        scenario["demand"] = np.zeros((5, 3, 4, 2)).tolist()
    return tiny_document


def test_zero_demand_keeps_stock(no_demand_document):
    no_demand_document["costs"]["markdown"] = 1.25
    instance = validate_instance(no_demand_document)
    supply = np.full((4, 2), 3.0)
    for trajectory in enumerate_trajectories(instance.k_max, instance.p_max):
        result = simulate_sales(supply, 0, trajectory, instance)
        assert (result.sales == 0).all()
        np.testing.assert_array_equal(result.terminal_stock, supply)
        assert result.value == pytest.approx(-markdown_cost(instance, trajectory))


def test_zero_demand_prefers_no_early_markdown(no_demand_document):
    no_demand_document["costs"]["markdown"] = 0.0
    instance = validate_instance(no_demand_document)
    solution = solve_pop_exact(np.full((4, 2), 3.0), instance)
    assert solution.values == pytest.approx((0.0, 0.0))
    for trajectory in solution.trajectory_map.trajectories:
        assert trajectory.prices == (0, 0, 0, 0, 2)


def test_value_is_the_sum_of_cell_profits(tiny1):
    supply = np.array([[1, 2], [3, 0], [2, 2], [0, 1]])
    for e in range(tiny1.num_scenarios):
        for trajectory in enumerate_trajectories(tiny1.k_max, tiny1.p_max):
            cells = sum(
                branch_size_profit(tiny1, e, trajectory, b, s, supply[b, s])
                for b in range(4)
                for s in range(2)
            )
            result = simulate_sales(supply, e, trajectory, tiny1)
            assert result.value == pytest.approx(
                cells - markdown_cost(tiny1, trajectory)
            )


def test_value_grows_with_every_supply_entry(tiny1):
    rng = np.random.default_rng(5)
    trajectories = enumerate_trajectories(tiny1.k_max, tiny1.p_max)
    for _ in range(20):
        supply = rng.integers(0, 4, size=(4, 2)).astype(float)
        b, s = rng.integers(4), rng.integers(2)
        more = supply.copy()
        more[b, s] += 1
        e = int(rng.integers(2))
        for trajectory in trajectories:
            before = simulate_sales(supply, e, trajectory, tiny1).value
            after = simulate_sales(more, e, trajectory, tiny1).value
            assert after >= before - 1e-12
