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
import json

import numpy as np
import pandas as pd
import pytest

from ispo.exceptions import InfeasibleError, InstanceValidationError
from ispo.model import (
    GeneratorConfig,
    LotAssignment,
    dump_instance,
    dumps_instance,
    generate_instance,
    inventory_from_assignment,
    ispo_objective,
    load_instance,
    supply_cost,
    validate_instance,
)
from ispo.salesdyn import simulate_sales
from ispo.trajectory import PriceTrajectory, ScenarioTrajectoryMap


def unit_assignment(instance, multiplicity=1):
    return LotAssignment(choices=tuple((0, multiplicity) for _ in instance.branches))


def test_generated_instance_dimensions(tiny1):
    assert tiny1.num_branches == 4
    assert tiny1.num_sizes == 2
    assert tiny1.num_lot_types == 4
    assert tiny1.num_scenarios == 2
    assert tiny1.demand.shape == (2, 5, 3, 4, 2)
    assert tiny1.handling_table.shape == (4, 4, 2)
    assert tiny1.lot_types[0].counts == (1, 1)
    assert np.isinf(tiny1.demand[:, 4, 2]).all()
    assert np.isfinite(tiny1.demand[:, :4]).all()


def test_generation_is_reproducible():
    config = GeneratorConfig.tiny()
    assert generate_instance(config, 7) == generate_instance(config, 7)
    assert generate_instance(config, 7) != generate_instance(config, 8)


def test_desk_preset():
    instance = generate_instance(GeneratorConfig.desk(), 0)
    assert instance.num_branches == 30
    assert instance.num_lot_types == 20
    assert instance.max_lot_types == 4
    assert instance.k_max == 13
    assert instance.p_max == 4
    assert instance.num_scenarios == 3


def test_json_round_trip(tiny1, tmp_path):
    assert validate_instance(json.loads(dumps_instance(tiny1))) == tiny1
    path = tmp_path / "tiny1.json"
    dump_instance(tiny1, path)
    assert load_instance(path) == tiny1


def test_money_values_are_quantized(tiny_document):
    tiny_document["prices"] = [10.123456, 7.0, 3.0]
    tiny_document["costs"]["opening"] = [2.00004, 1.0]
    instance = validate_instance(tiny_document)
    assert instance.prices[0] == 10.1235
    assert instance.opening_costs[0] == 2.0


def test_parametric_handling(tiny1):
    form = tiny1.handling_form
    assert form is not None
    lot = 1
    size = int(tiny1.lot_sizes[lot])
    expected = form.acquisition_per_item * 2 * size + form.pick_cost * 2
    assert tiny1.handling_cost(3, lot, 2) == pytest.approx(expected)


@pytest.mark.parametrize(
    "mutate, invariant, fragment",
    [
        (lambda d: d["prices"].__setitem__(1, 12.0), "prices", "not strictly decreasing"),
        (
            lambda d: d["scenarios"][0].__setitem__("prob", 0.6),
            "probabilities",
            "probabilities sum 1.1",
        ),
        (lambda d: d["lot_types"].append([0, 0]), "lot-types", "has no pieces"),
        (lambda d: d["costs"].__setitem__("opening", [1.0]), "opening-costs", "expected 2"),
        (lambda d: d.__setitem__("extra", 1), "schema", "extra"),
        (lambda d: d.__setitem__("supply_bounds", [10, 5]), "supply-bounds", "not ordered"),
        (lambda d: d["periods"].__setitem__("k_observ", 4), "periods", "k_observ"),
    ],
)
def test_validation_names_first_invariant(tiny_document, mutate, invariant, fragment):
    mutate(tiny_document)
    with pytest.raises(InstanceValidationError) as info:
        validate_instance(tiny_document)
    assert info.value.invariant == invariant
    assert fragment in str(info.value)


def test_unbounded_demand_only_at_salvage(tiny_document):
    tiny_document["scenarios"][0]["demand"][1][0][0][0] = "inf"
    with pytest.raises(InstanceValidationError) as info:
        validate_instance(tiny_document)
    assert info.value.invariant == "demand"


def test_full_size_run_restricts_lot_types(tiny_document):
    tiny_document["lot_types"] = [[1, 1], [2, 0], [0, 3], [2, 1]]
    tiny_document["require_full_size_run"] = True
    instance = validate_instance(tiny_document)
    assert instance.usable_lot_types == (0, 3)
    tiny_document["lot_types"] = [[1, 0], [0, 1], [2, 0], [0, 3]]
    with pytest.raises(InstanceValidationError):
        validate_instance(tiny_document)


def test_with_probabilities(tiny1):
    skewed = tiny1.with_probabilities((0.25, 0.75))
    assert skewed.probabilities == (0.25, 0.75)
    np.testing.assert_array_equal(skewed.demand, tiny1.demand)
    with pytest.raises(InstanceValidationError):
        tiny1.with_probabilities((0.5, 0.6))


def test_mean_demand(tiny1):
    mean = tiny1.mean_demand()
    expected = 0.5 * tiny1.demand[0, 1] + 0.5 * tiny1.demand[1, 1]
    np.testing.assert_allclose(mean[1], expected)
    assert np.isinf(mean[tiny1.k_max, tiny1.p_max]).all()


def test_inventory_from_assignment(tiny1):
    supply, total = inventory_from_assignment(unit_assignment(tiny1, 2), tiny1)
    assert supply.shape == (4, 2)
    assert (supply == 2).all()
    assert total == 16


def test_assignment_check(tiny1):
    unit_assignment(tiny1).check(tiny1)
    spread = LotAssignment(choices=((0, 1), (1, 1), (2, 1), (0, 1)))
    with pytest.raises(InfeasibleError):
        spread.check(tiny1)
    with pytest.raises(ValueError):
        LotAssignment(choices=((0, 3),) * 4).check(tiny1)
    with pytest.raises(InfeasibleError, match="total supply 16"):
        unit_assignment(tiny1, 2).check(tiny1)


def test_assignment_frame_round_trip(tiny1):
    assignment = LotAssignment(choices=((0, 1), (1, 2), (0, 2), (1, 1)))
    frame = assignment.to_frame(tiny1)
    assert list(frame.columns) == ["branch", "lot_type", "multiplicity", "notation"]
    assert frame.loc[1, "notation"] == tiny1.lot_types[1].notation(2)
    restored = LotAssignment.from_frame(pd.DataFrame(frame), tiny1)
    assert restored == assignment


def test_objective_matches_simulation(tiny1):
    assignment = unit_assignment(tiny1)
    trajectory = PriceTrajectory(prices=(0, 0, 1, 1, 2))
    trajectory_map = ScenarioTrajectoryMap(trajectories=(trajectory, trajectory))
    supply, _ = inventory_from_assignment(assignment, tiny1)
    expected = sum(
        prob * simulate_sales(supply, e, trajectory, tiny1).value
        for e, prob in enumerate(tiny1.probabilities)
    ) - supply_cost(assignment, tiny1)
    assert ispo_objective(assignment, trajectory_map, tiny1) == pytest.approx(expected)


def test_objective_rejects_infeasible_assignment(tiny1):
    trajectory = PriceTrajectory(prices=(0, 0, 1, 1, 2))
    trajectory_map = ScenarioTrajectoryMap(trajectories=(trajectory, trajectory))
    with pytest.raises(InfeasibleError, match="total supply 16"):
        ispo_objective(unit_assignment(tiny1, 2), trajectory_map, tiny1)
    spread = LotAssignment(choices=((0, 1), (1, 1), (2, 1), (0, 1)))
    with pytest.raises(InfeasibleError, match="3 lot-types used"):
        ispo_objective(spread, trajectory_map, tiny1)


@pytest.mark.parametrize(
    "trajectories, fragment",
    [
        (((0, 0, 1, 1, 2),), "covers 1 scenarios"),
        (((0, 0, 1, 2), (0, 0, 1, 2)), "k_max=4"),
        (((0, 0, 1, 1, 3), (0, 0, 1, 1, 2)), "salvage index is 2"),
    ],
    ids=["scenario-count", "horizon", "salvage"],
)
def test_objective_rejects_mismatched_map(tiny1, trajectories, fragment):
    trajectory_map = ScenarioTrajectoryMap(
        trajectories=tuple(PriceTrajectory(prices=p) for p in trajectories)
    )
    with pytest.raises(ValueError, match=fragment):
        ispo_objective(unit_assignment(tiny1), trajectory_map, tiny1)


def test_explicit_handling_follows_document_multiplicity_order(tiny_document):
    def cost(branch, lot, multiplicity):
        return 10.0 * multiplicity + lot + 0.5 * branch

    tiny_document["multiplicities"] = [2, 1]
    tiny_document["costs"]["handling"] = [
        [[cost(b, l, m) for m in (2, 1)] for l in range(4)] for b in range(4)
    ]
    instance = validate_instance(tiny_document)
    assert instance.multiplicities == (1, 2)
    for b in range(4):
        for l in range(4):
            for m in (1, 2):
                assert instance.handling_cost(b, l, m) == cost(b, l, m)

    document = instance.to_document()
    assert document["multiplicities"] == [1, 2]
    assert document["costs"]["handling"][3][2] == [cost(3, 2, 1), cost(3, 2, 2)]
    assert validate_instance(json.loads(json.dumps(document))) == instance


def test_zero_demand_objective_is_the_supply_cost(tiny_document):
    for scenario in tiny_document["scenarios"]:
        scenario["demand"] = np.zeros((5, 3, 4, 2)).tolist()
    tiny_document["costs"]["markdown"] = 0.0
    instance = validate_instance(tiny_document)
    assignment = unit_assignment(instance)
    trajectory = PriceTrajectory(prices=(0, 0, 1, 1, 2))
    trajectory_map = ScenarioTrajectoryMap(trajectories=(trajectory, trajectory))
    assert ispo_objective(assignment, trajectory_map, instance) == pytest.approx(
        -supply_cost(assignment, instance)
    )
