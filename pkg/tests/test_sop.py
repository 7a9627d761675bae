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
from itertools import combinations, product
from math import comb

import numpy as np
import pytest

from conftest import tiny_instances
from ispo.exceptions import InfeasibleError, WorkLimitExceeded
from ispo.model import LotAssignment, inventory_from_assignment, validate_instance
from ispo.sop import (
    ProfitCoefficients,
    SfaParams,
    _best_first_subsets,
    distance_coefficients,
    exact_work,
    lot_type_scores,
    modified_costs,
    sfa_heuristic,
    solve_sop_exact,
)
from ispo.trajectory import PriceTrajectory, ScenarioTrajectoryMap


def enumerate_sop(coeffs, instance):
    best = None
    mults = instance.multiplicities
    choices = [(l, mi) for l in instance.usable_lot_types for mi in range(len(mults))]
    for combo in product(choices, repeat=instance.num_branches):
        assignment = LotAssignment(choices=tuple((l, mults[mi]) for l, mi in combo))
        used = len(assignment.lot_types_used())
        _, total = inventory_from_assignment(assignment, instance)
        if used > instance.max_lot_types:
            continue
        if total < instance.supply_lower or total > instance.supply_cap:
            continue
        value = sum(coeffs.values[b, l, mi] for b, (l, mi) in enumerate(combo))
        if coeffs.charge_opening:
            value -= instance.opening_total(used)
        if best is None or value > best:
            best = value
    return best


def late_markdown_map(instance):
    trajectory = PriceTrajectory(prices=(0,) * instance.k_max + (instance.p_max,))
    return ScenarioTrajectoryMap(trajectories=(trajectory,) * instance.num_scenarios)


@pytest.mark.parametrize(
    "instance", tiny_instances(5), ids=[f"seed{seed}" for seed in range(5)]
)
def test_exact_sop_matches_enumeration(instance):
    coeffs = modified_costs(instance, late_markdown_map(instance))
    result = solve_sop_exact(coeffs, instance)
    assert result.value == pytest.approx(enumerate_sop(coeffs, instance))
    result.assignment.check(instance)
    assert result.subsets_evaluated == exact_work(instance)


def test_exact_sop_without_opening_charge(tiny1):
    coeffs = distance_coefficients(tiny1)
    result = solve_sop_exact(coeffs, tiny1, workers=2)
    assert result.value == pytest.approx(enumerate_sop(coeffs, tiny1))


@pytest.mark.parametrize(
    "instance", tiny_instances(5), ids=[f"seed{seed}" for seed in range(5)]
)
def test_sfa_is_feasible_and_below_exact(instance):
    coeffs = modified_costs(instance, late_markdown_map(instance))
    exact = solve_sop_exact(coeffs, instance)
    heuristic = sfa_heuristic(coeffs, instance)
    heuristic.assignment.check(instance)
    assert heuristic.value <= exact.value + 1e-9
    assert heuristic.subsets_evaluated <= exact_work(instance)


def test_sfa_respects_subset_budget(tiny1):
    coeffs = modified_costs(tiny1, late_markdown_map(tiny1))
    result = sfa_heuristic(coeffs, tiny1, SfaParams(subset_budget=1))
    assert result.subsets_evaluated == tiny1.max_lot_types


def test_work_limit(tiny1):
    coeffs = distance_coefficients(tiny1)
    assert exact_work(tiny1) == comb(4, 1) + comb(4, 2)
    with pytest.raises(WorkLimitExceeded) as info:
        solve_sop_exact(coeffs, tiny1, work_limit=5)
    assert info.value.work == 10
    assert info.value.limit == 5


def test_infeasible_supply(tiny_document):
    tiny_document["supply_bounds"] = [1000, 2000]
    instance = validate_instance(tiny_document)
    coeffs = distance_coefficients(instance)
    with pytest.raises(InfeasibleError):
        solve_sop_exact(coeffs, instance)
    with pytest.raises(InfeasibleError):
        sfa_heuristic(coeffs, instance)


def test_best_first_subsets_order():
    scores = np.array([5.0, 9.0, 1.0, 7.0, 3.0])
    order = [1, 3, 0, 4, 2]
    subsets = list(_best_first_subsets(order, scores, 2))
    assert len(subsets) == comb(5, 2)
    assert len(set(subsets)) == len(subsets)
    totals = [scores[list(s)].sum() for s in subsets]
    assert totals == sorted(totals, reverse=True)
    assert subsets[0] == (1, 3)
    assert set(subsets) == set(combinations(range(5), 2))
    assert list(_best_first_subsets(order, scores, 6)) == []


def test_lot_type_scores(tiny1):
    values = np.array(
        [[4.0, 3.0, 2.0, 1.0], [1.0, 4.0, 3.0, 2.0], [4.0, 3.0, 2.0, 1.0], [1.0, 2.0, 3.0, 4.0]]
    )[:, :, None]
    coeffs = ProfitCoefficients(values=np.repeat(values, 2, axis=2))
    scores = lot_type_scores(coeffs, tiny1, (100, 10, 1))
    np.testing.assert_array_equal(scores, [200, 121, 22, 101])


def test_distance_coefficients(tiny1):
    coeffs = distance_coefficients(tiny1)
    assert not coeffs.charge_opening
    assert (coeffs.values <= 0).all()
    forecast = tiny1.mean_demand()[: tiny1.k_max, 0].sum(axis=0)
    lot = np.asarray(tiny1.lot_types[2].counts)
    expected = -np.abs(2 * lot - forecast[1]).sum()
    assert coeffs.values[1, 2, 1] == pytest.approx(expected)
