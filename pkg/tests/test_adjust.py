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
import math
from itertools import product

import numpy as np
import pytest

from ispo.adjust import AdjustProblem, local_optima, solve_integral, solve_relaxed
from ispo.exceptions import InfeasibleError, NonConvexError, WorkLimitExceeded


def brute_force(problem):
    best = math.inf
    V, A, L = problem.cost.shape
    for picks in product(product(range(A), range(L)), repeat=V):
        cost = sum(problem.cost[v, a, b] for v, (a, b) in enumerate(picks))
        used = sum(problem.resource[a, b] for a, b in picks)
        if problem.lower - 1e-9 <= used <= problem.upper + 1e-9 and cost < best:
            best = cost
    return best


def random_problem(rng, convex=True, entities=3, alts=2, levels=3):
    if convex:
        slopes = np.sort(rng.uniform(-5, 5, size=(entities, alts, levels)), axis=-1)
        cost = np.cumsum(slopes, axis=-1)
    else:
        cost = rng.uniform(-5, 5, size=(entities, alts, levels))
    resource = np.arange(1, alts + 1)[:, None] * np.arange(1, levels + 1)[None, :]
    total_min = entities * resource.min()
    total_max = entities * resource.max()
    lower = int(rng.integers(total_min, total_max + 1))
    upper = min(total_max, lower + int(rng.integers(1, 4)))
    return AdjustProblem(cost, resource, lower=lower, upper=upper)


@pytest.mark.parametrize("seed", range(25))
def test_relaxed_bounds_integral_on_convex_costs(seed):
    problem = random_problem(np.random.default_rng(seed))
    assert problem.convex
    relaxed = solve_relaxed(problem)
    integral = solve_integral(problem)
    assert relaxed.fractional_count <= 2
    assert problem.lower - 1e-9 <= relaxed.resource <= problem.upper + 1e-9
    assert relaxed.objective <= integral.objective + 1e-9
    assert integral.objective == pytest.approx(brute_force(problem))
    assert integral.is_integral
    assert problem.lower - 1e-9 <= integral.resource <= problem.upper + 1e-9


@pytest.mark.parametrize("seed", range(25))
def test_integral_on_nonconvex_costs(seed):
    problem = random_problem(np.random.default_rng(100 + seed), convex=False)
    integral = solve_integral(problem)
    assert integral.objective == pytest.approx(brute_force(problem))


def test_relaxed_rejects_nonconvex_costs():
    cost = np.array([[[0.0, -3.0, 1.0, -4.0]]])
    problem = AdjustProblem(cost, np.array([[0.0, 1.0, 2.0, 3.0]]))
    assert not problem.convex
    with pytest.raises(NonConvexError):
        solve_relaxed(problem)


def test_gap_in_finite_levels_is_nonconvex():
    cost = np.array([[[0.0, np.inf, 1.0]]])
    assert not AdjustProblem(cost, np.array([[0.0, 1.0, 2.0]])).convex


def test_infeasible_range():
    cost = np.zeros((2, 1, 2))
    problem = AdjustProblem(cost, np.array([[1.0, 2.0]]), lower=5, upper=6)
    with pytest.raises(InfeasibleError):
        solve_relaxed(problem)
    with pytest.raises(InfeasibleError):
        solve_integral(problem)


def test_infinite_entries_are_never_chosen():
    cost = np.array(
        [
            [[np.inf, np.inf], [2.0, 3.0]],
            [[1.0, 4.0], [np.inf, np.inf]],
        ]
    )
    resource = np.array([[1.0, 2.0], [1.0, 2.0]])
    problem = AdjustProblem(cost, resource, lower=3, upper=3)
    solution = solve_integral(problem)
    assert solution.integral_choices() == ((1, 1), (0, 0))
    assert solution.objective == pytest.approx(4.0)


def test_exact_fit_needs_no_exchange():
    cost = np.array([[[3.0, 1.0, 2.0]], [[0.0, 2.0, 5.0]]])
    problem = AdjustProblem(cost, np.array([[0.0, 1.0, 2.0]]), lower=0, upper=4)
    solution = solve_relaxed(problem)
    assert solution.exchanges == 0
    assert solution.integral_choices() == ((0, 1), (0, 0))


def test_fractional_split_hits_the_bound():
    cost = np.array([[[0.0, 1.0, 4.0]], [[0.0, 2.0, 6.0]]])
    problem = AdjustProblem(cost, np.array([[0.0, 2.0, 4.0]]), lower=3, upper=10)
    solution = solve_relaxed(problem)
    assert solution.resource == pytest.approx(3.0)
    assert solution.fractional_count == 2
    assert solution.objective == pytest.approx(2.0)
    with pytest.raises(ValueError):
        solution.integral_choices()
    assert solve_integral(problem).objective == pytest.approx(3.0)


def test_node_limit():
    cost = np.array([[[0.0, 1.0, 4.0]], [[0.0, 2.0, 6.0]]])
    problem = AdjustProblem(cost, np.array([[0.0, 2.0, 4.0]]), lower=3, upper=10)
    with pytest.raises(WorkLimitExceeded) as info:
        solve_integral(problem, node_limit=1)
    assert info.value.limit == 1


def test_local_optima():
    cost = np.array(
        [
            [[4.0, 2.0, 1.0, 3.0], [5.0, 1.0, 2.0, 6.0]],
            [[np.inf] * 4, [np.inf] * 4],
        ]
    )
    problem = AdjustProblem(cost, np.tile(np.arange(4.0), (2, 1)))
    assert problem.convex
    assert local_optima(problem) == [(0, 2), None]


def test_problem_shape_checks():
    with pytest.raises(ValueError):
        AdjustProblem(np.zeros((1, 2, 3)), np.zeros((2, 2)))
    with pytest.raises(ValueError):
        AdjustProblem(np.zeros((1, 1, 2)), np.array([[2.0, 1.0]]))
    with pytest.raises(ValueError):
        AdjustProblem(np.zeros((1, 1, 2)), np.array([[1.0, 2.0]]), lower=3, upper=2)
