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
import heapq
from functools import partial
from itertools import combinations, islice
from math import comb
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np
from camel.logger import get_logger
from pydantic import BaseModel, ConfigDict, Field

from .adjust import AdjustProblem, solve_integral
from .exceptions import InfeasibleError, WorkLimitExceeded
from .model import Instance, LotAssignment
from .salesdyn import yield_table
from .trajectory import PriceTrajectory, ScenarioTrajectoryMap
from .utils.common import ordered_map

logger = get_logger(__name__)


class ProfitCoefficients(BaseModel):
    r"""Profit ``pi~(b, l, m)`` of giving branch ``b`` lot-type ``l`` with
    multiplicity ``m``; shape ``(B, L, M)``, ``-inf`` for unusable
    lot-types.

    Args:
        values (np.ndarray): The coefficient table.
        charge_opening (bool): Whether opening costs count against the
            objective. (default: :obj:`True`)
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    values: np.ndarray
    charge_opening: bool = True


class SfaParams(BaseModel):
    r"""Parameters of the score-and-fix heuristic.

    Args:
        scores (Tuple[int, ...]): Points for a branch's best, second best,
            ... lot-type. (default: :obj:`(100, 10, 1)`)
        subset_budget (int): Subsets evaluated per cardinality.
            (default: :obj:`50`)
        workers (int): Threads evaluating subsets. (default: :obj:`1`)
    """

    model_config = ConfigDict(frozen=True)

    scores: Tuple[int, ...] = (100, 10, 1)
    subset_budget: int = Field(default=50, ge=1)
    workers: int = Field(default=1, ge=1)


class SopResult(BaseModel):
    r"""An assignment with its SOP value ``sum_b pi~ - opening``."""

    model_config = ConfigDict(frozen=True)

    assignment: LotAssignment
    value: float
    subsets_evaluated: int


def lot_yields(instance: Instance, table: np.ndarray) -> np.ndarray:
    r"""Turn per-cell yields ``(..., B, S, I)`` into per-lot yields
    ``(..., B, L, M)``: the yield of ``m`` copies of lot-type ``l``."""
    mults = np.asarray(instance.multiplicities)
    levels = instance.lot_matrix[:, None, :] * mults[None, :, None]
    levels = np.minimum(levels, table.shape[-1] - 1)
    sizes = np.arange(instance.num_sizes)
    return table[..., sizes, levels].sum(axis=-1)


def scenario_lot_yields(
    instance: Instance, scenario: int, trajectory: PriceTrajectory
) -> np.ndarray:
    r"""Discounted yield ``(B, L, M)`` of every lot choice for one scenario
    and trajectory."""
    return lot_yields(instance, yield_table(instance, scenario, [trajectory])[0])


def _mask_unusable(instance: Instance, values: np.ndarray) -> np.ndarray:
    values = np.array(values, dtype=float)
    unusable = np.setdiff1d(
        np.arange(instance.num_lot_types), instance.usable_lot_types
    )
    values[:, unusable, :] = -np.inf
    return values


def modified_costs(
    instance: Instance,
    trajectory_map: ScenarioTrajectoryMap,
    scenario_yields: Optional[Sequence[np.ndarray]] = None,
) -> ProfitCoefficients:
    r"""Expected discounted yield minus handling cost of every lot choice
    under a fixed trajectory per scenario.

    Args:
        instance (Instance): The instance.
        trajectory_map (ScenarioTrajectoryMap): One trajectory per scenario.
        scenario_yields (Sequence[np.ndarray], optional): Precomputed
            ``scenario_lot_yields`` per scenario. (default: :obj:`None`)

    Returns:
        ProfitCoefficients: ``pi~`` for every ``(b, l, m)``.
    """
    expected = np.zeros(instance.handling_table.shape)
    for e, trajectory in enumerate(trajectory_map.trajectories):
        prob = instance.probabilities[e]
        if prob == 0:
            continue
        if scenario_yields is not None:
            yields = scenario_yields[e]
        else:
            yields = scenario_lot_yields(instance, e, trajectory)
        expected += prob * yields
    return ProfitCoefficients(
        values=_mask_unusable(instance, expected - instance.handling_table)
    )


def distance_coefficients(instance: Instance) -> ProfitCoefficients:
    r"""Coefficients of the one-stage baseline: the negative distance
    ``sum_s |m * l_s - d_bs|`` to the expected demand at the start price
    before the salvage period. Opening costs are not charged."""
    forecast = instance.mean_demand()[: instance.k_max, 0].sum(axis=0)
    mults = np.asarray(instance.multiplicities)
    supply = instance.lot_matrix[:, None, :] * mults[None, :, None]
    distance = np.abs(
        supply[None, :, :, :] - forecast[:, None, None, :]
    ).sum(axis=-1)
    return ProfitCoefficients(
        values=_mask_unusable(instance, -distance), charge_opening=False
    )


def _evaluate_subset(
    coeffs: ProfitCoefficients,
    instance: Instance,
    subset: Tuple[int, ...],
) -> Optional[Tuple[float, LotAssignment]]:
    lots = list(subset)
    mults = np.asarray(instance.multiplicities)
    problem = AdjustProblem(
        -coeffs.values[:, lots, :],
        instance.lot_sizes[lots][:, None] * mults[None, :],
        lower=instance.supply_lower,
        upper=instance.supply_cap,
    )
    try:
        solution = solve_integral(problem)
    except InfeasibleError:
        return None
    assignment = LotAssignment(
        choices=tuple(
            (lots[a], instance.multiplicities[b])
            for a, b in solution.integral_choices()
        )
    )
    value = -solution.objective
    if coeffs.charge_opening:
        value -= instance.opening_total(len(assignment.lot_types_used()))
    return value, assignment


def _best_first_subsets(
    order: Sequence[int], scores: np.ndarray, k: int
) -> Iterator[Tuple[int, ...]]:
    r"""Yield ``k``-subsets of ``order`` in non-increasing total score."""
    n = len(order)
    if k > n:
        return
    start = tuple(range(k))
    heap = [(-float(scores[list(order[:k])].sum()), start)]
    seen = {start}
    while heap:
        _, positions = heapq.heappop(heap)
        yield tuple(sorted(order[i] for i in positions))
        for i in range(k):
            moved = positions[i] + 1
            if moved >= n or (i + 1 < k and moved >= positions[i + 1]):
                continue
            successor = positions[:i] + (moved,) + positions[i + 1 :]
            if successor in seen:
                continue
            seen.add(successor)
            total = float(scores[[order[j] for j in successor]].sum())
            heapq.heappush(heap, (-total, successor))


def lot_type_scores(
    coeffs: ProfitCoefficients, instance: Instance, points: Sequence[int]
) -> np.ndarray:
    r"""Sum over branches of the points each branch awards its best,
    second best, ... lot-type."""
    best = coeffs.values.max(axis=2)
    scores = np.zeros(instance.num_lot_types)
    for b in range(instance.num_branches):
        ranked = sorted(instance.usable_lot_types, key=lambda l: (-best[b, l], l))
        for rank, lot in enumerate(ranked[: len(points)]):
            scores[lot] += points[rank]
    return scores


def sfa_heuristic(
    coeffs: ProfitCoefficients,
    instance: Instance,
    params: Optional[SfaParams] = None,
) -> SopResult:
    r"""Score-and-fix heuristic for the supply problem.

    Lot-types are scored by how many branches rank them among their best.
    For every cardinality ``k`` up to ``max_lot_types`` the highest scoring
    ``k``-subsets are visited best-first, each fixed subset is completed by
    the integral adjustment, and the best result over all ``k`` is kept.

    Args:
        coeffs (ProfitCoefficients): Profit coefficients.
        instance (Instance): The instance.
        params (SfaParams, optional): Heuristic parameters.
            (default: :obj:`None`)

    Returns:
        SopResult: The best assignment found.

    Raises:
        InfeasibleError: If no visited subset admits a feasible assignment.
    """
    params = params or SfaParams()
    scores = lot_type_scores(coeffs, instance, params.scores)
    order = sorted(instance.usable_lot_types, key=lambda l: (-scores[l], l))
    evaluate = partial(_evaluate_subset, coeffs, instance)

    best: Optional[Tuple[float, LotAssignment]] = None
    evaluated = 0
    for k in range(1, min(instance.max_lot_types, len(order)) + 1):
        subsets = list(
            islice(_best_first_subsets(order, scores, k), params.subset_budget)
        )
        results = ordered_map(evaluate, subsets, workers=params.workers)
        evaluated += len(subsets)
        for result in results:
            if result is not None and (best is None or result[0] > best[0] + 1e-12):
                best = result
    if best is None:
        raise InfeasibleError("no lot-type subset admits a feasible assignment")
    logger.debug(f"SFA value {best[0]:.4f} after {evaluated} subsets")
    return SopResult(
        assignment=best[1], value=best[0], subsets_evaluated=evaluated
    )


def exact_work(instance: Instance) -> int:
    r"""Number of lot-type subsets the exact solver enumerates."""
    usable = len(instance.usable_lot_types)
    return sum(
        comb(usable, k)
        for k in range(1, min(instance.max_lot_types, usable) + 1)
    )


def solve_sop_exact(
    coeffs: ProfitCoefficients,
    instance: Instance,
    work_limit: int = 10_000,
    workers: int = 1,
) -> SopResult:
    r"""Optimal supply for fixed coefficients.

    Enumerates every subset of at most ``max_lot_types`` usable lot-types
    and solves the integral adjustment within each. Opening costs follow
    the lot-types the completed assignment actually uses.

    Args:
        coeffs (ProfitCoefficients): Profit coefficients.
        instance (Instance): The instance.
        work_limit (int): Maximum number of subsets.
            (default: :obj:`10000`)
        workers (int): Threads evaluating subsets. (default: :obj:`1`)

    Returns:
        SopResult: An optimal assignment.

    Raises:
        WorkLimitExceeded: If more subsets than ``work_limit`` exist.
        InfeasibleError: If no assignment is feasible.
    """
    work = exact_work(instance)
    if work > work_limit:
        raise WorkLimitExceeded(
            f"exact SOP needs {work} subsets, limit is {work_limit}",
            work=work,
            limit=work_limit,
        )
    usable = instance.usable_lot_types
    subsets: List[Tuple[int, ...]] = [
        subset
        for k in range(1, min(instance.max_lot_types, len(usable)) + 1)
        for subset in combinations(usable, k)
    ]
    results = ordered_map(
        partial(_evaluate_subset, coeffs, instance), subsets, workers=workers
    )
    best: Optional[Tuple[float, LotAssignment]] = None
    for result in results:
        if result is not None and (best is None or result[0] > best[0] + 1e-12):
            best = result
    if best is None:
        raise InfeasibleError("no assignment satisfies the supply bounds")
    return SopResult(assignment=best[1], value=best[0], subsets_evaluated=work)
