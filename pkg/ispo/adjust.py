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
r"""Resource-constrained selection of one (alternative, level) per entity.

Every entity ``v`` picks one alternative ``a`` at one level ``b``; picking
costs ``psi(v, a, b)`` and consumes ``phi(a, b)`` units of a shared resource
whose total must lie in ``[lower, upper]``. The module starts from the
cheapest choice of every entity and exchanges choices at the smallest
additional cost per unit of resource until the total fits.
"""

import heapq
import math
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from camel.logger import get_logger
from pydantic import BaseModel, ConfigDict

from .exceptions import InfeasibleError, NonConvexError, WorkLimitExceeded

logger = get_logger(__name__)

RESOURCE_EPS = 1e-9
DEFAULT_NODE_LIMIT = 200_000


class AdjustProblem:
    r"""Costs, resource usage and the admissible resource range.

    Args:
        cost (np.ndarray): ``psi`` with shape ``(V, A, L)``; ``np.inf`` marks
            an unavailable choice.
        resource (np.ndarray): ``phi`` with shape ``(A, L)``, non-decreasing
            along the level axis.
        lower (float): Lower bound of the total resource.
            (default: :obj:`0.0`)
        upper (float): Upper bound of the total resource.
            (default: :obj:`math.inf`)
    """

    def __init__(
        self,
        cost: np.ndarray,
        resource: np.ndarray,
        lower: float = 0.0,
        upper: float = math.inf,
    ):
        cost = np.asarray(cost, dtype=float)
        resource = np.asarray(resource, dtype=float)
        if cost.ndim != 3 or resource.shape != cost.shape[1:]:
            raise ValueError(
                f"cost shape {cost.shape} does not match resource shape "
                f"{resource.shape}"
            )
        if np.isnan(cost).any() or np.isneginf(cost).any():
            raise ValueError("costs must be finite or +inf")
        if (np.diff(resource, axis=1) < 0).any():
            raise ValueError("resource usage must be non-decreasing in the level")
        if lower > upper:
            raise ValueError(f"empty resource range [{lower}, {upper}]")
        self.cost = cost
        self.resource = resource
        self.lower = float(lower)
        self.upper = float(upper)
        self.convex = _is_convex(cost)
        self._points: Dict[int, _EntityPoints] = {}

    @property
    def num_entities(self) -> int:
        return self.cost.shape[0]

    def points(self, entity: int) -> "_EntityPoints":
        if entity not in self._points:
            self._points[entity] = _EntityPoints(
                self.cost[entity], self.resource
            )
        return self._points[entity]


def _is_convex(cost: np.ndarray) -> bool:
    finite = np.isfinite(cost)
    levels = cost.shape[-1]
    has_any = finite.any(axis=-1)
    first = np.argmax(finite, axis=-1)
    last = levels - 1 - np.argmax(finite[..., ::-1], axis=-1)
    contiguous = ~has_any | (finite.sum(axis=-1) == last - first + 1)
    if not contiguous.all():
        return False
    if levels < 3:
        return True
    scale = max(1.0, float(np.abs(cost[finite]).max(initial=0.0)))
    with np.errstate(invalid="ignore"):
        second = cost[..., 2:] - 2 * cost[..., 1:-1] + cost[..., :-2]
    usable = finite[..., 2:] & finite[..., 1:-1] & finite[..., :-2]
    return bool((second[usable] >= -1e-9 * scale).all())


class _EntityPoints:
    r"""Finite choices of one entity and the lazily built lower convex hull
    chains leading away from its cheapest choice."""

    def __init__(self, cost: np.ndarray, resource: np.ndarray):
        alts, levels = np.nonzero(np.isfinite(cost))
        self.alts = alts
        self.levels = levels
        self.phi = resource[alts, levels]
        self.psi = cost[alts, levels]
        self.start = int(np.argmin(self.psi)) if len(self.psi) else -1
        self._chains: Dict[int, List[int]] = {-1: [], 1: []}
        self._done = {-1: False, 1: False}

    def vertex(self, direction: int, step: int) -> Optional[int]:
        r"""Point index of the ``step``-th hull vertex after the start when
        moving down (``-1``) or up (``1``) in resource."""
        chain = self._chains[direction]
        while len(chain) <= step and not self._done[direction]:
            current = chain[-1] if chain else self.start
            if direction < 0:
                mask = self.phi < self.phi[current] - RESOURCE_EPS
                spread = self.phi[current] - self.phi
            else:
                mask = self.phi > self.phi[current] + RESOURCE_EPS
                spread = self.phi - self.phi[current]
            candidates = np.flatnonzero(mask)
            if len(candidates) == 0:
                self._done[direction] = True
                break
            slopes = (self.psi[candidates] - self.psi[current]) / spread[candidates]
            order = np.lexsort((candidates, spread[candidates], slopes))
            chain.append(int(candidates[order[0]]))
        return chain[step] if step < len(chain) else None


class AdjustSolution(BaseModel):
    r"""Choices per entity as ``(alternative, level, weight)`` triples.

    Integral solutions carry exactly one triple of weight 1 per entity;
    relaxed ones split at most one entity between two choices.
    """

    model_config = ConfigDict(frozen=True)

    choices: Tuple[Tuple[Tuple[int, int, float], ...], ...]
    objective: float
    resource: float
    exchanges: int = 0
    nodes: int = 0

    @property
    def fractional_count(self) -> int:
        return sum(
            1 for entity in self.choices for _, _, w in entity if 0.0 < w < 1.0
        )

    @property
    def is_integral(self) -> bool:
        return self.fractional_count == 0

    def integral_choices(self) -> Tuple[Tuple[int, int], ...]:
        if not self.is_integral:
            raise ValueError("solution is fractional")
        return tuple((entity[0][0], entity[0][1]) for entity in self.choices)


class _Relaxation:
    __slots__ = ("feasible", "value", "resource", "position", "fractional", "exchanges")

    def __init__(self):
        self.feasible = True
        self.value = 0.0
        self.resource = 0.0
        self.position: Dict[int, int] = {}
        self.fractional: Optional[Tuple[int, int, int, float]] = None
        self.exchanges = 0


def _relax(
    problem: AdjustProblem,
    entities: Sequence[int],
    lower: float,
    upper: float,
) -> _Relaxation:
    result = _Relaxation()
    for v in entities:
        points = problem.points(v)
        if points.start < 0:
            result.feasible = False
            return result
        result.position[v] = points.start
        result.resource += points.phi[points.start]
        result.value += points.psi[points.start]

    if upper + RESOURCE_EPS < result.resource:
        direction, target = -1, upper
    elif result.resource < lower - RESOURCE_EPS:
        direction, target = 1, lower
    else:
        return result

    heap: List[Tuple[float, int, int]] = []

    def push(v: int, step: int) -> None:
        points = problem.points(v)
        nxt = points.vertex(direction, step)
        if nxt is None:
            return
        cur = points.start if step == 0 else points.vertex(direction, step - 1)
        slope = (points.psi[nxt] - points.psi[cur]) / abs(
            points.phi[nxt] - points.phi[cur]
        )
        heapq.heappush(heap, (slope, v, step))

    for v in entities:
        push(v, 0)

    while True:
        gap = direction * (target - result.resource)
        if gap <= RESOURCE_EPS:
            return result
        if not heap:
            result.feasible = False
            return result
        _, v, step = heapq.heappop(heap)
        points = problem.points(v)
        cur = result.position[v]
        nxt = points.vertex(direction, step)
        delta = abs(points.phi[nxt] - points.phi[cur])
        if delta <= gap + RESOURCE_EPS:
            result.resource += direction * delta
            result.value += points.psi[nxt] - points.psi[cur]
            result.position[v] = nxt
            result.exchanges += 1
            push(v, step + 1)
        else:
            theta = gap / delta
            result.value += theta * (points.psi[nxt] - points.psi[cur])
            result.resource = target
            result.fractional = (v, cur, nxt, theta)
            result.exchanges += 1
            return result


def _solution_from(
    problem: AdjustProblem,
    relaxation: _Relaxation,
    fixed: Optional[Dict[int, int]] = None,
    nodes: int = 0,
) -> AdjustSolution:
    fixed = fixed or {}
    position = {**relaxation.position, **fixed}
    choices = []
    resource = 0.0
    objective = 0.0
    for v in range(problem.num_entities):
        points = problem.points(v)
        if relaxation.fractional is not None and relaxation.fractional[0] == v:
            _, cur, nxt, theta = relaxation.fractional
            parts = [(cur, 1.0 - theta), (nxt, theta)]
        else:
            parts = [(position[v], 1.0)]
        entry = []
        for idx, weight in parts:
            entry.append((int(points.alts[idx]), int(points.levels[idx]), weight))
            resource += weight * points.phi[idx]
            objective += weight * points.psi[idx]
        choices.append(tuple(entry))
    return AdjustSolution(
        choices=tuple(choices),
        objective=float(objective),
        resource=float(resource),
        exchanges=relaxation.exchanges,
        nodes=nodes,
    )


def local_optima(problem: AdjustProblem) -> List[Optional[Tuple[int, int]]]:
    r"""Cheapest ``(alternative, level)`` of every entity, ignoring the
    resource range.

    On convex costs the best level of each alternative is found by binary
    search over the level differences; otherwise by a full scan. Ties go to
    the smallest alternative and then the smallest level.

    Args:
        problem (AdjustProblem): The problem.

    Returns:
        List[Optional[Tuple[int, int]]]: One choice per entity, ``None``
            when an entity has no finite choice.
    """
    optima: List[Optional[Tuple[int, int]]] = []
    for v in range(problem.num_entities):
        best: Optional[Tuple[float, int, int]] = None
        for a in range(problem.cost.shape[1]):
            row = problem.cost[v, a]
            finite = np.flatnonzero(np.isfinite(row))
            if len(finite) == 0:
                continue
            if problem.convex:
                b = _convex_argmin(row, int(finite[0]), int(finite[-1]))
            else:
                b = int(finite[np.argmin(row[finite])])
            if best is None or row[b] < best[0]:
                best = (float(row[b]), a, b)
        optima.append(None if best is None else (best[1], best[2]))
    return optima


def _convex_argmin(row: np.ndarray, lo: int, hi: int) -> int:
    # smallest b in [lo, hi] with row[b + 1] >= row[b]
    while lo < hi:
        mid = (lo + hi) // 2
        if row[mid + 1] >= row[mid]:
            hi = mid
        else:
            lo = mid + 1
    return lo


def solve_relaxed(problem: AdjustProblem) -> AdjustSolution:
    r"""Optimum of the continuous relaxation.

    Exchanges follow the lower convex hull of each entity's (resource,
    cost) points in increasing order of cost per resource unit. The last
    exchange may be partial, so at most one entity ends up split between
    two choices.

    Args:
        problem (AdjustProblem): A problem with convex costs.

    Returns:
        AdjustSolution: The relaxed optimum.

    Raises:
        NonConvexError: If some cost is not convex in the level.
        InfeasibleError: If no choice fits the resource range.
    """
    if not problem.convex:
        raise NonConvexError("costs are not convex in the level")
    relaxation = _relax(
        problem, range(problem.num_entities), problem.lower, problem.upper
    )
    if not relaxation.feasible:
        raise InfeasibleError(
            f"no choice fits the resource range [{problem.lower}, {problem.upper}]"
        )
    solution = _solution_from(problem, relaxation)
    logger.debug(
        f"Relaxed adjustment: objective={solution.objective:.6f}, "
        f"exchanges={solution.exchanges}, fractional={solution.fractional_count}"
    )
    return solution


def solve_integral(
    problem: AdjustProblem, node_limit: int = DEFAULT_NODE_LIMIT
) -> AdjustSolution:
    r"""Exact integral optimum by depth-first branch-and-bound.

    Each node fixes some entities and bounds the rest with the hull
    relaxation; the entity left fractional is branched on, trying the two
    relaxed choices first.

    Args:
        problem (AdjustProblem): The problem; convexity is not required.
        node_limit (int): Maximum number of nodes.
            (default: :obj:`200000`)

    Returns:
        AdjustSolution: An integral optimum.

    Raises:
        InfeasibleError: If no choice fits the resource range.
        WorkLimitExceeded: If the node limit is reached.
    """
    num_entities = problem.num_entities
    best_value = math.inf
    best: Optional[AdjustSolution] = None
    stack: List[Tuple[Dict[int, int], float, float]] = [({}, 0.0, 0.0)]
    nodes = 0
    while stack:
        fixed, fixed_phi, fixed_psi = stack.pop()
        nodes += 1
        if nodes > node_limit:
            raise WorkLimitExceeded(
                f"integral adjustment exceeded {node_limit} nodes",
                work=nodes,
                limit=node_limit,
            )
        free = [v for v in range(num_entities) if v not in fixed]
        relaxation = _relax(
            problem, free, problem.lower - fixed_phi, problem.upper - fixed_phi
        )
        if not relaxation.feasible:
            continue
        bound = fixed_psi + relaxation.value
        if best is not None and bound >= best_value - 1e-12 * max(
            1.0, abs(best_value)
        ):
            continue
        if relaxation.fractional is None:
            best_value = bound
            best = _solution_from(problem, relaxation, fixed)
            continue

        entity, cur, nxt, theta = relaxation.fractional
        points = problem.points(entity)
        preferred = [nxt, cur] if theta > 0.5 else [cur, nxt]
        rest = [
            int(i)
            for i in np.argsort(points.psi, kind="stable")
            if i not in preferred
        ]
        for idx in reversed(preferred + rest):
            child = dict(fixed)
            child[entity] = idx
            stack.append(
                (
                    child,
                    fixed_phi + float(points.phi[idx]),
                    fixed_psi + float(points.psi[idx]),
                )
            )

    if best is None:
        raise InfeasibleError(
            f"no integral choice fits the resource range "
            f"[{problem.lower}, {problem.upper}]"
        )
    logger.debug(
        f"Integral adjustment: objective={best.objective:.6f}, nodes={nodes}"
    )
    return best.model_copy(update={"nodes": nodes})
