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
import logging
import math
import threading
import time
from itertools import product
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from camel.logger import get_logger
from pydantic import BaseModel, ConfigDict, Field

from .bounds import EXACT, BoundTable, compute_bound_table, exact_bound
from .exceptions import InfeasibleError, WorkLimitExceeded
from .model import Instance, LotAssignment
from .salesdyn import markdown_cost, yield_table
from .sop import lot_yields, modified_costs, scenario_lot_yields, solve_sop_exact
from .trajectory import (
    PriceTrajectory,
    ScenarioTrajectoryMap,
    enumerate_trajectories,
    select_best,
)
from .utils.common import TOLERANCE, ordered_map

logger = get_logger(__name__)
search_logger = get_logger(__name__ + ".search")

OPTIMAL = "optimal"
GAP_BOUNDED = "gap-bounded"
HEURISTIC = "heuristic"


class IspoSolution(BaseModel):
    r"""A supply decision with one trajectory per scenario.

    Args:
        assignment (LotAssignment): Lot choice per branch.
        trajectory_map (ScenarioTrajectoryMap): Trajectory per scenario.
        objective (float): Expected discounted profit.
        status (str): ``optimal``, ``gap-bounded`` or ``heuristic``.
        dual_bound (float): Proven upper bound on the optimum.
        stats (Dict[str, Any]): Search counters.
    """

    model_config = ConfigDict(frozen=True)

    assignment: LotAssignment
    trajectory_map: ScenarioTrajectoryMap
    objective: float
    status: str
    dual_bound: float
    stats: Dict[str, Any] = Field(default_factory=dict)

    @property
    def gap(self) -> float:
        r"""Relative gap ``(dual - objective) / |dual|``."""
        if self.dual_bound == self.objective:
            return 0.0
        return (self.dual_bound - self.objective) / max(abs(self.dual_bound), 1e-12)

    def summary(self) -> Dict[str, Any]:
        return {
            "status": self.status,
            "objective": round(self.objective, 4),
            "dual_bound": round(self.dual_bound, 4),
            "gap": self.gap,
            "lot_types": list(self.assignment.lot_types_used()),
            "trajectories": [t.label() for t in self.trajectory_map.trajectories],
            **self.stats,
        }


class BnbParams(BaseModel):
    r"""Parameters of the exact search.

    Args:
        time_limit (float, optional): Seconds before returning a
            gap-bounded result. (default: :obj:`None`)
        incumbent (float, optional): Known objective value used for
            pruning from the start. (default: :obj:`None`)
        tighten_bounds (bool): Replace a candidate's bound by its exact
            single-scenario optimum before expanding it.
            (default: :obj:`True`)
        workers (int): Threads searching depth-one subtrees.
            (default: :obj:`1`)
        work_limit (int): Subset limit of every exact SOP solve.
            (default: :obj:`10000`)
        log_path (str, optional): File receiving one line per search node.
            (default: :obj:`None`)
    """

    model_config = ConfigDict(frozen=True)

    time_limit: Optional[float] = Field(default=None, gt=0)
    incumbent: Optional[float] = None
    tighten_bounds: bool = True
    workers: int = Field(default=1, ge=1)
    work_limit: int = Field(default=10_000, ge=1)
    log_path: Optional[str] = None


class _TimeUp(Exception):
    def __init__(self, bound: float):
        super().__init__(bound)
        self.bound = bound


class _Search:
    def __init__(
        self,
        instance: Instance,
        params: BnbParams,
        trajectories: List[PriceTrajectory],
        table: BoundTable,
    ):
        self.instance = instance
        self.params = params
        self.trajectories = trajectories
        self.table = table
        self.probs = instance.probabilities
        self.last = instance.num_scenarios - 1
        self.sort_key = [table.values(e) for e in range(instance.num_scenarios)]
        self.order = []
        for e, keys in enumerate(self.sort_key):
            ranked = sorted(range(len(trajectories)), key=lambda t: (-keys[t], t))
            # with zero weight any single trajectory represents the scenario
            self.order.append(ranked[:1] if self.probs[e] == 0 else ranked)
        max_gamma = [keys.max() for keys in self.sort_key]
        self.rest = [
            sum(p * g for p, g in zip(self.probs[e + 1 :], max_gamma[e + 1 :]))
            for e in range(instance.num_scenarios)
        ]
        self.markdown = np.array([markdown_cost(instance, t) for t in trajectories])

        self.lock = threading.Lock()
        self.best_value = -math.inf if params.incumbent is None else params.incumbent
        self.best: Optional[Tuple[Tuple[int, ...], LotAssignment]] = None
        self.strict = params.workers > 1
        self.deadline = (
            None
            if params.time_limit is None
            else time.monotonic() + params.time_limit
        )
        self.yields: Dict[Tuple[int, int], np.ndarray] = {}
        self.stats = {
            "nodes": 0,
            "prunes": 0,
            "leaf_solves": 0,
            "bound_evaluations": len(table),
            "tightenings": 0,
        }

    def _count(self, key: str) -> None:
        with self.lock:
            self.stats[key] += 1

    def _tol(self) -> float:
        return TOLERANCE * max(1.0, abs(self.best_value))

    def _prunable(self, bound: float) -> bool:
        if self.best_value == -math.inf:
            return False
        if self.best is None or self.strict:
            return bound < self.best_value - self._tol()
        return bound <= self.best_value + self._tol()

    def _key_bound(self, depth: int, t: int, fixed: float) -> float:
        return fixed + self.probs[depth] * self.sort_key[depth][t] + self.rest[depth]

    def _log(self, depth: int, prefix: Tuple[int, ...], bound: float, action: str) -> None:
        if search_logger.isEnabledFor(logging.DEBUG):
            search_logger.debug(
                f"depth={depth} prefix={','.join(str(t) for t in prefix)} "
                f"bound={bound:.6f} action={action}"
            )

    def _gamma(self, depth: int, t: int) -> float:
        entry = self.table.entry(depth, t)
        if self.params.tighten_bounds and entry.provenance != EXACT:
            value = exact_bound(
                self.instance,
                depth,
                self.trajectories[t],
                work_limit=self.params.work_limit,
            )
            entry = self.table.update(depth, t, value, EXACT)
            self._count("tightenings")
        return entry.value

    def _check_time(self, bound: float) -> None:
        if self.deadline is not None and time.monotonic() > self.deadline:
            raise _TimeUp(bound)

    def descend(self, depth: int, prefix: Tuple[int, ...], fixed: float) -> None:
        order = self.order[depth]
        for i, t in enumerate(order):
            try:
                self._check_time(self._key_bound(depth, t, fixed))
                if not self.visit(depth, t, prefix, fixed):
                    return
            except _TimeUp as exc:
                remaining = [self._key_bound(depth, u, fixed) for u in order[i + 1 : i + 2]]
                raise _TimeUp(max([exc.bound] + remaining)) from None

    def visit(self, depth: int, t: int, prefix: Tuple[int, ...], fixed: float) -> bool:
        r"""Handle one candidate; ``False`` when it and every later sibling
        are pruned."""
        self._count("nodes")
        path = prefix + (t,)
        key_bound = self._key_bound(depth, t, fixed)
        if self._prunable(key_bound):
            self._count("prunes")
            self._log(depth, path, key_bound, "prune")
            return False
        value = self._gamma(depth, t)
        bound = fixed + self.probs[depth] * value + self.rest[depth]
        if self._prunable(bound):
            self._count("prunes")
            self._log(depth, path, bound, "prune")
            return True
        if depth == self.last:
            self._log(depth, path, bound, "leaf")
            self.leaf(path)
        else:
            self._log(depth, path, bound, "expand")
            self.descend(depth + 1, path, fixed + self.probs[depth] * value)
        return True

    def _scenario_yields(self, scenario: int, t: int) -> np.ndarray:
        key = (scenario, t)
        with self.lock:
            cached = self.yields.get(key)
        if cached is None:
            computed = scenario_lot_yields(
                self.instance, scenario, self.trajectories[t]
            )
            with self.lock:
                cached = self.yields.setdefault(key, computed)
        return cached

    def leaf(self, path: Tuple[int, ...]) -> None:
        self._count("leaf_solves")
        trajectory_map = self.map_of(path)
        coeffs = modified_costs(
            self.instance,
            trajectory_map,
            scenario_yields=[self._scenario_yields(e, t) for e, t in enumerate(path)],
        )
        result = solve_sop_exact(
            coeffs, self.instance, work_limit=self.params.work_limit
        )
        value = result.value - float(
            sum(p * self.markdown[t] for p, t in zip(self.probs, path))
        )
        with self.lock:
            tol = self._tol()
            if self.best is None:
                better = value >= self.best_value - tol
            else:
                better = value > self.best_value + tol or (
                    self.strict
                    and abs(value - self.best_value) <= tol
                    and path < self.best[0]
                )
            if better:
                self.best_value = value
                self.best = (path, result.assignment)
                logger.debug(f"New incumbent {value:.4f} at map {path}")

    def map_of(self, path: Tuple[int, ...]) -> ScenarioTrajectoryMap:
        return ScenarioTrajectoryMap(
            trajectories=tuple(self.trajectories[t] for t in path)
        )


def solve_ispo_exact(
    instance: Instance,
    params: Optional[BnbParams] = None,
    trajectories: Optional[List[PriceTrajectory]] = None,
    table: Optional[BoundTable] = None,
) -> IspoSolution:
    r"""Exact ISPO optimum by branch-and-bound over scenario→trajectory
    maps.

    Trajectories of each scenario are visited in order of decreasing
    bound; a node is pruned once its bound cannot beat the incumbent, and
    all later siblings with it. Every leaf solves the supply problem
    exactly.

    Args:
        instance (Instance): The instance.
        params (BnbParams, optional): Search parameters.
            (default: :obj:`None`)
        trajectories (List[PriceTrajectory], optional): Candidate set.
            (default: :obj:`None`)
        table (BoundTable, optional): Precomputed bounds for
            ``trajectories``. (default: :obj:`None`)

    Returns:
        IspoSolution: ``optimal``, or ``gap-bounded`` when the time limit
            stopped the search.
    """
    params = params or BnbParams()
    if trajectories is None:
        trajectories = enumerate_trajectories(
            instance.k_max, instance.p_max, instance.k_observ
        )
    if table is None:
        table = compute_bound_table(instance, trajectories, workers=params.workers)
    search = _Search(instance, params, trajectories, table)

    handler = None
    previous_level = search_logger.level
    if params.log_path:
        handler = logging.FileHandler(params.log_path, mode="w", encoding="utf-8")
        handler.setFormatter(logging.Formatter("%(message)s"))
        search_logger.addHandler(handler)
        search_logger.setLevel(logging.DEBUG)

    start = time.monotonic()
    unexplored = -math.inf
    try:
        if params.workers <= 1:
            try:
                search.descend(0, (), 0.0)
            except _TimeUp as exc:
                unexplored = exc.bound
        else:

            def root(t: int) -> float:
                try:
                    search._check_time(search._key_bound(0, t, 0.0))
                    search.visit(0, t, (), 0.0)
                except _TimeUp as exc:
                    return exc.bound
                return -math.inf

            unexplored = max(
                ordered_map(root, search.order[0], workers=params.workers)
            )
    finally:
        if handler is not None:
            search_logger.removeHandler(handler)
            handler.close()
            search_logger.setLevel(previous_level)

    if search.best is None:
        if unexplored > -math.inf:
            raise WorkLimitExceeded("time limit reached before any leaf was solved")
        if params.incumbent is not None:
            raise ValueError(
                f"no solution reaches the supplied incumbent {params.incumbent}"
            )
        raise InfeasibleError("no feasible supply decision")

    path, assignment = search.best
    timed_out = unexplored > -math.inf
    status = GAP_BOUNDED if timed_out else OPTIMAL
    dual = max(search.best_value, unexplored) if timed_out else search.best_value
    if timed_out:
        logger.warning(
            f"Time limit reached: incumbent {search.best_value:.4f}, "
            f"dual bound {dual:.4f}"
        )
    stats = dict(search.stats, seconds=round(time.monotonic() - start, 3))
    logger.info(
        f"Exact ISPO {status}: objective {search.best_value:.4f}, "
        f"{stats['leaf_solves']} leaf solves, {stats['prunes']} prunes"
    )
    return IspoSolution(
        assignment=assignment,
        trajectory_map=search.map_of(path),
        objective=search.best_value,
        status=status,
        dual_bound=dual,
        stats=stats,
    )


def brute_force_ispo(
    instance: Instance, work_limit: int = 10_000_000
) -> IspoSolution:
    r"""Exhaustive optimum over every assignment and every scenario map.

    For a fixed assignment the scenario maps decouple, so each scenario's
    best trajectory is taken independently; every assignment is checked.

    Args:
        instance (Instance): A small instance.
        work_limit (int): Maximum of ``T^E * (L M)^B``.
            (default: :obj:`10000000`)

    Returns:
        IspoSolution: An optimal solution.

    Raises:
        WorkLimitExceeded: If the enumeration is larger than ``work_limit``.
        InfeasibleError: If no assignment is feasible.
    """
    trajectories = enumerate_trajectories(
        instance.k_max, instance.p_max, instance.k_observ
    )
    choices = [
        (lot, mi)
        for lot in instance.usable_lot_types
        for mi in range(len(instance.multiplicities))
    ]
    work = len(trajectories) ** instance.num_scenarios * len(choices) ** instance.num_branches
    if work > work_limit:
        raise WorkLimitExceeded(
            f"brute force needs {work} evaluations, limit is {work_limit}",
            work=work,
            limit=work_limit,
        )
    markdown = np.array([markdown_cost(instance, t) for t in trajectories])
    yields = [
        lot_yields(instance, yield_table(instance, e, trajectories))
        for e in range(instance.num_scenarios)
    ]
    branches = np.arange(instance.num_branches)
    mults = np.asarray(instance.multiplicities)

    best: Optional[Tuple[float, Tuple[Tuple[int, int], ...], List[int]]] = None
    for combo in product(choices, repeat=instance.num_branches):
        lots = np.array([lot for lot, _ in combo])
        mis = np.array([mi for _, mi in combo])
        used = len(set(lots.tolist()))
        if used > instance.max_lot_types:
            continue
        total = int((instance.lot_sizes[lots] * mults[mis]).sum())
        if total < instance.supply_lower or total > instance.supply_cap:
            continue
        value = -float(instance.handling_table[branches, lots, mis].sum())
        value -= instance.opening_total(used)
        picks = []
        for e, prob in enumerate(instance.probabilities):
            pop = yields[e][:, branches, lots, mis].sum(axis=1) - markdown
            t = select_best(pop, trajectories)
            picks.append(t)
            value += prob * float(pop[t])
        if best is None or value > best[0] + TOLERANCE * max(1.0, abs(best[0])):
            best = (value, tuple(zip(lots.tolist(), mults[mis].tolist())), picks)

    if best is None:
        raise InfeasibleError("no feasible supply decision")
    value, assignment, picks = best
    return IspoSolution(
        assignment=LotAssignment(choices=assignment),
        trajectory_map=ScenarioTrajectoryMap(
            trajectories=tuple(trajectories[t] for t in picks)
        ),
        objective=value,
        status=OPTIMAL,
        dual_bound=value,
        stats={"evaluations": work},
    )
