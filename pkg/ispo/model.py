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
import math
from functools import cached_property
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from camel.logger import get_logger
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from .exceptions import InfeasibleError, InstanceValidationError
from .salesdyn import markdown_cost, simulate_sales
from .trajectory import ScenarioTrajectoryMap
from .utils.common import money

logger = get_logger(__name__)

INF_SENTINEL = "inf"


class ParametricHandling(BaseModel):
    r"""Handling cost ``acquisition_per_item * m * |l| + pick_cost * m``.

    Args:
        acquisition_per_item (float): Cost per delivered piece.
            (default: :obj:`0.0`)
        pick_cost (float): Cost per picked lot. (default: :obj:`0.0`)
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    acquisition_per_item: float = Field(default=0.0, ge=0)
    pick_cost: float = Field(default=0.0, ge=0)

    def cost(self, lot_size: int, multiplicity: int) -> float:
        return (
            self.acquisition_per_item * multiplicity * lot_size
            + self.pick_cost * multiplicity
        )


class LotType(BaseModel):
    r"""A pre-packed assortment: pieces per size."""

    model_config = ConfigDict(frozen=True)

    counts: Tuple[int, ...]

    @property
    def size(self) -> int:
        return sum(self.counts)

    def notation(self, multiplicity: Optional[int] = None) -> str:
        r"""Return ``(2,2,3)`` or, with a multiplicity, ``4(2,2,3)``."""
        body = "(" + ",".join(str(c) for c in self.counts) + ")"
        return body if multiplicity is None else f"{multiplicity}{body}"


class Instance(BaseModel):
    r"""A validated, immutable ISPO instance.

    ``demand`` has shape ``(E, k_max + 1, p_max + 1, B, S)``; ``np.inf``
    marks unbounded demand, which is only allowed at the salvage price in
    the final period. ``handling_table`` has shape ``(B, L, M)`` where the
    last axis follows ``multiplicities`` (ascending).
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    branches: Tuple[str, ...]
    sizes: Tuple[str, ...]
    lot_types: Tuple[LotType, ...]
    multiplicities: Tuple[int, ...]
    max_lot_types: int
    supply_lower: int
    supply_upper: Optional[int]
    k_max: int
    k_observ: int
    prices: Tuple[float, ...]
    probabilities: Tuple[float, ...]
    demand: np.ndarray
    handling_table: np.ndarray
    handling_form: Optional[ParametricHandling] = None
    opening_costs: Tuple[float, ...]
    markdown_costs: Tuple[float, ...]
    discount_rate: float
    require_full_size_run: bool = False

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Instance):
            return NotImplemented
        return self.to_document() == other.to_document()

    __hash__ = None  # type: ignore[assignment]

    @property
    def num_branches(self) -> int:
        return len(self.branches)

    @property
    def num_sizes(self) -> int:
        return len(self.sizes)

    @property
    def num_lot_types(self) -> int:
        return len(self.lot_types)

    @property
    def num_scenarios(self) -> int:
        return len(self.probabilities)

    @property
    def p_max(self) -> int:
        return len(self.prices) - 1

    @property
    def supply_cap(self) -> float:
        return math.inf if self.supply_upper is None else self.supply_upper

    @cached_property
    def lot_matrix(self) -> np.ndarray:
        return np.array([lot.counts for lot in self.lot_types], dtype=int)

    @cached_property
    def lot_sizes(self) -> np.ndarray:
        return self.lot_matrix.sum(axis=1)

    @cached_property
    def usable_lot_types(self) -> Tuple[int, ...]:
        r"""Lot-types solvers may assign (all of them unless every branch
        must receive every size)."""
        if not self.require_full_size_run:
            return tuple(range(self.num_lot_types))
        return tuple(
            idx
            for idx, lot in enumerate(self.lot_types)
            if min(lot.counts) >= 1
        )

    @cached_property
    def price_array(self) -> np.ndarray:
        return np.asarray(self.prices, dtype=float)

    @cached_property
    def discount_factors(self) -> np.ndarray:
        return np.exp(-self.discount_rate * np.arange(self.k_max + 1))

    @cached_property
    def markdown_cost_array(self) -> np.ndarray:
        return np.asarray(self.markdown_costs, dtype=float)

    @cached_property
    def level_caps(self) -> np.ndarray:
        r"""Largest supply of each size a single branch can receive."""
        usable = self.lot_matrix[list(self.usable_lot_types)]
        if usable.size == 0:
            return np.zeros(self.num_sizes, dtype=int)
        return usable.max(axis=0) * max(self.multiplicities)

    @property
    def max_level(self) -> int:
        return int(self.level_caps.max(initial=0))

    def multiplicity_index(self, multiplicity: int) -> int:
        try:
            return self.multiplicities.index(multiplicity)
        except ValueError:
            raise ValueError(
                f"multiplicity {multiplicity} not in {self.multiplicities}"
            ) from None

    def handling_cost(self, branch: int, lot_type: int, multiplicity: int) -> float:
        return float(
            self.handling_table[
                branch, lot_type, self.multiplicity_index(multiplicity)
            ]
        )

    def opening_total(self, used: int) -> float:
        r"""Cumulative opening cost of ``used`` distinct lot-types."""
        return float(sum(self.opening_costs[:used]))

    def mean_demand(self) -> np.ndarray:
        r"""Probability-weighted demand forecast of shape
        ``(k_max + 1, p_max + 1, B, S)``."""
        probs = np.asarray(self.probabilities)[:, None, None, None, None]
        unbounded = np.isinf(self.demand).any(axis=0)
        finite = np.where(np.isinf(self.demand), 0.0, self.demand)
        mean = (probs * finite).sum(axis=0)
        mean[unbounded] = np.inf
        return mean

    def with_probabilities(self, probabilities: Sequence[float]) -> "Instance":
        r"""Return a copy with new scenario probabilities."""
        document = self.to_document()
        for scenario, prob in zip(document["scenarios"], probabilities):
            scenario["prob"] = float(prob)
        if len(probabilities) != self.num_scenarios:
            raise InstanceValidationError(
                "scenario-count",
                f"expected {self.num_scenarios} probabilities, "
                f"got {len(probabilities)}",
            )
        return validate_instance(document)

    def to_document(self) -> Dict[str, Any]:
        r"""Return the JSON document form of the instance."""
        if self.handling_form is not None:
            handling: Any = self.handling_form.model_dump()
        else:
            handling = self.handling_table.tolist()
        return {
            "branches": list(self.branches),
            "sizes": list(self.sizes),
            "lot_types": [list(lot.counts) for lot in self.lot_types],
            "multiplicities": list(self.multiplicities),
            "max_lot_types": self.max_lot_types,
            "supply_bounds": [
                self.supply_lower,
                INF_SENTINEL if self.supply_upper is None else self.supply_upper,
            ],
            "periods": {"k_max": self.k_max, "k_observ": self.k_observ},
            "prices": list(self.prices),
            "scenarios": [
                {"prob": prob, "demand": _encode_tensor(self.demand[e])}
                for e, prob in enumerate(self.probabilities)
            ],
            "costs": {
                "handling": handling,
                "opening": list(self.opening_costs),
                "markdown": list(self.markdown_costs),
                "discount_rate": self.discount_rate,
            },
            "require_full_size_run": self.require_full_size_run,
        }


class LotAssignment(BaseModel):
    r"""One ``(lot_type index, multiplicity)`` choice per branch."""

    model_config = ConfigDict(frozen=True)

    choices: Tuple[Tuple[int, int], ...]

    def lot_types_used(self) -> Tuple[int, ...]:
        return tuple(sorted({lot for lot, _ in self.choices}))

    def check(self, instance: Instance) -> None:
        r"""Raise if the assignment is not admissible for ``instance``."""
        if len(self.choices) != instance.num_branches:
            raise ValueError(
                f"assignment covers {len(self.choices)} branches, "
                f"instance has {instance.num_branches}"
            )
        usable = set(instance.usable_lot_types)
        for branch, (lot, multiplicity) in enumerate(self.choices):
            if lot not in usable:
                raise ValueError(f"branch {branch}: lot-type {lot} not usable")
            if multiplicity not in instance.multiplicities:
                raise ValueError(
                    f"branch {branch}: multiplicity {multiplicity} not allowed"
                )
        used = len(self.lot_types_used())
        if used > instance.max_lot_types:
            raise InfeasibleError(
                f"{used} lot-types used, at most {instance.max_lot_types} allowed"
            )
        _, total = inventory_from_assignment(self, instance)
        if total < instance.supply_lower or total > instance.supply_cap:
            raise InfeasibleError(
                f"total supply {total} outside "
                f"[{instance.supply_lower}, {instance.supply_cap}]"
            )

    def to_frame(self, instance: Instance) -> pd.DataFrame:
        rows = []
        for branch, (lot, multiplicity) in enumerate(self.choices):
            rows.append(
                {
                    "branch": instance.branches[branch],
                    "lot_type": lot,
                    "multiplicity": multiplicity,
                    "notation": instance.lot_types[lot].notation(multiplicity),
                }
            )
        return pd.DataFrame(rows)

    @classmethod
    def from_frame(cls, frame: pd.DataFrame, instance: Instance) -> "LotAssignment":
        by_branch = {
            str(row.branch): (int(row.lot_type), int(row.multiplicity))
            for row in frame.itertuples(index=False)
        }
        missing = [b for b in instance.branches if b not in by_branch]
        if missing:
            raise ValueError(f"assignment misses branches {missing}")
        return cls(choices=tuple(by_branch[b] for b in instance.branches))


def _encode_tensor(values: np.ndarray) -> List[Any]:
    encoded = values.astype(object)
    encoded[np.isinf(values)] = INF_SENTINEL
    return encoded.tolist()


def _decode_tensor(raw: Any, name: str) -> np.ndarray:
    try:
        values = np.array(raw, dtype=object)
        if values.dtype == object:
            values[values == INF_SENTINEL] = math.inf
        return values.astype(float)
    except (ValueError, TypeError) as e:
        raise InstanceValidationError(
            f"{name}-shape", f"{name} is not a regular numeric tensor: {e}"
        ) from None


class _PeriodsDocument(BaseModel):
    model_config = ConfigDict(extra="forbid")

    k_max: int
    k_observ: int = 1


class _ScenarioDocument(BaseModel):
    model_config = ConfigDict(extra="forbid")

    prob: float
    demand: Any


class _CostsDocument(BaseModel):
    model_config = ConfigDict(extra="forbid")

    handling: Union[ParametricHandling, Any]
    opening: List[float]
    markdown: Union[float, List[float]] = 0.0
    discount_rate: float = 0.0


class _InstanceDocument(BaseModel):
    model_config = ConfigDict(extra="forbid")

    branches: List[str]
    sizes: List[str]
    lot_types: List[List[int]]
    multiplicities: List[int]
    max_lot_types: int
    supply_bounds: List[Any] = Field(min_length=2, max_length=2)
    periods: _PeriodsDocument
    prices: List[float]
    scenarios: List[_ScenarioDocument]
    costs: _CostsDocument
    require_full_size_run: bool = False


def validate_instance(document: Dict[str, Any]) -> Instance:
    r"""Check every instance invariant and build an :class:`Instance`.

    Args:
        document (Dict[str, Any]): Parsed JSON document.

    Returns:
        Instance: The validated instance, money values quantized.

    Raises:
        InstanceValidationError: Naming the first violated invariant.
    """
    try:
        doc = _InstanceDocument.model_validate(document)
    except ValidationError as e:
        first = e.errors()[0]
        location = ".".join(str(part) for part in first["loc"])
        raise InstanceValidationError(
            "schema", f"{location}: {first['msg']}"
        ) from None

    if not doc.branches or len(set(doc.branches)) != len(doc.branches):
        raise InstanceValidationError(
            "branches", "branches must be non-empty and unique"
        )
    if not doc.sizes or len(set(doc.sizes)) != len(doc.sizes):
        raise InstanceValidationError("sizes", "sizes must be non-empty and unique")
    num_branches, num_sizes = len(doc.branches), len(doc.sizes)

    if not doc.lot_types:
        raise InstanceValidationError("lot-types", "at least one lot-type required")
    for idx, counts in enumerate(doc.lot_types):
        if len(counts) != num_sizes:
            raise InstanceValidationError(
                "lot-types",
                f"lot-type {idx} has {len(counts)} entries, expected {num_sizes}",
            )
        if min(counts) < 0:
            raise InstanceValidationError(
                "lot-types", f"lot-type {idx} has a negative piece count"
            )
        if sum(counts) < 1:
            raise InstanceValidationError(
                "lot-types", f"lot-type {idx} has no pieces"
            )

    multiplicities = sorted(doc.multiplicities)
    if (
        not multiplicities
        or multiplicities[0] < 1
        or len(set(multiplicities)) != len(multiplicities)
    ):
        raise InstanceValidationError(
            "multiplicities", "multiplicities must be distinct positive integers"
        )

    if doc.max_lot_types < 1:
        raise InstanceValidationError(
            "max-lot-types", "max_lot_types must be at least 1"
        )
    if len(doc.costs.opening) != doc.max_lot_types:
        raise InstanceValidationError(
            "opening-costs",
            f"{len(doc.costs.opening)} opening costs given, "
            f"expected {doc.max_lot_types}",
        )
    if min(doc.costs.opening) < 0:
        raise InstanceValidationError(
            "opening-costs", "opening costs must be nonnegative"
        )

    lower, upper = doc.supply_bounds
    try:
        lower = int(lower)
        upper = None if upper in (None, INF_SENTINEL) else int(upper)
    except (TypeError, ValueError):
        raise InstanceValidationError(
            "supply-bounds", "supply bounds must be integers or 'inf'"
        ) from None
    if lower < 0 or (upper is not None and upper < lower):
        raise InstanceValidationError(
            "supply-bounds", f"supply bounds [{lower}, {upper}] are not ordered"
        )

    k_max, k_observ = doc.periods.k_max, doc.periods.k_observ
    if k_max < 2:
        raise InstanceValidationError("periods", "k_max must be at least 2")
    if not 1 <= k_observ < k_max:
        raise InstanceValidationError(
            "periods", f"k_observ must lie in [1, {k_max - 1}], got {k_observ}"
        )

    prices = tuple(money(p) for p in doc.prices)
    if len(prices) < 2:
        raise InstanceValidationError("prices", "at least two prices required")
    if any(a <= b for a, b in zip(prices, prices[1:])):
        raise InstanceValidationError("prices", "prices not strictly decreasing")
    if prices[-1] < 0:
        raise InstanceValidationError("prices", "salvage price must be nonnegative")
    num_prices = len(prices)

    if not doc.scenarios:
        raise InstanceValidationError("scenarios", "at least one scenario required")
    probabilities = tuple(float(s.prob) for s in doc.scenarios)
    if min(probabilities) < 0:
        raise InstanceValidationError(
            "probabilities", "probabilities must be nonnegative"
        )
    if abs(sum(probabilities) - 1.0) > 1e-12:
        raise InstanceValidationError(
            "probabilities", f"probabilities sum {sum(probabilities):.12g}"
        )

    expected_shape = (k_max + 1, num_prices, num_branches, num_sizes)
    tensors = []
    for e, scenario in enumerate(doc.scenarios):
        demand = _decode_tensor(scenario.demand, "demand")
        if demand.shape != expected_shape:
            raise InstanceValidationError(
                "demand-shape",
                f"scenario {e} demand has shape {demand.shape}, "
                f"expected {expected_shape}",
            )
        unbounded = np.isinf(demand)
        unbounded[k_max, num_prices - 1] = False
        if np.isnan(demand).any() or unbounded.any() or (demand < 0).any():
            raise InstanceValidationError(
                "demand",
                f"scenario {e} demand must be finite and nonnegative "
                "except at the salvage price in the final period",
            )
        tensors.append(demand)
    demand = np.stack(tensors)
    demand.setflags(write=False)

    lot_matrix = np.array(doc.lot_types, dtype=int)
    handling_form = None
    if isinstance(doc.costs.handling, ParametricHandling):
        handling_form = ParametricHandling(
            acquisition_per_item=money(doc.costs.handling.acquisition_per_item),
            pick_cost=money(doc.costs.handling.pick_cost),
        )
        handling_table = np.array(
            [
                [
                    [handling_form.cost(int(size), m) for m in multiplicities]
                    for size in lot_matrix.sum(axis=1)
                ]
            ]
            * num_branches,
            dtype=float,
        )
    else:
        handling_table = np.round(
            _decode_tensor(doc.costs.handling, "handling"), 4
        )
        shape = (num_branches, len(lot_matrix), len(multiplicities))
        if handling_table.shape != shape:
            raise InstanceValidationError(
                "handling-shape",
                f"handling table has shape {handling_table.shape}, "
                f"expected {shape}",
            )
        if not np.isfinite(handling_table).all():
            raise InstanceValidationError(
                "handling", "handling costs must be finite"
            )
        # columns follow the document's multiplicity order
        handling_table = np.ascontiguousarray(
            handling_table[:, :, np.argsort(doc.multiplicities)]
        )
    handling_table.setflags(write=False)

    markdown = doc.costs.markdown
    if isinstance(markdown, (int, float)):
        markdown = [markdown] * (k_max + 1)
    if len(markdown) != k_max + 1:
        raise InstanceValidationError(
            "markdown-costs",
            f"{len(markdown)} mark-down costs given, expected {k_max + 1}",
        )
    if min(markdown) < 0:
        raise InstanceValidationError(
            "markdown-costs", "mark-down costs must be nonnegative"
        )
    if doc.costs.discount_rate < 0:
        raise InstanceValidationError(
            "discount-rate", "discount rate must be nonnegative"
        )

    instance = Instance(
        branches=tuple(doc.branches),
        sizes=tuple(doc.sizes),
        lot_types=tuple(LotType(counts=tuple(c)) for c in doc.lot_types),
        multiplicities=tuple(multiplicities),
        max_lot_types=doc.max_lot_types,
        supply_lower=lower,
        supply_upper=upper,
        k_max=k_max,
        k_observ=k_observ,
        prices=prices,
        probabilities=probabilities,
        demand=demand,
        handling_table=handling_table,
        handling_form=handling_form,
        opening_costs=tuple(money(c) for c in doc.costs.opening),
        markdown_costs=tuple(money(c) for c in markdown),
        discount_rate=float(doc.costs.discount_rate),
        require_full_size_run=doc.require_full_size_run,
    )
    if not instance.usable_lot_types:
        raise InstanceValidationError(
            "full-size-run", "no lot-type contains every size"
        )
    return instance


def load_instance(path: Union[str, Path]) -> Instance:
    with open(path, "r", encoding="utf-8") as f:
        try:
            document = json.load(f)
        except json.JSONDecodeError as e:
            raise InstanceValidationError("json", f"{path}: {e}") from None
    return validate_instance(document)


def dump_instance(instance: Instance, path: Union[str, Path]) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(dumps_instance(instance))


def dumps_instance(instance: Instance) -> str:
    return json.dumps(instance.to_document(), separators=(",", ":"))


def inventory_from_assignment(
    assignment: LotAssignment, instance: Instance
) -> Tuple[np.ndarray, int]:
    r"""Return the ``(B, S)`` supply matrix and the total supply."""
    lots = np.array([lot for lot, _ in assignment.choices], dtype=int)
    mults = np.array([m for _, m in assignment.choices], dtype=int)
    supply = instance.lot_matrix[lots] * mults[:, None]
    return supply, int(supply.sum())


def supply_cost(assignment: LotAssignment, instance: Instance) -> float:
    r"""Handling plus opening cost of an assignment."""
    handling = sum(
        instance.handling_cost(b, lot, m)
        for b, (lot, m) in enumerate(assignment.choices)
    )
    return handling + instance.opening_total(len(assignment.lot_types_used()))


def ispo_objective(
    assignment: LotAssignment,
    trajectory_map: ScenarioTrajectoryMap,
    instance: Instance,
) -> float:
    r"""Expected discounted profit of a supply decision and one trajectory
    per scenario.

    Args:
        assignment (LotAssignment): Lot-type and multiplicity per branch.
        trajectory_map (ScenarioTrajectoryMap): One trajectory per scenario.
        instance (Instance): The instance.

    Returns:
        float: ``-handling - opening + sum_e prob(e) * POP_e``.

    Raises:
        InfeasibleError: If the assignment breaks the lot-type limit or the
            supply range.
        ValueError: If the assignment or the map does not fit the
            instance's branches, scenarios or periods.
    """
    assignment.check(instance)
    if len(trajectory_map.trajectories) != instance.num_scenarios:
        raise ValueError(
            f"trajectory map covers {len(trajectory_map.trajectories)} "
            f"scenarios, instance has {instance.num_scenarios}"
        )
    for e, trajectory in enumerate(trajectory_map.trajectories):
        if len(trajectory.prices) != instance.k_max + 1:
            raise ValueError(
                f"scenario {e}: trajectory spans {len(trajectory.prices) - 1} "
                f"periods, instance has k_max={instance.k_max}"
            )
        if trajectory.p_max != instance.p_max:
            raise ValueError(
                f"scenario {e}: trajectory ends at price index {trajectory.p_max}, "
                f"instance salvage index is {instance.p_max}"
            )
    supply, _ = inventory_from_assignment(assignment, instance)
    expected = 0.0
    for e, trajectory in enumerate(trajectory_map.trajectories):
        if instance.probabilities[e] == 0:
            continue
        result = simulate_sales(supply, e, trajectory, instance)
        expected += instance.probabilities[e] * result.value
    return expected - supply_cost(assignment, instance)


def map_markdown_cost(trajectory_map: ScenarioTrajectoryMap, instance: Instance) -> float:
    r"""Expected discounted mark-down cost of a scenario→trajectory map."""
    return sum(
        prob * markdown_cost(instance, trajectory)
        for prob, trajectory in zip(
            instance.probabilities, trajectory_map.trajectories
        )
    )


class GeneratorConfig(BaseModel):
    r"""Parameters of the synthetic instance generator.

    Demand follows ``scale * branch_weight * size_weight * decay**k *
    (1 + price_response * (p0 - p) / p0) * noise`` and every scenario scales
    that nominal tensor by its multiplier.
    """

    model_config = ConfigDict(frozen=True)

    num_branches: int = Field(default=4, ge=1)
    num_sizes: int = Field(default=2, ge=1)
    num_lot_types: int = Field(default=4, ge=1)
    max_pieces_per_size: int = Field(default=3, ge=1)
    multiplicities: Tuple[int, ...] = (1, 2)
    max_lot_types: int = Field(default=2, ge=1)
    k_max: int = Field(default=4, ge=2)
    k_observ: int = Field(default=1, ge=1)
    prices: Tuple[float, ...] = (10.0, 7.0, 3.0)
    scenario_multipliers: Tuple[float, ...] = (0.7, 1.3)
    scenario_probabilities: Optional[Tuple[float, ...]] = None
    demand_scale: float = Field(default=1.0, ge=0)
    period_decay: float = Field(default=0.85, gt=0)
    price_response: float = Field(default=1.5, ge=0)
    demand_noise: float = Field(default=0.2, ge=0, lt=1)
    unbounded_salvage: bool = True
    opening_first: float = Field(default=2.0, ge=0)
    opening_next: float = Field(default=1.0, ge=0)
    acquisition_per_item: float = Field(default=0.0, ge=0)
    pick_cost: float = Field(default=0.0545, ge=0)
    markdown_cost: float = Field(default=0.0, ge=0)
    discount_rate: float = Field(default=0.000974868, ge=0)
    supply_upper_factor: Optional[float] = Field(default=1.5, gt=0)
    require_full_size_run: bool = False

    @classmethod
    def tiny(cls) -> "GeneratorConfig":
        return cls()

    @classmethod
    def desk(cls) -> "GeneratorConfig":
        return cls(
            num_branches=30,
            num_sizes=5,
            num_lot_types=20,
            max_pieces_per_size=4,
            multiplicities=(1, 2, 3),
            max_lot_types=4,
            k_max=13,
            k_observ=2,
            prices=(29.99, 24.99, 19.99, 14.99, 4.99),
            scenario_multipliers=(0.7, 1.0, 1.3),
            demand_scale=0.8,
            opening_first=100.0,
            opening_next=50.0,
            supply_upper_factor=2.0,
        )

    @classmethod
    def field(cls) -> "GeneratorConfig":
        r"""Articles for simulated field studies. Per-period demand is small
        against a season's supply, so branches rarely sell out in the first
        period and realized outcomes spread over the season."""
        return cls(
            num_branches=16,
            num_sizes=3,
            num_lot_types=8,
            max_pieces_per_size=3,
            multiplicities=(1, 2, 3),
            max_lot_types=3,
            k_max=8,
            k_observ=2,
            demand_scale=0.6,
            supply_upper_factor=4.0,
        )


def generate_instance(config: GeneratorConfig, seed: int) -> Instance:
    r"""Generate a reproducible synthetic instance.

    Args:
        config (GeneratorConfig): Generator parameters.
        seed (int): Seed of the random generator.

    Returns:
        Instance: A validated instance; identical inputs give identical
            documents.
    """
    rng = np.random.default_rng(seed)
    num_branches, num_sizes = config.num_branches, config.num_sizes
    capacity = (config.max_pieces_per_size + 1) ** num_sizes - 1
    if config.num_lot_types > capacity:
        raise ValueError(
            f"cannot draw {config.num_lot_types} distinct lot-types "
            f"with at most {config.max_pieces_per_size} pieces per size"
        )

    lot_types = [tuple([1] * num_sizes)]
    seen = set(lot_types)
    while len(lot_types) < config.num_lot_types:
        candidate = tuple(
            int(c)
            for c in rng.integers(
                0, config.max_pieces_per_size + 1, size=num_sizes
            )
        )
        if sum(candidate) == 0 or candidate in seen:
            continue
        seen.add(candidate)
        lot_types.append(candidate)

    k_max = config.k_max
    prices = np.asarray(config.prices, dtype=float)
    branch_weight = rng.lognormal(0.0, 0.4, size=num_branches)
    size_weight = rng.dirichlet(np.ones(num_sizes)) * num_sizes
    noise = rng.uniform(
        1.0 - config.demand_noise,
        1.0 + config.demand_noise,
        size=(k_max + 1, num_branches, num_sizes),
    )
    decay = config.period_decay ** np.arange(k_max + 1)
    boost = 1.0 + config.price_response * (prices[0] - prices) / prices[0]
    nominal = (
        config.demand_scale
        * decay[:, None, None, None]
        * boost[None, :, None, None]
        * branch_weight[None, None, :, None]
        * size_weight[None, None, None, :]
        * noise[:, None, :, :]
    )
    nominal = np.round(nominal, 4)

    multipliers = config.scenario_multipliers
    probabilities = config.scenario_probabilities or tuple(
        [1.0 / len(multipliers)] * len(multipliers)
    )
    scenarios = []
    for multiplier, prob in zip(multipliers, probabilities):
        demand = multiplier * nominal
        if config.unbounded_salvage:
            demand[k_max, len(prices) - 1] = np.inf
        scenarios.append({"prob": float(prob), "demand": _encode_tensor(demand)})

    base = num_branches * num_sizes * min(config.multiplicities)
    upper: Union[int, str] = INF_SENTINEL
    if config.supply_upper_factor is not None:
        upper = int(math.ceil(base * config.supply_upper_factor))
    opening = [config.opening_first] + [config.opening_next] * (
        config.max_lot_types - 1
    )

    document = {
        "branches": [f"B{b:03d}" for b in range(num_branches)],
        "sizes": [f"S{s}" for s in range(num_sizes)],
        "lot_types": [list(lot) for lot in lot_types],
        "multiplicities": list(config.multiplicities),
        "max_lot_types": config.max_lot_types,
        "supply_bounds": [base // 2, upper],
        "periods": {"k_max": k_max, "k_observ": config.k_observ},
        "prices": list(config.prices),
        "scenarios": scenarios,
        "costs": {
            "handling": {
                "acquisition_per_item": config.acquisition_per_item,
                "pick_cost": config.pick_cost,
            },
            "opening": opening,
            "markdown": config.markdown_cost,
            "discount_rate": config.discount_rate,
        },
        "require_full_size_run": config.require_full_size_run,
    }
    instance = validate_instance(document)
    logger.debug(
        f"Generated instance seed={seed}: {num_branches} branches, "
        f"{len(lot_types)} lot-types, {len(scenarios)} scenarios"
    )
    return instance
