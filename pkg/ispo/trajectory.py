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
from itertools import combinations, combinations_with_replacement
from math import comb
from typing import List, Sequence, Tuple, Union

import numpy as np
from camel.logger import get_logger
from pydantic import BaseModel, ConfigDict, field_validator

from .utils.common import TOLERANCE

logger = get_logger(__name__)

STAR = "*"


class PriceTrajectory(BaseModel):
    r"""Price index per period ``0..k_max``.

    Index 0 is the start price and the last entry is always the salvage
    index ``p_max``. Indices never decrease (no mark-ups).
    """

    model_config = ConfigDict(frozen=True)

    prices: Tuple[int, ...]

    @field_validator("prices")
    @classmethod
    def _check_prices(cls, prices: Tuple[int, ...]) -> Tuple[int, ...]:
        if len(prices) < 3:
            raise ValueError("a trajectory spans at least periods 0..2")
        if prices[0] != 0:
            raise ValueError("a trajectory starts at the start price")
        if any(a > b for a, b in zip(prices, prices[1:])):
            raise ValueError("price indices must be non-decreasing")
        if prices[-2] >= prices[-1]:
            raise ValueError("the salvage price is reached only in the final period")
        return prices

    @property
    def k_max(self) -> int:
        return len(self.prices) - 1

    @property
    def p_max(self) -> int:
        return self.prices[-1]

    def price_at(self, period: int) -> int:
        if not 0 <= period <= self.k_max:
            raise IndexError(f"period {period} outside 0..{self.k_max}")
        return self.prices[period]

    @property
    def markdown_flags(self) -> Tuple[int, ...]:
        r"""``1`` in every period whose price differs from the previous one."""
        return (0,) + tuple(
            int(b != a) for a, b in zip(self.prices, self.prices[1:])
        )

    @property
    def markdown_count(self) -> int:
        return sum(self.markdown_flags)

    def preference_key(self) -> Tuple[int, Tuple[int, ...]]:
        r"""Sort key among equally valued trajectories: fewer mark-downs
        first, then later mark-downs."""
        return self.markdown_count, self.prices

    def encoding(self) -> Tuple[Union[int, str], ...]:
        r"""Star encoding: periods ``1..k_max-1`` with one ``*`` per price
        step inserted before the period that takes it."""
        tokens: List[Union[int, str]] = []
        previous = 0
        for period in range(1, self.k_max):
            tokens.extend([STAR] * (self.prices[period] - previous))
            tokens.append(period)
            previous = self.prices[period]
        tokens.extend([STAR] * (self.p_max - 1 - previous))
        return tuple(tokens)

    def label(self) -> str:
        return ",".join(f"p{p}" for p in self.prices)


class ScenarioTrajectoryMap(BaseModel):
    r"""One price trajectory per scenario."""

    model_config = ConfigDict(frozen=True)

    trajectories: Tuple[PriceTrajectory, ...]

    def label(self) -> str:
        return ";".join(t.label() for t in self.trajectories)


def trajectory_count(k_max: int, p_max: int) -> int:
    r"""Number of trajectories before the observation filter."""
    return comb(k_max + p_max - 2, p_max - 1)


def _check_horizon(k_max: int, p_max: int, k_observ: int) -> None:
    if k_max < 2:
        raise ValueError(f"k_max must be at least 2, got {k_max}")
    if p_max < 1:
        raise ValueError(f"p_max must be at least 1, got {p_max}")
    if not 1 <= k_observ < k_max:
        raise ValueError(f"k_observ must lie in [1, {k_max - 1}]")


def enumerate_trajectories(
    k_max: int, p_max: int, k_observ: int = 1
) -> List[PriceTrajectory]:
    r"""Enumerate every admissible trajectory via star placements.

    Star positions are visited in lexicographic order; trajectories that
    mark down before ``k_observ`` are dropped and duplicates are removed.

    Args:
        k_max (int): Final (salvage) period.
        p_max (int): Salvage price index.
        k_observ (int): First period in which a mark-down may take effect.
            (default: :obj:`1`)

    Returns:
        List[PriceTrajectory]: Trajectories in enumeration order.
    """
    _check_horizon(k_max, p_max, k_observ)
    numbers, stars = k_max - 1, p_max - 1
    found = {}
    for positions in combinations(range(numbers + stars), stars):
        star_slots = set(positions)
        prices, level = [0], 0
        for slot in range(numbers + stars):
            if slot in star_slots:
                level += 1
            else:
                prices.append(level)
        prices.append(p_max)
        if any(prices[k] != 0 for k in range(1, k_observ)):
            continue
        trajectory = PriceTrajectory(prices=tuple(prices))
        found.setdefault(trajectory.prices, trajectory)
    logger.debug(
        f"Enumerated {len(found)} trajectories for k_max={k_max}, p_max={p_max}, "
        f"k_observ={k_observ}"
    )
    return list(found.values())


def enumerate_tails(
    k_max: int,
    p_max: int,
    prefix: Sequence[int],
    k_observ: int = 1,
) -> List[PriceTrajectory]:
    r"""Enumerate completions of a realized price history.

    Args:
        k_max (int): Final (salvage) period.
        p_max (int): Salvage price index.
        prefix (Sequence[int]): Price indices of periods already fixed,
            starting with period 0.
        k_observ (int): First period in which a mark-down may take effect.
            (default: :obj:`1`)

    Returns:
        List[PriceTrajectory]: Full trajectories that extend ``prefix``
            without mark-ups.
    """
    _check_horizon(k_max, p_max, k_observ)
    start = len(prefix)
    if start < 1 or start > k_max:
        raise ValueError(f"prefix must cover 1..{k_max} periods, got {start}")
    current = prefix[-1]
    if current >= p_max:
        raise ValueError("the prefix already reached the salvage price")
    tails = []
    for tail in combinations_with_replacement(
        range(current, p_max), k_max - start
    ):
        prices = tuple(prefix) + tail + (p_max,)
        if any(prices[k] != 0 for k in range(1, min(k_observ, k_max))):
            continue
        tails.append(PriceTrajectory(prices=prices))
    return tails


def parse_trajectory(text: str) -> PriceTrajectory:
    r"""Parse ``p0,p0,p1,p2`` (or ``0,0,1,2``) into a trajectory."""
    try:
        prices = tuple(int(token.strip().lstrip("pP")) for token in text.split(","))
    except ValueError:
        raise ValueError(f"cannot parse trajectory {text!r}") from None
    return PriceTrajectory(prices=prices)


def trajectory_array(trajectories: Sequence[PriceTrajectory]) -> np.ndarray:
    r"""Stack trajectories into an integer array of shape ``(T, k_max + 1)``."""
    return np.array([t.prices for t in trajectories], dtype=int)


def select_best(values: Sequence[float], trajectories: Sequence[PriceTrajectory]) -> int:
    r"""Index of the highest value; near-ties go to the preferred
    trajectory."""
    values = np.asarray(values, dtype=float)
    best = float(values.max())
    candidates = np.flatnonzero(
        values >= best - TOLERANCE * max(1.0, abs(best))
    )
    return int(min(candidates, key=lambda i: trajectories[i].preference_key()))
