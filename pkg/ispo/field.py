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
r"""Simulated field study: sales realization, receding-horizon pricing,
relative realized operative profit and the exact signed-rank test."""

import abc
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from camel.logger import get_logger
from pydantic import BaseModel, ConfigDict, Field
from scipy import stats

from .exceptions import OddBranchCountError, RroUndefinedError, WilcoxonTieError
from .model import (
    GeneratorConfig,
    Instance,
    LotAssignment,
    generate_instance,
    inventory_from_assignment,
    load_instance,
)
from .pingpong import PingPongParams, solve_pingpong
from .sop import SfaParams, distance_coefficients, sfa_heuristic
from .trajectory import (
    PriceTrajectory,
    ScenarioTrajectoryMap,
    enumerate_tails,
    select_best,
    trajectory_array,
)
from .utils.common import ordered_map

logger = get_logger(__name__)

DATA_DIR = Path(__file__).parent / "data"
MAX_EXACT_PAIRS = 64

Seed = Union[int, np.random.Generator, np.random.SeedSequence]


# --------------------------------------------------------------------------
# Exact Wilcoxon signed-rank test
# --------------------------------------------------------------------------


@lru_cache(maxsize=None)
def wilcoxon_null_counts(n: int) -> Tuple[int, ...]:
    r"""Number of sign patterns of ranks ``1..n`` per positive rank sum."""
    if not isinstance(n, int) or n < 0 or n > MAX_EXACT_PAIRS:
        raise ValueError(f"n must be an integer in [0, {MAX_EXACT_PAIRS}], got {n}")
    top = n * (n + 1) // 2
    counts = [1] + [0] * top
    for rank in range(1, n + 1):
        for total in range(top, rank - 1, -1):
            counts[total] += counts[total - rank]
    return tuple(counts)


def wilcoxon_exact_tail(n: int, k: int) -> float:
    r"""``P(W+ >= k)`` under the null hypothesis for ``n`` pairs.

    Args:
        n (int): Number of pairs, ``0 <= n <= 64``.
        k (int): Observed positive rank sum, ``0 <= k <= n(n+1)/2``.

    Returns:
        float: The one-sided p-value.
    """
    counts = wilcoxon_null_counts(n)
    if not isinstance(k, (int, np.integer)) or k < 0 or k >= len(counts):
        raise ValueError(f"k must be an integer in [0, {len(counts) - 1}], got {k}")
    return float(Fraction(sum(counts[int(k) :]), 2**n))


class WilcoxonResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    n: int
    w_plus: int
    w_minus: int
    p_value: float
    signed_ranks: Tuple[int, ...]


def wilcoxon_signed_rank(differences: Sequence[float]) -> WilcoxonResult:
    r"""Exact one-sided signed-rank test of ``differences > 0``.

    Args:
        differences (Sequence[float]): Paired differences, test minus
            control.

    Returns:
        WilcoxonResult: Rank sums, signed ranks in input order and the
            exact p-value.

    Raises:
        WilcoxonTieError: If a difference is zero or two magnitudes tie.
    """
    values = np.asarray(differences, dtype=float)
    if (values == 0).any():
        index = int(np.flatnonzero(values == 0)[0])
        raise WilcoxonTieError(f"zero difference at pair {index}")
    magnitude = np.abs(values)
    if len(np.unique(magnitude)) != len(magnitude):
        raise WilcoxonTieError("tied absolute differences")
    ranks = np.empty(len(values), dtype=int)
    ranks[np.argsort(magnitude, kind="stable")] = np.arange(1, len(values) + 1)
    w_plus = int(ranks[values > 0].sum())
    w_minus = int(ranks[values < 0].sum())
    return WilcoxonResult(
        n=len(values),
        w_plus=w_plus,
        w_minus=w_minus,
        p_value=wilcoxon_exact_tail(len(values), w_plus),
        signed_ranks=tuple(int(r) for r in np.sign(values).astype(int) * ranks),
    )


def wilcoxon_randomized_p(result: WilcoxonResult, u: float) -> float:
    r"""``P(W+ > w) + u * P(W+ = w)``; exactly uniform under the null
    hypothesis when ``u`` is uniform on ``[0, 1)``."""
    counts = wilcoxon_null_counts(result.n)
    above = sum(counts[result.w_plus + 1 :])
    return float((above + u * counts[result.w_plus]) / 2**result.n)


def ks_uniformity(pvalues: Sequence[float]) -> float:
    r"""Kolmogorov-Smirnov p-value of ``pvalues`` against U(0, 1)."""
    return float(stats.kstest(np.asarray(pvalues, dtype=float), "uniform").pvalue)


def load_fixture(name: str) -> pd.DataFrame:
    r"""Load a paired-outcome fixture (``field_study_a`` or ``field_study_b``)."""
    path = DATA_DIR / f"{name}.csv"
    if not path.exists():
        raise FileNotFoundError(f"no fixture named {name!r}")
    return pd.read_csv(path)


# --------------------------------------------------------------------------
# Pricing policies
# --------------------------------------------------------------------------


class PricingPolicy(abc.ABC):
    r"""Sets the price index of every period from observed sales."""

    def start(self, instance: Instance, scenario: int, supply: np.ndarray) -> None:
        self.instance = instance
        self.scenario = scenario

    @abc.abstractmethod
    def price(self, period: int) -> int:
        pass

    def observe(self, period: int, sales: np.ndarray) -> None:
        pass


class OpenLoopPolicy(PricingPolicy):
    r"""Follows a fixed trajectory per scenario."""

    def __init__(self, trajectory_map: ScenarioTrajectoryMap):
        self.trajectory_map = trajectory_map

    def price(self, period: int) -> int:
        return self.trajectory_map.trajectories[self.scenario].prices[period]


class FixedSchedulePolicy(PricingPolicy):
    r"""Follows one trajectory whatever the scenario."""

    def __init__(self, trajectory: PriceTrajectory):
        self.trajectory = trajectory

    def price(self, period: int) -> int:
        return self.trajectory.prices[period]


def default_manual_schedule(instance: Instance, step_every: int = 3) -> PriceTrajectory:
    r"""One mark-down step every ``step_every`` periods from ``k_observ`` on."""
    prices = [0]
    for period in range(1, instance.k_max):
        steps = 0
        if period >= instance.k_observ:
            steps = 1 + (period - instance.k_observ) // step_every
        prices.append(min(steps, instance.p_max - 1))
    prices.append(instance.p_max)
    return PriceTrajectory(prices=tuple(prices))


class RhPopParams(BaseModel):
    r"""Parameters of receding-horizon pricing.

    Args:
        smoothing (float): Weight of the latest demand observation in the
            level update. (default: :obj:`0.5`)
        initial_alpha (float): Initial demand level. (default: :obj:`1.0`)
        window (int): Periods ahead in which a planned mark-down is acted
            on. (default: :obj:`2`)
        alpha_floor (float): Smallest admissible demand level.
            (default: :obj:`1e-3`)
    """

    model_config = ConfigDict(frozen=True)

    smoothing: float = Field(default=0.5, gt=0, le=1)
    initial_alpha: float = Field(default=1.0, gt=0)
    window: int = Field(default=2, ge=1)
    alpha_floor: float = Field(default=1e-3, gt=0)


class RhState(BaseModel):
    r"""Receding-horizon state before the sales of ``period`` are observed.

    Args:
        period (int): Current period.
        history (Tuple[int, ...]): Price indices of periods ``0..period``.
        stock (np.ndarray): Stock ``(B, S)`` at the start of ``period``.
        alpha (float): Current demand level multiplier.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    period: int
    history: Tuple[int, ...]
    stock: np.ndarray
    alpha: float

    @property
    def price_index(self) -> int:
        return self.history[-1]


class MarkdownDecision(BaseModel):
    model_config = ConfigDict(frozen=True)

    period: int
    price_index: int
    markdown: bool
    plan: Optional[PriceTrajectory] = None


def initial_rh_state(
    instance: Instance, supply: np.ndarray, params: Optional[RhPopParams] = None
) -> RhState:
    params = params or RhPopParams()
    return RhState(
        period=0,
        history=(0,),
        stock=np.asarray(supply, dtype=float),
        alpha=params.initial_alpha,
    )


def _plan_values(
    instance: Instance,
    stock: np.ndarray,
    demand: np.ndarray,
    plans: Sequence[PriceTrajectory],
    start: int,
) -> np.ndarray:
    paths = trajectory_array(plans)
    remaining = np.broadcast_to(stock, (len(plans),) + stock.shape).copy()
    values = np.zeros(len(plans))
    discount = instance.discount_factors
    for k in range(start, instance.k_max + 1):
        sold = np.minimum(remaining, demand[k, paths[:, k]])
        values += discount[k] * instance.price_array[paths[:, k]] * sold.sum(axis=(1, 2))
        remaining -= sold
        changed = paths[:, k] != paths[:, k - 1]
        values -= discount[k] * instance.markdown_costs[k] * changed
    return values


def rhpop_step(
    state: RhState,
    observed_sales: np.ndarray,
    instance: Instance,
    params: Optional[RhPopParams] = None,
    forecast: Optional[np.ndarray] = None,
) -> Tuple[RhState, MarkdownDecision]:
    r"""Observe one period of sales, update the demand level and decide the
    next period's price.

    Args:
        state (RhState): State before the observation.
        observed_sales (np.ndarray): Sales ``(B, S)`` of ``state.period``.
        instance (Instance): The instance.
        params (RhPopParams, optional): Parameters. (default: :obj:`None`)
        forecast (np.ndarray, optional): Demand forecast
            ``(k_max + 1, p_max + 1, B, S)``; defaults to the
            probability-weighted demand. (default: :obj:`None`)

    Returns:
        Tuple[RhState, MarkdownDecision]: The next state and the price
            decision for the next period.
    """
    params = params or RhPopParams()
    if forecast is None:
        forecast = instance.mean_demand()
    k = state.period
    if k >= instance.k_max:
        raise ValueError("the selling season is over")
    observed = np.asarray(observed_sales, dtype=float)
    if (observed > state.stock + 1e-9).any() or (observed < 0).any():
        raise ValueError("observed sales exceed the available stock")

    expected = state.alpha * forecast[k, state.price_index]
    predicted = float(np.minimum(state.stock, expected).sum())
    alpha = state.alpha
    if predicted > 0:
        ratio = float(observed.sum()) / predicted
        alpha = alpha * (1 - params.smoothing) + params.smoothing * alpha * ratio
        alpha = max(alpha, params.alpha_floor)
    stock = state.stock - observed

    current = state.price_index
    nxt = k + 1
    if nxt == instance.k_max:
        decision = MarkdownDecision(
            period=nxt, price_index=instance.p_max, markdown=True
        )
    else:
        plans = enumerate_tails(
            instance.k_max, instance.p_max, state.history, instance.k_observ
        )
        values = _plan_values(instance, stock, alpha * forecast, plans, nxt)
        plan = plans[select_best(values, plans)]
        window = range(nxt, min(nxt + params.window, instance.k_max))
        target = next((plan.prices[j] for j in window if plan.prices[j] > current), None)
        if target is not None and nxt >= instance.k_observ:
            decision = MarkdownDecision(
                period=nxt, price_index=target, markdown=True, plan=plan
            )
        else:
            decision = MarkdownDecision(
                period=nxt, price_index=current, markdown=False, plan=plan
            )
    logger.debug(
        f"RH-POP period {k}: predicted {predicted:.2f}, "
        f"observed {observed.sum():.2f}, alpha {alpha:.4f}, "
        f"next price index {decision.price_index}"
    )
    next_state = RhState(
        period=nxt,
        history=state.history + (decision.price_index,),
        stock=stock,
        alpha=alpha,
    )
    return next_state, decision


class RhPopPolicy(PricingPolicy):
    r"""Receding-horizon pricing driven by :func:`rhpop_step`."""

    def __init__(self, params: Optional[RhPopParams] = None):
        self.params = params or RhPopParams()
        self.decisions: List[MarkdownDecision] = []

    def start(self, instance: Instance, scenario: int, supply: np.ndarray) -> None:
        super().start(instance, scenario, supply)
        self.state = initial_rh_state(instance, supply, self.params)
        self.forecast = instance.mean_demand()
        self.decisions = []

    def price(self, period: int) -> int:
        return self.state.history[period]

    def observe(self, period: int, sales: np.ndarray) -> None:
        if period >= self.instance.k_max:
            return
        self.state, decision = rhpop_step(
            self.state, sales, self.instance, self.params, self.forecast
        )
        self.decisions.append(decision)


# --------------------------------------------------------------------------
# Sales realization and performance measures
# --------------------------------------------------------------------------


class Realization(BaseModel):
    r"""Realized prices and integer sales of one selling season."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    scenario: int
    prices: Tuple[int, ...]
    supply: np.ndarray
    stock: np.ndarray
    sales: np.ndarray

    @property
    def markdown_flags(self) -> Tuple[int, ...]:
        return (0,) + tuple(
            int(b != a) for a, b in zip(self.prices, self.prices[1:])
        )

    def discounted_yields(self, instance: Instance) -> np.ndarray:
        r"""Discounted yield per branch and size ``(B, S)``."""
        weights = instance.discount_factors * instance.price_array[list(self.prices)]
        return np.tensordot(weights, self.sales, axes=(0, 0))


def realize_sales(
    instance: Instance,
    supply: np.ndarray,
    policy: PricingPolicy,
    seed: Seed,
    scenario: Optional[int] = None,
) -> Realization:
    r"""Draw integer sales period by period under a pricing policy.

    Demand of each cell is Poisson with the scenario mean at the chosen
    price; sales are truncated at the stock. Unbounded demand sells the
    whole stock.

    Args:
        instance (Instance): The instance.
        supply (np.ndarray): Integer supply ``(B, S)``.
        policy (PricingPolicy): Pricing policy.
        seed (Seed): Seed or generator.
        scenario (int, optional): Scenario; drawn from the probabilities
            when omitted. (default: :obj:`None`)

    Returns:
        Realization: Prices, stock and sales per period.
    """
    rng = np.random.default_rng(seed)
    if scenario is None:
        scenario = int(rng.choice(instance.num_scenarios, p=instance.probabilities))
    stock = np.asarray(supply, dtype=np.int64).copy()
    policy.start(instance, scenario, stock.copy())
    shape = (instance.k_max + 1,) + stock.shape
    stocks = np.zeros(shape, dtype=np.int64)
    sales = np.zeros(shape, dtype=np.int64)
    prices = []
    for k in range(instance.k_max + 1):
        price = instance.p_max if k == instance.k_max else int(policy.price(k))
        if prices and price < prices[-1]:
            raise ValueError(f"policy marks up in period {k}")
        prices.append(price)
        mean = instance.demand[scenario, k, price]
        unbounded = np.isinf(mean)
        draws = rng.poisson(np.where(unbounded, 0.0, mean))
        draws = np.where(unbounded, stock, draws)
        stocks[k] = stock
        sales[k] = np.minimum(stock, draws)
        stock = stock - sales[k]
        policy.observe(k, sales[k])
    return Realization(
        scenario=scenario,
        prices=tuple(prices),
        supply=np.asarray(supply, dtype=np.int64),
        stock=stocks,
        sales=sales,
    )


class RroTerms(BaseModel):
    r"""Additive parts of the performance measures of a branch subset."""

    model_config = ConfigDict(frozen=True)

    numerator: float
    denominator: float
    discounted_yield: float
    start_value: float
    units_sold: float
    units_supplied: float

    def __add__(self, other: "RroTerms") -> "RroTerms":
        return RroTerms(
            **{
                name: getattr(self, name) + getattr(other, name)
                for name in RroTerms.model_fields
            }
        )

    @property
    def rro(self) -> float:
        if self.denominator == 0:
            raise RroUndefinedError("zero denominator in relative realized profit")
        return self.numerator / self.denominator

    @property
    def relative_gross_yield(self) -> float:
        return self.discounted_yield / self.start_value if self.start_value else 0.0

    @property
    def relative_sales(self) -> float:
        return self.units_sold / self.units_supplied if self.units_supplied else 0.0


def rro_terms(
    realization: Realization,
    assignment: LotAssignment,
    instance: Instance,
    branches: Sequence[int],
) -> RroTerms:
    r"""Realized profit and reference value of a branch subset.

    Opening and mark-down costs are charged in proportion to the subset's
    share of all branches; handling costs of the subset are charged in full.
    """
    branches = list(branches)
    share = len(branches) / instance.num_branches
    handling = sum(
        instance.handling_cost(b, *assignment.choices[b]) for b in branches
    )
    opening = share * instance.opening_total(len(assignment.lot_types_used()))
    flags = np.asarray(realization.markdown_flags, dtype=float)
    markdown = share * float(
        (instance.discount_factors * instance.markdown_cost_array * flags).sum()
    )
    yields = float(realization.discounted_yields(instance)[branches].sum())
    supply = realization.supply[branches]
    start_value = float(supply.sum() * instance.prices[0])
    return RroTerms(
        numerator=-handling - opening + yields - markdown,
        denominator=-handling - opening + start_value,
        discounted_yield=yields,
        start_value=start_value,
        units_sold=float(realization.sales[:, branches].sum()),
        units_supplied=float(supply.sum()),
    )


def compute_rro(
    realization: Realization,
    assignment: LotAssignment,
    instance: Instance,
    branches: Sequence[int],
) -> float:
    r"""Relative realized operative profit of a branch subset."""
    return rro_terms(realization, assignment, instance, branches).rro


def prediction_gap(predicted: Union[float, np.ndarray], realized: Union[float, np.ndarray]):
    r"""Relative deviation ``(realized - predicted) / predicted``."""
    predicted = np.asarray(predicted, dtype=float)
    if (predicted == 0).any():
        raise ZeroDivisionError("predicted value is zero")
    gap = (np.asarray(realized, dtype=float) - predicted) / predicted
    return float(gap) if gap.ndim == 0 else gap


# --------------------------------------------------------------------------
# Paired field study
# --------------------------------------------------------------------------


class ArmMethod:
    r"""How one arm of the study decides supply and prices.

    Args:
        name (str): Label used in reports.
        supply (Callable[[Instance], LotAssignment]): Supply decision.
        policy (Callable[[Instance, LotAssignment], PricingPolicy]): Builds
            a fresh pricing policy per article.
    """

    def __init__(
        self,
        name: str,
        supply: Callable[[Instance], LotAssignment],
        policy: Callable[[Instance, LotAssignment], PricingPolicy],
    ):
        self.name = name
        self.supply = supply
        self.policy = policy


def ispo_method(
    params: Optional[PingPongParams] = None,
    rh_params: Optional[RhPopParams] = None,
) -> ArmMethod:
    r"""Two-stage supply by ping-pong with receding-horizon pricing."""
    return ArmMethod(
        "ispo",
        lambda instance: solve_pingpong(instance, params).solution.assignment,
        lambda instance, assignment: RhPopPolicy(rh_params),
    )


def baseline_method(step_every: int = 3, sfa: Optional[SfaParams] = None) -> ArmMethod:
    r"""Distance-to-forecast supply with a manual mark-down schedule."""
    return ArmMethod(
        "baseline",
        lambda instance: sfa_heuristic(
            distance_coefficients(instance), instance, sfa
        ).assignment,
        lambda instance, assignment: FixedSchedulePolicy(
            default_manual_schedule(instance, step_every)
        ),
    )


class PairedOutcome(BaseModel):
    model_config = ConfigDict(frozen=True)

    pair: int
    test_branch: str
    control_branch: str
    rro_test: float
    rro_control: float
    difference: float
    gross_yield_test: float
    gross_yield_control: float
    sales_test: float
    sales_control: float


class FieldStudyReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    seed: int
    outcomes: Tuple[PairedOutcome, ...]
    wilcoxon: Optional[WilcoxonResult] = None

    @property
    def differences(self) -> List[float]:
        return [o.difference for o in self.outcomes]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([o.model_dump() for o in self.outcomes])

    def summary(self) -> Dict[str, Optional[float]]:
        frame = self.to_frame()
        return {
            "pairs": len(self.outcomes),
            "mean_rro_test": float(frame["rro_test"].mean()),
            "mean_rro_control": float(frame["rro_control"].mean()),
            "mean_gross_yield_test": float(frame["gross_yield_test"].mean()),
            "mean_gross_yield_control": float(frame["gross_yield_control"].mean()),
            "mean_sales_test": float(frame["sales_test"].mean()),
            "mean_sales_control": float(frame["sales_control"].mean()),
            "w_plus": None if self.wilcoxon is None else self.wilcoxon.w_plus,
            "p_value": None if self.wilcoxon is None else self.wilcoxon.p_value,
        }


def pair_branches(metrics: Sequence[float]) -> List[Tuple[int, int]]:
    r"""Sort branches by ``metrics`` and pair neighbours."""
    if len(metrics) % 2:
        raise OddBranchCountError(
            f"{len(metrics)} branches cannot be split into pairs"
        )
    order = sorted(range(len(metrics)), key=lambda b: (metrics[b], b))
    return [(order[i], order[i + 1]) for i in range(0, len(order), 2)]


class FieldStudy:
    r"""Paired comparison of two methods on a set of articles.

    Branches are paired by a similarity metric once; every run flips a
    seeded coin per pair to pick the test branch, simulates every article
    under both methods and tests the per-pair RRO differences.

    Args:
        articles (Sequence[Instance]): Articles sharing one branch list.
        branch_metrics (Sequence[float]): Pairing metric per branch.
        test (ArmMethod): Method of the test branches.
        control (ArmMethod): Method of the control branches.
        workers (int): Threads, one article each. (default: :obj:`1`)
    """

    def __init__(
        self,
        articles: Sequence[Instance],
        branch_metrics: Sequence[float],
        test: ArmMethod,
        control: ArmMethod,
        workers: int = 1,
    ):
        if not articles:
            raise ValueError("at least one article required")
        branches = articles[0].branches
        if any(a.branches != branches for a in articles):
            raise ValueError("all articles must share the branch list")
        if len(branch_metrics) != len(branches):
            raise ValueError("one metric per branch required")
        self.articles = list(articles)
        self.pairs = pair_branches(branch_metrics)
        self.test = test
        self.control = control
        self.workers = workers
        self._supplies: Dict[Tuple[str, int], LotAssignment] = {}

    def _supply(self, method: ArmMethod, index: int) -> LotAssignment:
        key = (method.name, index)
        if key not in self._supplies:
            self._supplies[key] = method.supply(self.articles[index])
        return self._supplies[key]

    def _simulate(
        self,
        index: int,
        seed: np.random.SeedSequence,
        test_branches: List[int],
        control_branches: List[int],
    ) -> Tuple[List[RroTerms], List[RroTerms]]:
        instance = self.articles[index]
        rng = np.random.default_rng(seed)
        scenario = int(rng.choice(instance.num_scenarios, p=instance.probabilities))
        terms = []
        for method, branches in (
            (self.test, test_branches),
            (self.control, control_branches),
        ):
            assignment = self._supply(method, index)
            supply, _ = inventory_from_assignment(assignment, instance)
            masked = np.zeros_like(supply)
            masked[branches] = supply[branches]
            realization = realize_sales(
                instance,
                masked,
                method.policy(instance, assignment),
                rng,
                scenario=scenario,
            )
            terms.append(
                [rro_terms(realization, assignment, instance, [b]) for b in branches]
            )
        return terms[0], terms[1]

    def run(self, seed: int) -> FieldStudyReport:
        rng = np.random.default_rng(seed)
        flips = rng.integers(0, 2, size=len(self.pairs))
        test_branches = [pair[f] for pair, f in zip(self.pairs, flips)]
        control_branches = [pair[1 - f] for pair, f in zip(self.pairs, flips)]
        article_seeds = np.random.SeedSequence(seed).spawn(len(self.articles))

        per_article = ordered_map(
            lambda i: self._simulate(
                i, article_seeds[i], test_branches, control_branches
            ),
            range(len(self.articles)),
            workers=self.workers,
        )
        outcomes = []
        branch_names = self.articles[0].branches
        for i in range(len(self.pairs)):
            test_terms = per_article[0][0][i]
            control_terms = per_article[0][1][i]
            for article in per_article[1:]:
                test_terms = test_terms + article[0][i]
                control_terms = control_terms + article[1][i]
            outcomes.append(
                PairedOutcome(
                    pair=i,
                    test_branch=branch_names[test_branches[i]],
                    control_branch=branch_names[control_branches[i]],
                    rro_test=test_terms.rro,
                    rro_control=control_terms.rro,
                    difference=test_terms.rro - control_terms.rro,
                    gross_yield_test=test_terms.relative_gross_yield,
                    gross_yield_control=control_terms.relative_gross_yield,
                    sales_test=test_terms.relative_sales,
                    sales_control=control_terms.relative_sales,
                )
            )
        try:
            wilcoxon = wilcoxon_signed_rank([o.difference for o in outcomes])
        except WilcoxonTieError as e:
            logger.warning(f"Field study seed {seed}: no signed-rank test ({e})")
            wilcoxon = None
        return FieldStudyReport(seed=seed, outcomes=tuple(outcomes), wilcoxon=wilcoxon)


def run_field_study(
    articles: Sequence[Instance],
    branch_metrics: Sequence[float],
    seed: int,
    test: Optional[ArmMethod] = None,
    control: Optional[ArmMethod] = None,
    workers: int = 1,
) -> FieldStudyReport:
    r"""Run one simulated paired field study.

    Args:
        articles (Sequence[Instance]): Articles sharing one branch list.
        branch_metrics (Sequence[float]): Pairing metric per branch.
        seed (int): Seed of the coin flips and the sales draws.
        test (ArmMethod, optional): Defaults to :func:`ispo_method`.
            (default: :obj:`None`)
        control (ArmMethod, optional): Defaults to :func:`baseline_method`.
            (default: :obj:`None`)
        workers (int): Threads. (default: :obj:`1`)

    Returns:
        FieldStudyReport: Per-pair outcomes and the signed-rank test.
    """
    study = FieldStudy(
        articles,
        branch_metrics,
        test or ispo_method(),
        control or baseline_method(),
        workers=workers,
    )
    return study.run(seed)


METHODS: Dict[str, Callable[[], ArmMethod]] = {
    "ispo": ispo_method,
    "baseline": baseline_method,
}


def default_branch_metrics(articles: Sequence[Instance]) -> List[float]:
    r"""Expected full-price demand per branch over all articles."""
    total = np.zeros(articles[0].num_branches)
    for instance in articles:
        forecast = instance.mean_demand()[: instance.k_max, 0]
        total += forecast.sum(axis=(0, 2))
    return total.tolist()


class FieldStudyConfig(BaseModel):
    r"""File-based description of a field study.

    Args:
        instances (List[str]): Instance files, one per article. Relative
            paths resolve against the config file. (default: :obj:`[]`)
        generator (GeneratorConfig, optional): Generates ``articles``
            instances with seeds ``0..articles-1`` when no files are given.
            (default: :obj:`None`)
        articles (int): Number of generated articles. (default: :obj:`1`)
        test (str): Method of the test arm. (default: :obj:`"ispo"`)
        control (str): Method of the control arm.
            (default: :obj:`"baseline"`)
        branch_metrics (List[float], optional): Pairing metric per branch;
            expected full-price demand when omitted. (default: :obj:`None`)
        runs (int): Independent runs with seeds ``seed..seed+runs-1``.
            (default: :obj:`1`)
        workers (int): Threads. (default: :obj:`1`)
    """

    model_config = ConfigDict(frozen=True)

    instances: List[str] = Field(default_factory=list)
    generator: Optional[GeneratorConfig] = None
    articles: int = Field(default=1, ge=1)
    test: str = "ispo"
    control: str = "baseline"
    branch_metrics: Optional[List[float]] = None
    runs: int = Field(default=1, ge=1)
    workers: int = Field(default=1, ge=1)

    @classmethod
    def load(cls, path: Union[str, Path]) -> "FieldStudyConfig":
        config = cls.model_validate_json(Path(path).read_text(encoding="utf-8"))
        base = Path(path).parent
        return config.model_copy(
            update={"instances": [str(base / p) for p in config.instances]}
        )

    def load_articles(self) -> List[Instance]:
        if self.instances:
            return [load_instance(path) for path in self.instances]
        if self.generator is None:
            raise ValueError("field study needs instance files or a generator")
        return [generate_instance(self.generator, seed) for seed in range(self.articles)]

    def method(self, name: str) -> ArmMethod:
        if name not in METHODS:
            raise ValueError(f"unknown method {name!r}; choose from {sorted(METHODS)}")
        return METHODS[name]()

    def run(self, seed: int) -> List[FieldStudyReport]:
        articles = self.load_articles()
        metrics = self.branch_metrics or default_branch_metrics(articles)
        study = FieldStudy(
            articles,
            metrics,
            self.method(self.test),
            self.method(self.control),
            workers=self.workers,
        )
        return [study.run(seed + offset) for offset in range(self.runs)]
