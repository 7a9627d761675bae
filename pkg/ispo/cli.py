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
r"""Command-line entry point ``ispo`` and the deterministic-equivalent LP
export."""

import argparse
import json
import sys
from functools import partial
from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Union

import numpy as np
import pandas as pd
from camel.logger import get_logger
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from .bnb import GAP_BOUNDED, BnbParams, solve_ispo_exact
from .bounds import ScenarioBounds, compute_bound_table, exact_bound
from .exceptions import (
    InfeasibleError,
    InstanceValidationError,
    IspoError,
    WilcoxonTieError,
    WorkLimitExceeded,
)
from .field import (
    FieldStudyConfig,
    RhPopPolicy,
    compute_rro,
    ks_uniformity,
    realize_sales,
    wilcoxon_signed_rank,
)
from .model import (
    GeneratorConfig,
    Instance,
    LotAssignment,
    dumps_instance,
    generate_instance,
    inventory_from_assignment,
    load_instance,
    supply_cost,
)
from .pingpong import PingPongParams, initial_map, solve_pingpong
from .salesdyn import solve_pop_exact
from .sop import SfaParams, modified_costs, sfa_heuristic, solve_sop_exact
from .trajectory import ScenarioTrajectoryMap, enumerate_trajectories, parse_trajectory
from .utils.common import Settings, load_settings, setup_logging
from .utils.lp_writer import LpSummary, LpWriter, index_name

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_INFEASIBLE = 3
EXIT_RESOURCE = 4


# --------------------------------------------------------------------------
# LP export
# --------------------------------------------------------------------------


class LpDimensions(BaseModel):
    r"""Sizes that determine the row and column counts of the
    deterministic equivalent.

    Args:
        branches (int): Number of branches.
        sizes (int): Number of sizes.
        lot_types (int): Number of usable lot-types.
        multiplicities (int): Number of multiplicities.
        max_lot_types (int): Lot-type limit.
        k_max (int): Salvage period.
        prices (int): Number of price levels including salvage.
        scenarios (int): Number of scenarios.
        k_observ (int): First period a mark-down is allowed.
        unbounded_demand (int, optional): Number of unbounded demand
            entries; one per scenario, branch and size when omitted.
            (default: :obj:`None`)
    """

    model_config = ConfigDict(frozen=True)

    branches: int = Field(ge=1)
    sizes: int = Field(ge=1)
    lot_types: int = Field(ge=1)
    multiplicities: int = Field(ge=1)
    max_lot_types: int = Field(ge=1)
    k_max: int = Field(ge=2)
    prices: int = Field(ge=2)
    scenarios: int = Field(ge=1)
    k_observ: int = Field(default=1, ge=1)
    unbounded_demand: Optional[int] = None

    @classmethod
    def from_instance(cls, instance: Instance) -> "LpDimensions":
        return cls(
            branches=instance.num_branches,
            sizes=instance.num_sizes,
            lot_types=len(instance.usable_lot_types),
            multiplicities=len(instance.multiplicities),
            max_lot_types=instance.max_lot_types,
            k_max=instance.k_max,
            prices=instance.p_max + 1,
            scenarios=instance.num_scenarios,
            k_observ=instance.k_observ,
            unbounded_demand=int(np.isinf(instance.demand).sum()),
        )


def lp_family_counts(dims: LpDimensions, tight: bool = False) -> LpSummary:
    r"""Closed-form variable and constraint counts of :func:`export_lp`.

    Args:
        dims (LpDimensions): Model dimensions.
        tight (bool): Count the ordering form of the price constraints.
            (default: :obj:`False`)

    Returns:
        LpSummary: Counts per family; empty families are omitted.
    """
    B, S, L = dims.branches, dims.sizes, dims.lot_types
    M, N, E = dims.multiplicities, dims.max_lot_types, dims.scenarios
    K, P = dims.k_max, dims.prices
    cells = B * S
    unbounded = dims.unbounded_demand
    if unbounded is None:
        unbounded = E * cells
    variables = {
        "x": B * L * M,
        "y": L,
        "z": N,
        "I": cells,
        "Itot": 1,
        "u": E * (K + 1) * P,
        "v": E * K,
        "stock": E * (K + 1) * cells,
        "sales": E * (K + 1) * cells * P,
        "yield": E * (K + 1) * cells,
    }
    constraints = {
        "sop_assign": B,
        "sop_lotused": B * L,
        "sop_lotcount": 1,
        "sop_usedlotsfirst": N - 1,
        "sop_inventory": cells,
        "sop_totalinventory": 1,
        "sop_pop_start": E * cells,
        "pop_assign": E * (K + 1),
        "pop_startprice": E * min(dims.k_observ, K),
        "pop_salvage": E,
        "pop_nomarkup": E * K * (P - 1) if tight else E * K * P * (P - 1) // 2,
        "pop_markdownused": E * K * P if tight else E * K * P * (P - 1),
        "pop_stockdyn": E * K * cells,
        "pop_stocksales": E * (K + 1) * cells,
        "pop_demandsales": E * (K + 1) * cells * P - unbounded,
        "pop_yield": E * (K + 1) * cells,
    }
    return LpSummary(
        variables={k: v for k, v in variables.items() if v},
        constraints={k: v for k, v in constraints.items() if v},
    )


def export_lp(
    instance: Instance, path: Union[str, Path], tight: bool = False
) -> LpSummary:
    r"""Write the deterministic equivalent of ``instance`` in LP format.

    Binaries ``x[b,l,m]``, ``y[l]``, ``z[i]``, ``u[e,k,p]`` and ``v[e,k]``
    hold the lot choice, lot-type use, used-slot count, price per period
    and mark-down flags; ``I[b,s]`` and ``Itot`` are integer supplies;
    ``stock``, ``sales`` and ``yield`` are continuous. Unusable lot-types
    get no variables. With ``tight`` the price-order and mark-down
    constraints are written in cumulative form instead of pairwise.

    Args:
        instance (Instance): A validated instance.
        path (Union[str, Path]): Output file.
        tight (bool): Emit the ordering form. (default: :obj:`False`)

    Returns:
        LpSummary: Counts per variable and constraint family.
    """
    B, S, E = instance.num_branches, instance.num_sizes, instance.num_scenarios
    K, P = instance.k_max, instance.p_max + 1
    lots = list(instance.usable_lot_types)
    mults = list(instance.multiplicities)
    discount = instance.discount_factors

    x = {
        (b, l, mi): index_name("x", b, l, mi)
        for b in range(B)
        for l in lots
        for mi in range(len(mults))
    }
    y = {l: index_name("y", l) for l in lots}
    z = [index_name("z", i + 1) for i in range(instance.max_lot_types)]
    inv = {(b, s): index_name("I", b, s) for b in range(B) for s in range(S)}
    u = partial(index_name, "u")
    v = partial(index_name, "v")
    stock = partial(index_name, "stock")
    sales = partial(index_name, "sales")
    yld = partial(index_name, "yield")
    periods = range(K + 1)
    cells = [(b, s) for b in range(B) for s in range(S)]

    def objective():
        for (b, l, mi), name in x.items():
            yield -instance.handling_table[b, l, mi], name
        for i, name in enumerate(z):
            yield -instance.opening_costs[i], name
        for e in range(E):
            prob = instance.probabilities[e]
            for k in periods:
                for b, s in cells:
                    yield prob * discount[k], yld(e, k, b, s)
                if k > 0:
                    yield -prob * discount[k] * instance.markdown_costs[k], v(e, k)

    with open(path, "w", encoding="utf-8") as handle:
        lp = LpWriter(handle)
        lp.declare(x.values(), "binary")
        lp.declare(y.values(), "binary")
        lp.declare(z, "binary")
        lp.declare(inv.values(), "general")
        lp.declare(["Itot"], "general")
        lp.declare((u(e, k, p) for e in range(E) for k in periods for p in range(P)), "binary")
        lp.declare((v(e, k) for e in range(E) for k in range(1, K + 1)), "binary")
        lp.declare(stock(e, k, b, s) for e in range(E) for k in periods for b, s in cells)
        lp.declare(
            sales(e, k, b, s, p)
            for e in range(E)
            for k in periods
            for b, s in cells
            for p in range(P)
        )
        lp.declare(yld(e, k, b, s) for e in range(E) for k in periods for b, s in cells)
        lp.objective(objective())

        for b in range(B):
            lp.constraint(
                index_name("sop_assign", b),
                [(1, x[b, l, mi]) for l in lots for mi in range(len(mults))],
                "=",
                1,
            )
        for b in range(B):
            for l in lots:
                terms = [(1, x[b, l, mi]) for mi in range(len(mults))]
                lp.constraint(
                    index_name("sop_lotused", b, l), terms + [(-1, y[l])], "<=", 0
                )
        lp.constraint(
            "sop_lotcount",
            [(1, y[l]) for l in lots] + [(-1, name) for name in z],
            "<=",
            0,
        )
        for i in range(1, len(z)):
            lp.constraint(
                index_name("sop_usedlotsfirst", i + 1),
                [(1, z[i]), (-1, z[i - 1])],
                "<=",
                0,
            )
        for b, s in cells:
            terms = [(1, inv[b, s])]
            for l in lots:
                for mi, m in enumerate(mults):
                    terms.append((-m * instance.lot_matrix[l, s], x[b, l, mi]))
            lp.constraint(index_name("sop_inventory", b, s), terms, "=", 0)
        lp.constraint(
            "sop_totalinventory",
            [(1, "Itot")] + [(-1, name) for name in inv.values()],
            "=",
            0,
        )
        if instance.supply_upper is None:
            lp.bound("Itot", lower=instance.supply_lower)
        else:
            lp.bound("Itot", lower=instance.supply_lower, upper=instance.supply_upper)
        for e in range(E):
            for b, s in cells:
                lp.constraint(
                    index_name("sop_pop_start", e, b, s),
                    [(1, inv[b, s]), (-1, stock(e, 0, b, s))],
                    "=",
                    0,
                )

        for e in range(E):
            for k in periods:
                lp.constraint(
                    index_name("pop_assign", e, k),
                    [(1, u(e, k, p)) for p in range(P)],
                    "=",
                    1,
                )
            for k in range(min(instance.k_observ, K)):
                lp.constraint(
                    index_name("pop_startprice", e, k), [(1, u(e, k, 0))], "=", 1
                )
            lp.constraint(
                index_name("pop_salvage", e), [(1, u(e, K, P - 1))], "=", 1
            )
            for k in range(1, K + 1):
                if tight:
                    for q in range(P - 1):
                        terms = [(1, u(e, k, p)) for p in range(q + 1)]
                        terms += [(-1, u(e, k - 1, p)) for p in range(q + 1)]
                        lp.constraint(
                            index_name("pop_nomarkup", e, k, q), terms, "<=", 0
                        )
                    for p in range(P):
                        lp.constraint(
                            index_name("pop_markdownused", e, k, p),
                            [(1, v(e, k)), (-1, u(e, k - 1, p)), (1, u(e, k, p))],
                            ">=",
                            0,
                        )
                    continue
                for p1 in range(P):
                    for p2 in range(p1):
                        lp.constraint(
                            index_name("pop_nomarkup", e, k, p1, p2),
                            [(1, u(e, k - 1, p1)), (1, u(e, k, p2))],
                            "<=",
                            1,
                        )
                for p1 in range(P):
                    for p2 in range(P):
                        if p1 == p2:
                            continue
                        lp.constraint(
                            index_name("pop_markdownused", e, k, p1, p2),
                            [(1, v(e, k)), (-1, u(e, k - 1, p1)), (-1, u(e, k, p2))],
                            ">=",
                            -1,
                        )

        for e in range(E):
            demand = instance.demand[e]
            for k in range(1, K + 1):
                for b, s in cells:
                    terms = [(1, stock(e, k - 1, b, s)), (-1, stock(e, k, b, s))]
                    terms += [(-1, sales(e, k - 1, b, s, p)) for p in range(P)]
                    lp.constraint(index_name("pop_stockdyn", e, k, b, s), terms, "=", 0)
            for k in periods:
                for b, s in cells:
                    terms = [(1, sales(e, k, b, s, p)) for p in range(P)]
                    lp.constraint(
                        index_name("pop_stocksales", e, k, b, s),
                        terms + [(-1, stock(e, k, b, s))],
                        "<=",
                        0,
                    )
            for k in periods:
                for b, s in cells:
                    for p in range(P):
                        d = demand[k, p, b, s]
                        if np.isinf(d):
                            continue
                        lp.constraint(
                            index_name("pop_demandsales", e, k, b, s, p),
                            [(1, sales(e, k, b, s, p)), (-d, u(e, k, p))],
                            "<=",
                            0,
                        )
            for k in periods:
                for b, s in cells:
                    terms = [(1, yld(e, k, b, s))]
                    terms += [
                        (-instance.prices[p], sales(e, k, b, s, p)) for p in range(P)
                    ]
                    lp.constraint(index_name("pop_yield", e, k, b, s), terms, "=", 0)
        summary = lp.close()

    logger.info(
        f"Wrote {path}: {summary.num_variables} variables, "
        f"{summary.num_constraints} constraints"
    )
    return summary


# --------------------------------------------------------------------------
# Command line
# --------------------------------------------------------------------------


def _emit(payload: Any) -> None:
    print(json.dumps(payload, indent=2, default=str))


def _load_assignment(path: str, instance: Instance) -> LotAssignment:
    assignment = LotAssignment.from_frame(pd.read_csv(path), instance)
    assignment.check(instance)
    return assignment


def _cmd_validate(args: argparse.Namespace, settings: Settings) -> int:
    instance = load_instance(args.file)
    _emit(
        {
            "valid": True,
            "branches": instance.num_branches,
            "sizes": instance.num_sizes,
            "lot_types": instance.num_lot_types,
            "scenarios": instance.num_scenarios,
            "k_max": instance.k_max,
            "p_max": instance.p_max,
        }
    )
    return EXIT_OK


def _cmd_generate(args: argparse.Namespace, settings: Settings) -> int:
    if args.config:
        config = GeneratorConfig.model_validate_json(
            Path(args.config).read_text(encoding="utf-8")
        )
    else:
        config = getattr(GeneratorConfig, args.preset)()
    text = dumps_instance(generate_instance(config, args.seed))
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
        logger.info(f"Instance written to {args.output}")
    else:
        print(text)
    return EXIT_OK


def _cmd_solve(args: argparse.Namespace, settings: Settings) -> int:
    instance = load_instance(args.file)
    workers = args.workers or settings.workers
    work_limit = args.work_limit or settings.work_limit
    trajectories = enumerate_trajectories(
        instance.k_max, instance.p_max, instance.k_observ
    )
    code = EXIT_OK

    if args.method == "exact":
        params = BnbParams(
            time_limit=args.time_limit or settings.time_limit,
            workers=workers,
            work_limit=work_limit,
            log_path=args.log,
        )
        solution = solve_ispo_exact(instance, params, trajectories)
        assignment = solution.assignment
        payload: Dict[str, Any] = solution.summary()
        if solution.status == GAP_BOUNDED:
            code = EXIT_RESOURCE
    elif args.method == "pingpong":
        result = solve_pingpong(
            instance,
            PingPongParams(sfa=SfaParams(workers=workers), workers=workers),
            trajectories,
        )
        assignment = result.solution.assignment
        payload = {**result.solution.summary(), "stop_reason": result.stop_reason}
        if args.trace:
            result.trace_frame().to_csv(args.trace, index=False)
    elif args.method == "sop":
        if args.trajectories:
            trajectory_map = ScenarioTrajectoryMap(
                trajectories=tuple(
                    parse_trajectory(text) for text in args.trajectories.split(";")
                )
            )
        else:
            table = compute_bound_table(instance, trajectories, workers=workers)
            trajectory_map = initial_map(table, instance.num_scenarios)
        coeffs = modified_costs(instance, trajectory_map)
        if args.sop_method == "exact":
            sop = solve_sop_exact(coeffs, instance, work_limit=work_limit, workers=workers)
        else:
            sop = sfa_heuristic(coeffs, instance, SfaParams(workers=workers))
        assignment = sop.assignment
        payload = {
            "value": sop.value,
            "subsets_evaluated": sop.subsets_evaluated,
            "lot_types": list(assignment.lot_types_used()),
            "trajectories": trajectory_map.label(),
        }
    else:
        if not args.assignment:
            raise ValueError("solve pop needs --assignment")
        assignment = _load_assignment(args.assignment, instance)
        supply, _ = inventory_from_assignment(assignment, instance)
        pop = solve_pop_exact(supply, instance, trajectories, workers=workers)
        payload = {
            "expected_value": pop.expected_value,
            "objective": pop.expected_value - supply_cost(assignment, instance),
            "values": list(pop.values),
            "trajectories": [t.label() for t in pop.trajectory_map.trajectories],
        }

    if args.output and args.method != "pop":
        assignment.to_frame(instance).to_csv(args.output, index=False)
    _emit(payload)
    return code


def _cmd_bound(args: argparse.Namespace, settings: Settings) -> int:
    instance = load_instance(args.file)
    if args.scenario is not None or args.trajectory is not None:
        if args.scenario is None or args.trajectory is None:
            raise ValueError("--scenario and --trajectory go together")
        trajectory = parse_trajectory(args.trajectory)
        bounds = ScenarioBounds(instance, args.scenario, [trajectory])
        entry = bounds.gamma(0)
        payload = {
            "scenario": args.scenario,
            "trajectory": trajectory.label(),
            "itemwise": bounds.itemwise(0),
            "itemwise_supply": bounds.itemwise_supply(0),
            "lotwise": bounds.lotwise(0),
            "gamma": entry.value,
            "provenance": entry.provenance,
        }
        if args.exact:
            payload["exact"] = exact_bound(
                instance, args.scenario, trajectory, settings.work_limit
            )
        _emit(payload)
        return EXIT_OK
    table = compute_bound_table(instance, workers=settings.workers, progress=args.progress)
    if args.output:
        table.to_frame().to_csv(args.output, index=False)
    _emit(
        {
            "entries": len(table),
            "dual_bound": table.dual_bound(instance.probabilities),
        }
    )
    return EXIT_OK


def _cmd_export_lp(args: argparse.Namespace, settings: Settings) -> int:
    instance = load_instance(args.file)
    summary = export_lp(instance, args.output, tight=args.tight)
    _emit(
        {
            "variables": summary.num_variables,
            "constraints": summary.num_constraints,
            "families": {**summary.variables, **summary.constraints},
        }
    )
    return EXIT_OK


def _cmd_simulate(args: argparse.Namespace, settings: Settings) -> int:
    instance = load_instance(args.file)
    if args.assignment:
        assignment = _load_assignment(args.assignment, instance)
    else:
        assignment = solve_pingpong(instance).solution.assignment
    supply, _ = inventory_from_assignment(assignment, instance)
    policy = RhPopPolicy()
    realization = realize_sales(
        instance, supply, policy, args.seed, scenario=args.scenario
    )
    if args.output:
        frame = pd.DataFrame(
            {
                "period": range(instance.k_max + 1),
                "price_index": realization.prices,
                "units_sold": realization.sales.sum(axis=(1, 2)),
                "stock": realization.stock.sum(axis=(1, 2)),
            }
        )
        frame.to_csv(args.output, index=False)
    _emit(
        {
            "scenario": realization.scenario,
            "prices": list(realization.prices),
            "units_sold": int(realization.sales.sum()),
            "units_supplied": int(supply.sum()),
            "rro": compute_rro(
                realization, assignment, instance, range(instance.num_branches)
            ),
            "alpha": policy.state.alpha,
        }
    )
    return EXIT_OK


def _cmd_fieldstudy(args: argparse.Namespace, settings: Settings) -> int:
    config = FieldStudyConfig.load(args.config)
    reports = config.run(args.seed)
    if args.output:
        frames = [r.to_frame().assign(seed=r.seed) for r in reports]
        pd.concat(frames, ignore_index=True).to_csv(args.output, index=False)
    payload: Dict[str, Any] = {"runs": [r.summary() for r in reports]}
    pvalues = [r.wilcoxon.p_value for r in reports if r.wilcoxon is not None]
    if len(pvalues) > 1:
        payload["ks_uniformity"] = ks_uniformity(pvalues)
    _emit(payload)
    return EXIT_OK


def _cmd_stats(args: argparse.Namespace, settings: Settings) -> int:
    frame = pd.read_csv(args.csv)
    if args.column not in frame.columns:
        raise ValueError(f"column {args.column!r} not in {args.csv}")
    result = wilcoxon_signed_rank(frame[args.column].tolist())
    _emit(result.model_dump())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ispo", description="Integrated size and price optimization"
    )
    parser.add_argument("--env-file", type=str, help="dotenv file with ISPO_* settings")
    commands = parser.add_subparsers(dest="command", required=True)

    validate = commands.add_parser("validate", help="validate an instance file")
    validate.add_argument("file")
    validate.set_defaults(handler=_cmd_validate)

    generate = commands.add_parser("generate", help="generate a synthetic instance")
    generate.add_argument("--config", type=str, help="GeneratorConfig JSON file")
    generate.add_argument("--preset", choices=["tiny", "desk", "field"], default="tiny")
    generate.add_argument("--seed", type=int, required=True)
    generate.add_argument("-o", "--output", type=str)
    generate.set_defaults(handler=_cmd_generate)

    solve = commands.add_parser("solve", help="solve an instance")
    solve.add_argument("method", choices=["exact", "pingpong", "sop", "pop"])
    solve.add_argument("file")
    solve.add_argument("--time-limit", type=float)
    solve.add_argument("--log", type=str, help="branch-and-bound node log")
    solve.add_argument("--workers", type=int)
    solve.add_argument("--work-limit", type=int)
    solve.add_argument("--assignment", type=str, help="assignment CSV (pop)")
    solve.add_argument("--trajectories", type=str, help="fixed map for sop")
    solve.add_argument("--sop-method", choices=["sfa", "exact"], default="sfa")
    solve.add_argument("--trace", type=str, help="ping-pong trace CSV")
    solve.add_argument("-o", "--output", type=str, help="assignment CSV")
    solve.set_defaults(handler=_cmd_solve)

    bound = commands.add_parser("bound", help="upper bounds per scenario and trajectory")
    bound.add_argument("file")
    bound.add_argument("--scenario", type=int)
    bound.add_argument("--trajectory", type=str)
    bound.add_argument("--exact", action="store_true")
    bound.add_argument("--progress", action="store_true")
    bound.add_argument("-o", "--output", type=str, help="bound table CSV")
    bound.set_defaults(handler=_cmd_bound)

    export = commands.add_parser("export-lp", help="write the deterministic equivalent")
    export.add_argument("file")
    export.add_argument("-o", "--output", type=str, required=True)
    export.add_argument("--tight", action="store_true")
    export.set_defaults(handler=_cmd_export_lp)

    simulate = commands.add_parser("simulate", help="simulate a selling season")
    simulate.add_argument("policy", choices=["rh-pop"])
    simulate.add_argument("file")
    simulate.add_argument("--seed", type=int, required=True)
    simulate.add_argument("--scenario", type=int)
    simulate.add_argument("--assignment", type=str)
    simulate.add_argument("-o", "--output", type=str)
    simulate.set_defaults(handler=_cmd_simulate)

    fieldstudy = commands.add_parser("fieldstudy", help="run a simulated field study")
    fieldstudy.add_argument("config")
    fieldstudy.add_argument("--seed", type=int, required=True)
    fieldstudy.add_argument("-o", "--output", type=str)
    fieldstudy.set_defaults(handler=_cmd_fieldstudy)

    stats_parser = commands.add_parser("stats", help="statistics on paired outcomes")
    stats_parser.add_argument("test", choices=["wilcoxon"])
    stats_parser.add_argument("csv")
    stats_parser.add_argument("--column", default="difference")
    stats_parser.set_defaults(handler=_cmd_stats)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    settings = load_settings(args.env_file)
    setup_logging(settings.log_dir, settings.log_level)
    try:
        return args.handler(args, settings)
    except (InstanceValidationError, ValidationError, WilcoxonTieError) as e:
        logger.error(f"Validation failed: {e}")
        return EXIT_VALIDATION
    except InfeasibleError as e:
        logger.error(f"Infeasible: {e}")
        return EXIT_INFEASIBLE
    except WorkLimitExceeded as e:
        logger.error(f"Resource limit: {e}")
        return EXIT_RESOURCE
    except (IspoError, ValueError, OSError) as e:
        logger.error(f"{type(e).__name__}: {e}")
        return EXIT_VALIDATION


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
