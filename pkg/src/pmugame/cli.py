"""Command-line front end: load grid, place PMUs, build and solve the game,
evaluate detection rates, and emit reports with figures.

Exit codes: 0 success, 2 input/validation error, 3 solver failure, 4 strict
tolerance violation.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import data_path
from .equilibrium import (
    EquilibriumResult,
    exp3_selfplay,
    exploitability,
    solve_minimax,
)
from .evaluation import build_report
from .game import (
    AttackModel,
    build_payoff_matrix,
    defense_candidates,
    enumerate_attacks,
)
from .grid import GridError, dc_power_flow, load_grid
from .lp import SimplexError
from .observability import observability_vector, optimal_placement, zib_observability
from .report import (
    plot_convergence,
    plot_detection_rates,
    plot_strategies,
    write_json,
    write_strategy_csv,
    write_trace_csv,
)

EXIT_INPUT = 2
EXIT_SOLVER = 3
EXIT_STRICT = 4


@dataclass
class RunConfig:
    grid: str
    zib: bool = False
    solver: str = "both"
    iters: int = 200_000
    seed: int = 42
    epsilon_theta: float = 0.05
    epsilon_flow: float = 0.1
    norm: str = "l2"
    bias: str = "absolute"
    out: Path = Path(".")
    strict: bool = False
    gap_bound: float = 0.1

    def __post_init__(self):
        if self.iters < 1:
            raise GridError("--iters must be >= 1")
        if self.solver not in ("lp", "exp3", "both"):
            raise GridError(f"unknown solver '{self.solver}'")
        self.out = Path(self.out)

    def model(self) -> AttackModel:
        return AttackModel(
            epsilon_theta=self.epsilon_theta,
            epsilon_flow=self.epsilon_flow,
            norm=self.norm,
            bias=self.bias,
        )


def _resolve_grid(name: str) -> Path:
    p = Path(name)
    if p.exists():
        return p
    bundled = data_path(name)
    if bundled.exists():
        return bundled
    raise GridError(f"grid file '{name}' not found")


def build_scenario(config: RunConfig):
    """Shared pipeline front: grid, placement, base state, actions, matrix.

    Defense candidates are screened against the plain-observability
    placement in both scenarios: the reduced ZIB placement leaves some buses
    observable only through KCL inference, for which the single/double
    screening of the candidate algorithm is not meaningful.  Candidates
    already hosting a PMU are dropped.
    """
    grid = load_grid(_resolve_grid(config.grid))
    placement = optimal_placement(grid, use_zib=config.zib)
    base = dc_power_flow(grid)
    screening_placement = (
        optimal_placement(grid, use_zib=False) if config.zib else placement
    )
    defenses = [
        d
        for d in defense_candidates(grid, screening_placement)
        if d.d not in placement.pmu_buses
    ]
    attacks = enumerate_attacks(grid, placement)
    matrix = build_payoff_matrix(grid, base, placement, attacks, defenses, config.model())
    return grid, placement, base, matrix


def cmd_place(config: RunConfig) -> int:
    grid = load_grid(_resolve_grid(config.grid))
    placement = optimal_placement(grid, use_zib=config.zib)
    g = observability_vector(grid, placement)
    if config.zib:
        g = zib_observability(grid, g)
    fully = all(g.values())
    config.out.mkdir(parents=True, exist_ok=True)
    write_json(config.out / "placement.json", placement.to_document(config.zib))
    print(f"pmu_buses: {sorted(placement.pmu_buses)}")
    print(f"cost: {placement.cost():g}")
    print(f"fully observable ({'with' if config.zib else 'without'} ZIB): {fully}")
    return 0


def cmd_game(config: RunConfig) -> int:
    _, _, _, matrix = build_scenario(config)
    config.out.mkdir(parents=True, exist_ok=True)
    (config.out / "matrix.csv").write_text(matrix.to_csv())
    print(f"attacks: {len(matrix.attacks)}  defenses: {len(matrix.defenses)}")
    print(f"wrote {config.out / 'matrix.csv'}")
    return 0


def _scenario_name(config: RunConfig) -> str:
    stem = Path(config.grid).stem
    return f"{stem}-{'zib' if config.zib else 'nozib'}"


def _solve(config: RunConfig, matrix):
    """Run the requested solver(s); returns dict of name -> (result, extras)."""
    out = {}
    if config.solver in ("lp", "both"):
        res = solve_minimax(matrix)
        out["lp"] = (res, None)
    if config.solver in ("exp3", "both"):
        sa, sd, diag = exp3_selfplay(matrix, config.iters, config.seed)
        gap = exploitability(matrix, sa, sd)
        value = float(np.asarray(sa) @ matrix.values @ np.asarray(sd))
        res = EquilibriumResult(
            sigma_a=np.asarray(sa), sigma_d=np.asarray(sd), value=value, gap=gap
        )
        out["exp3"] = (res, diag)
    return out


def cmd_solve(config: RunConfig) -> int:
    _, placement, _, matrix = build_scenario(config)
    results = _solve(config, matrix)
    config.out.mkdir(parents=True, exist_ok=True)
    attack_labels = [a.label() for a in matrix.attacks]
    defense_labels = [d.label() for d in matrix.defenses]

    lp_value = results["lp"][0].value if "lp" in results else None
    for name, (res, diag) in results.items():
        doc = res.to_document(
            attack_labels,
            defense_labels,
            iterations=config.iters if name == "exp3" else None,
            seed=config.seed if name == "exp3" else None,
        )
        write_json(config.out / f"strategy_{name}.json", doc)
        if diag is not None:
            write_trace_csv(config.out / "convergence.csv", diag["trace"])
            plot_convergence(config.out / "convergence.png", diag["trace"], lp_value)

    scenario = _scenario_name(config)
    for name, (res, _) in results.items():
        report = build_report(f"{scenario}-{name}", matrix, res.sigma_a, res.sigma_d)
        write_json(config.out / f"report_{name}.json", report.to_document())
        print(f"[{name}] value={res.value:.6g} exploitability={res.gap:.3g}")
        print(report.render_text())

    if "lp" in results and "exp3" in results:
        gap = results["exp3"][0].gap
        rel = gap / max(abs(results["lp"][0].value), 1e-12)
        print(f"exp3 exploitability relative to LP value: {rel:.3f}")
        if config.strict and rel > config.gap_bound:
            print(f"strict mode: relative gap {rel:.3f} exceeds bound {config.gap_bound}")
            return EXIT_STRICT
    return 0


def cmd_evaluate(config: RunConfig) -> int:
    _, _, _, matrix = build_scenario(config)
    res = solve_minimax(matrix)
    report = build_report(_scenario_name(config), matrix, res.sigma_a, res.sigma_d)
    config.out.mkdir(parents=True, exist_ok=True)
    write_json(config.out / "evaluation.json", report.to_document())
    print(report.render_text())
    return 0


def cmd_report(config: RunConfig) -> int:
    _, placement, _, matrix = build_scenario(config)
    results = _solve(config, matrix)
    config.out.mkdir(parents=True, exist_ok=True)
    (config.out / "matrix.csv").write_text(matrix.to_csv())

    reports = []
    lp_value = results["lp"][0].value if "lp" in results else None
    scenario = _scenario_name(config)
    for name, (res, diag) in results.items():
        report = build_report(f"{scenario}-{name}", matrix, res.sigma_a, res.sigma_d)
        reports.append(report)
        write_json(config.out / f"report_{name}.json", report.to_document())
        (config.out / f"report_{name}.txt").write_text(report.render_text())
        write_strategy_csv(config.out / f"strategies_{name}.csv", report)
        plot_strategies(config.out / f"strategies_{name}.png", report)
        if diag is not None:
            write_trace_csv(config.out / "convergence.csv", diag["trace"])
            plot_convergence(config.out / "convergence.png", diag["trace"], lp_value)
    plot_detection_rates(config.out / "detection_rates.png", reports)
    for report in reports:
        print(report.render_text())
    print(f"artifacts written to {config.out}")
    return 0


COMMANDS = {
    "place": cmd_place,
    "game": cmd_game,
    "solve": cmd_solve,
    "evaluate": cmd_evaluate,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pmugame",
        description="PMU placement and FDIA defense game toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    default_out = os.environ.get("PMUGAME_OUT", ".")
    for name, fn in COMMANDS.items():
        p = sub.add_parser(name, help=fn.__doc__)
        p.add_argument("--grid", required=True, help="grid file (path or bundled name)")
        p.add_argument("--zib", action="store_true", help="use zero-injection refinement")
        p.add_argument("--solver", default="both", choices=["lp", "exp3", "both"])
        p.add_argument("--iters", type=int, default=200_000, help="EXP3 iterations")
        p.add_argument("--seed", type=int, default=42)
        p.add_argument("--eps-theta", type=float, default=0.05, dest="epsilon_theta")
        p.add_argument("--eps-flow", type=float, default=0.1, dest="epsilon_flow")
        p.add_argument("--norm", default="l2", choices=["l1", "l2", "linf"])
        p.add_argument("--bias", default="absolute", choices=["absolute", "relative"],
                       help="bias magnitudes: fixed epsilons or operating-point relative")
        p.add_argument("--out", default=default_out, help="output directory")
        p.add_argument("--strict", action="store_true",
                       help="nonzero exit if EXP3 exploitability exceeds --gap-bound")
        p.add_argument("--gap-bound", type=float, default=0.1, dest="gap_bound")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    kwargs = {k: v for k, v in vars(args).items() if k != "command"}
    try:
        config = RunConfig(**kwargs)
    except GridError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        return COMMANDS[args.command](config)
    except GridError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SimplexError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
