"""Command-line harness: ``vmcts {search,match,sweep,verify,play}``.

Timing numbers reported here measure search overhead only; evaluators are
rollouts or heuristics, not network inference.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

import numpy as np

from vmcts import theory
from vmcts.config import EXPANSIONS, ConfigError, RunConfig, load_config
from vmcts.envs import IllegalMoveError, StateFormatError, make_env, parse_state
from vmcts.evaluators import make_evaluator
from vmcts.match import (
    EngineSpec,
    dumps,
    match_report,
    records_to_csv,
    run_engine,
    run_match,
    run_sweep,
    spec_from_config,
    summarize,
    sweep_summary_csv,
)
from vmcts.virtual import continue_to_oracle

log = logging.getLogger("vmcts")


def _setup_logging() -> None:
    level = os.environ.get("VMCTS_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(message)s")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key = value configuration file")
    p.add_argument("--env", choices=["tictactoe", "gomoku", "go"])
    p.add_argument("--size", type=int)
    p.add_argument("--komi", type=float)
    p.add_argument("--n", type=int, help="full search budget N")
    p.add_argument("--r", type=float, help="minimum budget ratio")
    p.add_argument("--eps", type=float, help="termination tolerance")
    p.add_argument("--norm", choices=["l1", "l2"])
    p.add_argument("--check-every", type=int)
    p.add_argument("--expansion", choices=EXPANSIONS)
    p.add_argument("--evaluator", choices=["rollout", "heuristic", "minimax"])
    p.add_argument("--rollouts", type=int)
    p.add_argument("--c1", type=float)
    p.add_argument("--c2", type=float)
    p.add_argument("--dirichlet-alpha", type=float)
    p.add_argument("--noise-fraction", type=float)
    p.add_argument("--resign-threshold", type=float)
    p.add_argument("--no-resign", action="store_const", const=True, dest="no_resign")
    p.add_argument("--no-normalize-q", action="store_const", const=False, dest="normalize_q")
    p.add_argument("--self-play", action="store_const", const=True, dest="self_play",
                   help="sample the first 16 moves and add root noise")
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--out-dir")


def _add_match(p: argparse.ArgumentParser) -> None:
    p.add_argument("--opponent", choices=EXPANSIONS, help="expansion mode of engine B (default vanilla)")
    p.add_argument("--games", type=int)
    p.add_argument("--no-swap", action="store_const", const=False, dest="swap_colors")
    p.add_argument("--timing", action="store_const", const=True, dest="timing",
                   help="record wall-clock time in the CSV (breaks byte-reproducibility)")


def _run_config(args) -> RunConfig:
    names = set(RunConfig.__dataclass_fields__)
    overrides = {k: v for k, v in vars(args).items() if k in names and v is not None}
    if getattr(args, "no_resign", None):
        overrides["resign_threshold"] = None
    return load_config(args.config, overrides)


def _engine(cfg: RunConfig) -> EngineSpec:
    return spec_from_config(cfg).engine_a


def _grid(policy, rows: int, cols: int) -> dict:
    grid = np.zeros(rows * cols)
    other = {}
    for a, p in zip(policy.support, policy.probabilities):
        if a < rows * cols:
            grid[a] = p
        else:
            other[str(a)] = float(p)
    return {"probabilities": grid.tolist(), "off_board": other}


def cmd_search(args) -> int:
    cfg = _run_config(args)
    if args.state:
        try:
            state = parse_state(Path(args.state).read_text())
        except StateFormatError as exc:
            print(f"{args.state}: {exc}", file=sys.stderr)
            return 2
    else:
        state = make_env(cfg.env, cfg.size, cfg.komi)
        for mv in args.moves or []:
            state = state.apply(state.text_to_action(mv))
    engine = _engine(cfg)
    evaluator = make_evaluator(engine.evaluator, state.env_id, engine.rollouts, engine.slope)
    out = run_engine(engine, state, evaluator, cfg.seed, record_trace=True)
    sc = engine.search_config(cfg.seed)
    oracle = continue_to_oracle(out, evaluator, sc)
    rows = getattr(state, "rows", getattr(state, "size", 0))
    cols = getattr(state, "cols", getattr(state, "size", 0))
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "trace.json").write_text(dumps({"records": out.trace or []}))
    heatmap = {
        "env": state.env_id, "rows": rows, "cols": cols, "layout": "row-major",
        "iterations_used": out.iterations_used, "budget": engine.budget,
        "terminated_early": out.terminated_early,
        "virtual_policy": _grid(out.policy, rows, cols),
        "oracle_policy": _grid(oracle, rows, cols),
        "l1_distance": float(np.abs(out.policy.probabilities - oracle.probabilities).sum()),
    }
    (out_dir / "heatmap.json").write_text(dumps(heatmap))
    print(f"move {state.action_to_text(out.chosen_action)}  k={out.iterations_used}/{engine.budget}"
          f"  early={out.terminated_early}  |pi_hat - pi_N|_1={heatmap['l1_distance']:.4f}")
    return 0


def _write_match(out_dir: Path, stem: str, spec, records) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / f"{stem}.csv").write_text(records_to_csv(records, spec.timing))
    (out_dir / f"{stem}.json").write_text(dumps(match_report(spec, records)))


def _progress(record) -> None:
    log.info("game %d: winner=%s moves=%d budget_a=%.1f budget_b=%.1f", record.game_id, record.winner,
             record.moves, record.budget_a, record.budget_b)


def cmd_match(args) -> int:
    cfg = _run_config(args)
    spec = spec_from_config(cfg)
    records = run_match(spec, _progress)
    _write_match(Path(cfg.out_dir), "match", spec, records)
    s = summarize(records)
    print(f"win rate A {s['win_rate_a']:.3f} +- {s['win_rate_a_stderr']:.3f}  "
          f"budget A {s['avg_budget_a']:.1f} +- {s['std_budget_a']:.1f}  budget B {s['avg_budget_b']:.1f}  "
          f"(W/D/L {s['wins_a']}/{s['draws']}/{s['wins_b']}, faults {s['faults']})")
    return 0


def _parse_grid(axis: str, text: str) -> list:
    items = [t.strip() for t in text.split(",") if t.strip()]
    if axis == "N":
        return [int(t) for t in items]
    if axis in ("epsilon", "r"):
        return [float(t) for t in items]
    return items


def cmd_sweep(args) -> int:
    cfg = _run_config(args)
    grid = _parse_grid(args.axis, args.grid)
    if not grid:
        print("sweep grid is empty", file=sys.stderr)
        return 2
    spec = spec_from_config(cfg)
    results = run_sweep(spec, args.axis, grid, _progress)
    out_dir = Path(cfg.out_dir)
    for value, point, records in results:
        _write_match(out_dir, f"sweep_{args.axis}_{value}", point, records)
    summary = sweep_summary_csv(args.axis, results)
    (out_dir / f"sweep_{args.axis}.csv").write_text(summary)
    print(summary, end="")
    return 0


def cmd_verify(args) -> int:
    kw = {}
    if args.arms:
        kw["arm_means"] = tuple(float(x) for x in args.arms.split(","))
    if args.priors:
        kw["arm_priors"] = tuple(float(x) for x in args.priors.split(","))
    for name in ("reward_law", "trials", "delta", "seed"):
        if getattr(args, name) is not None:
            kw[name] = getattr(args, name)
    if args.n is not None:
        kw["budget"] = args.n
    if args.r is not None:
        kw["r"] = args.r
    if args.eps is not None:
        kw["epsilon"] = args.eps
    cfg = theory.TheoryConfig(**kw)
    report = theory.run_all(cfg, include_adaptivity=not args.skip_adaptivity)
    out_dir = Path(args.out_dir or "out")
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "theory_report.json").write_text(dumps(report))
    for c in report["claims"]:
        freq = c["empirical_frequency"]
        print(f"{c['claim']:<32} {c['status']:<12} freq={'n/a' if freq is None else f'{freq:.4f}'}"
              f"  bound={c['theoretical_bound']:.6f}")
    if "adaptivity" in report:
        a = report["adaptivity"]
        print(f"{'adaptivity':<32} {'pass' if a['passed'] else 'fail':<12} easy={a['easy_mean']:.1f}"
              f"  hard={a['hard_mean']:.1f}  p={a['p_value']:.3g}")
    return 0 if report["all_passed"] else 1


def cmd_play(args, stdin=None, stdout=None) -> int:
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    cfg = _run_config(args)
    engine = _engine(cfg)
    state = make_env(cfg.env, cfg.size, cfg.komi)
    evaluator = make_evaluator(engine.evaluator, state.env_id, engine.rollouts, engine.slope)
    human_first = args.human == "X"
    while not state.is_terminal():
        print(state.to_text(), file=stdout)
        human_turn = (state.player_to_move == 0) == human_first
        if human_turn:
            print("your move: ", end="", file=stdout, flush=True)
            line = stdin.readline()
            if not line:
                return 0
            if line.strip() in ("resign", "quit"):
                print("you resigned", file=stdout)
                return 0
            try:
                state = state.apply(state.text_to_action(line))
            except IllegalMoveError as exc:
                print(f"illegal move: {exc}", file=stdout)
            continue
        out = run_engine(engine, state, evaluator, cfg.seed + state.move_number, record_trace=True)
        delta = None
        if out.trace:
            last = out.trace[-1]
            delta = last["delta_l1"] if engine.norm == "l1" else last["delta_l2"]
        if out.resigned:
            print("engine resigns", file=stdout)
            return 0
        print(f"engine plays {state.action_to_text(out.chosen_action)}  k={out.iterations_used}/{engine.budget}"
              + (f"  delta={delta:.4f}" if delta is not None else ""), file=stdout)
        state = state.apply(out.chosen_action)
    print(state.to_text(), file=stdout)
    v = state.terminal_value()
    print("draw" if v == 0 else ("X wins" if v > 0 else "O wins"), file=stdout)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vmcts", description="Virtual MCTS search and benchmark harness")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("search", help="trace one search and export policy heatmaps")
    _add_common(p)
    p.add_argument("--state", help="text state file")
    p.add_argument("moves", nargs="*", help="moves from the initial position, e.g. d4 c3")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("match", help="engine A vs engine B")
    _add_common(p)
    _add_match(p)
    p.set_defaults(func=cmd_match)

    p = sub.add_parser("sweep", help="one match per grid point of an engine-A parameter")
    _add_common(p)
    _add_match(p)
    p.add_argument("--axis", required=True, choices=["epsilon", "r", "N", "norm", "expansion_mode"])
    p.add_argument("--grid", required=True, help="comma-separated values")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="Monte-Carlo check of the concentration claims on bandits")
    p.add_argument("--arms", help="comma-separated arm means, descending")
    p.add_argument("--priors", help="comma-separated arm priors")
    p.add_argument("--reward-law", choices=["bernoulli", "uniform"])
    p.add_argument("--n", type=int)
    p.add_argument("--r", type=float)
    p.add_argument("--eps", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--skip-adaptivity", action="store_true")
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("play", help="play against the engine in the terminal")
    _add_common(p)
    p.add_argument("--human", choices=["X", "O"], default="X")
    p.set_defaults(func=cmd_play)
    return parser


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
