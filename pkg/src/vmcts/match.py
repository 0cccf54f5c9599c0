"""Engine-vs-engine matches and ablation sweeps.

Games are seeded from the match's base seed and the game index, and each
move's search from the game seed and the move number, so a match gives the
same rows whether it runs serially or across workers.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from vmcts.config import ENV_ALPHA, RunConfig
from vmcts.envs import make_env
from vmcts.evaluators import make_evaluator
from vmcts.search import SearchConfig, SearchOutcome, search_vanilla
from vmcts.seeding import derive_seed
from vmcts.virtual import VetConfig, search_vmcts, truncated_greedy, truncated_vanilla, truncated_virtual

CSV_HEADER = ("game_id", "seed", "winner", "moves", "budget_a", "budget_b", "wall_ms")


@dataclass(frozen=True)
class EngineSpec:
    """One player: how it searches and with what evaluator.

    ``expansion`` picks the search: ``vmcts`` (early termination),
    ``vanilla`` (full budget), or a forced stop at ceil(r N) followed by
    ``virtual`` expansion, ``greedy`` expansion or nothing (``truncated``).
    """

    expansion: str = "vmcts"
    budget: int = 150
    r: float = 0.2
    epsilon: float = 0.1
    norm: str = "l1"
    check_every: int = 1
    evaluator: str = "rollout"
    rollouts: int = 32
    slope: float = 0.5
    c1: float = 1.25
    c2: float = 19652.0
    dirichlet_alpha: float = 0.3
    noise_fraction: float = 0.25
    normalize_q: bool = True
    resign_threshold: float | None = -0.9
    self_play: bool = False

    def search_config(self, seed: int, reference_moves: int | None = None) -> SearchConfig:
        return SearchConfig(
            budget=self.budget, c1=self.c1, c2=self.c2, dirichlet_alpha=self.dirichlet_alpha,
            noise_fraction=self.noise_fraction, root_noise=self.self_play,
            reference_legal_moves=reference_moves, temperature_moves=16 if self.self_play else 0,
            resign_threshold=self.resign_threshold, seed=seed, normalize_q=self.normalize_q,
        )

    def vet(self) -> VetConfig:
        return VetConfig(min_ratio=self.r, epsilon=self.epsilon, norm=self.norm, check_every=self.check_every)

    def k_stop(self) -> int:
        return self.vet().min_iterations(self.budget)


def run_engine(engine: EngineSpec, state, evaluator, seed: int, record_trace: bool = False) -> SearchOutcome:
    if hasattr(state, "size"):
        area = state.size * state.size
    else:
        area = getattr(state, "rows", 0) * getattr(state, "cols", 0)
    cfg = engine.search_config(seed, reference_moves=area or None)
    mode = engine.expansion
    if mode == "vmcts":
        return search_vmcts(state, evaluator, cfg, engine.vet(), record_trace=record_trace)
    if mode == "vanilla":
        return search_vanilla(state, evaluator, cfg)
    if mode == "virtual":
        return truncated_virtual(state, evaluator, cfg, engine.k_stop())
    if mode == "greedy":
        return truncated_greedy(state, evaluator, cfg, engine.k_stop())
    if mode == "truncated":
        return truncated_vanilla(state, evaluator, cfg, engine.k_stop())
    raise ValueError(f"unknown expansion mode {mode!r}")


@dataclass(frozen=True)
class MatchSpec:
    env: str = "gomoku"
    size: int | None = None
    komi: float = 6.5
    engine_a: EngineSpec = field(default_factory=EngineSpec)
    engine_b: EngineSpec = field(default_factory=lambda: EngineSpec(expansion="vanilla"))
    games: int = 200
    swap_colors: bool = True
    base_seed: int = 0
    workers: int = 1
    timing: bool = False

    def __post_init__(self):
        if self.games < 1:
            raise ValueError("games must be positive")
        if self.swap_colors and (self.games < 2 or self.games % 2):
            raise ValueError("games must be even and at least 2 when colours are swapped")

    def a_moves_first(self, game_id: int) -> bool:
        return not self.swap_colors or game_id % 2 == 0


def spec_from_config(cfg: RunConfig) -> MatchSpec:
    common = dict(budget=cfg.n, r=cfg.r, epsilon=cfg.eps, norm=cfg.norm, check_every=cfg.check_every,
                  evaluator=cfg.evaluator, rollouts=cfg.rollouts, slope=cfg.slope, c1=cfg.c1, c2=cfg.c2,
                  dirichlet_alpha=cfg.alpha, noise_fraction=cfg.noise_fraction,
                  normalize_q=cfg.normalize_q, resign_threshold=cfg.resign_threshold,
                  self_play=cfg.self_play)
    return MatchSpec(
        env=cfg.env, size=cfg.size, komi=cfg.komi,
        engine_a=EngineSpec(expansion=cfg.expansion, **common),
        engine_b=EngineSpec(expansion=cfg.opponent, **common),
        games=cfg.games, swap_colors=cfg.swap_colors, base_seed=cfg.seed,
        workers=cfg.workers, timing=cfg.timing,
    )


@dataclass
class GameRecord:
    game_id: int
    seed: int
    winner: str  # "a", "b", "draw" or "fault"
    moves: int
    budgets_a: list[int]
    budgets_b: list[int]
    wall_ms: float
    a_first: bool
    resigned: bool = False
    error: str | None = None

    @property
    def budget_a(self) -> float:
        return float(np.mean(self.budgets_a)) if self.budgets_a else 0.0

    @property
    def budget_b(self) -> float:
        return float(np.mean(self.budgets_b)) if self.budgets_b else 0.0


def initial_state(spec: MatchSpec):
    return make_env(spec.env, spec.size, spec.komi)


def play_game(spec: MatchSpec, game_id: int) -> GameRecord:
    seed = derive_seed(spec.base_seed, game_id)
    state = initial_state(spec)
    a_first = spec.a_moves_first(game_id)
    engines = {"a": spec.engine_a, "b": spec.engine_b}
    budgets: dict[str, list[int]] = {"a": [], "b": []}
    t0 = time.perf_counter()
    winner = None
    resigned = False
    try:
        evaluators = {
            side: make_evaluator(e.evaluator, state.env_id, e.rollouts, e.slope) for side, e in engines.items()
        }
        while not state.is_terminal():
            first_to_move = state.player_to_move == 0
            side = "a" if first_to_move == a_first else "b"
            out = run_engine(engines[side], state, evaluators[side], derive_seed(seed, state.move_number))
            budgets[side].append(out.iterations_used)
            if out.resigned:
                winner = "b" if side == "a" else "a"
                resigned = True
                break
            state = state.apply(out.chosen_action)
    except Exception as exc:  # engine faults are recorded, not raised
        return GameRecord(game_id, seed, "fault", state.move_number, budgets["a"], budgets["b"],
                          (time.perf_counter() - t0) * 1000, a_first, error=repr(exc))
    if winner is None:
        v = state.terminal_value()
        if v == 0:
            winner = "draw"
        else:
            winner = "a" if (v > 0) == a_first else "b"
    return GameRecord(game_id, seed, winner, state.move_number, budgets["a"], budgets["b"],
                      (time.perf_counter() - t0) * 1000, a_first, resigned)


def run_match(spec: MatchSpec, progress=None) -> list[GameRecord]:
    """All games of the match, ordered by game id."""
    ids = range(spec.games)
    if spec.workers > 1:
        with ProcessPoolExecutor(spec.workers) as pool:
            records = list(pool.map(play_game, [spec] * spec.games, ids))
    else:
        records = []
        for g in ids:
            records.append(play_game(spec, g))
            if progress:
                progress(records[-1])
    return sorted(records, key=lambda r: r.game_id)


def summarize(records: list[GameRecord]) -> dict:
    """Win rate of engine A (draws count half) and per-move budget statistics."""
    played = [r for r in records if r.winner != "fault"]
    n = len(played)
    score = sum(1.0 if r.winner == "a" else 0.5 if r.winner == "draw" else 0.0 for r in played)
    rate = score / n if n else float("nan")
    all_a = [b for r in played for b in r.budgets_a]
    all_b = [b for r in played for b in r.budgets_b]
    return {
        "games": len(records),
        "faults": len(records) - n,
        "wins_a": sum(r.winner == "a" for r in played),
        "wins_b": sum(r.winner == "b" for r in played),
        "draws": sum(r.winner == "draw" for r in played),
        "resignations": sum(r.resigned for r in played),
        "win_rate_a": rate,
        "win_rate_a_stderr": math.sqrt(rate * (1 - rate) / n) if n else float("nan"),
        "avg_budget_a": float(np.mean(all_a)) if all_a else float("nan"),
        "std_budget_a": float(np.std(all_a)) if all_a else float("nan"),
        "avg_budget_b": float(np.mean(all_b)) if all_b else float("nan"),
        "std_budget_b": float(np.std(all_b)) if all_b else float("nan"),
        "games_a_first": sum(r.a_first for r in records),
    }


def records_to_csv(records: list[GameRecord], timing: bool = False) -> str:
    """CSV rows; ``wall_ms`` is 0 unless timing is requested so files stay reproducible."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in records:
        w.writerow([r.game_id, r.seed, r.winner, r.moves, f"{r.budget_a:.4f}", f"{r.budget_b:.4f}",
                    f"{r.wall_ms:.1f}" if timing else "0"])
    return buf.getvalue()


def match_report(spec: MatchSpec, records: list[GameRecord]) -> dict:
    rows = []
    for r in records:
        row = {"game_id": r.game_id, "seed": r.seed, "winner": r.winner, "moves": r.moves,
               "a_first": r.a_first, "resigned": r.resigned, "budget_a": r.budget_a, "budget_b": r.budget_b,
               "budgets_a": r.budgets_a, "budgets_b": r.budgets_b}
        if spec.timing:
            row["wall_ms"] = r.wall_ms
        if r.error:
            row["error"] = r.error
        rows.append(row)
    return {"spec": asdict(spec), "summary": summarize(records), "games": rows}


SWEEP_AXES = ("epsilon", "r", "N", "norm", "expansion_mode")


def sweep_point(spec: MatchSpec, axis: str, value) -> MatchSpec:
    a = spec.engine_a
    if axis == "epsilon":
        a = replace(a, epsilon=float(value))
    elif axis == "r":
        a = replace(a, r=float(value))
    elif axis == "N":
        a = replace(a, budget=int(value))
        return replace(spec, engine_a=a, engine_b=replace(spec.engine_b, budget=int(value)))
    elif axis == "norm":
        a = replace(a, norm=str(value))
    elif axis == "expansion_mode":
        a = replace(a, expansion=str(value))
    else:
        raise ValueError(f"unknown sweep axis {axis!r}; choose from {SWEEP_AXES}")
    return replace(spec, engine_a=a)


def run_sweep(spec: MatchSpec, axis: str, grid, progress=None) -> list[tuple[object, MatchSpec, list[GameRecord]]]:
    if not grid:
        raise ValueError("sweep grid is empty")
    out = []
    for value in grid:
        point = sweep_point(spec, axis, value)
        out.append((value, point, run_match(point, progress)))
    return out


def sweep_summary_csv(axis: str, results) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([axis, "games", "win_rate_a", "win_rate_a_stderr", "avg_budget_a", "std_budget_a", "avg_budget_b"])
    for value, _, records in results:
        s = summarize(records)
        w.writerow([value, s["games"], f"{s['win_rate_a']:.4f}", f"{s['win_rate_a_stderr']:.4f}",
                    f"{s['avg_budget_a']:.4f}", f"{s['std_budget_a']:.4f}", f"{s['avg_budget_b']:.4f}"])
    return buf.getvalue()


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n"


def _json_default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


__all__ = ["CSV_HEADER", "ENV_ALPHA", "EngineSpec", "GameRecord", "MatchSpec", "SWEEP_AXES", "dumps",
           "match_report", "play_game", "records_to_csv", "run_engine", "run_match", "run_sweep",
           "spec_from_config", "summarize", "sweep_point", "sweep_summary_csv"]
