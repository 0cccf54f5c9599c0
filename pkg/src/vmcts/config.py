"""Flat ``key = value`` run configuration with per-key validation.

Every key can also be given as a command-line flag; flags win over the file.
Lines may use ``=`` or ``:`` as separator; ``#`` starts a comment.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from pathlib import Path


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None, key: str | None = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key {key!r}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)
        self.line = line
        self.key = key


ENVS = ("tictactoe", "gomoku", "go")
NORMS = ("l1", "l2")
EXPANSIONS = ("vmcts", "vanilla", "greedy", "truncated", "virtual")
EVALUATORS = ("rollout", "heuristic", "minimax")

# per-environment defaults: Dirichlet alpha and typical legal-move count for noise scaling
ENV_ALPHA = {"go": 0.03, "gomoku": 0.3, "tictactoe": 0.3}


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _optional_float(text: str) -> float | None:
    if text.strip().lower() in ("none", "off", "disabled", ""):
        return None
    return float(text)


@dataclass
class RunConfig:
    env: str = "gomoku"
    size: int | None = None
    komi: float = 6.5
    n: int = 150
    r: float = 0.2
    eps: float = 0.1
    norm: str = "l1"
    check_every: int = 1
    expansion: str = "vmcts"
    opponent: str = "vanilla"
    evaluator: str = "rollout"
    rollouts: int = 32
    slope: float = 0.5
    c1: float = 1.25
    c2: float = 19652.0
    dirichlet_alpha: float | None = None
    noise_fraction: float = 0.25
    normalize_q: bool = True
    resign_threshold: float | None = -0.9
    self_play: bool = False
    games: int = 200
    swap_colors: bool = True
    seed: int = 0
    workers: int = 1
    timing: bool = False
    out_dir: str = "out"

    def validate(self) -> "RunConfig":
        checks = [
            ("env", self.env in ENVS, f"must be one of {ENVS}"),
            ("size", self.size is None or self._size_ok(), "unsupported board size for this environment"),
            ("n", self.n >= 2, "must be at least 2"),
            ("r", 0 < self.r < 1, "must lie in (0, 1)"),
            ("eps", self.eps >= 0, "must be non-negative"),
            ("norm", self.norm in NORMS, f"must be one of {NORMS}"),
            ("check_every", self.check_every >= 1, "must be positive"),
            ("expansion", self.expansion in EXPANSIONS, f"must be one of {EXPANSIONS}"),
            ("opponent", self.opponent in EXPANSIONS, f"must be one of {EXPANSIONS}"),
            ("evaluator", self.evaluator in EVALUATORS, f"must be one of {EVALUATORS}"),
            ("rollouts", self.rollouts >= 0, "must be non-negative"),
            ("c1", self.c1 > 0, "must be positive"),
            ("c2", self.c2 > 0, "must be positive"),
            ("dirichlet_alpha", self.dirichlet_alpha is None or self.dirichlet_alpha > 0, "must be positive"),
            ("noise_fraction", 0 <= self.noise_fraction <= 1, "must lie in [0, 1]"),
            ("resign_threshold", self.resign_threshold is None or -1 <= self.resign_threshold < 0,
             "must lie in [-1, 0) or be 'off'"),
            ("games", self.games >= 1, "must be positive"),
            ("games", not self.swap_colors or (self.games >= 2 and self.games % 2 == 0),
             "must be even and at least 2 when swap_colors is on"),
            ("workers", self.workers >= 1, "must be positive"),
        ]
        for key, ok, message in checks:
            if not ok:
                raise ConfigError(message, key=key)
        return self

    def _size_ok(self) -> bool:
        if self.env == "go":
            return 5 <= self.size <= 9
        if self.env == "gomoku":
            return 5 <= self.size <= 15
        return self.size == 3

    @property
    def alpha(self) -> float:
        return self.dirichlet_alpha if self.dirichlet_alpha is not None else ENV_ALPHA[self.env]


_PARSERS = {}
for _f in fields(RunConfig):
    _t = str(_f.type)
    if _t.startswith("bool"):
        _PARSERS[_f.name] = _bool
    elif _t.startswith("int | None"):
        _PARSERS[_f.name] = lambda s: None if s.strip().lower() == "none" else int(s)
    elif _t.startswith("int"):
        _PARSERS[_f.name] = int
    elif _t.startswith("float | None"):
        _PARSERS[_f.name] = _optional_float
    elif _t.startswith("float"):
        _PARSERS[_f.name] = float
    else:
        _PARSERS[_f.name] = str

KEYS = tuple(_PARSERS)


def parse_value(key: str, text: str, line: int | None = None):
    if key not in _PARSERS:
        raise ConfigError("unknown key", line=line, key=key)
    try:
        return _PARSERS[key](text.strip())
    except ValueError as exc:
        raise ConfigError(str(exc), line=line, key=key) from None


def parse_config_text(text: str) -> dict:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        sep = "=" if "=" in line else ":" if ":" in line else None
        if sep is None:
            raise ConfigError("expected 'key = value'", line=lineno)
        key, _, value = line.partition(sep)
        key = key.strip().replace("-", "_")
        values[key] = parse_value(key, value, lineno)
    return values


def load_config(path: str | Path | None = None, overrides: dict | None = None) -> RunConfig:
    """File values, then non-None ``overrides``, on top of the defaults; validated."""
    values = parse_config_text(Path(path).read_text()) if path else {}
    for key, value in (overrides or {}).items():
        if value is not None:
            if key not in _PARSERS:
                raise ConfigError("unknown key", key=key)
            values[key] = value
    return RunConfig(**values).validate()
