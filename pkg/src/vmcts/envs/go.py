"""Go on small boards under Tromp-Taylor area scoring with positional superko."""

from __future__ import annotations

from functools import lru_cache

from vmcts.envs.base import FIRST, SECOND, IllegalMoveError, StateFormatError
from vmcts.envs.text import action_to_text, parse_header_and_rows, text_to_action

EMPTY, BLACK, WHITE = 0, 1, 2
_SYMBOLS = {EMPTY: ".", BLACK: "X", WHITE: "O"}
_FROM_SYMBOL = {v: k for k, v in _SYMBOLS.items()}


@lru_cache(maxsize=None)
def _neighbors(n: int) -> tuple[tuple[int, ...], ...]:
    out = []
    for p in range(n * n):
        r, c = divmod(p, n)
        adj = []
        if r > 0:
            adj.append(p - n)
        if r < n - 1:
            adj.append(p + n)
        if c > 0:
            adj.append(p - 1)
        if c < n - 1:
            adj.append(p + 1)
        out.append(tuple(adj))
    return tuple(out)


def _group_and_liberties(board, start: int, nbrs) -> tuple[set[int], bool]:
    color = board[start]
    group = {start}
    frontier = [start]
    has_liberty = False
    while frontier:
        p = frontier.pop()
        for q in nbrs[p]:
            v = board[q]
            if v == EMPTY:
                has_liberty = True
            elif v == color and q not in group:
                group.add(q)
                frontier.append(q)
    return group, has_liberty


def area_score(board: tuple[int, ...], n: int) -> tuple[int, int]:
    """Tromp-Taylor area: stones plus empty points that reach only one colour."""
    nbrs = _neighbors(n)
    black = sum(1 for v in board if v == BLACK)
    white = sum(1 for v in board if v == WHITE)
    seen: set[int] = set()
    for p, v in enumerate(board):
        if v != EMPTY or p in seen:
            continue
        region = {p}
        frontier = [p]
        reaches = set()
        while frontier:
            x = frontier.pop()
            for q in nbrs[x]:
                w = board[q]
                if w == EMPTY:
                    if q not in region:
                        region.add(q)
                        frontier.append(q)
                else:
                    reaches.add(w)
        seen |= region
        if reaches == {BLACK}:
            black += len(region)
        elif reaches == {WHITE}:
            white += len(region)
    return black, white


class GoState:
    """Immutable Go position. Actions are points ``row * n + col``; ``n * n`` is pass."""

    __slots__ = ("size", "board", "komi", "player_to_move", "move_number", "passes", "history", "_legal")

    def __init__(
        self,
        size: int = 5,
        board: tuple[int, ...] | None = None,
        komi: float = 6.5,
        player_to_move: int = FIRST,
        move_number: int = 0,
        passes: int = 0,
        history: frozenset | None = None,
    ):
        if not 2 <= size <= 19:
            raise ValueError(f"unsupported board size {size}")
        self.size = size
        self.board = board if board is not None else (EMPTY,) * (size * size)
        self.komi = komi
        self.player_to_move = player_to_move
        self.move_number = move_number
        self.passes = passes
        self.history = history if history is not None else frozenset({(self.board, player_to_move)})
        self._legal: tuple[int, ...] | None = None

    @property
    def two_player(self) -> bool:
        return True

    @property
    def max_moves(self) -> int:
        return 2 * self.size * self.size + 1

    @property
    def pass_action(self) -> int:
        return self.size * self.size

    @property
    def env_id(self) -> str:
        return "go"

    def is_terminal(self) -> bool:
        return self.passes >= 2 or self.move_number >= self.max_moves

    def _play(self, point: int) -> tuple[int, ...] | None:
        """Board after placing a stone at ``point``, or None if suicide/superko."""
        n = self.size
        nbrs = _neighbors(n)
        me = BLACK if self.player_to_move == FIRST else WHITE
        opp = WHITE if me == BLACK else BLACK
        board = list(self.board)
        board[point] = me
        for q in nbrs[point]:
            if board[q] == opp:
                group, free = _group_and_liberties(board, q, nbrs)
                if not free:
                    for g in group:
                        board[g] = EMPTY
        _, free = _group_and_liberties(board, point, nbrs)
        if not free:
            return None
        result = tuple(board)
        nxt = SECOND if self.player_to_move == FIRST else FIRST
        if (result, nxt) in self.history:
            return None
        return result

    def legal_actions(self) -> tuple[int, ...]:
        if self._legal is None:
            if self.is_terminal():
                self._legal = ()
            else:
                pts = [p for p, v in enumerate(self.board) if v == EMPTY and self._play(p) is not None]
                self._legal = tuple(pts) + (self.pass_action,)
        return self._legal

    def apply(self, action: int) -> "GoState":
        if self.is_terminal():
            raise IllegalMoveError("game is over")
        nxt = SECOND if self.player_to_move == FIRST else FIRST
        if action == self.pass_action:
            board = self.board
            passes = self.passes + 1
        else:
            if not (0 <= action < self.size * self.size) or self.board[action] != EMPTY:
                raise IllegalMoveError(f"illegal move {action}")
            board = self._play(action)
            if board is None:
                raise IllegalMoveError(f"move {action} is suicide or repeats a position")
            passes = 0
        return GoState(
            self.size, board, self.komi, nxt, self.move_number + 1, passes,
            self.history | {(board, nxt)},
        )

    def score(self) -> float:
        """Black area minus white area minus komi."""
        black, white = area_score(self.board, self.size)
        return black - white - self.komi

    def terminal_value(self, rng=None) -> float:
        s = self.score()
        return 1.0 if s > 0 else -1.0 if s < 0 else 0.0

    def to_text(self) -> str:
        n = self.size
        header = [
            "env: go",
            f"size: {n}",
            f"komi: {self.komi}",
            f"to_move: {'X' if self.player_to_move == FIRST else 'O'}",
            f"move: {self.move_number}",
            f"passes: {self.passes}",
        ]
        rows = ["".join(_SYMBOLS[v] for v in self.board[r * n:(r + 1) * n]) for r in range(n)]
        return "\n".join(header + rows) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "GoState":
        header, rows, first_row_line = parse_header_and_rows(text)
        try:
            n = int(header.get("size", len(rows)))
            komi = float(header.get("komi", "6.5"))
            move = int(header.get("move", "0"))
            passes = int(header.get("passes", "0"))
        except ValueError as exc:
            raise StateFormatError(f"bad header value: {exc}", 1) from None
        if len(rows) != n:
            raise StateFormatError(f"expected {n} board rows, got {len(rows)}", first_row_line + len(rows))
        board = []
        for i, row in enumerate(rows):
            if len(row) != n:
                raise StateFormatError(f"expected {n} cells", first_row_line + i, min(len(row), n) + 1)
            for j, ch in enumerate(row):
                if ch not in _FROM_SYMBOL:
                    raise StateFormatError(f"unexpected character {ch!r}", first_row_line + i, j + 1)
                board.append(_FROM_SYMBOL[ch])
        to_move = header.get("to_move", "X")
        if to_move not in ("X", "O"):
            raise StateFormatError(f"to_move must be X or O, got {to_move!r}", 1)
        return cls(n, tuple(board), komi, FIRST if to_move == "X" else SECOND, move, passes)

    def action_to_text(self, action: int) -> str:
        if action == self.pass_action:
            return "pass"
        return action_to_text(action, self.size)

    def text_to_action(self, text: str) -> int:
        if text.strip().lower() == "pass":
            return self.pass_action
        return text_to_action(text, self.size, self.size)

    def __repr__(self):
        return f"GoState({self.size}x{self.size}, move={self.move_number})"
