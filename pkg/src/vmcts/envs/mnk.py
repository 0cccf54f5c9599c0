"""m,n,k-games: tic-tac-toe (3x3, three in a row) and Gomoku (k=5 on small boards)."""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from vmcts.envs.base import FIRST, SECOND, IllegalMoveError, StateFormatError
from vmcts.envs.text import action_to_text, parse_header_and_rows, text_to_action

EMPTY, BLACK, WHITE = 0, 1, 2
_SYMBOLS = {EMPTY: ".", BLACK: "X", WHITE: "O"}
_FROM_SYMBOL = {v: k for k, v in _SYMBOLS.items()}


@lru_cache(maxsize=None)
def line_windows(rows: int, cols: int, k: int) -> np.ndarray:
    """All length-k windows (horizontal, vertical, both diagonals) as flat cell indices."""
    out = []
    for r in range(rows):
        for c in range(cols):
            for dr, dc in ((0, 1), (1, 0), (1, 1), (1, -1)):
                end_r, end_c = r + dr * (k - 1), c + dc * (k - 1)
                if 0 <= end_r < rows and 0 <= end_c < cols:
                    out.append([(r + dr * i) * cols + c + dc * i for i in range(k)])
    return np.asarray(out, dtype=np.int64).reshape(-1, k)


@lru_cache(maxsize=None)
def _windows_by_cell(rows: int, cols: int, k: int) -> tuple[tuple[tuple[int, ...], ...], ...]:
    windows = line_windows(rows, cols, k)
    per_cell: list[list[tuple[int, ...]]] = [[] for _ in range(rows * cols)]
    for w in windows:
        t = tuple(int(x) for x in w)
        for cell in t:
            per_cell[cell].append(t)
    return tuple(tuple(ws) for ws in per_cell)


class MNKState:
    """Immutable m,n,k position. Actions are flat cell indices ``row * cols + col``."""

    __slots__ = ("rows", "cols", "k", "board", "player_to_move", "move_number", "winner", "_legal")

    def __init__(
        self,
        rows: int = 3,
        cols: int = 3,
        k: int = 3,
        board: tuple[int, ...] | None = None,
        player_to_move: int = FIRST,
        move_number: int = 0,
        winner: int | None = None,
    ):
        self.rows, self.cols, self.k = rows, cols, k
        self.board = board if board is not None else (EMPTY,) * (rows * cols)
        self.player_to_move = player_to_move
        self.move_number = move_number
        if winner is None:
            winner = self._find_winner()
        self.winner = winner  # 0 = none yet, BLACK or WHITE
        self._legal: tuple[int, ...] | None = None

    @classmethod
    def tictactoe(cls) -> "MNKState":
        return cls(3, 3, 3)

    @classmethod
    def gomoku(cls, size: int = 7, k: int = 5) -> "MNKState":
        return cls(size, size, k)

    @property
    def two_player(self) -> bool:
        return True

    @property
    def max_moves(self) -> int:
        return self.rows * self.cols

    @property
    def env_id(self) -> str:
        if (self.rows, self.cols, self.k) == (3, 3, 3):
            return "tictactoe"
        return "gomoku"

    def _find_winner(self) -> int:
        b = self.board
        for w in line_windows(self.rows, self.cols, self.k):
            first = b[w[0]]
            if first != EMPTY and all(b[i] == first for i in w[1:]):
                return first
        return 0

    def legal_actions(self) -> tuple[int, ...]:
        if self._legal is None:
            if self.winner:
                self._legal = ()
            else:
                self._legal = tuple(i for i, v in enumerate(self.board) if v == EMPTY)
        return self._legal

    def is_terminal(self) -> bool:
        return not self.legal_actions()

    def terminal_value(self, rng=None) -> float:
        if self.winner == BLACK:
            return 1.0
        if self.winner == WHITE:
            return -1.0
        return 0.0

    def apply(self, action: int) -> "MNKState":
        if self.winner or not (0 <= action < len(self.board)) or self.board[action] != EMPTY:
            raise IllegalMoveError(f"illegal move {action} in\n{self.to_text()}")
        stone = BLACK if self.player_to_move == FIRST else WHITE
        board = self.board[:action] + (stone,) + self.board[action + 1:]
        winner = 0
        for w in _windows_by_cell(self.rows, self.cols, self.k)[action]:
            if all(board[i] == stone for i in w):
                winner = stone
                break
        return MNKState(
            self.rows, self.cols, self.k, board,
            SECOND if self.player_to_move == FIRST else FIRST,
            self.move_number + 1, winner,
        )

    def mirror(self) -> "MNKState":
        """Swap the colours of every stone and the side to move."""
        swap = {EMPTY: EMPTY, BLACK: WHITE, WHITE: BLACK}
        return MNKState(
            self.rows, self.cols, self.k, tuple(swap[v] for v in self.board),
            SECOND if self.player_to_move == FIRST else FIRST, self.move_number,
        )

    def random_playouts(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """Outcomes (+1/0/-1, first-player view) of ``n`` uniform-random playouts.

        A uniform playout is a uniformly random ordering of the empty cells with
        colours alternating from the side to move; the game ends at the first
        completed line, so each window's completion time is the latest time
        among its cells and the winner is whoever completes a window first.
        """
        if self.winner or not self.legal_actions():
            return np.full(n, self.terminal_value())
        board = np.asarray(self.board, dtype=np.int8)
        empties = np.flatnonzero(board == EMPTY)
        e = empties.size
        times = rng.permuted(np.broadcast_to(np.arange(e), (n, e)), axis=1)
        mover = BLACK if self.player_to_move == FIRST else WHITE
        other = WHITE if mover == BLACK else BLACK
        owner = np.broadcast_to(board, (n, board.size)).copy()
        owner[:, empties] = np.where(times % 2 == 0, mover, other)
        when = np.full((n, board.size), -1, dtype=np.int64)
        when[:, empties] = times
        windows = line_windows(self.rows, self.cols, self.k)
        w_owner = owner[:, windows]
        w_done = when[:, windows].max(axis=2)
        result = np.zeros(n)
        never = e + 1
        firsts = []
        for stone in (BLACK, WHITE):
            full = (w_owner == stone).all(axis=2)
            firsts.append(np.where(full, w_done, never).min(axis=1))
        result[firsts[0] < firsts[1]] = 1.0
        result[firsts[1] < firsts[0]] = -1.0
        return result

    # text serialization

    def to_text(self) -> str:
        header = [
            f"env: {self.env_id}",
            f"rows: {self.rows}",
            f"cols: {self.cols}",
            f"k: {self.k}",
            f"to_move: {'X' if self.player_to_move == FIRST else 'O'}",
            f"move: {self.move_number}",
        ]
        rows = [
            "".join(_SYMBOLS[v] for v in self.board[r * self.cols:(r + 1) * self.cols])
            for r in range(self.rows)
        ]
        return "\n".join(header + rows) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "MNKState":
        header, rows, first_row_line = parse_header_and_rows(text)
        try:
            k = int(header.get("k", "3"))
            n_rows = int(header.get("rows", len(rows)))
            n_cols = int(header.get("cols", len(rows[0]) if rows else 0))
            move = int(header.get("move", "0"))
        except ValueError as exc:
            raise StateFormatError(f"bad header value: {exc}", 1) from None
        if len(rows) != n_rows:
            raise StateFormatError(f"expected {n_rows} board rows, got {len(rows)}", first_row_line + len(rows))
        board = []
        for i, row in enumerate(rows):
            if len(row) != n_cols:
                raise StateFormatError(f"expected {n_cols} cells", first_row_line + i, min(len(row), n_cols) + 1)
            for j, ch in enumerate(row):
                if ch not in _FROM_SYMBOL:
                    raise StateFormatError(f"unexpected character {ch!r}", first_row_line + i, j + 1)
                board.append(_FROM_SYMBOL[ch])
        to_move = header.get("to_move")
        if to_move is None:
            player = FIRST if board.count(BLACK) == board.count(WHITE) else SECOND
        elif to_move in ("X", "O"):
            player = FIRST if to_move == "X" else SECOND
        else:
            raise StateFormatError(f"to_move must be X or O, got {to_move!r}", 1)
        return cls(n_rows, n_cols, k, tuple(board), player, move)

    def action_to_text(self, action: int) -> str:
        return action_to_text(action, self.cols)

    def text_to_action(self, text: str) -> int:
        return text_to_action(text, self.rows, self.cols)

    def __eq__(self, other):
        return (
            isinstance(other, MNKState)
            and (self.rows, self.cols, self.k, self.board, self.player_to_move)
            == (other.rows, other.cols, other.k, other.board, other.player_to_move)
        )

    def __hash__(self):
        return hash((self.rows, self.cols, self.k, self.board, self.player_to_move))

    def __repr__(self):
        return f"MNKState({self.rows}x{self.cols}, k={self.k}, move={self.move_number})"
