"""Text board format shared by the board environments.

A state file is a block of ``key: value`` header lines followed by one line
per board row using ``.``, ``X`` (first player) and ``O`` (second player).
Blank lines and lines starting with ``#`` are ignored. Moves are written
``<col><row>`` with a letter column and a 1-based row counted from the top
(``c2`` is row 2, column 3), plus ``pass`` where the game allows it.
"""

from __future__ import annotations

import string

from vmcts.envs.base import IllegalMoveError, StateFormatError

_COLS = string.ascii_lowercase


def parse_header_and_rows(text: str) -> tuple[dict[str, str], list[str], int]:
    header: dict[str, str] = {}
    rows: list[str] = []
    first_row_line = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if ":" in line:
            if rows:
                raise StateFormatError("header line after board rows", lineno, 1)
            key, _, value = line.partition(":")
            header[key.strip()] = value.strip()
        else:
            if not rows:
                first_row_line = lineno
            rows.append(line)
    if not rows:
        raise StateFormatError("no board rows found", max(1, len(text.splitlines())), 1)
    return header, rows, first_row_line


def action_to_text(action: int, cols: int) -> str:
    r, c = divmod(action, cols)
    return f"{_COLS[c]}{r + 1}"


def text_to_action(text: str, rows: int, cols: int) -> int:
    t = text.strip().lower()
    if len(t) < 2 or t[0] not in _COLS or not t[1:].isdigit():
        raise IllegalMoveError(f"cannot parse move {text!r}")
    c = _COLS.index(t[0])
    r = int(t[1:]) - 1
    if not (0 <= r < rows and 0 <= c < cols):
        raise IllegalMoveError(f"move {text!r} is off the board")
    return r * cols + c
