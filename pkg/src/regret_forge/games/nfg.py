"""Normal-form games written as two-step extensive games."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .base import P1, P2, Decision, Terminal

PRESETS = {
    2: ((1.0, 0.0), (0.0, 2.0)),
    3: ((1.0, 0.0, 5.0), (0.0, 2.0, 0.0), (0.0, 0.0, 100.0)),
}


class NormalFormGame:
    """Player 1 picks a row, player 2 a column without seeing it.

    ``utility[i][j]`` is player 1's payoff, so the loss matrix of the
    sequence form is its negation.
    """

    def __init__(self, utility, name: str = "nfg"):
        U = np.asarray(utility, dtype=float)
        if U.ndim != 2 or 0 in U.shape:
            raise ValueError(f"utility matrix must be a non-empty 2-D array, got shape {U.shape}")
        if not np.all(np.isfinite(U)):
            raise ValueError("utility matrix has non-finite entries")
        self.utility = U
        self.name = name

    @classmethod
    def preset(cls, size: int) -> "NormalFormGame":
        return cls(PRESETS[size], name=f"nfg:{size}")

    @classmethod
    def from_file(cls, path) -> "NormalFormGame":
        """Read ``rows cols`` on the first line, then the entries row-major."""
        text = Path(path).read_text().split()
        if len(text) < 2:
            raise ValueError(f"{path}: missing 'rows cols' header")
        rows, cols = int(text[0]), int(text[1])
        values = [float(v) for v in text[2:]]
        if len(values) != rows * cols:
            raise ValueError(f"{path}: expected {rows * cols} entries, found {len(values)}")
        return cls(np.array(values).reshape(rows, cols), name=f"nfg:file={path}")

    def initial_state(self):
        return ()

    def expand(self, state):
        rows, cols = self.utility.shape
        if len(state) == 2:
            return Terminal(self.utility[state])
        if not state:
            return Decision(P1, "row", [(f"r{i}", (i,)) for i in range(rows)])
        return Decision(P2, "col", [(f"c{j}", (state[0], j)) for j in range(cols)])
