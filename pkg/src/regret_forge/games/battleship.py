"""Tiny Battleship on a 2 x ``cols`` grid with one length-2 ship each."""

from __future__ import annotations

from .base import P1, P2, Decision, Terminal

ROWS = 2
SHOTS = 3
SINK_PAYOFF = 2


class Battleship:
    """Players secretly place a ship, then alternate up to three shots each.

    Sinking the opponent's ship (hitting both of its cells) ends the game
    with payoff 2 to the shooter. If nobody sinks anything the game is a
    draw. A player sees their own placement, the outcome of their own shots
    and where the opponent fired.
    """

    def __init__(self, cols: int):
        self.cols = cols
        self.name = f"battleship:{cols}"
        placements = []
        for r in range(ROWS):
            for c in range(cols - 1):
                placements.append((f"h{r}{c}", frozenset({r * cols + c, r * cols + c + 1})))
        for c in range(cols):
            placements.append((f"v0{c}", frozenset({c, cols + c})))
        self.placements = placements

    def cell_label(self, cell: int) -> str:
        return f"shot{cell // self.cols}{cell % self.cols}"

    def initial_state(self):
        # (placement p1, placement p2, shots as (player, cell) in order)
        return (None, None, ())

    def expand(self, state):
        s1, s2, shots = state
        if s1 is None or s2 is None:
            player = P1 if s1 is None else P2
            moves = []
            for i, (label, _) in enumerate(self.placements):
                child = (i, None, ()) if player == P1 else (s1, i, ())
                moves.append((label, child))
            return Decision(player, ("place",), moves)
        ships = (self.placements[s1][1], self.placements[s2][1])
        fired = ({c for p, c in shots if p == P1}, {c for p, c in shots if p == P2})
        if fired[0] >= ships[1]:
            return Terminal(SINK_PAYOFF)
        if fired[1] >= ships[0]:
            return Terminal(-SINK_PAYOFF)
        if len(shots) == 2 * SHOTS:
            return Terminal(0)
        player = P1 if len(shots) % 2 == 0 else P2
        me = player - 1
        target = ships[1 - me]
        events = []
        for p, c in shots:
            if p == player:
                events.append((self.cell_label(c), c in target))
            else:
                events.append(("opp", self.cell_label(c)))
        key = (self.placements[(s1, s2)[me]][0], tuple(events))
        moves = [
            (self.cell_label(c), (s1, s2, shots + ((player, c),)))
            for c in range(ROWS * self.cols)
            if c not in fired[me]
        ]
        return Decision(player, key, moves)
