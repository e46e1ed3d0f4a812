"""Liar's Dice and Goofspiel (plus its imperfect-information variant)."""

from __future__ import annotations

from .base import P1, P2, Chance, Decision, Terminal

LIAR = "Liar"
TIE = -1


class LiarsDice:
    """One ``sides``-sided die per player; the top face is wild.

    Bid ``b`` means "at least ``b // sides + 1`` dice show face
    ``b % sides + 1``". Each bid must raise the bid index; ``Liar`` is
    available once something has been bid.
    """

    def __init__(self, sides: int):
        self.sides = sides
        self.name = f"liars_dice:{sides}"
        self.n_bids = 2 * sides

    def bid_label(self, b: int) -> str:
        return f"{b // self.sides + 1}-{b % self.sides + 1}"

    def initial_state(self):
        return (None, None, ())

    def expand(self, state):
        d1, d2, bids = state
        x = self.sides
        if d1 is None:
            return Chance([(str(f), 1 / x, (f, None, ())) for f in range(1, x + 1)])
        if d2 is None:
            return Chance([(str(f), 1 / x, (d1, f, ())) for f in range(1, x + 1)])
        if bids and bids[-1] == LIAR:
            last = bids[-2]
            quantity, face = last // x + 1, last % x + 1
            count = sum(1 for d in (d1, d2) if d == face or d == x)
            caller = P1 if len(bids) % 2 == 1 else P2
            caller_wins = count < quantity
            p1_wins = caller_wins == (caller == P1)
            return Terminal(1 if p1_wins else -1)
        player = P1 if len(bids) % 2 == 0 else P2
        die = d1 if player == P1 else d2
        start = bids[-1] + 1 if bids else 0
        moves = [(self.bid_label(b), (d1, d2, bids + (b,))) for b in range(start, self.n_bids)]
        if bids:
            moves.append((LIAR, (d1, d2, bids + (LIAR,))))
        key = (die, tuple(self.bid_label(b) for b in bids))
        return Decision(player, key, moves)


class Goofspiel:
    """Goofspiel with a fixed descending point deck ``x, x-1, ..., 1``.

    Bids are sealed: player 2 moves after player 1 without seeing the bid.
    With one card left the final round plays itself. The winner of the
    point total gets +1, the loser -1; ties score 0.

    In the perfect variant players see both remaining hands and who won
    each round. In the imperfect variant (``imperfect=True``) they only see
    their own bids and who won each round.
    """

    def __init__(self, cards: int, imperfect: bool = False):
        self.cards = cards
        self.imperfect = imperfect
        self.name = f"goofspiel_imp:{cards}" if imperfect else f"goofspiel:{cards}"
        self.points = tuple(range(cards, 0, -1))

    def initial_state(self):
        full = tuple(range(1, self.cards + 1))
        # (hand1, hand2, bids1, bids2, winners, pending bid of player 1)
        return (full, full, (), (), (), None)

    def _resolve(self, b1, b2):
        return P1 if b1 > b2 else P2 if b2 > b1 else TIE

    def expand(self, state):
        hand1, hand2, bids1, bids2, winners, pending = state
        if len(hand1) == 1 and pending is None:
            winners = winners + (self._resolve(hand1[0], hand2[0]),)
            score = [0, 0]
            for rnd, w in enumerate(winners):
                if w != TIE:
                    score[w - 1] += self.points[rnd]
            return Terminal((score[0] > score[1]) - (score[0] < score[1]))
        if pending is None:
            player, hand = P1, hand1
        else:
            player, hand = P2, hand2
        if self.imperfect:
            own = bids1 if player == P1 else bids2
            key = (own, winners)
        else:
            key = (hand1, hand2, winners)
        moves = []
        for card in hand:
            label = str(card)
            if player == P1:
                child = (hand1, hand2, bids1, bids2, winners, card)
            else:
                child = (
                    tuple(c for c in hand1 if c != pending),
                    tuple(c for c in hand2 if c != card),
                    bids1 + (pending,),
                    bids2 + (card,),
                    winners + (self._resolve(pending, card),),
                    None,
                )
            moves.append((label, child))
        return Decision(player, key, moves)
