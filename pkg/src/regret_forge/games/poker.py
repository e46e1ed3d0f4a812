"""Kuhn and Leduc poker."""

from __future__ import annotations

from .base import P1, P2, Chance, Decision, Terminal

KUHN_CARDS = ("J", "Q", "K")

# Player 1's equilibrium value. CFR+ and PDCFR+ averages after 1e5
# iterations give -0.0555555555502 and -0.0555555555558; both round to
# the closed form -1/18.
KUHN_VALUE = -1 / 18


class KuhnPoker:
    """Three-card Kuhn poker; ante 1, one bet of 1.

    State is ``(p1_card, p2_card, actions)`` with actions drawn from
    ``c`` (check), ``b`` (bet), ``f`` (fold) and ``k`` (call).
    """

    name = "kuhn"
    LABELS = {"c": "check", "b": "bet", "f": "fold", "k": "call"}

    def initial_state(self):
        return (None, None, "")

    def expand(self, state):
        c1, c2, h = state
        if c1 is None:
            return Chance([(card, 1 / 3, (card, None, "")) for card in KUHN_CARDS])
        if c2 is None:
            rest = [card for card in KUHN_CARDS if card != c1]
            return Chance([(card, 1 / 2, (c1, card, "")) for card in rest])
        showdown = 1 if KUHN_CARDS.index(c1) > KUHN_CARDS.index(c2) else -1
        if h == "cc":
            return Terminal(showdown)
        if h in ("bk", "cbk"):
            return Terminal(2 * showdown)
        if h == "bf":
            return Terminal(1)
        if h == "cbf":
            return Terminal(-1)
        player = P1 if len(h) % 2 == 0 else P2
        card = c1 if player == P1 else c2
        options = "fk" if h.endswith("b") else "cb"
        return Decision(player, (card, h), [(self.LABELS[a], (c1, c2, h + a)) for a in options])


class LeducPoker:
    """Leduc hold'em: 6 cards (3 ranks x 2 suits), one public card.

    Raise sizes are 2 then 4, at most two raises per round, player 1 opens
    both rounds. Fold is only offered when facing a raise. Cards ``0..5``
    have rank ``card // 2``.
    """

    name = "leduc"
    RANKS = "JQK"
    N_CARDS = 6
    RAISE = (2, 4)

    @classmethod
    def card_label(cls, card: int) -> str:
        return cls.RANKS[card // 2] + "sh"[card % 2]

    def initial_state(self):
        # (p1 card, p2 card, public card, round-1 actions, round-2 actions)
        return (None, None, None, "", "")

    def expand(self, state):
        c1, c2, pub, r1, r2 = state
        if c1 is None:
            return Chance([(self.card_label(c), 1 / 6, (c, None, None, "", "")) for c in range(self.N_CARDS)])
        if c2 is None:
            return Chance([(self.card_label(c), 1 / 5, (c1, c, None, "", "")) for c in range(self.N_CARDS) if c != c1])
        contrib = [1, 1]
        folded = None
        for rnd, seq in enumerate((r1, r2)):
            for i, a in enumerate(seq):
                p = i % 2
                if a == "r":
                    contrib[p] = contrib[1 - p] + self.RAISE[rnd]
                elif a == "c":
                    contrib[p] = contrib[1 - p]
                else:
                    folded = p
        if folded is not None:
            return Terminal(-contrib[0] if folded == 0 else contrib[1])
        if pub is None and _round_over(r1):
            used = {c1, c2}
            rest = [c for c in range(self.N_CARDS) if c not in used]
            return Chance([(self.card_label(c), 1 / 4, (c1, c2, c, r1, "")) for c in rest])
        if pub is not None and _round_over(r2):
            s1, s2 = self._strength(c1, pub), self._strength(c2, pub)
            if s1 == s2:
                return Terminal(0)
            return Terminal(contrib[1] if s1 > s2 else -contrib[0])
        seq = r2 if pub is not None else r1
        player = P1 if len(seq) % 2 == 0 else P2
        raises = seq.count("r")
        facing = raises > 0 and seq[-1] == "r"
        options = (["fold"] if facing else []) + ["call"] + (["raise"] if raises < 2 else [])
        card = c1 if player == P1 else c2
        key = (self.card_label(card), None if pub is None else self.card_label(pub), r1, r2)
        moves = []
        for label in options:
            a = label[0]
            child = (c1, c2, pub, r1 + a, r2) if pub is None else (c1, c2, pub, r1, r2 + a)
            moves.append((label, child))
        return Decision(player, key, moves)

    @staticmethod
    def _strength(card, pub):
        pair = card // 2 == pub // 2
        return (pair, card // 2)


def _round_over(seq: str) -> bool:
    # Two checks, or a call after a raise.
    return seq == "cc" or (len(seq) >= 2 and seq[-1] == "c" and "r" in seq)
