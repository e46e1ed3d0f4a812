"""Extensive-form game trees and their sequence-form view.

Game rules are small state machines (see :class:`GameRules`). The builder
walks the full tree once, depth first, and records flat per-history arrays
plus, for every terminal history, the pair of sequences that reaches it.
From that record we derive each player's SDP and the sparse loss matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Hashable, NamedTuple, Protocol

import numpy as np
import scipy.sparse as sp

from ..sdp import SequentialDecisionProcess

CHANCE = 0
P1 = 1
P2 = 2
TERMINAL = -1


class Terminal(NamedTuple):
    utility: float  # player 1's utility


class Chance(NamedTuple):
    outcomes: list  # [(label, prob, child_state)]


class Decision(NamedTuple):
    player: int
    key: Hashable
    moves: list  # [(label, child_state)]


class GameRules(Protocol):
    name: str

    def initial_state(self) -> Any: ...

    def expand(self, state) -> Terminal | Chance | Decision: ...


@dataclass
class Infoset:
    id: int
    player: int
    key: Hashable
    actions: tuple[str, ...]
    parent: tuple[int, int] | None  # (infoset id, action index) of the player's previous decision
    size: int = 0


@dataclass(frozen=True)
class GameStats:
    n_histories: int
    n_infosets: int
    n_terminals: int
    depth: int
    max_infoset_size: int
    loss_range: float

    def table_row(self) -> tuple[int, int, int, int, int]:
        return (self.n_histories, self.n_infosets, self.n_terminals, self.depth, self.max_infoset_size)


@dataclass
class ExtensiveGame:
    """Fully expanded two-player zero-sum game tree.

    Per-history arrays are indexed in depth-first order (root is 0).

    Two partitions are kept. ``observed_sizes`` groups histories by the
    key the rules report (what a player observes); this is what size tables
    count. ``infosets`` refines it by the player's own previous decision so
    that it always has perfect recall; the two coincide unless the rules
    let a player forget their own moves (perfect-information Goofspiel).
    ``term_*`` arrays describe terminal histories: the chance reach, player
    1's utility and, per player, the last own ``(infoset, action)`` on the
    path (``-1`` when the player never acted).
    """

    name: str
    rules: Any
    parent: np.ndarray
    player: np.ndarray
    infoset: np.ndarray
    depth: int
    infosets: list[Infoset]
    term_reach: np.ndarray
    term_utility: np.ndarray
    term_infoset: np.ndarray  # shape (n_terminals, 2)
    term_action: np.ndarray  # shape (n_terminals, 2)
    observed_sizes: list[int] = field(default_factory=list)
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def n_histories(self) -> int:
        return len(self.parent)

    @property
    def n_terminals(self) -> int:
        return len(self.term_utility)

    @property
    def perfect_recall(self) -> bool:
        """True when the observed keys already have perfect recall."""
        return len(self.observed_sizes) == len(self.infosets)

    def player_infosets(self, player: int) -> list[Infoset]:
        return [info for info in self.infosets if info.player == player]


def build_game(rules: GameRules) -> ExtensiveGame:
    parent: list[int] = []
    player: list[int] = []
    infoset_of: list[int] = []
    infosets: list[Infoset] = []
    index: dict[tuple, int] = {}
    observed: dict[tuple[int, Hashable], int] = {}
    observed_sizes: list[int] = []
    observed_actions: list[tuple[str, ...]] = []
    term_reach: list[float] = []
    term_utility: list[float] = []
    term_seq: list[tuple[int, int, int, int]] = []
    max_len = 0

    # Explicit stack: (state, parent history, chance reach, own last (infoset, action) per player, length)
    stack = [(rules.initial_state(), -1, 1.0, (-1, -1), (-1, -1), 0)]
    while stack:
        state, par, reach, last1, last2, length = stack.pop()
        h = len(parent)
        parent.append(par)
        if length > max_len:
            max_len = length
        node = rules.expand(state)
        if isinstance(node, Terminal):
            player.append(TERMINAL)
            infoset_of.append(-1)
            term_reach.append(reach)
            term_utility.append(float(node.utility))
            term_seq.append((*last1, *last2))
            continue
        if isinstance(node, Chance):
            player.append(CHANCE)
            infoset_of.append(-1)
            total = sum(p for _, p, _ in node.outcomes)
            if abs(total - 1.0) > 1e-12:
                raise ValueError(f"{rules.name}: chance outcomes sum to {total}")
            for _, p, child in reversed(node.outcomes):
                stack.append((child, h, reach * p, last1, last2, length + 1))
            continue
        p = node.player
        own_last = last1 if p == P1 else last2
        parent_info = None if own_last[0] < 0 else own_last
        labels = tuple(label for label, _ in node.moves)
        o = observed.get((p, node.key))
        if o is None:
            o = len(observed_sizes)
            observed[(p, node.key)] = o
            observed_sizes.append(0)
            observed_actions.append(labels)
        if observed_actions[o] != labels:
            raise ValueError(f"{rules.name}: infoset {node.key!r} has inconsistent action sets")
        observed_sizes[o] += 1
        i = index.get((p, node.key, parent_info))
        if i is None:
            i = len(infosets)
            index[(p, node.key, parent_info)] = i
            infosets.append(Infoset(i, p, node.key, labels, parent_info))
        info = infosets[i]
        info.size += 1
        player.append(p)
        infoset_of.append(i)
        for a in range(len(node.moves) - 1, -1, -1):
            child = node.moves[a][1]
            if p == P1:
                stack.append((child, h, reach, (i, a), last2, length + 1))
            else:
                stack.append((child, h, reach, last1, (i, a), length + 1))

    seqs = np.array(term_seq, dtype=np.int64).reshape(-1, 4)
    return ExtensiveGame(
        name=rules.name,
        rules=rules,
        parent=np.array(parent, dtype=np.int64),
        player=np.array(player, dtype=np.int8),
        infoset=np.array(infoset_of, dtype=np.int64),
        # Levels of the tree: the longest history has max_len actions.
        depth=max_len + 1,
        infosets=infosets,
        term_reach=np.array(term_reach),
        term_utility=np.array(term_utility),
        term_infoset=seqs[:, [0, 2]],
        term_action=seqs[:, [1, 3]],
        observed_sizes=observed_sizes,
    )


def game_stats(game: ExtensiveGame) -> GameStats:
    losses = -game.term_utility
    return GameStats(
        n_histories=game.n_histories,
        n_infosets=len(game.observed_sizes),
        n_terminals=game.n_terminals,
        depth=game.depth,
        max_infoset_size=max(game.observed_sizes),
        loss_range=float(losses.max() - losses.min()),
    )


def _node_maps(game: ExtensiveGame, player: int):
    # Shallow infosets first (discovery order within a depth), so that e.g.
    # Kuhn's three opening decisions become nodes 1..3.
    depth: dict[int, int] = {}
    for info in game.player_infosets(player):
        depth[info.id] = 0 if info.parent is None else depth[info.parent[0]] + 1
    infos = sorted(game.player_infosets(player), key=lambda info: (depth[info.id], info.id))
    node_of = {info.id: n + 1 for n, info in enumerate(infos)}
    return infos, node_of


def to_sdp(game: ExtensiveGame, player: int) -> SequentialDecisionProcess:
    """One decision node per infoset of ``player``, ordered by depth."""
    key = ("sdp", player)
    if key not in game._cache:
        infos, node_of = _node_maps(game, player)
        position = {info.id: n for n, info in enumerate(infos)}
        # Refined infosets share their observed key; tag them with the parent then.
        tag = not game.perfect_recall
        entries = [
            ((info.key, info.parent) if tag else info.key, info.actions, None if info.parent is None else (position[info.parent[0]], info.parent[1]))
            for info in infos
        ]
        game._cache[key] = SequentialDecisionProcess.from_parents(entries, player=player)
    return game._cache[key]


def sequence_ids(game: ExtensiveGame, player: int, infoset_ids: np.ndarray, actions: np.ndarray) -> np.ndarray:
    sdp = to_sdp(game, player)
    lookup = np.zeros(len(game.infosets) + 1, dtype=np.int64)
    _, node_of = _node_maps(game, player)
    for info_id, node in node_of.items():
        lookup[info_id] = sdp.node_first_seq[node]
    out = lookup[infoset_ids] + actions
    out[infoset_ids < 0] = 0  # never acted: the dummy root sequence
    return out


class SparsePayoffMatrix:
    """Player 1's loss matrix over (player 1 sequence, player 2 sequence).

    Chance probabilities are folded in, so ``x @ A @ y`` is player 1's
    expected loss.
    """

    def __init__(self, matrix: sp.spmatrix):
        self.csr = sp.csr_matrix(matrix)
        self.csr.sum_duplicates()
        self.csr.eliminate_zeros()
        self.csr_t = self.csr.T.tocsr()

    @property
    def shape(self) -> tuple[int, int]:
        return self.csr.shape

    def entries(self) -> list[tuple[int, int, float]]:
        coo = self.csr.tocoo()
        return sorted(zip(coo.row.tolist(), coo.col.tolist(), coo.data.tolist()))

    def value(self, x, y) -> float:
        return float(np.asarray(x) @ (self.csr @ np.asarray(y)))

    def loss_p1(self, y: np.ndarray) -> np.ndarray:
        return self.csr @ y

    def loss_p2(self, x: np.ndarray) -> np.ndarray:
        return -(self.csr_t @ x)


def build_payoff_matrix(game: ExtensiveGame) -> SparsePayoffMatrix:
    if "A" not in game._cache:
        rows = sequence_ids(game, P1, game.term_infoset[:, 0], game.term_action[:, 0])
        cols = sequence_ids(game, P2, game.term_infoset[:, 1], game.term_action[:, 1])
        data = -game.term_reach * game.term_utility
        shape = (to_sdp(game, P1).n_sequences, to_sdp(game, P2).n_sequences)
        game._cache["A"] = SparsePayoffMatrix(sp.coo_matrix((data, (rows, cols)), shape=shape))
    return game._cache["A"]


@dataclass(frozen=True)
class SequenceFormGame:
    """Bilinear saddle-point form ``min_x max_y x^T A y`` of a game."""

    name: str
    sdp_x: SequentialDecisionProcess
    sdp_y: SequentialDecisionProcess
    A: SparsePayoffMatrix
    stats: GameStats

    def sdp(self, player: int) -> SequentialDecisionProcess:
        return self.sdp_x if player == P1 else self.sdp_y

    def expected_loss(self, x, y) -> float:
        return self.A.value(x, y)


def sequence_form(game: ExtensiveGame) -> SequenceFormGame:
    if "sfg" not in game._cache:
        game._cache["sfg"] = SequenceFormGame(game.name, to_sdp(game, P1), to_sdp(game, P2), build_payoff_matrix(game), game_stats(game))
    return game._cache["sfg"]


def loss_gradient(A: SparsePayoffMatrix, opponent_strategy, player: int) -> np.ndarray:
    """Loss vector over ``player``'s sequences: ``A y`` for player 1, ``-A^T x`` for player 2."""
    vec = np.asarray(opponent_strategy, dtype=float)
    expected = A.shape[1] if player == P1 else A.shape[0]
    if vec.shape != (expected,):
        raise ValueError(f"opponent strategy has shape {vec.shape}, expected ({expected},)")
    return A.loss_p1(vec) if player == P1 else A.loss_p2(vec)
