"""Best responses, exploitability and weighted-regret audits."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .games.base import P1, SequenceFormGame

EXPLOITABILITY_FLOOR = 1e-12


@dataclass(frozen=True)
class ConvergenceRecord:
    iteration: int
    exploitability: float
    delta1: float
    delta2: float
    elapsed_ms: float = 0.0

    def as_row(self) -> tuple:
        return (self.iteration, self.exploitability, self.delta1, self.delta2, self.elapsed_ms)


def best_response_value(game: SequenceFormGame, opponent, player: int) -> float:
    """``min_x' x'^T A y`` for player 1, ``max_y' x^T A y'`` for player 2."""
    opp = np.asarray(opponent, dtype=float)
    if player == P1:
        return game.sdp_x.best_response_value(game.A.loss_p1(opp))
    return game.sdp_y.best_response_value(-game.A.loss_p2(opp), maximize=True)


def nash_gaps(game: SequenceFormGame, x, y) -> tuple[float, float]:
    """Raw ``(delta1, delta2)``; tiny negatives from rounding are kept."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    value = game.A.value(x, y)
    return value - best_response_value(game, y, P1), best_response_value(game, x, 2) - value


def exploitability(game: SequenceFormGame, x, y) -> tuple[float, float, float]:
    """``(e, delta1, delta2)`` with ``e = (delta1 + delta2) / 2``, unfloored."""
    d1, d2 = nash_gaps(game, x, y)
    return (d1 + d2) / 2, d1, d2


def make_record(game: SequenceFormGame, x, y, iteration: int, elapsed_ms: float = 0.0) -> ConvergenceRecord:
    _, d1, d2 = exploitability(game, x, y)
    d1, d2 = max(d1, 0.0), max(d2, 0.0)
    e = max((d1 + d2) / 2, EXPLOITABILITY_FLOOR)
    return ConvergenceRecord(iteration, e, d1, d2, elapsed_ms)


def weighted_regret(sdp, losses: Sequence[np.ndarray], strategies: Sequence[np.ndarray], taus: Sequence[float]) -> float:
    """``sum_t tau_t <l_t, x_t> - min_x' <sum_t tau_t l_t, x'>`` over the SDP's polytope."""
    if not (len(losses) == len(strategies) == len(taus)):
        raise ValueError(f"history lengths differ: {len(losses)} losses, {len(strategies)} strategies, {len(taus)} weights")
    if not losses:
        return 0.0
    total = np.zeros(sdp.n_sequences)
    realized = 0.0
    for loss, x, tau in zip(losses, strategies, taus):
        loss = np.asarray(loss, dtype=float)
        realized += tau * float(loss @ np.asarray(x, dtype=float))
        total += tau * loss
    return realized - sdp.best_response_value(total)


class RegretAudit:
    """Accumulates weighted regrets of both players from solver hook events.

    Each player's regret is measured on the iterate pairs that enter the
    averages, ``(x^t, y^t)``: player 1 against ``A y^t`` and player 2
    against ``-A^T x^t``. The accumulators are running sums, so no history
    is stored.
    """

    def __init__(self, game: SequenceFormGame, tau):
        self.game = game
        self.tau = tau
        self.t = 0
        self.tau_sum = 0.0
        self._x = self._y = None
        self.realized = [0.0, 0.0]
        self.total_loss = [np.zeros(game.sdp_x.n_sequences), np.zeros(game.sdp_y.n_sequences)]

    def observe_pair(self, x, y):
        self.t += 1
        tau = float(self.tau(self.t))
        self.tau_sum += tau
        lx = self.game.A.loss_p1(y)
        ly = self.game.A.loss_p2(x)
        self.realized[0] += tau * float(lx @ x)
        self.realized[1] += tau * float(ly @ y)
        self.total_loss[0] += tau * lx
        self.total_loss[1] += tau * ly

    def regrets(self) -> tuple[float, float]:
        rx = self.realized[0] - self.game.sdp_x.best_response_value(self.total_loss[0])
        ry = self.realized[1] - self.game.sdp_y.best_response_value(self.total_loss[1])
        return rx, ry


class RegretBound:
    """Running value of the node-wise regret bound for (P)WCFR+.

    ``sum_j sqrt(c * tau1/w1 * sum_t tau_t w_t ||q_j^t||^2) / sum_t tau_t``
    where ``q = r`` and ``c = 1`` for WCFR+, ``q = r - v`` and ``c = 2``
    for PWCFR+. Feed it the per-sequence instantaneous regrets (and the
    prediction that produced the current strategy) of both players.
    """

    def __init__(self, sdps, w, tau, optimistic: bool = False):
        self.sdps = sdps
        self.w = w
        self.tau = tau
        self.optimistic = optimistic
        self.sq = [np.zeros(sdp.n_nodes) for sdp in sdps]
        self.tau_sum = 0.0
        self.t = 0

    def observe(self, player_index: int, t: int, r: np.ndarray, v: np.ndarray | None):
        q = r - v if (self.optimistic and v is not None) else r
        sdp = self.sdps[player_index]
        self.sq[player_index] += float(self.tau(t)) * float(self.w(t)) * sdp.node_sums(q * q)
        if player_index == 0:
            self.t = t
            self.tau_sum += float(self.tau(t))

    def value(self) -> float:
        c = (2.0 if self.optimistic else 1.0) * float(self.tau(1)) / float(self.w(1))
        total = sum(float(np.sqrt(c * sq[1:]).sum()) for sq in self.sq)  # node 0 is the dummy root
        return total / self.tau_sum


def cfr_rate_bound(stats, n_infosets: int, n_actions: int, T: int) -> float:
    """Vanilla CFR guarantee ``Delta (|J_x| + |J_y|) sqrt(|A|) / sqrt(T)``."""
    return stats.loss_range * n_infosets * np.sqrt(n_actions) / np.sqrt(T)
