"""The CFR loop over sequence-form games.

Each player keeps flat per-sequence arrays: cumulative regrets ``R``,
the current behavioral strategy, its sequence form, the pending prediction
and the running average ``X / W``. One iteration decomposes the player's
sequence loss into counterfactual losses, updates every node at once and
reassembles the sequence form.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from . import _validation
from .games.base import P1, P2, SequenceFormGame
from .metrics import ConvergenceRecord, exploitability, make_record
from .minimizers import UpdateRule, WeightSchedule, make_rule

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolverConfig:
    variant: str = "cfrplus"
    alpha: float | None = None
    beta: float | None = None
    gamma: float | None = None
    iterations: int = 1000
    alternating: bool = True
    eval_interval: int = 20
    schedule: WeightSchedule | None = None
    timing: bool = False

    def __post_init__(self):
        _validation.check_positive_int(self.iterations, "iterations")
        _validation.check_positive_int(self.eval_interval, "eval_interval")
        self.rule()  # rejects unknown variants and misplaced hyperparameters

    def rule(self) -> UpdateRule:
        return make_rule(self.variant, self.alpha, self.beta, self.gamma, self.schedule)


@dataclass
class PlayerState:
    sdp: object
    R: np.ndarray
    local: np.ndarray
    seq: np.ndarray
    X: np.ndarray
    W: float = 0.0
    v: np.ndarray | None = None


@dataclass
class SolverState:
    game: SequenceFormGame
    rule: UpdateRule
    players: list[PlayerState]
    alternating: bool = True
    t: int = 0

    @classmethod
    def start(cls, game: SequenceFormGame, rule: UpdateRule, alternating: bool = True) -> "SolverState":
        players = []
        for sdp in (game.sdp_x, game.sdp_y):
            n = sdp.n_sequences
            local = sdp.uniform.copy()
            players.append(
                PlayerState(
                    sdp=sdp,
                    R=np.zeros(n),
                    local=local,
                    seq=sdp.reach(local),
                    X=np.zeros(n),
                    v=np.zeros(n) if rule.predictive else None,
                )
            )
        return cls(game, rule, players, alternating)


@dataclass(frozen=True)
class IterationEvent:
    """What a player saw and did at iteration ``t`` (passed to hooks)."""

    t: int
    player: int
    seq_loss: np.ndarray
    counterfactual: np.ndarray
    regret: np.ndarray
    prediction: np.ndarray | None  # the prediction that produced the current strategy
    strategy: np.ndarray  # sequence form before the update
    local: np.ndarray


def counterfactual_losses(sdp, local, seq_loss) -> dict[int, np.ndarray]:
    """Counterfactual loss vector of every decision node, keyed by node id."""
    local = _validation.flat_local(sdp, local)
    cf, _ = sdp.counterfactual(local, np.asarray(seq_loss, dtype=float))
    return {node.id: cf[node.first_seq : node.first_seq + node.n].copy() for node in sdp.nodes}


def _update_player(state: SolverState, index: int, seq_loss: np.ndarray, t: int, hook) -> None:
    ps = state.players[index]
    sdp, rule = ps.sdp, state.rule
    cf, node_value = sdp.counterfactual(ps.local, seq_loss)
    r = node_value[sdp.seq_node] - cf
    if hook is not None:
        hook(IterationEvent(t, index + 1, seq_loss, cf, r, ps.v, ps.seq, ps.local))
    ps.R = rule.update_regrets(ps.R, r, t)
    if rule.predictive:
        ps.v = r  # next regret is predicted to repeat the last one
    ps.local = sdp.normalize(rule.strategy_input(ps.R, ps.v, t))
    ps.seq = sdp.reach(ps.local)


def iterate(state: SolverState, hook: Callable[[IterationEvent], None] | None = None) -> SolverState:
    """One iteration; with alternation player 1 moves first and player 2 sees its new strategy."""
    t = state.t + 1
    A = state.game.A
    p1, p2 = state.players
    x_t, y_t = p1.seq, p2.seq
    _update_player(state, 0, A.loss_p1(y_t), t, hook)
    _update_player(state, 1, A.loss_p2(p1.seq if state.alternating else x_t), t, hook)
    rule = state.rule
    p1.X, p1.W = rule.accumulate(p1.X, p1.W, x_t, t)
    p2.X, p2.W = rule.accumulate(p2.X, p2.W, y_t, t)
    state.t = t
    return state


def average_strategy(state: SolverState, player: int) -> np.ndarray:
    if state.t < 1:
        raise ValueError("no iterations have been run")
    ps = state.players[player - 1]
    return ps.X / ps.W


@dataclass
class SolveResult:
    x: np.ndarray
    y: np.ndarray
    records: list[ConvergenceRecord]
    state: SolverState = field(repr=False)


def solve(game, config: SolverConfig, hook=None, audit=None) -> SolveResult:
    """Run ``config.iterations`` iterations, recording every ``eval_interval``.

    ``audit(state)`` is called at each record point, after the record is
    taken; it must not mutate the state.
    """
    game = _validation.check_game(game)
    state = SolverState.start(game, config.rule(), config.alternating)
    records = []
    T = config.iterations
    start = time.perf_counter()
    for t in range(1, T + 1):
        iterate(state, hook)
        if t % config.eval_interval == 0 or t == T:
            x, y = average_strategy(state, P1), average_strategy(state, P2)
            elapsed = round((time.perf_counter() - start) * 1000.0, 3) if config.timing else 0.0
            rec = make_record(game, x, y, t, elapsed)
            records.append(rec)
            log.debug("%s t=%d e=%.3e", game.name, t, rec.exploitability)
            if audit is not None:
                audit(state)
    return SolveResult(average_strategy(state, P1), average_strategy(state, P2), records, state)


class CFRSolver(BaseEstimator):
    """Estimator-style front end: ``CFRSolver(variant=...).fit(game)``.

    ``game`` may be a game string, an :class:`ExtensiveGame` or a
    :class:`SequenceFormGame`. After fitting, ``x_`` and ``y_`` hold the
    average sequence-form strategies and ``records_`` the convergence trace.
    """

    def __init__(
        self,
        variant: str = "cfrplus",
        alpha=None,
        beta=None,
        gamma=None,
        iterations: int = 1000,
        alternating: bool = True,
        eval_interval: int = 20,
        schedule=None,
    ):
        self.variant = variant
        self.alpha = alpha
        self.beta = beta
        self.gamma = gamma
        self.iterations = iterations
        self.alternating = alternating
        self.eval_interval = eval_interval
        self.schedule = schedule

    def _config(self) -> SolverConfig:
        return SolverConfig(**self.get_params())

    def fit(self, game, y=None):
        config = self._config()
        self.game_ = _validation.check_game(game)
        result = solve(self.game_, config)
        self.x_, self.y_ = result.x, result.y
        self.records_ = result.records
        self.exploitability_ = result.records[-1].exploitability
        return self

    def policy(self, player: int = P1) -> dict:
        """Average behavioral policy as ``{infoset key: {action: prob}}``."""
        check_is_fitted(self, "x_")
        sdp = self.game_.sdp(player)
        local = sdp.behavioral(self.x_ if player == P1 else self.y_)
        return {
            node.key: dict(zip(node.actions, local[node.first_seq : node.first_seq + node.n].tolist()))
            for node in sdp.nodes[1:]
        }

    def predict(self, X) -> list[np.ndarray]:
        """Action probabilities at each ``(player, infoset key)`` in ``X``."""
        check_is_fitted(self, "x_")
        out = []
        for player, key in X:
            sdp = self.game_.sdp(player)
            local = sdp.behavioral(self.x_ if player == P1 else self.y_)
            node = sdp.nodes[sdp.node_of(key)]
            out.append(local[node.first_seq : node.first_seq + node.n].copy())
        return out

    def score(self, game=None, y=None) -> float:
        """Negative exploitability of the fitted average profile (higher is better)."""
        check_is_fitted(self, "x_")
        target = self.game_ if game is None else _validation.check_game(game)
        e, _, _ = exploitability(target, self.x_, self.y_)
        return -e
