"""Sequential decision processes and sequence-form strategies.

A :class:`SequentialDecisionProcess` is one player's view of a game: decision
nodes where the player picks an action, and observation nodes where the
player receives a signal before reaching the next decision node. Node 0 is
always the dummy root with the single action ``"start"``; its sequence has
index 0.

Sequences of a decision node are contiguous, laid out in node order, so a
flat array over sequences can be reduced per node with ``np.add.reduceat``.
All heavy routines in the package work on such flat arrays.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Mapping, Sequence

import numpy as np

from .exceptions import InvalidStrategyError, MissingLocalStrategyError

TOL = 1e-12
ROOT_ACTION = "start"


@dataclass(frozen=True)
class DecisionNode:
    id: int
    key: Hashable
    actions: tuple[str, ...]
    parent_seq: int  # -1 only for the dummy root
    first_seq: int

    @property
    def n(self) -> int:
        return len(self.actions)

    @property
    def sequences(self) -> range:
        return range(self.first_seq, self.first_seq + self.n)


@dataclass(frozen=True)
class ObservationNode:
    """Observation node reached right after sequence ``parent_seq``.

    ``signals[i]`` leads to decision node ``children[i]``. Sequences that
    only lead to terminal histories get an observation node without signals.
    """

    id: int
    parent_seq: int
    signals: tuple[Hashable, ...]
    children: tuple[int, ...]


@dataclass(frozen=True)
class LocalStrategy:
    node_id: int
    probs: np.ndarray

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float)
        if probs.ndim != 1 or probs.size == 0:
            raise InvalidStrategyError(f"node {self.node_id}: local strategy must be a non-empty vector")
        if np.any(probs < 0):
            raise InvalidStrategyError(f"node {self.node_id}: negative probability in {probs}")
        if abs(probs.sum() - 1.0) > TOL:
            raise InvalidStrategyError(f"node {self.node_id}: probabilities sum to {probs.sum()!r}, not 1")
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)


@dataclass(frozen=True)
class SequenceFormStrategy:
    """Reach-probability vector indexed by sequence id."""

    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)

    def __len__(self):
        return len(self.values)

    def __getitem__(self, item):
        return self.values[item]


@dataclass(frozen=True)
class _Level:
    nodes: np.ndarray  # decision node ids at this depth
    seqs: np.ndarray  # their sequences, grouped by node
    offsets: np.ndarray  # start of each node's group inside ``seqs``
    parent_seqs: np.ndarray  # parent sequence of each node


class SequentialDecisionProcess:
    """One player's tree of decision and observation nodes.

    Build instances with :meth:`from_parents`; the constructor expects the
    node list in its final (dense, parent-before-child) order.
    """

    def __init__(self, nodes: Sequence[DecisionNode], player: int | None = None):
        self.player = player
        self.nodes: tuple[DecisionNode, ...] = tuple(nodes)
        self.n_sequences = sum(node.n for node in self.nodes)

        seq_node = np.empty(self.n_sequences, dtype=np.int64)
        seq_action = np.empty(self.n_sequences, dtype=np.int64)
        for node in self.nodes:
            seq_node[node.first_seq:node.first_seq + node.n] = node.id
            seq_action[node.first_seq:node.first_seq + node.n] = np.arange(node.n)
        self.seq_node = _frozen(seq_node)
        self.seq_action = _frozen(seq_action)
        self.node_first_seq = _frozen(np.array([n.first_seq for n in self.nodes], dtype=np.int64))
        self.node_size = _frozen(np.array([n.n for n in self.nodes], dtype=np.int64))
        self.node_parent_seq = _frozen(np.array([n.parent_seq for n in self.nodes], dtype=np.int64))
        self.seq_parent = _frozen(self.node_parent_seq[self.seq_node])

        depth = np.zeros(len(self.nodes), dtype=np.int64)
        for node in self.nodes[1:]:
            depth[node.id] = depth[seq_node[node.parent_seq]] + 1
        self.node_depth = _frozen(depth)

        children: dict[int, list[int]] = {}
        for node in self.nodes[1:]:
            children.setdefault(node.parent_seq, []).append(node.id)
        self._children = {s: tuple(c) for s, c in children.items()}
        self.observations = tuple(
            ObservationNode(
                id=s,
                parent_seq=s,
                signals=tuple(self.nodes[c].key for c in self._children.get(s, ())),
                children=self._children.get(s, ()),
            )
            for s in range(self.n_sequences)
        )
        self._key_to_node = {node.key: node.id for node in self.nodes}

        levels = []
        for d in range(1, int(depth.max(initial=0)) + 1):
            ids = np.flatnonzero(depth == d)
            seqs = np.concatenate([np.arange(self.node_first_seq[j], self.node_first_seq[j] + self.node_size[j]) for j in ids])
            offsets = np.concatenate([[0], np.cumsum(self.node_size[ids])[:-1]])
            levels.append(_Level(_frozen(ids), _frozen(seqs), _frozen(offsets), _frozen(self.node_parent_seq[ids])))
        self.levels: tuple[_Level, ...] = tuple(levels)
        self.uniform = _frozen(1.0 / self.node_size[self.seq_node])

    @classmethod
    def from_parents(cls, entries: Sequence[tuple[Hashable, Sequence[str], tuple[int, int] | None]], player=None):
        """Build from ``(key, actions, parent)`` triples.

        ``parent`` is ``(index_into_entries, action_index)`` for the player's
        previous decision, or ``None`` when the node hangs off the dummy root.
        Entries must list parents before children. Decision node ``i + 1``
        corresponds to ``entries[i]``.
        """
        nodes = [DecisionNode(0, None, (ROOT_ACTION,), -1, 0)]
        next_seq = 1
        for i, (key, actions, parent) in enumerate(entries):
            if parent is None:
                parent_seq = 0
            else:
                p, a = parent
                if not 0 <= p < i:
                    raise ValueError(f"entry {i}: parent {p} must precede it")
                parent_seq = nodes[p + 1].first_seq + a
                if a >= nodes[p + 1].n:
                    raise ValueError(f"entry {i}: parent action {a} out of range")
            nodes.append(DecisionNode(i + 1, key, tuple(actions), parent_seq, next_seq))
            next_seq += len(actions)
        return cls(nodes, player=player)

    # -- structure ---------------------------------------------------------

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    def sequence_index(self, node: int, action: int | str) -> int:
        dn = self.nodes[node]
        if isinstance(action, str):
            action = dn.actions.index(action)
        if not 0 <= action < dn.n:
            raise IndexError(f"action {action} out of range at node {node}")
        return dn.first_seq + action

    def sequences(self) -> list[tuple[int, int]]:
        return [(int(j), int(a)) for j, a in zip(self.seq_node, self.seq_action)]

    def node_of(self, key: Hashable) -> int:
        return self._key_to_node[key]

    def seq(self, key: Hashable, action: str) -> int:
        """Sequence id of ``action`` at the decision node with infoset ``key``."""
        return self.sequence_index(self.node_of(key), action)

    def transition(self, node: int, action: int) -> int:
        """rho(j, a): the observation node following ``action`` at ``node``."""
        return self.sequence_index(node, action)

    def observe(self, observation: int, signal: Hashable) -> int:
        """rho(k, s): the decision node reached by ``signal`` at observation ``k``."""
        obs = self.observations[observation]
        return obs.children[obs.signals.index(signal)]

    def children(self, node: int, action: int) -> frozenset[int]:
        """C(j, a): decision nodes reachable right after ``action`` at ``node``."""
        return frozenset(self._children.get(self.sequence_index(node, action), ()))

    # -- flat-array kernels --------------------------------------------------

    def node_sums(self, flat: np.ndarray) -> np.ndarray:
        return np.add.reduceat(flat, self.node_first_seq)

    def normalize(self, flat: np.ndarray) -> np.ndarray:
        """Normalize a nonnegative flat vector node by node; 0/0 gives uniform."""
        sums = self.node_sums(flat)[self.seq_node]
        out = self.uniform.copy()
        pos = sums > 0
        out[pos] = flat[pos] / sums[pos]
        return out

    def reach(self, local: np.ndarray) -> np.ndarray:
        """Sequence form of a flat local strategy (top-down path products)."""
        out = np.empty(self.n_sequences)
        out[0] = 1.0
        for level in self.levels:
            out[level.seqs] = local[level.seqs] * out[self.seq_parent[level.seqs]]
        return out

    def behavioral(self, seq: np.ndarray) -> np.ndarray:
        """Flat local strategy of a sequence-form vector; zero parent mass gives uniform."""
        parent_mass = np.ones(self.n_sequences)
        parent_mass[1:] = seq[self.seq_parent[1:]]
        out = self.uniform.copy()
        pos = parent_mass > 0
        out[pos] = seq[pos] / parent_mass[pos]
        return out

    def counterfactual(self, local: np.ndarray, seq_loss: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Bottom-up counterfactual losses.

        Returns ``(cf, node_value)`` where ``cf[s]`` is the counterfactual
        loss of sequence ``s`` and ``node_value[j] = <cf_j, x_j>``.
        """
        cf = np.array(seq_loss, dtype=float)
        for level in reversed(self.levels):
            vals = np.add.reduceat(local[level.seqs] * cf[level.seqs], level.offsets)
            np.add.at(cf, level.parent_seqs, vals)
        return cf, self.node_sums(local * cf)

    def best_response_value(self, seq_loss: np.ndarray, maximize: bool = False) -> float:
        """Optimal value of ``<seq_loss, x>`` over the sequence-form polytope."""
        return float(self._best_response_dp(seq_loss, maximize)[0])

    def best_response(self, seq_loss: np.ndarray, maximize: bool = False) -> tuple[float, np.ndarray]:
        """Optimal value and a pure optimizer in sequence form.

        Ties go to the lowest action index.
        """
        cf = self._best_response_dp(seq_loss, maximize)
        local = np.zeros(self.n_sequences)
        local[0] = 1.0
        for level in self.levels:
            block = cf[level.seqs]
            seg = np.repeat(np.arange(len(level.nodes)), self.node_size[level.nodes])
            reduce = np.maximum if maximize else np.minimum
            best = reduce.reduceat(block, level.offsets)
            hits = np.flatnonzero(block == best[seg])
            _, first = np.unique(seg[hits], return_index=True)
            local[level.seqs[hits[first]]] = 1.0
        return float(cf[0]), self.reach(local)

    def _best_response_dp(self, seq_loss, maximize):
        cf = np.array(seq_loss, dtype=float)
        reduce = np.maximum if maximize else np.minimum
        for level in reversed(self.levels):
            vals = reduce.reduceat(cf[level.seqs], level.offsets)
            np.add.at(cf, level.parent_seqs, vals)
        return cf


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


def normalize_simplex(v) -> np.ndarray:
    """``v / |v|_1``, or the uniform distribution when ``v`` is all zeros."""
    v = np.asarray(v, dtype=float)
    if np.any(v < 0):
        raise ValueError(f"normalize_simplex needs nonnegative entries, got {v}")
    total = v.sum()
    if total > 0:
        return v / total
    return np.full(v.shape, 1.0 / v.size)


def _flat_locals(sdp: SequentialDecisionProcess, locals_: Mapping[int, LocalStrategy | Sequence[float]]) -> np.ndarray:
    flat = np.empty(sdp.n_sequences)
    flat[0] = 1.0
    for node in sdp.nodes[1:]:
        try:
            local = locals_[node.id]
        except KeyError:
            raise MissingLocalStrategyError(f"no local strategy for decision node {node.id} ({node.key!r})") from None
        probs = local.probs if isinstance(local, LocalStrategy) else np.asarray(local, dtype=float)
        if probs.shape != (node.n,):
            raise InvalidStrategyError(f"node {node.id}: expected {node.n} probabilities, got {probs.shape}")
        flat[node.first_seq:node.first_seq + node.n] = probs
    return flat


def build_sequence_form(sdp: SequentialDecisionProcess, locals_: Mapping[int, LocalStrategy | Sequence[float]]) -> SequenceFormStrategy:
    """Sequence-form strategy from local strategies (root may be omitted)."""
    return SequenceFormStrategy(sdp.reach(_flat_locals(sdp, locals_)))


def decompose(sdp: SequentialDecisionProcess, seq: SequenceFormStrategy | np.ndarray) -> dict[int, LocalStrategy]:
    values = np.asarray(seq, dtype=float)
    report = validate_seq(sdp, values)
    if report:
        raise InvalidStrategyError("; ".join(report))
    flat = sdp.behavioral(values)
    locals_ = {}
    for node in sdp.nodes:
        probs = flat[node.first_seq:node.first_seq + node.n]
        # Path products can leave the sum off by an ulp or two.
        locals_[node.id] = LocalStrategy(node.id, probs / probs.sum())
    return locals_


def validate(sdp: SequentialDecisionProcess) -> list[str]:
    """Structural problems of ``sdp``; an empty list means it is well formed."""
    problems = []
    roots = [n.id for n in sdp.nodes if n.parent_seq < 0]
    if roots != [0]:
        problems.append(f"expected exactly one dummy root at node 0, found roots {roots}")
    if sdp.nodes and sdp.nodes[0].n != 1:
        problems.append(f"dummy root must have exactly one action, has {sdp.nodes[0].n}")
    expected = 0
    for node in sdp.nodes:
        if node.first_seq != expected:
            problems.append(f"node {node.id}: sequences start at {node.first_seq}, expected {expected}")
        expected = node.first_seq + node.n
        if node.n == 0:
            problems.append(f"node {node.id}: empty action set")
        if node.id > 0 and not 0 <= node.parent_seq < node.first_seq:
            problems.append(f"node {node.id}: parent sequence {node.parent_seq} is not an earlier sequence")
    if expected != sdp.n_sequences:
        problems.append(f"sequence index covers {expected} ids, expected {sdp.n_sequences}")
    pairs = sdp.sequences()
    if len(set(pairs)) != len(pairs):
        problems.append("sequence index is not injective")
    for node in sdp.nodes:
        for a in range(node.n):
            via_obs = {sdp.observe(sdp.transition(node.id, a), s) for s in sdp.observations[sdp.transition(node.id, a)].signals}
            if via_obs != sdp.children(node.id, a):
                problems.append(f"node {node.id} action {a}: C(j,a) disagrees with observation transitions")
    return problems


def validate_seq(sdp: SequentialDecisionProcess, seq, tol: float = TOL) -> list[str]:
    """Violated sequence-form invariants of ``seq``, with locations."""
    values = np.asarray(seq, dtype=float)
    if values.shape != (sdp.n_sequences,):
        return [f"expected {sdp.n_sequences} entries, got shape {values.shape}"]
    problems = []
    if abs(values[0] - 1.0) > tol:
        problems.append(f"root mass: value at root sequence is {values[0]!r}, expected 1")
    bad = np.flatnonzero((values < -tol) | (values > 1 + tol))
    for s in bad[:10]:
        problems.append(f"range: sequence {s} has value {values[s]!r} outside [0, 1]")
    sums = sdp.node_sums(values)
    for node in sdp.nodes[1:]:
        parent = values[node.parent_seq]
        if abs(sums[node.id] - parent) > tol:
            problems.append(
                f"flow constraint at node {node.id} ({node.key!r}): children sum {sums[node.id]!r} != parent {parent!r}"
            )
    return problems
