"""Benchmark games and a small name-based registry.

Game strings look like ``kuhn``, ``liars_dice:4``, ``goofspiel_imp:5``,
``nfg:3`` or ``nfg:file=path/to/matrix.txt``.
"""

from __future__ import annotations

from functools import lru_cache

from ..exceptions import UnknownGameError
from .base import (
    CHANCE,
    P1,
    P2,
    ExtensiveGame,
    GameStats,
    SequenceFormGame,
    SparsePayoffMatrix,
    build_game,
    build_payoff_matrix,
    game_stats,
    loss_gradient,
    sequence_form,
    to_sdp,
)
from .battleship import Battleship
from .dice_cards import Goofspiel, LiarsDice
from .nfg import NormalFormGame
from .poker import KUHN_VALUE, KuhnPoker, LeducPoker

SUPPORTED = (
    "kuhn",
    "leduc",
    "liars_dice:4",
    "liars_dice:5",
    "goofspiel:4",
    "goofspiel:5",
    "goofspiel_imp:4",
    "goofspiel_imp:5",
    "battleship:2",
    "battleship:3",
    "nfg:2",
    "nfg:3",
    "nfg:file=<path>",
)


def _unknown(name: str) -> UnknownGameError:
    return UnknownGameError(f"unknown game {name!r}; supported: {', '.join(SUPPORTED)}")


def make_rules(name: str):
    name = name.strip()
    base, _, param = name.partition(":")
    if base == "kuhn" and not param:
        return KuhnPoker()
    if base == "leduc" and not param:
        return LeducPoker()
    if base == "nfg":
        if param.startswith("file="):
            return NormalFormGame.from_file(param[len("file="):])
        if param in ("2", "3"):
            return NormalFormGame.preset(int(param))
        raise _unknown(name)
    sizes = {"liars_dice": (4, 5), "goofspiel": (4, 5), "goofspiel_imp": (4, 5), "battleship": (2, 3)}
    if base not in sizes or not param.isdigit() or int(param) not in sizes[base]:
        raise _unknown(name)
    x = int(param)
    if base == "liars_dice":
        return LiarsDice(x)
    if base == "battleship":
        return Battleship(x)
    return Goofspiel(x, imperfect=base == "goofspiel_imp")


def make_game(name: str) -> ExtensiveGame:
    """Build the full tree for a game string. Trees are cached per name."""
    if name.strip().startswith("nfg:file="):
        return build_game(make_rules(name))
    return _cached(name.strip())


@lru_cache(maxsize=None)
def _cached(name: str) -> ExtensiveGame:
    return build_game(make_rules(name))


def load(name: str) -> SequenceFormGame:
    return sequence_form(make_game(name))


__all__ = [
    "CHANCE", "KUHN_VALUE", "P1", "P2", "SUPPORTED", "Battleship", "ExtensiveGame", "GameStats", "Goofspiel",
    "KuhnPoker", "LeducPoker", "LiarsDice", "NormalFormGame", "SequenceFormGame", "SparsePayoffMatrix",
    "build_game", "build_payoff_matrix", "game_stats", "load", "loss_gradient", "make_game", "make_rules",
    "sequence_form", "to_sdp",
]
