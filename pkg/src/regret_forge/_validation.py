"""Input checks shared by the solver and the CLI."""

from __future__ import annotations

import numbers

import numpy as np

from .games.base import ExtensiveGame, SequenceFormGame, sequence_form


def check_positive_int(value, name: str) -> int:
    if isinstance(value, bool) or not isinstance(value, numbers.Integral) or value < 1:
        raise ValueError(f"{name} must be a positive integer, got {value!r}")
    return int(value)


def check_game(game) -> SequenceFormGame:
    """Accept a game string, an extensive game or a sequence-form game."""
    if isinstance(game, SequenceFormGame):
        return game
    if isinstance(game, ExtensiveGame):
        return sequence_form(game)
    if isinstance(game, str):
        from .games import load

        return load(game)
    raise TypeError(f"expected a game name, ExtensiveGame or SequenceFormGame, got {type(game).__name__}")


def flat_local(sdp, local) -> np.ndarray:
    """Flat per-sequence local strategy from an array or a ``{node: probs}`` map."""
    if isinstance(local, dict):
        from .sdp import _flat_locals

        return _flat_locals(sdp, local)
    arr = np.asarray(local, dtype=float)
    if arr.shape != (sdp.n_sequences,):
        raise ValueError(f"local strategy has shape {arr.shape}, expected ({sdp.n_sequences},)")
    return arr
