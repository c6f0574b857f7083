"""Regret minimization for games with a hidden dominant action set."""

from .combined import CombinedLearner
from .core import GameMatrix, HiddenGame, MixedStrategy, make_hidden_game, make_uniform_game
from .hidden import HiddenSetSwap
from .learners import FPL, Hedge
from .metrics import RegretTracker, ce_gap, cce_gap, external_regret, swap_regret
from .swap import BlumMansour, stationary

__all__ = [
    "BlumMansour", "CombinedLearner", "FPL", "GameMatrix", "Hedge", "HiddenGame",
    "HiddenSetSwap", "MixedStrategy", "RegretTracker", "ce_gap", "cce_gap",
    "external_regret", "make_hidden_game", "make_uniform_game", "stationary", "swap_regret",
]
