"""Experiment configuration."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..core import game_from_dict

Algorithm = Literal["hedge", "fpl", "bm", "algo1", "combined"]
AdversaryKind = Literal["fixed_mixed", "adaptive_br", "self_play", "iid_random"]

# Blum-Mansour over the full action set solves a dense N x N fixed point every round.
BM_MAX_ACTIONS = 256


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    game: dict[str, Any]
    algorithm: Algorithm
    adversary: AdversaryKind
    T: int = Field(ge=1)
    seeds: list[int] = Field(min_length=1)
    out: Optional[str] = None
    # "oracle" seeds the support with the pure best response to opponent action 0
    initial_support: Literal["oracle", "zero"] = "oracle"
    opponent_algorithm: Optional[Algorithm] = None
    opponent_game: Optional[dict[str, Any]] = None
    checkpoints: list[int] = Field(default_factory=list)

    @field_validator("game", "opponent_game")
    @classmethod
    def _parse_game(cls, doc):
        if doc is not None:
            game_from_dict(doc)
        return doc

    @model_validator(mode="after")
    def _check_combination(self):
        n = int(self.game["n"])
        algs = {self.algorithm, self.opponent_algorithm or self.algorithm}
        if self.adversary != "self_play" and (self.opponent_algorithm or self.opponent_game):
            raise ValueError("opponent_algorithm and opponent_game only apply to self_play")
        if self.adversary == "self_play":
            if self.opponent_game is not None and int(self.opponent_game["n"]) != n:
                raise ValueError("both players need the same action count")
        if "bm" in algs and n > BM_MAX_ACTIONS:
            raise ValueError(f"bm over the full action set is limited to N <= {BM_MAX_ACTIONS}")
        if "fpl" in algs or "combined" in algs:
            if n < 2:
                raise ValueError("fpl and combined need N >= 2")
        if any(c < 1 or c > self.T for c in self.checkpoints):
            raise ValueError("checkpoints must lie in [1, T]")
        return self

    def build_game(self):
        return game_from_dict(self.game)

    def build_opponent_game(self):
        """Second player's own-action payoff matrix for self-play.

        Defaults to the first player's matrix, i.e. ``B = A^T`` when ``B``
        is indexed by (player-1 action, player-2 action).
        """
        if self.opponent_game is not None:
            return game_from_dict(self.opponent_game)
        return self.build_game()


def load_config(path: str | Path) -> ExperimentConfig:
    return ExperimentConfig.model_validate(json.loads(Path(path).read_text()))
