"""Task reward functions."""
from __future__ import annotations

from .observations import GameState

INJURY_REWARD_NORM = 5000.0


def reward_destroy_uke(prev: GameState, cur: GameState) -> float:
    """(delta opponent injury - delta own injury) / 5000 for the agent as
    player 0.  The formula is applied literally, with no clamping: it can go
    negative when the agent takes more new damage than it deals."""
    du = cur.players[1].injury - prev.players[1].injury
    dp = cur.players[0].injury - prev.players[0].injury
    return (du - dp) / INJURY_REWARD_NORM


def reward_win_loss(gs: GameState, viewpoint: int) -> float:
    """Terminal +-1 for win/loss, 0 for a draw and for every non-terminal
    turn (the self-play task's reward)."""
    if not gs.terminal or gs.winner in (0, 3):
        return 0.0
    return 1.0 if gs.winner - 1 == viewpoint else -1.0
