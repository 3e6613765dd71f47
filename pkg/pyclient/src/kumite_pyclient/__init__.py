"""Thin socket client for the kumite combat-environment protocol."""
from .client import (
    ClientError,
    ControlClient,
    GameState,
    OrderError,
    PlayerState,
    ServerError,
    WireError,
    format_action,
    normalize_observation,
    parse_frame_line,
    parse_state_line,
)
from .tasks import PRESETS, Preset, TaskSession

__version__ = "0.1.0"
