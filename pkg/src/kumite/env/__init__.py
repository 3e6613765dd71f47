from .client import EnvClient, EnvClientError, ProtocolOrderError, ServerReportedError
from .observations import (
    GameState,
    OBS_CLIP,
    OBS_SCALE,
    ObservationVector,
    PlayerState,
    game_state_from_match,
    game_state_from_message,
    mirror_game_state,
    mirror_observation,
    normalize_observation,
)
from .rewards import reward_destroy_uke, reward_win_loss
from .tasks import PRESETS, TaskConfig, TaskEnv, TaskError, task_config
