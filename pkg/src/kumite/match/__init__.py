from .rules import (
    AIKIDO_SCHEDULE,
    DqDetail,
    MatchSettings,
    MatchSettingsError,
    MatchState,
    MatchTerminalError,
    Outcome,
    Reason,
    TurnReport,
    Winner,
    aikido_turnframes,
    check_disqualification,
    new_match,
    reset_match,
    submit_actions,
)
from .replay import (
    Replay,
    ReplayError,
    ReplayParseError,
    ReplayVersionError,
    frames_equal,
    load_replay,
    playback_step,
    record_replay,
    resimulate,
    save_replay,
)
