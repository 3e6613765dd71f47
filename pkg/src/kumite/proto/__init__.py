from .messages import (
    Act,
    Err,
    FieldCountError,
    FloatParseError,
    Frame,
    Hello,
    MalformedTag,
    Message,
    NewGame,
    Ok,
    PLAYER_BLOCK_FIELDS,
    PROTOCOL_VERSION,
    PlayerBlock,
    ProtocolError,
    Quit,
    RangeError,
    Reset,
    ReplayLoad,
    ReplaySave,
    STATE_FIELDS,
    State,
    Step,
    decode_message,
    encode_message,
)
from .server import (
    GameServer,
    ServerConfig,
    build_state,
    default_port,
    frame_message,
    parse_wire_settings,
    serve,
)
from .gateway import Gateway, GatewayConfig, gateway
