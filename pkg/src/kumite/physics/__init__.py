from .bodydef import (
    DT,
    GRAVITY_DEFAULT,
    GripMode,
    JointMode,
    N_ACTION,
    N_JOINTS,
    N_PARTS,
    JOINT_NAMES,
    PART_NAMES,
    body_layout,
    default_model,
    parse_character,
    CharacterFileError,
)
from .engine import ContactEvent, FrameEvents, compute_injury, step_frame
from .world import (
    InvalidActionError,
    SimulationFault,
    WorldState,
    all_hold_action,
    make_world,
    mirror_action,
    mirror_world,
    set_joint_modes,
    sever_joint,
    validate_action,
)
