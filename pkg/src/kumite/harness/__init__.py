from .agents import AgentHandle, Policy, hold_agent, random_agent, sequence_agent
from .baseline import (
    TrainingResult,
    evaluate_agent,
    load_policy_agent,
    save_policy,
    search_agent_train,
)
from .bench import BenchRow, benchmark, render_bench, warm_kernel
from .crossplay import (
    AntisymmetryReport,
    CrossPlayMatrix,
    antisymmetry_report,
    crossplay_evaluate,
    play_episode,
    render_matrix,
    render_report,
)
from .pool import OpponentPoolConfig, select_opponent, simulate_schedule
