"""Opinion dynamics among dialog agents.

Trajectories are numpy arrays of shape (rounds, agents).
"""

from ._core import (
    OpinionLoomError,
    compose,
    consensus_check,
    dg_step,
    estimate,
    fixtures,
    fj_step,
    free_run,
    lexicon_score,
    load_trajectory,
    project_to_simplex,
    report,
    residual_sum,
    save_trajectory,
    simplex_ls_row,
    simulate,
    small_world,
    starter_prompt,
    system_prompt,
    turn_prompt,
)

__version__ = "0.1.0"

__all__ = [
    "OpinionLoomError",
    "compose",
    "consensus_check",
    "dg_step",
    "estimate",
    "fixtures",
    "fj_step",
    "free_run",
    "lexicon_score",
    "load_trajectory",
    "project_to_simplex",
    "report",
    "residual_sum",
    "save_trajectory",
    "simplex_ls_row",
    "simulate",
    "small_world",
    "starter_prompt",
    "system_prompt",
    "turn_prompt",
]
