"""antijam: anti-jamming PRB selection with an active-inference agent.

Library layout mirrors the system: `channel` (path loss/SINR), `signals`
(QPSK feature streams, generalized states), `environment` (POMDP world),
`offline_learning` (GNG superstates, transitions, model file), `mjpf`
(Markov jump particle filter), `abnormality` (SKL/Bhattacharyya), `agent`
(belief tables and updates), `baselines` (FH, Q-learning), `harness`
(train/run/bench, metrics), `config` (JSON schema), `cli`.
"""

from .abnormality import (
    bhattacharyya_abnormality,
    discrete_generalized_error,
    skl_abnormality,
)
from .agent import (
    ActiveInferenceAgent,
    BeliefTables,
    init_tables,
    load_tables,
    save_tables,
    select_action,
)
from .config import DEFAULT_CONFIG, ConfigError, load_config
from .environment import JammerStrategy, StepOutcome, World
from .harness import bench, run, train
from .mjpf import Gaussian, MarkovJumpFilter, MessagePair
from .offline_learning import (
    SignalModel,
    Superstate,
    estimate_transitions,
    gng_fit,
    load_model,
    save_model,
)
from .signals import GdbnMatrices, qpsk_stream, to_generalized

__version__ = "0.1.0"

__all__ = [
    "ActiveInferenceAgent",
    "BeliefTables",
    "ConfigError",
    "DEFAULT_CONFIG",
    "Gaussian",
    "GdbnMatrices",
    "JammerStrategy",
    "MarkovJumpFilter",
    "MessagePair",
    "SignalModel",
    "StepOutcome",
    "Superstate",
    "World",
    "bench",
    "bhattacharyya_abnormality",
    "discrete_generalized_error",
    "estimate_transitions",
    "gng_fit",
    "init_tables",
    "load_config",
    "load_model",
    "load_tables",
    "save_tables",
    "qpsk_stream",
    "run",
    "save_model",
    "select_action",
    "skl_abnormality",
    "to_generalized",
    "train",
]
