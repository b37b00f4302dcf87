"""RIS-aided NOMA backscatter link simulator with dual-DQN optimization."""

from .config import LearningConfig, LinkVariances, SystemConfig
from .channel import (
    ChannelRealization,
    PhaseAction,
    aligned_phase_bound,
    continuous_alignment,
    effective_ris_channel,
    sample_realization,
)
from .link import (
    AllocAction,
    INFEASIBLE_PENALTY,
    LinkMetrics,
    evaluate,
    evaluate_alloc_grid,
    objective,
)
from .neural import Mlp, ReplayBuffer, Transition
from .agents import (
    AllocAgent,
    FeatureNormalizer,
    PhaseAgent,
    TrainResult,
    alloc_features,
    decode_alloc_id,
    encode_alloc_id,
    epsilon_at,
    phase_features,
    reward,
    train,
)
from .oracles import (
    OracleResult,
    alloc_oracle,
    baseline_fixed,
    baseline_random,
    oracle_policy,
    phase_oracle,
)
from .errors import ArtifactMismatch, NumericalError

__all__ = [
    "AllocAction",
    "AllocAgent",
    "ArtifactMismatch",
    "ChannelRealization",
    "FeatureNormalizer",
    "INFEASIBLE_PENALTY",
    "LearningConfig",
    "LinkMetrics",
    "LinkVariances",
    "Mlp",
    "NumericalError",
    "OracleResult",
    "PhaseAction",
    "PhaseAgent",
    "ReplayBuffer",
    "SystemConfig",
    "TrainResult",
    "Transition",
    "aligned_phase_bound",
    "alloc_features",
    "alloc_oracle",
    "baseline_fixed",
    "baseline_random",
    "continuous_alignment",
    "decode_alloc_id",
    "effective_ris_channel",
    "encode_alloc_id",
    "epsilon_at",
    "evaluate",
    "evaluate_alloc_grid",
    "objective",
    "oracle_policy",
    "phase_features",
    "phase_oracle",
    "reward",
    "sample_realization",
    "train",
]

__version__ = "0.1.0"
