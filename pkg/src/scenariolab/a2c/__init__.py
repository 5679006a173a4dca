from .nets import (
    Batch,
    PolicyParameters,
    clip_gradients,
    entropy,
    forward,
    global_norm,
    gradients,
    init_params,
    loss,
    masked_probs,
    policy_forward,
    sample_actions,
)
from .returns import compute_returns
from .training import (
    Adam,
    EvalResult,
    StepTrace,
    TrainConfig,
    TrainResult,
    TrainingDiverged,
    a2c_update,
    evaluate,
    load_checkpoint,
    save_checkpoint,
    train,
)

__all__ = [
    "Adam",
    "Batch",
    "EvalResult",
    "PolicyParameters",
    "StepTrace",
    "TrainConfig",
    "TrainResult",
    "TrainingDiverged",
    "a2c_update",
    "clip_gradients",
    "compute_returns",
    "entropy",
    "evaluate",
    "forward",
    "global_norm",
    "gradients",
    "init_params",
    "load_checkpoint",
    "loss",
    "masked_probs",
    "policy_forward",
    "sample_actions",
    "save_checkpoint",
    "train",
]
