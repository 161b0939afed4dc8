from .checkpoint import load_checkpoint, save_checkpoint
from .infer import GenerationResult, InferenceEngine, generate
from .transformer import (
    PARAM_GROUPS,
    STAGE_TRAINABLES,
    ForwardOutput,
    forward,
    forward_graph,
    group_of,
    init_model_params,
    rmsnorm,
)

__all__ = [
    "ForwardOutput", "GenerationResult", "InferenceEngine", "PARAM_GROUPS",
    "STAGE_TRAINABLES", "forward", "forward_graph", "generate", "group_of",
    "init_model_params", "load_checkpoint", "rmsnorm", "save_checkpoint",
]
