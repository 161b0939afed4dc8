from .loop import (
    Adam,
    NumericError,
    TrainSample,
    collect_grads,
    init_params,
    loss_and_grads,
    prepare_samples,
    sample_losses,
    stage1_targets,
    stage2_targets,
    train,
    zero_grads,
)
from .losses import loss_image, loss_text, total_loss

__all__ = [
    "Adam", "NumericError", "TrainSample", "collect_grads", "init_params",
    "loss_and_grads", "loss_image", "loss_text", "prepare_samples",
    "sample_losses", "stage1_targets", "stage2_targets", "total_loss",
    "train", "zero_grads",
]
