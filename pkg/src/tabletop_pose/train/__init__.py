from tabletop_pose.train.checkpoint import (
    MAGIC,
    Checkpoint,
    CheckpointHeader,
    ParameterEntry,
    TrainingMetadata,
    load_checkpoint,
    save_checkpoint,
)
from tabletop_pose.train.config import TrainConfig
from tabletop_pose.train.data import LabeledData, label_names
from tabletop_pose.train.evaluate import (
    EvaluationReport,
    confusion_matrix,
    evaluate,
    evaluate_network,
    predict_classes,
    report_from_predictions,
)
from tabletop_pose.train.loop import EpochRecord, TrainResult, train
from tabletop_pose.train.optimizer import OptimizerState, RMSProp, rmsprop_step
from tabletop_pose.train.split import split_train_val, val_count

__all__ = [
    # Config
    "TrainConfig",
    # Optimizer
    "OptimizerState",
    "RMSProp",
    "rmsprop_step",
    # Data
    "LabeledData",
    "label_names",
    "split_train_val",
    "val_count",
    # Loop
    "train",
    "TrainResult",
    "EpochRecord",
    # Evaluation
    "EvaluationReport",
    "confusion_matrix",
    "evaluate",
    "evaluate_network",
    "predict_classes",
    "report_from_predictions",
    # Checkpoints
    "MAGIC",
    "Checkpoint",
    "CheckpointHeader",
    "ParameterEntry",
    "TrainingMetadata",
    "load_checkpoint",
    "save_checkpoint",
]
