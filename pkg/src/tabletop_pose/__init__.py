from tabletop_pose.dataset import Manifest, Sample, SynthConfig, build_archive, synth_generate
from tabletop_pose.models import angle_net, model_for, recognition_net, visualize_activations
from tabletop_pose.nn import LayerSpec, Network, NetworkSpec, gradient_check
from tabletop_pose.pose import HomePoseTable, PoseTransform, home_transform
from tabletop_pose.train import (
    Checkpoint,
    EvaluationReport,
    TrainConfig,
    evaluate,
    load_checkpoint,
    save_checkpoint,
    split_train_val,
    train,
)
from tabletop_pose.types import Height, Mode, ObjectKind, Precision, Task

__all__ = [
    # Types
    "Height",
    "Mode",
    "ObjectKind",
    "Precision",
    "Task",
    # Networks
    "LayerSpec",
    "NetworkSpec",
    "Network",
    "gradient_check",
    "recognition_net",
    "angle_net",
    "model_for",
    "visualize_activations",
    # Data
    "Sample",
    "Manifest",
    "SynthConfig",
    "build_archive",
    "synth_generate",
    # Training
    "TrainConfig",
    "train",
    "split_train_val",
    "evaluate",
    "EvaluationReport",
    "Checkpoint",
    "save_checkpoint",
    "load_checkpoint",
    # Pose
    "HomePoseTable",
    "PoseTransform",
    "home_transform",
]
