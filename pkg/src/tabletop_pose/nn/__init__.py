from tabletop_pose.nn.gradcheck import (
    GradientCheckReport,
    ParameterCheck,
    activation_pattern,
    compare_gradients,
    gradient_check,
    relative_error,
)
from tabletop_pose.nn.layers import (
    Conv2D,
    Dense,
    Dropout,
    Flatten,
    Layer,
    LayerState,
    MaxPool2,
    ReLU,
    build_layer,
    dropout,
)
from tabletop_pose.nn.loss import softmax, softmax_xent, softmax_xent_batch
from tabletop_pose.nn.network import Network
from tabletop_pose.nn.spec import LayerSpec, NetworkSpec

__all__ = [
    # Specs
    "LayerSpec",
    "NetworkSpec",
    # Layers
    "Layer",
    "LayerState",
    "Conv2D",
    "MaxPool2",
    "Dense",
    "ReLU",
    "Dropout",
    "Flatten",
    "build_layer",
    "dropout",
    # Loss
    "softmax",
    "softmax_xent",
    "softmax_xent_batch",
    # Network
    "Network",
    # Gradient checks
    "GradientCheckReport",
    "ParameterCheck",
    "activation_pattern",
    "compare_gradients",
    "gradient_check",
    "relative_error",
]
