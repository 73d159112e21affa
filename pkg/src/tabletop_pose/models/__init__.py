from tabletop_pose.models.architectures import (
    ANGLE_MIN_INPUT,
    DEFAULT_ANGLE_INPUT,
    RECOGNITION_MIN_INPUT,
    angle_net,
    model_for,
    parameter_count,
    recognition_net,
)
from tabletop_pose.models.visualize import normalize_map, tile_maps, visualize_activations

__all__ = [
    "ANGLE_MIN_INPUT",
    "DEFAULT_ANGLE_INPUT",
    "RECOGNITION_MIN_INPUT",
    "angle_net",
    "model_for",
    "parameter_count",
    "recognition_net",
    "normalize_map",
    "tile_maps",
    "visualize_activations",
]
