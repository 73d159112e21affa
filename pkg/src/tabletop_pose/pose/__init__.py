from tabletop_pose.pose.home import HomePose, HomePoseTable, home_transform, load_home_table
from tabletop_pose.pose.locate import Location, angle_checkpoint_name, check_angle_model, load_angle_models, locate
from tabletop_pose.pose.transform import (
    ANGLE_STEP_DEG,
    PoseTransform,
    angle_of,
    centroid,
    normalize_degrees,
    pose_transform,
)

__all__ = [
    "ANGLE_STEP_DEG",
    "HomePose",
    "HomePoseTable",
    "Location",
    "PoseTransform",
    "angle_checkpoint_name",
    "angle_of",
    "check_angle_model",
    "centroid",
    "home_transform",
    "load_angle_models",
    "load_home_table",
    "locate",
    "normalize_degrees",
    "pose_transform",
]
