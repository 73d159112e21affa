from tabletop_pose.tensor.ops import (
    Tensor,
    center_crop,
    check_tensor,
    col2im,
    col2im_batch,
    conv_output_size,
    ensure_finite,
    im2col,
    im2col_batch,
    matmul,
    pad2d,
)

__all__ = [
    "Tensor",
    "center_crop",
    "check_tensor",
    "col2im",
    "col2im_batch",
    "conv_output_size",
    "ensure_finite",
    "im2col",
    "im2col_batch",
    "matmul",
    "pad2d",
]
