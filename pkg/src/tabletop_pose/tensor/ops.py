"""Dense tensor operations used by the layers.

Tensors are plain numpy arrays in row-major (C) order. Spatial operations work
on `[c, h, w]` samples and, where noted, on `[n, c, h, w]` batches; the
batched forms exist so a whole mini-batch runs through one matrix multiply.
"""

from __future__ import annotations

from typing import TypeAlias

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from numpy.typing import NDArray

from tabletop_pose.errors import DimensionError, NumericError

Tensor: TypeAlias = NDArray[np.floating]


def check_tensor(x: np.ndarray, rank: int | tuple[int, ...] | None = None, name: str = "x") -> None:
    """Validate the Tensor invariants: rank >= 1 and every extent >= 1."""
    if x.ndim < 1:
        raise DimensionError(f"{name}: rank must be >= 1, got scalar")
    if any(extent < 1 for extent in x.shape):
        raise DimensionError(f"{name}: all extents must be >= 1, got {list(x.shape)}")
    if rank is not None:
        allowed = (rank,) if isinstance(rank, int) else rank
        if x.ndim not in allowed:
            raise DimensionError(
                f"{name}: expected rank {' or '.join(map(str, allowed))}, got shape {list(x.shape)}"
            )


def ensure_finite(x: np.ndarray, what: str) -> None:
    """Raise NumericError if any element is NaN or infinite."""
    if not np.all(np.isfinite(x)):
        raise NumericError(f"non-finite values in {what}")


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Matrix product of `[m, k]` and `[k, n]`.

    Delegates to numpy's `@`, so the BLAS build picks the summation order:
    repeated calls in one environment agree bit for bit, but the last bits
    can differ between BLAS builds or thread counts.
    """
    check_tensor(a, 2, "a")
    check_tensor(b, 2, "b")
    if a.shape[1] != b.shape[0]:
        raise DimensionError(
            f"matmul inner dimensions disagree: a{list(a.shape)} x b{list(b.shape)}"
        )
    return a @ b


def pad2d(
    x: Tensor,
    top: int,
    bottom: int,
    left: int,
    right: int,
    value: float = 0.0,
) -> Tensor:
    """Pad the two trailing (spatial) axes of a `[c,h,w]` or `[n,c,h,w]` tensor."""
    check_tensor(x, (3, 4))
    if min(top, bottom, left, right) < 0:
        raise DimensionError(f"pad counts must be >= 0, got {(top, bottom, left, right)}")
    widths = [(0, 0)] * (x.ndim - 2) + [(top, bottom), (left, right)]
    return np.pad(x, widths, mode="constant", constant_values=value)


def center_crop(x: Tensor, top: int, bottom: int, left: int, right: int) -> Tensor:
    """Remove the given border from the trailing spatial axes (inverse of pad2d)."""
    check_tensor(x, (3, 4))
    h, w = x.shape[-2:]
    if top + bottom >= h or left + right >= w:
        raise DimensionError(f"crop {(top, bottom, left, right)} exceeds spatial shape {(h, w)}")
    return x[..., top : h - bottom, left : w - right]


def conv_output_size(size: int, kernel: int, stride: int = 1, pad: int = 0) -> int:
    """Number of valid kernel positions along one axis."""
    return (size + 2 * pad - kernel) // stride + 1


def _check_window(h: int, w: int, kh: int, kw: int, stride: int, pad: int) -> tuple[int, int]:
    if stride < 1:
        raise DimensionError(f"stride must be >= 1, got {stride}")
    if kh > h + 2 * pad or kw > w + 2 * pad:
        raise DimensionError(
            f"kernel {kh}x{kw} larger than padded input {h + 2 * pad}x{w + 2 * pad}"
        )
    return conv_output_size(h, kh, stride, pad), conv_output_size(w, kw, stride, pad)


def im2col_batch(x: Tensor, kh: int, kw: int, stride: int = 1, pad: int = 0) -> Tensor:
    """Unfold `[n,c,h,w]` into `[c*kh*kw, n*out_h*out_w]`.

    Rows are channel-major, then kernel row, then kernel column. Columns run
    over samples first, then output positions in row-major order.
    """
    check_tensor(x, 4)
    n, c, h, w = x.shape
    out_h, out_w = _check_window(h, w, kh, kw, stride, pad)
    if pad:
        x = pad2d(x, pad, pad, pad, pad)
    windows = sliding_window_view(x, (kh, kw), axis=(2, 3))[:, :, ::stride, ::stride]
    windows = windows[:, :, :out_h, :out_w]
    # (n, c, oh, ow, kh, kw) -> (c, kh, kw, n, oh, ow)
    return windows.transpose(1, 4, 5, 0, 2, 3).reshape(c * kh * kw, n * out_h * out_w)


def im2col(x: Tensor, kh: int, kw: int, stride: int = 1, pad: int = 0) -> Tensor:
    """Unfold a single `[c,h,w]` sample into `[c*kh*kw, out_h*out_w]`."""
    check_tensor(x, 3)
    return im2col_batch(x[np.newaxis], kh, kw, stride, pad)


def col2im_batch(
    cols: Tensor,
    input_shape: tuple[int, int, int, int],
    kh: int,
    kw: int,
    stride: int = 1,
    pad: int = 0,
) -> Tensor:
    """Adjoint of im2col_batch: scatter-add columns back into `[n,c,h,w]`."""
    n, c, h, w = input_shape
    out_h, out_w = _check_window(h, w, kh, kw, stride, pad)
    expected = (c * kh * kw, n * out_h * out_w)
    if cols.shape != expected:
        raise DimensionError(f"col2im expects columns of shape {list(expected)}, got {list(cols.shape)}")
    patches = cols.reshape(c, kh, kw, n, out_h, out_w).transpose(3, 0, 1, 2, 4, 5)
    padded = np.zeros((n, c, h + 2 * pad, w + 2 * pad), dtype=cols.dtype)
    row_span = stride * (out_h - 1) + 1
    col_span = stride * (out_w - 1) + 1
    for i in range(kh):
        for j in range(kw):
            padded[:, :, i : i + row_span : stride, j : j + col_span : stride] += patches[:, :, i, j]
    return padded[:, :, pad : pad + h, pad : pad + w]


def col2im(
    cols: Tensor,
    input_shape: tuple[int, int, int],
    kh: int,
    kw: int,
    stride: int = 1,
    pad: int = 0,
) -> Tensor:
    """Adjoint of im2col for a single `[c,h,w]` sample."""
    return col2im_batch(cols, (1, *input_shape), kh, kw, stride, pad)[0]
