"""Image preprocessing: masking, shift augmentation and half-resolution."""

from __future__ import annotations

import numpy as np

from tabletop_pose.errors import ConfigError, DimensionError, ParseError
from tabletop_pose.tensor import check_tensor

# Shift set used when none is configured: every (dx, dy) in {-10,-5,0,5,10}^2 except (0,0).
DEFAULT_SHIFTS: tuple[tuple[int, int], ...] = tuple(
    (dx, dy) for dy in (-10, -5, 0, 5, 10) for dx in (-10, -5, 0, 5, 10) if (dx, dy) != (0, 0)
)


def to_unit(image: np.ndarray) -> np.ndarray:
    """Scale a 0..255 `[1,h,w]` image to float32 [0,1]."""
    check_tensor(image, 3, "image")
    return image.astype(np.float32) / np.float32(255.0)


def apply_mask(image: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Scale a 0..255 image to [0,1] and zero everything outside the mask.

    Args:
        image: `[1,h,w]` grayscale values in [0,255].
        mask: `[1,h,w]` with every value exactly 0 or 255.

    Returns:
        `(image/255) * (mask/255)` as float32; background pixels are exactly 0.

    Raises:
        DimensionError: If the shapes differ.
        ParseError: If the mask holds any value other than 0 or 255.
    """
    check_tensor(image, 3, "image")
    check_tensor(mask, 3, "mask")
    if image.shape != mask.shape:
        raise DimensionError(f"image {list(image.shape)} and mask {list(mask.shape)} differ in shape")
    if not np.all((mask == 0) | (mask == 255)):
        bad = np.unique(mask[(mask != 0) & (mask != 255)])[:5]
        raise ParseError(f"mask values must be 0 or 255, found {bad.tolist()}")
    scaled = to_unit(image)
    return np.where(mask == 255, scaled, np.float32(0.0)).astype(np.float32)


def shift_image(image: np.ndarray, dx: int, dy: int) -> np.ndarray:
    """Translate `[c,h,w]` content by dx pixels right and dy pixels down, zero fill."""
    _, h, w = image.shape
    if abs(dx) >= w or abs(dy) >= h:
        raise ConfigError(f"shift ({dx}, {dy}) out of bounds for a {h}x{w} image")
    out = np.zeros_like(image)
    src_y = slice(max(0, -dy), h - max(0, dy))
    src_x = slice(max(0, -dx), w - max(0, dx))
    dst_y = slice(max(0, dy), h - max(0, -dy))
    dst_x = slice(max(0, dx), w - max(0, -dx))
    out[:, dst_y, dst_x] = image[:, src_y, src_x]
    return out


def shift_augment(image: np.ndarray, shifts: list[tuple[int, int]]) -> list[np.ndarray]:
    """One translated copy of `image` per (dx, dy) in `shifts`, in order.

    x grows rightward and y downward. Vacated pixels are 0, matching a masked
    background. No rotation is ever applied: orientation is the label.

    Raises:
        ConfigError: If |dx| >= w or |dy| >= h for any shift.
    """
    check_tensor(image, 3, "image")
    return [shift_image(image, dx, dy) for dx, dy in shifts]


def resize_half(image: np.ndarray) -> np.ndarray:
    """2x2 box-average downsampling of a `[c,h,w]` image.

    An odd height or width is first made even by replicating the last row or
    column, so a 5x5 image becomes 3x3.
    """
    check_tensor(image, 3, "image")
    _, h, w = image.shape
    if h % 2 or w % 2:
        image = np.pad(image, ((0, 0), (0, h % 2), (0, w % 2)), mode="edge")
    c, h, w = image.shape
    blocks = image.reshape(c, h // 2, 2, w // 2, 2)
    return blocks.mean(axis=(2, 4)).astype(image.dtype, copy=False)
