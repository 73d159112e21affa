"""Activation-map grids for the convolutional layers of a checkpoint."""

from __future__ import annotations

import logging
import math
from pathlib import Path

import numpy as np

from tabletop_pose.dataset.pgm import write_pgm
from tabletop_pose.nn.layers import Conv2D
from tabletop_pose.train.checkpoint import Checkpoint

logger = logging.getLogger(__name__)

CONSTANT_MAP_GRAY = 128
GRID_PADDING = 1


def normalize_map(activation: np.ndarray) -> np.ndarray:
    """Min-max scale one `[h,w]` map to uint8 0..255; constant maps become 128."""
    low, high = float(activation.min()), float(activation.max())
    if high == low:
        return np.full(activation.shape, CONSTANT_MAP_GRAY, dtype=np.uint8)
    scaled = (activation.astype(np.float64) - low) * (255.0 / (high - low))
    return np.rint(scaled).astype(np.uint8)


def tile_maps(maps: np.ndarray, padding: int = GRID_PADDING) -> np.ndarray:
    """Tile `[n,h,w]` maps row-major by channel into a ceil(sqrt(n))-column grid.

    Tiles are separated and framed by `padding` black pixels; unused cells
    stay black.
    """
    n, h, w = maps.shape
    cols = math.ceil(math.sqrt(n))
    rows = math.ceil(n / cols)
    grid = np.zeros((rows * (h + padding) + padding, cols * (w + padding) + padding), dtype=np.uint8)
    for channel in range(n):
        r, c = divmod(channel, cols)
        top = padding + r * (h + padding)
        left = padding + c * (w + padding)
        grid[top : top + h, left : left + w] = normalize_map(maps[channel])
    return grid


def visualize_activations(checkpoint: Checkpoint, image: np.ndarray, out_dir: str | Path) -> list[Path]:
    """Write one `<layer_index>_<layer_name>.pgm` grid per conv layer.

    The image goes through the checkpoint's preprocessing and the network in
    EVAL mode; each grid shows that conv layer's output maps.

    Raises:
        DimensionError: If the image does not fit the checkpoint.
    """
    x = checkpoint.prepare_input(image)
    network = checkpoint.to_network()
    out_dir = Path(out_dir)

    written = []
    for index, layer, output in network.activations(x):
        if not isinstance(layer, Conv2D):
            continue
        path = write_pgm(out_dir / f"{index}_{layer.name}.pgm", tile_maps(output))
        logger.debug(f"  wrote {path.name} ({output.shape[0]} maps)")
        written.append(path)
    return written
