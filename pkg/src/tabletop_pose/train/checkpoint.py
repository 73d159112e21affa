"""Binary checkpoint format.

Layout (all integers little-endian):

    8 bytes   magic b"TTOPNET1"
    4 bytes   unsigned header length L
    L bytes   UTF-8 JSON header (architecture, parameter table, metadata)
    rest      raw IEEE-754 f32 parameter data, concatenated in header order

The header is produced by pydantic, so field order and number formatting are
fixed and save -> load -> save reproduces the file byte for byte.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Literal

import numpy as np
from pydantic import BaseModel, ValidationError

from tabletop_pose.dataset.image import resize_half
from tabletop_pose.errors import BadMagicError, CheckpointHeaderError, DimensionError, PayloadLengthError
from tabletop_pose.nn.network import Network
from tabletop_pose.nn.spec import NetworkSpec
from tabletop_pose.train.config import TrainConfig
from tabletop_pose.types import ObjectKind, Precision, Task

MAGIC = b"TTOPNET1"
_HEADER_LENGTH = struct.Struct("<I")
_PAYLOAD_DTYPE = np.dtype("<f4")


class ParameterEntry(BaseModel):
    name: str
    shape: list[int]
    dtype: Literal["f32"] = "f32"

    @property
    def size(self) -> int:
        return math.prod(self.shape)


class TrainingMetadata(BaseModel):
    """How the stored weights were obtained and how inputs must be prepared."""

    epoch: int = 0
    val_accuracy: float = 0.0
    seed: int = 0
    config: TrainConfig = TrainConfig()
    task: Task = Task.ANGLE
    object: ObjectKind | None = None
    labels: list[str] = []
    halve_input: bool = False


class CheckpointHeader(BaseModel):
    architecture: NetworkSpec
    parameters: list[ParameterEntry]
    metadata: TrainingMetadata


@dataclass
class Checkpoint:
    """Architecture, f32 weights and training metadata.

    Example:
        ckpt = Checkpoint.from_network(net, TrainingMetadata(epoch=3, val_accuracy=0.97))
        save_checkpoint(ckpt, "angle-mug.ckpt")
        net = load_checkpoint("angle-mug.ckpt").to_network()
    """

    architecture: NetworkSpec
    parameters: dict[str, np.ndarray]
    metadata: TrainingMetadata

    @classmethod
    def from_network(cls, network: Network, metadata: TrainingMetadata) -> Checkpoint:
        """Snapshot the network's current weights as float32 copies."""
        return cls(
            architecture=network.spec.model_copy(deep=True),
            parameters={name: p.astype(np.float32, copy=True) for name, p in network.parameters().items()},
            metadata=metadata.model_copy(deep=True),
        )

    def to_network(self, precision: Precision = Precision.F32) -> Network:
        network = Network(self.architecture, seed=self.metadata.seed, precision=precision)
        network.set_parameters(self.parameters)
        return network

    def prepare_input(self, image: np.ndarray) -> np.ndarray:
        """Apply the stored preprocessing to a `[1,h,w]` image and check its shape."""
        if self.metadata.halve_input:
            image = resize_half(image)
        if image.shape != tuple(self.architecture.input_shape):
            raise DimensionError(
                f"{self.architecture.name} expects input {list(self.architecture.input_shape)}, "
                f"got {list(image.shape)}"
                + (" after halving" if self.metadata.halve_input else "")
            )
        return image.astype(np.float32, copy=False)

    def header(self) -> CheckpointHeader:
        return CheckpointHeader(
            architecture=self.architecture,
            parameters=[ParameterEntry(name=name, shape=list(p.shape)) for name, p in self.parameters.items()],
            metadata=self.metadata,
        )

    def payload(self) -> bytes:
        return b"".join(p.astype(_PAYLOAD_DTYPE, copy=False).tobytes(order="C") for p in self.parameters.values())

    def to_bytes(self) -> bytes:
        header = self.header().model_dump_json().encode("utf-8")
        return MAGIC + _HEADER_LENGTH.pack(len(header)) + header + self.payload()

    @classmethod
    def from_bytes(cls, data: bytes, source: str = "<bytes>") -> Checkpoint:
        """Parse a checkpoint image.

        Raises:
            BadMagicError: If the first 8 bytes are not the magic.
            CheckpointHeaderError: If the header is truncated, invalid JSON, or
                its parameter table disagrees with the architecture.
            PayloadLengthError: If the payload size differs from the header's.
        """
        if data[: len(MAGIC)] != MAGIC:
            raise BadMagicError(f"{source}: bad magic {data[: len(MAGIC)]!r}, expected {MAGIC!r}")
        offset = len(MAGIC)
        if len(data) < offset + _HEADER_LENGTH.size:
            raise CheckpointHeaderError(f"{source}: truncated before the header length")
        (header_length,) = _HEADER_LENGTH.unpack_from(data, offset)
        offset += _HEADER_LENGTH.size
        if len(data) < offset + header_length:
            raise CheckpointHeaderError(
                f"{source}: header claims {header_length} bytes, only {len(data) - offset} present"
            )
        try:
            header = CheckpointHeader.model_validate_json(data[offset : offset + header_length])
        except ValidationError as e:
            raise CheckpointHeaderError(f"{source}: invalid header: {e}") from e
        offset += header_length

        expected_shapes = header.architecture.parameter_shapes()
        table = {entry.name: tuple(entry.shape) for entry in header.parameters}
        if list(table) != list(expected_shapes) or table != expected_shapes:
            raise CheckpointHeaderError(
                f"{source}: parameter table does not match architecture {header.architecture.name!r} "
                f"(shape mismatch)"
            )

        payload = memoryview(data)[offset:]
        expected_bytes = sum(entry.size for entry in header.parameters) * _PAYLOAD_DTYPE.itemsize
        if len(payload) != expected_bytes:
            raise PayloadLengthError(
                f"{source}: payload length mismatch: expected {expected_bytes} bytes, found {len(payload)}"
            )

        flat = np.frombuffer(payload, dtype=_PAYLOAD_DTYPE)
        parameters: dict[str, np.ndarray] = {}
        start = 0
        for entry in header.parameters:
            chunk = flat[start : start + entry.size]
            parameters[entry.name] = chunk.reshape(entry.shape).astype(np.float32, copy=True)
            start += entry.size
        return cls(architecture=header.architecture, parameters=parameters, metadata=header.metadata)


def save_checkpoint(checkpoint: Checkpoint, path: str | Path) -> Path:
    """Write `checkpoint` to `path` (parents created, existing file replaced)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(checkpoint.to_bytes())
    return path


def load_checkpoint(path: str | Path) -> Checkpoint:
    """Read a checkpoint written by save_checkpoint."""
    return Checkpoint.from_bytes(Path(path).read_bytes(), source=str(path))
