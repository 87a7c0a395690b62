"""
Checkpoint - Versioned binary container for network parameters

Responsibility: persist a trained network (spec, parameters, batchnorm
buffers, optional Adam moments, epoch, best validation loss) and Chebyshev
coefficient grids so that a reload reproduces forward outputs bit for bit.

Layout (all integers little-endian):

  magic         8 bytes  b"CHEBCNN1"
  version       u32
  epoch         u32
  best_val_loss f64
  manifest      u32 length + UTF-8 JSON (kind, network spec, class names, adam step)
  count         u32 number of tensor records
  record        u16 name length, name, u8 dtype code, u8 rank, rank x u32
                extents, row-major little-endian data
  crc32         u32 over every preceding byte

Interface:
  save_checkpoint(path, model, ...) / load_checkpoint(path) -> Checkpoint
  restore_model(checkpoint) -> ChebCNN
  save_coeff_grid(path, grid) / load_coeff_grid(path) -> ChebCoeffGrid
"""

import json
import logging
import math
import os
import struct
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np

from chebyshev.approx2d import ChebCoeffGrid
from core.config import NetworkSpec
from core.errors import CheckpointError
from layers.network import ChebCNN, build_network
from training.optimizer import AdamState

logger = logging.getLogger(__name__)

MAGIC = b"CHEBCNN1"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<8sIId")
_U32 = struct.Struct("<I")
_DTYPE_CODES = {1: np.dtype("<f4"), 2: np.dtype("<f8")}
_CODE_OF = {np.dtype("float32"): 1, np.dtype("float64"): 2}

PathLike = Union[str, os.PathLike]


@dataclass
class Checkpoint:
    """Decoded checkpoint contents"""
    kind: str
    tensors: Dict[str, np.ndarray]
    manifest: Dict[str, Any] = field(default_factory=dict)
    epoch: int = 0
    best_val_loss: float = math.nan
    version: int = FORMAT_VERSION

    @property
    def spec(self) -> NetworkSpec:
        if "network" not in self.manifest:
            raise CheckpointError("checkpoint carries no network spec")
        return NetworkSpec.model_validate(self.manifest["network"])

    @property
    def class_names(self) -> Optional[List[str]]:
        return self.manifest.get("class_names")

    def model_state(self) -> Dict[str, np.ndarray]:
        return {k: v for k, v in self.tensors.items() if not k.startswith("adam.")}

    def adam_state(self, parameter_names: List[str]) -> Optional[AdamState]:
        if "adam_t" not in self.manifest:
            return None
        try:
            return AdamState(
                m=[self.tensors[f"adam.m.{n}"].copy() for n in parameter_names],
                v=[self.tensors[f"adam.v.{n}"].copy() for n in parameter_names],
                t=int(self.manifest["adam_t"]),
            )
        except KeyError as e:
            raise CheckpointError(f"optimizer state incomplete: missing {e.args[0]}") from None


# ---- encoding ----

def _encode_record(name: str, array: np.ndarray) -> bytes:
    array = np.asarray(array)
    code = _CODE_OF.get(array.dtype)
    if code is None:
        raise CheckpointError(f"tensor '{name}' has unsupported dtype {array.dtype}")
    raw_name = name.encode("utf-8")
    parts = [
        struct.pack("<H", len(raw_name)),
        raw_name,
        struct.pack("<BB", code, array.ndim),
        struct.pack(f"<{array.ndim}I", *array.shape),
        np.ascontiguousarray(array, dtype=_DTYPE_CODES[code]).tobytes(order="C"),
    ]
    return b"".join(parts)


def _write_container(
    path: PathLike,
    kind: str,
    tensors: Dict[str, np.ndarray],
    manifest: Dict[str, Any],
    epoch: int = 0,
    best_val_loss: float = math.nan
) -> Path:
    path = Path(path)
    manifest = {"kind": kind, **manifest}
    raw_manifest = json.dumps(manifest, sort_keys=True).encode("utf-8")
    body = b"".join([
        _HEADER.pack(MAGIC, FORMAT_VERSION, epoch, float(best_val_loss)),
        _U32.pack(len(raw_manifest)),
        raw_manifest,
        _U32.pack(len(tensors)),
        *(_encode_record(name, array) for name, array in tensors.items()),
    ])
    payload = body + _U32.pack(zlib.crc32(body) & 0xFFFFFFFF)

    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(payload)
    os.replace(tmp, path)
    return path


# ---- decoding ----

class _Reader:
    """Bounds-checked cursor over a byte buffer"""

    def __init__(self, data: bytes, source: str):
        self.data = data
        self.pos = 0
        self.source = source

    def take(self, count: int) -> bytes:
        if count < 0 or self.pos + count > len(self.data):
            raise CheckpointError(f"{self.source}: truncated checkpoint (needed {count} bytes at offset {self.pos})")
        chunk = self.data[self.pos:self.pos + count]
        self.pos += count
        return chunk

    def unpack(self, fmt: struct.Struct) -> Tuple:
        return fmt.unpack(self.take(fmt.size))


def _read_container(path: PathLike) -> Checkpoint:
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as e:
        raise CheckpointError(f"cannot read checkpoint {path}: {e.strerror or e}") from None
    source = str(path)

    if len(data) < len(MAGIC) or data[:len(MAGIC)] != MAGIC:
        raise CheckpointError(f"{source}: not a checkpoint (bad magic)")
    if len(data) < _HEADER.size + _U32.size:
        raise CheckpointError(f"{source}: truncated checkpoint header")
    _, version, epoch, best = _HEADER.unpack_from(data)
    if version != FORMAT_VERSION:
        raise CheckpointError(f"{source}: unsupported checkpoint version {version} (expected {FORMAT_VERSION})")

    body, trailer = data[:-_U32.size], data[-_U32.size:]
    if (zlib.crc32(body) & 0xFFFFFFFF) != _U32.unpack(trailer)[0]:
        raise CheckpointError(f"{source}: checksum mismatch (corrupted or truncated checkpoint)")

    reader = _Reader(body, source)
    reader.take(_HEADER.size)
    (manifest_len,) = reader.unpack(_U32)
    try:
        manifest = json.loads(reader.take(manifest_len).decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise CheckpointError(f"{source}: unreadable manifest ({e})") from None

    (count,) = reader.unpack(_U32)
    tensors: Dict[str, np.ndarray] = {}
    for _ in range(count):
        (name_len,) = struct.unpack("<H", reader.take(2))
        name = reader.take(name_len).decode("utf-8", errors="replace")
        code, rank = struct.unpack("<BB", reader.take(2))
        if code not in _DTYPE_CODES:
            raise CheckpointError(f"{source}: tensor '{name}' has unknown dtype code {code}")
        shape = struct.unpack(f"<{rank}I", reader.take(4 * rank))
        dtype = _DTYPE_CODES[code]
        nbytes = int(np.prod(shape, dtype=np.int64)) * dtype.itemsize
        array = np.frombuffer(reader.take(nbytes), dtype=dtype).reshape(shape)
        tensors[name] = array.astype(dtype.newbyteorder("="), copy=True)
    if reader.pos != len(body):
        raise CheckpointError(f"{source}: {len(body) - reader.pos} trailing bytes after the last record")

    return Checkpoint(
        kind=str(manifest.get("kind", "")),
        tensors=tensors,
        manifest=manifest,
        epoch=int(epoch),
        best_val_loss=float(best),
        version=int(version),
    )


# ---- public API ----

def save_checkpoint(
    path: PathLike,
    model: ChebCNN,
    adam_state: Optional[AdamState] = None,
    epoch: int = 0,
    best_val_loss: float = math.nan,
    class_names: Optional[List[str]] = None
) -> Path:
    """Write model parameters, buffers and (optionally) Adam moments"""
    tensors = model.state_dict()
    manifest: Dict[str, Any] = {"network": model.spec.model_dump(mode="json")}
    if class_names is not None:
        manifest["class_names"] = list(class_names)
    if adam_state is not None and adam_state.m:
        names = [name for name, _ in model.named_parameters()]
        if len(names) != len(adam_state.m):
            raise CheckpointError("optimizer state does not match the model's parameters")
        for name, m, v in zip(names, adam_state.m, adam_state.v):
            tensors[f"adam.m.{name}"] = m
            tensors[f"adam.v.{name}"] = v
        manifest["adam_t"] = adam_state.t

    path = _write_container(path, "model", tensors, manifest, epoch, best_val_loss)
    logger.info(f"💾 Checkpoint written to {path} ({len(tensors)} tensors, epoch {epoch})")
    return path


def load_checkpoint(path: PathLike) -> Checkpoint:
    """
    Read and verify a model checkpoint

    Raises:
        CheckpointError: bad magic, version mismatch, truncation or checksum failure
    """
    checkpoint = _read_container(path)
    if checkpoint.kind != "model":
        raise CheckpointError(f"{path}: expected a model checkpoint, found '{checkpoint.kind}'")
    return checkpoint


def restore_model(checkpoint: Checkpoint) -> ChebCNN:
    """Rebuild the network from the stored spec and load its parameters and buffers"""
    state = checkpoint.model_state()
    dtype = next(iter(state.values())).dtype if state else np.float32
    model = build_network(checkpoint.spec, seed=0, dtype=dtype)
    try:
        model.load_state_dict(state)
    except ValueError as e:
        raise CheckpointError(f"checkpoint does not match its network spec: {e}") from None
    model.eval()
    return model


def save_coeff_grid(path: PathLike, grid: ChebCoeffGrid) -> Path:
    """Store a coefficient grid as a float64 record"""
    path = _write_container(path, "coeff_grid", {"coeffs": grid.coeffs.astype(np.float64)},
                            {"orders": list(grid.orders)})
    logger.info(f"💾 Coefficient grid {grid.orders} written to {path}")
    return path


def load_coeff_grid(path: PathLike) -> ChebCoeffGrid:
    checkpoint = _read_container(path)
    if checkpoint.kind != "coeff_grid" or "coeffs" not in checkpoint.tensors:
        raise CheckpointError(f"{path}: expected a coefficient grid, found '{checkpoint.kind}'")
    try:
        m, n = (int(k) for k in checkpoint.manifest["orders"])
        return ChebCoeffGrid(checkpoint.tensors["coeffs"], (m, n))
    except (KeyError, TypeError, ValueError) as e:
        raise CheckpointError(f"{path}: malformed coefficient grid ({e})") from None
