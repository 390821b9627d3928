"""Convolution kernel patterns over faces, compiled into flat index buffers.

A pattern row serializes the faces feeding the convolution at one output
face as a closed ring: the three direct neighbors for kernel size 3, plus
recursively expanded flanks for sizes 5 and 7. Dilation replaces the ring
by faces reached with alternating counterclockwise/clockwise hops.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from subdivnet.hierarchy import MeshPyramid
from subdivnet.mesh import BOUNDARY, Mesh, MeshError

MAGIC = b"SDVN"
BUFFER_FORMAT_VERSION = 1

SUPPORTED_KERNELS = (3, 5, 7)
PARITIES = ("zig", "zag")


def pattern_length(kernel_size: int) -> int:
    """Row length 3 * (2**((k - 1) / 2) - 1), the fixed pattern size."""
    if kernel_size % 2 == 0 or kernel_size < 3:
        raise MeshError(f"kernel size must be an odd integer >= 3, got {kernel_size}")
    half = (kernel_size - 1) // 2
    return 3 * (2**half - 1)


@dataclass(frozen=True)
class KernelIndexBuffer:
    """Per output face, the serialized pattern face indices at one level.

    With stride 2 there is one row per coarse face, anchored at that
    parent's central child; anchors give the center face of every row.
    """

    kernel_size: int
    dilation: int
    stride: int
    parity: str
    level: int
    rows: np.ndarray  # (n_out, row_len) int32
    anchors: np.ndarray  # (n_out,) int32

    def __post_init__(self):
        self.rows.setflags(write=False)
        self.anchors.setflags(write=False)

    @property
    def row_length(self) -> int:
        return self.rows.shape[1]


def _require_closed(mesh: Mesh) -> None:
    if (mesh.adjacency == BOUNDARY).any():
        raise MeshError("pattern generation requires a closed manifold")


def ring_order(mesh: Mesh, f: int) -> np.ndarray:
    """The 3 neighbors of f, counterclockwise, starting opposite local vertex 0."""
    if not 0 <= f < mesh.face_count:
        raise MeshError(f"face index out of range: {f}")
    _require_closed(mesh)
    return mesh.adjacency[f].copy()


def _neighbor_slot(adjacency: np.ndarray, face: np.ndarray, previous: np.ndarray) -> np.ndarray:
    """Local index of `previous` within each face's adjacency row."""
    return np.argmax(adjacency[face] == previous[:, None], axis=1)


def _expand_branch(
    adjacency: np.ndarray, seed: np.ndarray, entered_from: np.ndarray, depth: int
) -> list[np.ndarray]:
    """In-order column expansion of one pattern branch.

    Each node emits (counterclockwise child, itself, clockwise child), so the
    concatenation over the three branches reads as a closed ring.
    """
    if depth == 1:
        return [seed]
    j = _neighbor_slot(adjacency, seed, entered_from)
    left = adjacency[seed, (j + 1) % 3]
    right = adjacency[seed, (j + 2) % 3]
    return (
        _expand_branch(adjacency, left, seed, depth - 1)
        + [seed]
        + _expand_branch(adjacency, right, seed, depth - 1)
    )


def _kernel_rows(mesh: Mesh, centers: np.ndarray, kernel_size: int) -> np.ndarray:
    adjacency = mesh.adjacency
    depth = (kernel_size - 1) // 2
    columns: list[np.ndarray] = []
    for t in range(3):
        seed = adjacency[centers, t]
        columns.extend(_expand_branch(adjacency, seed, centers, depth))
    return np.stack(columns, axis=1)


def kernel_pattern(mesh: Mesh, f: int, kernel_size: int) -> np.ndarray:
    """Serialized pattern of fixed length for one face; duplicates retained."""
    if kernel_size not in SUPPORTED_KERNELS:
        raise MeshError(f"unsupported kernel size {kernel_size}; supported: {SUPPORTED_KERNELS}")
    if not 0 <= f < mesh.face_count:
        raise MeshError(f"face index out of range: {f}")
    _require_closed(mesh)
    return _kernel_rows(mesh, np.array([f], dtype=np.int64), kernel_size)[0]


def _dilated_rows(mesh: Mesh, centers: np.ndarray, dilation: int, parity: str) -> np.ndarray:
    adjacency = mesh.adjacency
    columns = []
    for t in range(3):
        current = adjacency[centers, t]
        previous = centers
        for hop in range(dilation - 1):
            counterclockwise = (hop % 2 == 0) == (parity == "zig")
            j = _neighbor_slot(adjacency, current, previous)
            step = 1 if counterclockwise else 2
            nxt = adjacency[current, (j + step) % 3]
            previous, current = current, nxt
        columns.append(current)
    return np.stack(columns, axis=1)


def dilated_pattern(mesh: Mesh, f: int, dilation: int, parity: str = "zig") -> np.ndarray:
    """Size-3 pattern at hop distance `dilation`, built by alternating turns.

    dilation 1 is the plain neighbor ring. Each extra unit takes one more hop
    from the previous face, turning counterclockwise and clockwise in
    alternation; `parity` picks the first turn direction.
    """
    if dilation < 1:
        raise MeshError("dilation must be a positive integer")
    if parity not in PARITIES:
        raise MeshError(f"parity must be one of {PARITIES}")
    if not 0 <= f < mesh.face_count:
        raise MeshError(f"face index out of range: {f}")
    _require_closed(mesh)
    return _dilated_rows(mesh, np.array([f], dtype=np.int64), dilation, parity)[0]


def compile_index_buffer(
    pyramid: MeshPyramid,
    level: int,
    kernel_size: int = 3,
    dilation: int = 1,
    stride: int = 1,
    parity: str = "zig",
) -> KernelIndexBuffer:
    """Build the gather rows for a (kernel, dilation, stride) triple at a level.

    stride 1 emits one row per face of the level; stride 2 emits one row per
    face of the level below, anchored at that parent's central child.
    """
    if not 0 <= level <= pyramid.depth:
        raise MeshError(f"level {level} out of range for depth {pyramid.depth}")
    if kernel_size not in SUPPORTED_KERNELS:
        raise MeshError(f"unsupported kernel size {kernel_size}")
    if dilation < 1:
        raise MeshError("dilation must be a positive integer")
    if kernel_size > 3 and dilation > 1:
        raise MeshError("dilation is only supported for kernel size 3")
    if stride not in (1, 2):
        raise MeshError("stride must be 1 or 2")
    if parity not in PARITIES:
        raise MeshError(f"parity must be one of {PARITIES}")
    mesh = pyramid.levels[level]
    _require_closed(mesh)

    if stride == 1:
        centers = np.arange(mesh.face_count, dtype=np.int64)
    else:
        if level < 1:
            raise MeshError("stride 2 requires level >= 1")
        centers = pyramid.face_maps[level - 1].central_child.astype(np.int64)

    if dilation == 1:
        rows = _kernel_rows(mesh, centers, kernel_size)
    else:
        rows = _dilated_rows(mesh, centers, dilation, parity)
    return KernelIndexBuffer(
        kernel_size=kernel_size,
        dilation=dilation,
        stride=stride,
        parity=parity,
        level=level,
        rows=rows.astype(np.int32),
        anchors=centers.astype(np.int32),
    )


_HEADER = struct.Struct("<4sIIIIIIQI")


def save_index_buffer(buffer: KernelIndexBuffer, path) -> None:
    """Binary export plus a JSON mirror next to it for debugging."""
    path = Path(path)
    header = _HEADER.pack(
        MAGIC,
        BUFFER_FORMAT_VERSION,
        buffer.level,
        buffer.kernel_size,
        buffer.dilation,
        buffer.stride,
        PARITIES.index(buffer.parity),
        buffer.rows.shape[0],
        buffer.rows.shape[1],
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(buffer.rows, dtype="<i4").tobytes())
    mirror = {
        "format_version": BUFFER_FORMAT_VERSION,
        "level": buffer.level,
        "kernel_size": buffer.kernel_size,
        "dilation": buffer.dilation,
        "stride": buffer.stride,
        "parity": buffer.parity,
        "rows": buffer.rows.tolist(),
        "anchors": buffer.anchors.tolist(),
    }
    path.with_suffix(".json").write_text(json.dumps(mirror))


def load_index_buffer(path, pyramid: MeshPyramid | None = None) -> KernelIndexBuffer:
    """Read a binary buffer; anchors are rebuilt from the pyramid for stride 2."""
    path = Path(path)
    raw = path.read_bytes()
    magic, version, level, k, d, stride, parity_idx, n_rows, row_len = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise MeshError(f"{path}: not an index buffer file")
    if version != BUFFER_FORMAT_VERSION:
        raise MeshError(f"{path}: unsupported buffer version {version}")
    rows = np.frombuffer(raw, dtype="<i4", offset=_HEADER.size, count=n_rows * row_len)
    rows = rows.reshape(n_rows, row_len).astype(np.int32)
    if stride == 1:
        anchors = np.arange(n_rows, dtype=np.int32)
    else:
        if pyramid is None:
            raise MeshError("loading a stride-2 buffer requires the pyramid")
        anchors = pyramid.face_maps[level - 1].central_child.astype(np.int32)
    return KernelIndexBuffer(
        kernel_size=int(k),
        dilation=int(d),
        stride=int(stride),
        parity=PARITIES[parity_idx],
        level=int(level),
        rows=rows,
        anchors=anchors,
    )
