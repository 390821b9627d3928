"""Mesh pyramids with subdivision connectivity and face-based convolution networks."""

from subdivnet.mesh import (
    BOUNDARY,
    Mesh,
    MeshError,
    MeshStats,
    face_distance,
    k_ring,
    load_obj,
    save_obj,
    validate_closed_manifold,
)

__version__ = "0.1.0"

__all__ = [
    "BOUNDARY",
    "Mesh",
    "MeshError",
    "MeshStats",
    "face_distance",
    "k_ring",
    "load_obj",
    "save_obj",
    "validate_closed_manifold",
    "__version__",
]
