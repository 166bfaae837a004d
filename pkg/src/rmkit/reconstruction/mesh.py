from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from skimage.measure import marching_cubes

from rmkit.reconstruction.tsdf import TsdfVolume


@dataclass(frozen=True, eq=False)
class TriangleMesh:
    vertices: np.ndarray
    triangles: np.ndarray
    normals: np.ndarray | None = None

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=np.float64).reshape(-1, 3)
        f = np.asarray(self.triangles, dtype=np.int64).reshape(-1, 3)
        if len(f) and (f.min() < 0 or f.max() >= len(v)):
            raise ValueError("triangle index out of range")
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "triangles", f)
        if self.normals is not None:
            object.__setattr__(self, "normals", np.asarray(self.normals, dtype=np.float64).reshape(-1, 3))

    @classmethod
    def empty(cls) -> TriangleMesh:
        return cls(np.zeros((0, 3)), np.zeros((0, 3), dtype=np.int64))

    def edges(self) -> np.ndarray:
        """Unique undirected edges, shape (E, 2)."""
        f = self.triangles
        e = np.concatenate([f[:, [0, 1]], f[:, [1, 2]], f[:, [2, 0]]])
        return np.unique(np.sort(e, axis=1), axis=0)

    def euler_characteristic(self) -> int:
        used = np.unique(self.triangles)
        return int(len(used) - len(self.edges()) + len(self.triangles))

    def is_closed(self) -> bool:
        """Every edge shared by exactly two triangles."""
        f = self.triangles
        e = np.sort(np.concatenate([f[:, [0, 1]], f[:, [1, 2]], f[:, [2, 0]]]), axis=1)
        _, counts = np.unique(e, axis=0, return_counts=True)
        return bool(len(f)) and bool(np.all(counts == 2))

    def triangle_areas(self) -> np.ndarray:
        v = self.vertices[self.triangles]
        return 0.5 * np.linalg.norm(np.cross(v[:, 1] - v[:, 0], v[:, 2] - v[:, 0]), axis=1)


def _corners(a: np.ndarray) -> list[np.ndarray]:
    n0, n1, n2 = (s - 1 for s in a.shape)
    return [a[i:i + n0, j:j + n1, k:k + n2] for i in (0, 1) for j in (0, 1) for k in (0, 1)]


def observed_cells(weight: np.ndarray) -> np.ndarray:
    """Cubes between 8 neighboring voxel centers whose corners all have weight > 0.

    Shape is ``dims - 1``; entry ``(i, j, k)`` is the cube with minimum corner ``(i, j, k)``.
    """
    return np.logical_and.reduce(_corners(weight > 0))


def extract_mesh(vol: TsdfVolume) -> TriangleMesh:
    """Zero level set of the TSDF over fully observed cubes (marching cubes)."""
    cells = observed_cells(vol.weight)
    if not cells.any():
        return TriangleMesh.empty()
    t = vol.tsdf
    # a cube can only contribute if its corners straddle zero
    corners = _corners(t)
    lo = np.minimum.reduce(corners)
    hi = np.maximum.reduce(corners)
    cells &= (lo < 0) & (hi > 0)
    if not cells.any():
        return TriangleMesh.empty()
    # skimage's mask marks a cube by its maximum corner
    mask = np.zeros(t.shape, dtype=bool)
    mask[1:, 1:, 1:] = cells
    try:
        verts, faces, normals, _ = marching_cubes(
            t.astype(np.float64), level=0.0, gradient_direction="ascent", mask=mask, allow_degenerate=False
        )
    except RuntimeError:
        return TriangleMesh.empty()
    verts = vol.origin + (verts + 0.5) * vol.voxel_size
    mesh = TriangleMesh(verts, faces, normals)
    areas = mesh.triangle_areas()
    if np.any(areas <= 0):
        mesh = TriangleMesh(verts, faces[areas > 0], normals)
    return mesh
