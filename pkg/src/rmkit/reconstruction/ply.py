"""Binary little-endian PLY output.

Element order: ``vertex`` (float x, y, z; then float nx, ny, nz when normals
exist; then float intensity when present), followed by ``face`` (uchar count,
int vertex_indices) for meshes.
"""

from __future__ import annotations

import numpy as np

from rmkit.reconstruction.mesh import TriangleMesh
from rmkit.reconstruction.pointcloud import PointCloud


def _header(n_vertex: int, props: list[str], n_face: int | None) -> bytes:
    lines = ["ply", "format binary_little_endian 1.0", "comment rmkit", f"element vertex {n_vertex}"]
    lines += [f"property float {p}" for p in props]
    if n_face is not None:
        lines += [f"element face {n_face}", "property list uchar int vertex_indices"]
    lines.append("end_header")
    return ("\n".join(lines) + "\n").encode("ascii")


def ply_bytes(geometry) -> bytes:
    if isinstance(geometry, PointCloud):
        pts, normals, inten, faces = geometry.points, None, geometry.intensity, None
    elif isinstance(geometry, TriangleMesh):
        pts, normals, inten, faces = geometry.vertices, geometry.normals, None, geometry.triangles
    else:
        raise TypeError(f"cannot write {type(geometry).__name__} as PLY")
    props = ["x", "y", "z"]
    cols = [pts]
    if normals is not None:
        props += ["nx", "ny", "nz"]
        cols.append(normals)
    if inten is not None:
        props.append("intensity")
        cols.append(inten[:, None])
    vdata = np.hstack(cols).astype("<f4") if len(pts) else np.zeros((0, len(props)), "<f4")
    out = [_header(len(pts), props, None if faces is None else len(faces)), vdata.tobytes()]
    if faces is not None and len(faces):
        rec = np.empty(len(faces), dtype=[("n", "u1"), ("idx", "<i4", (3,))])
        rec["n"] = 3
        rec["idx"] = faces
        out.append(rec.tobytes())
    return b"".join(out)


def export_ply(geometry, path) -> None:
    with open(path, "wb") as fh:
        fh.write(ply_bytes(geometry))
