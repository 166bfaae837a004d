from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from rmkit.errors import DimensionMismatch
from rmkit.geometry.camera import CameraModel
from rmkit.geometry.transforms import RigidTransform


class FrameTag(enum.Enum):
    CAMERA = "camera"
    RIG = "rig"
    WORLD = "world"


@dataclass(frozen=True, eq=False)
class PointCloud:
    points: np.ndarray
    intensity: np.ndarray | None = None
    frame: FrameTag = FrameTag.CAMERA

    def __post_init__(self):
        p = np.asarray(self.points, dtype=np.float64).reshape(-1, 3)
        if not np.all(np.isfinite(p)):
            raise ValueError("point coordinates must be finite")
        object.__setattr__(self, "points", p)
        if self.intensity is not None:
            i = np.asarray(self.intensity, dtype=np.float64).reshape(-1)
            if len(i) != len(p):
                raise ValueError("intensity must have one value per point")
            object.__setattr__(self, "intensity", i)
        object.__setattr__(self, "frame", FrameTag(self.frame))

    def __len__(self) -> int:
        return len(self.points)


def unproject_depth(depth_m, valid, cam: CameraModel, intensity=None) -> PointCloud:
    """Camera-frame points ``d * ray`` for every valid pixel.

    ``depth_m`` is radial range (meters) along each pixel-center ray.
    """
    depth_m = np.asarray(depth_m, dtype=np.float64)
    valid = np.asarray(valid, dtype=bool)
    if depth_m.shape != (cam.height, cam.width) or valid.shape != depth_m.shape:
        raise DimensionMismatch(f"depth {depth_m.shape} vs camera {cam.width}x{cam.height}")
    rays = cam.pixel_rays[valid]
    pts = rays * depth_m[valid][:, None]
    inten = None if intensity is None else np.asarray(intensity, dtype=np.float64)[valid]
    return PointCloud(pts, inten, FrameTag.CAMERA)


def transform_cloud(c: PointCloud, t: RigidTransform, new_tag) -> PointCloud:
    return PointCloud(t.apply(c.points), c.intensity, FrameTag(new_tag))
