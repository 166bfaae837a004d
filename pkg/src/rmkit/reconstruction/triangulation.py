from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from rmkit.errors import NearParallel
from rmkit.geometry.calibration import RigCalibration, SensorType
from rmkit.geometry.camera import map_image_point_to_unit_plane
from rmkit.geometry.transforms import RigidTransform
from rmkit.reconstruction.pointcloud import FrameTag

PARALLEL_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class Ray:
    origin: np.ndarray
    direction: np.ndarray
    frame: FrameTag = FrameTag.RIG

    def __post_init__(self):
        o = np.array(self.origin, dtype=np.float64).reshape(3)
        d = np.array(self.direction, dtype=np.float64).reshape(3)
        n = np.linalg.norm(d)
        if n == 0:
            raise ValueError("ray direction must be non-zero")
        object.__setattr__(self, "origin", o)
        object.__setattr__(self, "direction", d / n)
        object.__setattr__(self, "frame", FrameTag(self.frame))

    def at(self, s: float) -> np.ndarray:
        return self.origin + s * self.direction

    def transformed(self, T: RigidTransform, frame) -> Ray:
        return Ray(T.apply(self.origin), T.rotate(self.direction), frame)


def pixel_ray(calib: RigCalibration, sensor, pixel, frame=FrameTag.RIG) -> Ray:
    """Viewing ray of a camera pixel, expressed in the rig frame."""
    desc = calib[SensorType(sensor)]
    x, y = map_image_point_to_unit_plane(calib.camera(sensor), pixel)
    return Ray((0.0, 0.0, 0.0), (x, y, 1.0), FrameTag.CAMERA).transformed(desc.rig_from_sensor, frame)


def triangulate_midpoint(a: Ray, b: Ray) -> tuple[np.ndarray, float]:
    """Midpoint of the common perpendicular of two lines and its length."""
    if a.frame is not b.frame:
        raise ValueError(f"rays in different frames ({a.frame.value}, {b.frame.value})")
    d1, d2 = a.direction, b.direction
    if np.linalg.norm(np.cross(d1, d2)) < PARALLEL_TOL:
        raise NearParallel("rays are parallel to within tolerance")
    w0 = a.origin - b.origin
    c = float(d1 @ d2)
    p = float(d1 @ w0)
    q = float(d2 @ w0)
    denom = 1.0 - c * c
    s = (c * q - p) / denom
    t = (q - c * p) / denom
    pa = a.at(s)
    pb = b.at(t)
    return 0.5 * (pa + pb), float(np.linalg.norm(pa - pb))
