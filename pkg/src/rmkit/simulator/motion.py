"""Parametric rig trajectories (``world_from_rig`` as a function of time)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from rmkit.geometry.trajectory import TICKS_PER_SECOND, PoseTrajectory, locate_rig_at
from rmkit.geometry.transforms import RigidTransform, look_at, rot_y, so3_log


@dataclass(frozen=True, eq=False)
class Static:
    pose: RigidTransform

    def pose_at(self, t: float) -> RigidTransform:
        return self.pose


@dataclass(frozen=True, eq=False)
class Orbit:
    """Circle of ``radius`` around the vertical axis through ``center``, at
    ``height`` above it, always looking at ``center``."""

    center: np.ndarray
    radius: float
    angular_rate: float
    height: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=np.float64).reshape(3))
        if not self.radius > 0:
            raise ValueError("orbit radius must be positive")

    @property
    def _r0(self) -> np.ndarray:
        p0 = self.center + np.array([self.radius, self.height, 0.0])
        return look_at(p0, self.center).rotation

    def pose_at(self, t: float) -> RigidTransform:
        Ry = rot_y(self.angular_rate * t)
        p = self.center + Ry @ np.array([self.radius, self.height, 0.0])
        return RigidTransform(Ry @ self._r0, p)


@dataclass(frozen=True, eq=False)
class Waypoints:
    times: tuple  # seconds, strictly increasing
    poses: tuple  # world_from_rig

    def __post_init__(self):
        object.__setattr__(self, "times", tuple(float(t) for t in self.times))
        object.__setattr__(self, "poses", tuple(self.poses))
        if len(self.times) == 0 or len(self.times) != len(self.poses):
            raise ValueError("waypoints need matching, non-empty times and poses")
        ticks = np.array([t * TICKS_PER_SECOND for t in self.times])
        if np.any(np.diff(ticks) <= 0):
            raise ValueError("waypoint times must be strictly increasing")
        object.__setattr__(self, "_ticks", ticks)
        object.__setattr__(self, "_traj", PoseTrajectory(np.round(ticks).astype(np.uint64), self.poses))

    def pose_at(self, t: float) -> RigidTransform:
        return locate_rig_at(self._traj, t * TICKS_PER_SECOND)


@dataclass(frozen=True, eq=False)
class TrajectorySpec:
    motion: Static | Orbit | Waypoints
    duration: float
    pose_rate: float = 30.0

    def __post_init__(self):
        if not self.duration > 0:
            raise ValueError("duration must be positive")
        if not self.pose_rate > 0:
            raise ValueError("pose rate must be positive")

    def pose_at(self, t: float) -> RigidTransform:
        return self.motion.pose_at(t)

    def sample_ticks(self, rate: float) -> np.ndarray:
        """Nominal grid ``k / rate`` for all ``k`` with ``k / rate < duration``, in ticks."""
        n = int(np.ceil(self.duration * rate - 1e-9))
        return np.round(np.arange(n) * (TICKS_PER_SECOND / rate)).astype(np.uint64)

    def ground_truth(self) -> PoseTrajectory:
        ts = self.sample_ticks(self.pose_rate)
        return PoseTrajectory(ts, tuple(self.pose_at(int(t) / TICKS_PER_SECOND) for t in ts))

    def kinematics(self, t: np.ndarray, rig_from_sensor: RigidTransform | None = None):
        """Sensor orientation, world angular velocity and world acceleration of
        a point rigidly attached at ``rig_from_sensor``.

        Returns ``(R, omega, accel)`` with shapes (N, 3, 3), (N, 3), (N, 3).
        """
        t = np.asarray(t, dtype=np.float64).reshape(-1)
        ext = rig_from_sensor or RigidTransform.identity()
        m = self.motion
        n = len(t)
        if isinstance(m, Static):
            T = m.pose @ ext
            return np.broadcast_to(T.rotation, (n, 3, 3)).copy(), np.zeros((n, 3)), np.zeros((n, 3))
        if isinstance(m, Orbit):
            w = m.angular_rate
            c, s = np.cos(w * t), np.sin(w * t)
            Ry = np.zeros((n, 3, 3))
            Ry[:, 0, 0], Ry[:, 0, 2], Ry[:, 1, 1], Ry[:, 2, 0], Ry[:, 2, 2] = c, s, 1.0, -s, c
            R_rig = Ry @ m._r0
            arm = np.array([m.radius, m.height, 0.0]) + m._r0 @ ext.translation
            rel = Ry @ arm  # sensor position relative to the orbit center
            rel[:, 1] = 0.0
            omega = np.tile([0.0, w, 0.0], (n, 1))
            return R_rig @ ext.rotation, omega, -(w * w) * rel
        # waypoints: centered differences, step one pose period
        h = 1.0 / self.pose_rate
        R = np.empty((n, 3, 3))
        omega = np.empty((n, 3))
        accel = np.empty((n, 3))
        for i, ti in enumerate(t):
            T0, Tm, Tp = (self.pose_at(x) @ ext for x in (ti, ti - h, ti + h))
            R[i] = T0.rotation
            omega[i] = so3_log(Tp.rotation @ Tm.rotation.T) / (2 * h)
            accel[i] = (Tp.translation - 2 * T0.translation + Tm.translation) / (h * h)
        return R, omega, accel
