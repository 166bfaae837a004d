"""Time-stamped rig poses and pose lookup by timestamp.

Timestamps are unsigned 64-bit counts of 100 ns ticks from the recording
epoch. Between samples, rotation is slerped and translation interpolated
linearly; queries outside the sampled interval clamp to the nearest end.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from rmkit.errors import EmptyTrajectory
from rmkit.geometry.transforms import RigidTransform, matrix_to_quat, quat_to_matrix, slerp

TICKS_PER_SECOND = 10_000_000


def seconds_to_ticks(s: float) -> int:
    return int(round(s * TICKS_PER_SECOND))


def ticks_to_seconds(t) -> float:
    return float(t) / TICKS_PER_SECOND


@dataclass(frozen=True, eq=False)
class PoseTrajectory:
    """Ordered ``(timestamp, world_from_rig)`` samples."""

    timestamps: np.ndarray
    poses: tuple[RigidTransform, ...]

    def __post_init__(self):
        ts = np.asarray(self.timestamps, dtype=np.uint64).reshape(-1)
        poses = tuple(self.poses)
        if len(ts) != len(poses):
            raise ValueError("timestamps and poses differ in length")
        if len(ts) > 1 and not np.all(ts[1:] > ts[:-1]):
            raise ValueError("trajectory timestamps must be strictly increasing")
        ts.setflags(write=False)
        object.__setattr__(self, "timestamps", ts)
        object.__setattr__(self, "poses", poses)
        object.__setattr__(self, "_quats", [matrix_to_quat(p.rotation) for p in poses])

    @classmethod
    def from_samples(cls, samples) -> PoseTrajectory:
        samples = list(samples)
        return cls(np.array([int(t) for t, _ in samples], dtype=np.uint64), tuple(p for _, p in samples))

    def __len__(self) -> int:
        return len(self.poses)

    def __iter__(self):
        return zip((int(t) for t in self.timestamps), self.poses)

    @property
    def translations(self) -> np.ndarray:
        return np.array([p.translation for p in self.poses]).reshape(-1, 3)

    def transformed(self, W: RigidTransform) -> PoseTrajectory:
        """Same trajectory expressed in a new world frame: every pose becomes ``W ∘ pose``."""
        return PoseTrajectory(self.timestamps, tuple(W @ p for p in self.poses))

    def locate(self, t) -> RigidTransform:
        return locate_rig_at(self, t)

    def covers(self, t) -> bool:
        return len(self) > 0 and int(self.timestamps[0]) <= t <= int(self.timestamps[-1])


def locate_rig_at(traj: PoseTrajectory, t) -> RigidTransform:
    """Pose at timestamp ``t`` (ticks; may be fractional)."""
    n = len(traj)
    if n == 0:
        raise EmptyTrajectory("cannot locate on an empty trajectory")
    ts = traj.timestamps
    if t <= ts[0]:
        return traj.poses[0]
    if t >= ts[-1]:
        return traj.poses[-1]
    # ts[k-1] < t <= ts[k]
    k = int(np.searchsorted(ts, t, side="left"))
    if ts[k] == t:
        return traj.poses[k]
    t0, t1 = int(ts[k - 1]), int(ts[k])
    s = (t - t0) / (t1 - t0)
    a, b = traj.poses[k - 1], traj.poses[k]
    q = slerp(traj._quats[k - 1], traj._quats[k], s)
    return RigidTransform(quat_to_matrix(q), (1.0 - s) * a.translation + s * b.translation)
