"""Trajectory text files: one pose per line, ``ticks tx ty tz qx qy qz qw``."""

from __future__ import annotations

import numpy as np

from rmkit.geometry.trajectory import PoseTrajectory
from rmkit.geometry.transforms import RigidTransform


def format_trajectory(traj: PoseTrajectory) -> str:
    lines = ["# ticks tx ty tz qx qy qz qw"]
    for t, pose in traj:
        vals = list(pose.translation) + list(pose.quaternion)
        lines.append(f"{t} " + " ".join(f"{v:.9g}" for v in vals))
    return "\n".join(lines) + "\n"


def write_trajectory(traj: PoseTrajectory, path) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(format_trajectory(traj))


def parse_trajectory(text: str) -> PoseTrajectory:
    stamps, poses = [], []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        tok = line.split()
        if len(tok) != 8:
            raise ValueError(f"line {lineno}: expected 8 fields, got {len(tok)}")
        stamps.append(int(tok[0]))
        v = [float(x) for x in tok[1:]]
        poses.append(RigidTransform.from_quaternion(v[3:], v[:3]))
    return PoseTrajectory(np.array(stamps, dtype=np.uint64), tuple(poses))


def read_trajectory(path) -> PoseTrajectory:
    with open(path, encoding="ascii") as fh:
        return parse_trajectory(fh.read())
