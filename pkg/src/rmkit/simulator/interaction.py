from __future__ import annotations

import numpy as np

from rmkit.errors import UnknownTarget
from rmkit.frames import HAND_JOINT_COUNT, GazeSample, Handedness, HandSample
from rmkit.geometry.trajectory import TICKS_PER_SECOND
from rmkit.geometry.transforms import RigidTransform
from rmkit.simulator.motion import TrajectorySpec
from rmkit.simulator.scene import Scene, primitive_center

HAND_OFFSET = np.array([0.0, 0.1, 0.4])  # rig frame: 0.4 m ahead, slightly below (y down)


def hand_layout(joints: int = HAND_JOINT_COUNT) -> np.ndarray:
    """Fixed joint positions in the rig frame: wrist, palm, then five
    fingers of four joints each, laid out on a vertical plane."""
    pts = [HAND_OFFSET, HAND_OFFSET + [0.0, -0.03, 0.0]]
    for f in range(5):
        base = HAND_OFFSET + [0.02 * (f - 2), -0.06, 0.0]
        for j in range(4):
            pts.append(base + [0.0, -0.02 * j, 0.0])
    pts = np.array(pts)
    if joints <= len(pts):
        return pts[:joints]
    extra = HAND_OFFSET + np.outer(np.arange(1, joints - len(pts) + 1), [0.005, 0.0, 0.0])
    return np.vstack([pts, extra])


def synth_interaction(
    traj: TrajectorySpec,
    scene: Scene,
    target: int | None,
    joints: int = HAND_JOINT_COUNT,
) -> tuple[list[GazeSample], list[HandSample]]:
    """Gaze and hand samples at every pose sample, expressed in the rig frame.

    The gaze ray leaves the rig origin toward the center of primitive
    ``target`` (straight ahead when ``target`` is None).
    """
    if target is not None and not 0 <= target < len(scene.primitives):
        raise UnknownTarget(f"scene has no primitive {target}")
    center = None if target is None else primitive_center(scene.primitives[target])
    layout = tuple(RigidTransform.from_translation(p) for p in hand_layout(joints))
    gazes, hands = [], []
    for tick in traj.sample_ticks(traj.pose_rate):
        tick = int(tick)
        if center is None:
            d = np.array([0.0, 0.0, 1.0])
        else:
            pose = traj.pose_at(tick / TICKS_PER_SECOND)
            d = pose.rotation.T @ (center - pose.translation)
            n = np.linalg.norm(d)
            if n < 1e-12:
                raise ValueError("rig origin coincides with the gaze target")
            d = d / n
        gazes.append(GazeSample(tick, np.zeros(3), d))
        hands.append(HandSample(tick, layout, Handedness.RIGHT))
    return gazes, hands
