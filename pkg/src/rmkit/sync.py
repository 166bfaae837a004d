"""Temporal association of streams and assembly of world-grounded frame bundles.

All streams are assumed to share one device clock; no drift is estimated.
Image frames are matched to the nearest timestamp, never interpolated; only
poses are interpolated.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from rmkit.container.format import StreamKind
from rmkit.container.reader import Reader
from rmkit.errors import EmptyTrajectory, UnsortedInput
from rmkit.frames import GazeSample, HandSample
from rmkit.geometry.trajectory import PoseTrajectory, locate_rig_at
from rmkit.geometry.transforms import RigidTransform

__all__ = [
    "Association",
    "FrameBundle",
    "GazeSample",
    "HandSample",
    "associate",
    "associate_nearest",
    "build_bundles",
    "default_tolerance",
    "resample_trajectory",
]


@dataclass(frozen=True)
class Match:
    index: int
    residual: int  # target timestamp minus reference timestamp, ticks


@dataclass(frozen=True)
class Association:
    ref_index: int
    matched: dict[int, int | None]
    residual_ticks: dict[int, int | None]


def _as_ticks(ts) -> list[int]:
    out = [int(t) for t in ts]
    for a, b in zip(out, out[1:]):
        if b <= a:
            raise UnsortedInput("timestamps must be strictly increasing")
    return out


def associate_nearest(ref_ts, target_ts, tol_ticks) -> list[Match | None]:
    """Match each reference timestamp to the nearest target within ``tol_ticks``.

    Two-pointer scan, linear in the input sizes. A target can be matched by
    several references. When two targets are equally close the earlier wins.
    """
    ref = _as_ticks(ref_ts)
    tgt = _as_ticks(target_ts)
    out: list[Match | None] = []
    j = 0
    n = len(tgt)
    for t in ref:
        # advance while the next target is strictly closer
        while j + 1 < n and abs(tgt[j + 1] - t) < abs(tgt[j] - t):
            j += 1
        if n and abs(tgt[j] - t) <= tol_ticks:
            out.append(Match(j, tgt[j] - t))
        else:
            out.append(None)
    return out


def associate(ref_ts, targets: dict[int, np.ndarray], tol_ticks) -> list[Association]:
    per_stream = {sid: associate_nearest(ref_ts, ts, tol_ticks) for sid, ts in targets.items()}
    out = []
    for i in range(len(ref_ts)):
        matched = {sid: (m[i].index if m[i] else None) for sid, m in per_stream.items()}
        resid = {sid: (m[i].residual if m[i] else None) for sid, m in per_stream.items()}
        out.append(Association(i, matched, resid))
    return out


def default_tolerance(nominal_fps: float) -> int:
    """Half of the nominal frame period, in ticks."""
    return int(round(0.5 * 10_000_000 / nominal_fps))


@dataclass(frozen=True, eq=False)
class FrameBundle:
    ref_stream: int
    ref_index: int
    timestamp: int
    reference: object
    world_from_rig: RigidTransform | None
    matches: dict[int, Match | None] = field(default_factory=dict)
    frames: dict[int, object] = field(default_factory=dict)
    gaze: GazeSample | None = None
    hand: HandSample | None = None


_INTERACTION = (StreamKind.HEAD_POSE, StreamKind.GAZE_RAY, StreamKind.HAND_POSE)


def build_bundles(
    reader: Reader,
    ref_stream_id: int,
    tol_ticks: int | None = None,
    trajectory: PoseTrajectory | None = None,
    load_frames: bool = True,
):
    """Yield one :class:`FrameBundle` per reference frame, in timestamp order.

    ``trajectory`` defaults to the container's head pose stream. Gaze rays and
    hand joints are stored in the rig frame; each is moved to the world frame
    with the pose at its own timestamp.
    """
    ref_desc = reader.descriptor(ref_stream_id)
    if trajectory is None:
        trajectory = reader.head_trajectory()
    if len(trajectory) == 0:
        raise EmptyTrajectory("bundles need a non-empty trajectory")
    if tol_ticks is None:
        tol_ticks = default_tolerance(ref_desc.nominal_fps)
    ref_ts = reader.timestamps(ref_stream_id)

    others = [
        sid for sid, d in sorted(reader.descriptors.items()) if sid != ref_stream_id and d.kind not in _INTERACTION
    ]
    matches = {sid: associate_nearest(ref_ts, reader.timestamps(sid), tol_ticks) for sid in others}
    gaze_ids = [d.stream_id for d in reader.streams_of_kind(StreamKind.GAZE_RAY)]
    hand_ids = [d.stream_id for d in reader.streams_of_kind(StreamKind.HAND_POSE)]
    gaze_m = associate_nearest(ref_ts, reader.timestamps(gaze_ids[0]), tol_ticks) if gaze_ids else None
    hand_m = associate_nearest(ref_ts, reader.timestamps(hand_ids[0]), tol_ticks) if hand_ids else None

    for i, t in enumerate(int(x) for x in ref_ts):
        pose = locate_rig_at(trajectory, t)
        m_i = {sid: matches[sid][i] for sid in others}
        frames = {}
        if load_frames:
            frames = {sid: reader.read_frame(sid, m.index) for sid, m in m_i.items() if m is not None}
        gaze = hand = None
        if gaze_m is not None and gaze_m[i] is not None:
            g = reader.read_frame(gaze_ids[0], gaze_m[i].index)
            gaze = g.transformed(locate_rig_at(trajectory, g.timestamp))
        if hand_m is not None and hand_m[i] is not None:
            h = reader.read_frame(hand_ids[0], hand_m[i].index)
            hand = h.transformed(locate_rig_at(trajectory, h.timestamp))
        reference = reader.read_frame(ref_stream_id, i) if load_frames else None
        yield FrameBundle(ref_stream_id, i, t, reference, pose, m_i, frames, gaze, hand)


def resample_trajectory(traj: PoseTrajectory, period_ticks: int) -> PoseTrajectory:
    """Uniformly spaced samples from the first to the last timestamp (last included)."""
    if len(traj) == 0:
        raise EmptyTrajectory("cannot resample an empty trajectory")
    if period_ticks <= 0:
        raise ValueError("period must be positive")
    t0, t1 = int(traj.timestamps[0]), int(traj.timestamps[-1])
    ticks = list(range(t0, t1 + 1, int(period_ticks)))
    if ticks[-1] != t1:
        ticks.append(t1)
    return PoseTrajectory(np.array(ticks, dtype=np.uint64), tuple(locate_rig_at(traj, t) for t in ticks))
