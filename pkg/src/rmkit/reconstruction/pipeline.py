"""Container-level reconstruction helpers: Long Throw frames to world points
and TSDF fusion over a recording."""

from __future__ import annotations

import numpy as np

from rmkit.container.format import StreamKind
from rmkit.container.reader import Reader
from rmkit.errors import ModeMismatch
from rmkit.frames import DepthPacket, long_throw_meters, validate_long_throw
from rmkit.geometry.trajectory import PoseTrajectory, locate_rig_at
from rmkit.geometry.transforms import RigidTransform
from rmkit.reconstruction.pointcloud import FrameTag, PointCloud, transform_cloud, unproject_depth
from rmkit.reconstruction.tsdf import TsdfVolume, tsdf_integrate


def long_throw_range(pkt: DepthPacket) -> tuple[np.ndarray, np.ndarray]:
    """Radial range in meters and validity, after sigma invalidation."""
    if pkt.sigma is None:
        raise ModeMismatch("expected a Long Throw packet")
    return long_throw_meters(validate_long_throw(pkt.depth, pkt.sigma))


def depth_stream(reader: Reader, stream_id: int | None = None) -> int:
    if stream_id is None:
        lt = reader.streams_of_kind(StreamKind.DEPTH_LONG_THROW)
        if not lt:
            raise ModeMismatch("container has no Long Throw stream")
        return lt[0].stream_id
    if reader.descriptor(stream_id).kind is not StreamKind.DEPTH_LONG_THROW:
        raise ModeMismatch(f"stream {stream_id} is not a Long Throw stream")
    return stream_id


def frame_cloud(
    reader: Reader,
    stream_id: int,
    index: int,
    frame: FrameTag = FrameTag.WORLD,
    trajectory: PoseTrajectory | None = None,
) -> PointCloud:
    desc = reader.descriptor(stream_id)
    pkt = reader.read_frame(stream_id, index)
    depth_m, valid = long_throw_range(pkt)
    cloud = unproject_depth(depth_m, valid, desc.camera, pkt.ab.data)
    frame = FrameTag(frame)
    if frame is FrameTag.CAMERA:
        return cloud
    T = desc.extrinsics
    if frame is FrameTag.WORLD:
        traj = trajectory if trajectory is not None else reader.head_trajectory()
        T = locate_rig_at(traj, pkt.depth.timestamp) @ T
    return transform_cloud(cloud, T, frame)


def frame_indices(n: int, every: int = 1, limit: int | None = None) -> list[int]:
    idx = list(range(0, n, max(1, every)))
    return idx if limit is None else idx[:limit]


def auto_bounds(reader: Reader, stream_id: int, trajectory: PoseTrajectory, indices, margin: float):
    pts = [frame_cloud(reader, stream_id, i, FrameTag.WORLD, trajectory).points for i in indices]
    pts = np.concatenate(pts) if pts else np.zeros((0, 3))
    if len(pts) == 0:
        raise ValueError("no valid depth pixels to derive bounds from")
    return pts.min(axis=0) - margin, pts.max(axis=0) + margin


def integrate_recording(
    reader: Reader,
    vol: TsdfVolume,
    stream_id: int | None = None,
    trajectory: PoseTrajectory | None = None,
    indices=None,
    threads: int = 1,
) -> int:
    """Fuse Long Throw frames of a recording into ``vol``; returns the frame count."""
    sid = depth_stream(reader, stream_id)
    desc = reader.descriptor(sid)
    traj = trajectory if trajectory is not None else reader.head_trajectory()
    if indices is None:
        indices = range(reader.frame_count(sid))
    n = 0
    for i in indices:
        pkt = reader.read_frame(sid, i)
        depth_m, valid = long_throw_range(pkt)
        world_from_camera: RigidTransform = locate_rig_at(traj, pkt.depth.timestamp) @ desc.extrinsics
        tsdf_integrate(vol, depth_m, valid, desc.camera, world_from_camera, threads=threads)
        n += 1
    return n
