"""End-to-end capture synthesis.

Every stream is sampled on its own nominal grid ``k / rate`` from a common
epoch (tick 0) and records are merged into one timestamp-ordered container.
A JSON sidecar ``<out>.gt.json`` keeps the ground truth: the config, the
true head trajectory and the per-stream record counts.
"""

from __future__ import annotations

import heapq
import json
import os
from dataclasses import dataclass

from rmkit.container.format import FrameRecord, StreamDescriptor, StreamKind, encode_payload
from rmkit.container.writer import Writer
from rmkit.frames import DepthMode, ImuKind
from rmkit.geometry.calibration import RigCalibration, SensorType
from rmkit.geometry.trajectory import TICKS_PER_SECOND, PoseTrajectory
from rmkit.simulator.config import SimulationConfig, pose_from_dict, pose_to_dict
from rmkit.simulator.imu import synth_imu
from rmkit.simulator.interaction import synth_interaction
from rmkit.simulator.motion import TrajectorySpec
from rmkit.simulator.render import NoiseSpec, render_depth, render_vlc
from rmkit.simulator.scene import Scene

HEAD_STREAM = 9
HAND_STREAM = 10
GAZE_STREAM = 11

SIDECAR_FORMAT = "rmrc-groundtruth 1"

_IMU_KINDS = {SensorType.IMU_ACCEL: ImuKind.ACCEL, SensorType.IMU_GYRO: ImuKind.GYRO, SensorType.IMU_MAG: ImuKind.MAG}


def stream_descriptors(rig: RigCalibration, pose_rate: float) -> list[StreamDescriptor]:
    """Sensor streams keep their sensor number as id; head, hand and gaze follow."""
    out = [
        StreamDescriptor(int(s.sensor_type), StreamKind.of(s.sensor_type), nominal_fps=s.nominal_fps,
                         extrinsics=s.rig_from_sensor, camera=s.camera)
        for s in rig
    ]
    out.append(StreamDescriptor(HEAD_STREAM, StreamKind.HEAD_POSE, nominal_fps=pose_rate))
    out.append(StreamDescriptor(HAND_STREAM, StreamKind.HAND_POSE, nominal_fps=pose_rate))
    out.append(StreamDescriptor(GAZE_STREAM, StreamKind.GAZE_RAY, nominal_fps=pose_rate))
    return out


@dataclass(frozen=True)
class SimulationResult:
    path: str
    sidecar: str
    counts: dict


def _camera_events(scene, rig, traj, noise, s, threads):
    desc = rig[s]
    sid = int(s)
    for k, tick in enumerate(int(t) for t in traj.sample_ticks(desc.nominal_fps)):

        def make(k=k, tick=tick):
            w_from_cam = traj.pose_at(tick / TICKS_PER_SECOND) @ desc.rig_from_sensor
            if s.is_vlc:
                return render_vlc(scene, desc.camera, w_from_cam, tick, threads)
            mode = DepthMode.AHAT if s is SensorType.DEPTH_AHAT else DepthMode.LONG_THROW
            return render_depth(scene, desc.camera, w_from_cam, mode, noise, sid, k, tick, threads)

        yield tick, sid, make


def _fixed_events(sid, items, stamp):
    for item in items:
        yield stamp(item), sid, (lambda item=item: item)


def simulate(
    scene: Scene,
    rig: RigCalibration,
    traj: TrajectorySpec,
    noise: NoiseSpec | None,
    out_path,
    gaze_target: int | None = None,
    threads: int = 1,
    config: SimulationConfig | None = None,
) -> SimulationResult:
    noise = noise or NoiseSpec()
    out_path = os.fspath(out_path)
    descs = stream_descriptors(rig, traj.pose_rate)
    by_id = {d.stream_id: d for d in descs}

    sources = []
    for s in (d.sensor_type for d in rig):
        if s.is_camera:
            sources.append(_camera_events(scene, rig, traj, noise, s, threads))
    imu = synth_imu(traj, rig)
    for s, kind in _IMU_KINDS.items():
        if s in rig:
            sources.append(_fixed_events(int(s), imu[kind], lambda b: int(b.timestamps[0])))
    gt = traj.ground_truth()
    sources.append(_fixed_events(HEAD_STREAM, list(gt), lambda p: p[0]))
    gazes, hands = synth_interaction(traj, scene, gaze_target)
    sources.append(_fixed_events(HAND_STREAM, hands, lambda h: h.timestamp))
    sources.append(_fixed_events(GAZE_STREAM, gazes, lambda g: g.timestamp))

    counts = {d.stream_id: 0 for d in descs}
    with Writer(out_path, rig, descs) as w:
        for tick, sid, make in heapq.merge(*sources, key=lambda e: (e[0], e[1])):
            obj = make()
            if sid == HEAD_STREAM:
                w.append_frame(FrameRecord(sid, tick, encode_payload(by_id[sid], obj[1])))
            else:
                w.append(sid, obj)
            counts[sid] += 1

    if config is None:
        config = SimulationConfig(scene, traj, noise, gaze_target=gaze_target)
    sidecar = out_path + ".gt.json"
    doc = {
        "format": SIDECAR_FORMAT,
        "seed": int(noise.seed),
        "config": config.to_dict(),
        "streams": {str(k): v for k, v in counts.items()},
        "trajectory": [{"timestamp": t, **pose_to_dict(p)} for t, p in gt],
    }
    with open(sidecar, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return SimulationResult(out_path, sidecar, counts)


def simulate_config(cfg: SimulationConfig, out_path, threads: int = 1) -> SimulationResult:
    return simulate(cfg.scene, cfg.rig.build(), cfg.trajectory, cfg.noise, out_path, cfg.gaze_target, threads, cfg)


def load_ground_truth(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("format") != SIDECAR_FORMAT:
        raise ValueError(f"{path}: not a ground-truth sidecar")
    traj = PoseTrajectory.from_samples((e["timestamp"], pose_from_dict(e)) for e in doc["trajectory"])
    doc["config"] = SimulationConfig.from_dict(doc["config"])
    doc["trajectory"] = traj
    return doc
