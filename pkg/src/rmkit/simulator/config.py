"""JSON simulation config shared by the simulator and the command line.

Top-level keys: ``scene``, ``trajectory``, ``noise`` (optional), ``rig``
(optional), ``gaze_target`` (optional primitive index). See FORMAT.md for
the full schema. Floats survive a dump/load cycle exactly.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from rmkit.errors import RmkitError
from rmkit.geometry.calibration import RigCalibration, SensorType
from rmkit.geometry.transforms import RigidTransform, look_at
from rmkit.simulator.motion import Orbit, Static, TrajectorySpec, Waypoints
from rmkit.simulator.render import NoiseSpec
from rmkit.simulator.rig import make_default_rig
from rmkit.simulator.scene import Box, Plane, Scene, Sphere


class ConfigError(RmkitError, ValueError):
    pass


def _vec(d: dict, key: str, n: int = 3) -> np.ndarray:
    try:
        v = np.asarray(d[key], dtype=np.float64)
    except KeyError:
        raise ConfigError(f"missing key {key!r}") from None
    except (TypeError, ValueError):
        raise ConfigError(f"{key!r} must be a list of numbers") from None
    if v.shape != (n,):
        raise ConfigError(f"{key!r} must have {n} entries")
    return v


def _num(d: dict, key: str, default=None) -> float:
    if key not in d:
        if default is None:
            raise ConfigError(f"missing key {key!r}")
        return default
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{key!r} must be a number")
    return float(v)


def pose_from_dict(d: dict) -> RigidTransform:
    if "eye" in d:
        up = _vec(d, "up") if "up" in d else (0.0, 1.0, 0.0)
        return look_at(_vec(d, "eye"), _vec(d, "target"), up)
    R = np.asarray(d.get("rotation", np.eye(3)), dtype=np.float64)
    if R.shape != (3, 3):
        raise ConfigError("pose rotation must be 3x3")
    return RigidTransform(R, _vec(d, "translation"))


def pose_to_dict(T: RigidTransform) -> dict:
    return {"rotation": T.rotation.tolist(), "translation": T.translation.tolist()}


def primitive_from_dict(d: dict):
    kind = d.get("type")
    albedo = _num(d, "albedo", 0.8)
    if kind == "plane":
        return Plane(_vec(d, "point"), _vec(d, "normal"), albedo)
    if kind == "sphere":
        return Sphere(_vec(d, "center"), _num(d, "radius"), albedo)
    if kind == "box":
        R = np.asarray(d.get("rotation", np.eye(3)), dtype=np.float64)
        return Box(_vec(d, "center"), _vec(d, "half_extents"), R, albedo)
    raise ConfigError(f"unknown primitive type {kind!r}")


def primitive_to_dict(p) -> dict:
    if isinstance(p, Plane):
        return {"type": "plane", "point": p.point.tolist(), "normal": p.normal.tolist(), "albedo": p.albedo}
    if isinstance(p, Sphere):
        return {"type": "sphere", "center": p.center.tolist(), "radius": p.radius, "albedo": p.albedo}
    return {
        "type": "box",
        "center": p.center.tolist(),
        "half_extents": p.half_extents.tolist(),
        "rotation": p.rotation.tolist(),
        "albedo": p.albedo,
    }


def scene_from_dict(d: dict) -> Scene:
    prims = tuple(primitive_from_dict(p) for p in d.get("primitives", []))
    kw = {}
    if "light_direction" in d:
        kw["light_direction"] = _vec(d, "light_direction")
    if "ambient" in d:
        kw["ambient"] = _num(d, "ambient")
    return Scene(prims, **kw)


def scene_to_dict(s: Scene) -> dict:
    return {
        "primitives": [primitive_to_dict(p) for p in s.primitives],
        "light_direction": s.light_direction.tolist(),
        "ambient": s.ambient,
    }


def trajectory_from_dict(d: dict) -> TrajectorySpec:
    kind = d.get("type")
    if kind == "static":
        motion = Static(pose_from_dict(d["pose"]))
    elif kind == "orbit":
        motion = Orbit(_vec(d, "center"), _num(d, "radius"), _num(d, "angular_rate"), _num(d, "height", 0.0))
    elif kind == "waypoints":
        pts = d.get("points") or []
        motion = Waypoints(tuple(_num(p, "time") for p in pts), tuple(pose_from_dict(p["pose"]) for p in pts))
    else:
        raise ConfigError(f"unknown trajectory type {kind!r}")
    return TrajectorySpec(motion, _num(d, "duration"), _num(d, "pose_rate", 30.0))


def trajectory_to_dict(t: TrajectorySpec) -> dict:
    m = t.motion
    if isinstance(m, Static):
        out = {"type": "static", "pose": pose_to_dict(m.pose)}
    elif isinstance(m, Orbit):
        out = {
            "type": "orbit",
            "center": m.center.tolist(),
            "radius": m.radius,
            "angular_rate": m.angular_rate,
            "height": m.height,
        }
    else:
        out = {"type": "waypoints", "points": [{"time": ti, "pose": pose_to_dict(p)} for ti, p in zip(m.times, m.poses)]}
    out.update(duration=t.duration, pose_rate=t.pose_rate)
    return out


@dataclass(frozen=True)
class RigOptions:
    vlc_fps: float = 30.0
    ahat_fps: float = 45.0
    long_throw_fps: float = 5.0
    accel_rate: float = 1000.0
    gyro_rate: float = 1000.0
    mag_rate: float = 50.0
    sensors: tuple | None = None  # names of SensorType members to record; None = all

    def build(self) -> RigCalibration:
        rig = make_default_rig(
            self.vlc_fps, self.ahat_fps, self.long_throw_fps, self.accel_rate, self.gyro_rate, self.mag_rate
        )
        if self.sensors is None:
            return rig
        return rig.subset(SensorType[s] for s in self.sensors)


@dataclass(frozen=True, eq=False)
class SimulationConfig:
    scene: Scene
    trajectory: TrajectorySpec
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    rig: RigOptions = field(default_factory=RigOptions)
    gaze_target: int | None = None

    @classmethod
    def from_dict(cls, d: dict) -> SimulationConfig:
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(d) - {"scene", "trajectory", "noise", "rig", "gaze_target"}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            noise = NoiseSpec(**d.get("noise", {}))
            rig_d = dict(d.get("rig", {}))
            if "sensors" in rig_d:
                names = tuple(rig_d["sensors"])
                bad = [n for n in names if n not in SensorType.__members__]
                if bad:
                    raise ConfigError(f"unknown sensors {bad}")
                rig_d["sensors"] = names
            rig = RigOptions(**rig_d)
            target = d.get("gaze_target")
            return cls(
                scene_from_dict(d["scene"]),
                trajectory_from_dict(d["trajectory"]),
                noise,
                rig,
                None if target is None else int(target),
            )
        except KeyError as e:
            raise ConfigError(f"missing key {e}") from None
        except ConfigError:
            raise
        except (TypeError, ValueError) as e:
            raise ConfigError(str(e)) from None

    def to_dict(self) -> dict:
        rig = asdict(self.rig)
        if rig["sensors"] is None:
            del rig["sensors"]
        else:
            rig["sensors"] = list(rig["sensors"])
        return {
            "scene": scene_to_dict(self.scene),
            "trajectory": trajectory_to_dict(self.trajectory),
            "noise": asdict(self.noise),
            "rig": rig,
            "gaze_target": self.gaze_target,
        }


def load_config(path) -> SimulationConfig:
    with open(path, encoding="utf-8") as fh:
        try:
            d = json.load(fh)
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}: {e}") from None
    return SimulationConfig.from_dict(d)


def dump_config(cfg: SimulationConfig, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(cfg.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def example_config() -> SimulationConfig:
    """A small room with a sphere and a box, orbited at desk scale."""
    scene = Scene(
        (
            Plane([0.0, 0.0, 0.0], [0.0, 1.0, 0.0], 0.6),
            Plane([0.0, 0.0, -4.0], [0.0, 0.0, 1.0], 0.7),
            Sphere([0.0, 1.0, 0.0], 0.5, 0.9),
            Box([1.2, 0.3, -1.0], [0.3, 0.3, 0.3], albedo=0.5),
        )
    )
    traj = TrajectorySpec(Orbit([0.0, 1.0, 0.0], 1.5, 0.3, 0.2), duration=5.0, pose_rate=30.0)
    return SimulationConfig(scene, traj, NoiseSpec(), RigOptions(), gaze_target=2)
