from __future__ import annotations

import json

import numpy as np
import pytest

from rmkit.geometry.transforms import RigidTransform, look_at
from rmkit.simulator.config import (
    ConfigError,
    RigOptions,
    SimulationConfig,
    dump_config,
    example_config,
    load_config,
)
from rmkit.simulator.motion import Static, TrajectorySpec, Waypoints
from rmkit.simulator.scene import Box, Scene, Sphere


def test_example_round_trip(tmp_path):
    cfg = example_config()
    p = tmp_path / "c.json"
    dump_config(cfg, p)
    back = load_config(p)
    assert back.to_dict() == cfg.to_dict()
    dump_config(back, tmp_path / "d.json")
    assert (tmp_path / "d.json").read_bytes() == p.read_bytes()


def test_waypoints_and_subset_round_trip():
    pose = look_at([0, 1, 0], [1, 1, 2])
    traj = TrajectorySpec(Waypoints((0.0, 0.5), (pose, RigidTransform.from_translation([0.1, 0.2, 0.3]))), 0.5, 15.0)
    scene = Scene([Box([0, 0, 2], [0.1, 0.2, 0.3]), Sphere([1, 1, 1], 0.25, 0.3)], ambient=0.1)
    cfg = SimulationConfig(scene, traj, rig=RigOptions(long_throw_fps=1.0, sensors=("DEPTH_AHAT",)))
    back = SimulationConfig.from_dict(json.loads(json.dumps(cfg.to_dict())))
    assert back.to_dict() == cfg.to_dict()
    assert [s.sensor_type for s in back.rig.build()] == [s.sensor_type for s in cfg.rig.build()]


def test_look_at_pose_form():
    d = example_config().to_dict()
    d["trajectory"] = {"type": "static", "duration": 1.0, "pose": {"eye": [0, 1.6, 0], "target": [0, 1, 2]}}
    cfg = SimulationConfig.from_dict(d)
    assert isinstance(cfg.trajectory.motion, Static)
    want = look_at([0, 1.6, 0], [0, 1, 2])
    assert np.allclose(cfg.trajectory.motion.pose.matrix, want.matrix)


@pytest.mark.parametrize(
    "patch",
    [
        {"bogus": 1},
        {"scene": {"primitives": [{"type": "torus"}]}},
        {"scene": {"primitives": [{"type": "sphere", "center": [0, 0], "radius": 1}]}},
        {"scene": {"primitives": [{"type": "sphere", "center": [0, 0, 0], "radius": -1}]}},
        {"scene": {"primitives": [{"type": "sphere", "center": [0, 0, 0], "radius": "big"}]}},
        {"trajectory": {"type": "orbit", "center": [0, 0, 0], "radius": 1, "angular_rate": 1}},
        {"trajectory": {"type": "static", "duration": -1, "pose": {"translation": [0, 0, 0]}}},
        {"noise": {"p_invalid": 2.0}},
        {"noise": {"sigma": 1.0}},
        {"rig": {"sensors": ["NOSE_CAM"]}},
    ],
)
def test_invalid_configs(patch):
    d = example_config().to_dict()
    d.update(patch)
    with pytest.raises(ConfigError):
        SimulationConfig.from_dict(d)


def test_not_json(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{nope")
    with pytest.raises(ConfigError):
        load_config(p)
    with pytest.raises(ConfigError):
        SimulationConfig.from_dict([1, 2])
