from rmkit.simulator.config import ConfigError, SimulationConfig, dump_config, example_config, load_config
from rmkit.simulator.imu import GRAVITY, MAG_FIELD, synth_imu
from rmkit.simulator.interaction import synth_interaction
from rmkit.simulator.motion import Orbit, Static, TrajectorySpec, Waypoints
from rmkit.simulator.render import AB_CONSTANT, NoiseSpec, render_depth, render_vlc
from rmkit.simulator.rig import make_default_rig
from rmkit.simulator.scene import Box, Hit, Plane, Scene, Sphere, cast_ray
from rmkit.simulator.simulate import SimulationResult, load_ground_truth, simulate, simulate_config

__all__ = [
    "AB_CONSTANT",
    "Box",
    "ConfigError",
    "GRAVITY",
    "Hit",
    "MAG_FIELD",
    "NoiseSpec",
    "Orbit",
    "Plane",
    "Scene",
    "SimulationConfig",
    "SimulationResult",
    "Sphere",
    "Static",
    "TrajectorySpec",
    "Waypoints",
    "cast_ray",
    "dump_config",
    "example_config",
    "load_config",
    "load_ground_truth",
    "make_default_rig",
    "render_depth",
    "render_vlc",
    "simulate",
    "simulate_config",
    "synth_imu",
    "synth_interaction",
]
