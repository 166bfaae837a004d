"""Sensor inventory and rig calibration.

Every sensor stores ``rig_from_sensor``: the rigid transform taking points in
the sensor frame into rig coordinates. The rig frame coincides with the
left-front grayscale camera, so that entry is the identity.
"""

from __future__ import annotations

import configparser
import enum
import io
from dataclasses import dataclass, field

import numpy as np

from rmkit.errors import UnknownSensor
from rmkit.geometry.camera import BrownConrady, CameraModel
from rmkit.geometry.transforms import RigidTransform


class SensorType(enum.IntEnum):
    LEFT_FRONT = 0
    LEFT_LEFT = 1
    RIGHT_FRONT = 2
    RIGHT_RIGHT = 3
    DEPTH_AHAT = 4
    DEPTH_LONG_THROW = 5
    IMU_ACCEL = 6
    IMU_GYRO = 7
    IMU_MAG = 8

    @property
    def is_camera(self) -> bool:
        return self < SensorType.IMU_ACCEL

    @property
    def is_imu(self) -> bool:
        return self >= SensorType.IMU_ACCEL

    @property
    def is_vlc(self) -> bool:
        return self <= SensorType.RIGHT_RIGHT

    @property
    def is_depth(self) -> bool:
        return self in (SensorType.DEPTH_AHAT, SensorType.DEPTH_LONG_THROW)


IDENTITY_TOL = 1e-12


@dataclass(frozen=True)
class SensorDescriptor:
    sensor_type: SensorType
    friendly_name: str
    nominal_fps: float
    rig_from_sensor: RigidTransform
    camera: CameraModel | None = None

    def __post_init__(self):
        object.__setattr__(self, "sensor_type", SensorType(self.sensor_type))
        if self.sensor_type.is_camera and self.camera is None:
            raise ValueError(f"{self.sensor_type.name} is a camera sensor and needs a camera model")
        if self.sensor_type.is_imu and self.camera is not None:
            raise ValueError(f"{self.sensor_type.name} is an IMU sensor and cannot carry a camera model")
        if not self.nominal_fps > 0:
            raise ValueError("nominal_fps must be positive")


@dataclass(frozen=True)
class RigCalibration:
    sensors: dict[SensorType, SensorDescriptor] = field(default_factory=dict)

    def __post_init__(self):
        for key, desc in self.sensors.items():
            if SensorType(key) != desc.sensor_type:
                raise ValueError(f"descriptor for {desc.sensor_type.name} filed under {key!r}")
        lf = self.sensors.get(SensorType.LEFT_FRONT)
        if lf is not None and not lf.rig_from_sensor.allclose(RigidTransform.identity(), IDENTITY_TOL):
            raise ValueError("LEFT_FRONT defines the rig frame; its extrinsics must be the identity")

    @classmethod
    def from_descriptors(cls, descriptors) -> RigCalibration:
        sensors: dict[SensorType, SensorDescriptor] = {}
        for d in descriptors:
            if d.sensor_type in sensors:
                raise ValueError(f"duplicate sensor {d.sensor_type.name}")
            sensors[d.sensor_type] = d
        return cls(dict(sorted(sensors.items())))

    def __contains__(self, s) -> bool:
        return SensorType(s) in self.sensors

    def __getitem__(self, s) -> SensorDescriptor:
        try:
            return self.sensors[SensorType(s)]
        except (KeyError, ValueError):
            raise UnknownSensor(f"sensor {s!r} not present in calibration") from None

    def __iter__(self):
        return iter(self.sensors.values())

    def __len__(self) -> int:
        return len(self.sensors)

    def camera(self, s) -> CameraModel:
        cam = self[s].camera
        if cam is None:
            raise UnknownSensor(f"sensor {SensorType(s).name} has no camera model")
        return cam

    def subset(self, sensor_types) -> RigCalibration:
        return RigCalibration.from_descriptors(self[s] for s in sensor_types)

    # -- text form ------------------------------------------------------------

    def to_text(self) -> str:
        return calibration_to_text(self)

    @classmethod
    def from_text(cls, text: str, cameras: dict | None = None) -> RigCalibration:
        return calibration_from_text(text, cameras)


def rig_from_sensor(calib: RigCalibration, s) -> RigidTransform:
    return calib[s].rig_from_sensor


def _fmt(values) -> str:
    return " ".join(repr(float(v)) for v in np.ravel(values))


def _floats(s: str) -> list[float]:
    return [float(tok) for tok in s.split()]


CALIBRATION_FORMAT = "rmrc-calibration 1"


def calibration_to_text(calib: RigCalibration) -> str:
    """Serialize to the INI-style key/value document embedded in containers.

    Camera sections record the image size and, when present, the parametric
    generator. The lookup table itself travels in the stream descriptor.
    """
    cp = configparser.ConfigParser(interpolation=None)
    cp["calibration"] = {"format": CALIBRATION_FORMAT, "sensor_count": str(len(calib))}
    for d in calib:
        sec = {
            "friendly_name": d.friendly_name,
            "nominal_fps": repr(float(d.nominal_fps)),
            "rotation": _fmt(d.rig_from_sensor.rotation),
            "translation": _fmt(d.rig_from_sensor.translation),
        }
        if d.camera is not None:
            sec["camera_size"] = f"{d.camera.width} {d.camera.height}"
            if d.camera.params is not None:
                sec["camera_model"] = "brown_conrady " + _fmt(d.camera.params.as_tuple())
            else:
                sec["camera_model"] = "lut"
        cp[f"sensor {d.sensor_type.name}"] = sec
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()


def calibration_from_text(text: str, cameras: dict | None = None) -> RigCalibration:
    """Parse :func:`calibration_to_text` output.

    ``cameras`` optionally maps SensorType to a CameraModel (for example the
    tables carried by container stream descriptors); those take precedence
    over regenerating from parametric parameters.
    """
    cameras = cameras or {}
    cp = configparser.ConfigParser(interpolation=None)
    cp.read_string(text)
    if cp.get("calibration", "format", fallback=None) != CALIBRATION_FORMAT:
        raise ValueError("not an rmrc calibration document")
    descriptors = []
    for name in cp.sections():
        if not name.startswith("sensor "):
            continue
        st = SensorType[name.split(" ", 1)[1]]
        sec = cp[name]
        T = RigidTransform(np.reshape(_floats(sec["rotation"]), (3, 3)), _floats(sec["translation"]))
        cam = None
        if "camera_size" in sec:
            w, h = (int(x) for x in sec["camera_size"].split())
            model = sec["camera_model"].split()
            if st in cameras:
                cam = cameras[st]
                if (cam.width, cam.height) != (w, h):
                    raise ValueError(f"camera table for {st.name} does not match {w}x{h}")
            elif model[0] == "brown_conrady":
                cam = CameraModel.from_parametric(w, h, BrownConrady(*map(float, model[1:])))
            else:
                raise ValueError(f"{st.name}: table-only camera model without a table")
        descriptors.append(SensorDescriptor(st, sec["friendly_name"], float(sec["nominal_fps"]), T, cam))
    calib = RigCalibration.from_descriptors(descriptors)
    if len(calib) != cp.getint("calibration", "sensor_count"):
        raise ValueError("sensor_count does not match sections")
    return calib
