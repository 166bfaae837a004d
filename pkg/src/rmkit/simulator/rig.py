"""Default simulated rig.

Layout mimics the headset qualitatively: two front-facing grayscale cameras
10 cm apart, two side cameras yawed outward by 45 degrees, and the depth
camera between the front pair, pitched down slightly. Numbers are plausible
placeholders rather than measured values.
"""

from __future__ import annotations

import numpy as np

from rmkit.geometry.calibration import RigCalibration, SensorDescriptor, SensorType
from rmkit.geometry.camera import BrownConrady, CameraModel
from rmkit.geometry.transforms import RigidTransform, rot_x, rot_y

VLC_PARAMS = BrownConrady(fx=360.0, fy=360.0, cx=320.0, cy=240.0, k1=-0.02, k2=0.004)
LONG_THROW_PARAMS = BrownConrady(fx=210.0, fy=210.0, cx=160.0, cy=144.0, k1=-0.05)
AHAT_PARAMS = BrownConrady(fx=220.0, fy=220.0, cx=256.0, cy=256.0, k1=-0.01)

DEPTH_EXTRINSICS = RigidTransform(rot_x(np.deg2rad(-3.0)), np.array([0.05, -0.02, 0.0]))


def default_extrinsics() -> dict[SensorType, RigidTransform]:
    ident = RigidTransform.identity()
    return {
        SensorType.LEFT_FRONT: ident,
        SensorType.LEFT_LEFT: RigidTransform(rot_y(np.deg2rad(-45.0)), np.array([-0.02, 0.0, -0.01])),
        SensorType.RIGHT_FRONT: RigidTransform.from_translation([0.10, 0.0, 0.0]),
        SensorType.RIGHT_RIGHT: RigidTransform(rot_y(np.deg2rad(45.0)), np.array([0.12, 0.0, -0.01])),
        SensorType.DEPTH_AHAT: DEPTH_EXTRINSICS,
        SensorType.DEPTH_LONG_THROW: DEPTH_EXTRINSICS,
        SensorType.IMU_ACCEL: ident,
        SensorType.IMU_GYRO: ident,
        SensorType.IMU_MAG: ident,
    }


def make_default_rig(
    vlc_fps: float = 30.0,
    ahat_fps: float = 45.0,
    long_throw_fps: float = 5.0,
    accel_rate: float = 1000.0,
    gyro_rate: float = 1000.0,
    mag_rate: float = 50.0,
) -> RigCalibration:
    ext = default_extrinsics()
    vlc = CameraModel.from_parametric(640, 480, VLC_PARAMS)
    lt = CameraModel.from_parametric(320, 288, LONG_THROW_PARAMS)
    ahat = CameraModel.from_parametric(512, 512, AHAT_PARAMS)
    S = SensorType
    descs = [
        SensorDescriptor(S.LEFT_FRONT, "VLC LF", vlc_fps, ext[S.LEFT_FRONT], vlc),
        SensorDescriptor(S.LEFT_LEFT, "VLC LL", vlc_fps, ext[S.LEFT_LEFT], vlc),
        SensorDescriptor(S.RIGHT_FRONT, "VLC RF", vlc_fps, ext[S.RIGHT_FRONT], vlc),
        SensorDescriptor(S.RIGHT_RIGHT, "VLC RR", vlc_fps, ext[S.RIGHT_RIGHT], vlc),
        SensorDescriptor(S.DEPTH_AHAT, "Short Throw ToF Depth", ahat_fps, ext[S.DEPTH_AHAT], ahat),
        SensorDescriptor(S.DEPTH_LONG_THROW, "Long Throw ToF Depth", long_throw_fps, ext[S.DEPTH_LONG_THROW], lt),
        SensorDescriptor(S.IMU_ACCEL, "Accelerometer", accel_rate, ext[S.IMU_ACCEL]),
        SensorDescriptor(S.IMU_GYRO, "Gyroscope", gyro_rate, ext[S.IMU_GYRO]),
        SensorDescriptor(S.IMU_MAG, "Magnetometer", mag_rate, ext[S.IMU_MAG]),
    ]
    return RigCalibration.from_descriptors(descs)
