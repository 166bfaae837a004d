from rmkit.geometry.calibration import (
    RigCalibration,
    SensorDescriptor,
    SensorType,
    calibration_from_text,
    calibration_to_text,
    rig_from_sensor,
)
from rmkit.geometry.camera import (
    BrownConrady,
    CameraModel,
    map_camera_space_to_image_point,
    map_image_point_to_unit_plane,
)
from rmkit.geometry.trajectory import (
    TICKS_PER_SECOND,
    PoseTrajectory,
    locate_rig_at,
    seconds_to_ticks,
    ticks_to_seconds,
)
from rmkit.geometry.transforms import (
    RigidTransform,
    compose,
    invert,
    look_at,
    matrix_to_quat,
    quat_to_matrix,
    rot_x,
    rot_y,
    rot_z,
    slerp,
)

__all__ = [
    "BrownConrady",
    "CameraModel",
    "PoseTrajectory",
    "RigCalibration",
    "RigidTransform",
    "SensorDescriptor",
    "SensorType",
    "TICKS_PER_SECOND",
    "calibration_from_text",
    "calibration_to_text",
    "compose",
    "invert",
    "locate_rig_at",
    "look_at",
    "map_camera_space_to_image_point",
    "map_image_point_to_unit_plane",
    "matrix_to_quat",
    "quat_to_matrix",
    "rig_from_sensor",
    "rot_x",
    "rot_y",
    "rot_z",
    "seconds_to_ticks",
    "slerp",
    "ticks_to_seconds",
]
