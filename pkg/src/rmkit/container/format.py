"""Byte layout of ``.rmrc`` recording containers (see FORMAT.md).

All integers and floats are little-endian.
"""

from __future__ import annotations

import enum
import math
import struct
from dataclasses import dataclass, field

import numpy as np

from rmkit.errors import CorruptContainer, PayloadSizeMismatch
from rmkit.frames import (
    HAND_JOINT_COUNT,
    AbFrame,
    DepthFrame,
    DepthMode,
    DepthPacket,
    GazeSample,
    HandSample,
    ImuBatch,
    ImuKind,
    SigmaBuffer,
    VlcFrame,
)
from rmkit.geometry.calibration import SensorType
from rmkit.geometry.camera import BrownConrady, CameraModel
from rmkit.geometry.transforms import RigidTransform

MAGIC = b"RMRC"
INDEX_MAGIC = b"RMIX"
VERSION_MAJOR = 1
VERSION_MINOR = 0

HEADER_PREFIX = struct.Struct("<4sHHI")  # magic, major, minor, calibration length
STREAM_COUNT = struct.Struct("<H")
DESCRIPTOR = struct.Struct("<HHBBHIId12dI")
RECORD_HEADER = struct.Struct("<HHIQff")  # stream id, reserved, payload len, ticks, exposure, gain
INDEX_PREFIX = struct.Struct("<4sH")
INDEX_STREAM = struct.Struct("<HI")
INDEX_ENTRY = np.dtype([("timestamp", "<u8"), ("offset", "<u8")])
TRAILER = struct.Struct("<QI")  # index offset, CRC-32 of every preceding byte
CAMERA_PREFIX = struct.Struct("<IIB7x")
CAMERA_PARAMS = struct.Struct("<9d")

IMU_BATCH_PREFIX = struct.Struct("<If")
IMU_SAMPLE = np.dtype([("timestamp", "<u8"), ("value", "<f8", (3,))])
IMU_MAX_BATCH = 64
POSE_RECORD = struct.Struct("<12d")
HAND_PREFIX = struct.Struct("<B7x")
RAY_RECORD = struct.Struct("<6d")


class StreamKind(enum.IntEnum):
    LEFT_FRONT = 0
    LEFT_LEFT = 1
    RIGHT_FRONT = 2
    RIGHT_RIGHT = 3
    DEPTH_AHAT = 4
    DEPTH_LONG_THROW = 5
    IMU_ACCEL = 6
    IMU_GYRO = 7
    IMU_MAG = 8
    HEAD_POSE = 16
    HAND_POSE = 17
    GAZE_RAY = 18
    RESERVED = 255

    @property
    def sensor_type(self) -> SensorType | None:
        return SensorType(int(self)) if self <= 8 else None

    @classmethod
    def of(cls, s: SensorType) -> StreamKind:
        return cls(int(s))


class PixelFormat(enum.IntEnum):
    U8 = 0
    U16 = 1
    POSE_RECORD = 2
    VEC3_BATCH = 3
    RAY_RECORD = 4


_EXPECTED_FORMAT = {
    StreamKind.LEFT_FRONT: PixelFormat.U8,
    StreamKind.LEFT_LEFT: PixelFormat.U8,
    StreamKind.RIGHT_FRONT: PixelFormat.U8,
    StreamKind.RIGHT_RIGHT: PixelFormat.U8,
    StreamKind.DEPTH_AHAT: PixelFormat.U16,
    StreamKind.DEPTH_LONG_THROW: PixelFormat.U16,
    StreamKind.IMU_ACCEL: PixelFormat.VEC3_BATCH,
    StreamKind.IMU_GYRO: PixelFormat.VEC3_BATCH,
    StreamKind.IMU_MAG: PixelFormat.VEC3_BATCH,
    StreamKind.HEAD_POSE: PixelFormat.POSE_RECORD,
    StreamKind.HAND_POSE: PixelFormat.POSE_RECORD,
    StreamKind.GAZE_RAY: PixelFormat.RAY_RECORD,
}

# (height, width) fixed by the sensor for image streams
_FIXED_SHAPE = {
    StreamKind.LEFT_FRONT: (480, 640),
    StreamKind.LEFT_LEFT: (480, 640),
    StreamKind.RIGHT_FRONT: (480, 640),
    StreamKind.RIGHT_RIGHT: (480, 640),
    StreamKind.DEPTH_AHAT: DepthMode.AHAT.shape,
    StreamKind.DEPTH_LONG_THROW: DepthMode.LONG_THROW.shape,
}

_IMU_KIND = {
    StreamKind.IMU_ACCEL: ImuKind.ACCEL,
    StreamKind.IMU_GYRO: ImuKind.GYRO,
    StreamKind.IMU_MAG: ImuKind.MAG,
}


@dataclass(frozen=True, eq=False)
class StreamDescriptor:
    stream_id: int
    kind: StreamKind
    width: int = 0
    height: int = 0
    pixel_format: PixelFormat | None = None
    nominal_fps: float = 0.0
    extrinsics: RigidTransform = field(default_factory=RigidTransform.identity)
    camera: CameraModel | None = None
    joint_count: int = 0

    def __post_init__(self):
        kind = StreamKind(self.kind)
        object.__setattr__(self, "kind", kind)
        fmt = self.pixel_format
        if fmt is None:
            fmt = _EXPECTED_FORMAT.get(kind, PixelFormat.U8)
        object.__setattr__(self, "pixel_format", PixelFormat(fmt))
        if kind is StreamKind.HAND_POSE and self.joint_count == 0:
            object.__setattr__(self, "joint_count", HAND_JOINT_COUNT)
        if kind in _FIXED_SHAPE and self.width == 0 and self.height == 0:
            h, w = _FIXED_SHAPE[kind]
            object.__setattr__(self, "width", w)
            object.__setattr__(self, "height", h)
        self.check()

    def check(self) -> None:
        """Raise ValueError for descriptors that violate the stream conventions."""
        if not 0 <= self.stream_id <= 0xFFFF:
            raise ValueError("stream_id must fit in 16 bits")
        kind = self.kind
        expected = _EXPECTED_FORMAT.get(kind)
        if expected is not None and self.pixel_format is not expected:
            raise ValueError(f"{kind.name} streams use {expected.name}, not {self.pixel_format.name}")
        if kind in _FIXED_SHAPE:
            if (self.height, self.width) != _FIXED_SHAPE[kind]:
                h, w = _FIXED_SHAPE[kind]
                raise ValueError(f"{kind.name} frames are {w}x{h}, got {self.width}x{self.height}")
            if self.camera is None:
                raise ValueError(f"image stream {self.stream_id} ({kind.name}) needs a camera model")
            if (self.camera.width, self.camera.height) != (self.width, self.height):
                raise ValueError("camera model size does not match stream size")
        elif kind is not StreamKind.RESERVED and (self.width or self.height):
            raise ValueError(f"{kind.name} streams have no image dimensions")
        if kind is not StreamKind.HAND_POSE and self.joint_count:
            raise ValueError("joint_count only applies to hand streams")
        if self.nominal_fps < 0 or not math.isfinite(self.nominal_fps):
            raise ValueError("nominal_fps must be finite and non-negative")

    @property
    def sensor_type(self) -> SensorType | None:
        return self.kind.sensor_type

    @property
    def is_image(self) -> bool:
        return self.kind in _FIXED_SHAPE

    def payload_size_ok(self, n: int) -> bool:
        kind, px = self.kind, self.width * self.height
        if kind is StreamKind.DEPTH_LONG_THROW:
            return n == 5 * px
        if kind is StreamKind.DEPTH_AHAT:
            return n == 4 * px
        if self.pixel_format is PixelFormat.VEC3_BATCH:
            k, r = divmod(n - IMU_BATCH_PREFIX.size, IMU_SAMPLE.itemsize)
            return r == 0 and 1 <= k <= IMU_MAX_BATCH
        if kind is StreamKind.HEAD_POSE:
            return n == POSE_RECORD.size
        if kind is StreamKind.HAND_POSE:
            return n == HAND_PREFIX.size + self.joint_count * POSE_RECORD.size
        if kind is StreamKind.GAZE_RAY:
            return n == RAY_RECORD.size
        if px == 0:
            return True
        return n == px * (2 if self.pixel_format is PixelFormat.U16 else 1)


@dataclass(frozen=True, eq=False)
class FrameRecord:
    stream_id: int
    timestamp: int
    payload: bytes
    exposure: float = 0.0
    gain: float = 0.0

    @property
    def payload_len(self) -> int:
        return len(self.payload)


# -- header pieces ------------------------------------------------------------


def encode_camera(cam: CameraModel | None) -> bytes:
    if cam is None:
        return b""
    parts = [CAMERA_PREFIX.pack(cam.width, cam.height, 0 if cam.params is None else 1)]
    if cam.params is not None:
        parts.append(CAMERA_PARAMS.pack(*cam.params.as_tuple()))
    parts.append(np.ascontiguousarray(cam.lut, dtype="<f4").tobytes())
    return b"".join(parts)


def decode_camera(blob: bytes) -> CameraModel | None:
    if not blob:
        return None
    w, h, model = CAMERA_PREFIX.unpack_from(blob, 0)
    pos = CAMERA_PREFIX.size
    params = None
    if model == 1:
        params = BrownConrady(*CAMERA_PARAMS.unpack_from(blob, pos))
        pos += CAMERA_PARAMS.size
    elif model != 0:
        raise CorruptContainer(f"unknown camera model code {model}")
    lut_bytes = blob[pos:]
    if len(lut_bytes) != w * h * 8:
        raise CorruptContainer("camera table length does not match its dimensions")
    lut = np.frombuffer(lut_bytes, dtype="<f4").reshape(h, w, 2)
    return CameraModel(w, h, lut, params)


def encode_descriptor(d: StreamDescriptor) -> bytes:
    blob = encode_camera(d.camera)
    head = DESCRIPTOR.pack(
        d.stream_id,
        int(d.kind),
        int(d.pixel_format),
        0,
        d.joint_count,
        d.width,
        d.height,
        float(d.nominal_fps),
        *d.extrinsics.matrix34.ravel(),
        len(blob),
    )
    return head + blob


def decode_descriptor(buf, pos: int) -> tuple[StreamDescriptor, int]:
    fields = DESCRIPTOR.unpack_from(buf, pos)
    sid, kind, fmt, _, joints, w, h, fps = fields[:8]
    M = np.array(fields[8:20]).reshape(3, 4)
    blob_len = fields[20]
    pos += DESCRIPTOR.size
    if pos + blob_len > len(buf):
        raise CorruptContainer("camera blob runs past the header")
    cam = decode_camera(bytes(buf[pos : pos + blob_len]))
    try:
        d = StreamDescriptor(sid, StreamKind(kind), w, h, PixelFormat(fmt), fps, RigidTransform.from_matrix(M), cam, joints)
    except ValueError as e:
        raise CorruptContainer(f"invalid stream descriptor {sid}: {e}") from e
    return d, pos + blob_len


# -- payload codecs -----------------------------------------------------------


def _u16(a) -> bytes:
    return np.ascontiguousarray(a, dtype="<u2").tobytes()


def encode_payload(desc: StreamDescriptor, obj) -> bytes:
    """Serialize a frame object for ``desc``'s stream."""
    kind = desc.kind
    if kind in (StreamKind.DEPTH_AHAT, StreamKind.DEPTH_LONG_THROW):
        parts = [_u16(obj.depth.depth)]
        if obj.sigma is not None:
            parts.append(np.ascontiguousarray(obj.sigma.data, dtype=np.uint8).tobytes())
        parts.append(_u16(obj.ab.data))
        out = b"".join(parts)
    elif desc.is_image:
        out = np.ascontiguousarray(obj.image, dtype=np.uint8).tobytes()
    elif desc.pixel_format is PixelFormat.VEC3_BATCH:
        temp = math.nan if obj.temperature is None else obj.temperature
        samples = np.empty(len(obj), dtype=IMU_SAMPLE)
        samples["timestamp"] = obj.timestamps
        samples["value"] = obj.values
        out = IMU_BATCH_PREFIX.pack(len(obj), temp) + samples.tobytes()
    elif kind is StreamKind.HEAD_POSE:
        out = POSE_RECORD.pack(*obj.matrix34.ravel())
    elif kind is StreamKind.HAND_POSE:
        out = HAND_PREFIX.pack(int(obj.handedness)) + b"".join(POSE_RECORD.pack(*j.matrix34.ravel()) for j in obj.joints)
    elif kind is StreamKind.GAZE_RAY:
        out = RAY_RECORD.pack(*obj.origin, *obj.direction)
    else:
        out = bytes(obj)
    if not desc.payload_size_ok(len(out)):
        raise PayloadSizeMismatch(f"stream {desc.stream_id}: encoded {len(out)} bytes")
    return out


def record_timestamp(obj) -> int:
    if isinstance(obj, DepthPacket):
        return obj.depth.timestamp
    if isinstance(obj, ImuBatch):
        return int(obj.timestamps[0])
    return int(obj.timestamp)


def decode_payload(desc: StreamDescriptor, rec: FrameRecord):
    """Decode a record payload into its frame type. Raises CorruptContainer on size errors."""
    kind, p = desc.kind, rec.payload
    if not desc.payload_size_ok(len(p)):
        raise CorruptContainer(f"stream {desc.stream_id}: payload of {len(p)} bytes")
    if kind in (StreamKind.DEPTH_AHAT, StreamKind.DEPTH_LONG_THROW):
        mode = DepthMode.AHAT if kind is StreamKind.DEPTH_AHAT else DepthMode.LONG_THROW
        shape = mode.shape
        n = shape[0] * shape[1]
        depth = np.frombuffer(p, dtype="<u2", count=n).reshape(shape).astype(np.uint16)
        pos = 2 * n
        sigma = None
        if mode is DepthMode.LONG_THROW:
            sigma = SigmaBuffer(np.frombuffer(p, dtype=np.uint8, count=n, offset=pos).reshape(shape))
            pos += n
        ab = np.frombuffer(p, dtype="<u2", count=n, offset=pos).reshape(shape).astype(np.uint16)
        frame = DepthFrame(mode, depth, rec.timestamp, rec.exposure, rec.gain)
        frame.check_values()
        return DepthPacket(frame, AbFrame(mode, ab, rec.timestamp), sigma)
    if desc.is_image:
        img = np.frombuffer(p, dtype=np.uint8).reshape(desc.height, desc.width)
        return VlcFrame(img, rec.timestamp, rec.exposure, rec.gain)
    if desc.pixel_format is PixelFormat.VEC3_BATCH:
        count, temp = IMU_BATCH_PREFIX.unpack_from(p, 0)
        samples = np.frombuffer(p, dtype=IMU_SAMPLE, offset=IMU_BATCH_PREFIX.size)
        if count != len(samples):
            raise CorruptContainer("IMU batch count disagrees with payload length")
        imu_kind = _IMU_KIND.get(kind, ImuKind.ACCEL)
        temperature = None if imu_kind is ImuKind.MAG else float(temp)
        return ImuBatch(imu_kind, samples["timestamp"], samples["value"], temperature)
    if kind is StreamKind.HEAD_POSE:
        return RigidTransform.from_matrix(np.array(POSE_RECORD.unpack(p)).reshape(3, 4))
    if kind is StreamKind.HAND_POSE:
        (hand,) = HAND_PREFIX.unpack_from(p, 0)
        vals = np.frombuffer(p, dtype="<f8", offset=HAND_PREFIX.size).reshape(-1, 3, 4)
        return HandSample(rec.timestamp, tuple(RigidTransform.from_matrix(m) for m in vals), hand)
    if kind is StreamKind.GAZE_RAY:
        v = RAY_RECORD.unpack(p)
        return GazeSample(rec.timestamp, v[:3], v[3:])
    return p


def depth_mode_of(kind: StreamKind) -> DepthMode | None:
    return {StreamKind.DEPTH_AHAT: DepthMode.AHAT, StreamKind.DEPTH_LONG_THROW: DepthMode.LONG_THROW}.get(kind)
