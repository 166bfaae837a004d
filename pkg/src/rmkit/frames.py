"""In-memory frame types for every stream, plus depth decoding rules.

Encoding conventions (toolkit conventions, not device firmware claims):

* depth channels hold integer millimeters along the pixel ray (radial range);
* Long Throw depth is trusted only where the sigma byte's MSB (0x80) is clear;
  the low 7 sigma bits are carried through untouched;
* AHAT depth is aliased with a 1 m period: valid values are 0..999 mm and
  0xFFFF marks an invalid pixel. Values 1000..0xFFFE are malformed;
* AB (active brightness) is proportional to returned IR light, arbitrary units.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from rmkit.errors import DimensionMismatch, DomainError, MalformedFrame, ModeMismatch

SIGMA_INVALID_MASK = 0x80
AHAT_INVALID = 0xFFFF
AHAT_MAX_VALID = 999
AHAT_PERIOD_M = 1.0
LONG_THROW_MAX_MM = 7500

VLC_SHAPE = (480, 640)  # rows, cols


class DepthMode(enum.Enum):
    LONG_THROW = "long_throw"
    AHAT = "ahat"

    @property
    def shape(self) -> tuple[int, int]:
        """(height, width)."""
        return (288, 320) if self is DepthMode.LONG_THROW else (512, 512)


class ImuKind(enum.Enum):
    ACCEL = "accel"
    GYRO = "gyro"
    MAG = "mag"


def _buffer(data, dtype, shape) -> np.ndarray:
    arr = np.asarray(data)
    if arr.dtype != dtype:
        raise TypeError(f"expected {np.dtype(dtype).name} buffer, got {arr.dtype.name}")
    if arr.shape != shape:
        raise DimensionMismatch(f"buffer shape {arr.shape} != {shape}")
    view = np.ascontiguousarray(arr).view()
    view.setflags(write=False)
    return view


@dataclass(frozen=True, eq=False)
class DepthFrame:
    mode: DepthMode
    depth: np.ndarray
    timestamp: int = 0
    exposure: float = 0.0
    gain: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "mode", DepthMode(self.mode))
        object.__setattr__(self, "depth", _buffer(self.depth, np.uint16, self.mode.shape))

    @property
    def width(self) -> int:
        return self.depth.shape[1]

    @property
    def height(self) -> int:
        return self.depth.shape[0]

    def check_values(self) -> None:
        """Raise MalformedFrame if the buffer violates its mode's encoding."""
        d = self.depth
        if self.mode is DepthMode.AHAT:
            bad = (d > AHAT_MAX_VALID) & (d != AHAT_INVALID)
            if bad.any():
                raise MalformedFrame(f"{int(bad.sum())} AHAT pixels in the reserved range 1000..0xFFFE")
        elif (d > LONG_THROW_MAX_MM).any():
            raise MalformedFrame(f"Long Throw depth exceeds {LONG_THROW_MAX_MM} mm")


@dataclass(frozen=True, eq=False)
class SigmaBuffer:
    data: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "data", _buffer(self.data, np.uint8, DepthMode.LONG_THROW.shape))

    @property
    def invalid(self) -> np.ndarray:
        return (self.data & SIGMA_INVALID_MASK) > 0


@dataclass(frozen=True, eq=False)
class AbFrame:
    mode: DepthMode
    data: np.ndarray
    timestamp: int = 0

    def __post_init__(self):
        object.__setattr__(self, "mode", DepthMode(self.mode))
        object.__setattr__(self, "data", _buffer(self.data, np.uint16, self.mode.shape))


@dataclass(frozen=True, eq=False)
class VlcFrame:
    image: np.ndarray
    timestamp: int = 0
    exposure: float = 0.0
    gain: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "image", _buffer(self.image, np.uint8, VLC_SHAPE))

    width = property(lambda self: VLC_SHAPE[1])
    height = property(lambda self: VLC_SHAPE[0])


@dataclass(frozen=True, eq=False)
class DepthPacket:
    """One depth-sensor record: depth + AB, and sigma for Long Throw."""

    depth: DepthFrame
    ab: AbFrame
    sigma: SigmaBuffer | None = None

    def __post_init__(self):
        if self.ab.mode is not self.depth.mode:
            raise ModeMismatch("AB and depth frames come from different modes")
        if (self.sigma is None) != (self.depth.mode is DepthMode.AHAT):
            raise ModeMismatch("Long Throw packets carry a sigma buffer; AHAT packets do not")


@dataclass(frozen=True, eq=False)
class ImuBatch:
    """Batch of IMU samples. Accel in m/s^2, gyro in rad/s, mag unitless.

    ``temperature`` is in degrees Celsius and is ``None`` for magnetometer batches.
    """

    sensor: ImuKind
    timestamps: np.ndarray
    values: np.ndarray
    temperature: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "sensor", ImuKind(self.sensor))
        ts = np.asarray(self.timestamps, dtype=np.uint64).reshape(-1)
        vals = np.asarray(self.values, dtype=np.float64).reshape(-1, 3)
        if len(ts) != len(vals):
            raise DimensionMismatch("one timestamp per sample required")
        if len(ts) > 1 and not np.all(ts[1:] > ts[:-1]):
            raise ValueError("IMU sample timestamps must be strictly increasing")
        if self.sensor is ImuKind.MAG and self.temperature is not None:
            raise ValueError("magnetometer batches carry no temperature")
        if self.sensor is not ImuKind.MAG and self.temperature is None:
            raise ValueError(f"{self.sensor.value} batches carry a temperature")
        for a in (ts, vals):
            a.setflags(write=False)
        object.__setattr__(self, "timestamps", ts)
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return len(self.timestamps)


# -- decoding ---------------------------------------------------------------


def validate_long_throw(depth: DepthFrame, sigma: SigmaBuffer) -> DepthFrame:
    """Zero every depth pixel whose sigma byte has the 0x80 bit set."""
    if depth.mode is not DepthMode.LONG_THROW:
        raise ModeMismatch("sigma validation applies to Long Throw frames only")
    if depth.depth.shape != sigma.data.shape:
        raise DimensionMismatch(f"depth {depth.depth.shape} vs sigma {sigma.data.shape}")
    out = np.where(sigma.invalid, np.uint16(0), depth.depth).astype(np.uint16)
    return DepthFrame(depth.mode, out, depth.timestamp, depth.exposure, depth.gain)


def long_throw_meters(depth: DepthFrame) -> tuple[np.ndarray, np.ndarray]:
    """Range in meters and validity mask for an already validated Long Throw frame."""
    if depth.mode is not DepthMode.LONG_THROW:
        raise ModeMismatch("expected a Long Throw frame")
    valid = depth.depth > 0
    return np.where(valid, depth.depth / 1000.0, np.nan), valid


def decode_ahat(depth: DepthFrame) -> tuple[np.ndarray, np.ndarray]:
    """Split an AHAT buffer into wrapped range (m, NaN where invalid) and validity."""
    if depth.mode is not DepthMode.AHAT:
        raise ModeMismatch("expected an AHAT frame")
    depth.check_values()
    raw = depth.depth
    valid = raw <= AHAT_MAX_VALID
    return np.where(valid, raw / 1000.0, np.nan), valid


def encode_ahat(wrapped_m, valid) -> np.ndarray:
    """Inverse of :func:`decode_ahat`."""
    w = np.nan_to_num(np.asarray(wrapped_m, dtype=np.float64), nan=0.0)
    return np.where(valid, np.round(1000.0 * w), AHAT_INVALID).astype(np.uint16)


def unwrap_ahat(wrapped_m, hint_m):
    """Resolve the 1 m alias: ``wrapped + k`` for the integer k >= 0 closest to
    ``hint``; exact ties take the smaller k. Accepts scalars or arrays."""
    w = np.asarray(wrapped_m, dtype=np.float64)
    h = np.asarray(hint_m, dtype=np.float64)
    if np.any(~np.isfinite(w)) or np.any((w < 0) | (w >= AHAT_PERIOD_M)):
        raise DomainError("wrapped range must lie in [0, 1)")
    if np.any(~np.isfinite(h)) or np.any(h < 0):
        raise DomainError("hint must be a non-negative range")
    # ceil(x - 1/2) rounds to nearest with halves going down
    k = np.maximum(np.ceil((h - w) / AHAT_PERIOD_M - 0.5), 0.0)
    out = w + k * AHAT_PERIOD_M
    return float(out) if out.ndim == 0 else out


def ab_to_visual(ab: AbFrame, gamma: float = 1.0) -> np.ndarray:
    """Min-max normalize, apply ``x ** gamma`` and quantize to uint8.

    A constant buffer maps to all zeros.
    """
    if not gamma > 0:
        raise DomainError("gamma must be positive")
    a = ab.data.astype(np.float64)
    lo, hi = a.min(), a.max()
    if hi == lo:
        return np.zeros(a.shape, dtype=np.uint8)
    x = (a - lo) / (hi - lo)
    return np.round(255.0 * x**gamma).astype(np.uint8)


# -- interaction samples (stored in the rig frame on disk) -----------------

HAND_JOINT_COUNT = 26


class Handedness(enum.IntEnum):
    LEFT = 0
    RIGHT = 1


@dataclass(frozen=True, eq=False)
class GazeSample:
    timestamp: int
    origin: np.ndarray
    direction: np.ndarray

    def __post_init__(self):
        o = np.array(self.origin, dtype=np.float64).reshape(3)
        d = np.array(self.direction, dtype=np.float64).reshape(3)
        if abs(np.linalg.norm(d) - 1.0) > 1e-9:
            raise ValueError("gaze direction must be unit length")
        for a in (o, d):
            a.setflags(write=False)
        object.__setattr__(self, "origin", o)
        object.__setattr__(self, "direction", d)
        object.__setattr__(self, "timestamp", int(self.timestamp))

    def transformed(self, T) -> GazeSample:
        return GazeSample(self.timestamp, T.apply(self.origin), _unit(T.rotate(self.direction)))


@dataclass(frozen=True, eq=False)
class HandSample:
    timestamp: int
    joints: tuple
    handedness: Handedness = Handedness.RIGHT

    def __post_init__(self):
        object.__setattr__(self, "timestamp", int(self.timestamp))
        object.__setattr__(self, "joints", tuple(self.joints))
        object.__setattr__(self, "handedness", Handedness(self.handedness))

    @property
    def positions(self) -> np.ndarray:
        return np.array([j.translation for j in self.joints]).reshape(-1, 3)

    def transformed(self, T) -> HandSample:
        return HandSample(self.timestamp, tuple(T @ j for j in self.joints), self.handedness)


def _unit(v) -> np.ndarray:
    return v / np.linalg.norm(v)
