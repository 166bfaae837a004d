"""Rigid-body transforms and unit quaternions.

Convention: ``T_ab`` maps coordinates expressed in frame ``b`` into frame
``a``: ``p_a = R_ab @ p_b + t_ab``. Composition ``compose(T_ab, T_bc)``
yields ``T_ac``. Quaternions are stored scalar-last ``(x, y, z, w)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ORTHO_TOL = 1e-9
_REJECT_TOL = 1e-5


def orthonormalize(R: np.ndarray) -> np.ndarray:
    """Closest rotation to ``R`` in the Frobenius sense (polar decomposition)."""
    U, _, Vt = np.linalg.svd(R)
    D = np.eye(3)
    D[2, 2] = np.sign(np.linalg.det(U @ Vt))
    return U @ D @ Vt


def rotation_drift(R: np.ndarray) -> float:
    return float(np.max(np.abs(R.T @ R - np.eye(3))))


def _frozen(a, shape) -> np.ndarray:
    arr = np.array(a, dtype=np.float64).reshape(shape)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class RigidTransform:
    """Rotation plus translation (meters). Immutable."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        R = np.array(self.rotation, dtype=np.float64).reshape(3, 3)
        t = np.array(self.translation, dtype=np.float64).reshape(3)
        if not (np.all(np.isfinite(R)) and np.all(np.isfinite(t))):
            raise ValueError("non-finite transform")
        drift = rotation_drift(R)
        if drift > _REJECT_TOL or np.linalg.det(R) <= 0:
            raise ValueError(f"rotation is not a proper rotation (drift {drift:.3g})")
        if drift > ORTHO_TOL:
            R = orthonormalize(R)
        object.__setattr__(self, "rotation", _frozen(R, (3, 3)))
        object.__setattr__(self, "translation", _frozen(t, (3,)))

    @classmethod
    def identity(cls) -> RigidTransform:
        return cls(np.eye(3), np.zeros(3))

    @classmethod
    def from_matrix(cls, M) -> RigidTransform:
        """Build from a 4x4 homogeneous or 3x4 ``[R | t]`` matrix."""
        M = np.asarray(M, dtype=np.float64)
        if M.shape not in ((4, 4), (3, 4)):
            raise ValueError(f"expected 3x4 or 4x4 matrix, got {M.shape}")
        return cls(M[:3, :3], M[:3, 3])

    @classmethod
    def from_quaternion(cls, q, translation=(0.0, 0.0, 0.0)) -> RigidTransform:
        return cls(quat_to_matrix(q), translation)

    @classmethod
    def from_translation(cls, t) -> RigidTransform:
        return cls(np.eye(3), t)

    @property
    def matrix(self) -> np.ndarray:
        M = np.eye(4)
        M[:3, :3] = self.rotation
        M[:3, 3] = self.translation
        return M

    @property
    def matrix34(self) -> np.ndarray:
        return self.matrix[:3]

    @property
    def quaternion(self) -> np.ndarray:
        return matrix_to_quat(self.rotation)

    def apply(self, points) -> np.ndarray:
        """Map points (..., 3) from the source frame into the target frame."""
        p = np.asarray(points, dtype=np.float64)
        return p @ self.rotation.T + self.translation

    def rotate(self, vectors) -> np.ndarray:
        return np.asarray(vectors, dtype=np.float64) @ self.rotation.T

    def inverse(self) -> RigidTransform:
        Rt = self.rotation.T
        return RigidTransform(Rt, -Rt @ self.translation)

    def __matmul__(self, other: RigidTransform) -> RigidTransform:
        if not isinstance(other, RigidTransform):
            return NotImplemented
        return RigidTransform(
            self.rotation @ other.rotation,
            self.rotation @ other.translation + self.translation,
        )

    def allclose(self, other: RigidTransform, atol: float = 1e-12) -> bool:
        return bool(
            np.allclose(self.rotation, other.rotation, rtol=0, atol=atol)
            and np.allclose(self.translation, other.translation, rtol=0, atol=atol)
        )

    def __repr__(self) -> str:
        q = np.round(self.quaternion, 6).tolist()
        t = np.round(self.translation, 6).tolist()
        return f"RigidTransform(q={q}, t={t})"


def compose(a: RigidTransform, b: RigidTransform) -> RigidTransform:
    """``a ∘ b``: apply ``b`` first, then ``a``."""
    return a @ b


def invert(t: RigidTransform) -> RigidTransform:
    return t.inverse()


def transform_distance(a: RigidTransform, b: RigidTransform) -> tuple[float, float]:
    """(rotation angle in radians, translation distance in meters) between two poses."""
    dR = a.rotation.T @ b.rotation
    c = np.clip((np.trace(dR) - 1.0) / 2.0, -1.0, 1.0)
    return float(np.arccos(c)), float(np.linalg.norm(a.translation - b.translation))


# -- rotations -------------------------------------------------------------


def axis_angle(axis, angle: float) -> np.ndarray:
    """Rotation matrix for a rotation of ``angle`` radians about ``axis``."""
    k = np.asarray(axis, dtype=np.float64)
    k = k / np.linalg.norm(k)
    K = skew(k)
    return np.eye(3) + np.sin(angle) * K + (1.0 - np.cos(angle)) * (K @ K)


def rot_x(angle: float) -> np.ndarray:
    return axis_angle((1.0, 0.0, 0.0), angle)


def rot_y(angle: float) -> np.ndarray:
    return axis_angle((0.0, 1.0, 0.0), angle)


def rot_z(angle: float) -> np.ndarray:
    return axis_angle((0.0, 0.0, 1.0), angle)


def skew(w) -> np.ndarray:
    x, y, z = w
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def so3_exp(w) -> np.ndarray:
    w = np.asarray(w, dtype=np.float64)
    th = float(np.linalg.norm(w))
    W = skew(w)
    if th < 1e-8:
        return np.eye(3) + W + 0.5 * (W @ W)
    return np.eye(3) + np.sin(th) / th * W + (1.0 - np.cos(th)) / th**2 * (W @ W)


def so3_log(R) -> np.ndarray:
    """Rotation vector of ``R`` (via the quaternion, stable near 0 and pi)."""
    q = matrix_to_quat(R)
    v, w = q[:3], q[3]
    s = np.linalg.norm(v)
    if s < 1e-12:
        return 2.0 * v / w
    return 2.0 * np.arctan2(s, w) * v / s


def look_at(eye, target, up=(0.0, 1.0, 0.0)) -> RigidTransform:
    """``world_from_camera`` for a camera at ``eye`` whose +z axis points at
    ``target``; +y of the camera points away from ``up`` (image rows go down)."""
    eye = np.asarray(eye, dtype=np.float64)
    z = np.asarray(target, dtype=np.float64) - eye
    z /= np.linalg.norm(z)
    x = np.cross(z, np.asarray(up, dtype=np.float64))
    n = np.linalg.norm(x)
    if n < 1e-12:
        raise ValueError("view direction parallel to up vector")
    x /= n
    y = np.cross(z, x)
    return RigidTransform(np.column_stack([x, y, z]), eye)


# -- quaternions -----------------------------------------------------------


def quat_to_matrix(q) -> np.ndarray:
    x, y, z, w = np.asarray(q, dtype=np.float64) / np.linalg.norm(q)
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
            [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
            [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
        ]
    )


def matrix_to_quat(R) -> np.ndarray:
    """Unit quaternion ``(x, y, z, w)`` with ``w >= 0``."""
    R = np.asarray(R, dtype=np.float64)
    tr = np.trace(R)
    if tr > 0:
        s = 2.0 * np.sqrt(tr + 1.0)
        q = [(R[2, 1] - R[1, 2]) / s, (R[0, 2] - R[2, 0]) / s, (R[1, 0] - R[0, 1]) / s, 0.25 * s]
    elif R[0, 0] > R[1, 1] and R[0, 0] > R[2, 2]:
        s = 2.0 * np.sqrt(1.0 + R[0, 0] - R[1, 1] - R[2, 2])
        q = [0.25 * s, (R[0, 1] + R[1, 0]) / s, (R[0, 2] + R[2, 0]) / s, (R[2, 1] - R[1, 2]) / s]
    elif R[1, 1] > R[2, 2]:
        s = 2.0 * np.sqrt(1.0 + R[1, 1] - R[0, 0] - R[2, 2])
        q = [(R[0, 1] + R[1, 0]) / s, 0.25 * s, (R[1, 2] + R[2, 1]) / s, (R[0, 2] - R[2, 0]) / s]
    else:
        s = 2.0 * np.sqrt(1.0 + R[2, 2] - R[0, 0] - R[1, 1])
        q = [(R[0, 2] + R[2, 0]) / s, (R[1, 2] + R[2, 1]) / s, 0.25 * s, (R[1, 0] - R[0, 1]) / s]
    q = np.array(q)
    q /= np.linalg.norm(q)
    return -q if q[3] < 0 else q


def quat_multiply(a, b) -> np.ndarray:
    ax, ay, az, aw = a
    bx, by, bz, bw = b
    return np.array(
        [
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
            aw * bw - ax * bx - ay * by - az * bz,
        ]
    )


def slerp(q0, q1, s: float) -> np.ndarray:
    """Spherical linear interpolation along the shorter arc."""
    q0 = np.asarray(q0, dtype=np.float64)
    q1 = np.asarray(q1, dtype=np.float64)
    d = float(np.dot(q0, q1))
    if d < 0.0:
        q1, d = -q1, -d
    if d > 0.9999995:
        q = q0 + s * (q1 - q0)
        return q / np.linalg.norm(q)
    theta = np.arccos(min(d, 1.0))
    st = np.sin(theta)
    return (np.sin((1.0 - s) * theta) * q0 + np.sin(s * theta) * q1) / st


def random_rigid(rng: np.random.Generator, scale: float = 1.0) -> RigidTransform:
    """Uniformly random rotation (via a random unit quaternion) and Gaussian translation."""
    q = rng.normal(size=4)
    return RigidTransform.from_quaternion(q / np.linalg.norm(q), rng.normal(scale=scale, size=3))
