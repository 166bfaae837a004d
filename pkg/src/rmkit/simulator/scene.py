"""Analytic scenes and closed-form ray casting.

World frame is right-handed with +y up. Returned surface normals always face
the incoming ray (so a ray leaving a box from the inside sees the wall's
inward normal).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

_EPS = 1e-9


def _unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64).reshape(3)
    n = np.linalg.norm(v)
    if n == 0:
        raise ValueError("zero vector")
    # leave unit vectors bit-exact so configs survive a dump/load cycle
    return v if abs(n - 1.0) < 1e-12 else v / n


def _check_albedo(a: float) -> float:
    if not 0.0 < a <= 1.0:
        raise ValueError("albedo must lie in (0, 1]")
    return float(a)


@dataclass(frozen=True, eq=False)
class Plane:
    point: np.ndarray
    normal: np.ndarray
    albedo: float = 0.8

    def __post_init__(self):
        object.__setattr__(self, "point", np.asarray(self.point, dtype=np.float64).reshape(3))
        n = np.asarray(self.normal, dtype=np.float64).reshape(3)
        if abs(np.linalg.norm(n) - 1.0) > 1e-9:
            raise ValueError("plane normal must be unit length")
        object.__setattr__(self, "normal", n)
        object.__setattr__(self, "albedo", _check_albedo(self.albedo))

    @property
    def center(self) -> np.ndarray:
        return self.point

    def intersect(self, o, d):
        dn = d @ self.normal
        with np.errstate(divide="ignore", invalid="ignore"):
            t = (self.point - o) @ self.normal / dn
        return np.where((np.abs(dn) > 1e-12) & (t > _EPS), t, np.inf)

    def normal_at(self, p):
        return np.broadcast_to(self.normal, p.shape)


@dataclass(frozen=True, eq=False)
class Sphere:
    center: np.ndarray
    radius: float
    albedo: float = 0.8

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=np.float64).reshape(3))
        if not self.radius > 0:
            raise ValueError("sphere radius must be positive")
        object.__setattr__(self, "radius", float(self.radius))
        object.__setattr__(self, "albedo", _check_albedo(self.albedo))

    def intersect(self, o, d):
        oc = o - self.center
        if oc.ndim == 1:  # shared origin: one matrix-vector product
            b = d @ oc
            c = oc @ oc - self.radius**2
        else:
            b = np.einsum("...i,...i->...", oc, d)
            c = np.einsum("...i,...i->...", oc, oc) - self.radius**2
        disc = b * b - c
        hit = disc >= 0
        sq = np.sqrt(np.where(hit, disc, 0.0))
        t0 = -b - sq
        t1 = -b + sq
        t = np.where(t0 > _EPS, t0, np.where(t1 > _EPS, t1, np.inf))
        return np.where(hit, t, np.inf)

    def normal_at(self, p):
        return (p - self.center) / self.radius


@dataclass(frozen=True, eq=False)
class Box:
    center: np.ndarray
    half_extents: np.ndarray
    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))
    albedo: float = 0.8

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=np.float64).reshape(3))
        h = np.asarray(self.half_extents, dtype=np.float64).reshape(3)
        if np.any(h <= 0):
            raise ValueError("box half-extents must be positive")
        object.__setattr__(self, "half_extents", h)
        R = np.asarray(self.rotation, dtype=np.float64).reshape(3, 3)
        if np.max(np.abs(R.T @ R - np.eye(3))) > 1e-9 or np.linalg.det(R) <= 0:
            raise ValueError("box orientation must be a rotation matrix")
        object.__setattr__(self, "rotation", R)
        object.__setattr__(self, "albedo", _check_albedo(self.albedo))

    def intersect(self, o, d):
        R = self.rotation
        ol = (o - self.center) @ R
        dl = d @ R
        tnear = tfar = None
        for k in range(3):
            # slab k; axis-parallel rays are unbounded inside it, excluded outside
            ok, dk, hk = ol[..., k], dl[..., k], self.half_extents[k]
            with np.errstate(divide="ignore", invalid="ignore"):
                ta = (-hk - ok) / dk
                tb = (hk - ok) / dk
            lo, hi = np.minimum(ta, tb), np.maximum(ta, tb)
            par = dk == 0
            if np.any(par):
                inside = np.abs(ok) <= hk
                lo = np.where(par, np.where(inside, -np.inf, np.inf), lo)
                hi = np.where(par, np.where(inside, np.inf, -np.inf), hi)
            tnear = lo if tnear is None else np.maximum(tnear, lo)
            tfar = hi if tfar is None else np.minimum(tfar, hi)
        hit = (tnear <= tfar) & (tfar > _EPS)
        return np.where(hit, np.where(tnear > _EPS, tnear, tfar), np.inf)

    def normal_at(self, p):
        # the face is the axis along which the local point is closest to the wall
        pl = (p - self.center) @ self.rotation
        axis = np.argmax(np.abs(pl) / self.half_extents, axis=-1)
        nl = np.zeros(pl.shape)
        np.put_along_axis(nl, axis[..., None], 1.0, -1)
        return nl @ self.rotation.T


@dataclass(frozen=True)
class Hit:
    t: float
    normal: np.ndarray
    albedo: float
    index: int


@dataclass(frozen=True, eq=False)
class Scene:
    primitives: tuple = ()
    # direction the light travels, world frame
    light_direction: np.ndarray = field(default_factory=lambda: np.array([0.3, -1.0, 0.2]))
    ambient: float = 0.25

    def __post_init__(self):
        object.__setattr__(self, "primitives", tuple(self.primitives))
        object.__setattr__(self, "light_direction", _unit(self.light_direction))

    def cast(self, origins, directions):
        """Vectorized nearest-hit query.

        Returns ``(t, normal, albedo, index)``; ``t`` is ``inf`` and ``index``
        is -1 where nothing is hit.
        """
        d = np.asarray(directions, dtype=np.float64)
        o = np.asarray(origins, dtype=np.float64)
        if o.shape != (3,):
            o = np.broadcast_to(o, d.shape)
        shape = d.shape[:-1]
        if not self.primitives:
            return np.full(shape, np.inf), np.zeros(d.shape), np.zeros(shape), np.full(shape, -1, dtype=np.intp)
        ts = np.stack([prim.intersect(o, d) for prim in self.primitives])
        idx = np.argmin(ts, axis=0)  # first minimum, so ties go to the earlier primitive
        best = np.take_along_axis(ts, idx[None], axis=0)[0]
        idx[~np.isfinite(best)] = -1
        # dense evaluation beats boolean gathers at image sizes
        p = o + np.where(idx >= 0, best, 0.0)[..., None] * d
        normal = np.zeros(d.shape)
        for k, prim in enumerate(self.primitives):
            sel = idx == k
            if sel.any():
                normal = np.where(sel[..., None], prim.normal_at(p), normal)
        # face the incoming ray
        flip = np.einsum("...i,...i->...", normal, d) > 0
        normal[flip] = -normal[flip]
        albedo = np.array([q.albedo for q in self.primitives] + [0.0])[idx]
        return best, normal, albedo, idx


def cast_ray(scene: Scene, ray) -> Hit | None:
    """Nearest positive intersection of one ray (``origin``/``direction`` attributes)."""
    d = np.asarray(ray.direction, dtype=np.float64)
    if abs(np.linalg.norm(d) - 1.0) > 1e-9:
        raise ValueError("ray direction must be unit length")
    t, n, a, i = scene.cast(np.asarray(ray.origin, dtype=np.float64)[None], d[None])
    if not np.isfinite(t[0]):
        return None
    return Hit(float(t[0]), n[0], float(a[0]), int(i[0]))


def primitive_center(p) -> np.ndarray:
    return p.point if isinstance(p, Plane) else p.center
