"""Camera models.

The canonical intrinsics form is a per-pixel lookup table holding, for each
pixel center, the intersection of its viewing ray with the plane ``z = 1``.
Continuous pixel coordinates place the center of pixel ``(i, j)`` at
``(i + 0.5, j + 0.5)``; the image spans ``[0, width) x [0, height)``.

A Brown-Conrady (radial k1..k3, tangential p1, p2) model can generate the
table. Forward projection always inverts the bilinear table, so projection
and table lookup are exact inverses; the parametric model, when present,
only seeds that inversion.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from rmkit.errors import BehindCamera, OutOfBounds, OutOfView


@dataclass(frozen=True)
class BrownConrady:
    fx: float
    fy: float
    cx: float
    cy: float
    k1: float = 0.0
    k2: float = 0.0
    k3: float = 0.0
    p1: float = 0.0
    p2: float = 0.0

    def as_tuple(self) -> tuple[float, ...]:
        return (self.fx, self.fy, self.cx, self.cy, self.k1, self.k2, self.k3, self.p1, self.p2)

    @property
    def is_distortion_free(self) -> bool:
        return not any((self.k1, self.k2, self.k3, self.p1, self.p2))

    def distort(self, x, y):
        """Undistorted unit-plane coordinates to distorted unit-plane coordinates."""
        r2 = x * x + y * y
        radial = 1.0 + r2 * (self.k1 + r2 * (self.k2 + r2 * self.k3))
        xd = x * radial + 2.0 * self.p1 * x * y + self.p2 * (r2 + 2.0 * x * x)
        yd = y * radial + self.p1 * (r2 + 2.0 * y * y) + 2.0 * self.p2 * x * y
        return xd, yd

    def _distort_jacobian(self, x, y):
        r2 = x * x + y * y
        radial = 1.0 + r2 * (self.k1 + r2 * (self.k2 + r2 * self.k3))
        dradial = self.k1 + r2 * (2.0 * self.k2 + 3.0 * self.k3 * r2)  # d radial / d r2
        j00 = radial + 2.0 * x * x * dradial + 2.0 * self.p1 * y + 6.0 * self.p2 * x
        j01 = 2.0 * x * y * dradial + 2.0 * self.p1 * x + 2.0 * self.p2 * y
        j10 = 2.0 * x * y * dradial + 2.0 * self.p1 * x + 2.0 * self.p2 * y
        j11 = radial + 2.0 * y * y * dradial + 6.0 * self.p1 * y + 2.0 * self.p2 * x
        return j00, j01, j10, j11

    def undistort(self, xd, yd, iterations: int = 50, tol: float = 1e-15):
        """Invert :meth:`distort` by Newton iteration (vectorized)."""
        xd = np.asarray(xd, dtype=np.float64)
        yd = np.asarray(yd, dtype=np.float64)
        x, y = xd.copy(), yd.copy()
        for _ in range(iterations):
            fx, fy = self.distort(x, y)
            ex, ey = fx - xd, fy - yd
            j00, j01, j10, j11 = self._distort_jacobian(x, y)
            det = j00 * j11 - j01 * j10
            dx = (j11 * ex - j01 * ey) / det
            dy = (j00 * ey - j10 * ex) / det
            x -= dx
            y -= dy
            if np.max(np.abs(dx), initial=0.0) < tol and np.max(np.abs(dy), initial=0.0) < tol:
                break
        return x, y

    def to_pixel(self, xd, yd):
        return self.fx * xd + self.cx, self.fy * yd + self.cy

    def from_pixel(self, u, v):
        return (u - self.cx) / self.fx, (v - self.cy) / self.fy


@dataclass(frozen=True, eq=False)
class CameraModel:
    """Per-pixel unit-plane lookup table with an optional parametric generator.

    ``lut`` has shape ``(height, width, 2)`` and is held at float32 precision,
    matching its on-disk form.
    """

    width: int
    height: int
    lut: np.ndarray
    params: BrownConrady | None = None

    def __post_init__(self):
        lut = np.array(self.lut, dtype=np.float32)
        if lut.shape != (self.height, self.width, 2):
            raise ValueError(f"LUT shape {lut.shape} != ({self.height}, {self.width}, 2)")
        if not np.all(np.isfinite(lut)):
            raise ValueError("LUT contains non-finite entries")
        lut.setflags(write=False)
        object.__setattr__(self, "width", int(self.width))
        object.__setattr__(self, "height", int(self.height))
        object.__setattr__(self, "lut", lut)

    @classmethod
    def from_parametric(cls, width: int, height: int, params: BrownConrady) -> CameraModel:
        u = np.arange(width) + 0.5
        v = np.arange(height) + 0.5
        uu, vv = np.meshgrid(u, v)
        xd, yd = params.from_pixel(uu, vv)
        x, y = params.undistort(xd, yd)
        # past the fold of the radial polynomial no ray maps to the pixel
        rx, ry = params.distort(x, y)
        err = np.maximum(np.abs(rx - xd), np.abs(ry - yd))
        if not np.all(err < 1e-9):
            raise ValueError("distortion model is not invertible over the whole image")
        return cls(width, height, np.stack([x, y], axis=-1), params)

    @classmethod
    def pinhole(cls, width: int, height: int, fx: float, fy: float, cx: float, cy: float) -> CameraModel:
        return cls.from_parametric(width, height, BrownConrady(fx, fy, cx, cy))

    def with_lut_only(self) -> CameraModel:
        """Same table, parametric generator dropped (forces table-search projection)."""
        return CameraModel(self.width, self.height, self.lut)

    # -- unit-plane lookup ----------------------------------------------------

    @cached_property
    def _lut64(self) -> np.ndarray:
        return self.lut.astype(np.float64)

    @cached_property
    def pixel_rays(self) -> np.ndarray:
        """Unit ray directions through every pixel center, shape (H, W, 3)."""
        d = np.concatenate([self._lut64, np.ones((self.height, self.width, 1))], axis=-1)
        d /= np.linalg.norm(d, axis=-1, keepdims=True)
        d.setflags(write=False)
        return d

    def _cell(self, u, v):
        # Table index space: entry (i, j) sits at continuous (i + 0.5, j + 0.5).
        # The cell index is clamped so the half-pixel border extrapolates linearly.
        gx = np.asarray(u, dtype=np.float64) - 0.5
        gy = np.asarray(v, dtype=np.float64) - 0.5
        i0 = np.clip(np.floor(gx), 0, max(self.width - 2, 0)).astype(np.intp)
        j0 = np.clip(np.floor(gy), 0, max(self.height - 2, 0)).astype(np.intp)
        return i0, j0, gx - i0, gy - j0

    def unit_plane(self, u, v) -> np.ndarray:
        """Vectorized bilinear table lookup, no bounds checking. Returns (..., 2)."""
        L = self._lut64
        i0, j0, fx, fy = self._cell(u, v)
        i1 = np.minimum(i0 + 1, self.width - 1)
        j1 = np.minimum(j0 + 1, self.height - 1)
        fx = fx[..., None]
        fy = fy[..., None]
        top = L[j0, i0] * (1.0 - fx) + L[j0, i1] * fx
        bot = L[j1, i0] * (1.0 - fx) + L[j1, i1] * fx
        return top * (1.0 - fy) + bot * fy

    def in_image(self, u, v) -> np.ndarray:
        u = np.asarray(u)
        v = np.asarray(v)
        return (u >= 0) & (u < self.width) & (v >= 0) & (v < self.height)

    # -- projection -----------------------------------------------------------

    @cached_property
    def _affine_fit(self) -> tuple[float, float, float, float]:
        # Least-squares pinhole approximation, used to seed table inversion.
        L = self._lut64
        u = np.arange(self.width) + 0.5
        v = np.arange(self.height) + 0.5
        ax = np.polyfit(L[self.height // 2, :, 0], u, 1)
        ay = np.polyfit(L[:, self.width // 2, 1], v, 1)
        return ax[0], ay[0], ax[1], ay[1]

    def _invert_table(self, x, y, iterations: int = 30, seed=None):
        """Newton solve of ``unit_plane(u, v) = (x, y)``; NaN inputs stay NaN."""
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        if seed is None:
            fx, fy, cx, cy = self._affine_fit
            u0, v0 = fx * x + cx, fy * y + cy
        else:
            u0, v0 = np.asarray(seed[0], dtype=np.float64), np.asarray(seed[1], dtype=np.float64)
        U = np.full(x.shape, np.nan)
        V = np.full(x.shape, np.nan)
        live = np.isfinite(x) & np.isfinite(y) & np.isfinite(u0) & np.isfinite(v0)
        x, y, u, v = x[live], y[live], u0[live], v0[live]
        L = self._lut64
        for _ in range(iterations):
            u = np.clip(u, -0.5, self.width + 0.5)
            v = np.clip(v, -0.5, self.height + 0.5)
            i0, j0, ax, ay = self._cell(u, v)
            i1 = np.minimum(i0 + 1, self.width - 1)
            j1 = np.minimum(j0 + 1, self.height - 1)
            a, b, c, d = L[j0, i0], L[j0, i1], L[j1, i0], L[j1, i1]
            axe, aye = ax[..., None], ay[..., None]
            val = (a * (1 - axe) + b * axe) * (1 - aye) + (c * (1 - axe) + d * axe) * aye
            du = (b - a) * (1 - aye) + (d - c) * aye
            dv = (c - a) * (1 - axe) + (d - b) * axe
            ex = val[..., 0] - x
            ey = val[..., 1] - y
            det = du[..., 0] * dv[..., 1] - dv[..., 0] * du[..., 1]
            su = (dv[..., 1] * ex - dv[..., 0] * ey) / det
            sv = (du[..., 0] * ey - du[..., 1] * ex) / det
            u = u - su
            v = v - sv
            if np.max(np.abs(su), initial=0.0) < 1e-10 and np.max(np.abs(sv), initial=0.0) < 1e-10:
                break
        U[live] = u
        V[live] = v
        return U, V

    def project_points(self, points, exact: bool = True) -> tuple[np.ndarray, np.ndarray]:
        """Vectorized projection of camera-frame points (..., 3).

        Returns ``(uv, ok)`` where ``ok`` marks points in front of the camera
        that land inside the image. ``uv`` is NaN where the point is behind.

        The result inverts the bilinear table lookup. With a parametric model
        the polynomial supplies the starting point; ``exact=False`` stops there,
        which is off by the table's interpolation error (well under 1e-2 px).
        """
        p = np.asarray(points, dtype=np.float64)
        z = p[..., 2]
        front = z > 0
        with np.errstate(divide="ignore", invalid="ignore"):
            x = np.where(front, p[..., 0] / z, np.nan)
            y = np.where(front, p[..., 1] / z, np.nan)
        if self.params is not None:
            xd, yd = self.params.distort(x, y)
            u, v = self.params.to_pixel(xd, yd)
            if exact:
                u, v = self._invert_table(x, y, seed=(u, v))
        else:
            u, v = self._invert_table(x, y)
        ok = front & self.in_image(np.nan_to_num(u, nan=-1.0), np.nan_to_num(v, nan=-1.0))
        return np.stack([u, v], axis=-1), ok

    def unproject_pixels(self, uv) -> np.ndarray:
        """Unit ray directions (..., 3) for continuous pixel positions."""
        uv = np.asarray(uv, dtype=np.float64)
        xy = self.unit_plane(uv[..., 0], uv[..., 1])
        d = np.concatenate([xy, np.ones(xy.shape[:-1] + (1,))], axis=-1)
        return d / np.linalg.norm(d, axis=-1, keepdims=True)


def map_image_point_to_unit_plane(cam: CameraModel, pixel) -> tuple[float, float]:
    u, v = float(pixel[0]), float(pixel[1])
    if not (0.0 <= u < cam.width and 0.0 <= v < cam.height):
        raise OutOfBounds(f"pixel ({u}, {v}) outside {cam.width}x{cam.height}")
    x, y = cam.unit_plane(np.array(u), np.array(v))
    return float(x), float(y)


def map_camera_space_to_image_point(cam: CameraModel, p) -> tuple[float, float]:
    p = np.asarray(p, dtype=np.float64)
    if p[2] <= 0:
        raise BehindCamera(f"point {p.tolist()} has z <= 0")
    uv, ok = cam.project_points(p)
    if not ok:
        raise OutOfView(f"point {p.tolist()} projects to {uv.tolist()}, outside the image")
    return float(uv[0]), float(uv[1])
