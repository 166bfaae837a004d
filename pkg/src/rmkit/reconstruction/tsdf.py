"""Dense truncated signed distance volume.

Voxel ``(i, j, k)`` has its center at ``origin + (i + 0.5, j + 0.5, k + 0.5) * voxel_size``.
Depth is radial range, so the signed distance of a voxel is the measured
range at its pixel minus the camera-to-voxel distance.
"""

from __future__ import annotations

import struct
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from rmkit.geometry.camera import CameraModel
from rmkit.geometry.transforms import RigidTransform

DEFAULT_VOXEL = 0.02
DEFAULT_MAX_WEIGHT = 64.0

_HEADER = struct.Struct("<4sHH3I6dB7x")  # magic, version, dims, origin, voxel, mu, Wmax, has intensity
_MAGIC = b"RMTV"


class TsdfVolume:
    """Mutable voxel grid; exclusively owned by whoever is integrating into it."""

    def __init__(
        self,
        origin,
        voxel_size: float = DEFAULT_VOXEL,
        dims=(64, 64, 64),
        truncation: float | None = None,
        max_weight: float = DEFAULT_MAX_WEIGHT,
        track_intensity: bool = False,
    ):
        self.origin = np.asarray(origin, dtype=np.float64).reshape(3)
        self.voxel_size = float(voxel_size)
        self.dims = tuple(int(n) for n in dims)
        self.truncation = float(4.0 * voxel_size if truncation is None else truncation)
        self.max_weight = float(max_weight)
        if self.voxel_size <= 0 or self.truncation <= 0 or self.max_weight < 1:
            raise ValueError("voxel size and truncation must be positive, max weight >= 1")
        if len(self.dims) != 3 or min(self.dims) < 2:
            raise ValueError("volume needs at least 2 voxels along each axis")
        self.tsdf = np.ones(self.dims, dtype=np.float32)
        self.weight = np.zeros(self.dims, dtype=np.float32)
        self.intensity = np.zeros(self.dims, dtype=np.float32) if track_intensity else None

    @classmethod
    def from_bounds(cls, lo, hi, voxel_size: float = DEFAULT_VOXEL, **kw) -> TsdfVolume:
        lo = np.asarray(lo, dtype=np.float64)
        hi = np.asarray(hi, dtype=np.float64)
        dims = np.maximum(np.ceil((hi - lo) / voxel_size - 1e-9).astype(int), 2)
        return cls(lo, voxel_size, tuple(dims), **kw)

    def voxel_centers(self, i_slice: slice = slice(None)) -> np.ndarray:
        nx, ny, nz = self.dims
        ii = np.arange(nx)[i_slice]
        g = np.stack(np.meshgrid(ii, np.arange(ny), np.arange(nz), indexing="ij"), axis=-1)
        return self.origin + (g + 0.5) * self.voxel_size

    def copy(self) -> TsdfVolume:
        v = TsdfVolume(self.origin, self.voxel_size, self.dims, self.truncation, self.max_weight,
                       self.intensity is not None)
        v.tsdf[...] = self.tsdf
        v.weight[...] = self.weight
        if self.intensity is not None:
            v.intensity[...] = self.intensity
        return v

    # -- persistence --------------------------------------------------------

    def save(self, path) -> None:
        has_i = self.intensity is not None
        head = _HEADER.pack(_MAGIC, 1, 0, *self.dims, *self.origin, self.voxel_size, self.truncation,
                            self.max_weight, int(has_i))
        with open(path, "wb") as fh:
            fh.write(head)
            fh.write(self.tsdf.astype("<f4").tobytes())
            fh.write(self.weight.astype("<f4").tobytes())
            if has_i:
                fh.write(self.intensity.astype("<f4").tobytes())

    @classmethod
    def load(cls, path) -> TsdfVolume:
        with open(path, "rb") as fh:
            data = fh.read()
        if len(data) < _HEADER.size:
            raise ValueError("not a TSDF volume file")
        magic, major, _, nx, ny, nz, ox, oy, oz, vs, mu, wmax, has_i = _HEADER.unpack_from(data, 0)
        if magic != _MAGIC or major != 1:
            raise ValueError("not a TSDF volume file")
        n = nx * ny * nz
        expect = _HEADER.size + 4 * n * (3 if has_i else 2)
        if len(data) != expect:
            raise ValueError("TSDF volume file has the wrong length")
        vol = cls((ox, oy, oz), vs, (nx, ny, nz), mu, wmax, bool(has_i))
        arr = np.frombuffer(data, dtype="<f4", offset=_HEADER.size)
        vol.tsdf[...] = arr[:n].reshape(vol.dims)
        vol.weight[...] = arr[n : 2 * n].reshape(vol.dims)
        if has_i:
            vol.intensity[...] = arr[2 * n :].reshape(vol.dims)
        return vol


def _integrate_slab(vol: TsdfVolume, sl: slice, depth_m, valid, cam: CameraModel, camera_from_world, intensity):
    pw = vol.voxel_centers(sl).reshape(-1, 3)
    pc = camera_from_world.apply(pw)
    uv, ok = cam.project_points(pc, exact=False)
    if not ok.any():
        return
    idx = np.flatnonzero(ok)
    iu = np.floor(uv[idx, 0]).astype(np.intp)
    iv = np.floor(uv[idx, 1]).astype(np.intp)
    keep = valid[iv, iu]
    idx, iu, iv = idx[keep], iu[keep], iv[keep]
    d = depth_m[iv, iu]
    r = np.linalg.norm(pc[idx], axis=1)
    sdf = d - r
    mu = vol.truncation
    upd = sdf > -mu
    idx = idx[upd]
    f = np.clip(sdf[upd] / mu, -1.0, 1.0).astype(np.float32)

    tsdf = vol.tsdf[sl].reshape(-1)
    weight = vol.weight[sl].reshape(-1)
    w_old = weight[idx]
    tsdf[idx] = (w_old * tsdf[idx] + f) / (w_old + 1.0)
    weight[idx] = np.minimum(w_old + 1.0, vol.max_weight)
    if vol.intensity is not None and intensity is not None:
        inten = vol.intensity[sl].reshape(-1)
        a = intensity[iv[upd], iu[upd]].astype(np.float32)
        inten[idx] = (w_old * inten[idx] + a) / (w_old + 1.0)


def tsdf_integrate(
    vol: TsdfVolume,
    depth_m,
    valid,
    cam: CameraModel,
    world_from_camera: RigidTransform,
    intensity=None,
    threads: int = 1,
    slab: int = 16,
) -> None:
    """Fuse one depth frame (radial meters + validity mask) into ``vol`` in place.

    The volume is split into x-slabs processed independently; every voxel is
    updated by exactly one slab, so the result does not depend on ``threads``.
    """
    depth_m = np.asarray(depth_m, dtype=np.float64)
    valid = np.asarray(valid, dtype=bool) & np.isfinite(depth_m)
    if depth_m.shape != (cam.height, cam.width):
        raise ValueError("depth frame does not match the camera model")
    if not valid.any():
        return
    cfw = world_from_camera.inverse()
    slabs = [slice(s, min(s + slab, vol.dims[0])) for s in range(0, vol.dims[0], slab)]
    # tsdf[sl] for a basic slice is a view, so in-place updates land in the volume
    if threads <= 1:
        for sl in slabs:
            _integrate_slab(vol, sl, depth_m, valid, cam, cfw, intensity)
    else:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            list(ex.map(lambda sl: _integrate_slab(vol, sl, depth_m, valid, cam, cfw, intensity), slabs))
