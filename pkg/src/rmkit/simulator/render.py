"""Depth and grayscale rendering by ray casting through the unit-plane LUT.

Active brightness follows an inverse-square model,
``AB = K * albedo * cos(theta) / r**2`` with ``K = AB_CONSTANT``, so a white
frontal surface at 1 m reads 5000.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from rmkit.frames import (
    AHAT_INVALID,
    LONG_THROW_MAX_MM,
    SIGMA_INVALID_MASK,
    VLC_SHAPE,
    AbFrame,
    DepthFrame,
    DepthMode,
    DepthPacket,
    SigmaBuffer,
    VlcFrame,
)
from rmkit.geometry.camera import CameraModel
from rmkit.geometry.transforms import RigidTransform
from rmkit.simulator.scene import Scene

AB_CONSTANT = 5000.0
VLC_EXPOSURE = 0.01
DEPTH_EXPOSURE = 0.001


@dataclass(frozen=True)
class NoiseSpec:
    depth_sigma: float = 0.0  # meters, additive Gaussian on range
    ab_sigma: float = 0.0  # relative, multiplicative Gaussian on AB
    p_invalid: float = 0.0  # per-pixel dropout probability
    seed: int = 0

    def __post_init__(self):
        if self.depth_sigma < 0 or self.ab_sigma < 0:
            raise ValueError("noise sigmas must be non-negative")
        if not 0.0 <= self.p_invalid <= 1.0:
            raise ValueError("p_invalid must lie in [0, 1]")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must fit in an unsigned 64-bit integer")

    @property
    def is_zero(self) -> bool:
        return self.depth_sigma == 0 and self.ab_sigma == 0 and self.p_invalid == 0

    def generator(self, stream: int, frame: int) -> np.random.Generator:
        # counter-based stream keyed by (seed, stream, frame): independent of
        # render order and thread count
        return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(self.seed), stream, frame])))


def _cast_camera(scene: Scene, cam: CameraModel, world_from_camera: RigidTransform, threads: int = 1):
    rays_c = cam.pixel_rays
    R, o = world_from_camera.rotation, world_from_camera.translation

    def rows(lo, hi):
        d = rays_c[lo:hi] @ R.T
        return scene.cast(o, d)

    H = cam.height
    if threads <= 1 or H < 2 * threads:
        t, n, a, _ = scene.cast(o, rays_c @ R.T)
    else:
        bounds = np.linspace(0, H, threads + 1).astype(int)
        with ThreadPoolExecutor(threads) as ex:
            parts = list(ex.map(rows, bounds[:-1], bounds[1:]))
        t = np.concatenate([p[0] for p in parts])
        n = np.concatenate([p[1] for p in parts])
        a = np.concatenate([p[2] for p in parts])
    d_world = rays_c @ R.T
    cos = np.clip(-np.einsum("hwi,hwi->hw", n, d_world), 0.0, 1.0)
    return t, cos, a, n


def render_depth(
    scene: Scene,
    cam: CameraModel,
    world_from_camera: RigidTransform,
    mode: DepthMode,
    noise: NoiseSpec | None = None,
    stream: int = 0,
    frame: int = 0,
    timestamp: int = 0,
    threads: int = 1,
) -> DepthPacket:
    mode = DepthMode(mode)
    if (cam.height, cam.width) != mode.shape:
        raise ValueError(f"{mode.name} needs a {mode.shape[1]}x{mode.shape[0]} camera")
    noise = noise or NoiseSpec()
    t, cos, albedo, _ = _cast_camera(scene, cam, world_from_camera, threads)
    hit = np.isfinite(t)
    r_true = np.where(hit, t, 0.0)
    r = r_true
    dropped = np.zeros(mode.shape, dtype=bool)
    ab_gain = 1.0
    if not noise.is_zero:
        rng = noise.generator(stream, frame)
        r = r_true + noise.depth_sigma * rng.standard_normal(mode.shape)
        dropped = rng.random(mode.shape) < noise.p_invalid
        ab_gain = 1.0 + noise.ab_sigma * rng.standard_normal(mode.shape)

    with np.errstate(divide="ignore", invalid="ignore"):
        ab = AB_CONSTANT * albedo * cos / (r_true * r_true) * ab_gain
    ab = np.where(hit, ab, 0.0)
    ab = np.clip(np.round(ab), 0, 65535).astype(np.uint16)

    mm = np.round(1000.0 * r)
    if mode is DepthMode.AHAT:
        ok = hit & ~dropped
        raw = np.where(ok, np.mod(mm, 1000.0), AHAT_INVALID).astype(np.uint16)
        sigma = None
    else:
        too_far = mm > LONG_THROW_MAX_MM
        raw = np.where(hit, np.clip(mm, 0, LONG_THROW_MAX_MM), 0).astype(np.uint16)
        bad = ~hit | dropped | too_far
        sigma = SigmaBuffer(np.where(bad, SIGMA_INVALID_MASK, 0).astype(np.uint8))
    return DepthPacket(
        DepthFrame(mode, raw, timestamp, exposure=DEPTH_EXPOSURE, gain=1.0),
        AbFrame(mode, ab, timestamp),
        sigma,
    )


def render_vlc(
    scene: Scene,
    cam: CameraModel,
    world_from_camera: RigidTransform,
    timestamp: int = 0,
    threads: int = 1,
) -> VlcFrame:
    """Lambertian shading under one directional light plus ambient, with
    cos^4 vignetting across the field of view."""
    if (cam.height, cam.width) != VLC_SHAPE:
        raise ValueError("grayscale cameras are 640x480")
    t, _, albedo, n = _cast_camera(scene, cam, world_from_camera, threads)
    hit = np.isfinite(t)
    lambert = np.clip(-(n @ scene.light_direction), 0.0, None)
    shade = albedo * (scene.ambient + (1.0 - scene.ambient) * lambert)
    vignette = cam.pixel_rays[..., 2] ** 4
    img = np.where(hit, 255.0 * shade * vignette, 0.0)
    return VlcFrame(np.clip(np.round(img), 0, 255).astype(np.uint8), timestamp, VLC_EXPOSURE, 1.0)
