from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from rmkit.errors import InsufficientOverlap
from rmkit.geometry.trajectory import PoseTrajectory
from rmkit.geometry.transforms import RigidTransform
from rmkit.sync import associate_nearest


@dataclass(frozen=True, eq=False)
class AteResult:
    rmse: float
    residuals: np.ndarray  # per associated pair, meters
    est_indices: np.ndarray
    ref_indices: np.ndarray
    alignment: RigidTransform  # maps estimated positions onto the reference

    def report(self) -> dict:
        r = self.residuals
        return {
            "pairs": int(len(r)),
            "rmse_m": self.rmse,
            "mean_m": float(r.mean()),
            "median_m": float(np.median(r)),
            "max_m": float(r.max()),
            "alignment": self.alignment.matrix34.round(12).tolist(),
        }


def align_rigid(src: np.ndarray, dst: np.ndarray) -> RigidTransform:
    """Least-squares rotation + translation (no scale) taking ``src`` onto ``dst``."""
    mu_s = src.mean(axis=0)
    mu_d = dst.mean(axis=0)
    H = (src - mu_s).T @ (dst - mu_d)
    U, _, Vt = np.linalg.svd(H)
    D = np.diag([1.0, 1.0, np.sign(np.linalg.det(Vt.T @ U.T))])
    R = Vt.T @ D @ U.T
    return RigidTransform(R, mu_d - R @ mu_s)


def trajectory_ate(est: PoseTrajectory, ref: PoseTrajectory, tol_ticks: int) -> AteResult:
    """Absolute trajectory error after rigid alignment of associated translations."""
    matches = associate_nearest(est.timestamps, ref.timestamps, tol_ticks)
    pairs = [(i, m.index) for i, m in enumerate(matches) if m is not None]
    if len(pairs) < 3:
        raise InsufficientOverlap(f"only {len(pairs)} associated poses; need at least 3")
    ei = np.array([p[0] for p in pairs])
    ri = np.array([p[1] for p in pairs])
    src = est.translations[ei]
    dst = ref.translations[ri]
    T = align_rigid(src, dst)
    res = np.linalg.norm(T.apply(src) - dst, axis=1)
    return AteResult(float(np.sqrt(np.mean(res**2))), res, ei, ri, T)
