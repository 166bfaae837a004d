from rmkit.reconstruction.ate import AteResult, align_rigid, trajectory_ate
from rmkit.reconstruction.mesh import TriangleMesh, extract_mesh
from rmkit.reconstruction.ply import export_ply, ply_bytes
from rmkit.reconstruction.pointcloud import FrameTag, PointCloud, transform_cloud, unproject_depth
from rmkit.reconstruction.trajfile import read_trajectory, write_trajectory
from rmkit.reconstruction.triangulation import Ray, pixel_ray, triangulate_midpoint
from rmkit.reconstruction.tsdf import TsdfVolume, tsdf_integrate

__all__ = [
    "AteResult",
    "FrameTag",
    "PointCloud",
    "Ray",
    "TriangleMesh",
    "TsdfVolume",
    "align_rigid",
    "export_ply",
    "extract_mesh",
    "pixel_ray",
    "ply_bytes",
    "read_trajectory",
    "trajectory_ate",
    "transform_cloud",
    "triangulate_midpoint",
    "tsdf_integrate",
    "unproject_depth",
    "write_trajectory",
]
