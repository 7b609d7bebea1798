"""Geometry-aware RGBD warping, reconstruction, and sparse sensing policies."""

from .geometry import (
    Intrinsics,
    PixelCoord,
    PoseSE3,
    RelativeTransform,
    pose_looking,
    project,
    relative_transform,
    rotation_about_axis,
    se3_geodesic,
    so3_log_angle,
    unproject,
)
from .metrics import (
    HausdorffParams,
    HausdorffResult,
    NoOverlapError,
    SsimParams,
    hausdorff,
    ssim,
    ssim_depth,
    ssim_map,
)
from .ply import (
    MalformedPlyError,
    load_mesh_ply,
    load_pointcloud_ply,
    save_mesh_ply,
    save_pointcloud_ply,
)
from .policies import (
    GapOverlap,
    OraclePolicy,
    SelectionReport,
    SpatialPolicy,
    TemporalPolicy,
    ThresholdPoint,
    geodesic_curve,
    overlap_curve,
    select_frames,
)
from .reconstruction import (
    Concat,
    DegenerateRegistrationError,
    Fused,
    FusedIcp,
    IcpParams,
    IcpResult,
    frame_to_pointcloud,
    icp_align,
    merge_clouds,
    reconstruct_session,
    voxel_downsample,
)
from .session import (
    DimensionMismatchError,
    Frame,
    ManifestError,
    MissingFileError,
    PointCloud,
    Session,
    SessionError,
    SurfaceMesh,
    load_session,
    save_session,
)
from .synthetic import (
    BoxScene,
    LinearTrajectory,
    OrbitTrajectory,
    ScriptedTrajectory,
    WallTexture,
    generate_session,
    render_frame,
    scene_ground_truth_cloud,
    trajectory_poses,
)
from .warping import (
    ScreenSpaceMesh,
    WarpResult,
    build_screen_space_mesh,
    overlap_ratio,
    rasterize,
    warp_frame,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
