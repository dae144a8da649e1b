"""Singularity-free quaternion extraction and closed-form rotation fitting."""

from .errors import *  # noqa: F401,F403
from .extract import (
    Adjugate2,
    ExtractionResult,
    SECTOR_PATTERNS,
    SectorId,
    classify_singular_sector,
    extract_quat2_exact,
    extract_quat2_noisy,
    extract_quat3_exact,
    extract_quat3_noisy,
    normalize_adjugate_row,
    profile_from_rot3_measured,
    quadratic_form_matrix,
)
from .linalg import (
    QuarticRoots,
    adjugate,
    char_matrix,
    eigenvalues_sym4,
    max_eigenvalue_sym4,
)
from .match import (
    MatchResult,
    cross_covariance,
    exact_data_eigenvalue,
    match2d,
    match3d,
    profile_matrix_3d,
)
from .pose import (
    CameraAtOrigin,
    CloudAtOrigin,
    PoseSolution,
    cov_determinants3,
    ortho_pose_loss,
    ortho_project,
    perspective_loss,
    perspective_project,
    pose2d,
    pose3d_ortho,
    pose3d_ortho_raw,
    pose3d_perspective,
    rotation_error,
    rotation_error_signed,
    solve_focal_length,
)
from .rotations import (
    canonical_sign,
    quat_from_axis_angle,
    quat_mul,
    rot2_from_quat2,
    rot3_from_axis_angle,
    rot3_from_quat,
    shepperd_extract,
)

__version__ = "0.1.0"
