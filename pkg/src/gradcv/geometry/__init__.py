"""Geometric transforms: planar warps, rotation parameterizations, rigid
transforms, pinhole cameras, and depth-based view warping."""

from .conversions import (
    axis_angle_to_rotation_matrix,
    convert_points_from_homogeneous,
    convert_points_to_homogeneous,
    deg2rad,
    denormalize_pixel_coordinates,
    normalize_pixel_coordinates,
    quaternion_to_rotation_matrix,
    rad2deg,
    rotation_matrix_to_axis_angle,
    rotation_matrix_to_quaternion,
)
from .transforms import (
    denormalize_homography,
    get_perspective_transform,
    get_rotation_matrix2d,
    homography_warp,
    mat3_inverse,
    normal_transform_pixel,
    normalize_homography,
    warp_affine,
    warp_perspective,
)
from .linalg import (
    compose_transforms,
    inverse_transform,
    relative_transform,
    transform_points,
)
from .camera import (
    PinholeCamera,
    load_camera,
    make_camera,
    project_points,
    save_camera,
    unproject_points,
)
from .depth import depth_normals, depth_to_3d, depth_warp

__all__ = [
    "deg2rad",
    "rad2deg",
    "convert_points_to_homogeneous",
    "convert_points_from_homogeneous",
    "normalize_pixel_coordinates",
    "denormalize_pixel_coordinates",
    "quaternion_to_rotation_matrix",
    "rotation_matrix_to_quaternion",
    "axis_angle_to_rotation_matrix",
    "rotation_matrix_to_axis_angle",
    "get_perspective_transform",
    "get_rotation_matrix2d",
    "warp_perspective",
    "warp_affine",
    "homography_warp",
    "mat3_inverse",
    "normal_transform_pixel",
    "normalize_homography",
    "denormalize_homography",
    "transform_points",
    "compose_transforms",
    "inverse_transform",
    "relative_transform",
    "PinholeCamera",
    "make_camera",
    "project_points",
    "unproject_points",
    "load_camera",
    "save_camera",
    "depth_to_3d",
    "depth_normals",
    "depth_warp",
]
