"""Spherical direction algebra and the forward/inverse projection pipelines.

World frame: the panorama sphere is centred at the origin, ``theta`` is the
polar angle measured from +Z and ``phi`` the azimuth in the XY plane.
Camera frame: the camera looks down -Z with +Y up and +X to the right.
Image frame: ``u`` grows to the right from the left edge, ``v`` grows upward
from the BOTTOM edge.  Raster (top-down) rows only appear in ``panorama``.

All angles are radians.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

TWO_PI = 2.0 * math.pi


class ZeroVector(ValueError):
    """Raised when a direction is requested for the null vector."""


class BehindCamera(ValueError):
    """Raised when a camera-space point does not lie strictly in front of the camera."""


def wrap_angle(phi: float) -> float:
    """Map an azimuth into (-pi, pi]."""
    phi = math.fmod(phi, TWO_PI)
    if phi <= -math.pi:
        phi += TWO_PI
    elif phi > math.pi:
        phi -= TWO_PI
    return phi


@dataclass(frozen=True)
class Direction:
    """A viewing or target direction: polar (tilt) angle and azimuth (pan)."""

    theta: float
    phi: float

    def normalized(self) -> "Direction":
        theta, phi = self.theta, wrap_angle(self.phi)
        # fold a polar angle that went past a pole back onto the sphere
        theta = math.fmod(theta, TWO_PI)
        if theta < 0.0:
            theta += TWO_PI
        if theta > math.pi:
            theta = TWO_PI - theta
            phi = wrap_angle(phi + math.pi)
        return Direction(theta, phi)

    @classmethod
    def from_degrees(cls, tilt_deg: float, pan_deg: float) -> "Direction":
        return cls(math.radians(tilt_deg), math.radians(pan_deg)).normalized()

    def degrees(self) -> tuple[float, float]:
        """Return ``(tilt_deg, pan_deg)``."""
        return math.degrees(self.theta), math.degrees(self.phi)

    def unit_vector(self) -> np.ndarray:
        st = math.sin(self.theta)
        return np.array([st * math.cos(self.phi), st * math.sin(self.phi), math.cos(self.theta)])


class ImagePoint(NamedTuple):
    """Pixel coordinates with the origin at the bottom-left image corner."""

    u: float
    v: float


@dataclass(frozen=True)
class CameraIntrinsics:
    """Frustum parameters of the virtual camera.

    ``vfov`` is the vertical field of view in radians; the aspect ratio is
    derived from the output size (square pixels).  ``near`` never changes
    the projected pixel coordinates and defaults to 1.
    """

    vfov: float
    width: int
    height: int
    near: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.vfov < math.pi:
            raise ValueError(f"vertical FOV must lie in (0, pi), got {self.vfov}")
        if self.width < 1 or self.height < 1:
            raise ValueError(f"image size must be positive, got {self.width}x{self.height}")
        if self.near <= 0.0:
            raise ValueError("near distance must be positive")

    @classmethod
    def from_degrees(cls, vfov_deg: float, width: int, height: int) -> "CameraIntrinsics":
        return cls(math.radians(vfov_deg), int(width), int(height))

    @property
    def aspect(self) -> float:
        return self.width / self.height

    @property
    def half_tan(self) -> float:
        return math.tan(0.5 * self.vfov)

    @property
    def center(self) -> ImagePoint:
        return ImagePoint(0.5 * self.width, 0.5 * self.height)

    @property
    def focal_px(self) -> float:
        """Focal length in pixels (identical on both axes)."""
        return 0.5 * self.height / self.half_tan

    def contains(self, p: ImagePoint) -> bool:
        return 0.0 <= p.u < self.width and 0.0 <= p.v < self.height

    def with_vfov(self, vfov: float) -> "CameraIntrinsics":
        return CameraIntrinsics(vfov, self.width, self.height, self.near)


def direction_from_point(p) -> Direction:
    x, y, z = (float(c) for c in p)
    norm = math.sqrt(x * x + y * y + z * z)
    if norm == 0.0:
        raise ZeroVector("direction of the zero vector is undefined")
    # same angle as acos(z / |p|), without its loss of precision near the poles
    theta = math.atan2(math.hypot(x, y), z)
    phi = math.atan2(y, x) if (x != 0.0 or y != 0.0) else 0.0
    return Direction(theta, wrap_angle(phi))


def directions_from_points(p: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised ``direction_from_point`` over the last axis of ``p``."""
    x, y, z = p[..., 0], p[..., 1], p[..., 2]
    theta = np.arctan2(np.hypot(x, y), z)
    phi = np.arctan2(y, x)  # atan2(0, 0) == 0, the pole convention
    return theta, phi


def rot_x(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_z(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def view_matrix(d: Direction) -> np.ndarray:
    """World-to-camera rotation for a camera aimed along ``d``.

    Spin about Z by ``pi/2 - phi`` so the camera azimuth lands on +Y, then
    about X by ``theta - pi`` so the optical axis lands on -Z.
    """
    return rot_x(d.theta - math.pi) @ rot_z(0.5 * math.pi - d.phi)


def project_camera_point(t_cam, intr: CameraIntrinsics) -> ImagePoint:
    x, y, z = (float(c) for c in t_cam)
    if not z < 0.0:
        raise BehindCamera(f"camera-space depth {z} is not in front of the camera")
    depth = -z
    tan_half = intr.half_tan
    u = intr.width * (x / (2.0 * intr.aspect * depth * tan_half) + 0.5)
    v = intr.height * (y / (2.0 * depth * tan_half) + 0.5)
    return ImagePoint(u, v)


def project_camera_points(t_cam: np.ndarray, intr: CameraIntrinsics):
    """Vectorised projection; returns ``(u, v, in_front)``.

    Entries that are not in front of the camera get NaN coordinates.
    """
    x, y, z = t_cam[..., 0], t_cam[..., 1], t_cam[..., 2]
    in_front = z < 0.0
    depth = np.where(in_front, -z, np.nan)
    tan_half = intr.half_tan
    u = intr.width * (x / (2.0 * intr.aspect * depth * tan_half) + 0.5)
    v = intr.height * (y / (2.0 * depth * tan_half) + 0.5)
    return u, v, in_front


def project_world_point(t, pose: Direction, intr: CameraIntrinsics) -> ImagePoint:
    return project_camera_point(view_matrix(pose) @ np.asarray(t, dtype=float), intr)


def image_to_camera(u, v, intr: CameraIntrinsics):
    """Lift image coordinates onto the near plane in camera space.

    Works on scalars or arrays and returns an array with a trailing axis of 3.
    """
    n = intr.near
    tan_half = intr.half_tan
    x = 2.0 * n * intr.aspect * (np.asarray(u, dtype=float) / intr.width - 0.5) * tan_half
    y = 2.0 * n * (np.asarray(v, dtype=float) / intr.height - 0.5) * tan_half
    z = np.full(np.broadcast(x, y).shape, -n)
    return np.stack(np.broadcast_arrays(x, y, z), axis=-1)


def unproject_image_point(p: ImagePoint, pose: Direction, intr: CameraIntrinsics) -> Direction:
    cam = image_to_camera(p[0], p[1], intr)
    # the view matrix is a rotation, so its inverse is its transpose
    world = view_matrix(pose).T @ cam
    return direction_from_point(world)


# --- batched pipelines: one pose and frustum per sample ------------------------


def view_matrices(theta, phi) -> np.ndarray:
    """Stack of ``view_matrix`` for arrays of angles, shape ``(..., 3, 3)``."""
    theta, phi = np.broadcast_arrays(np.asarray(theta, float), np.asarray(phi, float))
    a = 0.5 * np.pi - phi
    b = theta - np.pi
    ca, sa, cb, sb = np.cos(a), np.sin(a), np.cos(b), np.sin(b)
    zero = np.zeros_like(ca)
    # rot_x(b) @ rot_z(a), multiplied out
    rows = [
        [ca, -sa, zero],
        [cb * sa, cb * ca, -sb],
        [sb * sa, sb * ca, cb],
    ]
    return np.stack([np.stack(r, axis=-1) for r in rows], axis=-2)


def project_world_points(t, theta, phi, vfov, width, height):
    """Batched forward pipeline; returns ``(u, v, in_front)`` like ``project_camera_points``."""
    cam = np.einsum("...ij,...j->...i", view_matrices(theta, phi), np.asarray(t, float))
    x, y, z = cam[..., 0], cam[..., 1], cam[..., 2]
    in_front = z < 0.0
    depth = np.where(in_front, -z, np.nan)
    tan_half = np.tan(0.5 * np.asarray(vfov, float))
    width = np.asarray(width, float)
    height = np.asarray(height, float)
    u = width * (x / (2.0 * (width / height) * depth * tan_half) + 0.5)
    v = height * (y / (2.0 * depth * tan_half) + 0.5)
    return u, v, in_front


def unproject_image_points(u, v, theta, phi, vfov, width, height):
    """Batched inverse pipeline; returns world unit vectors, shape ``(..., 3)``."""
    tan_half = np.tan(0.5 * np.asarray(vfov, float))
    width = np.asarray(width, float)
    height = np.asarray(height, float)
    x = 2.0 * (width / height) * (np.asarray(u, float) / width - 0.5) * tan_half
    y = 2.0 * (np.asarray(v, float) / height - 0.5) * tan_half
    cam = np.stack(np.broadcast_arrays(x, y, -np.ones_like(x)), axis=-1)
    world = np.einsum("...ji,...j->...i", view_matrices(theta, phi), cam)
    return world / np.linalg.norm(world, axis=-1, keepdims=True)
