"""Room geometry, Lambertian reflector discretization, and device configs.

The coordinate frame has its origin at one floor corner with z pointing up:
the floor lies at z = 0, the ceiling at z = room.height, x spans the room
length and y the room width.  All lengths are meters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, GeometryError

# Face identifiers, in the order they are tiled by discretize().
FLOOR, CEILING, WALL_X0, WALL_X1, WALL_Y0, WALL_Y1 = range(6)

ALL_FACES = (FLOOR, CEILING, WALL_X0, WALL_X1, WALL_Y0, WALL_Y1)

# Per face: (fixed axis, True if the face sits at the far end of that axis,
# in-plane axis u, in-plane axis v).
_FACE_DEFS = (
    (2, False, 0, 1),  # floor
    (2, True, 0, 1),   # ceiling
    (0, False, 1, 2),  # wall at x = 0
    (0, True, 1, 2),   # wall at x = length
    (1, False, 0, 2),  # wall at y = 0
    (1, True, 0, 2),   # wall at y = width
)


@dataclass(frozen=True)
class Vec3:
    """Point or direction in meters."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        if not all(math.isfinite(c) for c in (self.x, self.y, self.z)):
            raise GeometryError(f"non-finite vector component: {self!r}")

    def to_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)

    @classmethod
    def from_array(cls, a) -> "Vec3":
        return cls(float(a[0]), float(a[1]), float(a[2]))


@dataclass(frozen=True)
class Room:
    """Empty rectangular room with diffusely reflecting boundary surfaces."""

    length: float
    width: float
    height: float
    reflectivity_walls: float = 0.8
    reflectivity_ceiling: float = 0.8
    reflectivity_floor: float = 0.3

    def __post_init__(self):
        for name in ("length", "width", "height"):
            if not getattr(self, name) > 0:
                raise ConfigurationError(f"room {name} must be > 0")
        for name in ("reflectivity_walls", "reflectivity_ceiling",
                     "reflectivity_floor"):
            rho = getattr(self, name)
            if not (0.0 <= rho <= 1.0):
                raise ConfigurationError(f"{name} must lie in [0, 1], got {rho}")

    @property
    def dimensions(self) -> np.ndarray:
        return np.array([self.length, self.width, self.height])

    @property
    def center(self) -> np.ndarray:
        return self.dimensions / 2.0

    @property
    def surface_area(self) -> float:
        L, W, H = self.length, self.width, self.height
        return 2.0 * (L * W + L * H + W * H)

    def face_reflectivity(self, face: int) -> float:
        if face == FLOOR:
            return self.reflectivity_floor
        if face == CEILING:
            return self.reflectivity_ceiling
        return self.reflectivity_walls

    def face_normal(self, face: int) -> np.ndarray:
        axis, at_max, _, _ = _FACE_DEFS[face]
        n = np.zeros(3)
        n[axis] = -1.0 if at_max else 1.0  # inward
        return n

    def face_plane_value(self, face: int) -> float:
        axis, at_max, _, _ = _FACE_DEFS[face]
        return float(self.dimensions[axis]) if at_max else 0.0


@dataclass(frozen=True)
class SurfaceElement:
    """Single discretized reflector patch on a room boundary."""

    center: Vec3
    normal: Vec3
    area: float
    reflectivity: float


@dataclass(eq=False)
class ElementGrid:
    """Vectorized collection of reflector patches tiling room faces.

    Per-element data is held in parallel numpy arrays; widths_u/widths_v are
    the in-plane patch extents along the face axes axis_u/axis_v (residual
    strips at non-divisible face edges are narrower than element_side).
    """

    room: Room
    element_side: float
    centers: np.ndarray        # (N, 3)
    normals: np.ndarray        # (N, 3)
    areas: np.ndarray          # (N,)
    reflectivities: np.ndarray  # (N,)
    face_ids: np.ndarray       # (N,) int
    widths_u: np.ndarray       # (N,)
    widths_v: np.ndarray       # (N,)
    axis_u: np.ndarray         # (N,) int
    axis_v: np.ndarray         # (N,) int

    def __len__(self) -> int:
        return self.centers.shape[0]

    @property
    def total_area(self) -> float:
        return float(self.areas.sum())

    def element(self, i: int) -> SurfaceElement:
        return SurfaceElement(
            center=Vec3.from_array(self.centers[i]),
            normal=Vec3.from_array(self.normals[i]),
            area=float(self.areas[i]),
            reflectivity=float(self.reflectivities[i]),
        )

    def iter_elements(self):
        for i in range(len(self)):
            yield self.element(i)

    def face_indices(self, face: int) -> np.ndarray:
        return np.nonzero(self.face_ids == face)[0]


def _axis_cells(dim: float, side: float):
    """Cell widths and centers tiling one axis of length `dim`.

    Near-integer ratios are snapped so float dust does not spawn sliver
    cells; the last cell absorbs any sub-micron residue so the widths sum
    to `dim` exactly.
    """
    n = int(math.floor(dim / side + 1e-9))
    n = max(n, 1)
    rem = dim - n * side
    if rem > side * 1e-6:
        widths = np.full(n + 1, side)
        widths[-1] = dim - n * side
    else:
        widths = np.full(n, side)
        widths[-1] = dim - side * (n - 1)
    edges = np.concatenate([[0.0], np.cumsum(widths)])
    centers = edges[:-1] + widths / 2.0
    return widths, centers


def discretize(room: Room, element_side: float, faces=ALL_FACES) -> ElementGrid:
    """Tile the selected room faces with square reflection elements.

    Faces whose extent is not an integer multiple of `element_side` get one
    residual strip of reduced width, so the summed element area equals the
    analytic face area.
    """
    if not element_side > 0:
        raise ConfigurationError("element_side must be > 0")
    if element_side > min(room.length, room.width, room.height):
        raise ConfigurationError(
            "element_side exceeds the smallest room dimension"
        )

    dims = room.dimensions
    parts = {k: [] for k in ("centers", "normals", "areas", "refl",
                             "face", "wu", "wv", "au", "av")}
    for face in faces:
        axis, at_max, au, av = _FACE_DEFS[face]
        wu, cu = _axis_cells(float(dims[au]), element_side)
        wv, cv = _axis_cells(float(dims[av]), element_side)
        gu, gv = np.meshgrid(cu, cv, indexing="ij")
        gwu, gwv = np.meshgrid(wu, wv, indexing="ij")
        n_face = gu.size

        centers = np.empty((n_face, 3))
        centers[:, au] = gu.ravel()
        centers[:, av] = gv.ravel()
        centers[:, axis] = room.face_plane_value(face)

        parts["centers"].append(centers)
        parts["normals"].append(np.tile(room.face_normal(face), (n_face, 1)))
        parts["areas"].append((gwu * gwv).ravel())
        parts["refl"].append(np.full(n_face, room.face_reflectivity(face)))
        parts["face"].append(np.full(n_face, face, dtype=np.intp))
        parts["wu"].append(gwu.ravel())
        parts["wv"].append(gwv.ravel())
        parts["au"].append(np.full(n_face, au, dtype=np.intp))
        parts["av"].append(np.full(n_face, av, dtype=np.intp))

    return ElementGrid(
        room=room,
        element_side=element_side,
        centers=np.concatenate(parts["centers"]),
        normals=np.concatenate(parts["normals"]),
        areas=np.concatenate(parts["areas"]),
        reflectivities=np.concatenate(parts["refl"]),
        face_ids=np.concatenate(parts["face"]),
        widths_u=np.concatenate(parts["wu"]),
        widths_v=np.concatenate(parts["wv"]),
        axis_u=np.concatenate(parts["au"]),
        axis_v=np.concatenate(parts["av"]),
    )


def cos_angle(frm: Vec3, to: Vec3, normal: Vec3) -> float:
    """Clamped cosine between a unit surface normal and the direction frm->to."""
    d = to.to_array() - frm.to_array()
    norm = float(np.linalg.norm(d))
    if norm == 0.0:
        raise GeometryError("zero-length direction between coincident points")
    c = float(np.dot(normal.to_array(), d / norm))
    return min(max(c, 0.0), 1.0)


@dataclass(frozen=True)
class ApConfig:
    """Ceiling access point emitting one or more steered Gaussian beams."""

    position: Vec3
    peak_power: float = 1e-3          # W, peak optical transmit intensity
    beam_divergence: float = 2.1e-3   # rad, 1/e^2 half-angle
    quantum_efficiency: float = 1.0

    def __post_init__(self):
        if not self.peak_power > 0:
            raise ConfigurationError("peak_power must be > 0")
        if not self.beam_divergence > 0:
            raise ConfigurationError("beam_divergence must be > 0")
        if not (0.0 < self.quantum_efficiency <= 1.0):
            raise ConfigurationError("quantum_efficiency must lie in (0, 1]")


@dataclass(frozen=True)
class ReceiverConfig:
    """Photodetector: position, orientation, aperture and responsivity."""

    position: Vec3
    normal: Vec3 = Vec3(0.0, 0.0, 1.0)
    area: float = 1e-4                # m^2
    fov_half_angle: float = math.pi / 2
    responsivity: float = 0.5         # A/W

    def __post_init__(self):
        if not self.area > 0:
            raise ConfigurationError("receiver area must be > 0")
        if not (0.0 < self.fov_half_angle <= math.pi / 2):
            raise ConfigurationError("fov_half_angle must lie in (0, pi/2]")
        if not self.responsivity > 0:
            raise ConfigurationError("responsivity must be > 0")
        n = self.normal.to_array()
        if abs(float(np.linalg.norm(n)) - 1.0) > 1e-9:
            raise ConfigurationError("receiver normal must be a unit vector")
