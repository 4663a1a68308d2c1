"""Steered-beam propagation and Lambertian multipath channel computation.

A beam is a Gaussian cone leaving an access point toward an aim point.  The
channel between a beam and a receiver is expressed as a time-binned impulse
response whose bins hold fractions of the beam's optical power, collected
either directly (line of sight) or after one or two diffuse bounces off the
room surfaces.  Surface patches re-emit intercepted power from their centers
in a Lambertian pattern.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .errors import ConfigurationError, GeometryError
from .geometry import ALL_FACES, ElementGrid, ReceiverConfig, Room, Vec3, ApConfig

SPEED_OF_LIGHT = 299_792_458.0
DEFAULT_BIN_DURATION = 0.01e-9  # s

# Aperture integration grid (per side) for line-of-sight capture.
LOS_APERTURE_SAMPLES = 64

# Beam interception: elements near the footprint are integrated with
# sub-cells no coarser than w/_SUBCELLS_PER_WAIST (w = local spot radius).
_SUBCELLS_PER_WAIST = 4
_MAX_SUBDIV = 160
_FOOTPRINT_REACH = 6.0  # refine elements within this many spot radii


@dataclass(frozen=True)
class BeamState:
    """One steered beam: source AP, target point, share of the AP's power."""

    ap: ApConfig
    aim_point: Vec3
    power_fraction: float = 1.0

    def __post_init__(self):
        if not (0.0 < self.power_fraction <= 1.0):
            raise ConfigurationError("power_fraction must lie in (0, 1]")
        if self.aim_point == self.ap.position:
            raise GeometryError("beam aim point coincides with the source")

    def source(self) -> np.ndarray:
        return self.ap.position.to_array()

    def axis(self) -> np.ndarray:
        d = self.aim_point.to_array() - self.source()
        return d / np.linalg.norm(d)

    def power(self) -> float:
        return self.power_fraction * self.ap.peak_power


@dataclass
class Cir:
    """Time-binned impulse response; bins are gains relative to beam power."""

    bin_duration: float
    bins: np.ndarray
    start_delay: float = 0.0

    def __post_init__(self):
        if not self.bin_duration > 0:
            raise ConfigurationError("bin_duration must be > 0")
        self.bins = np.asarray(self.bins, dtype=float)

    @property
    def n_bins(self) -> int:
        return int(self.bins.shape[0])


class Deposit(NamedTuple):
    """Beam power intercepted by surface elements of one grid."""

    indices: np.ndarray   # element indices into the grid
    power: np.ndarray     # W intercepted per element
    distance: np.ndarray  # m from the beam source to each element center


def dc_gain(cir: Cir) -> float:
    """Total channel gain: the sum over all impulse-response bins."""
    return float(cir.bins.sum())


def _cone_irradiance(source, axis, power, divergence, pts) -> np.ndarray:
    """Gaussian-cone irradiance (W/m^2) at an array of points.

    The 1/e^2 spot radius grows linearly with axial distance, w = d * theta,
    and the transverse integral at any axial distance equals `power`.
    Points at or behind the source plane get zero.
    """
    rel = np.atleast_2d(pts) - source
    d = rel @ axis
    out = np.zeros(d.shape[0])
    fwd = d > 0.0
    if not np.any(fwd):
        return out
    relf = rel[fwd]
    df = d[fwd]
    w = divergence * df
    r2 = np.sum((relf - df[:, None] * axis) ** 2, axis=1)
    out[fwd] = (2.0 * power / (np.pi * w**2)) * np.exp(-2.0 * r2 / w**2)
    return out


def beam_intensity(beam: BeamState, point: Vec3) -> float:
    """Irradiance of the beam at a single point, in W/m^2."""
    if point == beam.ap.position:
        raise GeometryError("intensity requested at the beam source")
    return float(
        _cone_irradiance(
            beam.source(), beam.axis(), beam.power(),
            beam.ap.beam_divergence, point.to_array()[None, :],
        )[0]
    )


def _orthonormal_basis(normal: np.ndarray):
    """Two unit vectors spanning the plane orthogonal to `normal`."""
    ref = np.array([1.0, 0.0, 0.0])
    if abs(normal @ ref) > 0.9:
        ref = np.array([0.0, 1.0, 0.0])
    e1 = ref - (ref @ normal) * normal
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(normal, e1)
    return e1, e2


def los_gain(beam: BeamState, rx: ReceiverConfig,
             samples: int = LOS_APERTURE_SAMPLES) -> float:
    """Line-of-sight gain: fraction of beam power captured by the detector.

    The irradiance times the incidence cosine is integrated numerically over
    a disc aperture of the configured area; points whose incidence angle
    exceeds the field of view contribute nothing.
    """
    src = beam.source()
    axis = beam.axis()
    n_rx = rx.normal.to_array()
    radius = math.sqrt(rx.area / math.pi)
    e1, e2 = _orthonormal_basis(n_rx)

    step = 2.0 * radius / samples
    offs = -radius + (np.arange(samples) + 0.5) * step
    uu, vv = np.meshgrid(offs, offs, indexing="ij")
    mask = (uu**2 + vv**2) <= radius**2
    u = uu[mask].ravel()
    v = vv[mask].ravel()
    pts = rx.position.to_array() + u[:, None] * e1 + v[:, None] * e2

    I = _cone_irradiance(src, axis, beam.power(), beam.ap.beam_divergence, pts)
    arrival = pts - src
    dist = np.linalg.norm(arrival, axis=1)
    ok = dist > 0
    cos_inc = np.zeros_like(I)
    cos_inc[ok] = np.clip(-(arrival[ok] @ n_rx) / dist[ok], 0.0, 1.0)
    # FOV gating on the incidence angle.
    theta = np.arccos(cos_inc)
    cos_inc[theta > rx.fov_half_angle] = 0.0

    captured = float(np.sum(I * cos_inc) * step * step)
    return captured / beam.power()


def _terminal_face(room: Room, src: np.ndarray, axis: np.ndarray):
    """First room face hit by the ray src + t*axis, t > 0.

    Returns (face id, hit point, axial distance).  The source must lie
    inside the room.
    """
    best_t = math.inf
    best = None
    dims = room.dimensions
    for face in ALL_FACES:
        normal = room.face_normal(face)
        k = int(np.nonzero(normal)[0][0])
        denom = axis[k]
        if abs(denom) < 1e-15:
            continue
        t = (room.face_plane_value(face) - src[k]) / denom
        if t <= 1e-12 or t >= best_t:
            continue
        p = src + t * axis
        others = [a for a in range(3) if a != k]
        if all(-1e-9 <= p[a] <= dims[a] + 1e-9 for a in others):
            best_t = t
            best = (face, p, t)
    if best is None:
        raise GeometryError("beam axis does not reach any room face")
    return best


def beam_surface_deposit(beam: BeamState, grid: ElementGrid) -> Deposit:
    """Beam power intercepted by elements on the face the beam axis reaches.

    Elements are sampled at their centers; the ones inside the beam footprint
    are re-integrated on a sub-grid fine enough to resolve the spot, so the
    deposited total stays at the beam power regardless of element size.
    """
    src = beam.source()
    axis = beam.axis()
    theta = beam.ap.beam_divergence
    power = beam.power()
    face, hit, t_hit = _terminal_face(grid.room, src, axis)
    w_hit = theta * t_hit

    idx = grid.face_indices(face)
    if idx.size == 0:
        return Deposit(idx, np.zeros(0), np.zeros(0))
    centers = grid.centers[idx]
    normal = grid.room.face_normal(face)

    rel = centers - src
    dist = np.linalg.norm(rel, axis=1)
    cos_inc = np.clip(-(rel @ normal) / dist, 0.0, None)
    intensity = _cone_irradiance(src, axis, power, theta, centers)
    p_elem = intensity * grid.areas[idx] * cos_inc

    # Refine elements whose footprint-sampled value is unreliable: the
    # center-point rule breaks down once the element is not small next to
    # the local spot radius.
    half_diag = 0.5 * np.hypot(grid.widths_u[idx], grid.widths_v[idx])
    near = np.linalg.norm(centers - hit, axis=1) <= (
        _FOOTPRINT_REACH * w_hit + half_diag
    )
    for j in np.nonzero(near)[0]:
        gi = idx[j]
        wu = float(grid.widths_u[gi])
        wv = float(grid.widths_v[gi])
        target = max(w_hit / _SUBCELLS_PER_WAIST, 1e-6)
        nu = min(max(int(math.ceil(wu / target)), 1), _MAX_SUBDIV)
        nv = min(max(int(math.ceil(wv / target)), 1), _MAX_SUBDIV)
        if nu == 1 and nv == 1:
            continue
        au = int(grid.axis_u[gi])
        av = int(grid.axis_v[gi])
        ou = (np.arange(nu) + 0.5) / nu - 0.5
        ov = (np.arange(nv) + 0.5) / nv - 0.5
        guu, gvv = np.meshgrid(ou * wu, ov * wv, indexing="ij")
        sub = np.tile(centers[j], (nu * nv, 1))
        sub[:, au] += guu.ravel()
        sub[:, av] += gvv.ravel()
        sub_rel = sub - src
        sub_dist = np.linalg.norm(sub_rel, axis=1)
        sub_cos = np.clip(-(sub_rel @ normal) / sub_dist, 0.0, None)
        sub_i = _cone_irradiance(src, axis, power, theta, sub)
        p_elem[j] = float(
            np.sum(sub_i * sub_cos) * (wu * wv) / (nu * nv)
        )

    nz = p_elem > 0.0
    return Deposit(idx[nz], p_elem[nz], dist[nz])


def _element_to_receiver(grid: ElementGrid, indices: np.ndarray,
                         rx: ReceiverConfig):
    """Lambertian re-emission capture factors for a set of elements.

    Returns (transfer, distance): transfer already includes the element
    reflectivity, the emission cosine over pi, the receiver aperture solid
    angle and FOV gating.
    """
    centers = grid.centers[indices]
    normals = grid.normals[indices]
    to_rx = rx.position.to_array() - centers
    d = np.linalg.norm(to_rx, axis=1)
    ok = d > 1e-12
    cos_emit = np.zeros_like(d)
    cos_rx = np.zeros_like(d)
    cos_emit[ok] = np.clip(
        np.sum(normals[ok] * to_rx[ok], axis=1) / d[ok], 0.0, None
    )
    n_rx = rx.normal.to_array()
    cos_rx[ok] = np.clip(-(to_rx[ok] @ n_rx) / d[ok], 0.0, 1.0)
    theta = np.arccos(cos_rx)
    cos_rx[theta > rx.fov_half_angle] = 0.0

    transfer = np.zeros_like(d)
    transfer[ok] = (
        grid.reflectivities[indices][ok]
        * (cos_emit[ok] / np.pi)
        * (rx.area * cos_rx[ok] / d[ok] ** 2)
    )
    return transfer, d


def _bin_contributions(delays: np.ndarray, gains: np.ndarray,
                       bin_duration: float) -> Cir:
    if delays.size == 0:
        return Cir(bin_duration=bin_duration, bins=np.zeros(1))
    indices = np.floor(delays / bin_duration).astype(np.intp)
    bins = np.bincount(indices, weights=gains, minlength=int(indices.max()) + 1)
    return Cir(bin_duration=bin_duration, bins=bins)


def first_order_cir(beam: BeamState, grid1: ElementGrid, rx: ReceiverConfig,
                    bin_duration: float = DEFAULT_BIN_DURATION,
                    deposit: Optional[Deposit] = None) -> Cir:
    """Impulse response of single-bounce paths beam -> element -> receiver."""
    if deposit is None:
        deposit = beam_surface_deposit(beam, grid1)
    transfer, d_rx = _element_to_receiver(grid1, deposit.indices, rx)
    gains = deposit.power * transfer / beam.power()
    delays = (deposit.distance + d_rx) / SPEED_OF_LIGHT
    keep = gains > 0.0
    return _bin_contributions(delays[keep], gains[keep], bin_duration)


def second_order_cir(beam: BeamState, grid2: ElementGrid, rx: ReceiverConfig,
                     bin_duration: float = DEFAULT_BIN_DURATION,
                     deposit: Optional[Deposit] = None) -> Cir:
    """Impulse response of double-bounce paths through two surface elements.

    The first element diffuses its intercepted power toward every second
    element; co-planar element pairs fall out naturally through their zero
    mutual cosine.
    """
    if deposit is None:
        deposit = beam_surface_deposit(beam, grid2)
    if deposit.indices.size == 0:
        return Cir(bin_duration=bin_duration, bins=np.zeros(1))

    transfer2, d2_rx = _element_to_receiver(
        grid2, np.arange(len(grid2)), rx
    )
    centers = grid2.centers
    normals = grid2.normals
    areas = grid2.areas
    rho = grid2.reflectivities

    all_gains = []
    all_delays = []
    power = beam.power()
    for i, gi in enumerate(deposit.indices):
        p1 = float(deposit.power[i])
        if p1 <= 0.0:
            continue
        v12 = centers - centers[gi]
        d12 = np.linalg.norm(v12, axis=1)
        ok = d12 > 1e-12
        cos1 = np.zeros_like(d12)
        cos2 = np.zeros_like(d12)
        cos1[ok] = np.clip((v12[ok] @ normals[gi]) / d12[ok], 0.0, None)
        cos2[ok] = np.clip(
            -np.sum(v12[ok] * normals[ok], axis=1) / d12[ok], 0.0, None
        )
        p2 = np.zeros_like(d12)
        p2[ok] = (
            p1 * rho[gi] * (cos1[ok] / np.pi)
            * (areas[ok] * cos2[ok] / d12[ok] ** 2)
        )
        gains = p2 * transfer2 / power
        keep = gains > 0.0
        if not np.any(keep):
            continue
        delays = (
            float(deposit.distance[i]) + d12[keep] + d2_rx[keep]
        ) / SPEED_OF_LIGHT
        all_gains.append(gains[keep])
        all_delays.append(delays)

    if not all_gains:
        return Cir(bin_duration=bin_duration, bins=np.zeros(1))
    return _bin_contributions(
        np.concatenate(all_delays), np.concatenate(all_gains), bin_duration
    )


def _sum_cirs(parts) -> Cir:
    parts = [p for p in parts if p is not None]
    if not parts:
        return Cir(bin_duration=DEFAULT_BIN_DURATION, bins=np.zeros(1))
    durations = {p.bin_duration for p in parts}
    if len(durations) != 1:
        raise ConfigurationError(
            f"mismatched bin durations: {sorted(durations)}"
        )
    delays = {p.start_delay for p in parts}
    if len(delays) != 1:
        raise ConfigurationError("mismatched start delays")
    n = max(p.n_bins for p in parts)
    bins = np.zeros(n)
    for p in parts:
        bins[: p.n_bins] += p.bins
    return Cir(bin_duration=parts[0].bin_duration, bins=bins,
               start_delay=parts[0].start_delay)


def total_cir(beam: BeamState, rx: ReceiverConfig,
              grid1: Optional[ElementGrid] = None,
              grid2: Optional[ElementGrid] = None,
              reflections: int = 2,
              bin_duration: float = DEFAULT_BIN_DURATION,
              aperture_samples: int = LOS_APERTURE_SAMPLES,
              deposits=None) -> Cir:
    """Line-of-sight impulse plus the configured reflection orders.

    `deposits` may carry precomputed (grid1 deposit, grid2 deposit) so that
    one beam's footprint is reused across many receivers.
    """
    if reflections not in (0, 1, 2):
        raise ConfigurationError("reflections must be 0, 1 or 2")
    parts = []

    h_los = los_gain(beam, rx, samples=aperture_samples)
    d_direct = float(
        np.linalg.norm(rx.position.to_array() - beam.source())
    )
    los_bin = int(d_direct / SPEED_OF_LIGHT / bin_duration)
    bins = np.zeros(los_bin + 1)
    bins[los_bin] = h_los
    parts.append(Cir(bin_duration=bin_duration, bins=bins))

    dep1 = dep2 = None
    if deposits is not None:
        dep1, dep2 = deposits
    if reflections >= 1:
        if grid1 is None:
            raise ConfigurationError("reflections >= 1 requires grid1")
        parts.append(first_order_cir(beam, grid1, rx, bin_duration, dep1))
    if reflections >= 2:
        if grid2 is None:
            raise ConfigurationError("reflections == 2 requires grid2")
        parts.append(second_order_cir(beam, grid2, rx, bin_duration, dep2))
    return _sum_cirs(parts)


def cir_text_lines(cir: Cir):
    """Dump format: one header line, then one gain value per bin."""
    yield (
        f"# bin_duration_s={cir.bin_duration!r} "
        f"start_delay_s={cir.start_delay!r} n_bins={cir.n_bins}"
    )
    for value in cir.bins:
        yield repr(float(value))
