#!/usr/bin/env python3
"""
Mesh construction
1D offset grids with ghost bookkeeping, analytic 2D geometries and
embedded Cartesian grids classified into interior / ghost / far-exterior points
"""

import os
import math
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from errors import MeshError, GeometryError

logger = logging.getLogger(__name__)

INTERIOR = 0
GHOST = 1
FAR = 2
BOX = 3

SIDES = ('left', 'right', 'bottom', 'top')
SIDE_CONDITIONS = ('geometry', 'inflow-state', 'outflow', 'reflect')

# dx/dy outside this range empties the 2D alpha interval
MAX_ASPECT = 2.0

TIE_TOL = 1e-12
LATTICE_TOL = 1e-9


def debug_sentinels() -> bool:
    return os.environ.get('SILW_DEBUG', '') not in ('', '0')


@dataclass(frozen=True)
class OffsetGrid1D:
    """Uniform grid x_0..x_N with the boundaries C_a*dx and C_b*dx away from the end points"""
    domain_left: float
    domain_right: float
    N: int
    C_a: float
    C_b: float
    n_ghost: int

    @property
    def dx(self) -> float:
        return (self.domain_right - self.domain_left) / (self.C_a + self.C_b + self.N)

    @property
    def x0(self) -> float:
        return self.domain_left + self.C_a * self.dx

    @property
    def xN(self) -> float:
        return self.domain_right - self.C_b * self.dx

    @property
    def size(self) -> int:
        """Length of the array including ghosts on both sides"""
        return self.N + 1 + 2 * self.n_ghost

    @property
    def interior(self) -> slice:
        return slice(self.n_ghost, self.n_ghost + self.N + 1)

    def coordinates(self) -> np.ndarray:
        """Interior coordinates x_0..x_N"""
        return self.x0 + self.dx * np.arange(self.N + 1)

    def coordinates_with_ghosts(self) -> np.ndarray:
        return self.x0 + self.dx * np.arange(-self.n_ghost, self.N + 1 + self.n_ghost)

    def ghost_coordinates(self, side: str) -> np.ndarray:
        """Ghost coordinates ordered outward: x_{-1}, x_{-2}, ... or x_{N+1}, x_{N+2}, ..."""
        p = np.arange(1, self.n_ghost + 1)
        if side == 'left':
            return self.x0 - p * self.dx
        if side == 'right':
            return self.xN + p * self.dx
        raise MeshError(f"unknown side {side!r}")

    def offset(self, side: str) -> float:
        return self.C_a if side == 'left' else self.C_b

    def boundary(self, side: str) -> float:
        return self.domain_left if side == 'left' else self.domain_right

    def normal(self, side: str) -> float:
        return -1.0 if side == 'left' else 1.0


def build_offset_grid(domain_left: float, domain_right: float, N: int,
                      C_a: float, C_b: float, n_ghost: int) -> OffsetGrid1D:
    """Build the offset mesh dx = (R - L)/(C_a + C_b + N), x_0 = L + C_a dx"""
    if not domain_right > domain_left:
        raise MeshError(f"empty domain [{domain_left}, {domain_right}]")
    for name, value in (('C_a', C_a), ('C_b', C_b)):
        if not 0.0 <= value < 1.0:
            raise MeshError(f"{name}={value} outside [0, 1)")
    if n_ghost < 1:
        raise MeshError(f"n_ghost must be positive, got {n_ghost}")
    if N < 2 * n_ghost + 1:
        raise MeshError(f"N={N} too small for {n_ghost} ghost points per side")

    grid = OffsetGrid1D(float(domain_left), float(domain_right), int(N),
                        float(C_a), float(C_b), int(n_ghost))
    logger.debug(f"Offset grid N={N} dx={grid.dx:.6g} C_a={C_a} C_b={C_b}")
    return grid


# ---------------------------------------------------------------------------
# Analytic geometries. signed_distance < 0 inside the fluid; normals point out
# of the fluid.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FootPoint:
    point: np.ndarray
    normal: np.ndarray
    theta: float
    distance: float


def _foot(point, normal, distance) -> FootPoint:
    normal = np.asarray(normal, dtype=float)
    return FootPoint(np.asarray(point, dtype=float), normal,
                     math.atan2(normal[1], normal[0]), float(distance))


@dataclass(frozen=True)
class Circle:
    center: Tuple[float, float]
    radius: float
    fluid_inside: bool = True

    kind = 'circle'

    def signed_distance(self, x, y):
        r = np.hypot(np.asarray(x) - self.center[0], np.asarray(y) - self.center[1])
        return r - self.radius if self.fluid_inside else self.radius - r

    def foot_point(self, P) -> FootPoint:
        P = np.asarray(P, dtype=float)
        c = np.asarray(self.center, dtype=float)
        r = float(np.hypot(*(P - c)))
        if r < TIE_TOL * max(1.0, self.radius):
            raise GeometryError("point at the circle center has no unique foot point", location=tuple(P))
        radial = (P - c) / r
        normal = radial if self.fluid_inside else -radial
        return _foot(c + self.radius * radial, normal, abs(r - self.radius))


@dataclass(frozen=True)
class HalfPlane:
    """Fluid on the side opposite to the outward normal"""
    point: Tuple[float, float]
    normal: Tuple[float, float]

    kind = 'half-plane'

    def __post_init__(self):
        n = np.asarray(self.normal, dtype=float)
        norm = float(np.hypot(*n))
        if norm == 0.0:
            raise GeometryError("half-plane normal must be nonzero")
        object.__setattr__(self, 'normal', (n[0] / norm, n[1] / norm))

    def signed_distance(self, x, y):
        return ((np.asarray(x) - self.point[0]) * self.normal[0]
                + (np.asarray(y) - self.point[1]) * self.normal[1])

    def foot_point(self, P) -> FootPoint:
        P = np.asarray(P, dtype=float)
        n = np.asarray(self.normal)
        sd = float(self.signed_distance(P[0], P[1]))
        return _foot(P - sd * n, n, abs(sd))


@dataclass(frozen=True)
class Rectangle:
    """Axis-aligned box [x_lo, x_hi] x [y_lo, y_hi]"""
    lower: Tuple[float, float]
    upper: Tuple[float, float]
    fluid_inside: bool = True

    kind = 'rectangle'

    def _box_distance(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        qx = np.maximum(self.lower[0] - x, x - self.upper[0])
        qy = np.maximum(self.lower[1] - y, y - self.upper[1])
        outside = np.hypot(np.maximum(qx, 0.0), np.maximum(qy, 0.0))
        inside = np.minimum(np.maximum(qx, qy), 0.0)
        return outside + inside

    def signed_distance(self, x, y):
        d = self._box_distance(x, y)
        return d if self.fluid_inside else -d

    def foot_point(self, P) -> FootPoint:
        P = np.asarray(P, dtype=float)
        lo = np.asarray(self.lower, dtype=float)
        hi = np.asarray(self.upper, dtype=float)
        scale = max(1.0, float(np.max(np.abs(hi - lo))))
        inside_box = bool(np.all(P >= lo) and np.all(P <= hi))

        if self.fluid_inside and not inside_box:
            Pa = np.clip(P, lo, hi)
            offset = P - Pa
            dist = float(np.hypot(*offset))
            return _foot(Pa, offset / dist, dist)

        # nearest face; normals point out of the fluid
        gaps = [(P[0] - lo[0], 0, lo[0], (-1.0, 0.0)), (hi[0] - P[0], 0, hi[0], (1.0, 0.0)),
                (P[1] - lo[1], 1, lo[1], (0.0, -1.0)), (hi[1] - P[1], 1, hi[1], (0.0, 1.0))]
        gaps.sort(key=lambda item: item[0])
        if not self.fluid_inside and gaps[1][0] - gaps[0][0] <= TIE_TOL * scale:
            raise GeometryError("point equidistant from two rectangle faces", location=tuple(P))
        gap, axis, value, normal = gaps[0]
        Pa = P.copy()
        Pa[axis] = value
        if not self.fluid_inside:
            normal = (-normal[0], -normal[1])
        return _foot(Pa, normal, abs(gap))


@dataclass(frozen=True)
class Wedge:
    """Fluid above a floor y = vertex_y (x <= vertex_x) continued by a ramp inclined at `angle`"""
    vertex: Tuple[float, float]
    angle: float

    kind = 'wedge'

    @property
    def tangent(self) -> np.ndarray:
        return np.array([math.cos(self.angle), math.sin(self.angle)])

    @property
    def ramp_normal(self) -> np.ndarray:
        return np.array([math.sin(self.angle), -math.cos(self.angle)])

    def _floor_height(self, x):
        x = np.asarray(x, dtype=float)
        vx, vy = self.vertex
        return np.where(x <= vx, vy, vy + (x - vx) * math.tan(self.angle))

    def _pieces(self, x, y):
        """Distances to the floor ray and to the ramp ray"""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        vx, vy = self.vertex
        fx = np.minimum(x, vx)
        d_floor = np.hypot(x - fx, y - vy)
        t = np.maximum(0.0, (x - vx) * math.cos(self.angle) + (y - vy) * math.sin(self.angle))
        d_ramp = np.hypot(x - (vx + t * math.cos(self.angle)), y - (vy + t * math.sin(self.angle)))
        return d_floor, d_ramp, fx, t

    def signed_distance(self, x, y):
        d_floor, d_ramp, _, _ = self._pieces(x, y)
        dist = np.minimum(d_floor, d_ramp)
        fluid = np.asarray(y) > self._floor_height(x)
        return np.where(fluid, -dist, dist)

    def foot_point(self, P) -> FootPoint:
        P = np.asarray(P, dtype=float)
        V = np.asarray(self.vertex, dtype=float)
        d_floor, d_ramp, fx, t = (float(v) for v in self._pieces(P[0], P[1]))
        floor_foot = np.array([fx, V[1]])
        ramp_foot = V + t * self.tangent
        scale = max(1.0, float(np.hypot(*V)))

        if abs(d_floor - d_ramp) <= TIE_TOL * scale:
            if np.allclose(floor_foot, V) and np.allclose(ramp_foot, V):
                offset = P - V
                dist = float(np.hypot(*offset))
                if dist == 0.0:
                    raise GeometryError("wedge vertex has no unique normal", location=tuple(P))
                return _foot(V, offset / dist, dist)
            raise GeometryError("point equidistant from floor and ramp", location=tuple(P))

        if d_floor < d_ramp:
            return _foot(floor_foot, (0.0, -1.0), d_floor)
        return _foot(ramp_foot, self.ramp_normal, d_ramp)


GEOMETRY_KINDS = {
    'circle': Circle,
    'half-plane': HalfPlane,
    'rectangle': Rectangle,
    'wedge': Wedge,
}


def foot_point_and_normal(geometry, P) -> Tuple[np.ndarray, np.ndarray, float]:
    """Closest boundary point P_a, unit outward normal n and its angle theta"""
    foot = geometry.foot_point(P)
    return foot.point, foot.normal, foot.theta


# ---------------------------------------------------------------------------
# Embedded 2D grid
# ---------------------------------------------------------------------------

@dataclass
class EmbeddedGrid2D:
    """Cell-centred Cartesian grid over a box, padded by n_ghost on every side"""
    geometry: object
    x_lo: float
    y_lo: float
    dx: float
    dy: float
    nx: int
    ny: int
    n_ghost: int
    sides: Dict[str, str]
    kind: np.ndarray = None
    ghost_index: Tuple[np.ndarray, np.ndarray] = None
    foot_points: np.ndarray = None
    normals: np.ndarray = None
    thetas: np.ndarray = None
    distances: np.ndarray = None
    box_ghosts: Dict[str, Tuple[np.ndarray, np.ndarray]] = field(default_factory=dict)

    @property
    def delta(self) -> float:
        return math.hypot(self.dx, self.dy)

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.nx + 2 * self.n_ghost, self.ny + 2 * self.n_ghost)

    @property
    def x(self) -> np.ndarray:
        """Padded x coordinates"""
        return self.x_lo + (np.arange(-self.n_ghost, self.nx + self.n_ghost) + 0.5) * self.dx

    @property
    def y(self) -> np.ndarray:
        return self.y_lo + (np.arange(-self.n_ghost, self.ny + self.n_ghost) + 0.5) * self.dy

    def meshgrid(self) -> Tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.x, self.y, indexing='ij')

    @property
    def interior_mask(self) -> np.ndarray:
        return self.kind == INTERIOR

    @property
    def n_ghosts(self) -> int:
        return len(self.ghost_index[0])

    def interior_points(self) -> np.ndarray:
        X, Y = self.meshgrid()
        mask = self.interior_mask
        return np.column_stack([X[mask], Y[mask]])


def _read_mask(interior: np.ndarray, width: int) -> np.ndarray:
    """Points touched by the dimension-by-dimension stencil of some interior point"""
    reads = np.zeros_like(interior)
    for m in range(1, width + 1):
        reads[m:, :] |= interior[:-m, :]
        reads[:-m, :] |= interior[m:, :]
        reads[:, m:] |= interior[:, :-m]
        reads[:, :-m] |= interior[:, m:]
    return reads


def _snap_to_lattice(lo: float, hi: float, anchor: float, h: float) -> Tuple[float, float]:
    first = math.floor((lo - anchor) / h + LATTICE_TOL)
    last = math.ceil((hi - anchor) / h - LATTICE_TOL)
    return anchor + first * h, anchor + last * h


def classify_points_2d(geometry, dx: float, dy: float,
                       bounding_box: Tuple[float, float, float, float],
                       n_ghost: int, sides: Optional[Dict[str, str]] = None,
                       origin: Optional[Tuple[float, float]] = None) -> EmbeddedGrid2D:
    """
    Classify every padded grid point and attach foot points to the ghost points.
    With an origin the nodes sit at origin + (i - 1/2) h and the box is widened to whole
    cells of that lattice, so the boundary offsets vary with h.
    """
    if dx <= 0 or dy <= 0:
        raise MeshError(f"mesh widths must be positive, got dx={dx} dy={dy}")
    if not 1.0 / MAX_ASPECT <= dx / dy <= MAX_ASPECT:
        raise MeshError(f"dx/dy={dx / dy:.3g} outside [1/{MAX_ASPECT:g}, {MAX_ASPECT:g}]")

    x_lo, x_hi, y_lo, y_hi = bounding_box
    if origin is not None:
        x_lo, x_hi = _snap_to_lattice(x_lo, x_hi, origin[0], dx)
        y_lo, y_hi = _snap_to_lattice(y_lo, y_hi, origin[1], dy)
    nx = int(round((x_hi - x_lo) / dx))
    ny = int(round((y_hi - y_lo) / dy))
    if nx < 1 or ny < 1:
        raise MeshError(f"bounding box {bounding_box} holds no cells")

    sides = {side: 'geometry' for side in SIDES} | dict(sides or {})
    for side, condition in sides.items():
        if side not in SIDES or condition not in SIDE_CONDITIONS:
            raise MeshError(f"invalid side condition {side}={condition}")

    grid = EmbeddedGrid2D(geometry, x_lo, y_lo, dx, dy, nx, ny, n_ghost, sides)
    g = n_ghost
    X, Y = grid.meshgrid()
    sd = geometry.signed_distance(X, Y)

    in_box = np.zeros(grid.shape, dtype=bool)
    in_box[g:g + nx, g:g + ny] = True
    interior = in_box & (sd < 0)
    reads = _read_mask(interior, g) & ~interior

    kind = np.full(grid.shape, FAR, dtype=np.int8)
    kind[interior] = INTERIOR

    pads = {
        'left': (slice(0, g), slice(None)),
        'right': (slice(g + nx, None), slice(None)),
        'bottom': (slice(None), slice(0, g)),
        'top': (slice(None), slice(g + ny, None)),
    }
    box_read = np.zeros(grid.shape, dtype=bool)
    for side, index in pads.items():
        if sides[side] == 'geometry':
            continue
        side_mask = np.zeros(grid.shape, dtype=bool)
        side_mask[index] = True
        side_mask &= reads
        box_read |= side_mask
        grid.box_ghosts[side] = np.nonzero(side_mask)
    kind[box_read] = BOX

    ghost = reads & ~box_read
    bad = ghost & (sd < 0)
    if np.any(bad):
        i, j = np.argwhere(bad)[0]
        raise MeshError(f"fluid point outside the box at ({X[i, j]:.6g}, {Y[i, j]:.6g}) "
                        f"needs a side condition")
    kind[ghost] = GHOST
    grid.kind = kind

    gi, gj = np.nonzero(ghost)
    grid.ghost_index = (gi, gj)
    G = len(gi)
    grid.foot_points = np.empty((G, 2))
    grid.normals = np.empty((G, 2))
    grid.thetas = np.empty(G)
    grid.distances = np.empty(G)
    delta = grid.delta
    for k in range(G):
        P = np.array([X[gi[k], gj[k]], Y[gi[k], gj[k]]])
        foot = geometry.foot_point(P)
        if foot.distance > (g + 1) * delta:
            raise GeometryError(f"ghost point {foot.distance / delta:.3g} deltas from the boundary",
                                location=tuple(P))
        if np.hypot(*(P - foot.point - foot.distance * foot.normal)) > 1e-10 * delta:
            raise GeometryError("foot point normal misses the ghost point", location=tuple(P))
        grid.foot_points[k] = foot.point
        grid.normals[k] = foot.normal
        grid.thetas[k] = foot.theta
        grid.distances[k] = foot.distance

    logger.info(f"Embedded grid {nx}x{ny}: {int(interior.sum())} interior, {G} ghost, "
                f"{int(box_read.sum())} side-condition points")
    return grid
