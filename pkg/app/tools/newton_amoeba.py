"""
Newton Polygon and Amoeba Tool

This module provides the exact Newton polygon of p(nu, lambda) with its
primitive outer normals, numeric amoeba sampling under the logarithmic map,
a piecewise-linear spine approximation and best-effort vacuole detection.

Coordinates: Newton support points are (i, k) = (lambda-exponent,
nu-exponent). Amoeba and spine geometry live in (x, y) = (log|nu|,
log|lambda|), so a Newton normal (a, b) points along the amoeba direction
(b, a).
"""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy import ndimage

from app.config import settings
from app.errors import InputError
from app.tools.poly import BiPoly

# Set up logging
logger = logging.getLogger(__name__)

LatticePoint = Tuple[int, int]
Point = Tuple[float, float]

BIVARIATE_MESSAGE = "amoeba requires a genuinely bivariate polynomial"
SPINE_NOTE = (
    "tropical curve of max(log|a_ik| + k*x + i*y); ray directions are exact, "
    "vertex positions approximate the spine"
)


def _cross(o: Sequence, a: Sequence, b: Sequence):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def primitive(vector: LatticePoint) -> LatticePoint:
    """Divide an integer vector by the gcd of its components."""
    g = math.gcd(vector[0], vector[1])
    if g == 0:
        raise InputError("the zero vector has no primitive direction")
    return vector[0] // g, vector[1] // g


def convex_hull(points: Sequence[LatticePoint]) -> List[LatticePoint]:
    """
    Counter-clockwise convex hull by the monotone chain.

    Starts at the lexicographically smallest point; collinear boundary
    points are dropped. One point gives [p], collinear input gives its two
    extreme points.
    """
    pts = sorted(set(points))
    if len(pts) <= 1:
        return pts
    lower: List[LatticePoint] = []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: List[LatticePoint] = []
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


@dataclass(frozen=True)
class NewtonEdge:
    start: LatticePoint
    end: LatticePoint
    normal: LatticePoint  # primitive, outward, (i, k) frame


@dataclass(frozen=True)
class NewtonPolygon:
    support: Tuple[LatticePoint, ...]
    hull: Tuple[LatticePoint, ...]
    edges: Tuple[NewtonEdge, ...]

    @property
    def is_point(self) -> bool:
        return len(self.hull) == 1

    @property
    def is_segment(self) -> bool:
        return len(self.hull) == 2


def _outer_normal(start: LatticePoint, end: LatticePoint) -> LatticePoint:
    # right-hand side of a counter-clockwise edge
    return primitive((end[1] - start[1], start[0] - end[0]))


def newton_polygon(p: BiPoly) -> NewtonPolygon:
    """
    Exact Newton polygon of p with primitive outer edge normals.

    Args:
        p: Non-zero bivariate polynomial

    Returns:
        NewtonPolygon; a segment carries two antiparallel normals, a point none
    """
    if p.is_zero():
        raise InputError("the Newton polygon of the zero polynomial is undefined")
    support = tuple(sorted(p.support))
    hull = tuple(convex_hull(support))
    if len(hull) == 1:
        edges: Tuple[NewtonEdge, ...] = ()
    elif len(hull) == 2:
        a, b = hull
        edges = (NewtonEdge(a, b, _outer_normal(a, b)), NewtonEdge(b, a, _outer_normal(b, a)))
    else:
        edges = tuple(
            NewtonEdge(hull[j], hull[(j + 1) % len(hull)], _outer_normal(hull[j], hull[(j + 1) % len(hull)]))
            for j in range(len(hull))
        )
    return NewtonPolygon(support=support, hull=hull, edges=edges)


def tentacle_directions(polygon: NewtonPolygon) -> List[LatticePoint]:
    """Outer normals of the hull edges in the (i, k) frame; empty for a point."""
    return [edge.normal for edge in polygon.edges]


def amoeba_directions(polygon: NewtonPolygon) -> List[LatticePoint]:
    """Tentacle directions expressed in the amoeba (log|nu|, log|lambda|) frame."""
    return [(b, a) for a, b in tentacle_directions(polygon)]


def is_collapsed(polygon: NewtonPolygon) -> bool:
    """True when the hull is a segment: the skin-effect signature."""
    return polygon.is_segment


def lower_chain(polygon: NewtonPolygon) -> List[NewtonEdge]:
    """Hull edges facing down in k, walked left to right in i."""
    chain = []
    for edge in polygon.edges:
        if edge.end[0] <= edge.start[0]:
            break
        chain.append(edge)
    return chain


def puiseux_slopes(polygon: NewtonPolygon) -> List[Tuple[Fraction, int]]:
    """
    Root valuations read off the lower chain of the Newton polygon.

    Each lower edge gives (negated slope, horizontal width); the list agrees
    with the tropical roots and is sorted ascending.
    """
    slopes = [
        (-Fraction(edge.end[1] - edge.start[1], edge.end[0] - edge.start[0]), edge.end[0] - edge.start[0])
        for edge in lower_chain(polygon)
    ]
    return sorted(slopes)


def interior_lattice_points(polygon: NewtonPolygon) -> List[LatticePoint]:
    """Lattice points strictly inside the hull (none for points and segments)."""
    hull = polygon.hull
    if len(hull) < 3:
        return []
    xs = [i for i, _ in hull]
    ys = [k for _, k in hull]
    inside = []
    for i in range(min(xs), max(xs) + 1):
        for k in range(min(ys), max(ys) + 1):
            if all(_cross(e.start, e.end, (i, k)) > 0 for e in polygon.edges):
                inside.append((i, k))
    return inside


class GridSpec(BaseModel):
    """Amoeba sampling grid: log-spaced radii times uniform angles."""

    model_config = ConfigDict(extra="forbid")

    r_min: float = Field(default_factory=lambda: settings.AMOEBA_R_MIN, gt=0, description="Smallest sampled radius")
    r_max: float = Field(default_factory=lambda: settings.AMOEBA_R_MAX, gt=0, description="Largest sampled radius")
    n_r: int = Field(default_factory=lambda: settings.AMOEBA_N_R, ge=2, description="Number of radii")
    n_theta: int = Field(default_factory=lambda: settings.AMOEBA_N_THETA, ge=1, description="Number of angles")

    @model_validator(mode="after")
    def _check_range(self) -> "GridSpec":
        if self.r_max <= self.r_min:
            raise ValueError(f"r_max ({self.r_max}) must exceed r_min ({self.r_min})")
        return self

    @classmethod
    def parse(cls, text: str) -> "GridSpec":
        """Read ``r_min,r_max,n_r,n_theta``."""
        parts = [part.strip() for part in text.split(",")]
        if len(parts) != 4:
            raise InputError(f"--grid expects r_min,r_max,n_r,n_theta, got {text!r}")
        try:
            return cls(r_min=float(parts[0]), r_max=float(parts[1]), n_r=int(parts[2]), n_theta=int(parts[3]))
        except ValueError as e:
            raise InputError(f"invalid --grid {text!r}: {e}") from e

    def radii(self) -> np.ndarray:
        return np.logspace(math.log10(self.r_min), math.log10(self.r_max), self.n_r)

    def angles(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.n_theta) / self.n_theta


@dataclass(frozen=True)
class AmoebaPointCloud:
    points: np.ndarray  # shape (m, 2): columns log|nu|, log|lambda|
    grid: GridSpec
    discarded: int = 0

    def __len__(self) -> int:
        return len(self.points)


def _relative_residual(dense: np.ndarray, nu: complex, lam: complex) -> float:
    lam_powers = lam ** np.arange(dense.shape[0])
    nu_powers = nu ** np.arange(dense.shape[1])
    terms = dense * np.outer(lam_powers, nu_powers)
    scale = np.abs(terms).sum()
    if not np.isfinite(scale):
        return math.inf
    return float(abs(terms.sum()) / scale) if scale > 0 else 0.0


def amoeba_sample(
    p: BiPoly,
    grid: Optional[GridSpec] = None,
    residual_tol: Optional[float] = None,
    min_abs: Optional[float] = None,
) -> AmoebaPointCloud:
    """
    Sample the amoeba of p in both directions.

    For nu on the grid the lambda-roots are found with numpy's companion
    eigenvalue solver and (log|nu|, log|lambda|) is emitted; the same is
    done with the roles swapped so tentacles along either axis get points.
    Roots failing the relative residual test or below ``min_abs`` are
    discarded.

    Args:
        p: Bivariate polynomial
        grid: Radii and angles (defaults from settings)
        residual_tol: Relative residual threshold
        min_abs: Smallest accepted root modulus

    Returns:
        AmoebaPointCloud in deterministic grid order
    """
    if p.is_zero() or not p.is_bivariate():
        raise InputError(BIVARIATE_MESSAGE)
    grid = grid or GridSpec()
    residual_tol = settings.AMOEBA_RESIDUAL_TOL if residual_tol is None else residual_tol
    min_abs = settings.AMOEBA_MIN_ABS if min_abs is None else min_abs

    logger.info(f"Sampling amoeba on {grid.n_r}x{grid.n_theta} grid, r in [{grid.r_min}, {grid.r_max}]")
    dense = p.dense_coefficients()
    points: List[Point] = []
    discarded = 0
    phases = np.exp(1j * grid.angles())

    for solve_for_lambda in (True, False):
        # rows of `coefficients` are the polynomial in the unknown
        coefficients = dense if solve_for_lambda else dense.T
        for radius in grid.radii():
            for phase in phases:
                fixed = radius * phase
                poly = coefficients @ (fixed ** np.arange(coefficients.shape[1]))
                if not np.any(poly):
                    logger.debug(f"Skipping sample {fixed}: polynomial vanishes identically")
                    continue
                if poly[-1] == 0:
                    logger.debug(f"Singular leading coefficient at sample {fixed}")
                for root in np.roots(poly[::-1]):
                    if abs(root) < min_abs:
                        continue
                    nu, lam = (fixed, root) if solve_for_lambda else (root, fixed)
                    if _relative_residual(dense, nu, lam) > residual_tol:
                        discarded += 1
                        continue
                    points.append((math.log(abs(nu)), math.log(abs(lam))))

    cloud = AmoebaPointCloud(points=np.array(points, dtype=float).reshape(-1, 2), grid=grid, discarded=discarded)
    logger.info(f"Amoeba sampled: {len(cloud)} points kept, {discarded} discarded by residual")
    return cloud


def far_point_alignment(
    cloud: AmoebaPointCloud,
    directions: Sequence[Sequence[float]],
    radius: float,
    tol: Optional[float] = None,
) -> Tuple[float, int]:
    """
    Share of points beyond ``radius`` lying within ``tol`` radians of a direction.

    Args:
        cloud: Sampled amoeba
        directions: Directions in the amoeba frame
        radius: Norm threshold for far points
        tol: Angular tolerance (defaults from settings)

    Returns:
        (share of aligned far points, number of far points)
    """
    tol = settings.TENTACLE_ANGLE_TOL if tol is None else tol
    pts = cloud.points
    norms = np.hypot(pts[:, 0], pts[:, 1]) if len(pts) else np.zeros(0)
    far = pts[norms > radius]
    if len(far) == 0 or len(directions) == 0:
        return 0.0, len(far)
    units = far / np.linalg.norm(far, axis=1, keepdims=True)
    dirs = np.asarray(directions, dtype=float)
    dirs = dirs / np.linalg.norm(dirs, axis=1, keepdims=True)
    angles = np.arccos(np.clip(units @ dirs.T, -1.0, 1.0))
    aligned = angles.min(axis=1) <= tol
    return float(aligned.mean()), len(far)


@dataclass(frozen=True)
class VacuoleReport:
    holes: int
    boxes: Tuple[Tuple[float, float, float, float], ...]  # x_min, x_max, y_min, y_max
    cells: int


def detect_vacuoles(
    cloud: AmoebaPointCloud,
    cells: Optional[int] = None,
    bounds: Optional[Tuple[float, float, float, float]] = None,
) -> VacuoleReport:
    """
    Count bounded holes of the sampled amoeba on an occupancy grid.

    A hole is a connected set of empty cells that does not touch the grid
    border and contains a 3x3 block of empty cells.
    """
    cells = settings.VACUOLE_GRID if cells is None else cells
    pts = cloud.points
    if len(pts) == 0:
        return VacuoleReport(0, (), cells)
    if bounds is None:
        bounds = (pts[:, 0].min(), pts[:, 0].max(), pts[:, 1].min(), pts[:, 1].max())
    x_min, x_max, y_min, y_max = bounds
    if x_max <= x_min or y_max <= y_min:
        return VacuoleReport(0, (), cells)

    inside = (pts[:, 0] >= x_min) & (pts[:, 0] <= x_max) & (pts[:, 1] >= y_min) & (pts[:, 1] <= y_max)
    sel = pts[inside]
    ix = np.clip(((sel[:, 0] - x_min) / (x_max - x_min) * cells).astype(int), 0, cells - 1)
    iy = np.clip(((sel[:, 1] - y_min) / (y_max - y_min) * cells).astype(int), 0, cells - 1)
    occupied = np.zeros((cells, cells), dtype=bool)
    occupied[ix, iy] = True

    empty = ~occupied
    labels, count = ndimage.label(empty)
    core = ndimage.binary_erosion(empty, structure=np.ones((3, 3), dtype=bool))
    border = set(np.unique(np.concatenate([labels[0], labels[-1], labels[:, 0], labels[:, -1]])))
    dx, dy = (x_max - x_min) / cells, (y_max - y_min) / cells
    boxes = []
    for label, region in enumerate(ndimage.find_objects(labels), start=1):
        if label in border or region is None:
            continue
        if not (core[region] & (labels[region] == label)).any():
            continue
        sx, sy = region
        boxes.append((x_min + sx.start * dx, x_min + sx.stop * dx, y_min + sy.start * dy, y_min + sy.stop * dy))
    return VacuoleReport(len(boxes), tuple(boxes), cells)


def vacuole_window(curve: "PLCurve", pad: float = 1.0) -> Optional[Tuple[float, float, float, float]]:
    """
    Square window around the spine vertices, or None when the spine cannot
    enclose a bounded cell (fewer than three segments).
    """
    if len(curve.segments) < 3:
        return None
    vertices = np.array(curve.vertices, dtype=float)
    lo = vertices.min(axis=0) - pad
    hi = vertices.max(axis=0) + pad
    half = 0.5 * float((hi - lo).max())
    cx, cy = 0.5 * (lo + hi)
    return cx - half, cx + half, cy - half, cy + half


def find_vacuoles(p: BiPoly, cloud: AmoebaPointCloud, cells: Optional[int] = None) -> VacuoleReport:
    """
    Vacuole candidates of p, searched where its spine has bounded cells.

    The amoeba is resampled on the radii of the spine window with the
    density of ``cloud``; without a bounded spine cell the whole cloud is
    searched.
    """
    window = vacuole_window(spine_approx(p))
    if window is None:
        return detect_vacuoles(cloud, cells)
    lo, hi = min(window[0], window[2]), max(window[1], window[3])
    local_grid = GridSpec(r_min=math.exp(lo), r_max=math.exp(hi), n_r=cloud.grid.n_r, n_theta=cloud.grid.n_theta)
    logger.info(f"Searching vacuoles in log window [{lo:.2f}, {hi:.2f}]")
    return detect_vacuoles(amoeba_sample(p, local_grid), cells, bounds=window)


@dataclass(frozen=True)
class PLRay:
    origin: Point
    direction: LatticePoint  # amoeba frame
    normal: LatticePoint  # Newton (i, k) frame


@dataclass(frozen=True)
class PLSegment:
    start: Point
    end: Point
    direction: LatticePoint


@dataclass(frozen=True)
class PLCurve:
    vertices: Tuple[Point, ...]
    segments: Tuple[PLSegment, ...]
    rays: Tuple[PLRay, ...]
    note: str = field(default=SPINE_NOTE)


def _make_ray(origin, direction: LatticePoint) -> PLRay:
    return PLRay(origin=(float(origin[0]), float(origin[1])), direction=direction, normal=(direction[1], direction[0]))


def _line_spine(dual: List[Tuple[LatticePoint, float]]) -> PLCurve:
    """Spine of a polynomial whose support lies on one line: parallel lines."""
    dual = sorted(dual)
    q0 = dual[0][0]
    u = primitive((dual[-1][0][0] - q0[0], dual[-1][0][1] - q0[1]))
    norm2 = u[0] * u[0] + u[1] * u[1]
    profile = [(((q[0] - q0[0]) * u[0] + (q[1] - q0[1]) * u[1]) // norm2, h, q) for q, h in dual]

    upper: List[Tuple[int, float, LatticePoint]] = []
    for entry in profile:
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], entry) >= 0:
            upper.pop()
        upper.append(entry)

    perp = (-u[1], u[0])
    rays = []
    for (_, h_a, q_a), (_, h_b, q_b) in zip(upper, upper[1:]):
        diff = np.array([q_b[0] - q_a[0], q_b[1] - q_a[1]], dtype=float)
        base = (h_a - h_b) * diff / diff.dot(diff)
        rays.append(_make_ray(base, perp))
        rays.append(_make_ray(base, (-perp[0], -perp[1])))
    return PLCurve(vertices=(), segments=(), rays=tuple(rays))


def spine_approx(p: BiPoly) -> PLCurve:
    """
    Piecewise-linear spine approximation: the corner locus of
    max over the support of log|a_ik| + k*x + i*y.

    Returns:
        PLCurve whose rays point along Newton-polygon outer normals
    """
    if p.is_zero() or not p.is_bivariate():
        raise InputError(BIVARIATE_MESSAGE)
    # dual points in the amoeba frame: the monomial lambda^i nu^k pairs with (k, i)
    dual = [((k, i), math.log(abs(complex(c)))) for (i, k), c in p.items()]
    if len(dual) == 1:
        # a monomial has no zeros on the torus
        return PLCurve(vertices=(), segments=(), rays=())
    qs = [q for q, _ in dual]
    if all(_cross(qs[0], qs[1], q) == 0 for q in qs[2:]):
        return _line_spine(dual)

    heights = np.array([h for _, h in dual])
    coords = np.array(qs, dtype=float)

    def top(v: np.ndarray) -> float:
        return float(np.max(heights + coords @ v))

    vertices: List[np.ndarray] = []
    for a, b, c in combinations(range(len(dual)), 3):
        if _cross(qs[a], qs[b], qs[c]) == 0:
            continue
        system = np.array([coords[b] - coords[a], coords[c] - coords[a]])
        rhs = np.array([heights[a] - heights[b], heights[a] - heights[c]])
        v = np.linalg.solve(system, rhs)
        level = heights[a] + coords[a] @ v
        if top(v) > level + 1e-9 * (1.0 + abs(level)):
            continue
        if not any(np.allclose(v, w, rtol=0, atol=1e-7 * (1.0 + np.abs(w).max())) for w in vertices):
            vertices.append(v)

    owners: Dict[FrozenSet[LatticePoint], List[Tuple[int, LatticePoint]]] = {}
    for index, v in enumerate(vertices):
        level = top(v)
        active = [qs[t] for t in range(len(dual)) if heights[t] + coords[t] @ v >= level - 1e-9 * (1.0 + abs(level))]
        cell = convex_hull(active)
        for j, start in enumerate(cell):
            end = cell[(j + 1) % len(cell)]
            owners.setdefault(frozenset((start, end)), []).append((index, _outer_normal(start, end)))

    segments, rays = [], []
    for key in sorted(owners, key=sorted):
        records = owners[key]
        if len(records) == 1:
            index, direction = records[0]
            rays.append(_make_ray(vertices[index], direction))
        else:
            (i1, direction), (i2, _) = records[0], records[1]
            segments.append(PLSegment(
                start=(float(vertices[i1][0]), float(vertices[i1][1])),
                end=(float(vertices[i2][0]), float(vertices[i2][1])),
                direction=direction,
            ))
    curve = PLCurve(
        vertices=tuple((float(v[0]), float(v[1])) for v in vertices),
        segments=tuple(segments),
        rays=tuple(rays),
    )
    logger.debug(f"Spine: {len(curve.vertices)} vertices, {len(segments)} segments, {len(rays)} rays")
    return curve
