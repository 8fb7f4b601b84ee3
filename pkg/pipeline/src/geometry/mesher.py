"""
Triangulations of the perforated periodic cell and of the trimmed astroid.

Only the fundamental octant 0 <= y <= x is triangulated (Triangle via meshpy, with
a graded size field and no Steiner points on the boundary); the full mesh is its
unfolding by reflections, so it is exactly invariant under the symmetries of the
square and opposite periodic edges carry bitwise identical coordinates.
"""

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Sequence, Tuple

import numpy as np
from meshpy import triangle

from src.geometry.cell import (
    ASTROID_AREA, AstroidSpec, CellSpec, CellVariant, LATTICE_HALF_PERIOD, astroid_halfwidth
)
from src.utils.errors import ConfigurationError, MeshingError
from src.utils.logger import get_logger


OUTER_TAGS = ('outer_N', 'outer_S', 'outer_E', 'outer_W')
CUSP_TAGS = ('cusp_trim_W', 'cusp_trim_S', 'cusp_trim_E', 'cusp_trim_N')
BOUNDARY_TAGS = ('obstacle',) + OUTER_TAGS + CUSP_TAGS
# Internal tag for symmetry lines of the fundamental octant; never present in a finished mesh
MIRROR_TAG = 'mirror'
ALL_TAGS = BOUNDARY_TAGS + (MIRROR_TAG,)

PAIRING_TOLERANCE = 1e-10
MIN_ANGLE_WARNING_DEG = 15.0
EQUILATERAL_AREA_FACTOR = math.sqrt(3.0) / 4.0

PI = LATTICE_HALF_PERIOD


@dataclass(frozen=True, eq=False)
class Mesh:
    """
    Immutable triangulation with tagged boundary edges.

    periodic_pairing rows are (vertex on the E or N edge, partner on the W or S edge);
    the partner sits at offset (-2π, 0) or (0, -2π). Arrays are read-only.
    """

    vertices: np.ndarray
    triangles: np.ndarray
    boundary_edges: np.ndarray
    boundary_tags: Tuple[str, ...]
    periodic_pairing: np.ndarray
    mesh_size: float
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        arrays = {
            'vertices': (np.asarray(self.vertices, dtype=float).reshape(-1, 2)),
            'triangles': (np.asarray(self.triangles, dtype=np.int64).reshape(-1, 3)),
            'boundary_edges': (np.asarray(self.boundary_edges, dtype=np.int64).reshape(-1, 2)),
            'periodic_pairing': (np.asarray(self.periodic_pairing, dtype=np.int64).reshape(-1, 2)),
        }
        for name, value in arrays.items():
            value = value.copy()
            value.setflags(write=False)
            object.__setattr__(self, name, value)
        object.__setattr__(self, 'boundary_tags', tuple(str(tag) for tag in self.boundary_tags))
        if len(self.boundary_tags) != len(self.boundary_edges):
            raise MeshingError("boundary_tags must have one entry per boundary edge")

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    @property
    def is_periodic(self) -> bool:
        return len(self.periodic_pairing) > 0

    def signed_areas(self) -> np.ndarray:
        a, b, c = (self.vertices[self.triangles[:, k]] for k in range(3))
        return 0.5 * ((b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0]))

    def area(self) -> float:
        return float(np.sum(self.signed_areas()))

    def edges_with_tag(self, tag: str) -> np.ndarray:
        mask = np.array([t == tag for t in self.boundary_tags], dtype=bool)
        return self.boundary_edges[mask]

    def tag_vertices(self, tag: str) -> np.ndarray:
        return np.unique(self.edges_with_tag(tag))

    def present_tags(self) -> List[str]:
        return sorted(set(self.boundary_tags))


@dataclass
class MeshAudit:
    min_angle_deg: float
    area: float
    n_vertices: int
    n_triangles: int
    n_periodic_pairs: int
    problems: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.problems

    def to_dict(self) -> Dict[str, Any]:
        return {
            'min_angle_deg': self.min_angle_deg,
            'area': self.area,
            'n_vertices': self.n_vertices,
            'n_triangles': self.n_triangles,
            'n_periodic_pairs': self.n_periodic_pairs,
            'problems': list(self.problems),
        }


# ---------------------------------------------------------------------------
# Size field
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _Channel:
    """Narrow passage between two disks of the given radius, centred at `centre`."""

    centre: Tuple[float, float]
    direction: Tuple[float, float]
    radius: float


def _channel_halfwidth(along: np.ndarray, radius: float) -> np.ndarray:
    return PI - np.sqrt(np.clip(radius ** 2 - along ** 2, 0.0, None))


class _SizeField:
    """Target edge length: min(h, ratio·w(along) + grade·(|across| − w)₊) over all channels."""

    def __init__(self, h: float, channels: Sequence[_Channel], ratio: float, grade: float):
        self.h = h
        self.channels = list(channels)
        self.ratio = ratio
        self.grade = grade

    def __call__(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(points)
        size = np.full(len(points), self.h)
        for channel in self.channels:
            d = np.asarray(channel.direction)
            rel = points - np.asarray(channel.centre)
            along = rel @ d
            across = rel @ np.array([-d[1], d[0]])
            width = _channel_halfwidth(along, channel.radius)
            local = self.ratio * width + self.grade * np.clip(np.abs(across) - width, 0.0, None)
            size = np.minimum(size, local)
        return size


# ---------------------------------------------------------------------------
# Boundary sampling
# ---------------------------------------------------------------------------

def _graded_parameters(points_at: Callable[[np.ndarray], np.ndarray], length: float,
                       size_field: _SizeField, min_segments: int = 1) -> np.ndarray:
    """Parameters in [0, 1] so that consecutive points are about one local size apart."""
    fine = [0.0]
    t = 0.0
    while t < 1.0:
        step = 0.25 * float(size_field(points_at(np.array([t])))[0]) / length
        t = min(1.0, t + max(step, 1e-9))
        fine.append(t)
    fine_arr = np.asarray(fine)
    density = 1.0 / size_field(points_at(fine_arr))
    cumulative = np.concatenate(
        [[0.0], np.cumsum(0.5 * (density[1:] + density[:-1]) * np.diff(fine_arr) * length)]
    )
    n_segments = max(min_segments, int(math.ceil(cumulative[-1])))
    params = np.interp(np.linspace(0.0, cumulative[-1], n_segments + 1), cumulative, fine_arr)
    params[0], params[-1] = 0.0, 1.0
    return params


def _line_points(start: Tuple[float, float], end: Tuple[float, float], size_field: _SizeField,
                 min_segments: int = 1) -> np.ndarray:
    """
    Points on a straight segment. Coordinates that agree at both ends (an axis-aligned
    edge or the diagonal x = y) agree exactly at every interior point too.
    """
    start_arr, end_arr = np.asarray(start, dtype=float), np.asarray(end, dtype=float)

    def points_at(t):
        return start_arr[None, :] + (end_arr - start_arr)[None, :] * np.asarray(t)[:, None]

    params = _graded_parameters(points_at, float(np.linalg.norm(end_arr - start_arr)), size_field, min_segments)
    points = points_at(params)
    points[0], points[-1] = start_arr, end_arr
    return points


def _arc_points(centre: Tuple[float, float], radius: float, start: Tuple[float, float],
                end: Tuple[float, float], size_field: _SizeField, min_segments: int = 1) -> np.ndarray:
    """Points along the short arc from start to end; endpoints are copied exactly."""
    cx, cy = centre
    theta0 = math.atan2(start[1] - cy, start[0] - cx)
    theta1 = math.atan2(end[1] - cy, end[0] - cx)
    sweep = (theta1 - theta0 + math.pi) % (2.0 * math.pi) - math.pi

    def points_at(t):
        angle = theta0 + sweep * t
        return np.column_stack([cx + radius * np.cos(angle), cy + radius * np.sin(angle)])

    params = _graded_parameters(points_at, radius * abs(sweep), size_field, min_segments)
    points = points_at(params)
    points[0], points[-1] = start, end
    return points


class _BoundaryBuilder:
    """Collects a closed boundary loop as Triangle input (points, segments, tags)."""

    def __init__(self):
        self.points: List[np.ndarray] = []
        self.segments: List[Tuple[int, int]] = []
        self.tags: List[str] = []

    def add_closed_loop(self, pieces: Sequence[Tuple[np.ndarray, str]]) -> None:
        """Consecutive pieces share endpoints; the last piece ends where the first starts."""
        start = len(self.points)
        counter = start
        indices = []
        for k, (points, _) in enumerate(pieces):
            following = pieces[(k + 1) % len(pieces)][0]
            if np.max(np.abs(points[-1] - following[0])) > 1e-9:
                raise MeshingError(f"boundary pieces {k} and {(k + 1) % len(pieces)} do not meet")
            idx = np.arange(counter, counter + len(points))
            self.points.extend(np.asarray(points[:-1], dtype=float))
            counter += len(points) - 1
            indices.append(idx)
        indices[-1][-1] = start
        for idx, (_, tag) in zip(indices, pieces):
            for i, j in zip(idx[:-1], idx[1:]):
                self.segments.append((int(i), int(j)))
                self.tags.append(tag)

    def point_array(self) -> np.ndarray:
        return np.asarray(self.points, dtype=float)


# ---------------------------------------------------------------------------
# Fundamental octant 0 ≤ y ≤ x and its unfolding
# ---------------------------------------------------------------------------

def _octant_cell_pieces(spec: CellSpec, size_field: _SizeField) -> List[Tuple[np.ndarray, str]]:
    a = spec.obstacle_radius
    if spec.cell_variant is CellVariant.OMEGA:
        if not spec.has_obstacle:
            return [
                (_line_points((0.0, 0.0), (PI, 0.0), size_field), MIRROR_TAG),
                (_line_points((PI, 0.0), (PI, PI), size_field), 'outer_E'),
                (_line_points((PI, PI), (0.0, 0.0), size_field), MIRROR_TAG),
            ]
        c = a / math.sqrt(2.0)
        return [
            (_line_points((a, 0.0), (PI, 0.0), size_field), MIRROR_TAG),
            (_line_points((PI, 0.0), (PI, PI), size_field), 'outer_E'),
            (_line_points((PI, PI), (c, c), size_field), MIRROR_TAG),
            (_arc_points((0.0, 0.0), a, (c, c), (a, 0.0), size_field, 3), 'obstacle'),
        ]
    eps = spec.epsilon
    d = PI - a / math.sqrt(2.0)
    return [
        (_line_points((0.0, 0.0), (PI, 0.0), size_field), MIRROR_TAG),
        (_line_points((PI, 0.0), (PI, eps), size_field, 2), 'outer_E'),
        (_arc_points((PI, PI), a, (PI, eps), (d, d), size_field, 3), 'obstacle'),
        (_line_points((d, d), (0.0, 0.0), size_field), MIRROR_TAG),
    ]


def _octant_astroid_pieces(delta: float, size_field: _SizeField) -> List[Tuple[np.ndarray, str]]:
    b = PI - delta
    half = astroid_halfwidth(delta)
    d = PI - PI / math.sqrt(2.0)
    return [
        (_line_points((0.0, 0.0), (b, 0.0), size_field), MIRROR_TAG),
        (_line_points((b, 0.0), (b, half), size_field, 2), 'cusp_trim_E'),
        (_arc_points((PI, PI), PI, (b, half), (d, d), size_field, 4), 'obstacle'),
        (_line_points((d, d), (0.0, 0.0), size_field), MIRROR_TAG),
    ]


def _triangulate(builder: _BoundaryBuilder, size_field: _SizeField,
                 min_angle: float) -> Tuple[np.ndarray, np.ndarray]:
    """Run Triangle on the collected boundary; input vertices keep their indices."""
    input_points = builder.point_array()
    info = triangle.MeshInfo()
    info.set_points(input_points.tolist())
    markers = [ALL_TAGS.index(tag) + 1 for tag in builder.tags]
    info.set_facets(builder.segments, facet_markers=markers)

    def needs_refinement(vertices, area):
        centroid = np.mean(np.asarray(vertices, dtype=float), axis=0)
        target = float(size_field(centroid[None, :])[0])
        return bool(area > EQUILATERAL_AREA_FACTOR * target ** 2)

    try:
        result = triangle.build(info, refinement_func=needs_refinement, min_angle=min_angle,
                                allow_boundary_steiner=False)
    except Exception as e:
        raise MeshingError(f"Triangle failed: {e}") from e

    vertices = np.array(result.points, dtype=float)
    triangles = np.array(result.elements, dtype=np.int64)
    if len(vertices) < len(input_points) or \
            not np.allclose(vertices[:len(input_points)], input_points, rtol=0.0, atol=1e-14):
        raise MeshingError("Triangle did not preserve the input boundary vertices")
    return vertices, triangles


_REFLECTIONS = (
    # (map on coordinates, boundary tag renaming)
    (lambda v: v[:, ::-1], {'outer_E': 'outer_N', 'outer_N': 'outer_E', 'outer_W': 'outer_S',
                            'outer_S': 'outer_W', 'cusp_trim_E': 'cusp_trim_N', 'cusp_trim_N': 'cusp_trim_E',
                            'cusp_trim_W': 'cusp_trim_S', 'cusp_trim_S': 'cusp_trim_W'}),
    (lambda v: v * np.array([-1.0, 1.0]), {'outer_E': 'outer_W', 'outer_W': 'outer_E',
                                           'cusp_trim_E': 'cusp_trim_W', 'cusp_trim_W': 'cusp_trim_E'}),
    (lambda v: v * np.array([1.0, -1.0]), {'outer_N': 'outer_S', 'outer_S': 'outer_N',
                                           'cusp_trim_N': 'cusp_trim_S', 'cusp_trim_S': 'cusp_trim_N'}),
)


def _unfold(vertices: np.ndarray, triangles: np.ndarray, segments: np.ndarray,
            tags: List[str]) -> Tuple[np.ndarray, np.ndarray, np.ndarray, List[str]]:
    """
    Reflect the octant mesh across y = x, then x = 0, then y = 0. Vertices on a
    mirror line coincide bitwise with their images and are merged; mirror segments
    become interior and are dropped.
    """
    for transform, renaming in _REFLECTIONS:
        image = transform(vertices) + 0.0
        existing = {(x, y): i for i, (x, y) in enumerate((vertices + 0.0).tolist())}
        index_map = np.empty(len(image), dtype=np.int64)
        fresh = []
        for k, key in enumerate(map(tuple, image.tolist())):
            if key in existing:
                index_map[k] = existing[key]
            else:
                index_map[k] = len(vertices) + len(fresh)
                fresh.append(key)
        vertices = np.vstack([vertices, np.asarray(fresh, dtype=float).reshape(-1, 2)])
        triangles = np.vstack([triangles, index_map[triangles]])
        segments = np.vstack([segments, index_map[segments]])
        tags = tags + [renaming.get(tag, tag) for tag in tags]

    keep = np.array([tag != MIRROR_TAG for tag in tags], dtype=bool)
    segments = segments[keep]
    tags = [tag for tag in tags if tag != MIRROR_TAG]

    a, b, c = (vertices[triangles[:, k]] for k in range(3))
    signed = (b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0])
    flip = signed < 0.0
    triangles[flip] = triangles[flip][:, [0, 2, 1]]
    return vertices, triangles, segments, tags


def _periodic_pairs(vertices: np.ndarray, segments: np.ndarray, tags: List[str]) -> np.ndarray:
    """Pair (E, W) and (N, S) vertices by their exact shared coordinate."""
    def on(tag):
        chosen = [seg for seg, t in zip(segments.tolist(), tags) if t == tag]
        return np.unique(np.asarray(chosen, dtype=np.int64).reshape(-1))

    pairs = []
    for plus, minus, axis in (('outer_E', 'outer_W', 1), ('outer_N', 'outer_S', 0)):
        partners = {vertices[i, axis] + 0.0: i for i in on(minus)}
        for i in on(plus):
            j = partners.get(vertices[i, axis] + 0.0)
            if j is None:
                raise MeshingError(f"{plus} vertex {i} has no partner on {minus}")
            pairs.append((int(i), int(j)))
    return np.asarray(pairs, dtype=np.int64).reshape(-1, 2)


def _check_boundary(triangles: np.ndarray, segments: np.ndarray) -> None:
    """The triangulation's boundary must be exactly the tagged segments."""
    edges = np.sort(np.vstack([triangles[:, [0, 1]], triangles[:, [1, 2]], triangles[:, [2, 0]]]), axis=1)
    unique, counts = np.unique(edges, axis=0, return_counts=True)
    mesh_boundary = {tuple(edge) for edge in unique[counts == 1].tolist()}
    expected = {tuple(sorted(seg)) for seg in segments.tolist()}
    if mesh_boundary != expected:
        raise MeshingError(
            f"triangulated boundary differs from the input ({len(mesh_boundary ^ expected)} edges)"
        )


def _min_angles_deg(vertices: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    p = [vertices[triangles[:, k]] for k in range(3)]
    angles = []
    for k in range(3):
        u = p[(k + 1) % 3] - p[k]
        v = p[(k + 2) % 3] - p[k]
        cosine = np.sum(u * v, axis=1) / (np.linalg.norm(u, axis=1) * np.linalg.norm(v, axis=1))
        angles.append(np.degrees(np.arccos(np.clip(cosine, -1.0, 1.0))))
    return np.min(np.column_stack(angles), axis=1)


def validate_mesh(mesh: Mesh) -> MeshAudit:
    """Audit the Mesh invariants; violations are collected, not raised."""
    problems: List[str] = []
    areas = mesh.signed_areas()
    n_bad = int(np.sum(areas <= 0.0))
    if n_bad:
        problems.append(f"{n_bad} triangles with non-positive signed area")

    min_angle = float(np.min(_min_angles_deg(mesh.vertices, mesh.triangles))) if mesh.n_triangles else 0.0

    unknown = set(mesh.boundary_tags) - set(BOUNDARY_TAGS)
    if unknown:
        problems.append(f"unknown boundary tags {sorted(unknown)}")

    pairs = mesh.periodic_pairing
    if len(pairs):
        offsets = mesh.vertices[pairs[:, 0]] - mesh.vertices[pairs[:, 1]]
        horizontal = np.max(np.abs(offsets - [2.0 * PI, 0.0]), axis=1) <= PAIRING_TOLERANCE
        vertical = np.max(np.abs(offsets - [0.0, 2.0 * PI]), axis=1) <= PAIRING_TOLERANCE
        n_offset = int(np.sum(~(horizontal | vertical)))
        if n_offset:
            problems.append(f"{n_offset} periodic pairs with a wrong offset")
        for side, mask in (('E/W', horizontal), ('N/S', vertical)):
            chosen = pairs[mask]
            if len(np.unique(chosen[:, 0])) != len(chosen) or len(np.unique(chosen[:, 1])) != len(chosen):
                problems.append(f"{side} pairing is not one-to-one")
        paired = set(np.unique(pairs).tolist())
        outer = set()
        for tag in OUTER_TAGS:
            outer.update(mesh.tag_vertices(tag).tolist())
        orphans = outer - paired
        if orphans:
            problems.append(f"{len(orphans)} outer vertices without a periodic partner")
    elif any(tag in mesh.boundary_tags for tag in OUTER_TAGS):
        problems.append("outer edges present but no periodic pairing")

    # Obstacle interiors, allowing for the chord sag of the polygonal boundary
    for centre, radius in mesh.metadata.get('obstacles', []):
        obstacle_edges = mesh.edges_with_tag('obstacle')
        if len(obstacle_edges):
            lengths = np.linalg.norm(mesh.vertices[obstacle_edges[:, 0]] - mesh.vertices[obstacle_edges[:, 1]], axis=1)
            sag = float(np.max(lengths)) ** 2 / (8.0 * radius)
        else:
            sag = 0.0
        distance = np.linalg.norm(mesh.vertices - np.asarray(centre), axis=1)
        inside = int(np.sum(distance < radius - sag - 1e-12))
        if inside:
            problems.append(f"{inside} vertices inside the obstacle centred at {tuple(centre)}")

    return MeshAudit(
        min_angle_deg=min_angle,
        area=float(np.sum(areas)),
        n_vertices=mesh.n_vertices,
        n_triangles=mesh.n_triangles,
        n_periodic_pairs=len(pairs),
        problems=problems,
    )




def _finalise(vertices: np.ndarray, triangles: np.ndarray, segments: np.ndarray, tags: List[str],
              pairing: np.ndarray, h: float, metadata: Dict[str, Any]) -> Mesh:
    _check_boundary(triangles, segments)
    mesh = Mesh(
        vertices=vertices,
        triangles=triangles,
        boundary_edges=segments,
        boundary_tags=tuple(tags),
        periodic_pairing=pairing,
        mesh_size=h,
        metadata=metadata,
    )
    audit = validate_mesh(mesh)
    if not audit.ok:
        raise MeshingError(f"mesh audit failed: {'; '.join(audit.problems)}")
    if audit.min_angle_deg < MIN_ANGLE_WARNING_DEG:
        get_logger().warning(f"⚠️ Minimum triangle angle {audit.min_angle_deg:.1f}° below {MIN_ANGLE_WARNING_DEG}°")
    metadata['min_angle_deg'] = audit.min_angle_deg
    return mesh


def _mesh_from_octant(pieces: Sequence[Tuple[np.ndarray, str]], size_field: _SizeField, min_angle: float,
                      periodic: bool, h: float, metadata: Dict[str, Any]) -> Mesh:
    builder = _BoundaryBuilder()
    builder.add_closed_loop(pieces)
    vertices, triangles = _triangulate(builder, size_field, min_angle)
    segments = np.asarray(builder.segments, dtype=np.int64).reshape(-1, 2)
    vertices, triangles, segments, tags = _unfold(vertices, triangles, segments, list(builder.tags))
    pairing = _periodic_pairs(vertices, segments, tags) if periodic else np.zeros((0, 2), dtype=np.int64)
    return _finalise(vertices, triangles, segments, tags, pairing, h, metadata)


# ---------------------------------------------------------------------------
# Public builders
# ---------------------------------------------------------------------------

def _check_mesh_parameters(h: float, refinement_ratio: float, grade: float) -> None:
    if not h > 0.0:
        raise ConfigurationError(f"mesh size must be positive, got {h}")
    if not 0.0 < refinement_ratio <= 1.0:
        raise ConfigurationError(f"refinement ratio must lie in (0, 1], got {refinement_ratio}")
    if grade <= 0.0:
        raise ConfigurationError(f"grading must be positive, got {grade}")


def build_cell_mesh(spec: CellSpec, h: float, refinement_ratio: float = 0.25, grade: float = 0.3,
                    min_angle: float = 25.0, epsilon_floor: float = 1e-4) -> Mesh:
    """
    Triangulate the perforated periodic cell.

    Element size is h away from the gaps and refinement_ratio times the local gap
    half-width inside them (ε/4 at a gap centre by default). The mesh is invariant
    under the eight symmetries of the square, so opposite outer edges carry
    identical vertex coordinates.
    """
    _check_mesh_parameters(h, refinement_ratio, grade)
    a = spec.obstacle_radius
    if spec.has_obstacle and spec.epsilon < epsilon_floor:
        raise MeshingError(f"gap half-width {spec.epsilon:.3g} is below the meshing floor {epsilon_floor:.3g}")

    channels: List[_Channel] = []
    obstacles: List[Tuple[Tuple[float, float], float]] = []
    if spec.cell_variant is CellVariant.OMEGA and spec.has_obstacle:
        channels = [_Channel((PI, 0.0), (0.0, 1.0), a), _Channel((-PI, 0.0), (0.0, 1.0), a),
                    _Channel((0.0, PI), (1.0, 0.0), a), _Channel((0.0, -PI), (1.0, 0.0), a)]
        obstacles = [((0.0, 0.0), a)]
    elif spec.cell_variant is CellVariant.OMEGA_PRIME:
        channels = [_Channel((PI, 0.0), (1.0, 0.0), a), _Channel((-PI, 0.0), (1.0, 0.0), a),
                    _Channel((0.0, PI), (0.0, 1.0), a), _Channel((0.0, -PI), (0.0, 1.0), a)]
        obstacles = [((PI, -PI), a), ((PI, PI), a), ((-PI, PI), a), ((-PI, -PI), a)]
    size_field = _SizeField(h, channels, refinement_ratio, grade)

    metadata = {
        'kind': 'cell',
        'obstacle_radius': a,
        'cell_variant': spec.cell_variant.value,
        'mesh_size': h,
        'refinement_ratio': refinement_ratio,
        'grade': grade,
        'exact_area': spec.fluid_area(),
        'obstacles': obstacles,
    }
    mesh = _mesh_from_octant(_octant_cell_pieces(spec, size_field), size_field, min_angle,
                             periodic=True, h=h, metadata=metadata)
    get_logger().info(f"🔺 Cell mesh a={a:.6g} ({spec.cell_variant.value}), h={h}: "
                      f"{mesh.n_vertices} vertices, {mesh.n_triangles} triangles")
    return mesh


def build_astroid_mesh(spec: AstroidSpec, grade: float = 0.3, min_angle: float = 25.0) -> Mesh:
    """
    Triangulate the ε → 0 void of ω' (four arcs of radius π centred on the cell
    corners) with each cusp cut by a straight segment a distance δ from its tip.

    Cusps: west (-π, 0), south (0, -π), east (π, 0), north (0, π).
    """
    _check_mesh_parameters(spec.mesh_size, spec.refinement_ratio, grade)
    delta = spec.trim_distance
    channels = [_Channel((-PI, 0.0), (1.0, 0.0), PI), _Channel((0.0, -PI), (0.0, 1.0), PI),
                _Channel((PI, 0.0), (-1.0, 0.0), PI), _Channel((0.0, PI), (0.0, -1.0), PI)]
    size_field = _SizeField(spec.mesh_size, channels, spec.refinement_ratio, grade)

    metadata = {
        'kind': 'astroid',
        'trim_distance': delta,
        'trim_halfwidth': astroid_halfwidth(delta),
        'mesh_size': spec.mesh_size,
        'refinement_ratio': spec.refinement_ratio,
        'grade': grade,
        'exact_area': ASTROID_AREA,
        'obstacles': [((PI, -PI), PI), ((PI, PI), PI), ((-PI, PI), PI), ((-PI, -PI), PI)],
    }
    mesh = _mesh_from_octant(_octant_astroid_pieces(delta, size_field), size_field, min_angle,
                             periodic=False, h=spec.mesh_size, metadata=metadata)
    get_logger().info(f"✴️ Astroid mesh δ={delta}, h={spec.mesh_size}: "
                      f"{mesh.n_vertices} vertices, {mesh.n_triangles} triangles")
    return mesh
