"""
Exact planar geometry: distances, orientation predicates, segment
intersection and the plane-graph test.

Every decision in this module is made on exact rationals; only
`distance` returns a float.
"""

import json
import logging
import math
from fractions import Fraction
from itertools import combinations
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Union

from .models import GeometricGraph, Length, Point2

logger = logging.getLogger(__name__)


def squared_distance(p: Point2, q: Point2) -> Fraction:
    dx = p.x - q.x
    dy = p.y - q.y
    return dx * dx + dy * dy


def distance(p: Point2, q: Point2) -> float:
    return math.sqrt(squared_distance(p, q))


def exact_sqrt(value: Fraction) -> Optional[Fraction]:
    """Square root of a non-negative rational if it is rational, else None."""
    if value < 0:
        raise GeometryError(f"square root of negative value {value}")
    num, den = value.numerator, value.denominator
    rn, rd = math.isqrt(num), math.isqrt(den)
    if rn * rn == num and rd * rd == den:
        return Fraction(rn, rd)
    return None


def sqrt_floor(value: Fraction, digits: int) -> Fraction:
    """Largest multiple of 10**-digits not exceeding sqrt(value)."""
    if value < 0:
        raise GeometryError(f"square root of negative value {value}")
    scale = 10 ** digits
    scaled = value * scale * scale
    return Fraction(math.isqrt(scaled.numerator // scaled.denominator), scale)


def exact_distance(p: Point2, q: Point2) -> Optional[Fraction]:
    return exact_sqrt(squared_distance(p, q))


def length(p: Point2, q: Point2) -> Length:
    """Exact length when rational, double precision otherwise."""
    exact = exact_distance(p, q)
    if exact is not None:
        return exact
    return distance(p, q)


def orientation(a: Point2, b: Point2, c: Point2) -> int:
    """Sign of the turn a -> b -> c: 1 left, -1 right, 0 collinear."""
    cross = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
    return (cross > 0) - (cross < 0)


def in_box(a: Point2, b: Point2, c: Point2) -> bool:
    """c lies in the closed bounding box of segment ab."""
    return min(a.x, b.x) <= c.x <= max(a.x, b.x) and min(a.y, b.y) <= c.y <= max(a.y, b.y)


def in_open_segment(a: Point2, b: Point2, c: Point2) -> bool:
    """c lies on segment ab and is neither endpoint."""
    return c != a and c != b and orientation(a, b, c) == 0 and in_box(a, b, c)


def _collinear_overlap(a: Point2, b: Point2, c: Point2, d: Point2) -> bool:
    # project on the dominant axis of ab
    if a.x != b.x:
        key = lambda pt: pt.x  # noqa: E731
    else:
        key = lambda pt: pt.y  # noqa: E731
    lo = max(min(key(a), key(b)), min(key(c), key(d)))
    hi = min(max(key(a), key(b)), max(key(c), key(d)))
    return lo < hi


def proper_intersection(a: Point2, b: Point2, c: Point2, d: Point2) -> bool:
    """
    Whether segments ab and cd share a point other than a shared endpoint.

    Collinear overlap and an endpoint lying inside the other segment both
    count as intersections.

    Raises:
        GeometryError: if either segment has zero length
    """
    if a == b or c == d:
        raise GeometryError("degenerate segment: endpoints coincide")

    o1 = orientation(a, b, c)
    o2 = orientation(a, b, d)
    o3 = orientation(c, d, a)
    o4 = orientation(c, d, b)

    if o1 == 0 and o2 == 0:
        return _collinear_overlap(a, b, c, d)

    if o1 * o2 < 0 and o3 * o4 < 0:
        return True

    # touching: an endpoint of one segment inside the other
    shared = {a, b} & {c, d}
    for pt, (u, v), o in ((c, (a, b), o1), (d, (a, b), o2), (a, (c, d), o3), (b, (c, d), o4)):
        if o == 0 and pt not in shared and in_box(u, v, pt):
            return True
    return False


def is_plane_graph(g: GeometricGraph) -> bool:
    """
    True iff no two edges properly intersect and no vertex lies in the
    interior of an edge it is not incident to.
    """
    pts = g.points
    edges = g.sorted_edges()
    for i, j in edges:
        for k, pt in enumerate(pts):
            if k != i and k != j and in_open_segment(pts[i], pts[j], pt):
                logger.debug(f"vertex {k} lies inside edge ({i}, {j})")
                return False
    for (i, j), (k, l) in combinations(edges, 2):
        if proper_intersection(pts[i], pts[j], pts[k], pts[l]):
            logger.debug(f"edges ({i}, {j}) and ({k}, {l}) intersect")
            return False
    return True


def crossing_pairs(points: Sequence[Point2], edges: Sequence[tuple]) -> List[tuple]:
    """Index pairs (a, b), a < b, of edges in `edges` that properly intersect."""
    out = []
    for a, b in combinations(range(len(edges)), 2):
        (i, j), (k, l) = edges[a], edges[b]
        if proper_intersection(points[i], points[j], points[k], points[l]):
            out.append((a, b))
    return out


def has_distinct_points(points: Iterable[Point2]) -> bool:
    pts = list(points)
    return len(set(pts)) == len(pts)


def load_points(source: Union[str, Path, dict]) -> GeometricGraph:
    """
    Read a point set or graph document.

    Accepts {"points": [[x, y], ...]} with optional "edges": [[i, j], ...];
    coordinates are exact decimal or "p/q" strings (numbers are accepted too).
    """
    if isinstance(source, dict):
        data = source
    else:
        try:
            data = json.loads(Path(source).read_text(encoding="utf-8"))
        except json.JSONDecodeError as e:
            raise GeometryError(f"malformed JSON in {source}: {e}") from e
    if "points" not in data:
        raise GeometryError("missing field 'points'")
    return GeometricGraph(points=data["points"], edges=data.get("edges", []))


def dump_points(g: GeometricGraph) -> dict:
    return g.model_dump()


class GeometryError(ValueError):
    """Custom exception for invalid geometric input."""
    pass
