"""
Baseline constructions: Euclidean minimum spanning tree and the
path-greedy t-spanner.
"""

import logging
import math
from fractions import Fraction
from typing import List, Sequence, Tuple, Union

import networkx as nx
from networkx.utils import UnionFind

from ..geometry import has_distinct_points, squared_distance
from ..models import GeometricGraph, Point2

logger = logging.getLogger(__name__)


def sorted_pairs(points: Sequence[Point2]) -> List[Tuple[Fraction, int, int]]:
    """All index pairs ordered by (exact squared length, min index, max index)."""
    n = len(points)
    return sorted(
        (squared_distance(points[i], points[j]), i, j) for i in range(n) for j in range(i + 1, n)
    )


class SpannerBuilder:
    """Service building the classic spanning constructions."""

    def euclidean_mst(self, points: Sequence[Point2]) -> GeometricGraph:
        """
        Kruskal over the complete Euclidean graph.

        Ties are broken by (length, min index, max index); lengths are
        compared through their exact squares.
        """
        pts = self._validated(points)
        forest = UnionFind(range(len(pts)))
        edges = []
        for _, i, j in sorted_pairs(pts):
            if forest[i] != forest[j]:
                forest.union(i, j)
                edges.append((i, j))
                if len(edges) == len(pts) - 1:
                    break
        logger.debug(f"MST over {len(pts)} points uses {len(edges)} edges")
        return GeometricGraph(points=pts, edges=frozenset(edges))

    def path_greedy_spanner(
        self, points: Sequence[Point2], t: Union[Fraction, float]
    ) -> GeometricGraph:
        """
        Path-greedy t-spanner.

        Pairs are examined in nondecreasing distance order; (u, v) is added
        iff the current graph distance exceeds t * |uv|. The distance is
        recomputed with Dijkstra on the partial graph for every candidate.

        Raises:
            BuilderError: If t <= 1 or the points are not pairwise distinct
        """
        if t <= 1:
            raise BuilderError(f"t must exceed 1, got {t}")
        pts = self._validated(points)
        factor = float(t)
        graph = nx.Graph()
        graph.add_nodes_from(range(len(pts)))
        for sq, i, j in sorted_pairs(pts):
            uv = math.sqrt(sq)
            reach = nx.single_source_dijkstra_path_length(graph, i, cutoff=factor * uv, weight="weight")
            if j not in reach:
                graph.add_edge(i, j, weight=uv)
        logger.info(f"greedy {t}-spanner on {len(pts)} points: {graph.number_of_edges()} edges")
        return GeometricGraph(points=pts, edges=frozenset(graph.edges()))

    @staticmethod
    def _validated(points: Sequence[Point2]) -> Tuple[Point2, ...]:
        pts = tuple(points)
        if not pts:
            raise BuilderError("at least one point is required")
        if not has_distinct_points(pts):
            raise BuilderError("points must be pairwise distinct")
        return pts


class BuilderError(ValueError):
    """Custom exception for spanner construction errors."""
    pass
