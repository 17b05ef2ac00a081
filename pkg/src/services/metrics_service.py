"""
Shortest paths, graph weight and dilation over geometric graphs.
"""

import logging
import math
from fractions import Fraction
from typing import List, Literal, Optional, Sequence, Union

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra, floyd_warshall

from ..geometry import exact_distance, has_distinct_points, squared_distance
from ..models import DilationReport, GeometricGraph, Point2

logger = logging.getLogger(__name__)

DEFAULT_TOLERANCE = 1e-9


def euclidean_matrix(points: Sequence[Point2]) -> np.ndarray:
    """Dense matrix of pairwise Euclidean distances (from exact squares)."""
    n = len(points)
    out = np.zeros((n, n), dtype=float)
    for i in range(n):
        for j in range(i + 1, n):
            out[i, j] = out[j, i] = math.sqrt(squared_distance(points[i], points[j]))
    return out


def adjacency_matrix(n: int, edges, euclid: np.ndarray) -> np.ndarray:
    adj = np.zeros((n, n), dtype=float)
    for i, j in edges:
        adj[i, j] = adj[j, i] = euclid[i, j]
    return adj


def max_stretch(adj: np.ndarray, euclid: np.ndarray) -> float:
    """Largest shortest-path / Euclidean ratio; inf when disconnected."""
    n = adj.shape[0]
    if n < 2:
        return 1.0
    dist = dijkstra(csr_matrix(adj), directed=False)
    iu = np.triu_indices(n, k=1)
    return max(1.0, float(np.max(dist[iu] / euclid[iu])))


class MetricsService:
    """Service computing weights, shortest paths and dilation."""

    def __init__(self, tolerance: float = DEFAULT_TOLERANCE):
        """
        Initialize the metrics service.

        Args:
            tolerance: Relative tolerance for every "dilation <= t" comparison
        """
        if tolerance < 0:
            raise MetricsError("tolerance must be non-negative")
        self.tolerance = tolerance

    def graph_weight(self, g: GeometricGraph) -> float:
        """Sum of edge lengths (0 for an empty edge set)."""
        return math.fsum(
            math.sqrt(squared_distance(g.points[i], g.points[j])) for i, j in g.sorted_edges()
        )

    def exact_graph_weight(self, g: GeometricGraph) -> Optional[Fraction]:
        """Exact rational weight, or None when some edge length is irrational."""
        total = Fraction(0)
        for i, j in g.sorted_edges():
            exact = exact_distance(g.points[i], g.points[j])
            if exact is None:
                return None
            total += exact
        return total

    def shortest_path_lengths(self, g: GeometricGraph, source: int) -> List[float]:
        """
        Single-source shortest path lengths.

        Args:
            g: Geometric graph
            source: Index of the source point

        Returns:
            Distances indexed by point; math.inf marks unreachable points

        Raises:
            MetricsError: If the source index is out of range
        """
        if not 0 <= source < g.n:
            raise MetricsError(f"source index {source} out of range for {g.n} points")
        euclid = euclidean_matrix(g.points)
        adj = adjacency_matrix(g.n, g.edges, euclid)
        dist = dijkstra(csr_matrix(adj), directed=False, indices=source)
        return [float(d) for d in dist]

    def all_pairs(
        self, g: GeometricGraph, method: Literal["dijkstra", "floyd_warshall"] = "dijkstra"
    ) -> np.ndarray:
        euclid = euclidean_matrix(g.points)
        graph = csr_matrix(adjacency_matrix(g.n, g.edges, euclid))
        if method == "floyd_warshall":
            return floyd_warshall(graph, directed=False)
        return dijkstra(graph, directed=False)

    def dilation(
        self, g: GeometricGraph, method: Literal["dijkstra", "floyd_warshall"] = "dijkstra"
    ) -> DilationReport:
        """
        Maximum over point pairs of graph distance over Euclidean distance.

        Ties are resolved toward the lexicographically smallest index pair.
        A disconnected graph reports an infinite dilation.

        Raises:
            MetricsError: On fewer than 2 points or duplicate points
        """
        self._check_points(g.points)
        euclid = euclidean_matrix(g.points)
        dist = self.all_pairs(g, method=method)
        iu, ju = np.triu_indices(g.n, k=1)
        ratios = dist[iu, ju] / euclid[iu, ju]
        k = int(np.argmax(ratios))
        value = max(1.0, float(ratios[k]))
        return DilationReport(dilation=value, witness_pair=(int(iu[k]), int(ju[k])))

    def is_t_spanner(
        self, g: GeometricGraph, t: Union[Fraction, float], tol: Optional[float] = None
    ) -> bool:
        if t <= 1:
            raise MetricsError(f"t must exceed 1, got {t}")
        tol = self.tolerance if tol is None else tol
        return self.dilation(g).dilation <= float(t) * (1 + tol)

    def within(self, value: float, bound: Union[Fraction, float], tol: Optional[float] = None) -> bool:
        """value <= bound up to the relative tolerance."""
        tol = self.tolerance if tol is None else tol
        return value <= float(bound) * (1 + tol)

    @staticmethod
    def _check_points(points: Sequence[Point2]) -> None:
        if len(points) < 2:
            raise MetricsError("dilation needs at least 2 points")
        if not has_distinct_points(points):
            raise MetricsError("duplicate points: dilation ratio undefined")


class MetricsError(ValueError):
    """Custom exception for metric computations."""
    pass
