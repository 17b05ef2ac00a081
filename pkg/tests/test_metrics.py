"""
Tests for graph weight, shortest paths and dilation.
"""

import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.models import GeometricGraph, Point2
from src.services.metrics_service import MetricsError, MetricsService


@pytest.fixture
def metrics():
    """Create a metrics service with the default tolerance."""
    return MetricsService()


@pytest.fixture
def square_path():
    """The 3-edge path around the unit square."""
    pts = [Point2.of(0, 0), Point2.of(1, 0), Point2.of(1, 1), Point2.of(0, 1)]
    return GeometricGraph(points=pts, edges=[(0, 1), (1, 2), (2, 3)])


def brute_force_dilation(g: GeometricGraph) -> float:
    """Floyd-Warshall in plain Python, used as an oracle."""
    n = g.n
    dist = [[math.inf] * n for _ in range(n)]
    for i in range(n):
        dist[i][i] = 0.0
    for i, j in g.edges:
        d = math.dist(g.points[i].as_float(), g.points[j].as_float())
        dist[i][j] = dist[j][i] = d
    for k, i, j in itertools.product(range(n), repeat=3):
        if dist[i][k] + dist[k][j] < dist[i][j]:
            dist[i][j] = dist[i][k] + dist[k][j]
    worst = 1.0
    for i, j in itertools.combinations(range(n), 2):
        worst = max(worst, dist[i][j] / math.dist(g.points[i].as_float(), g.points[j].as_float()))
    return worst


class TestGraphWeight:
    """Test cases for graph weight."""

    def test_empty_graph_weighs_zero(self, metrics, square_path):
        assert metrics.graph_weight(square_path.with_edges(removed=square_path.edges)) == 0.0

    def test_weight(self, metrics, square_path):
        assert metrics.graph_weight(square_path) == 3.0
        assert metrics.exact_graph_weight(square_path) == Fraction(3)

    def test_exact_weight_none_when_irrational(self, metrics, square_path):
        g = square_path.with_edges(added=[(0, 2)])
        assert metrics.exact_graph_weight(g) is None
        assert metrics.graph_weight(g) == pytest.approx(3 + math.sqrt(2))


class TestShortestPaths:
    """Test cases for single-source shortest paths."""

    def test_lengths(self, metrics, square_path):
        assert metrics.shortest_path_lengths(square_path, 0) == [0.0, 1.0, 2.0, 3.0]

    def test_unreachable_is_infinite(self, metrics, square_path):
        g = square_path.with_edges(removed=[(1, 2)])
        assert math.isinf(metrics.shortest_path_lengths(g, 0)[3])

    def test_source_out_of_range(self, metrics, square_path):
        with pytest.raises(MetricsError):
            metrics.shortest_path_lengths(square_path, 4)


class TestDilation:
    """Test cases for the dilation computation."""

    def test_square_path_dilation_is_three(self, metrics, square_path):
        report = metrics.dilation(square_path)
        assert report.dilation == pytest.approx(3.0)
        assert report.witness_pair == (0, 3)

    def test_complete_graph_has_dilation_one(self, metrics, square_path):
        assert metrics.dilation(square_path.complete()).dilation == 1.0

    def test_disconnected_graph(self, metrics, square_path):
        report = metrics.dilation(square_path.with_edges(removed=[(1, 2)]))
        assert math.isinf(report.dilation)
        assert not report.connected

    def test_methods_agree(self, metrics, square_path):
        a = metrics.dilation(square_path, method="dijkstra")
        b = metrics.dilation(square_path, method="floyd_warshall")
        assert a.dilation == pytest.approx(b.dilation)
        assert a.witness_pair == b.witness_pair

    def test_two_point_edge(self, metrics):
        g = GeometricGraph(points=[Point2.of(0, 0), Point2.of(2, 1)], edges=[(0, 1)])
        assert metrics.dilation(g).dilation == 1.0

    def test_rejects_single_point(self, metrics):
        with pytest.raises(MetricsError):
            metrics.dilation(GeometricGraph(points=[Point2.of(0, 0)]))

    def test_rejects_duplicate_points(self, metrics):
        with pytest.raises(MetricsError):
            metrics.dilation(GeometricGraph(points=[Point2.of(0, 0), Point2.of(0, 0)], edges=[(0, 1)]))

    @settings(max_examples=40, deadline=None)
    @given(st.integers(min_value=3, max_value=7), st.integers(min_value=0, max_value=10_000))
    def test_matches_brute_force(self, n, seed):
        metrics = MetricsService()
        rng = np.random.default_rng(seed)
        cells = rng.choice(400, size=n, replace=False)
        pts = [Point2.of(int(c) // 20, int(c) % 20) for c in cells]
        pairs = list(itertools.combinations(range(n), 2))
        chosen = [pairs[k] for k in np.flatnonzero(rng.random(len(pairs)) < 0.5)]
        g = GeometricGraph(points=pts, edges=chosen)
        expected = brute_force_dilation(g)
        got = metrics.dilation(g).dilation
        if math.isinf(expected):
            assert math.isinf(got)
        else:
            assert got == pytest.approx(expected, rel=1e-9)

    @pytest.mark.parametrize("seed", range(20))
    def test_monotone_under_edge_changes(self, metrics, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(3, 9))
        cells = rng.choice(400, size=n, replace=False)
        pts = [Point2.of(int(c) // 20, int(c) % 20) for c in cells]
        pairs = list(itertools.combinations(range(n), 2))
        g = GeometricGraph(points=pts, edges=[pairs[k] for k in np.flatnonzero(rng.random(len(pairs)) < 0.4)])
        base = metrics.dilation(g).dilation
        extra = pairs[int(rng.integers(len(pairs)))]
        assert metrics.dilation(g.with_edges(added=[extra])).dilation <= base * (1 + 1e-12)
        if g.edges:
            dropped = g.sorted_edges()[int(rng.integers(len(g.edges)))]
            assert metrics.dilation(g.with_edges(removed=[dropped])).dilation >= base * (1 - 1e-12)


class TestIsTSpanner:
    """Test cases for the t-spanner predicate."""

    def test_threshold(self, metrics, square_path):
        assert metrics.is_t_spanner(square_path, 3)
        assert not metrics.is_t_spanner(square_path, Fraction(29, 10))

    def test_tolerance(self, metrics, square_path):
        assert metrics.is_t_spanner(square_path, 3 - 1e-12, tol=1e-9)
        assert not metrics.is_t_spanner(square_path, 3 - 1e-6, tol=1e-9)

    def test_rejects_t_at_most_one(self, metrics, square_path):
        with pytest.raises(MetricsError):
            metrics.is_t_spanner(square_path, 1)
