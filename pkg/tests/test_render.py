"""
Tests for SVG rendering.
"""

import pytest

from src.models import GeometricGraph, PartitionInstance, Point2, RenderStyle
from src.services.reduction_service import ReductionService
from src.services.render_service import RenderError, RenderService


@pytest.fixture
def renderer():
    return RenderService()


@pytest.fixture
def square_cycle():
    pts = [Point2.of(0, 0), Point2.of(1, 0), Point2.of(1, 1), Point2.of(0, 1)]
    return GeometricGraph(points=pts, edges=[(0, 1), (1, 2), (2, 3), (0, 3)])


@pytest.fixture
def instance():
    """Small rectangle instance with a dominant element."""
    return ReductionService().build(PartitionInstance(values=(3, 3)), 2, allow_dominant=True)


class TestRenderSvg:
    """Test cases for graph drawing."""

    def test_svg_document(self, renderer, square_cycle):
        svg = renderer.render_svg(square_cycle)
        assert svg.lstrip().startswith("<?xml")
        assert "</svg>" in svg

    def test_repeated_renders_are_identical(self, renderer, square_cycle):
        assert renderer.render_svg(square_cycle) == renderer.render_svg(square_cycle)

    def test_edgeless_graph(self, renderer, square_cycle):
        empty = square_cycle.with_edges(removed=square_cycle.edges)
        assert "</svg>" in renderer.render_svg(empty)

    def test_style_changes_output(self, renderer, square_cycle):
        styled = renderer.render_svg(square_cycle, style=RenderStyle(edge_color="#0000ff"))
        assert styled != renderer.render_svg(square_cycle)
        assert "#0000ff" in styled


class TestRenderInstance:
    """Test cases for instance drawing."""

    def test_gadget_bases_highlighted(self, renderer, instance):
        graph = ReductionService().apply_gadget_shortcuts(instance, (0,))
        svg = renderer.render_svg(graph, instance=instance)
        assert RenderStyle().highlight_color in svg

    def test_labels_can_be_turned_off(self, renderer, instance):
        graph = ReductionService().backbone_path(instance)
        labeled = renderer.render_svg(graph, instance=instance)
        plain = renderer.render_svg(graph, instance=instance, style=RenderStyle(labels=False))
        assert labeled != plain

    def test_mismatched_points(self, renderer, instance, square_cycle):
        with pytest.raises(RenderError):
            renderer.render_svg(square_cycle, instance=instance)
