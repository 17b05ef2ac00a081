"""
SVG rendering of geometric graphs and hardness instances.
"""

import io
import logging
from typing import Optional

import matplotlib

matplotlib.use("Agg")

from matplotlib import rc_context  # noqa: E402
from matplotlib.collections import LineCollection  # noqa: E402
from matplotlib.figure import Figure  # noqa: E402

from ..models import GeometricGraph, HardnessInstance, RenderStyle  # noqa: E402

logger = logging.getLogger(__name__)

# fixed ids and no timestamp keep repeated renders byte-identical
_SVG_RC = {
    "svg.hashsalt": "spanner-render",
    "svg.fonttype": "none",
    "path.simplify": False,
}


class RenderService:
    """Service drawing graphs to deterministic SVG documents."""

    def __init__(self, style: Optional[RenderStyle] = None):
        self.style = style or RenderStyle()

    def render_svg(
        self,
        graph: GeometricGraph,
        instance: Optional[HardnessInstance] = None,
        style: Optional[RenderStyle] = None,
    ) -> str:
        """
        Draw points as dots and edges as segments.

        With an instance, gadget base edges present in the graph and the
        apexes are highlighted and p, q (and the top corners) are labeled.
        The y-axis points up, so apexes appear above the top edge.

        Raises:
            RenderError: If the instance does not match the graph's points
        """
        style = style or self.style
        if instance is not None and tuple(instance.points) != tuple(graph.points):
            raise RenderError("graph and instance have different point lists")

        coords = [pt.as_float() for pt in graph.points]
        xs = [x for x, _ in coords]
        ys = [y for _, y in coords]
        span_x = (max(xs) - min(xs)) if xs else 1.0
        span_y = (max(ys) - min(ys)) if ys else 1.0
        height = style.height or max(2.0, style.width * (span_y or 1.0) / (span_x or 1.0))

        bases = set()
        apexes = set()
        if instance is not None:
            bases = {(g.base_left, g.base_right) for g in instance.gadgets}
            apexes = {g.apex for g in instance.gadgets}

        plain = [(coords[i], coords[j]) for i, j in graph.sorted_edges() if (i, j) not in bases]
        marked = [(coords[i], coords[j]) for i, j in graph.sorted_edges() if (i, j) in bases]

        with rc_context(_SVG_RC):
            fig = Figure(figsize=(style.width, height))
            ax = fig.add_subplot(1, 1, 1)
            ax.set_aspect("equal")
            ax.set_axis_off()
            if plain:
                ax.add_collection(LineCollection(plain, colors=style.edge_color, linewidths=style.edge_width))
            if marked:
                ax.add_collection(LineCollection(
                    marked, colors=style.highlight_color, linewidths=2 * style.edge_width
                ))
            if coords:
                ax.plot(xs, ys, linestyle="none", marker="o", markersize=style.point_size,
                        color=style.point_color)
            if apexes:
                ax.plot([xs[a] for a in sorted(apexes)], [ys[a] for a in sorted(apexes)],
                        linestyle="none", marker="^", markersize=style.point_size * 1.5,
                        color=style.highlight_color)
            if instance is not None and style.labels:
                ends = instance.endpoints
                for label, idx in (("p", ends.p), ("q", ends.q), ("p'", ends.p_prime), ("q'", ends.q_prime)):
                    ax.annotate(label, coords[idx], textcoords="offset points", xytext=(4, 4))
            ax.autoscale_view()

            buffer = io.StringIO()
            fig.savefig(buffer, format="svg", metadata={"Date": None})
        svg = buffer.getvalue()
        logger.debug(f"rendered {graph.n} points, {len(graph.edges)} edges ({len(svg)} bytes)")
        return svg


class RenderError(ValueError):
    """Custom exception for rendering errors."""
    pass
