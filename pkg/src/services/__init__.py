"""
Services module for the t-spanner toolkit.
"""

from .metrics_service import MetricsService, MetricsError
from .builder_service import SpannerBuilder, BuilderError
from .shortcut_service import ShortcutService, ShortcutPreconditionError
from .reduction_service import ReductionService, ReductionError
from .solver_service import SolverService, SolverError
from .render_service import RenderService, RenderError

__all__ = [
    "MetricsService",
    "MetricsError",
    "SpannerBuilder",
    "BuilderError",
    "ShortcutService",
    "ShortcutPreconditionError",
    "ReductionService",
    "ReductionError",
    "SolverService",
    "SolverError",
    "RenderService",
    "RenderError",
]
