"""
PARTITION -> low-weight t-spanner instance generation and verification.

Both regimes share the horizontal component: a top edge of width R(n+2)
on the x-axis, from p' at the origin to q' at (R(n+2), 0), holding n+1
length-R segments halved by middle points and the n gadget bases, with
each gadget apex above its base midpoint. The two sides hang below p'
and q'; p and q are their bottom points.

Points are stored in backbone order, so the backbone path is simply
(i, i+1) for every consecutive pair.
"""

import json
import logging
import math
from fractions import Fraction
from pathlib import Path
from typing import Callable, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..geometry import exact_sqrt, is_plane_graph, sqrt_floor, squared_distance
from ..models import (
    BudgetReport,
    DominanceReport,
    ForwardReport,
    GadgetMeta,
    GeometricGraph,
    HardnessInstance,
    InstanceEndpoints,
    PartitionInstance,
    Point2,
    ShortEdge,
    Triple,
    parse_rational,
    rectangle_side_length,
    trapezoid_side_length,
    trapezoid_sin_alpha,
)
from .metrics_service import MetricsService
from .shortcut_service import ShortcutService

logger = logging.getLogger(__name__)

LARGE_T_MIN = Fraction(2)
SIDE_REMOVAL_T = Fraction(11, 5)


def _floor_to(value: Fraction, digits: int) -> Fraction:
    scale = 10 ** digits
    return Fraction(math.floor(value * scale), scale)


def _side_depths(length: Fraction, step: Fraction) -> List[Fraction]:
    """Distances from the top corner, every `step`, the last one at `length`."""
    count = math.ceil(length / step)
    return [min(j * step, length) for j in range(1, count + 1)]


class ReductionService:
    """Service building and checking the hardness instances."""

    def __init__(
        self,
        metrics: Optional[MetricsService] = None,
        shortcuts: Optional[ShortcutService] = None,
    ):
        self.metrics = metrics or MetricsService()
        self.shortcuts = shortcuts or ShortcutService(tolerance=self.metrics.tolerance)

    # Construction

    def build(
        self,
        partition: PartitionInstance,
        t: Union[Fraction, int, str],
        precision_digits: Optional[int] = None,
        allow_dominant: bool = False,
    ) -> HardnessInstance:
        """Dispatch on t: the rectangle for t >= 2, the trapezoid below."""
        t = self._rational_t(t)
        if t >= LARGE_T_MIN:
            return self.build_large_t(partition, t, allow_dominant=allow_dominant)
        return self.build_small_t(partition, t, precision_digits, allow_dominant=allow_dominant)

    def build_large_t(
        self,
        partition: PartitionInstance,
        t: Union[Fraction, int, str],
        allow_dominant: bool = False,
    ) -> HardnessInstance:
        """
        Axis-parallel construction for t >= 2.

        Gadgets have sides (5/6)x and apex height (2/3)x. The vertical sides
        have length (R/2)(t(n+2) - n - 7/3) and are sampled every R/2 from
        the top; the bottom gap may be shorter.

        Raises:
            ReductionError: If t < 2 or an element is >= R/2 without allow_dominant
        """
        t = self._rational_t(t)
        if t < LARGE_T_MIN:
            raise ReductionError(f"the rectangle construction needs t >= 2, got {t}")
        self._check_partition(partition, allow_dominant)
        n, total = partition.n, partition.total
        half = Fraction(total, 2)

        side = rectangle_side_length(partition, t)
        top, gadgets = self._horizontal_component(partition.values, total, lambda x: Fraction(2 * x, 3))
        width = Fraction(total * (n + 2))
        depths = _side_depths(side, half)
        left = [Point2(x=0, y=-d) for d in reversed(depths)]
        right = [Point2(x=width, y=-d) for d in depths]

        if t < SIDE_REMOVAL_T:
            w = total * (t * (n + 2) + Fraction(5, 6))
        else:
            w = total * (t * (n + 2) + Fraction(5, 12))
        inst = self._assemble("large_t", t, w, left, top, right, gadgets, partition, side)
        logger.info(f"rectangle instance: n={n}, R={total}, t={t}, |P|={len(inst.points)}, w={w}")
        return inst

    def build_small_t(
        self,
        partition: PartitionInstance,
        t: Union[Fraction, int, str],
        precision_digits: Optional[int] = None,
        allow_dominant: bool = False,
    ) -> HardnessInstance:
        """
        Trapezoid construction for 1 < t < 2.

        Gadgets have sides (t/2)x, apex heights rounded down to
        `precision_digits` decimals (default n). The sides, of length
        (R/2)(n+3/2)(3t/2), leave the top corners outward at angle alpha_t
        from the vertical, sin(alpha_t) = 2/(3t^2) + 1/(3t). Side samples
        are rounded outward in x and upward in y, then clamped so that no
        rounded gap is longer than its exact gap.
        """
        t = self._rational_t(t)
        if not 1 < t < LARGE_T_MIN:
            raise ReductionError(f"the trapezoid construction needs 1 < t < 2, got {t}")
        self._check_partition(partition, allow_dominant)
        n, total = partition.n, partition.total
        digits = n if precision_digits is None else precision_digits
        if digits < 1:
            raise ReductionError(f"precision_digits must be positive, got {digits}")
        half = Fraction(total, 2)

        sin_alpha = trapezoid_sin_alpha(t)
        cos_sq = 1 - sin_alpha * sin_alpha
        side = trapezoid_side_length(partition, t)
        stretch = t * t - 1

        def apex_height(x: int) -> Fraction:
            return sqrt_floor(Fraction(x * x, 4) * stretch, digits)

        top, gadgets = self._horizontal_component(partition.values, total, apex_height)
        width = Fraction(total * (n + 2))

        left_down: List[Point2] = []
        prev_x, prev_y, prev_depth = Fraction(0), Fraction(0), Fraction(0)
        for depth in _side_depths(side, half):
            x = _floor_to(-depth * sin_alpha, digits)
            y = -sqrt_floor(depth * depth * cos_sq, digits)
            gap = depth - prev_depth
            dx = prev_x - x
            if dx > gap:
                raise ReductionError(f"precision {digits} too coarse for side spacing {gap}")
            rise = sqrt_floor(gap * gap - dx * dx, digits)
            if prev_y - y > rise:
                y = prev_y - rise
            left_down.append(Point2(x=x, y=y))
            prev_x, prev_y, prev_depth = x, y, depth

        left = list(reversed(left_down))
        right = [Point2(x=width - pt.x, y=pt.y) for pt in left_down]

        w = total * (n + t + Fraction(3, 2) + (n + Fraction(3, 2)) * (3 * t / 2))
        inst = self._assemble(
            "small_t", t, w, left, top, right, gadgets, partition, side,
            sin_alpha=sin_alpha, precision_digits=digits,
        )
        logger.info(
            f"trapezoid instance: n={n}, R={total}, t={t}, digits={digits}, |P|={len(inst.points)}"
        )
        return inst

    @staticmethod
    def expected_point_count(partition: PartitionInstance, t: Fraction) -> int:
        n = partition.n
        if t >= LARGE_T_MIN:
            return 4 * n + 3 + 2 * math.ceil(t * (n + 2) - n - Fraction(7, 3))
        return 4 * n + 3 + 2 * math.ceil((n + Fraction(3, 2)) * (3 * t / 2))

    # Graphs over an instance

    def backbone_path(self, inst: HardnessInstance) -> GeometricGraph:
        """The Hamiltonian path p -> up the left side -> across the top -> down to q."""
        m = len(inst.points)
        return inst.as_graph((i, i + 1) for i in range(m - 1))

    def apply_gadget_shortcuts(self, inst: HardnessInstance, subset: Iterable[int]) -> GeometricGraph:
        """
        Backbone plus the bases of the selected gadgets.

        For the rectangle with t >= 11/5 each selected gadget also loses the
        side incident to its right base endpoint.
        """
        chosen = self._gadget_indices(inst, subset)
        added = [(inst.gadgets[i].base_left, inst.gadgets[i].base_right) for i in chosen]
        removed: List[Tuple[int, int]] = []
        if inst.regime == "large_t" and inst.t >= SIDE_REMOVAL_T:
            removed = [(inst.gadgets[i].apex, inst.gadgets[i].base_right) for i in chosen]
        return self.backbone_path(inst).with_edges(added=added, removed=removed)

    # Budgets

    def budget_report(self, inst: HardnessInstance) -> BudgetReport:
        """
        Exact budget quantities. For the trapezoid they describe the
        unrounded construction.
        """
        n, total, t = inst.partition.n, inst.total, inst.t
        if inst.regime == "large_t":
            backbone = total * (t * (n + 2) + Fraction(1, 3))
            pq = Fraction(total * (n + 2))
            efficiency = Fraction(2, 3) if t < SIDE_REMOVAL_T else Fraction(4)
        else:
            backbone = total * (n + t + 1 + (n + Fraction(3, 2)) * (3 * t / 2))
            pq = total * (n + 2) + 2 * inst.side_length * inst.sin_alpha
            efficiency = t - 1
        bound = t * pq
        measured = self.metrics.graph_weight(self.backbone_path(inst))
        return BudgetReport(
            backbone_weight=backbone,
            spanner_bound=bound,
            required_shortening=backbone - bound,
            remaining_weight=inst.w - backbone,
            gadget_efficiency=efficiency,
            measured_backbone_weight=measured,
        )

    # Verification

    def verify_forward(
        self, inst: HardnessInstance, subset: Iterable[int], tol: Optional[float] = None
    ) -> ForwardReport:
        """
        Build the shortcut graph of a partition witness and check weight,
        dilation (all pairs) and planarity. Failures are reported, not raised.
        """
        tol = self.metrics.tolerance if tol is None else tol
        chosen = tuple(sorted(set(subset)))
        in_range = all(0 <= i < len(inst.gadgets) for i in chosen)
        if not in_range or 2 * sum(inst.gadgets[i].value for i in chosen) != inst.total:
            logger.info(f"subset {chosen} is not a partition witness")
            return ForwardReport(valid_subset=False, subset=chosen, weight_bound=inst.w)

        graph = self.apply_gadget_shortcuts(inst, chosen)
        achieved = self.metrics.graph_weight(graph)
        exact = self.metrics.exact_graph_weight(graph)
        marginal = False
        if exact is not None:
            weight_ok = exact <= inst.w
        else:
            weight_ok = self.metrics.within(achieved, inst.w, tol)
            marginal = weight_ok and achieved > inst.w

        report = self.metrics.dilation(graph)
        dilation_ok = self.metrics.within(report.dilation, inst.t, tol)
        if dilation_ok and report.dilation > inst.t:
            marginal = True
        plane_ok = is_plane_graph(graph)

        if marginal:
            logger.warning(
                f"forward check passed only within tolerance {tol}: "
                f"weight={achieved!r} (w={float(inst.w)!r}), dilation={report.dilation!r} (t={float(inst.t)!r})"
            )
        return ForwardReport(
            valid_subset=True,
            subset=chosen,
            weight_ok=weight_ok,
            dilation_ok=dilation_ok,
            plane_ok=plane_ok,
            achieved_weight=achieved,
            exact_weight=exact,
            weight_bound=inst.w,
            achieved_dilation=report.dilation,
            witness_pair=report.witness_pair,
            marginal=marginal,
        )

    def solve_partition(self, partition: PartitionInstance) -> Optional[Tuple[int, ...]]:
        """
        Subset-sum dynamic program over sums 0..R/2.

        Returns the lexicographically smallest index set summing to R/2,
        or None.
        """
        values = partition.values
        n, target = partition.n, partition.total // 2
        # reach[i, s]: some subset of values[i:] sums to s
        reach = np.zeros((n + 1, target + 1), dtype=bool)
        reach[n, 0] = True
        for i in range(n - 1, -1, -1):
            x = values[i]
            reach[i] = reach[i + 1]
            if x <= target:
                reach[i, x:] |= reach[i + 1, : target + 1 - x]
        if not reach[0, target]:
            logger.debug(f"no partition of {values}")
            return None

        witness = []
        remaining = target
        for i, x in enumerate(values):
            if remaining == 0:
                break
            if x <= remaining and reach[i + 1, remaining - x]:
                witness.append(i)
                remaining -= x
        return tuple(witness)

    def gadget_triple(
        self,
        value: int,
        t: Union[Fraction, int, str],
        regime: Optional[str] = None,
        precision_digits: Optional[int] = None,
    ) -> Triple:
        """
        The path base_left -> apex -> base_right of one gadget.

        An irrational trapezoid apex height is rounded down to
        `precision_digits` decimals (20 when not given).
        """
        t = self._rational_t(t)
        regime = regime or ("large_t" if t >= LARGE_T_MIN else "small_t")
        x = Fraction(value)
        if regime == "large_t":
            height = 2 * x / 3
        else:
            squared = x * x / 4 * (t * t - 1)
            height = exact_sqrt(squared)
            if height is None:
                height = sqrt_floor(squared, 20 if precision_digits is None else precision_digits)
        return Triple(p=Point2(x=0, y=0), s=Point2(x=x / 2, y=height), q=Point2(x=x, y=0))

    def classify_short_edges(self, inst: HardnessInstance) -> List[ShortEdge]:
        """
        Edges of length <= R closing a 3-cycle with the backbone.

        Type 1 is a gadget base, type 2 touches an apex, type 3 skips over a
        top corner. Other backbone 2-hops run along a straight part of the
        path and are not t-shortcut candidates.
        """
        pts = inst.points
        apexes = {g.apex for g in inst.gadgets}
        corners = {inst.endpoints.p_prime, inst.endpoints.q_prime}
        limit = Fraction(inst.total) ** 2
        efficiency_bound = self.budget_report(inst).gadget_efficiency
        out = []
        for a in range(len(pts) - 2):
            mid, b = a + 1, a + 2
            if squared_distance(pts[a], pts[b]) > limit:
                continue
            if mid in apexes:
                edge_type = 1
            elif a in apexes or b in apexes:
                edge_type = 2
            elif mid in corners:
                edge_type = 3
            else:
                continue
            tri = Triple(p=pts[a], s=pts[mid], q=pts[b])
            efficiency = float(self.shortcuts.best_efficiency(tri, inst.t))
            if edge_type == 1:
                dominated = self.metrics.within(efficiency, efficiency_bound, 1e-12)
            else:
                dominated = efficiency < efficiency_bound
            out.append(ShortEdge(
                edge=(a, b), middle=mid, edge_type=edge_type, efficiency=efficiency, dominated=dominated
            ))
        return out

    def verify_gadget_dominance(self, inst: HardnessInstance) -> DominanceReport:
        """Every non-gadget short t-shortcut is strictly less efficient than a gadget one."""
        edges = self.classify_short_edges(inst)
        report = DominanceReport(gadget_efficiency=self.budget_report(inst).gadget_efficiency, edges=edges)
        for edge in edges:
            if not edge.dominated:
                logger.warning(
                    f"type {edge.edge_type} edge {edge.edge} has efficiency {edge.efficiency:.6g} "
                    f">= gadget efficiency {float(report.gadget_efficiency):.6g}"
                )
        return report

    # I/O

    @staticmethod
    def load_instance(source: Union[str, Path, dict]) -> HardnessInstance:
        if isinstance(source, dict):
            return HardnessInstance.model_validate(source)
        try:
            data = json.loads(Path(source).read_text(encoding="utf-8"))
        except json.JSONDecodeError as e:
            raise ReductionError(f"malformed instance JSON in {source}: {e}") from e
        return HardnessInstance.model_validate(data)

    # Helpers

    @staticmethod
    def _rational_t(t: Union[Fraction, int, str]) -> Fraction:
        try:
            value = parse_rational(t)
        except ValueError as e:
            raise ReductionError(str(e)) from e
        if value <= 1:
            raise ReductionError(f"t must exceed 1, got {value}")
        return value

    @staticmethod
    def _check_partition(partition: PartitionInstance, allow_dominant: bool) -> None:
        if not partition.has_dominant_element:
            return
        if not allow_dominant:
            raise ReductionError(
                f"element >= R/2 in {list(partition.values)}; the construction assumes every x < R/2"
            )
        logger.warning(f"building an instance with a dominant element: {list(partition.values)}")

    @staticmethod
    def _horizontal_component(
        values: Sequence[int], total: int, apex_height: Callable[[int], Fraction]
    ) -> Tuple[List[Point2], List[Tuple[int, int, int, int]]]:
        half = Fraction(total, 2)
        pts = [Point2(x=0, y=0)]
        gadgets = []
        cursor = Fraction(0)
        for x in values:
            pts.append(Point2(x=cursor + half, y=0))
            left = cursor + total
            pts.append(Point2(x=left, y=0))
            pts.append(Point2(x=left + Fraction(x, 2), y=apex_height(x)))
            pts.append(Point2(x=left + x, y=0))
            base = len(pts) - 3
            gadgets.append((x, base, base + 2, base + 1))
            cursor = left + x
        pts.append(Point2(x=cursor + half, y=0))
        pts.append(Point2(x=cursor + total, y=0))
        return pts, gadgets

    @staticmethod
    def _assemble(
        regime: str,
        t: Fraction,
        w: Fraction,
        left: List[Point2],
        top: List[Point2],
        right: List[Point2],
        gadgets: List[Tuple[int, int, int, int]],
        partition: PartitionInstance,
        side: Fraction,
        sin_alpha: Fraction = Fraction(0),
        precision_digits: Optional[int] = None,
    ) -> HardnessInstance:
        offset = len(left)
        points = tuple(left + top + right)
        metas = tuple(
            GadgetMeta(value=x, base_left=bl + offset, base_right=br + offset, apex=apex + offset)
            for x, bl, br, apex in gadgets
        )
        endpoints = InstanceEndpoints(
            p=0, q=len(points) - 1, p_prime=offset, q_prime=offset + len(top) - 1
        )
        return HardnessInstance(
            regime=regime,
            t=t,
            w=w,
            points=points,
            gadgets=metas,
            endpoints=endpoints,
            partition=partition,
            side_length=side,
            sin_alpha=sin_alpha,
            precision_digits=precision_digits,
        )

    @staticmethod
    def _gadget_indices(inst: HardnessInstance, subset: Iterable[int]) -> List[int]:
        chosen = sorted(set(subset))
        for i in chosen:
            if not 0 <= i < len(inst.gadgets):
                raise ReductionError(f"gadget index {i} out of range for {len(inst.gadgets)} gadgets")
        return chosen


class ReductionError(ValueError):
    """Custom exception for invalid reduction input."""
    pass
