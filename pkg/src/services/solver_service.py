"""
Desk-scale exact search for minimum-weight (plane) t-spanners, the
low-weight decision problem and minimum dilation under a weight budget.
"""

import logging
import math
import threading
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from itertools import product
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from networkx.utils import UnionFind

from ..geometry import crossing_pairs, has_distinct_points, in_open_segment, squared_distance
from ..models import DecisionResult, GeometricGraph, Point2, SolverOptions, SolverResult
from .builder_service import SpannerBuilder
from .metrics_service import MetricsService, adjacency_matrix, euclidean_matrix, max_stretch

logger = logging.getLogger(__name__)

Number = Union[Fraction, float, int]
Edge = Tuple[int, int]

EXHAUSTIVE_MAX_EDGES = 21
EXHAUSTIVE_MAX_POINTS = 7
DILATION_RESOLUTION = 1e-6
# relative slack when comparing float weights of equal optima
WEIGHT_EPS = 1e-12


class _Stop(Exception):
    pass


class _BudgetExhausted(_Stop):
    pass


class _Found(_Stop):
    pass


class CandidateSpace:
    """
    Candidate edges of one search, sorted by nonincreasing length (ties by
    index pair), with the Euclidean matrix and crossing data they need.
    """

    def __init__(
        self, points: Sequence[Point2], t: Number, opts: SolverOptions, order: str = "descending"
    ):
        self.points = tuple(points)
        self.n = len(self.points)
        self.t = t
        self.limit = float(t) * (1 + opts.tol)
        self.euclid = euclidean_matrix(self.points)
        self.require_plane = opts.require_plane

        cap = None if opts.max_edge_length is None else opts.max_edge_length ** 2
        pairs = []
        for i in range(self.n):
            for j in range(i + 1, self.n):
                sq = squared_distance(self.points[i], self.points[j])
                if cap is not None and sq > cap:
                    continue
                if self.require_plane and any(
                    in_open_segment(self.points[i], self.points[j], pt) for pt in self.points
                ):
                    continue
                pairs.append((sq, i, j))
        if order == "descending":
            pairs.sort(key=lambda e: (-e[0], e[1], e[2]))
        else:
            pairs.sort()

        self.edges: List[Edge] = [(i, j) for _, i, j in pairs]
        self.m = len(self.edges)
        self.lengths = np.array([self.euclid[i, j] for i, j in self.edges], dtype=float)
        self.rows = np.array([i for i, _ in self.edges], dtype=int)
        self.cols = np.array([j for _, j in self.edges], dtype=int)
        self.ascending = sorted(range(self.m), key=lambda k: (self.lengths[k], k))

        self.conflicts: List[List[int]] = [[] for _ in range(self.m)]
        if self.require_plane:
            for a, b in crossing_pairs(self.points, self.edges):
                self.conflicts[a].append(b)
                self.conflicts[b].append(a)

    def stretch(self, mask: np.ndarray) -> float:
        adj = np.zeros((self.n, self.n), dtype=float)
        adj[self.rows[mask], self.cols[mask]] = self.lengths[mask]
        return max_stretch(adj, self.euclid)

    def feasible(self, mask: np.ndarray) -> bool:
        return self.stretch(mask) <= self.limit

    def weight(self, mask: np.ndarray) -> float:
        return math.fsum(self.lengths[mask])

    def edge_tuple(self, mask: np.ndarray) -> Tuple[Edge, ...]:
        return tuple(sorted(self.edges[k] for k in np.flatnonzero(mask)))

    def completion(self, included: np.ndarray, available: np.ndarray) -> float:
        """Kruskal completion: cheapest forest joining the included components."""
        forest = UnionFind(range(self.n))
        components = self.n
        for k in np.flatnonzero(included):
            i, j = self.edges[k]
            if forest[i] != forest[j]:
                forest.union(i, j)
                components -= 1
        extra = 0.0
        for k in self.ascending:
            if components == 1:
                break
            if not available[k]:
                continue
            i, j = self.edges[k]
            if forest[i] != forest[j]:
                forest.union(i, j)
                components -= 1
                extra += self.lengths[k]
        return extra if components == 1 else math.inf


class _SharedState:
    """Incumbent, node counter and stop flag shared by the search workers."""

    def __init__(self, budget: int, bound: float, decide: bool):
        self.lock = threading.Lock()
        self.budget = budget
        self.nodes = 0
        self.decide = decide
        self.bound = bound
        self.weight = math.inf
        self.edges: Optional[Tuple[Edge, ...]] = None
        self.stopped: Optional[str] = None

    def tick(self) -> None:
        with self.lock:
            if self.stopped:
                raise _Stop(self.stopped)
            self.nodes += 1
            if self.nodes > self.budget:
                self.stopped = "budget"
                raise _BudgetExhausted()

    def offer(self, weight: float, edges: Tuple[Edge, ...]) -> None:
        with self.lock:
            if self.edges is None or (weight, edges) < (self.weight, self.edges):
                self.weight, self.edges = weight, edges
            if self.decide and weight <= self.bound:
                self.stopped = "found"
                raise _Found()

    def prune_above(self) -> float:
        if self.decide:
            return self.bound
        return min(self.bound, self.weight * (1 + WEIGHT_EPS))


class _BranchAndBound:
    """
    Depth-first include/exclude search over the candidate order,
    exclude branch first.
    """

    def __init__(self, space: CandidateSpace, shared: _SharedState):
        self.space = space
        self.shared = shared
        self.status = np.zeros(space.m, dtype=np.int8)
        self.blocked = np.zeros(space.m, dtype=np.int32)

    def run(self, prefix: Sequence[int] = ()) -> None:
        weight = 0.0
        for k, decision in enumerate(prefix):
            if decision == 1:
                if self.blocked[k]:
                    return
                self._include(k)
                weight += self.space.lengths[k]
            else:
                self.status[k] = -1
        self._visit(len(prefix), weight, "root")

    def _include(self, k: int) -> None:
        self.status[k] = 1
        for c in self.space.conflicts[k]:
            self.blocked[c] += 1

    def _release(self, k: int) -> None:
        self.status[k] = 0
        for c in self.space.conflicts[k]:
            self.blocked[c] -= 1

    def _visit(self, k: int, weight: float, changed: str) -> None:
        space = self.space
        self.shared.tick()
        included = self.status == 1
        available = (self.status == 0) & (self.blocked == 0)

        # optimistic completion: every undecided edge that can still be added
        if changed == "root" or changed == "out" or space.require_plane:
            if not space.feasible(included | available):
                return
        if changed != "out" and included.sum() >= space.n - 1 and space.feasible(included):
            self.shared.offer(space.weight(included), space.edge_tuple(included))
            return

        if weight + space.completion(included, available) > self.shared.prune_above():
            return
        if k == space.m:
            return

        self.status[k] = -1
        self._visit(k + 1, weight, "out")
        self.status[k] = 0
        if not self.blocked[k]:
            self._include(k)
            self._visit(k + 1, weight + space.lengths[k], "in")
            self._release(k)


class SolverService:
    """Service for exact spanner optimisation and decision at desk scale."""

    def __init__(
        self,
        metrics: Optional[MetricsService] = None,
        builder: Optional[SpannerBuilder] = None,
        defaults: Optional[SolverOptions] = None,
    ):
        """
        Args:
            metrics: Metrics service used to report dilations
            builder: Builder providing the greedy incumbent
            defaults: Options used when a call passes none
        """
        self.metrics = metrics or MetricsService()
        self.builder = builder or SpannerBuilder()
        self.defaults = defaults or SolverOptions(tol=self.metrics.tolerance)

    def min_weight_spanner(
        self, points: Sequence[Point2], t: Number, opts: Optional[SolverOptions] = None
    ) -> SolverResult:
        """
        Minimum-weight t-spanner over the candidate edges.

        Among optimal edge sets the lexicographically smallest sorted edge
        list is returned, for any worker count.
        """
        opts = opts or self.defaults
        pts = self._validated(points, t)
        space = CandidateSpace(pts, t, opts)
        logger.info(f"min-weight search: {len(pts)} points, {space.m} candidate edges, t={t}, mode={opts.mode}")

        if opts.mode == "exhaustive":
            found, nodes = self._exhaustive(space)
            if found is None:
                return SolverResult(status="infeasible", nodes=nodes)
            return self._result("optimal", space, found[1], nodes)

        shared = _SharedState(opts.node_budget, math.inf, decide=False)
        self._seed_incumbent(space, shared)
        self._search(space, shared, opts.threads)

        if shared.stopped == "budget":
            logger.warning(f"node budget {opts.node_budget} exhausted; reporting the incumbent")
            if shared.edges is None:
                return SolverResult(status="budget_exceeded", nodes=shared.nodes)
            return self._result("budget_exceeded", space, shared.edges, shared.nodes)
        if shared.edges is None:
            return SolverResult(status="infeasible", nodes=shared.nodes)
        return self._result("optimal", space, shared.edges, shared.nodes)

    def min_weight_plane_spanner(
        self, points: Sequence[Point2], t: Number, opts: Optional[SolverOptions] = None
    ) -> SolverResult:
        """As min_weight_spanner with no two edges properly crossing."""
        opts = (opts or self.defaults).model_copy(update={"require_plane": True})
        return self.min_weight_spanner(points, t, opts)

    def decide_lwst(
        self, points: Sequence[Point2], t: Number, w: Number, opts: Optional[SolverOptions] = None
    ) -> DecisionResult:
        """
        Is there a t-spanner of weight at most w?

        Exhaustion of the node budget gives "indeterminate", never "no".
        """
        opts = opts or self.defaults
        pts = self._validated(points, t)
        if w <= 0:
            raise SolverError(f"weight bound must be positive, got {w}")
        space = CandidateSpace(pts, t, opts)
        bound = float(w) * (1 + opts.tol)

        everything = np.ones(space.m, dtype=bool)
        lower = space.completion(np.zeros(space.m, dtype=bool), everything)
        if lower > bound:
            logger.info(f"lower bound {lower:.15g} exceeds w={float(w):.15g}")
            return DecisionResult(outcome="no")

        shared = _SharedState(opts.node_budget, bound, decide=True)
        try:
            self._seed_incumbent(space, shared)
        except _Found:
            pass
        if shared.stopped != "found":
            self._search(space, shared, opts.threads)

        if shared.stopped == "found":
            graph = GeometricGraph(points=pts, edges=frozenset(shared.edges))
            return DecisionResult(outcome="yes", witness=graph, weight=shared.weight, nodes=shared.nodes)
        if shared.stopped == "budget":
            logger.warning(f"decision undetermined after {shared.nodes} nodes")
            return DecisionResult(outcome="indeterminate", nodes=shared.nodes)
        return DecisionResult(outcome="no", nodes=shared.nodes)

    def min_dilation_under_budget(
        self, points: Sequence[Point2], w: Number, opts: Optional[SolverOptions] = None
    ) -> SolverResult:
        """
        Graph of weight at most w with the least dilation.

        Small inputs enumerate every maximal edge set that fits the budget
        and pick the least (dilation, weight, edges). Larger inputs bisect
        on t with decide_lwst down to a resolution of 1e-6.
        """
        opts = opts or self.defaults
        if opts.require_plane:
            raise SolverError("minimum dilation search does not take a plane constraint")
        pts = self._validated(points, 2)
        space = CandidateSpace(pts, 2, opts, order="ascending")
        budget = float(w) * (1 + opts.tol + WEIGHT_EPS)
        mst = space.completion(np.zeros(space.m, dtype=bool), np.ones(space.m, dtype=bool))
        if mst > budget:
            logger.info(f"budget {float(w):.15g} below the spanning tree weight {mst:.15g}")
            return SolverResult(status="infeasible")

        if len(pts) <= EXHAUSTIVE_MAX_POINTS and space.m <= EXHAUSTIVE_MAX_EDGES:
            return self._min_dilation_exhaustive(space, budget)
        return self._min_dilation_bisection(pts, w, opts)

    # Search drivers

    def _search(self, space: CandidateSpace, shared: _SharedState, threads: int) -> None:
        if threads <= 1 or space.m < 2:
            try:
                _BranchAndBound(space, shared).run()
            except _Stop:
                pass
            return

        depth = min(space.m, max(1, math.ceil(math.log2(threads))) + 1)
        prefixes = list(product((-1, 1), repeat=depth))

        def work(prefix):
            try:
                _BranchAndBound(space, shared).run(prefix)
            except _Stop:
                pass

        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(work, prefixes))

    def _seed_incumbent(self, space: CandidateSpace, shared: _SharedState) -> None:
        greedy = self.builder.path_greedy_spanner(space.points, space.t)
        index = {e: k for k, e in enumerate(space.edges)}
        if any(e not in index for e in greedy.edges):
            return
        mask = np.zeros(space.m, dtype=bool)
        mask[[index[e] for e in greedy.edges]] = True
        if space.require_plane and any(mask[c] for k in np.flatnonzero(mask) for c in space.conflicts[k]):
            return
        if space.feasible(mask):
            logger.debug(f"greedy incumbent weight {space.weight(mask):.15g}")
            shared.offer(space.weight(mask), space.edge_tuple(mask))

    def _exhaustive(self, space: CandidateSpace):
        """Scan every edge subset by increasing weight; first feasible wins."""
        masks, bits, approx = self._mask_table(space)
        ok = np.ones(len(masks), dtype=bool)
        if space.require_plane:
            for k in range(space.m):
                conflict = sum(1 << c for c in space.conflicts[k])
                if conflict:
                    ok &= ~(bits[:, k] & ((masks & conflict) != 0))
        ok &= bits.sum(axis=1) >= space.n - 1

        best = None
        threshold = math.inf
        nodes = 0
        for idx in np.argsort(approx, kind="stable"):
            if approx[idx] > threshold:
                break
            if not ok[idx]:
                continue
            nodes += 1
            mask = bits[idx]
            if space.feasible(mask):
                key = (space.weight(mask), space.edge_tuple(mask))
                if best is None or key < best:
                    best = key
                threshold = min(threshold, approx[idx] * (1 + 1e-9))
        return best, nodes

    def _min_dilation_exhaustive(self, space: CandidateSpace, budget: float) -> SolverResult:
        masks, bits, approx = self._mask_table(space)
        # candidates are ascending, so the lowest clear bit is the lightest absent edge
        lowest_clear = (~masks) & (masks + 1)
        first_absent = np.log2(lowest_clear).astype(int)
        next_length = np.append(space.lengths, math.inf)[first_absent]
        maximal = (approx <= budget) & (approx + next_length > budget)

        best = None
        for idx in np.flatnonzero(maximal):
            mask = bits[idx]
            dilation = space.stretch(mask)
            if not math.isfinite(dilation):
                continue
            key = (dilation, space.weight(mask), space.edge_tuple(mask))
            if best is None or key < best:
                best = key
        if best is None:
            return SolverResult(status="infeasible", nodes=int(maximal.sum()))
        graph = GeometricGraph(points=space.points, edges=frozenset(best[2]))
        logger.info(f"minimum dilation {best[0]:.15g} at weight {best[1]:.15g}")
        return SolverResult(
            status="optimal", graph=graph, weight=best[1], dilation=best[0], nodes=int(maximal.sum())
        )

    def _min_dilation_bisection(
        self, points: Tuple[Point2, ...], w: Number, opts: SolverOptions
    ) -> SolverResult:
        tree = self.builder.euclidean_mst(points)
        best_graph = tree
        hi = self.metrics.dilation(tree).dilation
        lo = 1.0
        nodes = 0
        while hi - lo > DILATION_RESOLUTION:
            mid = (lo + hi) / 2
            decision = self.decide_lwst(points, mid, w, opts)
            nodes += decision.nodes
            if decision.outcome == "yes":
                best_graph = decision.witness
                hi = min(mid, self.metrics.dilation(best_graph).dilation)
            elif decision.outcome == "no":
                lo = mid
            else:
                logger.warning(f"bisection stopped at [{lo:.9g}, {hi:.9g}]: node budget exhausted")
                return SolverResult(
                    status="budget_exceeded",
                    graph=best_graph,
                    weight=self.metrics.graph_weight(best_graph),
                    dilation=self.metrics.dilation(best_graph).dilation,
                    nodes=nodes,
                )
        return SolverResult(
            status="optimal",
            graph=best_graph,
            weight=self.metrics.graph_weight(best_graph),
            dilation=self.metrics.dilation(best_graph).dilation,
            nodes=nodes,
        )

    # Helpers

    @staticmethod
    def _mask_table(space: CandidateSpace):
        if space.m > EXHAUSTIVE_MAX_EDGES:
            raise SolverError(
                f"exhaustive enumeration limited to {EXHAUSTIVE_MAX_EDGES} candidate edges, got {space.m}"
            )
        masks = np.arange(1 << space.m, dtype=np.int64)
        bits = np.empty((len(masks), space.m), dtype=bool)
        for k in range(space.m):
            bits[:, k] = (masks >> k) & 1
        approx = bits @ space.lengths
        return masks, bits, approx

    def _result(
        self, status: str, space: CandidateSpace, edges: Tuple[Edge, ...], nodes: int
    ) -> SolverResult:
        graph = GeometricGraph(points=space.points, edges=frozenset(edges))
        return SolverResult(
            status=status,
            graph=graph,
            weight=self.metrics.graph_weight(graph),
            dilation=self.metrics.dilation(graph).dilation,
            nodes=nodes,
        )

    @staticmethod
    def _validated(points: Sequence[Point2], t: Number) -> Tuple[Point2, ...]:
        pts = tuple(points)
        if len(pts) < 2:
            raise SolverError("at least 2 points are required")
        if not has_distinct_points(pts):
            raise SolverError("points must be pairwise distinct")
        if t <= 1:
            raise SolverError(f"t must exceed 1, got {t}")
        return pts


class SolverError(ValueError):
    """Custom exception for invalid solver input."""
    pass
