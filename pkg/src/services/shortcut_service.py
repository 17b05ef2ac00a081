"""
t-shortcuts on three-point paths and numeric checks of the efficiency
inequalities built on them.
"""

import logging
import math
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Union

import numpy as np

from ..geometry import exact_sqrt, length, orientation
from ..models import (
    CollinearCheck,
    IsoscelesCheck,
    LemmaSweepReport,
    Length,
    ObtuseCheck,
    Point2,
    ShortcutEvaluation,
    ShortcutReport,
    TriangleStretchCheck,
    Triple,
)

logger = logging.getLogger(__name__)

Number = Union[Fraction, float]


def _efficiency(benefit: Length, cost: Length) -> Length:
    if cost <= 0:
        return math.inf
    if isinstance(benefit, Fraction) and isinstance(cost, Fraction):
        return benefit / cost
    return float(benefit) / float(cost)


def _polar(r: float, angle: float) -> Point2:
    return Point2(x=r * math.cos(angle), y=r * math.sin(angle))


class ShortcutService:
    """Service evaluating t-shortcuts and the efficiency lemmas."""

    def __init__(self, tolerance: float = 1e-9):
        """
        Args:
            tolerance: Relative slack for inequalities over inexact lengths
        """
        self.tolerance = tolerance

    def evaluate_shortcuts(self, tri: Triple, t: Number) -> ShortcutEvaluation:
        """
        Enumerate the legal t-shortcuts of the path p-s-q.

        The candidates are: add pq; add pq and drop sq; add pq and drop ps.
        A removal is legal when the remaining two edges still t-span the
        triple. The best option maximises efficiency; cost <= 0 options only
        win when nothing else is legal, and ties prefer fewer removals, then
        dropping sq.
        """
        if t <= 1:
            raise ShortcutPreconditionError(f"t must exceed 1, got {t}")
        ps = length(tri.p, tri.s)
        sq = length(tri.s, tri.q)
        pq = length(tri.p, tri.q)
        if orientation(tri.p, tri.s, tri.q) == 0 and self._between(tri):
            benefit: Length = Fraction(0) if isinstance(pq, Fraction) else 0.0
        else:
            benefit = ps + sq - pq

        options: List[ShortcutReport] = [
            ShortcutReport(benefit=benefit, cost=pq, efficiency=_efficiency(benefit, pq))
        ]
        # drop sq: s reaches q through p
        if self._le(ps + pq, t * sq):
            cost = pq - sq
            options.append(ShortcutReport(
                removes_edge="sq", benefit=benefit, cost=cost, efficiency=_efficiency(benefit, cost)
            ))
        # drop ps: p reaches s through q
        if self._le(sq + pq, t * ps):
            cost = pq - ps
            options.append(ShortcutReport(
                removes_edge="ps", benefit=benefit, cost=cost, efficiency=_efficiency(benefit, cost)
            ))

        finite = [o for o in options if o.cost > 0]
        pool = finite or options
        best = pool[0]
        for option in pool[1:]:
            if option.efficiency > best.efficiency:
                best = option
        return ShortcutEvaluation(options=tuple(options), best=best)

    def best_efficiency(self, tri: Triple, t: Number) -> Length:
        return self.evaluate_shortcuts(tri, t).best.efficiency

    def verify_lemma_isosceles(self, angle1: float, angle2: float, t: Number) -> IsoscelesCheck:
        """
        Compare the best efficiencies of two isosceles paths with unit legs.

        The narrower apex angle must give the strictly more efficient
        best t-shortcut.
        """
        if not 0 < angle1 < angle2 < math.pi:
            raise ShortcutPreconditionError("angles must satisfy 0 < angle1 < angle2 < pi")
        e = self.best_efficiency(self.isosceles_triple(angle1), t)
        e_wide = self.best_efficiency(self.isosceles_triple(angle2), t)
        return IsoscelesCheck(efficiency=float(e), efficiency_wider=float(e_wide), holds=e > e_wide)

    def verify_lemma_obtuse(self, tri: Triple, k: float, t: Number) -> ObtuseCheck:
        """
        Check the efficiency bound k for an obtuse path with |ps| < |sq|.

        Raises:
            ShortcutPreconditionError: naming the violated hypothesis
        """
        if k <= 0:
            raise ShortcutPreconditionError("k must be positive")
        ps = float(length(tri.p, tri.s))
        sq = float(length(tri.s, tri.q))
        pq = float(length(tri.p, tri.q))
        if not ps < sq:
            raise ShortcutPreconditionError("|ps| < |sq| does not hold")
        cos_angle = (ps * ps + sq * sq - pq * pq) / (2 * ps * sq)
        if not cos_angle < 0:
            raise ShortcutPreconditionError("angle(psq) is not obtuse")
        if -cos_angle < (1 / (k + 1)) * (1 - self.tolerance):
            raise ShortcutPreconditionError("-cos(angle(psq)) >= 1/(k+1) does not hold")
        e = float(self.best_efficiency(tri, t))
        return ObtuseCheck(efficiency=e, bound=k, holds=e < k)

    def verify_corollary_collinear(
        self,
        x: Number,
        d: Number,
        q_offset: Number,
        t: Number,
        ps_length: Optional[Number] = None,
    ) -> CollinearCheck:
        """
        Isosceles path r'-p'-s' over base x versus the path p-s-q whose
        first edge is parallel to p's' and whose last edge continues the
        base line beyond s.

        Args:
            x: Base |r's'|
            d: Legs |r'p'| = |p's'|
            q_offset: |sq|
            t: Stretch bound
            ps_length: |ps| (defaults to d, i.e. p = p' and s = s')
        """
        x, d, q_offset = Fraction(x), Fraction(d), Fraction(q_offset)
        ps_len = d if ps_length is None else Fraction(ps_length)
        if x <= 0 or 2 * d <= x:
            raise ShortcutPreconditionError("need x > 0 and d > x/2")
        if not ps_len < q_offset:
            raise ShortcutPreconditionError("|ps| < |sq| does not hold")

        height = exact_sqrt(d * d - x * x / 4)
        h: Number = height if height is not None else math.sqrt(d * d - x * x / 4)
        r_prime = Point2(x=0, y=0)
        s_prime = Point2(x=x, y=0)
        p_prime = Point2(x=x / 2, y=h)
        isosceles = Triple(p=r_prime, s=p_prime, q=s_prime)

        scale = ps_len / d
        s = Point2(x=x, y=0)
        p = Point2(x=x - (x / 2) * scale, y=h * (scale if height is not None else float(scale)))
        q = Point2(x=x + q_offset, y=0)
        obtuse = Triple(p=p, s=s, q=q)

        e_iso = self.best_efficiency(isosceles, t)
        e_obt = self.best_efficiency(obtuse, t)
        return CollinearCheck(
            efficiency_isosceles=float(e_iso), efficiency_obtuse=float(e_obt), holds=e_iso > e_obt
        )

    def verify_triangle_stretch(
        self, gamma: float, beta: float, strict: bool = False
    ) -> TriangleStretchCheck:
        """
        Stretch of an isosceles triangle against a point q' on side sq.

        The triangle has |ps| = |sq| = 1 and apex angle gamma; q' is placed
        so that angle(p q' q) = beta. The hypothesis |pq| >= |pq'| with q'
        on the segment holds for max(gamma, pi/2 - gamma/2) <= beta <=
        pi/2 + gamma/2. Outside it the result is recorded, not asserted,
        unless `strict` is set.
        """
        if not (0 < gamma < math.pi and 0 < beta < math.pi):
            raise ShortcutPreconditionError("need 0 < gamma, beta < pi")
        slack = self.tolerance
        closed_form = 2 * math.cos(gamma / 2) - math.sin(beta) - math.sin(beta - gamma)
        in_hypothesis = (
            beta > gamma
            and beta <= math.pi / 2 + gamma / 2 + slack
            and math.sin(beta) >= math.cos(gamma / 2) - slack
        )
        if strict and not in_hypothesis:
            raise ShortcutPreconditionError(
                f"q' is not on sq with |pq| >= |pq'| for gamma={gamma}, beta={beta}"
            )

        lhs = 1 / math.sin(gamma / 2)
        rhs = None
        if beta > gamma:
            sq_cut = math.sin(beta - gamma) / math.sin(beta)
            px, py = 1.0, 0.0
            qx, qy = sq_cut * math.cos(gamma), sq_cut * math.sin(gamma)
            rhs = (1 + sq_cut) / math.hypot(qx - px, qy - py)
            holds = lhs >= rhs * (1 - slack)
        else:
            holds = closed_form >= -slack
        if not in_hypothesis:
            logger.info(f"triangle stretch outside hypothesis: gamma={gamma:.6g}, beta={beta:.6g}, holds={holds}")
        return TriangleStretchCheck(
            lhs=lhs, rhs=rhs, closed_form=closed_form, in_hypothesis=in_hypothesis, holds=holds
        )

    def sweep_lemmas(
        self, t_values: Sequence[float], samples: int, seed: int = 0
    ) -> List[LemmaSweepReport]:
        """
        Seeded random sweeps of the four efficiency checks, `samples` draws
        per check and per t. Draws outside a check's hypothesis are counted
        as skipped.
        """
        rng = np.random.default_rng(seed)
        reports = []
        for t in t_values:
            reports.append(self._sweep("isosceles", t, samples, lambda: self._draw_isosceles(rng, t),
                                       lambda a1, a2: self._isosceles_holds(a1, a2, t)))
            reports.append(self._sweep("obtuse", t, samples, lambda: self._draw_obtuse(rng),
                                       lambda sq, angle: self._obtuse_holds(sq, angle, t)))
            reports.append(self._sweep("collinear", t, samples, lambda: self._draw_collinear(rng),
                                       lambda x, d, ps, q_offset: self.verify_corollary_collinear(
                                           x, d, q_offset, t, ps_length=ps).holds))
            reports.append(self._sweep("triangle_stretch", t, samples, lambda: self._draw_stretch(rng),
                                       lambda gamma, beta: self.verify_triangle_stretch(
                                           gamma, beta, strict=True).holds))
        return reports

    def _sweep(
        self,
        lemma: str,
        t: float,
        samples: int,
        draw: Callable[[], Dict[str, float]],
        check: Callable[..., bool],
    ) -> LemmaSweepReport:
        report = LemmaSweepReport(lemma=lemma, t=float(t))
        for _ in range(samples):
            params = draw()
            try:
                holds = check(**params)
            except ShortcutPreconditionError:
                report.skipped += 1
                continue
            report.checked += 1
            if holds:
                report.held += 1
            elif len(report.counterexamples) < 10:
                report.counterexamples.append(params)
        if not report.passed:
            logger.warning(f"{lemma} check failed {report.checked - report.held} times at t={t}")
        logger.info(f"{lemma} sweep t={t}: {report.held}/{report.checked} held, {report.skipped} skipped")
        return report

    @staticmethod
    def _draw_isosceles(rng: np.random.Generator, t: float) -> Dict[str, float]:
        # for t >= 2 a side removal switches on at 60 degrees; pairs stay on one side of it
        lo, hi = 1e-3, math.pi - 1e-3
        if t >= 2:
            if rng.random() < 0.5:
                hi = math.pi / 3 - 1e-6
            else:
                lo = math.pi / 3 + 1e-6
        a1, a2 = sorted(rng.uniform(lo, hi, size=2))
        return {"a1": float(a1), "a2": float(a2)}

    def _isosceles_holds(self, a1: float, a2: float, t: float) -> bool:
        if a2 - a1 < 1e-6:
            raise ShortcutPreconditionError("angles too close to separate numerically")
        return self.verify_lemma_isosceles(a1, a2, t).holds

    @staticmethod
    def _draw_obtuse(rng: np.random.Generator) -> Dict[str, float]:
        return {
            "sq": float(1 + rng.uniform(0.01, 5)),
            "angle": float(rng.uniform(math.pi / 2 + 0.01, math.pi - 0.01)),
        }

    def _obtuse_holds(self, sq: float, angle: float, t: float) -> bool:
        tri = Triple(p=Point2(x=1, y=0), s=Point2(x=0, y=0), q=_polar(sq, angle))
        k = 1 / -math.cos(angle) - 1
        return self.verify_lemma_obtuse(tri, k, t).holds

    @staticmethod
    def _draw_collinear(rng: np.random.Generator) -> Dict[str, float]:
        x = float(rng.uniform(0.1, 10))
        d = x / 2 * float(rng.uniform(1.01, 20))
        ps = d * float(rng.uniform(0.05, 1))
        return {"x": x, "d": d, "ps": ps, "q_offset": ps * float(rng.uniform(1.01, 4))}

    @staticmethod
    def _draw_stretch(rng: np.random.Generator) -> Dict[str, float]:
        gamma = float(rng.uniform(0.01, math.pi - 0.01))
        lo = max(gamma, math.pi / 2 - gamma / 2) + 1e-9
        hi = math.pi / 2 + gamma / 2
        return {"gamma": gamma, "beta": float(rng.uniform(lo, hi))}

    @staticmethod
    def isosceles_triple(apex_angle: float, leg: float = 1.0) -> Triple:
        """Path p-s-q with |ps| = |sq| = leg and angle(psq) = apex_angle."""
        half = apex_angle / 2
        return Triple(
            p=_polar(leg, -math.pi / 2 - half),
            s=Point2(x=0, y=0),
            q=_polar(leg, -math.pi / 2 + half),
        )

    def _le(self, lhs: Length, rhs: Length) -> bool:
        if isinstance(lhs, Fraction) and isinstance(rhs, Fraction):
            return lhs <= rhs
        return float(lhs) <= float(rhs) * (1 + self.tolerance)

    @staticmethod
    def _between(tri: Triple) -> bool:
        return (
            min(tri.p.x, tri.q.x) <= tri.s.x <= max(tri.p.x, tri.q.x)
            and min(tri.p.y, tri.q.y) <= tri.s.y <= max(tri.p.y, tri.q.y)
        )


class ShortcutPreconditionError(ValueError):
    """Custom exception for violated shortcut or lemma hypotheses."""
    pass
