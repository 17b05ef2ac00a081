"""
Pydantic models for the Euclidean t-spanner toolkit.
"""

import math
from decimal import Decimal
from fractions import Fraction
from typing import Annotated, Any, Dict, FrozenSet, Iterable, List, Literal, Optional, Tuple, Union

from pydantic import (
    BaseModel,
    BeforeValidator,
    ConfigDict,
    Field,
    PlainSerializer,
    PlainValidator,
    field_serializer,
    field_validator,
    model_serializer,
    model_validator,
)


def parse_rational(value: Any) -> Fraction:
    """
    Parse an exact rational from an int, Fraction, Decimal, float or string.

    Strings may be integers ("3"), decimals ("-1.25") or quotients ("7/3").
    Floats are converted exactly (every finite double is a dyadic rational).
    """
    if isinstance(value, bool):
        raise ValueError("booleans are not rational coordinates")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, (float, Decimal)):
        if not math.isfinite(float(value)):
            raise ValueError(f"non-finite value {value!r}")
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        try:
            return Fraction(text)
        except (ValueError, ZeroDivisionError) as e:
            raise ValueError(f"not an exact rational: {value!r}") from e
    raise ValueError(f"unsupported rational type {type(value).__name__}")


def format_rational(value: Fraction) -> str:
    """Canonical exact string: "p" for integers, "p/q" otherwise."""
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


Rational = Annotated[
    Fraction,
    BeforeValidator(parse_rational),
    PlainSerializer(format_rational, return_type=str),
]

def parse_length(value: Any) -> Union[Fraction, float]:
    """
    Keep Fraction and float lengths as they are, infinity included; other
    inputs are parsed as exact rationals ("inf" gives an infinite float).
    """
    if isinstance(value, (Fraction, float)):
        return value
    if isinstance(value, str) and value.strip().lower() in ("inf", "infinity"):
        return math.inf
    return parse_rational(value)


# Lengths are exact when the squared distance is a perfect rational square.
Length = Annotated[Union[Fraction, float], PlainValidator(parse_length)]


def format_length(value: Length) -> Union[str, float]:
    if isinstance(value, Fraction):
        return format_rational(value)
    return value


class Point2(BaseModel):
    """Exact planar point. Serialises as a pair of rational strings."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    x: Rational
    y: Rational

    @model_validator(mode="before")
    @classmethod
    def accept_pair(cls, data: Any) -> Any:
        if isinstance(data, (list, tuple)):
            if len(data) != 2:
                raise ValueError(f"a point needs exactly 2 coordinates, got {len(data)}")
            return {"x": data[0], "y": data[1]}
        return data

    @model_serializer
    def as_pair(self) -> List[str]:
        return [format_rational(self.x), format_rational(self.y)]

    @classmethod
    def of(cls, x: Any, y: Any) -> "Point2":
        return cls(x=x, y=y)

    def as_float(self) -> Tuple[float, float]:
        """Double-precision view of the exact coordinates."""
        return float(self.x), float(self.y)


class GeometricGraph(BaseModel):
    """
    Point list plus an undirected edge set over point indices.

    Edge weights are never stored: an edge weighs the Euclidean length of
    its segment.
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    points: Tuple[Point2, ...]
    edges: FrozenSet[Tuple[int, int]] = Field(default_factory=frozenset)

    @field_validator("edges", mode="before")
    @classmethod
    def normalize_edges(cls, v: Any) -> FrozenSet[Tuple[int, int]]:
        seen = set()
        for pair in v or ():
            i, j = (int(k) for k in pair)
            if i == j:
                raise ValueError(f"self-loop at vertex {i}")
            edge = (min(i, j), max(i, j))
            if edge in seen and not isinstance(v, (set, frozenset)):
                raise ValueError(f"duplicate edge {edge}")
            seen.add(edge)
        return frozenset(seen)

    @model_validator(mode="after")
    def check_indices(self) -> "GeometricGraph":
        n = len(self.points)
        for i, j in self.edges:
            if i < 0 or j >= n:
                raise ValueError(f"edge ({i}, {j}) out of range for {n} points")
        return self

    @field_serializer("edges")
    def serialize_edges(self, edges: FrozenSet[Tuple[int, int]]) -> List[List[int]]:
        return [list(e) for e in sorted(edges)]

    @property
    def n(self) -> int:
        return len(self.points)

    def sorted_edges(self) -> List[Tuple[int, int]]:
        return sorted(self.edges)

    def with_edges(
        self,
        added: Iterable[Tuple[int, int]] = (),
        removed: Iterable[Tuple[int, int]] = (),
    ) -> "GeometricGraph":
        """Apply an E+/E- diff and return the new graph."""
        minus = {(min(i, j), max(i, j)) for i, j in removed}
        plus = {(min(i, j), max(i, j)) for i, j in added}
        return GeometricGraph(points=self.points, edges=(self.edges - minus) | plus)

    def edge_diff(self, other: "GeometricGraph") -> Tuple[FrozenSet[Tuple[int, int]], FrozenSet[Tuple[int, int]]]:
        """(E+, E-) turning this graph into `other` over the same points."""
        if other.points != self.points:
            raise ValueError("edge_diff needs graphs over the same point list")
        return other.edges - self.edges, self.edges - other.edges

    def complete(self) -> "GeometricGraph":
        n = len(self.points)
        return GeometricGraph(
            points=self.points,
            edges=frozenset((i, j) for i in range(n) for j in range(i + 1, n)),
        )


class DilationReport(BaseModel):
    """Maximum stretch over all point pairs and the pair achieving it."""
    dilation: float = Field(..., ge=1.0)
    witness_pair: Tuple[int, int]

    @field_validator("witness_pair")
    @classmethod
    def distinct_witness(cls, v: Tuple[int, int]) -> Tuple[int, int]:
        if v[0] == v[1]:
            raise ValueError("witness indices must be distinct")
        return v

    @property
    def connected(self) -> bool:
        return math.isfinite(self.dilation)


# Shortcut analysis

class Triple(BaseModel):
    """The path p-s-q."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    p: Point2
    s: Point2
    q: Point2

    @model_validator(mode="after")
    def distinct_points(self) -> "Triple":
        if self.p == self.s or self.s == self.q or self.p == self.q:
            raise ValueError("triple points must be pairwise distinct")
        return self


class ShortcutReport(BaseModel):
    """Benefit, cost and efficiency of one legal t-shortcut."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    adds_edge: Literal["pq"] = "pq"
    removes_edge: Optional[Literal["ps", "sq"]] = None
    benefit: Length
    cost: Length
    efficiency: Length

    @field_serializer("benefit", "cost", "efficiency")
    def serialize_lengths(self, v: Length) -> Union[str, float]:
        return format_length(v)


class ShortcutEvaluation(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    options: Tuple[ShortcutReport, ...]
    best: ShortcutReport


class IsoscelesCheck(BaseModel):
    efficiency: float
    efficiency_wider: float
    holds: bool


class ObtuseCheck(BaseModel):
    efficiency: float
    bound: float
    holds: bool


class CollinearCheck(BaseModel):
    efficiency_isosceles: float
    efficiency_obtuse: float
    holds: bool


class TriangleStretchCheck(BaseModel):
    lhs: float
    rhs: Optional[float]
    closed_form: float
    in_hypothesis: bool
    holds: bool


class LemmaSweepReport(BaseModel):
    """Outcome of a seeded random sweep of one efficiency check."""
    lemma: Literal["isosceles", "obtuse", "collinear", "triangle_stretch"]
    t: float
    checked: int = 0
    held: int = 0
    skipped: int = 0
    counterexamples: List[Dict[str, float]] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.held == self.checked


# Reduction

class PartitionInstance(BaseModel):
    """PARTITION input: positive integers with an even sum R."""
    model_config = ConfigDict(frozen=True)

    values: Tuple[int, ...] = Field(..., min_length=1)

    @field_validator("values")
    @classmethod
    def positive_even_sum(cls, v: Tuple[int, ...]) -> Tuple[int, ...]:
        if any(x <= 0 for x in v):
            raise ValueError("all elements must be positive integers")
        if sum(v) % 2:
            raise ValueError(f"element sum {sum(v)} is odd")
        return v

    @property
    def n(self) -> int:
        return len(self.values)

    @property
    def total(self) -> int:
        """R in the construction."""
        return sum(self.values)

    @property
    def has_dominant_element(self) -> bool:
        return any(2 * x >= self.total for x in self.values)

    @classmethod
    def parse(cls, text: str) -> "PartitionInstance":
        tokens = [tok for tok in text.replace(",", " ").split() if tok]
        try:
            values = tuple(int(tok) for tok in tokens)
        except ValueError as e:
            raise ValueError(f"partition elements must be integers: {text!r}") from e
        return cls(values=values)


class GadgetMeta(BaseModel):
    model_config = ConfigDict(frozen=True)

    value: int
    base_left: int
    base_right: int
    apex: int


class InstanceEndpoints(BaseModel):
    """p and q end the backbone path; p' and q' are the top corners."""
    model_config = ConfigDict(frozen=True)

    p: int
    q: int
    p_prime: int
    q_prime: int


def rectangle_side_length(partition: PartitionInstance, t: Fraction) -> Fraction:
    """Vertical side of the t >= 2 construction: (R/2)(t(n+2) - n - 7/3)."""
    return Fraction(partition.total, 2) * (t * (partition.n + 2) - partition.n - Fraction(7, 3))


def trapezoid_side_length(partition: PartitionInstance, t: Fraction) -> Fraction:
    """Unrounded slanted side of the 1 < t < 2 construction: (R/2)(n+3/2)(3t/2)."""
    return Fraction(partition.total, 2) * (partition.n + Fraction(3, 2)) * (3 * t / 2)


def trapezoid_sin_alpha(t: Fraction) -> Fraction:
    return Fraction(2) / (3 * t * t) + Fraction(1) / (3 * t)


class HardnessInstance(BaseModel):
    """
    Output of the PARTITION -> low-weight spanner construction.

    Documents may omit `partition`, `side_length`, `sin_alpha` and the top
    corners p'/q'; they are derived from the gadgets, the regime and the
    points lying on or above the x-axis.
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    regime: Literal["large_t", "small_t"]
    t: Rational
    w: Rational
    points: Tuple[Point2, ...]
    gadgets: Tuple[GadgetMeta, ...]
    endpoints: InstanceEndpoints
    partition: PartitionInstance
    side_length: Rational
    sin_alpha: Rational = Fraction(0)
    precision_digits: Optional[int] = None

    @model_validator(mode="before")
    @classmethod
    def derive_missing(cls, data: Any) -> Any:
        if not isinstance(data, dict):
            return data
        data = dict(data)
        try:
            if data.get("partition") is None and data.get("gadgets"):
                data["partition"] = PartitionInstance(
                    values=tuple(g["value"] if isinstance(g, dict) else g.value for g in data["gadgets"])
                )
            ends = data.get("endpoints")
            if isinstance(ends, dict) and not {"p_prime", "q_prime"} <= ends.keys():
                points = [pt if isinstance(pt, Point2) else Point2.model_validate(pt) for pt in data.get("points", ())]
                level = [i for i, pt in enumerate(points) if pt.y >= 0]
                if level:
                    data["endpoints"] = {"p_prime": level[0], "q_prime": level[-1], **ends}
            partition = data.get("partition")
            if isinstance(partition, dict):
                partition = PartitionInstance.model_validate(partition)
            if isinstance(partition, PartitionInstance) and "t" in data:
                t = parse_rational(data["t"])
                if data.get("regime") == "large_t" and data.get("side_length") is None:
                    data["side_length"] = rectangle_side_length(partition, t)
                elif data.get("regime") == "small_t":
                    if data.get("side_length") is None:
                        data["side_length"] = trapezoid_side_length(partition, t)
                    if data.get("sin_alpha") is None:
                        data["sin_alpha"] = trapezoid_sin_alpha(t)
        except (ValueError, TypeError, KeyError):
            # left for field validation to report
            pass
        return data

    @field_validator("t")
    @classmethod
    def t_above_one(cls, v: Fraction) -> Fraction:
        if v <= 1:
            raise ValueError("t must exceed 1")
        return v

    @model_validator(mode="after")
    def check_gadgets(self) -> "HardnessInstance":
        n = len(self.points)
        for g in self.gadgets:
            for idx in (g.base_left, g.base_right, g.apex):
                if not 0 <= idx < n:
                    raise ValueError(f"gadget index {idx} out of range")
        return self

    @property
    def total(self) -> int:
        return self.partition.total

    def as_graph(self, edges: Iterable[Tuple[int, int]] = ()) -> GeometricGraph:
        return GeometricGraph(points=self.points, edges=frozenset(edges))


class BudgetReport(BaseModel):
    """Exact budget quantities of an instance (pre-rounding for small t)."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    backbone_weight: Rational
    spanner_bound: Rational
    required_shortening: Rational
    remaining_weight: Rational
    gadget_efficiency: Rational
    measured_backbone_weight: float

    @property
    def balanced(self) -> bool:
        return self.required_shortening / self.remaining_weight == self.gadget_efficiency


class ForwardReport(BaseModel):
    """Checks of the spanner built from a partition witness."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    valid_subset: bool
    subset: Tuple[int, ...]
    weight_ok: bool = False
    dilation_ok: bool = False
    plane_ok: bool = False
    achieved_weight: Optional[float] = None
    exact_weight: Optional[Rational] = None
    weight_bound: Rational
    achieved_dilation: Optional[float] = None
    witness_pair: Optional[Tuple[int, int]] = None
    marginal: bool = False

    @property
    def passed(self) -> bool:
        return self.valid_subset and self.weight_ok and self.dilation_ok and self.plane_ok


class ShortEdge(BaseModel):
    """An edge of length <= R closing a 3-cycle on the backbone path."""
    edge: Tuple[int, int]
    middle: int
    edge_type: Literal[1, 2, 3]
    efficiency: float
    dominated: bool


class DominanceReport(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    gadget_efficiency: Rational
    edges: List[ShortEdge]

    @property
    def holds(self) -> bool:
        return all(e.dominated for e in self.edges)


# Solver

class SolverOptions(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    max_edge_length: Optional[Rational] = None
    require_plane: bool = False
    tol: float = Field(1e-9, ge=0.0)
    node_budget: int = Field(1_000_000, gt=0)
    mode: Literal["branch_and_bound", "exhaustive"] = "branch_and_bound"
    threads: int = Field(1, ge=1)


class SolverResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    status: Literal["optimal", "infeasible", "budget_exceeded"]
    graph: Optional[GeometricGraph] = None
    weight: Optional[float] = None
    dilation: Optional[float] = None
    nodes: int = 0

    def to_payload(self) -> Dict[str, Any]:
        return {
            "status": self.status,
            "edges": [list(e) for e in self.graph.sorted_edges()] if self.graph else None,
            "weight": None if self.weight is None else {"exact": None, "decimal": f"{self.weight:.15g}"},
            "dilation": None if self.dilation is None else f"{self.dilation:.15g}",
            "nodes": self.nodes,
        }


class DecisionResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    outcome: Literal["yes", "no", "indeterminate"]
    witness: Optional[GeometricGraph] = None
    weight: Optional[float] = None
    nodes: int = 0


class ErrorResponse(BaseModel):
    """Error response model."""
    error: str = Field(..., description="Error message")
    error_code: str = Field(..., description="Error code for categorization")
    details: Optional[Dict[str, Any]] = Field(None, description="Additional error details")


class RenderStyle(BaseModel):
    """Drawing options for SVG output."""
    model_config = ConfigDict(frozen=True)

    width: float = Field(8.0, gt=0, description="Figure width in inches")
    height: Optional[float] = Field(None, gt=0, description="Figure height; derived from the aspect ratio when omitted")
    point_size: float = Field(3.0, gt=0)
    edge_width: float = Field(1.0, gt=0)
    point_color: str = "black"
    edge_color: str = "#555555"
    highlight_color: str = "#d62728"
    labels: bool = True


# Command arguments

class CommandArgs(BaseModel):
    """Flags shared by every command."""
    model_config = ConfigDict(populate_by_name=True, arbitrary_types_allowed=True)

    json_output: bool = Field(False, alias="json", description="Print machine-readable JSON")
    out: Optional[str] = Field(None, description="Write the main output to this file")


class PartitionSourceArgs(CommandArgs):
    partition: Optional[str] = Field(None, description='Comma or space separated integers, e.g. "1,2,3,2"')
    partition_file: Optional[str] = Field(None, description="File holding the integers ('-' reads stdin)")


class GenArgs(PartitionSourceArgs):
    t: Optional[Rational] = Field(None, description="Stretch bound as an exact rational, e.g. 3/2")
    precision_digits: Optional[int] = Field(None, ge=1, description="Rounding digits for t < 2 (default n)")
    allow_dominant: bool = Field(False, description="Accept an element >= R/2")
    random_points: Optional[int] = Field(None, ge=1, description="Emit this many random points instead")
    coord_range: int = Field(100, ge=2, description="Random integer coordinates lie in [0, range)")
    seed: int = Field(0, description="Seed for random point sets")


class PointsArgs(CommandArgs):
    input: str = Field(..., alias="in", description="Point set or graph JSON file")


class DilationArgs(PointsArgs):
    method: Literal["dijkstra", "floyd_warshall"] = Field("dijkstra", description="Shortest path algorithm")


class GreedyArgs(PointsArgs):
    t: Rational = Field(..., description="Stretch bound")


class SearchArgs(PointsArgs):
    t: Rational = Field(..., description="Stretch bound")
    tol: Optional[float] = Field(None, ge=0, description="Relative tolerance on dilation and weight")
    max_edge_len: Optional[Rational] = Field(None, description="Drop candidate edges longer than this")
    node_budget: Optional[int] = Field(None, gt=0, description="Maximum search nodes")
    threads: Optional[int] = Field(None, ge=1, description="Search workers")
    exhaustive: bool = Field(False, description="Enumerate all edge subsets instead of branch and bound")


class DecideArgs(SearchArgs):
    w: Rational = Field(..., description="Weight bound")


class MdgArgs(PointsArgs):
    w: Rational = Field(..., description="Weight bound")
    tol: Optional[float] = Field(None, ge=0)
    max_edge_len: Optional[Rational] = None
    node_budget: Optional[int] = Field(None, gt=0)
    threads: Optional[int] = Field(None, ge=1)


class PartitionArgs(PartitionSourceArgs):
    pass


class VerifyReductionArgs(PartitionSourceArgs):
    t: Rational = Field(..., description="Stretch bound")
    direction: Literal["forward", "reverse", "both"] = "forward"
    tol: Optional[float] = Field(None, ge=0)
    node_budget: Optional[int] = Field(None, gt=0)
    threads: Optional[int] = Field(None, ge=1)
    precision_digits: Optional[int] = Field(None, ge=1)


class VerifyLemmasArgs(CommandArgs):
    t: Optional[str] = Field(None, description="Comma separated t values (default 1.2,1.5,2,3)")
    samples: int = Field(1000, gt=0, description="Random draws per check and per t")
    seed: int = Field(0, description="Sweep seed")


class RenderArgs(PointsArgs):
    subset: Optional[str] = Field(None, description="Comma separated gadget indices to shortcut")
