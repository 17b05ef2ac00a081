"""
Command-line entry point for the t-spanner toolkit.

Usage:
    python -m src.cli <command> [flags]
"""

import json
import logging
import os
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, TextIO, Union

import numpy as np
from dotenv import load_dotenv
from pydantic import ValidationError

from . import __version__
from .geometry import GeometryError, dump_points, load_points
from .models import (
    CommandArgs,
    DecideArgs,
    DilationArgs,
    ErrorResponse,
    GenArgs,
    GeometricGraph,
    GreedyArgs,
    MdgArgs,
    PartitionArgs,
    PartitionInstance,
    PartitionSourceArgs,
    Point2,
    PointsArgs,
    RenderArgs,
    SearchArgs,
    SolverOptions,
    SolverResult,
    VerifyLemmasArgs,
    VerifyReductionArgs,
    format_rational,
)
from .registry import CommandContext, CommandRegistry
from .services import (
    BuilderError,
    MetricsError,
    MetricsService,
    ReductionError,
    ReductionService,
    RenderError,
    RenderService,
    ShortcutPreconditionError,
    ShortcutService,
    SolverError,
    SolverService,
    SpannerBuilder,
)

# Load environment variables
load_dotenv()

LOG_LEVEL = os.getenv("SPANNER_LOG_LEVEL", "WARNING").upper()
DEFAULT_TOLERANCE = float(os.getenv("SPANNER_TOLERANCE", 1e-9))
DEFAULT_NODE_BUDGET = int(os.getenv("SPANNER_NODE_BUDGET", 1_000_000))
DEFAULT_THREADS = int(os.getenv("SPANNER_THREADS", 1))

# Configure logging; stdout is reserved for command output
logging.basicConfig(
    level=LOG_LEVEL,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    stream=sys.stderr,
)
logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_USAGE = 2
EXIT_UNDECIDED = 3

DEFAULT_LEMMA_T = (1.2, 1.5, 2.0, 3.0)

registry = CommandRegistry(title="spanner", version=__version__)

# Initialize services
try:
    metrics_service = MetricsService(tolerance=DEFAULT_TOLERANCE)
    builder = SpannerBuilder()
    shortcut_service = ShortcutService(tolerance=DEFAULT_TOLERANCE)
    reduction_service = ReductionService(metrics=metrics_service, shortcuts=shortcut_service)
    solver_service = SolverService(
        metrics=metrics_service,
        builder=builder,
        defaults=SolverOptions(
            tol=DEFAULT_TOLERANCE, node_budget=DEFAULT_NODE_BUDGET, threads=DEFAULT_THREADS
        ),
    )
    render_service = RenderService()

    logger.debug("All services initialized successfully")

except Exception as e:
    logger.error(f"Failed to initialize services: {str(e)}")
    raise


# Output helpers

def format_number(value: Union[Fraction, float, int]) -> str:
    """Exact rational string followed by a 15-significant-digit decimal."""
    if isinstance(value, (Fraction, int)):
        value = Fraction(value)
        exact = format_rational(value)
        if value.denominator == 1:
            return exact
        return f"{exact} ({float(value):.15g})"
    return f"{value:.15g}"


def number_payload(value: Union[Fraction, float, int]) -> Dict[str, Optional[str]]:
    if isinstance(value, (Fraction, int)):
        return {"exact": format_rational(Fraction(value)), "decimal": f"{float(value):.15g}"}
    return {"exact": None, "decimal": f"{value:.15g}"}


def _emit(ctx: CommandContext, args: CommandArgs, payload: Any, text: Optional[str] = None) -> None:
    """Write JSON (or `text` when given and --json is not set) to --out or stdout."""
    if text is None or args.json_output:
        body = json.dumps(payload, indent=2)
    else:
        body = text
    if args.out:
        Path(args.out).write_text(body + "\n", encoding="utf-8")
        logger.info(f"wrote {args.out}")
    else:
        print(body, file=ctx.stdout)


def _read_json(path: str) -> Dict[str, Any]:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise GeometryError(f"malformed JSON in {path}: {e}") from e


def _read_partition(args: PartitionSourceArgs) -> PartitionInstance:
    if args.partition is not None:
        return PartitionInstance.parse(args.partition)
    if args.partition_file is not None:
        if args.partition_file == "-":
            return PartitionInstance.parse(sys.stdin.read())
        return PartitionInstance.parse(Path(args.partition_file).read_text(encoding="utf-8"))
    raise ValueError("one of --partition or --partition-file is required")


def _solver_options(args: Union[SearchArgs, MdgArgs], require_plane: bool = False) -> SolverOptions:
    defaults = solver_service.defaults
    return SolverOptions(
        max_edge_length=args.max_edge_len,
        require_plane=require_plane,
        tol=defaults.tol if args.tol is None else args.tol,
        node_budget=args.node_budget or defaults.node_budget,
        threads=args.threads or defaults.threads,
        mode="exhaustive" if getattr(args, "exhaustive", False) else "branch_and_bound",
    )


def _weight_payload(graph: GeometricGraph) -> Dict[str, Optional[str]]:
    weight = number_payload(metrics_service.graph_weight(graph))
    exact = metrics_service.exact_graph_weight(graph)
    if exact is not None:
        weight["exact"] = format_rational(exact)
    return weight


def _graph_payload(graph: GeometricGraph) -> Dict[str, Any]:
    payload = dump_points(graph)
    payload["weight"] = _weight_payload(graph)
    return payload


def _solver_payload(result: SolverResult) -> Dict[str, Any]:
    payload = result.to_payload()
    if result.graph is not None:
        payload["weight"] = _weight_payload(result.graph)
        payload["points"] = dump_points(result.graph)["points"]
    return payload


def _status_exit(status: str) -> int:
    return {"optimal": EXIT_OK, "infeasible": EXIT_NEGATIVE, "budget_exceeded": EXIT_UNDECIDED}[status]


def _int_list(text: Optional[str]) -> List[int]:
    if not text:
        return []
    return [int(tok) for tok in text.replace(",", " ").split()]


# Commands

@registry.command(name="gen", schema=GenArgs)
def gen(ctx: CommandContext, args: GenArgs) -> int:
    """Generate a hardness instance from a PARTITION input, or a random point set."""
    if args.random_points is not None:
        rng = np.random.default_rng(args.seed)
        cells = rng.choice(args.coord_range ** 2, size=args.random_points, replace=False)
        points = [Point2(x=int(c) // args.coord_range, y=int(c) % args.coord_range) for c in cells]
        _emit(ctx, args, dump_points(GeometricGraph(points=points)))
        return EXIT_OK

    if args.t is None:
        raise ValueError("--t is required to generate a hardness instance")
    partition = _read_partition(args)
    inst = reduction_service.build(
        partition, args.t, precision_digits=args.precision_digits, allow_dominant=args.allow_dominant
    )
    _emit(ctx, args, inst.model_dump(mode="json"))
    return EXIT_OK


@registry.command(name="mst", schema=PointsArgs)
def mst(ctx: CommandContext, args: PointsArgs) -> int:
    """Euclidean minimum spanning tree of a point set."""
    graph = load_points(_read_json(args.input))
    _emit(ctx, args, _graph_payload(builder.euclidean_mst(graph.points)))
    return EXIT_OK


@registry.command(name="greedy", schema=GreedyArgs)
def greedy(ctx: CommandContext, args: GreedyArgs) -> int:
    """Path-greedy t-spanner of a point set."""
    graph = load_points(_read_json(args.input))
    _emit(ctx, args, _graph_payload(builder.path_greedy_spanner(graph.points, args.t)))
    return EXIT_OK


@registry.command(name="dilation", schema=DilationArgs)
def dilation(ctx: CommandContext, args: DilationArgs) -> int:
    """Dilation of a graph and the pair attaining it."""
    graph = load_points(_read_json(args.input))
    report = metrics_service.dilation(graph, method=args.method)
    payload = {
        "dilation": format_number(report.dilation),
        "witness_pair": list(report.witness_pair),
        "connected": report.connected,
    }
    _emit(ctx, args, payload, text=format_number(report.dilation))
    return EXIT_OK


@registry.command(name="solve", schema=SearchArgs)
def solve(ctx: CommandContext, args: SearchArgs) -> int:
    """Minimum-weight t-spanner."""
    graph = load_points(_read_json(args.input))
    result = solver_service.min_weight_spanner(graph.points, args.t, _solver_options(args))
    _emit(ctx, args, _solver_payload(result))
    return _status_exit(result.status)


@registry.command(name="solve-plane", schema=SearchArgs)
def solve_plane(ctx: CommandContext, args: SearchArgs) -> int:
    """Minimum-weight plane t-spanner."""
    graph = load_points(_read_json(args.input))
    result = solver_service.min_weight_plane_spanner(
        graph.points, args.t, _solver_options(args, require_plane=True)
    )
    _emit(ctx, args, _solver_payload(result))
    return _status_exit(result.status)


@registry.command(name="decide", schema=DecideArgs)
def decide(ctx: CommandContext, args: DecideArgs) -> int:
    """Is there a t-spanner of weight at most w?"""
    graph = load_points(_read_json(args.input))
    result = solver_service.decide_lwst(graph.points, args.t, args.w, _solver_options(args))
    payload = {
        "outcome": result.outcome,
        "weight": None if result.witness is None else _weight_payload(result.witness),
        "edges": None if result.witness is None else [list(e) for e in result.witness.sorted_edges()],
        "nodes": result.nodes,
    }
    _emit(ctx, args, payload, text=result.outcome)
    return {"yes": EXIT_OK, "no": EXIT_NEGATIVE, "indeterminate": EXIT_UNDECIDED}[result.outcome]


@registry.command(name="mdg", schema=MdgArgs)
def mdg(ctx: CommandContext, args: MdgArgs) -> int:
    """Least-dilation graph within a weight budget."""
    graph = load_points(_read_json(args.input))
    result = solver_service.min_dilation_under_budget(graph.points, args.w, _solver_options(args))
    _emit(ctx, args, _solver_payload(result))
    return _status_exit(result.status)


@registry.command(name="partition", schema=PartitionArgs)
def partition(ctx: CommandContext, args: PartitionArgs) -> int:
    """Solve a PARTITION input by dynamic programming."""
    instance = _read_partition(args)
    witness = reduction_service.solve_partition(instance)
    payload = {
        "values": list(instance.values),
        "partition_exists": witness is not None,
        "subset": None if witness is None else list(witness),
    }
    text = "no" if witness is None else "yes " + ",".join(str(i) for i in witness)
    _emit(ctx, args, payload, text=text)
    return EXIT_OK if witness is not None else EXIT_NEGATIVE


@registry.command(name="verify-reduction", schema=VerifyReductionArgs)
def verify_reduction(ctx: CommandContext, args: VerifyReductionArgs) -> int:
    """Check a generated instance against the PARTITION answer."""
    instance = _read_partition(args)
    inst = reduction_service.build(
        instance, args.t, precision_digits=args.precision_digits, allow_dominant=True
    )
    tol = solver_service.defaults.tol if args.tol is None else args.tol
    witness = reduction_service.solve_partition(instance)
    report: Dict[str, Any] = {
        "values": list(instance.values),
        "t": format_rational(inst.t),
        "regime": inst.regime,
        "points": len(inst.points),
        "w": number_payload(inst.w),
        "partition_exists": witness is not None,
        "witness": None if witness is None else list(witness),
    }
    code = EXIT_OK

    if args.direction in ("forward", "both"):
        if witness is None:
            report["forward"] = {"skipped": "no partition witness"}
        else:
            forward = reduction_service.verify_forward(inst, witness, tol)
            report["forward"] = dict(forward.model_dump(mode="json"), passed=forward.passed)
            if not forward.passed:
                code = EXIT_NEGATIVE

    if args.direction in ("reverse", "both"):
        opts = SolverOptions(
            max_edge_length=inst.total,
            tol=tol,
            node_budget=args.node_budget or solver_service.defaults.node_budget,
            threads=args.threads or solver_service.defaults.threads,
        )
        decision = solver_service.decide_lwst(inst.points, inst.t, inst.w, opts)
        expected = "yes" if witness is not None else "no"
        if decision.outcome == "indeterminate":
            agreement = "indeterminate"
            logger.warning(f"reverse check on {list(instance.values)} undetermined after {decision.nodes} nodes")
        else:
            agreement = "agree" if decision.outcome == expected else "disagree"
        report["reverse"] = {
            "decision": decision.outcome,
            "expected": expected,
            "agreement": agreement,
            "nodes": decision.nodes,
        }
        if agreement == "disagree":
            code = EXIT_NEGATIVE
        elif agreement == "indeterminate" and code == EXIT_OK:
            code = EXIT_UNDECIDED

    _emit(ctx, args, report)
    return code


@registry.command(name="verify-lemmas", schema=VerifyLemmasArgs)
def verify_lemmas(ctx: CommandContext, args: VerifyLemmasArgs) -> int:
    """Random sweeps of the shortcut efficiency checks."""
    t_values = DEFAULT_LEMMA_T if not args.t else tuple(float(tok) for tok in args.t.split(","))
    reports = shortcut_service.sweep_lemmas(t_values, args.samples, seed=args.seed)
    lines = [
        f"{r.lemma} t={r.t:g}: {r.held}/{r.checked} held, {r.skipped} skipped" for r in reports
    ]
    _emit(ctx, args, [r.model_dump() for r in reports], text="\n".join(lines))
    return EXIT_OK if all(r.passed for r in reports) else EXIT_NEGATIVE


@registry.command(name="render", schema=RenderArgs)
def render(ctx: CommandContext, args: RenderArgs) -> int:
    """Draw a graph or instance as SVG."""
    data = _read_json(args.input)
    if "regime" in data:
        inst = reduction_service.load_instance(data)
        subset = _int_list(args.subset)
        graph = reduction_service.apply_gadget_shortcuts(inst, subset)
        svg = render_service.render_svg(graph, instance=inst)
    else:
        svg = render_service.render_svg(load_points(data))
    if args.out:
        Path(args.out).write_text(svg, encoding="utf-8")
        logger.info(f"wrote {args.out}")
    else:
        ctx.stdout.write(svg)
    return EXIT_OK


# Error mapping

def _get_error_code(exception: Exception) -> str:
    """Get appropriate error code based on exception type."""
    if isinstance(exception, ValidationError):
        return "VALIDATION_ERROR"
    elif isinstance(exception, GeometryError):
        return "GEOMETRY_ERROR"
    elif isinstance(exception, ReductionError):
        return "REDUCTION_ERROR"
    elif isinstance(exception, SolverError):
        return "SOLVER_ERROR"
    elif isinstance(exception, (MetricsError, BuilderError, ShortcutPreconditionError, RenderError)):
        return "PRECONDITION_ERROR"
    elif isinstance(exception, OSError):
        return "IO_ERROR"
    elif isinstance(exception, ValueError):
        return "INPUT_ERROR"
    else:
        return "INTERNAL_ERROR"


def _get_failure_step(exception: Exception) -> str:
    """Determine which step failed based on exception."""
    if isinstance(exception, (ValidationError, GeometryError, OSError)):
        return "input_parsing"
    elif isinstance(exception, ReductionError):
        return "instance_generation"
    elif isinstance(exception, SolverError):
        return "search"
    elif isinstance(exception, (MetricsError, BuilderError)):
        return "graph_computation"
    elif isinstance(exception, ShortcutPreconditionError):
        return "lemma_check"
    elif isinstance(exception, RenderError):
        return "rendering"
    else:
        return "unknown"


def main(
    argv: Optional[Sequence[str]] = None,
    stdout: Optional[TextIO] = None,
    stderr: Optional[TextIO] = None,
) -> int:
    """Run one command and return its exit code."""
    parser = registry.build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE
    if ns.log_level:
        logging.getLogger().setLevel(ns.log_level.upper())

    args = {k: v for k, v in vars(ns).items() if k not in ("command", "log_level")}
    ctx = CommandContext(stdout=stdout, stderr=stderr)
    try:
        return registry.call(ns.command, args, ctx)
    except Exception as e:
        if not isinstance(e, (ValueError, OSError)):
            logger.exception(f"{ns.command} failed")
        error = ErrorResponse(
            error=str(e),
            error_code=_get_error_code(e),
            details={"failure_step": _get_failure_step(e), "command": ns.command},
        )
        print(error.model_dump_json(), file=ctx.stderr)
        if args.get("json"):
            print(error.model_dump_json(), file=ctx.stdout)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
