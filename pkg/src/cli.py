"""Command line for building grid diagrams and computing their invariants.

Subcommands: new, info, invariants, move, verify, bench. Reports go to
stdout (or --output) as JSON or text; logs go to stderr. Exit status is 0
on success, 1 when a verification check fails and 2 for input, budget or
configuration errors.
"""

import argparse
import json
import logging
from pathlib import Path
import sys
import time
from typing import Any, Dict, List, Optional, Sequence

from src.grids.constructions import (
    BraidWord,
    braid_to_grid,
    cable_grid,
    connected_sum,
    disjoint_union,
    mirror_reverse,
    torus_grid,
    unknot_grid,
)
from src.grids.diagram import (
    GridDiagram,
    component_count,
    corner_census,
    parse_any,
    thurston_bennequin,
    writhe,
)
from src.grids.errors import GridError, GridFormatError
from src.grids.moves import apply_move, apply_script
from src.homology.complex import build_differential, grid_states
from src.homology.module import bigraded_homology
from src.invariants.checks import SELECTOR_ALIASES, SELECTORS, verify_theorems
from src.invariants.concordance import invariants_report
from src.invariants.oracle import alexander_polynomial
from src.utils.config_loader import EPSILON_MODES, OUTPUT_FORMATS, ConfigError, RunConfig, load_run_config
from src.utils.templates import TemplateError, TemplateManager

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_INPUT_ERROR = 2

NEW_KINDS = ("torus", "unknot", "cable", "connect", "braid", "mirror", "union")
MOVE_NAMES = ("translate", "commute", "commute-row", "stabilize", "destabilize")
DEFAULT_BENCH_TORUS = ("2,1", "2,3", "3,2", "2,5", "3,4")


def read_grid(source: str) -> GridDiagram:
    """Read a grid from a file path, '-' for stdin, or an inline compact form such as "2;1,2;2,1"."""
    if source == "-":
        return parse_any(sys.stdin.read())
    path = Path(source)
    if path.is_file():
        return parse_any(path.read_text(encoding="utf-8"))
    if ";" in source:
        return parse_any(source)
    raise GridFormatError(f"No such grid file: {source}")


def _emit(config: RunConfig, data: Dict[str, Any], text: str) -> None:
    body = json.dumps(data, sort_keys=True, indent=2) + "\n" if config.format == "json" else text.rstrip("\n") + "\n"
    if config.output:
        Path(config.output).write_text(body, encoding="utf-8")
        logger.info(f"Wrote report to {config.output}")
    else:
        sys.stdout.write(body)


def _need(value: Optional[int], flag: str, kind: str) -> int:
    if value is None:
        raise GridFormatError(f"'new {kind}' needs {flag}")
    return value


def cmd_new(args: argparse.Namespace, config: RunConfig, templates: TemplateManager) -> int:
    kind = args.kind
    inputs = args.inputs or ["-"]
    if kind == "torus":
        grid = torus_grid(_need(args.p, "-p", kind), _need(args.q, "-q", kind))
    elif kind == "unknot":
        grid = unknot_grid(args.n if args.n is not None else 2)
    elif kind == "cable":
        grid = cable_grid(read_grid(inputs[0]), _need(args.r, "-r", kind), args.twist)
    elif kind == "braid":
        if args.w is None:
            raise GridFormatError("'new braid' needs -w")
        grid = braid_to_grid(BraidWord.parse(_need(args.k, "-k", kind), args.w))
    elif kind == "mirror":
        grid = mirror_reverse(read_grid(inputs[0]))[0]
    else:
        if len(inputs) != 2:
            raise GridFormatError(f"'new {kind}' needs two grid inputs, got {len(inputs)}")
        first, second = read_grid(inputs[0]), read_grid(inputs[1])
        grid = connected_sum(first, second) if kind == "connect" else disjoint_union(first, second)

    logger.info(f"Built {kind} grid {grid.compact()}")
    _emit(config, grid.to_dict(), grid.compact())
    return EXIT_OK


def cmd_info(args: argparse.Namespace, config: RunConfig, templates: TemplateManager) -> int:
    grid = read_grid(args.grid)
    census = corner_census(grid)
    data = {
        "grid": grid.to_dict(),
        "components": component_count(grid),
        "writhe": writhe(grid),
        "thurston_bennequin": thurston_bennequin(grid),
        "corners": census.to_dict(),
    }
    text = templates.render(
        "grid_info",
        grid=grid.compact(),
        n=grid.n,
        components=data["components"],
        writhe=data["writhe"],
        tb=data["thurston_bennequin"],
        census=", ".join(f"{key}={value}" for key, value in census.counts),
    )
    _emit(config, data, text)
    return EXIT_OK


def cmd_invariants(args: argparse.Namespace, config: RunConfig, templates: TemplateManager) -> int:
    grid = read_grid(args.grid)
    start = time.perf_counter()
    report = invariants_report(grid, config.epsilon_mode, config)
    report["alexander_polynomial"] = str(alexander_polynomial(grid, config))
    report["grid"] = grid.to_dict()
    if config.timings:
        report["seconds"] = round(time.perf_counter() - start, 3)

    homology = report["homology"]
    text = templates.render(
        "invariants",
        grid=grid.compact(),
        tau=report["tau"],
        epsilon=report["epsilon"],
        mode=report["mode"],
        test=report["diagnostics"]["test"],
        free_rank=len(homology["free"]),
        torsion=", ".join(f"F[U]/U^{t['order']} at (m={t['m']}, a={t['a']})" for t in homology["torsion"]) or "none",
        alexander=report["alexander_polynomial"],
    )
    _emit(config, report, text)
    return EXIT_OK


def cmd_move(args: argparse.Namespace, config: RunConfig, templates: TemplateManager) -> int:
    grid = read_grid(args.grid)
    if args.script:
        moved = apply_script(grid, Path(args.script).read_text(encoding="utf-8"))
    elif args.move:
        moved = apply_move(grid, _move_record(args.move, args.values))
    else:
        raise GridFormatError("'move' needs a move name or --script")
    _emit(config, moved.to_dict(), moved.compact())
    return EXIT_OK


def _move_record(move: str, values: Sequence[str]) -> Dict[str, Any]:
    """Positional arguments of a move as a JSON move record."""
    names = {
        "translate": ("dx", "dy"),
        "commute": ("column",),
        "commute-row": ("row",),
        "stabilize": ("column", "kind"),
        "destabilize": ("column", "row"),
    }[move]
    if len(values) != len(names):
        raise GridFormatError(f"Move '{move}' takes {len(names)} arguments ({', '.join(names)}), got {len(values)}")
    record: Dict[str, Any] = {"move": move}
    for name, value in zip(names, values):
        record[name] = value if name == "kind" else _integer(value, name)
    return record


def _integer(value: str, name: str) -> int:
    try:
        return int(value)
    except ValueError as e:
        raise GridFormatError(f"Move argument {name} must be an integer, got {value!r}") from e


def cmd_verify(args: argparse.Namespace, config: RunConfig, templates: TemplateManager) -> int:
    report = verify_theorems(args.selector, config)
    counts = report.counts()
    lines = [
        templates.render(
            "check_result",
            status=outcome.status,
            name=outcome.name,
            selector=outcome.selector,
            grid_index=outcome.grid_index,
            expected=outcome.expected,
            actual=outcome.actual,
        ).rstrip("\n")
        for outcome in report.outcomes
    ]
    lines.append(
        templates.render(
            "verification_summary",
            selector=report.selector,
            max_n=report.max_n,
            passed=counts["pass"],
            failed=counts["fail"],
            errors=counts["error"],
            skipped=counts["skipped"],
        )
    )
    _emit(config, report.to_dict(), "\n".join(lines))
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED


def cmd_bench(args: argparse.Namespace, config: RunConfig, templates: TemplateManager) -> int:
    rows = []
    for pair in args.torus or DEFAULT_BENCH_TORUS:
        try:
            p, q = (int(v) for v in pair.split(","))
        except ValueError as e:
            raise GridFormatError(f"--torus takes 'p,q', got {pair!r}") from e
        grid = torus_grid(p, q)
        states = grid_states(grid, config)

        start = time.perf_counter()
        differential = build_differential(grid, args.flavor, config)
        built = time.perf_counter()
        bigraded_homology(differential, config)
        done = time.perf_counter()
        rows.append(
            {
                "grid": grid.compact(),
                "states": len(states),
                "arrows": len(differential),
                "differential_seconds": round(built - start, 3),
                "homology_seconds": round(done - built, 3),
            }
        )
        logger.info(f"Benchmarked torus({-p},{q}): {rows[-1]}")

    text = "\n".join(templates.render("bench", **row) for row in rows)
    _emit(config, {"flavor": args.flavor, "threads": config.resolved_threads(), "results": rows}, text)
    return EXIT_OK


COMMANDS = {
    "new": cmd_new,
    "info": cmd_info,
    "invariants": cmd_invariants,
    "move": cmd_move,
    "verify": cmd_verify,
    "bench": cmd_bench,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO logs, -vv for DEBUG")
    common.add_argument("--config", help="Python configuration file, such as configs/default.py")
    common.add_argument("--allow-large", action="store_true", default=None, help="Permit grid index above max_grid_index")
    common.add_argument("--threads", type=int, help="Worker threads (0 = one per CPU)")
    common.add_argument("--output", help="Write the report here instead of stdout")
    common.add_argument("--format", choices=OUTPUT_FORMATS, help="Report format")
    common.add_argument("--timings", action="store_true", default=None, help="Include run times in reports")

    parser = argparse.ArgumentParser(prog="gridhom", description="Grid homology and concordance invariants of knots.")
    commands = parser.add_subparsers(dest="command", required=True)

    new = commands.add_parser("new", parents=[common], help="Build a grid diagram")
    new.add_argument("kind", choices=NEW_KINDS)
    new.add_argument("inputs", nargs="*", help="Input grids for cable, mirror, connect and union ('-' for stdin)")
    new.add_argument("-p", type=int, help="Torus parameter p of the (-p, q) torus knot")
    new.add_argument("-q", type=int, help="Torus parameter q")
    new.add_argument("-n", type=int, help="Grid index of the unknot")
    new.add_argument("-r", type=int, help="Number of cable strands")
    new.add_argument("--twist", default="negative", help="negative, positive, or a corner type such as SE")
    new.add_argument("-k", type=int, help="Number of braid strands")
    new.add_argument("-w", help="Braid word, such as 1,2,-1")

    info = commands.add_parser("info", parents=[common], help="Components, writhe and corner census of a grid")
    info.add_argument("grid", nargs="?", default="-")

    invariants = commands.add_parser("invariants", parents=[common], help="tau, epsilon and GH^- of a knot grid")
    invariants.add_argument("grid", nargs="?", default="-")
    invariants.add_argument("--mode", choices=EPSILON_MODES, help="Epsilon test mode")

    move = commands.add_parser("move", parents=[common], help="Apply a grid move or a JSON move script")
    move.add_argument("grid")
    move.add_argument("move", nargs="?", choices=MOVE_NAMES)
    move.add_argument("values", nargs="*", help="Move arguments, e.g. 'stabilize 2 X:SW' or 'translate 1 0'")
    move.add_argument("--script", help="JSON array of move records")

    verify = commands.add_parser("verify", parents=[common], help="Run property checks")
    selectors = ("all",) + SELECTORS + tuple(SELECTOR_ALIASES)
    verify.add_argument("selector", nargs="?", default="all", choices=selectors)
    verify.add_argument("--max-n", type=int, help="Largest grid index a check may use")
    verify.add_argument("--seed", type=int, help="Seed for randomised checks")
    verify.add_argument("--mode", choices=EPSILON_MODES, help="Epsilon test mode")

    bench = commands.add_parser("bench", parents=[common], help="Time differential assembly and homology")
    bench.add_argument("--torus", action="append", help="Torus parameters 'p,q'; repeatable")
    bench.add_argument("--flavor", default="minus", choices=("tilde", "minus"))
    return parser


def setup_logging(verbosity: int) -> None:
    level = logging.WARNING if verbosity == 0 else (logging.INFO if verbosity == 1 else logging.DEBUG)
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.verbose)

    try:
        config = load_run_config(
            args.config,
            allow_large=args.allow_large,
            threads=args.threads,
            output=args.output,
            format=args.format,
            timings=args.timings,
            epsilon_mode=getattr(args, "mode", None),
            verify_max_n=getattr(args, "max_n", None),
            seed=getattr(args, "seed", None),
        )
        return COMMANDS[args.command](args, config, TemplateManager())
    except (GridError, ConfigError, TemplateError, OSError, ValueError) as e:
        logger.debug(f"{args.command} failed", exc_info=True)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT_ERROR
