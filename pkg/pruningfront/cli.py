from __future__ import annotations

import argparse
import io
import json
import logging
import math
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path
from typing import Any
from typing import Callable
from typing import Dict
from typing import List
from typing import Optional
from typing import Sequence
from typing import Tuple
from typing import Union
from typing import get_args

from pruningfront import __version__
from pruningfront.errors import BudgetExceededError
from pruningfront.errors import PruningFrontError
from pruningfront.errors import SearchBudgetExceededError
from pruningfront.errors import UnstableEigenvalueMissingError
from pruningfront.folding import FoldingPattern
from pruningfront.folding import compare_folding
from pruningfront.folding import folding_to_kneading
from pruningfront.folding import kneading_to_folding
from pruningfront.henon import HenonEngine
from pruningfront.henon import HenonParams
from pruningfront.henon import unstable_direction
from pruningfront.io import candidate_rows
from pruningfront.io import dump_artifact
from pruningfront.io import dumps_json
from pruningfront.io import load_json
from pruningfront.io import polyline_rows
from pruningfront.io import region_rows
from pruningfront.io import write_csv
from pruningfront.kneading import KneadingSet
from pruningfront.kneading import compare_kneading_sets
from pruningfront.kneading import is_admissible
from pruningfront.lozi import LoziEngine
from pruningfront.lozi import LoziParams
from pruningfront.symbols import TwoSidedWindow
from pruningfront.tree import folding_to_tree
from pruningfront.tree import mark_tree
from pruningfront.tree import to_dot
from pruningfront.tree import tree_to_folding
from pruningfront.tree import tree_to_kneading
from pruningfront.utils._types import MapKind
from pruningfront.utils._types import ObjectKind
from pruningfront.utils._types import OutputFormat

if sys.version_info >= (3, 11):  # pragma: no cover
    from typing import Self
else:  # pragma: no cover
    from typing_extensions import Self

logger = logging.getLogger(__name__)

_map_values = get_args(MapKind)
_format_values = get_args(OutputFormat)
_object_values = get_args(ObjectKind)

EXIT_OK = 0
EXIT_DIFFERENT = 1
EXIT_ERROR = 2
EXIT_REJECTED = 3
EXIT_BUDGET = 4

DEFAULT_PARAMS: Dict[str, Tuple[float, float]] = {"lozi": (1.8, 0.3), "henon": (1.9, 0.025)}
DEFAULT_SEG_TOL: Dict[str, float] = {"lozi": 1e-2, "henon": 1e-3}

Engine = Union[LoziEngine, HenonEngine]


@dataclass(frozen=True)
class RunConfig:
    """Validated settings of one CLI run.

    Arguments:
        map_kind: `"lozi"` or `"henon"`.
        a: First map parameter.
        b: Second map parameter.
        depth: Number of tail symbols.
        generations: Number of folding generations.
        count: Number of kneading sequences.
        seg_tol: Maximum polyline segment length.
        locus_eps: Dead zone half width.
        j_max: Hénon horizon.
        score_margin: Hénon score margin over `log(b)`.
        target_arclength: Arclength of `manifold` polylines.
        out: Output file, `None` for stdout.
        output_format: `"json"` or `"csv"`.
        jobs: Worker processes of batch comparisons.

    Raises:
        ValueError: If an enumerated option is unknown, a tolerance is not positive or a count is smaller than 1.
    """

    __slots__ = (
        "map_kind",
        "a",
        "b",
        "depth",
        "generations",
        "count",
        "seg_tol",
        "locus_eps",
        "j_max",
        "score_margin",
        "target_arclength",
        "out",
        "output_format",
        "jobs",
    )

    map_kind: MapKind
    a: float
    b: float
    depth: int
    generations: int
    count: int
    seg_tol: float
    locus_eps: float
    j_max: int
    score_margin: float
    target_arclength: float
    out: Optional[Path]
    output_format: OutputFormat
    jobs: int

    def __post_init__(self: Self) -> None:
        """Post init used to validate the configuration."""
        if self.map_kind not in _map_values:
            msg = f"`map` must be one of {_map_values}. Found {self.map_kind}"
            raise ValueError(msg)
        if self.output_format not in _format_values:
            msg = f"`format` must be one of {_format_values}. Found {self.output_format}"
            raise ValueError(msg)

        _tolerances = ("seg_tol", "locus_eps", "score_margin", "target_arclength")
        if not all(math.isfinite(getattr(self, t)) and getattr(self, t) > 0 for t in _tolerances):
            msg = f"(`{'`, `'.join(_tolerances)}`) must be strictly positive."
            raise ValueError(msg)

        _counts = ("depth", "generations", "count", "j_max", "jobs")
        if not all(getattr(self, c) >= 1 for c in _counts):
            msg = f"(`{'`, `'.join(_counts)}`) must be at least 1. Found ({', '.join(str(getattr(self, c)) for c in _counts)})"
            raise ValueError(msg)

    @classmethod
    def from_namespace(cls, args: argparse.Namespace) -> RunConfig:
        """Configuration from parsed arguments, filling map dependent defaults."""
        default_a, default_b = DEFAULT_PARAMS[args.map]
        return cls(
            map_kind=args.map,
            a=default_a if args.a is None else args.a,
            b=default_b if args.b is None else args.b,
            depth=args.depth,
            generations=args.generations,
            count=args.count,
            seg_tol=DEFAULT_SEG_TOL[args.map] if args.seg_tol is None else args.seg_tol,
            locus_eps=args.locus_eps,
            j_max=args.j_max,
            score_margin=args.score_margin,
            target_arclength=args.target_arclength,
            out=args.out,
            output_format=args.format,
            jobs=args.jobs,
        )

    def as_dict(self: Self) -> Dict[str, Any]:
        """Field values, as accepted by the constructor."""
        return {name: getattr(self, name) for name in self.__slots__}

    def with_params(self: Self, a: float, b: float) -> RunConfig:
        """Copy of the configuration with other map parameters."""
        return RunConfig(**{**self.as_dict(), "a": a, "b": b})

    @property
    def heuristic(self: Self) -> bool:
        """Whether outputs come from the heuristic engine."""
        return self.map_kind == "henon"

    def engine(self: Self) -> Engine:
        """Engine configured for this run."""
        if self.map_kind == "lozi":
            return LoziEngine(a=self.a, b=self.b, locus_eps=self.locus_eps, seg_tol=self.seg_tol)
        return HenonEngine(
            a=self.a,
            b=self.b,
            locus_eps=self.locus_eps,
            seg_tol=self.seg_tol,
            j_max=self.j_max,
            score_margin=self.score_margin,
        )


def _emit(text: str, config: RunConfig) -> None:
    if config.out is None:
        sys.stdout.write(text)
    else:
        config.out.write_text(text, encoding="utf-8")
        logger.info("Wrote %s", config.out)


def _emit_rows(kind: str, rows: Dict[str, List[Any]], config: RunConfig, **extra: Any) -> None:
    if config.output_format == "csv":
        buffer = io.StringIO()
        write_csv(rows, buffer)
        _emit(buffer.getvalue(), config)
    else:
        _emit(dumps_json(kind, {"rows": rows, **extra}, heuristic=config.heuristic), config)


def cmd_check(config: RunConfig, args: argparse.Namespace) -> int:  # noqa: ARG001
    """Parameter check: Misiurewicz membership for Lozi, plausibility and expansion for Hénon."""
    if config.map_kind == "lozi":
        ok = LoziParams(config.a, config.b).in_misiurewicz
        payload: Dict[str, Any] = {"map": "lozi", "a": config.a, "b": config.b, "misiurewicz": ok}
    else:
        try:
            params = HenonParams(config.a, config.b)
            unstable_direction(params)
        except (ValueError, UnstableEigenvalueMissingError) as exc:
            logger.warning("%s", exc)
            ok, plausible = False, False
        else:
            ok, plausible = True, params.plausible
        payload = {"map": "henon", "a": config.a, "b": config.b, "plausible": plausible, "ok": ok}

    _emit(dumps_json("check", payload, heuristic=config.heuristic), config)
    return EXIT_OK if ok else EXIT_ERROR


def _kneading_of(config: RunConfig) -> KneadingSet:
    return config.engine().kneading_set_of(config.count, config.depth)


def cmd_kneading(config: RunConfig, args: argparse.Namespace) -> int:  # noqa: ARG001
    """Computes a kneading set with the configured engine."""
    _emit(dump_artifact(_kneading_of(config), heuristic=config.heuristic), config)
    return EXIT_OK


def _load(path: Path, expected: Optional[str] = None) -> Tuple[str, Any]:
    kind, obj = load_json(path)
    if expected is not None and kind != expected:
        msg = f"{path} holds a {kind} artifact, expected {expected}."
        raise ValueError(msg)
    return kind, obj


def cmd_folding(config: RunConfig, args: argparse.Namespace) -> int:
    """Folding pattern from the engine or from a kneading file."""
    if args.kneading is not None:
        _, kset = _load(args.kneading, "kneading")
        _emit(dump_artifact(kneading_to_folding(kset, config.generations)), config)
    else:
        _emit(dump_artifact(_engine_pattern(config), heuristic=config.heuristic), config)
    return EXIT_OK


def cmd_tree(config: RunConfig, args: argparse.Namespace) -> int:
    """Pruned tree (with marks and signs) from a folding file or from the engine; `--dot` emits Graphviz."""
    if args.folding is not None:
        _, pattern = _load(args.folding, "folding")
    else:
        pattern = _engine_pattern(config)

    marked = mark_tree(folding_to_tree(pattern))
    if args.dot:
        _emit(to_dot(marked), config)
    else:
        _emit(dumps_json("tree", marked.to_dict(), heuristic=config.heuristic and args.folding is None), config)
    return EXIT_OK


def _engine_pattern(config: RunConfig) -> FoldingPattern:
    if config.map_kind == "lozi":
        return LoziEngine(a=config.a, b=config.b, locus_eps=config.locus_eps).folding_pattern_of(config.generations)
    return kneading_to_folding(_kneading_of(config), config.generations)


_CONVERSIONS: Dict[Tuple[str, str], Callable[[Any, RunConfig], Any]] = {
    ("kneading", "kneading"): lambda k, c: k.truncate(c.depth),
    ("kneading", "folding"): lambda k, c: kneading_to_folding(k, c.generations),
    ("kneading", "tree"): lambda k, c: folding_to_tree(kneading_to_folding(k, c.generations)),
    ("folding", "kneading"): lambda f, c: folding_to_kneading(f, c.depth),
    ("folding", "folding"): lambda f, c: f,
    ("folding", "tree"): lambda f, c: folding_to_tree(f),
    ("tree", "kneading"): lambda t, c: tree_to_kneading(mark_tree(t), c.depth),
    ("tree", "folding"): lambda t, c: tree_to_folding(t),
    ("tree", "tree"): lambda t, c: t,
}


def cmd_convert(config: RunConfig, args: argparse.Namespace) -> int:
    """Converts an artifact between kneading set, folding pattern and pruned tree."""
    _, obj = _load(args.file, args.source)
    converted = _CONVERSIONS[(args.source, args.target)](obj, config)
    _emit(dump_artifact(converted), config)
    return EXIT_OK


def _window_text(args: argparse.Namespace) -> str:
    text = args.window_option or args.window
    if text is None:
        msg = f"`{args.cmd}` needs a window"
        raise ValueError(msg)
    return text


def _radius(window: TwoSidedWindow) -> int:
    right = len(window.right_word) - 1
    return right if window.left_tail_all_plus else min(len(window.left_word), right)


def cmd_admissible(config: RunConfig, args: argparse.Namespace) -> int:
    """Admissibility of a finite window against a kneading file."""
    window = TwoSidedWindow.from_text(_window_text(args))
    _, kset = _load(args.kneading, "kneading")
    n = _radius(window) if args.radius is None else args.radius
    verdict = is_admissible(window, kset, n, prelude_length=args.prelude_length)
    _emit(dumps_json("verdict", {"window": str(window), "radius": n, **verdict.to_dict()}), config)
    return EXIT_OK if verdict.admissible else EXIT_REJECTED


def _kneading_payload(values: Dict[str, Any]) -> Dict[str, Any]:
    # workers get plain field values, slotted frozen dataclasses do not unpickle
    return _kneading_of(RunConfig(**values)).to_dict()


def _parse_params(text: str) -> Tuple[float, float]:
    try:
        a, b = (float(v) for v in text.split(","))
    except ValueError:
        msg = f"`--params` expects 'a,b', found {text!r}."
        raise argparse.ArgumentTypeError(msg) from None
    return a, b


def _compare_batch(config: RunConfig, params: Sequence[Tuple[float, float]]) -> int:
    configs = [config.with_params(a, b).as_dict() for a, b in params]
    if config.jobs > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            payloads = list(pool.map(_kneading_payload, configs))
    else:
        payloads = [_kneading_payload(c) for c in configs]
    ksets = [KneadingSet.from_dict(p) for p in payloads]

    results = []
    for (i, first), (j, second) in combinations(enumerate(ksets), 2):
        comparison = compare_kneading_sets(first, second, config.depth)
        results.append({"first": list(params[i]), "second": list(params[j]), **comparison.to_dict()})

    _emit(dumps_json("comparison", {"comparisons": results}, heuristic=config.heuristic), config)
    return EXIT_OK if all(r["result"] == "equal" for r in results) else EXIT_DIFFERENT


def cmd_compare(config: RunConfig, args: argparse.Namespace) -> int:
    """Compares two artifact files, or the kneading sets of several parameter pairs (`--params`)."""
    if args.params:
        if len(args.params) < 2:  # noqa: PLR2004
            msg = "Batch comparison needs at least two `--params`."
            raise ValueError(msg)
        return _compare_batch(config, args.params)

    if len(args.files) != 2:  # noqa: PLR2004
        msg = f"`compare` needs two files, found {len(args.files)}."
        raise ValueError(msg)

    kind, first = _load(args.files[0])
    _, second = _load(args.files[1], kind)
    if kind == "kneading":
        comparison: Any = compare_kneading_sets(first, second, config.depth)
    elif kind == "folding":
        comparison = compare_folding(first, second)
    else:
        comparison = compare_folding(tree_to_folding(first), tree_to_folding(second))

    _emit(dumps_json("comparison", {"kind": kind, **comparison.to_dict()}), config)
    return EXIT_OK if comparison.equal else EXIT_DIFFERENT


def cmd_region(config: RunConfig, args: argparse.Namespace) -> int:
    """Region of the plane whose points follow a window (Lozi only)."""
    if config.map_kind != "lozi":
        msg = "`region` is only available for the Lozi map."
        raise ValueError(msg)
    window = TwoSidedWindow.from_text(_window_text(args))
    regions = LoziEngine(a=config.a, b=config.b, locus_eps=config.locus_eps).itinerary_to_region(window)
    _emit_rows("regions", region_rows(regions), config, window=str(window))
    return EXIT_OK


def cmd_manifold(config: RunConfig, args: argparse.Namespace) -> int:  # noqa: ARG001
    """Unstable manifold polyline with its markers (Hénon runs add the critical candidates to JSON output)."""
    engine = config.engine()
    poly = engine.grow_wu(config.target_arclength, config.seg_tol)
    extra: Dict[str, Any] = {}
    if isinstance(engine, HenonEngine) and config.output_format == "json":
        extra["candidates"] = candidate_rows(engine.detect_critical_points(poly))
    _emit_rows("polyline", polyline_rows(poly), config, **extra)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    """Argument parser of the `pruningfront` command."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--map", choices=_map_values, default="lozi", help="Map family (default: lozi)")
    common.add_argument("--a", type=float, default=None, help="First parameter (default: 1.8 lozi, 1.9 henon)")
    common.add_argument("--b", type=float, default=None, help="Second parameter (default: 0.3 lozi, 0.025 henon)")
    common.add_argument("--depth", type=int, default=20, help="Kneading tail depth (default: 20)")
    common.add_argument("--generations", type=int, default=4, help="Folding generations (default: 4)")
    common.add_argument("--count", type=int, default=6, help="Number of kneading sequences (default: 6)")
    common.add_argument("--seg-tol", type=float, default=None, help="Segment tolerance")
    common.add_argument("--locus-eps", type=float, default=1e-9, help="Dead zone half width (default: 1e-9)")
    common.add_argument("--j-max", type=int, default=10, help="Hénon horizon (default: 10)")
    common.add_argument("--score-margin", type=float, default=1.0, help="Hénon score margin (default: 1.0)")
    common.add_argument("--target-arclength", type=float, default=4.0, help="Polyline arclength (default: 4.0)")
    common.add_argument("--out", type=Path, default=None, help="Output file (default: stdout)")
    common.add_argument("--format", choices=_format_values, default="json", help="Output format (default: json)")
    common.add_argument("--jobs", type=int, default=1, help="Worker processes for batch comparisons (default: 1)")
    common.add_argument("-v", "--verbose", action="count", default=0, help="More logging (repeatable)")
    common.add_argument("--quiet", action="store_true", help="Only log errors")

    parser = argparse.ArgumentParser(prog="pruningfront", description="Kneading sets, folding patterns and pruned trees")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="cmd", required=True)

    s = sub.add_parser("check", parents=[common], help="Check map parameters")
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("kneading", parents=[common], help="Compute a kneading set")
    s.set_defaults(func=cmd_kneading)

    s = sub.add_parser("folding", parents=[common], help="Compute or convert a folding pattern")
    s.add_argument("--kneading", type=Path, default=None, help="Kneading file to convert")
    s.set_defaults(func=cmd_folding)

    s = sub.add_parser("tree", parents=[common], help="Compute a pruned tree")
    s.add_argument("--folding", type=Path, default=None, help="Folding file to convert")
    s.add_argument("--dot", action="store_true", help="Emit Graphviz text")
    s.set_defaults(func=cmd_tree)

    s = sub.add_parser("convert", parents=[common], help="Convert between kneading, folding and tree")
    s.add_argument("--from", dest="source", choices=_object_values, required=True, help="Kind of FILE")
    s.add_argument("--to", dest="target", choices=_object_values, required=True, help="Kind to produce")
    s.add_argument("file", type=Path, help="Artifact to convert")
    s.set_defaults(func=cmd_convert)

    s = sub.add_parser("admissible", parents=[common], help="Test a window against a kneading set")
    s.add_argument("window", nargs="?", default=None, help="Window text, e.g. '^-+.+--'")
    s.add_argument("--window", dest="window_option", default=None, help="Window text starting with '-'")
    s.add_argument("--kneading", type=Path, required=True, help="Kneading file")
    s.add_argument("--radius", type=int, default=None, help="Window radius (default: largest stored)")
    s.add_argument("--prelude-length", type=int, default=None, help="Longest prelude tried (default: radius)")
    s.set_defaults(func=cmd_admissible)

    s = sub.add_parser("compare", parents=[common], help="Compare two artifacts or several parameter pairs")
    s.add_argument("files", type=Path, nargs="*", help="Two artifact files")
    s.add_argument("--params", type=_parse_params, action="append", default=[], help="Parameter pair 'a,b'")
    s.set_defaults(func=cmd_compare)

    s = sub.add_parser("region", parents=[common], help="Region of a window (Lozi)")
    s.add_argument("window", nargs="?", default=None, help="Window text, e.g. '+-.+'")
    s.add_argument("--window", dest="window_option", default=None, help="Window text starting with '-'")
    s.set_defaults(func=cmd_region)

    s = sub.add_parser("manifold", parents=[common], help="Unstable manifold polyline")
    s.set_defaults(func=cmd_manifold)

    return parser


_WINDOW_TOKEN = re.compile(r"^\^?[-+~]*\.[-+~]*$")
_WINDOW_COMMANDS = ("admissible", "region")


def _bind_window_token(argv: Sequence[str]) -> List[str]:
    """Rewrites a window starting with '-' as `--window=TEXT` so that argparse does not read it as an option."""
    tokens = list(argv)
    command = next((k for k, token in enumerate(tokens) if token in _WINDOW_COMMANDS), None)
    if command is None:
        return tokens
    for k in range(command + 1, len(tokens)):
        if tokens[k].startswith("-") and _WINDOW_TOKEN.match(tokens[k]):
            tokens[k] = f"--window={tokens[k]}"
            break
    return tokens


def _configure_logging(verbose: int, *, quiet: bool) -> None:
    level = logging.ERROR if quiet else (logging.WARNING, logging.INFO, logging.DEBUG)[min(verbose, 2)]
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr, force=True)


def _exit_code(exc: PruningFrontError) -> int:
    if isinstance(exc, (SearchBudgetExceededError, BudgetExceededError)):
        return EXIT_BUDGET
    return EXIT_ERROR


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Entry point of the `pruningfront` command, returns the exit code."""
    parser = build_parser()
    args = parser.parse_args(_bind_window_token(sys.argv[1:] if argv is None else argv))
    _configure_logging(args.verbose, quiet=args.quiet)

    try:
        config = RunConfig.from_namespace(args)
        return int(args.func(config, args))
    except PruningFrontError as exc:
        logger.debug("Domain error", exc_info=True)
        print(json.dumps(exc.to_dict(), sort_keys=True, default=str), file=sys.stderr)  # noqa: T201
        return _exit_code(exc)
    except (ValueError, OSError) as exc:
        error = {"error": type(exc).__name__, "message": str(exc)}
        print(json.dumps(error, sort_keys=True), file=sys.stderr)  # noqa: T201
        return EXIT_ERROR

