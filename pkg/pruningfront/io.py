from __future__ import annotations

import csv
import json
import logging
import re
from pathlib import Path
from typing import TYPE_CHECKING
from typing import Any
from typing import Dict
from typing import List
from typing import Mapping
from typing import Optional
from typing import Sequence
from typing import TextIO
from typing import Tuple
from typing import Union
from typing import get_args

import narwhals.stable.v1 as nw

from pruningfront.errors import FormatVersionError
from pruningfront.errors import ParseError
from pruningfront.folding import FoldingPattern
from pruningfront.folding import annotate
from pruningfront.kneading import KneadingSet
from pruningfront.tree import MarkedTree
from pruningfront.tree import PrunedTree
from pruningfront.utils._types import ObjectKind

if TYPE_CHECKING:  # pragma: no cover
    from types import ModuleType

    import numpy as np

    from pruningfront.henon import CriticalCandidate
    from pruningfront.manifold import WuPolyline

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1
FLOAT_FORMAT = ".17g"

_object_kinds = get_args(ObjectKind)
_FLOAT_TAG = "\x00float:"
_TAGGED_FLOAT = re.compile(r'"\\u0000float:([^"]*)"')

Artifact = Union[KneadingSet, FoldingPattern, PrunedTree]


def format_float(value: float) -> str:
    """Text of a float with 17 significant digits."""
    return format(value, FLOAT_FORMAT)


def _tag_floats(obj: Any) -> Any:
    if isinstance(obj, bool) or obj is None:
        return obj
    if isinstance(obj, float):
        return f"{_FLOAT_TAG}{format_float(obj)}"
    if isinstance(obj, Mapping):
        return {str(k): _tag_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_tag_floats(v) for v in obj]
    return obj


def dumps_json(kind: str, payload: Mapping[str, Any], *, heuristic: bool = False) -> str:
    """Serialises an artifact: `format_version`, `kind`, sorted keys, fixed indentation, 17 digit floats.

    Identical payloads give byte identical text.

    Arguments:
        kind: Artifact kind written in the document.
        payload: JSON ready content.
        heuristic: Whether to flag the artifact as coming from a heuristic engine.
    """
    document: Dict[str, Any] = {"format_version": FORMAT_VERSION, "kind": kind, **payload}
    if heuristic:
        document["heuristic"] = True
    text = json.dumps(_tag_floats(document), indent=2, sort_keys=True)
    return _TAGGED_FLOAT.sub(r"\1", text) + "\n"


def kneading_to_dict(kset: KneadingSet) -> Dict[str, Any]:
    """Payload of a kneading set."""
    return kset.to_dict()


def kneading_from_dict(data: Mapping[str, Any]) -> KneadingSet:
    """Kneading set from its payload (missing indices are recovered from the arc-codes)."""
    return KneadingSet.from_dict(data)


def folding_to_dict(pattern: FoldingPattern) -> Dict[str, Any]:
    """Payload of a folding pattern, with its text forms and per position annotations."""
    annotated = annotate(pattern)
    return {**annotated.to_dict(), "text": str(pattern), "signed_text": annotated.signed_text()}


def folding_from_dict(data: Mapping[str, Any]) -> FoldingPattern:
    """Folding pattern from its payload; `text` is used when the mark lists are absent."""
    if "left" in data and "right" in data:
        return FoldingPattern(
            left=tuple(int(m) for m in data["left"]),
            right=tuple(int(m) for m in data["right"]),
            generations=int(data["generations"]),
        )
    return FoldingPattern.from_text(data["text"], data.get("generations"))


def tree_to_dict(tree: Union[PrunedTree, MarkedTree]) -> Dict[str, Any]:
    """Payload of a pruned or marked tree."""
    return tree.to_dict()


def tree_from_dict(data: Mapping[str, Any]) -> PrunedTree:
    """Pruned tree from its payload (marks and signs are recomputed on demand)."""
    return PrunedTree(
        levels=tuple(tuple(int(v) for v in level) for level in data["levels"]),
        children={int(v): tuple(int(w) for w in kids) for v, kids in data["children"].items()},
        depth=int(data["depth"]),
    )


_FROM_DICT = {"kneading": kneading_from_dict, "folding": folding_from_dict, "tree": tree_from_dict}


def loads_json(text: str) -> Tuple[ObjectKind, Artifact]:
    """Parses a serialised kneading set, folding pattern or tree.

    Raises:
        ParseError: If the text is not JSON or the kind is unknown.
        FormatVersionError: If `format_version` is missing or unsupported.
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        msg = f"Invalid JSON: {exc.msg}."
        raise ParseError(msg, position=exc.pos) from exc

    version = data.get("format_version") if isinstance(data, dict) else None
    if version != FORMAT_VERSION:
        msg = f"Unsupported format_version {version!r}, expected {FORMAT_VERSION}."
        raise FormatVersionError(msg, found=version, expected=FORMAT_VERSION)

    kind = data.get("kind")
    if kind not in _object_kinds:
        msg = f"`kind` must be one of {_object_kinds}. Found {kind!r}"
        raise ParseError(msg, position=0, kind=kind)
    if data.get("heuristic"):
        logger.info("Loading a heuristic %s artifact.", kind)
    return kind, _FROM_DICT[kind](data)


def load_json(path: Union[str, Path]) -> Tuple[ObjectKind, Artifact]:
    """Reads and parses an artifact file."""
    return loads_json(Path(path).read_text(encoding="utf-8"))


def dump_artifact(obj: Artifact, *, heuristic: bool = False) -> str:
    """JSON text of a kneading set, folding pattern or tree."""
    if isinstance(obj, KneadingSet):
        return dumps_json("kneading", kneading_to_dict(obj), heuristic=heuristic)
    if isinstance(obj, FoldingPattern):
        return dumps_json("folding", folding_to_dict(obj), heuristic=heuristic)
    return dumps_json("tree", tree_to_dict(obj), heuristic=heuristic)


def polyline_rows(poly: WuPolyline) -> Dict[str, List[Any]]:
    """Columns `index, x, y, arclength, marker_kind, i, j` of a polyline, one row per vertex."""
    markers = {m.index: m for m in poly.markers}
    kinds: List[str] = []
    subscripts: List[Optional[int]] = []
    superscripts: List[Optional[int]] = []
    for k in range(len(poly)):
        marker = markers.get(k)
        kinds.append("origin" if k == poly.origin_index else (marker.kind if marker else ""))
        subscripts.append(marker.subscript if marker else None)
        superscripts.append(marker.superscript if marker else None)

    return {
        "index": list(range(len(poly))),
        "x": poly.vertices[:, 0].tolist(),
        "y": poly.vertices[:, 1].tolist(),
        "arclength": poly.arclength.tolist(),
        "marker_kind": kinds,
        "i": subscripts,
        "j": superscripts,
    }


def region_rows(regions: Sequence[np.ndarray]) -> Dict[str, List[Any]]:
    """Columns `polygon, vertex, x, y`, one row per polygon vertex."""
    rows: Dict[str, List[Any]] = {"polygon": [], "vertex": [], "x": [], "y": []}
    for p, polygon in enumerate(regions):
        for v, (x, y) in enumerate(polygon.tolist()):
            rows["polygon"].append(p)
            rows["vertex"].append(v)
            rows["x"].append(x)
            rows["y"].append(y)
    return rows


def candidate_rows(candidates: Sequence[CriticalCandidate]) -> Dict[str, List[Any]]:
    """Columns of `CriticalCandidate.to_dict`, one row per candidate."""
    names = ("index", "location", "x", "y", "score", "stability", "arclength", "tangent_alignment")
    records = [c.to_dict() for c in candidates]
    return {name: [r[name] for r in records] for name in names}


def write_csv(rows: Mapping[str, List[Any]], stream: TextIO) -> None:
    """Writes columns as CSV, floats with 17 significant digits and missing values as empty cells."""
    writer = csv.writer(stream, lineterminator="\n")
    names = list(rows)
    writer.writerow(names)
    for values in zip(*(rows[name] for name in names)):
        writer.writerow(
            "" if v is None else (format_float(v) if isinstance(v, float) else v) for v in values
        )


def polyline_to_csv(poly: WuPolyline, stream: TextIO) -> None:
    """CSV dump of a polyline and its markers."""
    write_csv(polyline_rows(poly), stream)


def regions_to_csv(regions: Sequence[np.ndarray], stream: TextIO) -> None:
    """CSV dump of region polygons."""
    write_csv(region_rows(regions), stream)


def to_native_frame(rows: Mapping[str, List[Any]], native_namespace: ModuleType) -> Any:
    """Dataframe of the given columns in the requested backend (`pandas`, `polars`, `pyarrow`, ...).

    Arguments:
        rows: Columns, as returned by `polyline_rows`, `region_rows` or `candidate_rows`.
        native_namespace: The dataframe library module.

    Examples:
        ```python
        import polars as pl
        from pruningfront.io import region_rows, to_native_frame

        frame = to_native_frame(region_rows(regions), native_namespace=pl)
        ```
    """
    return nw.from_dict(dict(rows), native_namespace=native_namespace).to_native()
