from __future__ import annotations

import sys
from typing import Literal
from typing import Tuple
from typing import Union

if sys.version_info >= (3, 10):
    from typing import TypeAlias  # pragma: no cover
else:
    from typing_extensions import TypeAlias  # pragma: no cover

MapKind: TypeAlias = Literal["lozi", "henon"]
OutputFormat: TypeAlias = Literal["json", "csv"]
ObjectKind: TypeAlias = Literal["kneading", "folding", "tree"]

OrderingKind: TypeAlias = Literal["less", "greater", "equal"]
ArcOrder: TypeAlias = Literal["farther", "closer", "same", "incomparable"]
DifferenceKind: TypeAlias = Literal["missing_entry", "arc_code_mismatch", "tail_mismatch"]
MarkerKind: TypeAlias = Literal["origin", "critical", "postcritical", ""]

Mark: TypeAlias = Literal[0, 1]
Label = Tuple[int, int]
"""(subscript, superscript) of a basic point, i.e. `(i, j)` for `z_i^j`."""

BoundingBox = Tuple[float, float, float, float]
"""(xmin, xmax, ymin, ymax)."""

Location = Union[int, float]
"""Fractional vertex index along a polyline."""
