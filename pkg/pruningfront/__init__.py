from __future__ import annotations

from importlib import metadata

from pruningfront.folding import FoldingPattern
from pruningfront.folding import annotate
from pruningfront.folding import folding_to_kneading
from pruningfront.folding import kneading_to_folding
from pruningfront.henon import HenonEngine
from pruningfront.henon import HenonParams
from pruningfront.kneading import KneadingSequence
from pruningfront.kneading import KneadingSet
from pruningfront.kneading import compare_kneading_sets
from pruningfront.kneading import is_admissible
from pruningfront.lozi import LoziEngine
from pruningfront.lozi import LoziParams
from pruningfront.manifold import Point
from pruningfront.manifold import WuPolyline
from pruningfront.symbols import Symbol
from pruningfront.symbols import SymbolWord
from pruningfront.symbols import TwoSidedWindow
from pruningfront.tree import PrunedTree
from pruningfront.tree import folding_to_tree
from pruningfront.tree import mark_tree
from pruningfront.tree import tree_to_kneading

__title__ = __name__
__version__ = metadata.version(__title__)

__all__ = (
    "FoldingPattern",
    "HenonEngine",
    "HenonParams",
    "KneadingSequence",
    "KneadingSet",
    "LoziEngine",
    "LoziParams",
    "Point",
    "PrunedTree",
    "Symbol",
    "SymbolWord",
    "TwoSidedWindow",
    "WuPolyline",
    "annotate",
    "compare_kneading_sets",
    "folding_to_kneading",
    "folding_to_tree",
    "is_admissible",
    "kneading_to_folding",
    "mark_tree",
    "tree_to_kneading",
)
