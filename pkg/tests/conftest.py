from __future__ import annotations

from types import ModuleType
from typing import List
from typing import Tuple

import pandas as pd
import polars as pl
import pyarrow as pa
import pytest

from pruningfront.folding import FoldingPattern
from pruningfront.kneading import KneadingSequence
from pruningfront.kneading import KneadingSet
from pruningfront.lozi import LoziEngine
from pruningfront.tree import PrunedTree
from pruningfront.tree import folding_to_tree

GEN4_PATTERN = "1 0 1 0 1 0 . 1 0 1 0 1 1 1 0 1"


@pytest.fixture()
def sample_list() -> List[int]:
    """Returns a sample list."""
    return [1, 2, 3, 4, 5]


@pytest.fixture()
def sample_pairs() -> List[Tuple[int, int]]:
    """Returns a sample list of pairs."""
    return [(1, 2), (2, 3), (3, 4), (4, 5)]


@pytest.fixture()
def seed_pattern() -> FoldingPattern:
    """The first generation `1 0 . 1`."""
    return FoldingPattern.from_text("1 0 . 1")


@pytest.fixture()
def gen4_pattern() -> FoldingPattern:
    """Four generation folding window with both turning and post-critical points on each side."""
    return FoldingPattern.from_text(GEN4_PATTERN)


@pytest.fixture()
def gen4_tree(gen4_pattern: FoldingPattern) -> PrunedTree:
    """Pruned tree of `gen4_pattern`."""
    return folding_to_tree(gen4_pattern)


@pytest.fixture()
def gen4_kneading() -> KneadingSet:
    """Kneading set read off `gen4_pattern` at depth 5."""
    return KneadingSet.from_mapping(
        {
            0: KneadingSequence.from_text("", "+----"),
            -1: KneadingSequence.from_text("-", "++"),
            1: KneadingSequence.from_text("-+", "+"),
            2: KneadingSequence.from_text("--", "+"),
        },
    )


@pytest.fixture(scope="session")
def lozi_engine() -> LoziEngine:
    """Lozi engine at the classical Misiurewicz parameters, shared across the session (generations are cached)."""
    return LoziEngine(a=1.8, b=0.3)


@pytest.fixture(scope="session")
def lozi_kneading(lozi_engine: LoziEngine) -> KneadingSet:
    """Kneading set of `lozi_engine` with 12 sequences to depth 20."""
    return lozi_engine.kneading_set_of(12, 20)


@pytest.fixture(params=[pd, pl, pa])
def native_namespace(request) -> ModuleType:
    """Fixture to return a dataframe library module."""
    return request.param

