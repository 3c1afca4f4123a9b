"""Attribute-aware top-k spatial keyword search over a two-layer index:
a quad tree of keyword clusters routing into dual-filtering R-trees."""

from .index import BuildParams, QdrIndex, build_index
from .model import GeoObject, Query, ScoredResult
from .query_engine import SearchStats, qdr_search

__all__ = [
    "BuildParams", "GeoObject", "QdrIndex", "Query", "ScoredResult",
    "SearchStats", "build_index", "qdr_search",
]
