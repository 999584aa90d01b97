"""Weighted multi-facet scoring, ranking, flow queries, and query-by-example.

A query is a set of facet clauses (facet, free text, non-negative weight).
Clause weights are normalized to sum to 1 before scoring, so scaling every
weight by a positive constant never changes the ranking. Each entry scores
the weighted sum of per-facet cosine similarities; entries missing a queried
facet either contribute 0 for it (``penalize_zero``) or have the remaining
clause weights renormalized for that entry (``renormalize``).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .errors import (
    FacetImportError,
    FlowError,
    InputError,
    NotFoundError,
    QueryError,
    StoreError,
    UnknownFacetError,
)
from .extraction import ExtractionConfig, extract_semantics
from .providers import EmbeddingProvider, ImagePayload, MllmClient
from .schema import FACET_ORDER, FacetId, SemanticRecord, VocabularySet
from .store import ScreenEntry, VectorStore, cosine, embed_texts, facet_text

DEFAULT_RESULT_COUNT = 15


class MissingFacetPolicy(str, Enum):
    PENALIZE_ZERO = "penalize_zero"
    RENORMALIZE = "renormalize"


class FlowDirection(str, Enum):
    NEXT = "next"
    PREVIOUS = "previous"


# Which facet of the source screen feeds each flow direction.
FLOW_SOURCE_FACET: dict[FlowDirection, FacetId] = {
    FlowDirection.NEXT: FacetId.NEXT_SCREEN,
    FlowDirection.PREVIOUS: FacetId.PREVIOUS_SCREEN,
}


@dataclass(frozen=True)
class FacetClause:
    facet: FacetId
    text: str
    weight: float = 1.0

    def __post_init__(self) -> None:
        if not isinstance(self.facet, FacetId):
            raise UnknownFacetError(f"unknown facet: {self.facet!r}")
        if not self.text:
            raise QueryError(f"{self.facet}: clause text is empty")
        if self.weight < 0:
            raise QueryError(f"{self.facet}: weight must be non-negative")


@dataclass(frozen=True)
class SemanticQuery:
    clauses: tuple[FacetClause, ...]
    k: int = DEFAULT_RESULT_COUNT
    missing_facet_policy: MissingFacetPolicy = MissingFacetPolicy.PENALIZE_ZERO

    def __post_init__(self) -> None:
        object.__setattr__(self, "clauses", tuple(self.clauses))
        if not self.clauses:
            raise QueryError("query needs at least one clause")
        facets = [c.facet for c in self.clauses]
        if len(set(facets)) != len(facets):
            raise QueryError("clause facets must be unique")
        if self.k < 1:
            raise QueryError("k must be at least 1")


@dataclass(frozen=True)
class RankedResult:
    screen_id: str
    overall_score: float
    facet_scores: dict[FacetId, float]


@dataclass(frozen=True)
class SearchResponse:
    overall: tuple[RankedResult, ...]
    per_facet: dict[FacetId, tuple[RankedResult, ...]]


def normalize_weights(query: SemanticQuery) -> SemanticQuery:
    """Scale clause weights to sum to 1; zero-weight clauses are kept (they
    still get per-facet result lists but add nothing to the overall score)."""
    total = sum(c.weight for c in query.clauses)
    if total <= 0:
        raise QueryError("at least one clause weight must be positive")
    clauses = tuple(replace(c, weight=c.weight / total) for c in query.clauses)
    return replace(query, clauses=clauses)


def score_screen(
    query: SemanticQuery,
    query_vectors: dict[FacetId, np.ndarray],
    entry: ScreenEntry,
) -> RankedResult:
    """Score one entry against a weight-normalized query."""
    facet_scores: dict[FacetId, float] = {}
    for clause in query.clauses:
        embedding = entry.embeddings.get(clause.facet)
        if embedding is not None:
            facet_scores[clause.facet] = cosine(query_vectors[clause.facet], embedding.vector)

    if query.missing_facet_policy is MissingFacetPolicy.RENORMALIZE:
        present = [c for c in query.clauses if c.facet in facet_scores]
        weight_total = sum(c.weight for c in present)
        if weight_total <= 0:
            overall = 0.0
        else:
            overall = sum((c.weight / weight_total) * facet_scores[c.facet] for c in present)
    else:
        overall = sum(
            c.weight * facet_scores.get(c.facet, 0.0) for c in query.clauses
        )
    return RankedResult(entry.id, overall, facet_scores)


def _ranked(results: list[RankedResult], k: int) -> tuple[RankedResult, ...]:
    return tuple(sorted(results, key=lambda r: (-r.overall_score, r.screen_id))[:k])


def search(store: VectorStore, query: SemanticQuery,
           provider: EmbeddingProvider) -> SearchResponse:
    """Brute-force scoring of every entry; deterministic ordering with ties
    broken by ascending screen id. An empty store yields an empty response."""
    query = normalize_weights(query)
    if provider.tag != store.provider_tag:
        raise StoreError(
            f"provider tag {provider.tag!r} does not match store {store.provider_tag!r}")

    if not store.entries:
        return SearchResponse((), {c.facet: () for c in query.clauses})

    vectors = embed_texts([c.text for c in query.clauses], provider)
    query_vectors = {c.facet: v for c, v in zip(query.clauses, vectors)}

    scored = [score_screen(query, query_vectors, entry) for entry in store.entries]
    overall = _ranked(scored, query.k)

    per_facet: dict[FacetId, tuple[RankedResult, ...]] = {}
    for clause in query.clauses:
        facet_results = [
            RankedResult(r.screen_id, r.facet_scores[clause.facet],
                         {clause.facet: r.facet_scores[clause.facet]})
            for r in scored if clause.facet in r.facet_scores
        ]
        per_facet[clause.facet] = _ranked(facet_results, query.k)
    return SearchResponse(overall, per_facet)


def flow_search(
    store: VectorStore,
    source_screen_id: str,
    direction: FlowDirection | str,
    k: int = DEFAULT_RESULT_COUNT,
    provider: EmbeddingProvider | None = None,
) -> tuple[RankedResult, ...]:
    """Rank other screens' screen-role embeddings against the source screen's
    inferred next/previous description. The source screen never appears."""
    try:
        direction = FlowDirection(direction)
    except ValueError as exc:
        raise InputError(f"direction must be 'next' or 'previous': {direction!r}") from exc
    if provider is None:
        raise InputError("an embedding provider is required")
    if k < 1:
        raise InputError("k must be at least 1")
    if provider.tag != store.provider_tag:
        raise StoreError(
            f"provider tag {provider.tag!r} does not match store {store.provider_tag!r}")

    source = store.get(source_screen_id)
    if source is None:
        raise NotFoundError(f"unknown screen id: {source_screen_id}")
    source_facet = FLOW_SOURCE_FACET[direction]
    text = facet_text(source.record, source_facet)
    if not text:
        raise FlowError(f"no inferred {direction.value} screen for {source_screen_id}")

    query_vector = embed_texts([text], provider)[0]
    results = []
    for entry in store.entries:
        if entry.id == source_screen_id:
            continue
        embedding = entry.embeddings.get(FacetId.SCREEN_ROLE)
        if embedding is None:
            continue
        similarity = cosine(query_vector, embedding.vector)
        results.append(RankedResult(entry.id, similarity, {FacetId.SCREEN_ROLE: similarity}))
    return _ranked(results, k)


def import_semantics(record: SemanticRecord, selected: set[FacetId]) -> SemanticQuery:
    """Build a query from a record's facets: one clause per selected facet,
    equal weights, default result count."""
    if not selected:
        raise QueryError("no facets selected for import")
    clauses = []
    for facet in FACET_ORDER:
        if facet not in selected:
            continue
        text = facet_text(record, facet)
        if not text:
            raise FacetImportError(facet.value)
        clauses.append(FacetClause(facet, text, 1.0))
    return SemanticQuery(tuple(clauses), k=DEFAULT_RESULT_COUNT)


@dataclass(frozen=True)
class QueryByExampleResult:
    record: SemanticRecord
    response: SearchResponse
    attempts: int
    degraded: bool


def query_by_example(
    image: ImagePayload,
    client: MllmClient,
    vocab: VocabularySet,
    selected: set[FacetId],
    store: VectorStore,
    provider: EmbeddingProvider,
    config: ExtractionConfig = ExtractionConfig(),
) -> QueryByExampleResult:
    """extract -> import -> search, returning the intermediate record so the
    caller can show it for review."""
    outcome = extract_semantics(image, client, vocab, config)
    query = import_semantics(outcome.record, selected)
    response = search(store, query, provider)
    return QueryByExampleResult(outcome.record, response, outcome.attempts, outcome.degraded)


# --- wire format ----------------------------------------------------------


def query_from_payload(payload: object) -> SemanticQuery:
    """Parse the documented query JSON shape, mapping unknown facet names to
    UnknownFacetError and every other structural problem to QueryError."""
    if not isinstance(payload, dict):
        raise QueryError("query payload must be an object")
    raw_clauses = payload.get("clauses")
    if not isinstance(raw_clauses, list) or not raw_clauses:
        raise QueryError("'clauses' must be a non-empty array")
    clauses = []
    for raw in raw_clauses:
        if not isinstance(raw, dict):
            raise QueryError("each clause must be an object")
        facet_name = raw.get("facet")
        try:
            facet = FacetId(facet_name)
        except ValueError as exc:
            raise UnknownFacetError(f"unknown facet: {facet_name!r}") from exc
        text = raw.get("text")
        if not isinstance(text, str):
            raise QueryError(f"{facet}: 'text' must be a string")
        weight = raw.get("weight", 1.0)
        if isinstance(weight, bool) or not isinstance(weight, (int, float)):
            raise QueryError(f"{facet}: 'weight' must be a number")
        clauses.append(FacetClause(facet, text, float(weight)))
    k = payload.get("k", DEFAULT_RESULT_COUNT)
    if isinstance(k, bool) or not isinstance(k, int):
        raise QueryError("'k' must be an integer")
    policy_name = payload.get("missing_facet_policy", MissingFacetPolicy.PENALIZE_ZERO.value)
    try:
        policy = MissingFacetPolicy(policy_name)
    except ValueError as exc:
        raise QueryError(f"unknown missing_facet_policy: {policy_name!r}") from exc
    return SemanticQuery(tuple(clauses), k=k, missing_facet_policy=policy)


def _round6(value: float) -> float:
    return round(value, 6)


def result_to_payload(result: RankedResult) -> dict:
    return {
        "screen_id": result.screen_id,
        "overall_score": _round6(result.overall_score),
        "facet_scores": {f.value: _round6(s) for f, s in result.facet_scores.items()},
    }


def response_to_payload(response: SearchResponse) -> dict:
    """SearchResponse as the documented JSON shape, scores at 6 fractional digits."""
    return {
        "overall": [result_to_payload(r) for r in response.overall],
        "per_facet": {
            facet.value: [result_to_payload(r) for r in results]
            for facet, results in response.per_facet.items()
        },
    }
