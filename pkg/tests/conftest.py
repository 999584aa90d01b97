"""Shared fixtures: vocabularies, mock providers, record builders, toy stores."""

from __future__ import annotations

import math

import numpy as np
import pytest

from uisearch.extraction import mock_extract
from uisearch.providers import MockEmbeddingProvider
from uisearch.schema import (
    FACET_ORDER,
    FACET_SHAPES,
    FacetId,
    FacetShape,
    FacetValue,
    SemanticRecord,
    default_vocabulary,
)
from uisearch.store import FacetEmbedding, ScreenEntry, VectorStore, index_screen


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One PASS/FAIL line per acceptance criterion at the end of the run."""
    lines = []
    for outcome, marker in (("passed", "PASS"), ("failed", "FAIL"), ("skipped", "SKIP")):
        for report in terminalreporter.stats.get(outcome, []):
            if "test_acceptance" not in report.nodeid:
                continue
            if outcome != "skipped" and report.when != "call":
                continue
            name = report.nodeid.split("::", 1)[1]
            lines.append(f"{marker}  {name}")
    if lines:
        terminalreporter.write_sep("-", "acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def vocab():
    return default_vocabulary()


@pytest.fixture()
def embedder():
    return MockEmbeddingProvider(dimension=64, seed=0)


def build_record(note: str | None = None, **facet_values) -> SemanticRecord:
    """Record with the named facets set and everything else empty.

    Values: str for text facets, list of str for list facets, list of
    (key, description) pairs for keyed facets.
    """
    facets: dict[FacetId, FacetValue] = {}
    for facet in FACET_ORDER:
        raw = facet_values.get(facet.value)
        if raw is None:
            facets[facet] = FacetValue.empty(facet)
        elif FACET_SHAPES[facet] is FacetShape.TEXT:
            facets[facet] = FacetValue.text(facet, raw)
        elif FACET_SHAPES[facet] is FacetShape.TEXT_LIST:
            facets[facet] = FacetValue.text_list(facet, raw)
        else:
            facets[facet] = FacetValue.keyed_list(facet, raw)
    return SemanticRecord(facets, note)


def full_record(tag: str = "x") -> SemanticRecord:
    """A record with all 14 facets non-empty; texts keyed by ``tag``."""
    return build_record(
        app_category=[f"finance {tag}"],
        app_description=f"An app about {tag}.",
        similar_apps=[f"App{tag}: close relative"],
        target_user=[(f"users of {tag}", "like it")],
        screen_category=[f"screen kind {tag}"],
        screen_role=f"A screen that handles {tag}.",
        next_screen=f"A screen after {tag}.",
        previous_screen=f"A screen before {tag}.",
        ui_elements=[(f"button {tag}", "does things")],
        action_items=[(f"link {tag}", "opens things")],
        layout=[f"grid {tag}"],
        color_scheme=[(f"scheme {tag}", "applied")],
        color_palette=[("primary", "dodgerblue")],
        mood=[(f"mood {tag}", "a feeling")],
    )


def mock_store(count: int, dimension: int = 64, seed: int = 0) -> tuple[VectorStore, MockEmbeddingProvider]:
    """Store of ``count`` synthetic screens via the mock extractor/embedder."""
    provider = MockEmbeddingProvider(dimension=dimension, seed=seed)
    store = VectorStore(dimension, provider.tag)
    vocab = default_vocabulary()
    for i in range(count):
        record = mock_extract(f"screen-{i}".encode(), seed, vocab)
        index_screen(store, record, f"img/{i:04d}.png", provider,
                     screen_id=f"s{i:04d}", ingested_at="2026-01-01T00:00:00+00:00")
    return store, provider


def unit32(values) -> np.ndarray:
    """float32 vector, asserting it is already unit within 1e-6."""
    v = np.asarray(values, dtype=np.float32)
    norm = math.sqrt(float(np.dot(v.astype(np.float64), v.astype(np.float64))))
    assert abs(norm - 1.0) <= 1e-6
    return v


def explicit_entry(screen_id: str, vectors: dict[FacetId, np.ndarray],
                   record: SemanticRecord | None = None) -> ScreenEntry:
    """Entry with hand-set embeddings, for fixtures with exact similarities."""
    record = record or full_record(screen_id)
    embeddings = {
        facet: FacetEmbedding(facet, unit32(vec), source_text=f"{facet.value} of {screen_id}")
        for facet, vec in vectors.items()
    }
    return ScreenEntry(screen_id, f"img/{screen_id}.png", record, embeddings,
                       "2026-01-01T00:00:00+00:00")


class ExplicitProvider:
    """Embedding provider returning hand-chosen vectors per exact text."""

    def __init__(self, dimension: int, mapping: dict[str, np.ndarray], tag: str = "explicit:0"):
        self._dimension = dimension
        self._mapping = mapping
        self._tag = tag

    @property
    def dimension(self) -> int:
        return self._dimension

    @property
    def tag(self) -> str:
        return self._tag

    def embed(self, texts):
        return [np.asarray(self._mapping[t], dtype=np.float32) for t in texts]
