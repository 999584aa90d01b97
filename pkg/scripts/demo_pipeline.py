"""Offline walkthrough: ingest the bundled screenshots, then run a few queries.

Usage: python scripts/demo_pipeline.py [store_dir]

Everything uses the mock providers, so the output is deterministic and no
credentials or network access are needed.
"""

from __future__ import annotations

import hashlib
import sys
import tempfile
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from uisearch.extraction import mock_extract  # noqa: E402
from uisearch.providers import MockEmbeddingProvider  # noqa: E402
from uisearch.retrieval import (  # noqa: E402
    FacetClause,
    FlowDirection,
    SemanticQuery,
    flow_search,
    import_semantics,
    search,
)
from uisearch.schema import FacetId, default_vocabulary, serialize_record  # noqa: E402
from uisearch.store import VectorStore, index_screen, save_store  # noqa: E402

ASSETS = Path(__file__).resolve().parents[1] / "assets" / "sample_screens"


def main() -> None:
    vocab = default_vocabulary()
    provider = MockEmbeddingProvider(dimension=64, seed=0)
    store = VectorStore(provider.dimension, provider.tag)

    print(f"ingesting {len(list(ASSETS.iterdir()))} bundled screenshots (mock extractor)")
    for path in sorted(ASSETS.iterdir()):
        digest = hashlib.sha256(path.read_bytes()).digest()
        record = mock_extract(digest, 0, vocab)
        entry = index_screen(store, record, path.name, provider)
        print(f"  {entry.id}  {path.name}")

    query = SemanticQuery((
        FacetClause(FacetId.SCREEN_ROLE, "checkout summary for an order", 2.0),
        FacetClause(FacetId.MOOD, "minimal and calm", 1.0),
    ), k=5)
    print("\nweighted two-facet query, top 5:")
    response = search(store, query, provider)
    for rank, result in enumerate(response.overall, 1):
        print(f"  {rank}. {result.screen_id}  {result.overall_score:+.4f}")

    source = response.overall[0].screen_id
    print(f"\nlikely next screens after {source}:")
    for rank, result in enumerate(
            flow_search(store, source, FlowDirection.NEXT, k=3, provider=provider), 1):
        print(f"  {rank}. {result.screen_id}  {result.overall_score:+.4f}")

    entry = store.get(source)
    print(f"\nrecord of {source}:\n")
    print(serialize_record(entry.record))

    reused = import_semantics(entry.record, {FacetId.SCREEN_ROLE, FacetId.MOOD})
    print("query-by-import on that screen's role+mood, top 3:")
    for rank, result in enumerate(search(store, reused, provider).overall[:3], 1):
        print(f"  {rank}. {result.screen_id}  {result.overall_score:+.4f}")

    destination = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(tempfile.mkdtemp()) / "demo_store"
    save_store(store, destination)
    print(f"\nstore saved to {destination}")
    print(f"serve it with: uisearch serve --store {destination} --mock")


if __name__ == "__main__":
    main()
