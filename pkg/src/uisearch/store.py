"""Per-facet text embeddings and the persistent vector store.

Each indexed screen carries one unit-norm float32 embedding per non-empty
facet; empty facets stay absent rather than becoming zero vectors, which
forces retrieval to take an explicit missing-facet policy. Stores are
snapshot-readable: readers iterate an immutable entry tuple while a single
writer swaps in extended snapshots atomically.

On disk a store is a directory of three files: a JSON manifest (dimension,
provider tag, count, FNV-1a checksum), a JSON-Lines records file, and a flat
little-endian float32 block holding the vectors in entry/facet order.
"""

from __future__ import annotations

import hashlib
import json
import threading
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .errors import DuplicateError, InputError, ProviderError, StoreError
from .fingerprint import fnv1a64
from .providers import EmbeddingProvider
from .schema import (
    FACET_ORDER,
    FacetId,
    FacetShape,
    SemanticRecord,
    facet_to_plain,
    plain_to_facet,
    serialize_record,
)

UNIT_NORM_TOLERANCE = 1e-6

MANIFEST_NAME = "manifest.json"
RECORDS_NAME = "records.jsonl"
VECTORS_NAME = "vectors.f32"


def facet_text(record: SemanticRecord, facet: FacetId) -> str:
    """The text that represents one facet for embedding purposes.

    Keyed facets keep their keys ("key: description" lines) so the key's
    meaning participates in similarity; plain lists join with "; ".
    """
    value = record.facets[facet]
    if value.shape is FacetShape.TEXT:
        return value.as_text()
    if value.shape is FacetShape.TEXT_LIST:
        return "; ".join(value.as_items())
    return "\n".join(f"{key}: {desc}" for key, desc in value.as_pairs())


def _unit(vector: np.ndarray) -> np.ndarray:
    v64 = np.asarray(vector, dtype=np.float64)
    norm = float(np.linalg.norm(v64))
    if norm == 0.0:
        raise ProviderError("embedding provider returned a zero vector")
    return (v64 / norm).astype(np.float32)


def embed_texts(texts: Sequence[str], provider: EmbeddingProvider) -> list[np.ndarray]:
    """Embed a batch, preserving order and renormalizing to unit length."""
    for i, text in enumerate(texts):
        if not text:
            raise InputError(f"text at position {i} is empty")
    if not texts:
        return []
    vectors = provider.embed(list(texts))
    if len(vectors) != len(texts):
        raise ProviderError(f"provider returned {len(vectors)} vectors for {len(texts)} texts")
    return [_unit(v) for v in vectors]


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """Dot product of unit vectors, accumulated in float64, clipped to [-1, 1]."""
    if a.shape != b.shape:
        raise InputError(f"dimension mismatch: {a.shape} vs {b.shape}")
    value = float(np.dot(np.asarray(a, dtype=np.float64), np.asarray(b, dtype=np.float64)))
    return max(-1.0, min(1.0, value))


@dataclass(frozen=True, eq=False)
class FacetEmbedding:
    facet: FacetId
    vector: np.ndarray
    source_text: str

    def __post_init__(self) -> None:
        if not self.source_text:
            raise InputError(f"{self.facet}: embedding for empty text is not allowed")
        norm = float(np.linalg.norm(np.asarray(self.vector, dtype=np.float64)))
        if abs(norm - 1.0) > UNIT_NORM_TOLERANCE:
            raise InputError(f"{self.facet}: vector norm {norm} is not unit")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FacetEmbedding):
            return NotImplemented
        return (self.facet is other.facet
                and self.source_text == other.source_text
                and np.array_equal(self.vector, other.vector))


@dataclass(frozen=True, eq=False)
class ScreenEntry:
    id: str
    image_ref: str
    record: SemanticRecord
    embeddings: dict[FacetId, FacetEmbedding]
    ingested_at: str

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ScreenEntry):
            return NotImplemented
        return (self.id == other.id and self.image_ref == other.image_ref
                and self.record == other.record and self.ingested_at == other.ingested_at
                and self.embeddings == other.embeddings)


class VectorStore:
    """Ordered collection of screen entries sharing one embedding space.

    Readers take ``entries`` (an immutable tuple snapshot); the writer path
    builds an extended tuple and swaps it in under a lock, so concurrent
    searches never observe a half-applied write.
    """

    def __init__(self, dimension: int, provider_tag: str,
                 entries: Iterable[ScreenEntry] = ()):
        if dimension <= 0:
            raise StoreError("dimension must be positive")
        self.dimension = dimension
        self.provider_tag = provider_tag
        self._lock = threading.Lock()
        self._entries: tuple[ScreenEntry, ...] = ()
        self._by_id: dict[str, ScreenEntry] = {}
        for entry in entries:
            self.append(entry)

    @property
    def entries(self) -> tuple[ScreenEntry, ...]:
        return self._entries

    def __len__(self) -> int:
        return len(self._entries)

    def get(self, screen_id: str) -> ScreenEntry | None:
        return self._by_id.get(screen_id)

    def append(self, entry: ScreenEntry) -> None:
        with self._lock:
            if entry.id in self._by_id:
                raise DuplicateError(f"screen id already indexed: {entry.id}")
            for facet, embedding in entry.embeddings.items():
                if embedding.vector.shape != (self.dimension,):
                    raise StoreError(
                        f"{facet}: dimension {embedding.vector.shape[0]} != store {self.dimension}")
            by_id = dict(self._by_id)
            by_id[entry.id] = entry
            self._by_id = by_id
            self._entries = self._entries + (entry,)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, VectorStore):
            return NotImplemented
        return (self.dimension == other.dimension
                and self.provider_tag == other.provider_tag
                and self._entries == other._entries)


def entry_digest(image_ref: str, record: SemanticRecord) -> str:
    """Deterministic content id for an (image_ref, record) pair."""
    h = hashlib.sha256()
    h.update(image_ref.encode("utf-8"))
    h.update(b"\x1f")
    h.update(serialize_record(record).encode("utf-8"))
    return h.hexdigest()[:32]


def index_screen(
    store: VectorStore,
    record: SemanticRecord,
    image_ref: str,
    provider: EmbeddingProvider,
    screen_id: str | None = None,
    ingested_at: str | None = None,
) -> ScreenEntry:
    """Embed every non-empty facet of ``record`` and append one entry."""
    if provider.tag != store.provider_tag:
        raise StoreError(
            f"provider tag {provider.tag!r} does not match store {store.provider_tag!r}")
    if provider.dimension != store.dimension:
        raise StoreError(f"provider dimension {provider.dimension} != store {store.dimension}")

    present = [(facet, facet_text(record, facet)) for facet in FACET_ORDER]
    present = [(facet, text) for facet, text in present if text]
    vectors = embed_texts([text for _, text in present], provider)
    embeddings = {
        facet: FacetEmbedding(facet, vector, text)
        for (facet, text), vector in zip(present, vectors)
    }
    entry = ScreenEntry(
        id=screen_id or entry_digest(image_ref, record),
        image_ref=image_ref,
        record=record,
        embeddings=embeddings,
        ingested_at=ingested_at or datetime.now(timezone.utc).isoformat(timespec="seconds"),
    )
    store.append(entry)
    return entry


# --- persistence ----------------------------------------------------------


def record_to_plain(record: SemanticRecord) -> dict:
    doc = {facet.value: facet_to_plain(record.facets[facet]) for facet in FACET_ORDER}
    if record.source_note is not None:
        doc["source_note"] = record.source_note
    return doc


def record_from_plain(doc: dict) -> SemanticRecord:
    facets = {facet: plain_to_facet(facet, doc[facet.value]) for facet in FACET_ORDER}
    return SemanticRecord(facets, doc.get("source_note"))


def save_store(store: VectorStore, destination: str | Path) -> None:
    """Write manifest + records + vector block; overwrites existing files."""
    dest = Path(destination)
    dest.mkdir(parents=True, exist_ok=True)
    entries = store.entries

    vector_parts: list[bytes] = []
    with open(dest / RECORDS_NAME, "w", encoding="utf-8") as records_file:
        for entry in entries:
            embedded = [f.value for f in FACET_ORDER if f in entry.embeddings]
            line = {
                "id": entry.id,
                "image_ref": entry.image_ref,
                "ingested_at": entry.ingested_at,
                "record": record_to_plain(entry.record),
                "embedded": embedded,
                "source_texts": {f: entry.embeddings[FacetId(f)].source_text for f in embedded},
            }
            records_file.write(json.dumps(line, ensure_ascii=False) + "\n")
            for facet_name in embedded:
                vector = entry.embeddings[FacetId(facet_name)].vector
                vector_parts.append(np.asarray(vector, dtype="<f4").tobytes())

    blob = b"".join(vector_parts)
    (dest / VECTORS_NAME).write_bytes(blob)
    manifest = {
        "format_version": 1,
        "dimension": store.dimension,
        "provider_tag": store.provider_tag,
        "count": len(entries),
        "vector_bytes": len(blob),
        "vector_checksum": f"{fnv1a64(blob):016x}",
    }
    (dest / MANIFEST_NAME).write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")


def load_store(source: str | Path) -> VectorStore:
    """Load a store directory, verifying the vector block checksum."""
    src = Path(source)
    try:
        manifest = json.loads((src / MANIFEST_NAME).read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise StoreError(f"missing manifest: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise StoreError(f"corrupt manifest: {exc}") from exc

    for key in ("dimension", "provider_tag", "count", "vector_bytes", "vector_checksum"):
        if key not in manifest:
            raise StoreError(f"manifest missing field: {key}")
    dimension = int(manifest["dimension"])

    blob = (src / VECTORS_NAME).read_bytes() if (src / VECTORS_NAME).exists() else b""
    if len(blob) != manifest["vector_bytes"] or f"{fnv1a64(blob):016x}" != manifest["vector_checksum"]:
        raise StoreError("vectors file failed checksum verification")

    entries: list[ScreenEntry] = []
    offset = 0
    item_bytes = 4 * dimension
    records_path = src / RECORDS_NAME
    if not records_path.exists():
        raise StoreError("missing records file")
    with open(records_path, encoding="utf-8") as records_file:
        for line_number, line in enumerate(records_file, start=1):
            if not line.strip():
                continue
            try:
                doc = json.loads(line)
                record = record_from_plain(doc["record"])
                embeddings: dict[FacetId, FacetEmbedding] = {}
                for facet_name in doc["embedded"]:
                    facet = FacetId(facet_name)
                    vector = np.frombuffer(blob, dtype="<f4", count=dimension, offset=offset).copy()
                    offset += item_bytes
                    embeddings[facet] = FacetEmbedding(
                        facet, vector, doc["source_texts"][facet_name])
                entries.append(ScreenEntry(
                    id=doc["id"],
                    image_ref=doc["image_ref"],
                    record=record,
                    embeddings=embeddings,
                    ingested_at=doc["ingested_at"],
                ))
            except (KeyError, ValueError, TypeError, InputError) as exc:
                raise StoreError(f"corrupt record at line {line_number}: {exc}") from exc
    if offset != len(blob):
        raise StoreError("vectors file length does not match records (checksum scope)")
    if len(entries) != manifest["count"]:
        raise StoreError(f"entry count {len(entries)} != manifest count {manifest['count']}")
    return VectorStore(dimension, manifest["provider_tag"], entries)
