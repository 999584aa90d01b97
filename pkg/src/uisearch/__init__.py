"""Semantic search over mobile UI screenshots.

A multimodal model turns each screenshot into a 14-facet semantic record;
per-facet text embeddings go into a brute-force vector store; queries are
weighted combinations of facet descriptions, with flow-aware next/previous
lookups and query-by-example on top. Everything runs offline against the
bundled mock providers; live providers plug in through a generic HTTP
contract.
"""

__version__ = "0.1.0"
