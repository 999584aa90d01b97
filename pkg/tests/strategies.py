"""Hypothesis strategies for fuzzing records and model-output text."""

from __future__ import annotations

from hypothesis import strategies as st

from uisearch.schema import (
    FACET_ORDER,
    FACET_SHAPES,
    FacetShape,
    FacetValue,
    SemanticRecord,
)

# Surrogates cannot survive UTF-8 files; everything else (controls, unicode
# punctuation, emoji) must round-trip through serialization.
_chars = st.characters(blacklist_categories=("Cs",))
texts = st.text(alphabet=_chars, max_size=40)
keys = (
    st.text(alphabet=_chars, min_size=1, max_size=20)
    .map(str.strip)
    .filter(bool)
)


@st.composite
def facet_values(draw, facet, clean_lists=False):
    shape = FACET_SHAPES[facet]
    if shape is FacetShape.TEXT:
        return FacetValue.text(facet, draw(texts))
    if shape is FacetShape.TEXT_LIST:
        entry = keys if clean_lists else texts
        return FacetValue.text_list(facet, draw(st.lists(entry, max_size=4)))
    pair_keys = draw(st.lists(keys, unique=True, max_size=4))
    return FacetValue.keyed_list(facet, [(k, draw(texts)) for k in pair_keys])


@st.composite
def semantic_records(draw, clean_lists=False):
    """clean_lists restricts list entries to non-blank text, the domain the
    tolerant model-output parser is total on."""
    facets = {facet: draw(facet_values(facet, clean_lists)) for facet in FACET_ORDER}
    note = draw(st.none() | texts)
    return SemanticRecord(facets, note)


# Text that exercises the repair pipeline: fences, tabs, colons, list dashes.
repair_fragments = st.lists(
    st.one_of(
        st.just("```"),
        st.just("```yaml"),
        st.just("\t"),
        st.just("- item"),
        st.just("key: value"),
        st.just("prose with no marker"),
        texts,
    ),
    max_size=8,
).map(lambda parts: "\n".join(parts))

raw_model_output = st.one_of(st.text(max_size=200), repair_fragments)
