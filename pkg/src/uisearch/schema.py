"""Semantic record model, categorical vocabularies, and validation.

Every screen is described by the same 14 facets, grouped in four levels
(application, screen, composition, visual design). Each facet has a fixed
value shape: a single text description, a list of texts, or an ordered list
of (key, description) pairs. This module is the single source of truth for
facet identifiers, shapes, serialization, and vocabulary-based validation.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path

import yaml

from .errors import InputError, ParseError, VocabularyError


class FacetId(str, Enum):
    """The closed set of facet identifiers, in canonical serialization order."""

    APP_CATEGORY = "app_category"
    APP_DESCRIPTION = "app_description"
    SIMILAR_APPS = "similar_apps"
    TARGET_USER = "target_user"
    SCREEN_CATEGORY = "screen_category"
    SCREEN_ROLE = "screen_role"
    NEXT_SCREEN = "next_screen"
    PREVIOUS_SCREEN = "previous_screen"
    UI_ELEMENTS = "ui_elements"
    ACTION_ITEMS = "action_items"
    LAYOUT = "layout"
    COLOR_SCHEME = "color_scheme"
    COLOR_PALETTE = "color_palette"
    MOOD = "mood"

    def __str__(self) -> str:  # keep log/error messages readable
        return self.value


FACET_ORDER: tuple[FacetId, ...] = tuple(FacetId)


class FacetShape(str, Enum):
    TEXT = "text"
    TEXT_LIST = "text_list"
    KEYED_LIST = "keyed_list"


FACET_SHAPES: dict[FacetId, FacetShape] = {
    FacetId.APP_CATEGORY: FacetShape.TEXT_LIST,
    FacetId.APP_DESCRIPTION: FacetShape.TEXT,
    FacetId.SIMILAR_APPS: FacetShape.TEXT_LIST,
    FacetId.TARGET_USER: FacetShape.KEYED_LIST,
    FacetId.SCREEN_CATEGORY: FacetShape.TEXT_LIST,
    FacetId.SCREEN_ROLE: FacetShape.TEXT,
    FacetId.NEXT_SCREEN: FacetShape.TEXT,
    FacetId.PREVIOUS_SCREEN: FacetShape.TEXT,
    FacetId.UI_ELEMENTS: FacetShape.KEYED_LIST,
    FacetId.ACTION_ITEMS: FacetShape.KEYED_LIST,
    FacetId.LAYOUT: FacetShape.TEXT_LIST,
    FacetId.COLOR_SCHEME: FacetShape.KEYED_LIST,
    FacetId.COLOR_PALETTE: FacetShape.KEYED_LIST,
    FacetId.MOOD: FacetShape.KEYED_LIST,
}

# Prefix that flags a record whose extraction partially failed. Degraded
# records stay shape-complete; the note records what went missing.
DEGRADED_NOTE = "degraded"

Pairs = tuple[tuple[str, str], ...]


@dataclass(frozen=True)
class FacetValue:
    """One facet's value; its shape must match the facet's declared shape.

    Use the ``text`` / ``text_list`` / ``keyed_list`` / ``empty`` constructors,
    which normalize input (tuple conversion, key trimming). Direct construction
    validates but does not normalize.
    """

    facet: FacetId
    value: str | tuple[str, ...] | Pairs

    def __post_init__(self) -> None:
        shape = FACET_SHAPES[self.facet]
        v = self.value
        if shape is FacetShape.TEXT:
            if not isinstance(v, str):
                raise InputError(f"{self.facet} expects a single text, got {type(v).__name__}")
            return
        if not isinstance(v, tuple):
            raise InputError(f"{self.facet} expects a tuple, got {type(v).__name__}")
        if shape is FacetShape.TEXT_LIST:
            if not all(isinstance(item, str) for item in v):
                raise InputError(f"{self.facet} expects a tuple of strings")
            return
        seen: set[str] = set()
        for pair in v:
            if not (isinstance(pair, tuple) and len(pair) == 2
                    and all(isinstance(p, str) for p in pair)):
                raise InputError(f"{self.facet} expects (key, description) pairs")
            key = pair[0]
            if not key or key != key.strip():
                raise InputError(f"{self.facet} keys must be non-empty and trimmed")
            if key in seen:
                raise InputError(f"{self.facet} has duplicate key: {key}")
            seen.add(key)

    @classmethod
    def text(cls, facet: FacetId, value: str) -> "FacetValue":
        return cls(facet, value)

    @classmethod
    def text_list(cls, facet: FacetId, items: Iterable[str]) -> "FacetValue":
        return cls(facet, tuple(str(i) for i in items))

    @classmethod
    def keyed_list(cls, facet: FacetId, pairs: Iterable[tuple[str, str]]) -> "FacetValue":
        trimmed = []
        for key, desc in pairs:
            trimmed.append((str(key).strip(), str(desc)))
        return cls(facet, tuple(trimmed))

    @classmethod
    def empty(cls, facet: FacetId) -> "FacetValue":
        if FACET_SHAPES[facet] is FacetShape.TEXT:
            return cls(facet, "")
        return cls(facet, ())

    @property
    def shape(self) -> FacetShape:
        return FACET_SHAPES[self.facet]

    @property
    def is_empty(self) -> bool:
        return self.value == "" or self.value == ()

    def as_text(self) -> str:
        assert isinstance(self.value, str)
        return self.value

    def as_items(self) -> tuple[str, ...]:
        assert isinstance(self.value, tuple)
        return self.value  # type: ignore[return-value]

    def as_pairs(self) -> Pairs:
        assert isinstance(self.value, tuple)
        return self.value  # type: ignore[return-value]


@dataclass(frozen=True)
class SemanticRecord:
    """The complete 14-facet description of one screen.

    All facets are always present; a facet that could not be extracted is
    empty and the record carries a ``degraded`` source note instead of a
    partial schema.
    """

    facets: Mapping[FacetId, FacetValue]
    source_note: str | None = None

    def __post_init__(self) -> None:
        ordered: dict[FacetId, FacetValue] = {}
        for facet in FACET_ORDER:
            if facet not in self.facets:
                raise InputError(f"record is missing facet: {facet}")
            value = self.facets[facet]
            if not isinstance(value, FacetValue) or value.facet is not facet:
                raise InputError(f"value under {facet} does not belong to that facet")
            ordered[facet] = value
        if len(self.facets) != len(FACET_ORDER):
            extras = set(self.facets) - set(FACET_ORDER)
            raise InputError(f"record has unknown facets: {sorted(str(e) for e in extras)}")
        object.__setattr__(self, "facets", ordered)

    @classmethod
    def empty(cls, source_note: str | None = None) -> "SemanticRecord":
        return cls({f: FacetValue.empty(f) for f in FACET_ORDER}, source_note)

    @property
    def is_degraded(self) -> bool:
        return bool(self.source_note) and self.source_note.lower().startswith(DEGRADED_NOTE)

    def get(self, facet: FacetId) -> FacetValue:
        return self.facets[facet]

    def replace_facet(self, value: FacetValue) -> "SemanticRecord":
        facets = dict(self.facets)
        facets[value.facet] = value
        return SemanticRecord(facets, self.source_note)


VOCABULARY_SECTIONS: tuple[str, ...] = (
    "app_categories",
    "screen_categories",
    "ui_element_types",
    "layouts",
    "moods",
    "color_schemes",
    "html_color_names",
)

# Facets whose values (list entries or pair keys) are checked against a
# vocabulary section. color_palette is absent on purpose: its descriptions
# are validated as HTML color names, which is a hard rule, and its keys are
# free-form element names.
CATEGORICAL_FACETS: dict[FacetId, str] = {
    FacetId.APP_CATEGORY: "app_categories",
    FacetId.SCREEN_CATEGORY: "screen_categories",
    FacetId.LAYOUT: "layouts",
    FacetId.UI_ELEMENTS: "ui_element_types",
    FacetId.MOOD: "moods",
    FacetId.COLOR_SCHEME: "color_schemes",
}


@dataclass(frozen=True)
class VocabularySet:
    """Categorical vocabularies; entries are lowercase and file-ordered."""

    app_categories: tuple[str, ...]
    screen_categories: tuple[str, ...]
    ui_element_types: tuple[str, ...]
    layouts: tuple[str, ...]
    moods: tuple[str, ...]
    color_schemes: tuple[str, ...]
    html_color_names: tuple[str, ...]

    def __post_init__(self) -> None:
        for name in VOCABULARY_SECTIONS:
            entries = getattr(self, name)
            if not entries:
                raise VocabularyError(f"section '{name}' is empty")
            if any(e != e.strip().lower() or not e for e in entries):
                raise VocabularyError(f"section '{name}' has non-normalized entries")
            if len(set(entries)) != len(entries):
                raise VocabularyError(f"section '{name}' has duplicate entries")

    def section(self, name: str) -> tuple[str, ...]:
        if name not in VOCABULARY_SECTIONS:
            raise VocabularyError(f"unknown section: {name}")
        return getattr(self, name)


def load_vocabulary(document: str) -> VocabularySet:
    """Parse a vocabulary document: ``[section]`` headers, one entry per line.

    Blank lines and ``#`` comments are ignored. Entries are lowercased; a
    duplicate after normalization, an unknown or missing section, or an empty
    section is a :class:`VocabularyError`.
    """
    sections: dict[str, list[str]] = {}
    current: list[str] | None = None
    current_name = ""
    for lineno, raw_line in enumerate(document.splitlines(), start=1):
        line = raw_line.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip().lower()
            if name not in VOCABULARY_SECTIONS:
                raise VocabularyError(f"unknown section: {name} (line {lineno})")
            if name in sections:
                raise VocabularyError(f"section '{name}' appears twice")
            current = sections.setdefault(name, [])
            current_name = name
            continue
        if current is None:
            raise VocabularyError(f"entry before any section header (line {lineno})")
        entry = line.lower()
        if entry in current:
            raise VocabularyError(f"duplicate: {entry} (section '{current_name}')")
        current.append(entry)

    for name in VOCABULARY_SECTIONS:
        if name not in sections:
            raise VocabularyError(f"missing section: {name}")
        if not sections[name]:
            raise VocabularyError(f"section '{name}' is empty")
    return VocabularySet(**{name: tuple(sections[name]) for name in VOCABULARY_SECTIONS})


def load_vocabulary_path(path: str | Path) -> VocabularySet:
    return load_vocabulary(Path(path).read_text(encoding="utf-8"))


_default_vocab: VocabularySet | None = None


def default_vocabulary() -> VocabularySet:
    """The bundled vocabulary set (cached)."""
    global _default_vocab
    if _default_vocab is None:
        text = resources.files("uisearch.data").joinpath("default_vocabulary.txt").read_text("utf-8")
        _default_vocab = load_vocabulary(text)
    return _default_vocab


# --- validation ---------------------------------------------------------


@dataclass(frozen=True)
class ValidationReport:
    hard_errors: tuple[tuple[FacetId, str], ...] = ()
    soft_warnings: tuple[tuple[FacetId, str, str | None], ...] = ()

    @property
    def is_valid(self) -> bool:
        return not self.hard_errors


def edit_distance(a: str, b: str) -> int:
    """Levenshtein distance, plain dynamic programming."""
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        for j, cb in enumerate(b, start=1):
            current.append(min(
                previous[j] + 1,
                current[j - 1] + 1,
                previous[j - 1] + (ca != cb),
            ))
        previous = current
    return previous[-1]


def suggest_coercion(value: str, entries: Sequence[str]) -> str:
    """Nearest vocabulary entry: case-insensitive exact match first, then
    minimal edit distance with lexicographic tie-break."""
    lowered = value.strip().lower()
    if lowered in entries:
        return lowered
    best = min(sorted(entries), key=lambda e: edit_distance(lowered, e))
    return best


def _color_key(description: str) -> str:
    return description.strip().lower().replace(" ", "")


def _categorical_values(value: FacetValue) -> list[str]:
    if value.shape is FacetShape.KEYED_LIST:
        return [key for key, _ in value.as_pairs()]
    # list entries may carry an explanation after a colon ("grid: photos ...");
    # only the leading label is categorical
    return [item.split(":", 1)[0] for item in value.as_items()]


def validate_record(record: SemanticRecord, vocab: VocabularySet) -> ValidationReport:
    """Check one record against the facet shape table and the vocabularies.

    Never raises: wrong shapes and invalid palette colors are hard errors,
    out-of-vocabulary categorical values are soft warnings carrying a
    deterministic coercion suggestion.
    """
    hard: list[tuple[FacetId, str]] = []
    soft: list[tuple[FacetId, str, str | None]] = []

    for facet in FACET_ORDER:
        value = record.facets.get(facet) if isinstance(record.facets, Mapping) else None
        if value is None:
            hard.append((facet, "facet missing"))
            continue
        try:
            FacetValue(facet, value.value)
        except (InputError, KeyError, TypeError, AttributeError) as exc:
            hard.append((facet, f"wrong shape: {exc}"))
            continue
        if value.facet is not facet:
            hard.append((facet, "value belongs to a different facet"))
            continue

        if facet is FacetId.COLOR_PALETTE:
            for key, desc in value.as_pairs():
                if _color_key(desc) not in vocab.html_color_names:
                    hard.append((facet, f"'{desc}' (for '{key}') is not an HTML color name"))
            continue

        section = CATEGORICAL_FACETS.get(facet)
        if section is not None:
            entries = vocab.section(section)
            for item in _categorical_values(value):
                stripped = item.strip()
                if stripped.lower() == "" or stripped in entries:
                    continue
                suggestion = suggest_coercion(stripped, entries)
                soft.append((facet, f"'{stripped}' not in {section}", suggestion))

        if value.shape is FacetShape.TEXT and value.is_empty and not record.is_degraded:
            soft.append((facet, "empty text on a record not marked degraded", None))

    return ValidationReport(tuple(hard), tuple(soft))


# --- serialization ------------------------------------------------------


def facet_to_plain(value: FacetValue) -> object:
    if value.shape is FacetShape.TEXT:
        return value.as_text()
    if value.shape is FacetShape.TEXT_LIST:
        return list(value.as_items())
    return {key: desc for key, desc in value.as_pairs()}


def serialize_record(record: SemanticRecord) -> str:
    """Canonical YAML: facet keys in declaration order, keyed lists as
    mappings, all scalars double-quoted so arbitrary text round-trips."""
    doc: dict[str, object] = {f.value: facet_to_plain(record.facets[f]) for f in FACET_ORDER}
    if record.source_note is not None:
        doc["source_note"] = record.source_note
    return yaml.safe_dump(
        doc,
        sort_keys=False,
        default_flow_style=False,
        allow_unicode=True,
        default_style='"',
        width=2_000_000_000,
    )


def plain_to_facet(facet: FacetId, raw: object) -> FacetValue:
    shape = FACET_SHAPES[facet]
    if shape is FacetShape.TEXT:
        if not isinstance(raw, str):
            raise ParseError(f"{facet}: expected text")
        return FacetValue.text(facet, raw)
    if shape is FacetShape.TEXT_LIST:
        if not isinstance(raw, list) or not all(isinstance(i, str) for i in raw):
            raise ParseError(f"{facet}: expected a sequence of strings")
        return FacetValue.text_list(facet, raw)
    if not isinstance(raw, dict):
        raise ParseError(f"{facet}: expected a mapping")
    pairs = []
    for key, desc in raw.items():
        if not isinstance(key, str) or not isinstance(desc, str):
            raise ParseError(f"{facet}: keys and descriptions must be strings")
        pairs.append((key, desc))
    return FacetValue.keyed_list(facet, pairs)


def parse_record(text: str) -> SemanticRecord:
    """Strict inverse of :func:`serialize_record`."""
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ParseError(f"invalid YAML: {exc}", raw_text=text) from exc
    if not isinstance(doc, dict):
        raise ParseError("document is not a mapping", raw_text=text)
    facets: dict[FacetId, FacetValue] = {}
    for facet in FACET_ORDER:
        if facet.value not in doc:
            raise ParseError(f"missing facet: {facet}", raw_text=text)
        facets[facet] = plain_to_facet(facet, doc[facet.value])
    known = {f.value for f in FACET_ORDER} | {"source_note"}
    unknown = set(doc) - known
    if unknown:
        raise ParseError(f"unknown keys: {sorted(unknown)}", raw_text=text)
    note = doc.get("source_note")
    if note is not None and not isinstance(note, str):
        raise ParseError("source_note must be text", raw_text=text)
    return SemanticRecord(facets, note)
