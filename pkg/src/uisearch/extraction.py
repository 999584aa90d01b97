"""Prompt construction, model-output parsing, and the extraction loop.

The rendered prompt has exactly five XML-delimited sections, in a fixed
order: persona, task_instruction, feature_list, feature_definitions,
response_form. The model answers in YAML; a deterministic repair pass
strips fences, stray prose, tab indentation, and a truncated final line
before parsing. Parsing is tolerant (key aliases, shape coercion) and any
facet that comes back missing or empty marks the record degraded rather
than dropping it.
"""

from __future__ import annotations

import io
import re
import time
from dataclasses import dataclass, field

import yaml

from . import schema
from .errors import ExtractionError, InputError, ParseError, ProviderError
from .fingerprint import DigestStream
from .providers import (
    ImagePayload,
    MllmClient,
    MllmRequest,
    persist_transcript,
)
from .schema import (
    FACET_ORDER,
    FACET_SHAPES,
    CATEGORICAL_FACETS,
    FacetId,
    FacetShape,
    FacetValue,
    SemanticRecord,
    ValidationReport,
    VocabularySet,
    validate_record,
)

MAX_IMAGE_DIMENSION = 1536

SECTION_ORDER = (
    "persona",
    "task_instruction",
    "feature_list",
    "feature_definitions",
    "response_form",
)

DEFAULT_PERSONA = (
    "You are a mobile application design expert. You interpret mobile UI "
    "screenshots and identify their detailed characteristics: what the app "
    "does, who it serves, how the screen works, and how it looks."
)

DEFAULT_TASK_INSTRUCTION = (
    "Study the attached mobile UI screenshot. Read its visible text, identify "
    "the UI elements with their roles and positions, and work out how the "
    "elements relate to each other. Then describe the screen using every "
    "feature listed below, exactly once each."
)

_FACET_GUIDANCE: dict[FacetId, str] = {
    FacetId.APP_CATEGORY: "The type of application.",
    FacetId.APP_DESCRIPTION: "A brief description of the app's purpose, features, and functionality.",
    FacetId.SIMILAR_APPS: "Names of apps with similar functionality or design, each with a short reason.",
    FacetId.TARGET_USER: "Key-value pairs of primary user types and why the app suits them.",
    FacetId.SCREEN_CATEGORY: "The type of this screen.",
    FacetId.SCREEN_ROLE: "The specific purpose of this screen, as a short summary.",
    FacetId.NEXT_SCREEN: "The screen users most likely reach after completing the available actions; align it with the screen role you inferred.",
    FacetId.PREVIOUS_SCREEN: "The screen users most likely arrived from; align it with the screen role you inferred.",
    FacetId.UI_ELEMENTS: "Key-value pairs of element types present and the role each plays on this screen.",
    FacetId.ACTION_ITEMS: "Key-value pairs of interactive elements and the action each triggers.",
    FacetId.LAYOUT: "How elements are arranged on the screen.",
    FacetId.COLOR_SCHEME: "Key-value pairs naming the color scheme(s) in use and how each is applied.",
    FacetId.COLOR_PALETTE: (
        "First analyze the color distribution of the screen, then extract the "
        "primary and secondary colors plus the colors of major UI components. "
        "Output key-value pairs of component to color, with every color given "
        "as an HTML color name (for example dodgerblue, not a hex code)."
    ),
    FacetId.MOOD: "Key-value pairs of the emotional tone(s) conveyed and a short explanation of each.",
}


@dataclass(frozen=True)
class PromptConfig:
    """Overrides for the built-in prompt wording; None keeps the default."""

    persona: str | None = None
    task_instruction: str | None = None
    response_form: str | None = None


@dataclass(frozen=True)
class PromptBundle:
    persona: str
    task_instruction: str
    feature_list: tuple[FacetId, ...]
    feature_definitions: dict[FacetId, str]
    response_form: str


def _response_form_text() -> str:
    lines = [
        "Give the output format as YAML, and nothing else: no prose, no code fences.",
        "Use exactly these keys, in this order:",
        "",
    ]
    for facet in FACET_ORDER:
        shape = FACET_SHAPES[facet]
        if shape is FacetShape.TEXT:
            lines.append(f"{facet.value}: ...one-sentence description...")
        elif shape is FacetShape.TEXT_LIST:
            lines.append(f"{facet.value}:")
            lines.append("  - ...entry...")
        else:
            lines.append(f"{facet.value}:")
            lines.append("  ...key...: ...description...")
    return "\n".join(lines)


def build_prompt(vocab: VocabularySet, config: PromptConfig = PromptConfig()) -> PromptBundle:
    """Assemble the five-part prompt; categorical facets embed their full
    vocabulary so the model answers within the predefined categories."""
    definitions: dict[FacetId, str] = {}
    for facet in FACET_ORDER:
        text = _FACET_GUIDANCE[facet]
        section = CATEGORICAL_FACETS.get(facet)
        if section is not None:
            entries = ", ".join(vocab.section(section))
            text += f" Respond only with values from: {entries}."
        definitions[facet] = text
    return PromptBundle(
        persona=config.persona or DEFAULT_PERSONA,
        task_instruction=config.task_instruction or DEFAULT_TASK_INSTRUCTION,
        feature_list=FACET_ORDER,
        feature_definitions=definitions,
        response_form=config.response_form or _response_form_text(),
    )


def render_prompt(bundle: PromptBundle) -> str:
    """Render the five XML-delimited sections in canonical order."""
    feature_list = "\n".join(f.value for f in bundle.feature_list)
    feature_definitions = "\n".join(
        f"{facet.value}: {text}" for facet, text in bundle.feature_definitions.items()
    )
    bodies = {
        "persona": bundle.persona,
        "task_instruction": bundle.task_instruction,
        "feature_list": feature_list,
        "feature_definitions": feature_definitions,
        "response_form": bundle.response_form,
    }
    parts = [f"<{name}>\n{bodies[name]}\n</{name}>" for name in SECTION_ORDER]
    return "\n\n".join(parts)


# --- output repair and parsing -------------------------------------------

_FENCE = re.compile(r"^\s*```")


def _yamlish(line: str) -> bool:
    s = line.strip()
    return s.startswith("- ") or s in ("-", "?") or s.startswith("? ") or ":" in s


def _indented(line: str) -> bool:
    return line[:1] in (" ", "\t")


def repair_yaml(raw: str) -> str:
    """Deterministic, idempotent cleanup of model output.

    Pipeline: keep the first fenced block if any fences are present, drop
    leading and trailing lines that cannot be YAML (prose, or a truncated
    final fragment such as ``color_sch``), and rewrite tab indentation to
    spaces. May return the input unchanged.
    """
    lines = raw.splitlines()
    fence_rows = [i for i, line in enumerate(lines) if _FENCE.match(line)]
    if fence_rows:
        start = fence_rows[0] + 1
        end = fence_rows[1] if len(fence_rows) > 1 else len(lines)
        lines = [line for line in lines[start:end] if not _FENCE.match(line)]
    while lines and (not lines[0].strip() or not _yamlish(lines[0])):
        lines.pop(0)
    while lines and (not lines[-1].strip() or
                     (not _indented(lines[-1]) and not _yamlish(lines[-1]))):
        lines.pop()
    fixed = []
    for line in lines:
        i = 0
        while i < len(line) and line[i] in " \t":
            i += 1
        fixed.append(line[:i].replace("\t", "  ") + line[i:])
    return "\n".join(fixed)


_KEY_ALIASES = {f.value: f for f in FACET_ORDER}


def _normalize_key(key: object) -> str:
    return str(key).strip().lower().replace(" ", "_").replace("-", "_")


def _scalar_text(value: object) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, str):
        return value
    if isinstance(value, (list, tuple)):
        return "; ".join(_scalar_text(v) for v in value)
    if isinstance(value, dict):
        return "; ".join(f"{k}: {_scalar_text(v)}" for k, v in value.items())
    return str(value)


def _coerce_text_list(value: object) -> tuple[str, ...]:
    if value is None:
        return ()
    if isinstance(value, str):
        return (value,) if value.strip() else ()
    if isinstance(value, dict):
        return tuple(
            f"{k}: {_scalar_text(v)}" if _scalar_text(v) else str(k)
            for k, v in value.items()
        )
    if isinstance(value, (list, tuple)):
        out = []
        for item in value:
            text = _scalar_text(item)
            if text.strip():
                out.append(text)
        return tuple(out)
    return (_scalar_text(value),)


def _coerce_pairs(value: object) -> tuple[tuple[str, str], ...]:
    pairs: list[tuple[str, str]] = []

    def push(key: object, desc: object) -> None:
        k = str(key).strip()
        if k and k not in (p[0] for p in pairs):
            pairs.append((k, _scalar_text(desc)))

    if value is None:
        return ()
    if isinstance(value, dict):
        for k, v in value.items():
            push(k, v)
    elif isinstance(value, (list, tuple)):
        for item in value:
            if isinstance(item, dict):
                for k, v in item.items():
                    push(k, v)
            elif isinstance(item, (list, tuple)) and len(item) == 2:
                push(item[0], item[1])
            else:
                push(_scalar_text(item), "")
    else:
        push(_scalar_text(value), "")
    return tuple(pairs)


def parse_semantic_yaml(raw: str, vocab: VocabularySet) -> tuple[SemanticRecord, ValidationReport]:
    """Parse (after repair) a model answer into a record plus its validation.

    Facet keys match case-insensitively with space/underscore tolerance;
    values are coerced to the facet's declared shape. Missing or empty
    facets leave the record shape-complete but flagged degraded.
    """
    if not raw.strip():
        raise ParseError("empty response", raw_text=raw)
    repaired = repair_yaml(raw)
    try:
        doc = yaml.safe_load(repaired)
    except yaml.YAMLError as exc:
        raise ParseError(f"invalid YAML after repair: {exc}", raw_text=raw) from exc
    if not isinstance(doc, dict):
        raise ParseError("response is not a YAML mapping", raw_text=raw)

    by_facet: dict[FacetId, object] = {}
    source_note: str | None = None
    for key, value in doc.items():
        norm = _normalize_key(key)
        if norm == "source_note":
            source_note = _scalar_text(value) or None
            continue
        facet = _KEY_ALIASES.get(norm)
        if facet is not None and facet not in by_facet:
            by_facet[facet] = value

    facets: dict[FacetId, FacetValue] = {}
    missing: list[str] = []
    empty: list[str] = []
    for facet in FACET_ORDER:
        if facet not in by_facet:
            missing.append(facet.value)
            facets[facet] = FacetValue.empty(facet)
            continue
        raw_value = by_facet[facet]
        shape = FACET_SHAPES[facet]
        if shape is FacetShape.TEXT:
            value = FacetValue.text(facet, _scalar_text(raw_value))
        elif shape is FacetShape.TEXT_LIST:
            value = FacetValue.text_list(facet, _coerce_text_list(raw_value))
        else:
            value = FacetValue.keyed_list(facet, _coerce_pairs(raw_value))
        facets[facet] = value
        if value.is_empty:
            empty.append(facet.value)

    if missing or empty:
        problems = []
        if missing:
            problems.append("missing " + ", ".join(missing))
        if empty:
            problems.append("empty " + ", ".join(empty))
        note = f"{schema.DEGRADED_NOTE}: " + "; ".join(problems)
        if source_note:
            note += f" ({source_note})"
        source_note = note

    record = SemanticRecord(facets, source_note)
    return record, validate_record(record, vocab)


# --- extraction loop ------------------------------------------------------


@dataclass(frozen=True)
class ExtractionConfig:
    max_retries: int = 2
    temperature: float = 0.0
    max_output_tokens: int = 3000
    backoff_s: float = 0.5
    prompt: PromptConfig = field(default_factory=PromptConfig)
    transcript_dir: str | None = None
    transcript_label: str = "screen"


@dataclass(frozen=True)
class ExtractionOutcome:
    record: SemanticRecord
    raw_text: str
    attempts: int
    degraded: bool


def load_image(source: bytes | str, max_dimension: int = MAX_IMAGE_DIMENSION) -> ImagePayload:
    """Decode, bound to ``max_dimension`` on the longest side, re-encode PNG."""
    from PIL import Image

    data = source if isinstance(source, bytes) else open(source, "rb").read()
    try:
        image = Image.open(io.BytesIO(data))
        image.load()
    except Exception as exc:
        raise InputError(f"cannot decode image: {exc}") from exc
    if max(image.size) > max_dimension:
        scale = max_dimension / max(image.size)
        new_size = (max(1, round(image.size[0] * scale)), max(1, round(image.size[1] * scale)))
        image = image.resize(new_size, Image.LANCZOS)
    buffer = io.BytesIO()
    image.convert("RGB").save(buffer, format="PNG")
    return ImagePayload(data=buffer.getvalue(), media_type="png")


def _corrective_suffix(bundle: PromptBundle, reason: str) -> str:
    return (
        "\n\nYour previous reply could not be used "
        f"({reason}). Answer again and follow the response form exactly:\n"
        f"{bundle.response_form}"
    )


def extract_semantics(
    image: ImagePayload,
    client: MllmClient,
    vocab: VocabularySet,
    config: ExtractionConfig = ExtractionConfig(),
) -> ExtractionOutcome:
    """Run the prompt against the model with parse/validate retries.

    Returns the first outcome with no hard validation errors; otherwise the
    attempt with the fewest hard errors, marked degraded. Transport errors
    retry with exponential backoff and surface as ProviderError when
    exhausted; if every attempt is unparseable the last raw text rides on
    the ExtractionError.
    """
    bundle = build_prompt(vocab, config.prompt)
    base_prompt = render_prompt(bundle)
    attempts_total = config.max_retries + 1

    prompt = base_prompt
    last_raw = ""
    parsed_any = False
    best: tuple[int, SemanticRecord, str] | None = None  # (hard error count, record, raw)
    delay = config.backoff_s

    for attempt in range(1, attempts_total + 1):
        request = MllmRequest(
            prompt=prompt,
            image=image,
            temperature=config.temperature,
            max_output_tokens=config.max_output_tokens,
        )
        try:
            response = client.complete(request)
        except ProviderError:
            if attempt == attempts_total:
                raise
            if delay > 0:
                time.sleep(delay)
                delay *= 2
            continue
        last_raw = response.text
        if config.transcript_dir:
            persist_transcript(config.transcript_dir, config.transcript_label,
                               attempt, prompt, response.text)
        try:
            record, report = parse_semantic_yaml(response.text, vocab)
        except ParseError as exc:
            prompt = base_prompt + _corrective_suffix(bundle, f"parse failure: {exc}")
            continue
        parsed_any = True
        if report.is_valid:
            return ExtractionOutcome(record, response.text, attempt, record.is_degraded)
        if best is None or len(report.hard_errors) < best[0]:
            best = (len(report.hard_errors), record, response.text)
        prompt = base_prompt + _corrective_suffix(
            bundle, f"{len(report.hard_errors)} validation errors"
        )

    if not parsed_any:
        raise ExtractionError("no attempt produced parseable output", raw_text=last_raw)
    count, record, raw = best  # type: ignore[misc]
    note = f"{schema.DEGRADED_NOTE}: {count} hard validation errors"
    if record.source_note:
        note += f"; {record.source_note}"
    degraded_record = SemanticRecord(dict(record.facets), note)
    return ExtractionOutcome(degraded_record, raw, attempts_total, True)


# --- deterministic mock extractor ----------------------------------------

_USER_TYPES = ("students", "professionals", "parents", "travelers",
               "fitness beginners", "older adults", "casual users", "power users")
_ADJECTIVES = ("streamlined", "focused", "friendly", "detailed",
               "simple", "guided", "colorful", "structured")
_ACTIVITIES = ("browsing items", "tracking progress", "completing a purchase",
               "reading content", "managing settings", "messaging others",
               "planning a trip", "reviewing history")
_NAME_HEADS = ("Swift", "Nova", "Daily", "Clear", "Bright", "Pocket", "Easy", "Prime")
_NAME_TAILS = ("Pay", "Track", "Hub", "Flow", "Note", "Shop", "Fit", "Chat")
_PALETTE_SLOTS = ("primary", "secondary", "background", "accent", "highlight")


def mock_extract(image_digest: bytes, seed: int, vocab: VocabularySet) -> SemanticRecord:
    """Vocabulary-conformant record drawn deterministically from the digest.

    Identical (digest, seed) pairs produce byte-identical records in any
    process, which makes the offline pipeline reproducible end to end.
    """
    s = DigestStream(b"mock-extract", str(seed).encode(), image_digest)
    categories = s.sample(vocab.app_categories, s.randint(1, 2))
    screens = s.sample(vocab.screen_categories, s.randint(1, 2))
    adj = s.choice(_ADJECTIVES)
    activity = s.choice(_ACTIVITIES)

    def sentence(kind: str, topic: str) -> str:
        return f"A {s.choice(_ADJECTIVES)} {topic} {kind} for {s.choice(_ACTIVITIES)}."

    facets = {
        FacetId.APP_CATEGORY: FacetValue.text_list(FacetId.APP_CATEGORY, categories),
        FacetId.APP_DESCRIPTION: FacetValue.text(
            FacetId.APP_DESCRIPTION,
            f"A {adj} {categories[0]} app that helps {s.choice(_USER_TYPES)} with {activity}.",
        ),
        FacetId.SIMILAR_APPS: FacetValue.text_list(
            FacetId.SIMILAR_APPS,
            [f"{s.choice(_NAME_HEADS)}{s.choice(_NAME_TAILS)}: shares the {categories[0]} focus"
             for _ in range(s.randint(2, 3))],
        ),
        FacetId.TARGET_USER: FacetValue.keyed_list(
            FacetId.TARGET_USER,
            [(user, f"Benefits from {s.choice(_ACTIVITIES)} on the go.")
             for user in s.sample(_USER_TYPES, s.randint(1, 2))],
        ),
        FacetId.SCREEN_CATEGORY: FacetValue.text_list(FacetId.SCREEN_CATEGORY, screens),
        FacetId.SCREEN_ROLE: FacetValue.text(
            FacetId.SCREEN_ROLE, sentence("screen", screens[0]),
        ),
        FacetId.NEXT_SCREEN: FacetValue.text(
            FacetId.NEXT_SCREEN, sentence("screen", s.choice(vocab.screen_categories)),
        ),
        FacetId.PREVIOUS_SCREEN: FacetValue.text(
            FacetId.PREVIOUS_SCREEN, sentence("screen", s.choice(vocab.screen_categories)),
        ),
        FacetId.UI_ELEMENTS: FacetValue.keyed_list(
            FacetId.UI_ELEMENTS,
            [(el, f"Supports {s.choice(_ACTIVITIES)}.")
             for el in s.sample(vocab.ui_element_types, s.randint(2, 4))],
        ),
        FacetId.ACTION_ITEMS: FacetValue.keyed_list(
            FacetId.ACTION_ITEMS,
            [(el, f"Triggers {s.choice(_ACTIVITIES)}.")
             for el in s.sample(vocab.ui_element_types, s.randint(1, 2))],
        ),
        FacetId.LAYOUT: FacetValue.text_list(
            FacetId.LAYOUT, s.sample(vocab.layouts, s.randint(1, 2)),
        ),
        FacetId.COLOR_SCHEME: FacetValue.keyed_list(
            FacetId.COLOR_SCHEME,
            [(scheme, f"Applied across {s.choice(_ACTIVITIES)} views.")
             for scheme in s.sample(vocab.color_schemes, s.randint(1, 2))],
        ),
        FacetId.COLOR_PALETTE: FacetValue.keyed_list(
            FacetId.COLOR_PALETTE,
            [(slot, s.choice(vocab.html_color_names))
             for slot in s.sample(_PALETTE_SLOTS, s.randint(2, 3))],
        ),
        FacetId.MOOD: FacetValue.keyed_list(
            FacetId.MOOD,
            [(mood, f"A {s.choice(_ADJECTIVES)} feel that suits {s.choice(_ACTIVITIES)}.")
             for mood in s.sample(vocab.moods, s.randint(1, 2))],
        ),
    }
    return SemanticRecord(facets, source_note="mock extractor")
