"""Pluggable model providers: chat-with-image and text embedding.

Live adapters speak a generic OpenAI-compatible wire shape (``/chat/completions``
with an inline data-URL image, ``/embeddings`` with a batch of texts) so any
compatible endpoint can back them; nothing binds to a specific vendor. The
mock providers are the test/demo default: fully offline and deterministic
across processes and platforms.
"""

from __future__ import annotations

import base64
import json
import os
import time
from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol

import numpy as np

from .errors import InputError, ProviderError
from .fingerprint import DigestStream

SUPPORTED_MEDIA_TYPES = ("png", "jpeg", "webp")


@dataclass(frozen=True)
class ImagePayload:
    data: bytes
    media_type: str  # png | jpeg | webp

    def __post_init__(self) -> None:
        if not self.data:
            raise InputError("image payload is empty")
        if self.media_type not in SUPPORTED_MEDIA_TYPES:
            raise InputError(f"unsupported media type: {self.media_type}")


@dataclass(frozen=True)
class MllmRequest:
    prompt: str
    image: ImagePayload
    temperature: float = 0.0
    max_output_tokens: int = 3000


@dataclass(frozen=True)
class MllmResponse:
    text: str
    status: str = "ok"


class MllmClient(Protocol):
    """Chat-with-image contract: one prompt plus one image in, text out."""

    def complete(self, request: MllmRequest) -> MllmResponse: ...


class EmbeddingProvider(Protocol):
    """Text embedding contract. Vectors may come back unnormalized; the
    index layer renormalizes. ``tag`` identifies the model so stores can
    refuse mixed-provider writes."""

    @property
    def dimension(self) -> int: ...

    @property
    def tag(self) -> str: ...

    def embed(self, texts: Sequence[str]) -> list[np.ndarray]: ...


@dataclass(frozen=True)
class ProviderSettings:
    """Connection settings shared by the live adapters."""

    base_url: str
    model: str
    credential_env: str = "UISEARCH_API_KEY"
    timeout_s: float = 60.0
    parallelism: int = 4
    max_retries: int = 2

    def credential(self) -> str:
        value = os.environ.get(self.credential_env, "")
        if not value:
            raise ProviderError(f"credential variable {self.credential_env} is unset")
        return value

    @classmethod
    def from_env(cls, prefix: str) -> "ProviderSettings":
        """Read ``<PREFIX>_BASE_URL``, ``<PREFIX>_MODEL`` etc. from the environment.

        Unset fields fall back to the JSON file named by ``UISEARCH_CONFIG``
        (top-level keys ``mllm`` / ``embedding`` with the same field names),
        so deployments can keep one config file and override per run.
        """
        env = os.environ
        file_section: dict = {}
        config_path = env.get("UISEARCH_CONFIG")
        if config_path and Path(config_path).is_file():
            section_name = {"UISEARCH_MLLM": "mllm", "UISEARCH_EMBED": "embedding"}.get(prefix, "")
            try:
                file_section = json.loads(Path(config_path).read_text()).get(section_name, {})
            except (json.JSONDecodeError, OSError) as exc:
                raise ProviderError(f"cannot read config file {config_path}: {exc}") from exc

        def setting(env_suffix: str, file_key: str, default: str = "") -> str:
            return env.get(f"{prefix}_{env_suffix}") or str(file_section.get(file_key, default))

        base_url = setting("BASE_URL", "base_url")
        model = setting("MODEL", "model")
        if not base_url or not model:
            raise ProviderError(
                f"{prefix}_BASE_URL and {prefix}_MODEL must be set "
                "(environment or UISEARCH_CONFIG file)")
        return cls(
            base_url=base_url,
            model=model,
            credential_env=setting("CREDENTIAL_VAR", "credential_env", "UISEARCH_API_KEY"),
            timeout_s=float(setting("TIMEOUT_S", "timeout_s", "60")),
            parallelism=int(setting("PARALLELISM", "parallelism", "4")),
            max_retries=int(setting("MAX_RETRIES", "max_retries", "2")),
        )


def _post_json_with_retries(url: str, payload: dict, headers: dict,
                            timeout_s: float, max_retries: int) -> dict:
    import httpx

    delay = 0.5
    last_error: Exception | None = None
    for attempt in range(max_retries + 1):
        try:
            response = httpx.post(url, json=payload, headers=headers, timeout=timeout_s)
            if response.status_code >= 500:
                raise ProviderError(f"server error {response.status_code}")
            if response.status_code >= 400:
                raise ProviderError(f"request rejected ({response.status_code}): {response.text[:500]}")
            return response.json()
        except ProviderError as exc:
            if "rejected" in str(exc):
                raise  # 4xx will not improve on retry
            last_error = exc
        except (httpx.HTTPError, json.JSONDecodeError, ValueError) as exc:
            last_error = exc
        if attempt < max_retries:
            time.sleep(delay)
            delay *= 2
    raise ProviderError(f"transport failed after {max_retries + 1} attempts: {last_error}")


class HttpMllmClient:
    """Generic chat-with-image adapter (OpenAI-compatible wire shape)."""

    def __init__(self, settings: ProviderSettings):
        self.settings = settings

    def complete(self, request: MllmRequest) -> MllmResponse:
        s = self.settings
        data_url = (
            f"data:image/{request.image.media_type};base64,"
            + base64.b64encode(request.image.data).decode("ascii")
        )
        payload = {
            "model": s.model,
            "temperature": request.temperature,
            "max_tokens": request.max_output_tokens,
            "messages": [{
                "role": "user",
                "content": [
                    {"type": "text", "text": request.prompt},
                    {"type": "image_url", "image_url": {"url": data_url}},
                ],
            }],
        }
        headers = {"Authorization": f"Bearer {s.credential()}"}
        body = _post_json_with_retries(
            f"{s.base_url.rstrip('/')}/chat/completions", payload, headers,
            s.timeout_s, s.max_retries,
        )
        try:
            text = body["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise ProviderError(f"malformed completion response: {exc}") from exc
        return MllmResponse(text=text or "", status="ok")


class HttpEmbeddingProvider:
    """Generic texts-in-vectors-out adapter (OpenAI-compatible wire shape)."""

    def __init__(self, settings: ProviderSettings, dimension: int):
        self.settings = settings
        self._dimension = dimension

    @property
    def dimension(self) -> int:
        return self._dimension

    @property
    def tag(self) -> str:
        return f"http:{self.settings.model}:{self._dimension}"

    def embed(self, texts: Sequence[str]) -> list[np.ndarray]:
        s = self.settings
        headers = {"Authorization": f"Bearer {s.credential()}"}
        body = _post_json_with_retries(
            f"{s.base_url.rstrip('/')}/embeddings",
            {"model": s.model, "input": list(texts)},
            headers, s.timeout_s, s.max_retries,
        )
        try:
            rows = sorted(body["data"], key=lambda r: r["index"])
            vectors = [np.asarray(r["embedding"], dtype=np.float32) for r in rows]
        except (KeyError, TypeError) as exc:
            raise ProviderError(f"malformed embedding response: {exc}") from exc
        if len(vectors) != len(texts):
            raise ProviderError(f"expected {len(texts)} vectors, got {len(vectors)}")
        for v in vectors:
            if v.shape != (self._dimension,):
                raise ProviderError(f"vector dimension {v.shape} != declared {self._dimension}")
        return vectors


class MockEmbeddingProvider:
    """Deterministic offline embeddings: text -> seeded pseudorandom vector.

    Identical text always yields an identical vector, across processes and
    platforms, because components are drawn from a SHA-256 stream rather
    than a stateful RNG.
    """

    def __init__(self, dimension: int = 64, seed: int = 0):
        self._dimension = dimension
        self._seed = seed

    @property
    def dimension(self) -> int:
        return self._dimension

    @property
    def tag(self) -> str:
        return f"mock:{self._seed}:{self._dimension}"

    def embed(self, texts: Sequence[str]) -> list[np.ndarray]:
        return [self._one(t) for t in texts]

    def _one(self, text: str) -> np.ndarray:
        stream = DigestStream(b"mock-embed", str(self._seed).encode(), text.encode("utf-8"))
        raw = np.frombuffer(stream.take(4 * self._dimension), dtype="<u4")
        # map u32 -> (-1, 1); offset by 0.5 to avoid an exact zero vector
        return ((raw.astype(np.float64) + 0.5) / 2**31 - 1.0).astype(np.float32)


@dataclass
class MockMllmClient:
    """Offline stand-in for a multimodal model.

    By default it answers with the YAML serialization of a mock record
    derived from the image bytes, so the full parse/validate path is
    exercised. A scripted list of responses can be supplied instead to
    test retry behavior; ``None`` entries simulate transport failures.
    """

    vocab: object = None  # VocabularySet; late import avoids a cycle
    seed: int = 0
    scripted: list[str | None] = field(default_factory=list)
    calls: int = 0

    def complete(self, request: MllmRequest) -> MllmResponse:
        self.calls += 1
        if self.scripted:
            item = self.scripted.pop(0)
            if item is None:
                raise ProviderError("scripted transport failure")
            return MllmResponse(text=item)
        from . import extraction, schema

        vocab = self.vocab or schema.default_vocabulary()
        import hashlib

        digest = hashlib.sha256(request.image.data).digest()
        record = extraction.mock_extract(digest, self.seed, vocab)
        return MllmResponse(text=schema.serialize_record(record))


def persist_transcript(directory: str | Path, label: str, attempt: int,
                       prompt: str, response_text: str) -> None:
    """Write request/response text files for audit, one pair per attempt."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    (directory / f"{label}.attempt{attempt}.request.txt").write_text(prompt, encoding="utf-8")
    (directory / f"{label}.attempt{attempt}.response.txt").write_text(response_text, encoding="utf-8")
