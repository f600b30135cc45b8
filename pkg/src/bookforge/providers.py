"""Text-generation and embedding providers behind a retrying gateway.

Real providers speak a minimal JSON-over-HTTP contract with the credential
taken from a named environment variable. The deterministic mocks produce
schema-valid output for every prompt kind, keyed only on (seed, prompt), so
whole-pipeline runs are reproducible offline.
"""

from __future__ import annotations

import hashlib
import json
import os
import random
import re
import time
import unicodedata
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence

import numpy as np

from .errors import (
    AuthError,
    DimMismatch,
    ExhaustedRetries,
    ProviderError,
    ProviderTimeout,
    RateLimited,
    SchemaShape,
    TransientProviderError,
)

RETRYABLE_ERRORS = (RateLimited, ProviderTimeout, TransientProviderError)


@dataclass(frozen=True)
class GenerationRequest:
    prompt: str
    max_output_tokens: int = 2048
    temperature: float = 0.7
    stop_hints: Optional[tuple] = None

    def __post_init__(self):
        if not self.prompt:
            raise SchemaShape("GenerationRequest.prompt must be non-empty")
        if self.max_output_tokens < 1:
            raise SchemaShape("max_output_tokens must be >= 1")
        if self.temperature < 0:
            raise SchemaShape("temperature must be >= 0")


@dataclass(frozen=True)
class ProviderConfig:
    endpoint: str = "mock://local"
    model_name: str = "mock"
    auth_source: str = ""
    timeout: float = 60.0
    max_retries: int = 3
    backoff_base: float = 0.5
    parallelism: int = 4

    def __post_init__(self):
        if self.max_retries < 0 or self.max_retries > 10:
            raise SchemaShape("max_retries must be in [0, 10]")
        if self.parallelism < 1:
            raise SchemaShape("parallelism must be >= 1")


@dataclass(frozen=True, eq=False)
class EmbeddingVector:
    """L2-normalized embedding; cosine similarity is a plain dot product."""

    values: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim != 1:
            raise SchemaShape("embedding must be one-dimensional")
        if not np.all(np.isfinite(arr)):
            raise SchemaShape("embedding contains non-finite values")
        object.__setattr__(self, "values", arr)

    @property
    def dim(self) -> int:
        return int(self.values.shape[0])

    @classmethod
    def normalized(cls, arr) -> "EmbeddingVector":
        arr = np.asarray(arr, dtype=np.float64)
        norm = float(np.linalg.norm(arr))
        if norm == 0.0:
            arr = arr.copy()
            arr[0] = 1.0
            norm = 1.0
        return cls(arr / norm)


def cosine(a: EmbeddingVector, b: EmbeddingVector) -> float:
    """Dot product of normalized vectors; symmetric, in [-1, 1]."""
    if a.dim != b.dim:
        raise DimMismatch(f"dims differ: {a.dim} vs {b.dim}")
    return float(np.dot(a.values, b.values))


# -- retrying gateway ----------------------------------------------------------


class RetryingClient:
    """Wraps a text provider and/or embedder with retry and backoff.

    Transient failures (rate limits, timeouts, 5xx) retry up to
    ``config.max_retries`` times with exponentially growing delays;
    auth failures never retry. ``last_attempts`` records the attempt
    count of the most recent call.
    """

    def __init__(
        self,
        provider=None,
        embedder=None,
        config: Optional[ProviderConfig] = None,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.provider = provider
        self.embedder = embedder
        self.config = config or ProviderConfig()
        self._sleep = sleep
        self.last_attempts = 0

    def _with_retries(self, fn):
        attempts = 0
        delay = self.config.backoff_base
        while True:
            attempts += 1
            try:
                result = fn()
            except RETRYABLE_ERRORS as err:
                if attempts > self.config.max_retries:
                    self.last_attempts = attempts
                    raise ExhaustedRetries(attempts, err) from err
                self._sleep(delay)
                delay *= 2
                continue
            self.last_attempts = attempts
            return result

    def generate(self, request: GenerationRequest) -> str:
        if self.provider is None:
            raise ProviderError("no text provider configured")
        text = self._with_retries(lambda: self.provider.complete(request))
        return unicodedata.normalize("NFC", text)

    def embed(self, texts: Sequence[str]) -> List[EmbeddingVector]:
        if self.embedder is None:
            raise ProviderError("no embedder configured")
        if not texts:
            raise SchemaShape("embed() requires at least one text")
        matrix = self._with_retries(lambda: self.embedder.embed_batch(texts))
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.ndim != 2 or matrix.shape[0] != len(texts):
            raise ProviderError(
                f"embedder returned shape {matrix.shape} for {len(texts)} texts"
            )
        return [EmbeddingVector.normalized(row) for row in matrix]


# -- HTTP providers -------------------------------------------------------------


def _resolve_credential(config: ProviderConfig) -> str:
    if not config.auth_source:
        raise AuthError("no auth_source configured")
    token = os.environ.get(config.auth_source, "")
    if not token:
        raise AuthError(f"environment variable {config.auth_source!r} is unset")
    return token


def _map_http_status(status: int, body: str):
    if status in (401, 403):
        raise AuthError(f"provider rejected credentials (HTTP {status})")
    if status == 429:
        raise RateLimited("provider throttled the request (HTTP 429)")
    if status >= 500:
        raise TransientProviderError(f"provider failure (HTTP {status}): {body[:200]}")
    if status >= 400:
        raise ProviderError(f"provider error (HTTP {status}): {body[:200]}")


class HttpTextProvider:
    """Minimal JSON contract: POST {model, prompt, max_tokens, temperature}
    and read {"text": ...} back. Credential resolved per request, before
    any network traffic."""

    def __init__(self, config: ProviderConfig):
        self.config = config

    def complete(self, request: GenerationRequest) -> str:
        import requests

        token = _resolve_credential(self.config)
        payload = {
            "model": self.config.model_name,
            "prompt": request.prompt,
            "max_tokens": request.max_output_tokens,
            "temperature": request.temperature,
        }
        if request.stop_hints:
            payload["stop"] = list(request.stop_hints)
        try:
            resp = requests.post(
                self.config.endpoint,
                json=payload,
                headers={"Authorization": f"Bearer {token}"},
                timeout=self.config.timeout,
            )
        except requests.Timeout as err:
            raise ProviderTimeout(str(err)) from err
        except requests.ConnectionError as err:
            raise TransientProviderError(str(err)) from err
        _map_http_status(resp.status_code, resp.text)
        body = resp.json()
        if "text" not in body:
            raise ProviderError("provider response missing 'text' field")
        return body["text"]


class HttpEmbeddingProvider:
    """POST {model, texts} and read {"embeddings": [[...], ...]} back."""

    def __init__(self, config: ProviderConfig):
        self.config = config

    def embed_batch(self, texts: Sequence[str]) -> np.ndarray:
        import requests

        token = _resolve_credential(self.config)
        try:
            resp = requests.post(
                self.config.endpoint,
                json={"model": self.config.model_name, "texts": list(texts)},
                headers={"Authorization": f"Bearer {token}"},
                timeout=self.config.timeout,
            )
        except requests.Timeout as err:
            raise ProviderTimeout(str(err)) from err
        except requests.ConnectionError as err:
            raise TransientProviderError(str(err)) from err
        _map_http_status(resp.status_code, resp.text)
        body = resp.json()
        if "embeddings" not in body:
            raise ProviderError("provider response missing 'embeddings' field")
        return np.asarray(body["embeddings"], dtype=np.float64)


# -- deterministic mocks ---------------------------------------------------------

_WORDS = (
    "framework principle resource incentive structure analysis model tradeoff "
    "mechanism equilibrium signal measure system boundary process method context "
    "pattern constraint decision outcome balance factor variable evidence "
    "application foundation perspective interaction strategy dynamic"
).split()

_TOPIC_RE = re.compile(r'Topic:"(.*?)"\.')
_AUDIENCE_RE = re.compile(r'Target audience: "(.*?)"\.')
_TOC_TOPIC_RE = re.compile(r"\*\*Topic:\*\* (.*)")
_TOC_AUDIENCE_RE = re.compile(r"\*\*Target Audience:\*\* (.*)")
_SECTION_TITLE_RE = re.compile(r"^- Section: (.*)$", re.MULTILINE)
_SUBSECTIONS_RE = re.compile(r"^- Subsections: (.*)$", re.MULTILINE)
_STYLE_AUDIENCE_RE = re.compile(r"^- Audience: (.*)$", re.MULTILINE)
_SUBJECT_RE = re.compile(r"specializing in the subject of (.*?)\. Your task")
_PREV_Q_RE = re.compile(r"Previous Question:\s*\n- (.*?)\s*\n")
_QUESTION_BLOCK_RE = re.compile(r"### Question ###\n(.*?)\n\n### Answer ###", re.DOTALL)


def _stable_rng(seed: int, prompt: str) -> random.Random:
    digest = hashlib.blake2b(
        f"{seed}\x00{prompt}".encode("utf-8"), digest_size=8
    ).digest()
    return random.Random(int.from_bytes(digest, "big"))


def _phrase(rng: random.Random, n: int) -> str:
    return " ".join(rng.choice(_WORDS) for _ in range(n))


def _sentence(rng: random.Random, topic_hint: str) -> str:
    body = _phrase(rng, rng.randint(6, 12))
    return f"The {body} shapes how {topic_hint} works in practice."


class MockProvider:
    """Seed-deterministic text provider.

    Output depends only on (seed, prompt): the prompt is classified by its
    template signature and a schema-valid completion is synthesized from
    fields parsed back out of the prompt. Every served prompt is recorded
    in ``calls`` so tests can assert on what was actually sent.
    """

    def __init__(self, seed: int = 0):
        self.seed = seed
        self.calls: List[str] = []

    @property
    def call_count(self) -> int:
        return len(self.calls)

    def complete(self, request: GenerationRequest) -> str:
        prompt = request.prompt
        self.calls.append(prompt)
        rng = _stable_rng(self.seed, prompt)
        if "preparatory material that will help you structure the book" in prompt:
            return self._topic_detail(rng, prompt)
        if "design a full book outline" in prompt:
            return self._toc(rng, prompt)
        if "cohesive book content for the following section" in prompt:
            return self._section(rng, prompt)
        if "**educational, self-contained questions**" in prompt:
            return self._question(rng, prompt)
        if "**educational, self-contained answer**" in prompt:
            return self._answer(rng, prompt)
        return _sentence(rng, "this request")

    # each generator parses its inputs back out of the rendered prompt so the
    # output is consistent with whatever the pipeline actually asked for

    def _topic_detail(self, rng: random.Random, prompt: str) -> str:
        topic = _TOPIC_RE.search(prompt).group(1)
        audience = _AUDIENCE_RE.search(prompt).group(1)
        n_sub = rng.randint(6, 8)
        n_q = rng.randint(6, 8)
        payload = {
            "description": (
                f"{topic} examined at the {audience} level: "
                + _sentence(rng, topic.lower())
            ),
            "subtopics": [
                f"{_phrase(rng, 2).title()} in {topic}" for _ in range(n_sub)
            ],
            "key_questions": [
                f"How does {_phrase(rng, 2)} influence {topic.lower()}?"
                for _ in range(n_q)
            ],
        }
        text = json.dumps(payload, indent=2)
        if rng.random() < 0.5:
            return f"Here is the preparatory material:\n```json\n{text}\n```\n"
        return text

    def _toc(self, rng: random.Random, prompt: str) -> str:
        topic = _TOC_TOPIC_RE.search(prompt).group(1).strip()
        outline = {
            "title": f"{topic}: {_phrase(rng, 2).title()} and {_phrase(rng, 1).title()}",
            "parts": [],
        }
        for pi in range(rng.randint(4, 6)):
            part = {
                "title": f"Part {pi + 1}: {_phrase(rng, 2).title()}",
                "description": _sentence(rng, topic.lower()),
                "chapters": [],
            }
            for ci in range(rng.randint(4, 6)):
                chapter = {
                    "title": f"Chapter {pi + 1}.{ci + 1}: {_phrase(rng, 2).title()}",
                    "description": _sentence(rng, topic.lower()),
                    "sections": [],
                }
                for si in range(rng.randint(3, 6)):
                    section = {
                        "title": f"{_phrase(rng, 2).title()} ({pi + 1}.{ci + 1}.{si + 1})"
                    }
                    if rng.random() < 0.5:
                        section["subsections"] = [
                            {"title": f"{_phrase(rng, 2).title()} [{k + 1}]"}
                            for k in range(rng.randint(2, 3))
                        ]
                    chapter["sections"].append(section)
                part["chapters"].append(chapter)
            outline["parts"].append(part)
        text = json.dumps(outline, indent=2)
        if rng.random() < 0.5:
            return f"```json\n{text}\n```"
        return text

    def _section(self, rng: random.Random, prompt: str) -> str:
        title = _SECTION_TITLE_RE.search(prompt).group(1).strip()
        audience = _STYLE_AUDIENCE_RE.search(prompt).group(1).strip()
        subs_match = _SUBSECTIONS_RE.search(prompt)
        subsections = []
        if subs_match and subs_match.group(1).strip() not in ("", "(none)"):
            subsections = [s.strip() for s in subs_match.group(1).split(",")]
        paragraphs = [
            f"{title} matters for {audience} readers because "
            + _phrase(rng, rng.randint(8, 14))
            + "."
        ]
        for sub in subsections:
            paragraphs.append(
                f"Consider {sub}: " + _sentence(rng, title.lower()) + " "
                + _sentence(rng, audience)
            )
        for _ in range(rng.randint(1, 3)):
            paragraphs.append(
                _sentence(rng, title.lower()) + " " + _sentence(rng, audience)
            )
        return "\n\n".join(paragraphs)

    def _question(self, rng: random.Random, prompt: str) -> str:
        section = _SECTION_TITLE_RE.search(prompt).group(1).strip()
        subject = _SUBJECT_RE.search(prompt).group(1)
        if "You are generating the **first question**" in prompt:
            return f"What is {_phrase(rng, 2)} as defined in {section}?"
        prev = _PREV_Q_RE.search(prompt).group(1)
        stem = rng.choice(
            (
                "Going beyond",
                "Applying the idea behind",
                "Contrasting with",
                "Extending",
            )
        )
        return (
            f"{stem} '{prev}': how would {_phrase(rng, 2)} change "
            f"{_phrase(rng, 2)} within {section}, in {subject}?"
        )

    def _answer(self, rng: random.Random, prompt: str) -> str:
        question = _QUESTION_BLOCK_RE.search(prompt).group(1).strip()
        section = _SECTION_TITLE_RE.search(prompt).group(1).strip()
        return (
            f"Based on {section}: {_sentence(rng, section.lower())} "
            f"This addresses '{question}' because {_phrase(rng, rng.randint(6, 10))}. "
            + _sentence(rng, "the answer")
        )


class MockEmbedder:
    """Deterministic embedding via signed hashing of byte trigrams.

    Texts sharing most trigrams land close in cosine similarity, so
    near-duplicates are measurably similar while unrelated texts are not.
    Hashing is a vectorized splitmix-style avalanche over 24-bit trigram
    codes; the result depends only on the text bytes.
    """

    def __init__(self, dim: int = 256):
        if dim < 1:
            raise SchemaShape("embedding dim must be >= 1")
        self.dim = dim

    @staticmethod
    def _mix(codes: np.ndarray) -> np.ndarray:
        z = codes + np.uint64(0x9E3779B97F4A7C15)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        return z ^ (z >> np.uint64(31))

    def _accumulate(self, text: str) -> np.ndarray:
        data = np.frombuffer(text.encode("utf-8"), dtype=np.uint8).astype(np.uint64)
        if data.size == 0:
            return np.zeros(self.dim, dtype=np.float64)
        if data.size < 3:
            codes = np.array(
                [int.from_bytes(text.encode("utf-8"), "big")], dtype=np.uint64
            )
        else:
            codes = (data[:-2] << np.uint64(16)) | (data[1:-1] << np.uint64(8)) | data[2:]
        mixed = self._mix(codes)
        idx = (mixed % np.uint64(self.dim)).astype(np.int64)
        signs = (((mixed >> np.uint64(17)) & np.uint64(1)).astype(np.float64) * 2.0) - 1.0
        return np.bincount(idx, weights=signs, minlength=self.dim).astype(np.float64)

    def embed_batch(self, texts: Sequence[str]) -> np.ndarray:
        out = np.zeros((len(texts), self.dim), dtype=np.float64)
        for i, text in enumerate(texts):
            out[i] = self._accumulate(text)
        return out

    def ngram_overlap(self, a: str, b: str) -> int:
        """Shared-trigram count; the independent yardstick for similarity
        ordering checks against the hashed vectors."""
        from collections import Counter

        def grams(s: str):
            d = s.encode("utf-8")
            return Counter(d[i : i + 3] for i in range(max(len(d) - 2, 0)))

        ca, cb = grams(a), grams(b)
        return sum(min(n, cb[g]) for g, n in ca.items())


def make_clients(
    mock: bool,
    seed: int,
    gen_config: Optional[ProviderConfig] = None,
    embed_config: Optional[ProviderConfig] = None,
    sleep: Callable[[float], None] = time.sleep,
):
    """Build (generation client, embedding client) for a job.

    With mock=True both providers are the deterministic mocks and the seed
    fully determines every output.
    """
    gen_config = gen_config or ProviderConfig()
    embed_config = embed_config or ProviderConfig()
    if mock:
        gen = RetryingClient(
            provider=MockProvider(seed=seed), config=gen_config, sleep=sleep
        )
        emb = RetryingClient(
            embedder=MockEmbedder(), config=embed_config, sleep=sleep
        )
    else:
        gen = RetryingClient(
            provider=HttpTextProvider(gen_config), config=gen_config, sleep=sleep
        )
        emb = RetryingClient(
            embedder=HttpEmbeddingProvider(embed_config),
            config=embed_config,
            sleep=sleep,
        )
    return gen, emb


__all__ = [
    "GenerationRequest",
    "ProviderConfig",
    "EmbeddingVector",
    "cosine",
    "RetryingClient",
    "HttpTextProvider",
    "HttpEmbeddingProvider",
    "MockProvider",
    "MockEmbedder",
    "make_clients",
    "RETRYABLE_ERRORS",
]
