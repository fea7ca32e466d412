"""Text generation and embedding providers.

The deterministic defaults (token-hash embedder, scripted chat) make the whole
engine reproducible offline; remote providers cover production use. The
scripted chat provider matches on marker lines: a prompt matches a table key
when one of its lines, stripped of surrounding whitespace, equals the key.
"""

from __future__ import annotations

import json
import os
import re
import threading
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, ProviderTransportError

DEFAULT_DIM = 256

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF

_TOKEN_SPLIT = re.compile(r"[^a-z0-9]+")


def fnv1a64(data: bytes) -> int:
    """64-bit FNV-1a over raw bytes."""
    h = _FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * _FNV_PRIME) & _MASK64
    return h


def tokenize(text: str) -> list[str]:
    return [t for t in _TOKEN_SPLIT.split(text.lower()) if t]


@dataclass
class ChatExchange:
    """One request to a chat provider: a system preamble plus alternating turns."""

    system: str
    messages: list[tuple[str, str]]
    deterministic: bool = True

    def __post_init__(self) -> None:
        expected = "user"
        for role, _ in self.messages:
            if role != expected:
                raise ValueError(f"roles must alternate starting with user, got '{role}'")
            expected = "assistant" if expected == "user" else "user"

    @classmethod
    def single(cls, system: str, prompt: str) -> "ChatExchange":
        return cls(system=system, messages=[("user", prompt)])

    def all_text(self) -> str:
        return "\n".join([self.system] + [content for _, content in self.messages])


class EmbeddingCache:
    """Exact-text embedding cache, safe for concurrent readers and writers."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._data: dict[str, np.ndarray] = {}

    def get_or_compute(self, text: str, compute) -> np.ndarray:
        with self._lock:
            hit = self._data.get(text)
        if hit is not None:
            return hit
        vec = compute(text)
        with self._lock:
            self._data[text] = vec
        return vec

    def __len__(self) -> int:
        with self._lock:
            return len(self._data)


class HashedEmbedder:
    """Deterministic bag-of-tokens embedder.

    Tokens are lowercased alphanumeric runs; each token lands in one of ``dim``
    buckets via 64-bit FNV-1a mod dim; the count vector is L2-normalized.
    Token-less input embeds to the zero vector.
    """

    kind = "hashed_baseline"

    def __init__(self, dim: int = DEFAULT_DIM, cache: EmbeddingCache | None = None):
        if dim < 1:
            raise ConfigError("embedding dim must be >= 1")
        self.dim = dim
        self._cache = cache if cache is not None else EmbeddingCache()

    def bucket(self, token: str) -> int:
        return fnv1a64(token.encode("utf-8")) % self.dim

    def embed(self, text: str) -> np.ndarray:
        return self._cache.get_or_compute(text, self._embed)

    def _embed(self, text: str) -> np.ndarray:
        vec = np.zeros(self.dim, dtype=np.float64)
        tokens = tokenize(text)
        if not tokens:
            return vec
        for token in tokens:
            vec[self.bucket(token)] += 1.0
        vec /= np.linalg.norm(vec)
        return vec


def similarity(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity of two unit vectors; 0.0 when either is all-zero."""
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    if not a.any() or not b.any():
        return 0.0
    return float(np.dot(a, b))


@dataclass
class ScriptedChatProvider:
    """Total lookup table from marker lines to canned responses.

    Unmatched prompts return ``fallback`` rather than failing; every call is
    appended to ``calls`` so tests can audit prompt construction.
    """

    table: dict[str, str]
    fallback: str = ""
    calls: list[dict] = field(default_factory=list)

    kind = "scripted"

    def __post_init__(self) -> None:
        self._lock = threading.Lock()

    @classmethod
    def from_file(cls, path: str) -> "ScriptedChatProvider":
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
        return cls.from_dict(raw)

    @classmethod
    def from_dict(cls, raw: dict) -> "ScriptedChatProvider":
        table = {k: v for k, v in raw.items() if k != "__fallback__"}
        return cls(table=table, fallback=raw.get("__fallback__", ""))

    def chat(self, exchange: ChatExchange) -> str:
        matched = None
        for line in exchange.all_text().splitlines():
            key = line.strip()
            if key in self.table:
                matched = key
                break
        response = self.table[matched] if matched is not None else self.fallback
        with self._lock:
            self.calls.append({"marker": matched, "prompt": exchange.all_text(), "response": response})
        return response


class RemoteChatProvider:
    """POSTs the exchange to an HTTP endpoint; retries transport failures."""

    kind = "remote"

    def __init__(self, endpoint: str, api_key_env: str = "", model: str = "",
                 attempts: int = 3, backoff_base: float = 0.5, backoff_cap: float = 5.0):
        self.endpoint = endpoint
        self.api_key_env = api_key_env
        self.model = model
        self.attempts = attempts
        self.backoff_base = backoff_base
        self.backoff_cap = backoff_cap

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        if self.api_key_env:
            key = os.environ.get(self.api_key_env, "")
            if key:
                headers["Authorization"] = f"Bearer {key}"
        return headers

    def chat(self, exchange: ChatExchange) -> str:
        import httpx

        payload = {
            "system": exchange.system,
            "messages": [{"role": r, "content": c} for r, c in exchange.messages],
        }
        if self.model:
            payload["model"] = self.model
        last = None
        for attempt in range(1, self.attempts + 1):
            try:
                resp = httpx.post(self.endpoint, json=payload, headers=self._headers(), timeout=30.0)
                resp.raise_for_status()
                body = resp.json()
                return body["text"] if isinstance(body, dict) and "text" in body else str(body)
            except Exception as e:  # noqa: BLE001 - transport and protocol errors both retry
                last = e
                if attempt < self.attempts:
                    time.sleep(min(self.backoff_base * (2 ** (attempt - 1)), self.backoff_cap))
        raise ProviderTransportError(f"chat endpoint {self.endpoint} failed: {last}", attempts=self.attempts)


class RemoteEmbedder:
    """Fetches embeddings over HTTP; normalizes to unit length on arrival."""

    kind = "remote"

    def __init__(self, endpoint: str, api_key_env: str = "", dim: int = DEFAULT_DIM,
                 attempts: int = 3, backoff_base: float = 0.5, backoff_cap: float = 5.0,
                 cache: EmbeddingCache | None = None):
        self.endpoint = endpoint
        self.api_key_env = api_key_env
        self.dim = dim
        self.attempts = attempts
        self.backoff_base = backoff_base
        self.backoff_cap = backoff_cap
        self._cache = cache if cache is not None else EmbeddingCache()

    def embed(self, text: str) -> np.ndarray:
        return self._cache.get_or_compute(text, self._embed)

    def _embed(self, text: str) -> np.ndarray:
        import httpx

        headers = {"Content-Type": "application/json"}
        if self.api_key_env:
            key = os.environ.get(self.api_key_env, "")
            if key:
                headers["Authorization"] = f"Bearer {key}"
        last = None
        for attempt in range(1, self.attempts + 1):
            try:
                resp = httpx.post(self.endpoint, json={"text": text}, headers=headers, timeout=30.0)
                resp.raise_for_status()
                values = np.asarray(resp.json()["embedding"], dtype=np.float64)
                norm = np.linalg.norm(values)
                return values / norm if norm > 0 else values
            except Exception as e:  # noqa: BLE001
                last = e
                if attempt < self.attempts:
                    time.sleep(min(self.backoff_base * (2 ** (attempt - 1)), self.backoff_cap))
        raise ProviderTransportError(f"embedding endpoint {self.endpoint} failed: {last}", attempts=self.attempts)


def build_chat_provider(config: dict) -> ScriptedChatProvider | RemoteChatProvider:
    kind = config.get("kind", "scripted")
    if kind == "scripted":
        if "script" in config:
            return ScriptedChatProvider.from_file(config["script"])
        return ScriptedChatProvider(table=dict(config.get("table", {})), fallback=config.get("fallback", ""))
    if kind == "remote":
        if "endpoint" not in config:
            raise ConfigError("remote chat provider needs 'endpoint'")
        return RemoteChatProvider(
            endpoint=config["endpoint"],
            api_key_env=config.get("api_key_env", ""),
            model=config.get("model", ""),
        )
    raise ConfigError(f"unknown chat provider kind '{kind}'")


def build_embedder(config: dict) -> HashedEmbedder | RemoteEmbedder:
    kind = config.get("kind", "hashed_baseline")
    if kind == "hashed_baseline":
        return HashedEmbedder(dim=int(config.get("dim", DEFAULT_DIM)))
    if kind == "remote":
        if "endpoint" not in config:
            raise ConfigError("remote embedder needs 'endpoint'")
        return RemoteEmbedder(
            endpoint=config["endpoint"],
            api_key_env=config.get("api_key_env", ""),
            dim=int(config.get("dim", DEFAULT_DIM)),
        )
    raise ConfigError(f"unknown embedder kind '{kind}'")
