"""HTTP client for LLM definitions and definition-text embeddings.

Speaks the common chat-completions / embeddings JSON shapes. Every response
is cached on disk (one JSON file per key), requests pass through a sliding
window rate gate, and 429/5xx answers are retried with exponential backoff.
"""

from __future__ import annotations

import collections
import enum
import hashlib
import json
import logging
import os
import tempfile
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import requests

from .errors import ConfigError, ProviderError, TransportError
from .ingest import DefinitionRecord, SourceId, SourceKind

log = logging.getLogger(__name__)


class PromptType(enum.IntEnum):
    TYPE1 = 1
    TYPE2 = 2


PROMPTS = {
    PromptType.TYPE1: "What is the meaning of this word?",
    PromptType.TYPE2: "Define this word.",
}


def render_prompt(word, prompt_type):
    return f"{PROMPTS[PromptType(prompt_type)]} {word}"


@dataclass
class ClientConfig:
    base_url: str
    model_name: str
    api_key_env: str = "OPENAI_API_KEY"
    prompt_type: int = 1
    requests_per_minute: int = 60
    max_retries: int = 3
    cache_dir: str = ".defalign-cache"
    backoff_base: float = 1.0
    timeout: float = 60.0
    batch_size: int = 64
    max_in_flight: int = 1
    chat_path: str = "/chat/completions"
    embed_path: str = "/embeddings"
    source_name: str | None = None
    extra_body: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.requests_per_minute < 1:
            raise ConfigError("requests_per_minute must be positive")
        if self.max_retries < 0:
            raise ConfigError("max_retries must be >= 0")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be positive")
        try:
            self.prompt_type = int(PromptType(int(self.prompt_type)))
        except ValueError:
            raise ConfigError(f"prompt type must be 1 or 2, got {self.prompt_type!r}") from None

    def api_key(self):
        key = os.environ.get(self.api_key_env)
        if not key:
            raise ConfigError(f"environment variable {self.api_key_env} is not set")
        return key

    @property
    def source(self):
        name = self.source_name or f"{self.model_name}-{self.prompt_type}"
        return SourceId(name, SourceKind.GENERATED, self.prompt_type)


class RateGate:
    """Never grants more than ``rpm`` permissions in any 60 s window.

    ``acquire`` blocks (via ``sleep``) until its slot and returns the grant
    time on ``clock``. Both are injectable for simulated-time tests.
    """

    window = 60.0

    def __init__(self, rpm, clock=time.monotonic, sleep=time.sleep):
        if rpm < 1:
            raise ConfigError("rpm must be positive")
        self.rpm = rpm
        self.clock = clock
        self.sleep = sleep
        self._grants = collections.deque(maxlen=rpm)
        self._lock = threading.Lock()

    def acquire(self):
        with self._lock:
            now = self.clock()
            if len(self._grants) < self.rpm:
                grant = now
            else:
                grant = max(now, self._grants[0] + self.window)
            if self._grants and grant < self._grants[-1]:
                grant = self._grants[-1]
            self._grants.append(grant)
        wait = grant - now
        if wait > 0:
            self.sleep(wait)
        return grant


def _digest(obj):
    return hashlib.sha256(json.dumps(obj, sort_keys=True, ensure_ascii=False).encode()).hexdigest()


class ResponseCache:
    """One JSON file per key under ``root/<kind>/``; writes are atomic."""

    def __init__(self, root):
        self.root = Path(root)

    def path(self, kind, key):
        return self.root / kind / f"{_digest(key)}.json"

    def get(self, kind, key):
        p = self.path(kind, key)
        try:
            with open(p, encoding="utf-8") as fh:
                return json.load(fh)
        except FileNotFoundError:
            return None

    def put(self, kind, key, payload):
        p = self.path(kind, key)
        p.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=p.parent, prefix=".tmp-", suffix=".json")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                json.dump(payload, fh, sort_keys=True, ensure_ascii=False, indent=1)
            os.replace(tmp, p)
        except BaseException:
            try:
                os.unlink(tmp)
            except FileNotFoundError:
                pass
            raise
        return p


@dataclass
class EmbedRequest:
    texts: list[str]
    space_name: str

    def __post_init__(self):
        if any(not t for t in self.texts):
            raise ConfigError("embedding request contains an empty string")


_RETRY_STATUS = frozenset({429}) | frozenset(range(500, 600))


class Client:
    """Stateful client: one session, one rate gate, one cache."""

    def __init__(self, config, session=None, gate=None, sleep=time.sleep):
        self.config = config
        self.session = session or requests.Session()
        self.gate = gate or RateGate(config.requests_per_minute)
        self.cache = ResponseCache(config.cache_dir)
        self.sleep = sleep
        self.network_calls = 0
        self._count_lock = threading.Lock()

    def _url(self, path):
        return self.config.base_url.rstrip("/") + path

    def _post(self, path, body):
        headers = {"Authorization": f"Bearer {self.config.api_key()}"}
        attempts = self.config.max_retries + 1
        last = None
        for attempt in range(attempts):
            self.gate.acquire()
            with self._count_lock:
                self.network_calls += 1
            try:
                resp = self.session.post(self._url(path), json=body, headers=headers,
                                         timeout=self.config.timeout)
            except (requests.ConnectionError, requests.Timeout) as exc:
                last = TransportError(f"{path}: {exc}", attempts=attempt + 1)
            else:
                if resp.status_code == 200:
                    try:
                        return resp.json()
                    except ValueError:
                        raise ProviderError(f"{path}: response is not JSON") from None
                if resp.status_code not in _RETRY_STATUS:
                    raise TransportError(f"{path}: HTTP {resp.status_code}",
                                         status=resp.status_code, attempts=attempt + 1)
                last = TransportError(f"{path}: HTTP {resp.status_code}",
                                      status=resp.status_code, attempts=attempt + 1)
            if attempt + 1 < attempts:
                delay = self.config.backoff_base * 2 ** attempt
                log.warning("%s; retry %d/%d in %.1fs", last, attempt + 1,
                            self.config.max_retries, delay)
                self.sleep(delay)
        raise TransportError(f"{last} (gave up after {attempts} attempts)",
                             status=last.status, attempts=attempts)

    def chat_body(self, word):
        return {
            **self.config.extra_body,
            "model": self.config.model_name,
            "messages": [{"role": "user",
                          "content": render_prompt(word, self.config.prompt_type)}],
        }

    def fetch_definition(self, word):
        word = word.strip()
        if not word:
            raise ConfigError("empty word")
        cfg = self.config
        key = {"model": cfg.model_name, "prompt_type": cfg.prompt_type, "word": word}
        hit = self.cache.get("chat", key)
        if hit is None:
            body = self.chat_body(word)
            response = self._post(cfg.chat_path, body)
            hit = {
                "key": key,
                "request": body,
                "response": response,
                "timestamp": time.time(),
                # sampling parameters are whatever the provider defaults to
                "sampling": {k: body.get(k, "provider-default")
                             for k in ("temperature", "top_p", "system")},
            }
            _chat_text(hit["response"])
            self.cache.put("chat", key, hit)
        return DefinitionRecord(word, cfg.source, _chat_text(hit["response"]))

    def fetch_many(self, words):
        workers = max(1, self.config.max_in_flight)
        if workers == 1:
            return [self.fetch_definition(w) for w in words]
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(self.fetch_definition, words))

    def embed_texts(self, req):
        """Vectors for ``req.texts`` in order; uncached texts go out in batches."""
        cfg = self.config
        keys = [{"model": cfg.model_name, "text": t} for t in req.texts]
        out = [None] * len(keys)
        todo = {}
        for i, k in enumerate(keys):
            hit = self.cache.get("embed", k)
            if hit is not None:
                out[i] = hit["vector"]
            else:
                todo.setdefault(req.texts[i], []).append(i)
        pending = list(todo)
        for start in range(0, len(pending), cfg.batch_size):
            batch = pending[start:start + cfg.batch_size]
            body = {**cfg.extra_body, "model": cfg.model_name, "input": batch}
            vectors = _embedding_vectors(self._post(cfg.embed_path, body), len(batch))
            for text, vec in zip(batch, vectors):
                self.cache.put("embed", {"model": cfg.model_name, "text": text},
                               {"model": cfg.model_name, "text": text, "vector": vec})
                for i in todo[text]:
                    out[i] = vec
        dims = {len(v) for v in out}
        if len(dims) > 1:
            raise ProviderError(f"{req.space_name}: inconsistent embedding dimensions {sorted(dims)}")
        return out


def _chat_text(response):
    try:
        text = response["choices"][0]["message"]["content"]
    except (KeyError, IndexError, TypeError):
        raise ProviderError("chat response lacks choices[0].message.content") from None
    if not isinstance(text, str) or not text.strip():
        raise ProviderError("chat response content is empty")
    return text


def _embedding_vectors(response, expected):
    try:
        data = sorted(response["data"], key=lambda d: d.get("index", 0))
        vectors = [[float(x) for x in d["embedding"]] for d in data]
    except (KeyError, TypeError, ValueError):
        raise ProviderError("embedding response lacks data[].embedding") from None
    if len(vectors) != expected:
        raise ProviderError(f"asked for {expected} embeddings, got {len(vectors)}")
    if len({len(v) for v in vectors}) > 1:
        raise ProviderError("inconsistent embedding dimensions within a batch")
    return vectors


def fetch_definition(word, config, client=None):
    return (client or Client(config)).fetch_definition(word)


def embed_texts(req, config, client=None):
    return (client or Client(config)).embed_texts(req)


def config_snapshot(config):
    """Config as a plain dict, safe to write to a manifest (no secrets)."""
    return asdict(config)
