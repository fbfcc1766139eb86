"""TTS, MT, and embedding clients.

The production services sit behind three small HTTP-JSON contracts; a
deterministic offline mock backs each one so every pipeline stage is
testable without network access. Clients are selected by URL: the "mock:"
scheme picks the built-in double, http(s) URLs pick the HTTP client.

HTTP contract (all POST, JSON body):
  TTS       {text, voice, sample_rate} -> {"audio_b64": <wav>} or raw audio/wav
  MT        {text, source_lang, target_lang} -> {"translation": <str>}
  Embedding {texts: [...]} -> {"vectors": [[...], ...]}
Credentials come from environment variables and are sent as bearer tokens.
"""

from __future__ import annotations

import base64
import hashlib
import json
import logging
import math
import os
import time
import urllib.error
import urllib.request
from functools import lru_cache
from typing import Protocol

import numpy as np

from .audio import AudioBuffer, decode_wav_bytes
from .errors import ClientError

log = logging.getLogger(__name__)

TTS_KEY_ENV = "CORVOX_TTS_API_KEY"
MT_KEY_ENV = "CORVOX_MT_API_KEY"
EMBED_KEY_ENV = "CORVOX_EMBED_API_KEY"

MOCK_SCHEME = "mock:"

# Mock TTS signal shape: one 60 ms sine burst per character at amplitude 0.3,
# starting immediately (synthetic audio characteristically has no onset
# silence). Frequency is a function of the codepoint plus a per-voice offset.
MOCK_BURST_MS = 60
MOCK_AMPLITUDE = 0.3
MOCK_BASE_HZ = 200
MOCK_HZ_PER_CODEPOINT = 10
MOCK_CODEPOINT_MOD = 600


class TtsClient(Protocol):
    def synthesize(self, text: str, voice: str, sample_rate: int) -> AudioBuffer: ...


class MtClient(Protocol):
    def translate(self, text: str, source_lang: str, target_lang: str) -> str: ...


class Embedder(Protocol):
    name: str

    def embed(self, texts: list[str]) -> list[list[float]]: ...


def _stable_hash(text: str, size: int = 8) -> int:
    return int.from_bytes(hashlib.blake2b(text.encode("utf-8"), digest_size=size).digest(), "big")


@lru_cache(maxsize=256)
def _voice_offset(voice: str) -> int:
    return _stable_hash(voice) % 40


class MockTtsClient:
    """Deterministic offline TTS double; output depends only on the request."""

    def synthesize(self, text: str, voice: str, sample_rate: int = 16000) -> AudioBuffer:
        if not text:
            raise ClientError("mock tts: text must be non-empty")
        if sample_rate <= 0:
            raise ClientError(f"mock tts: bad sample_rate {sample_rate}")
        burst_len = int(round(MOCK_BURST_MS * sample_rate / 1000))
        t = np.arange(burst_len) / sample_rate
        offset = _voice_offset(voice)
        freqs = np.array(
            [
                MOCK_BASE_HZ + MOCK_HZ_PER_CODEPOINT * (ord(ch) % MOCK_CODEPOINT_MOD) + offset
                for ch in text
            ],
            dtype=np.float64,
        )
        bursts = MOCK_AMPLITUDE * np.sin(2 * math.pi * freqs[:, None] * t[None, :])
        return AudioBuffer(bursts.reshape(-1), sample_rate)


class MockMtClient:
    """Echo translator: prefixes the text with the target language tag."""

    def translate(self, text: str, source_lang: str, target_lang: str) -> str:
        if not text:
            raise ClientError("mock mt: text must be non-empty")
        return f"[{target_lang.upper()}] {text}"


class HashedBagOfWordsEmbedder:
    """Sparse hashed bag-of-words vectors; deterministic and offline."""

    def __init__(self, dim: int = 512, name: str = "hashed-bow"):
        self.dim = dim
        self.name = name

    def embed(self, texts: list[str]) -> list[list[float]]:
        vectors = []
        for text in texts:
            vec = [0.0] * self.dim
            for token in text.split():
                vec[_stable_hash(token) % self.dim] += 1.0
            vectors.append(vec)
        return vectors


def _post(url: str, payload: dict, api_key_env: str, timeout: float):
    headers = {"Content-Type": "application/json"}
    key = os.environ.get(api_key_env, "")
    if key:
        headers["Authorization"] = f"Bearer {key}"
    request = urllib.request.Request(
        url, data=json.dumps(payload).encode("utf-8"), headers=headers, method="POST"
    )
    with urllib.request.urlopen(request, timeout=timeout) as response:
        return response.read(), response.headers.get("Content-Type", "")


def post_with_retry(
    url: str,
    payload: dict,
    api_key_env: str = "",
    retries: int = 3,
    backoff: float = 0.5,
    timeout: float = 30.0,
):
    """POST JSON with exponential backoff on transient failures.

    Client errors (HTTP 4xx) do not retry; everything else gets up to
    ``retries`` attempts with delays backoff * 2^attempt.
    """
    last: Exception | None = None
    for attempt in range(max(1, retries)):
        try:
            return _post(url, payload, api_key_env, timeout)
        except urllib.error.HTTPError as exc:
            if 400 <= exc.code < 500:
                raise ClientError(f"{url}: HTTP {exc.code} {exc.reason}") from exc
            last = exc
        except (urllib.error.URLError, OSError) as exc:
            last = exc
        if attempt + 1 < retries:
            time.sleep(backoff * 2**attempt)
    raise ClientError(f"{url}: failed after {retries} attempt(s): {last}") from last


class HttpTtsClient:
    def __init__(self, url: str, retries: int = 3, backoff: float = 0.5, timeout: float = 30.0):
        self.url = url
        self.retries = retries
        self.backoff = backoff
        self.timeout = timeout

    def synthesize(self, text: str, voice: str, sample_rate: int = 16000) -> AudioBuffer:
        body, content_type = post_with_retry(
            self.url,
            {"text": text, "voice": voice, "sample_rate": sample_rate},
            api_key_env=TTS_KEY_ENV,
            retries=self.retries,
            backoff=self.backoff,
            timeout=self.timeout,
        )
        if content_type.startswith("audio/wav"):
            wav_bytes = body
        else:
            try:
                wav_bytes = base64.b64decode(json.loads(body)["audio_b64"])
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                raise ClientError(f"{self.url}: malformed TTS response: {exc}") from exc
        return decode_wav_bytes(wav_bytes, origin=self.url)


class HttpMtClient:
    def __init__(self, url: str, retries: int = 3, backoff: float = 0.5, timeout: float = 30.0):
        self.url = url
        self.retries = retries
        self.backoff = backoff
        self.timeout = timeout

    def translate(self, text: str, source_lang: str, target_lang: str) -> str:
        body, _ = post_with_retry(
            self.url,
            {"text": text, "source_lang": source_lang, "target_lang": target_lang},
            api_key_env=MT_KEY_ENV,
            retries=self.retries,
            backoff=self.backoff,
            timeout=self.timeout,
        )
        try:
            translation = json.loads(body)["translation"]
        except (json.JSONDecodeError, KeyError) as exc:
            raise ClientError(f"{self.url}: malformed MT response: {exc}") from exc
        if not translation:
            raise ClientError(f"{self.url}: empty translation")
        return translation


class HttpEmbedder:
    def __init__(self, url: str, retries: int = 3, backoff: float = 0.5, timeout: float = 30.0):
        self.url = url
        self.name = url
        self.retries = retries
        self.backoff = backoff
        self.timeout = timeout

    def embed(self, texts: list[str]) -> list[list[float]]:
        body, _ = post_with_retry(
            self.url,
            {"texts": list(texts)},
            api_key_env=EMBED_KEY_ENV,
            retries=self.retries,
            backoff=self.backoff,
            timeout=self.timeout,
        )
        try:
            vectors = json.loads(body)["vectors"]
        except (json.JSONDecodeError, KeyError) as exc:
            raise ClientError(f"{self.url}: malformed embedding response: {exc}") from exc
        if len(vectors) != len(texts):
            raise ClientError(
                f"{self.url}: got {len(vectors)} vectors for {len(texts)} texts"
            )
        return vectors


def make_tts_client(url: str, retries: int = 3, backoff: float = 0.5) -> TtsClient:
    if url.startswith(MOCK_SCHEME):
        return MockTtsClient()
    if url.startswith(("http://", "https://")):
        return HttpTtsClient(url, retries=retries, backoff=backoff)
    raise ClientError(f"unsupported TTS client URL: {url!r}")


def make_mt_client(url: str, retries: int = 3, backoff: float = 0.5) -> MtClient:
    if url.startswith(MOCK_SCHEME):
        return MockMtClient()
    if url.startswith(("http://", "https://")):
        return HttpMtClient(url, retries=retries, backoff=backoff)
    raise ClientError(f"unsupported MT client URL: {url!r}")


def make_embedder(url: str, retries: int = 3, backoff: float = 0.5) -> Embedder:
    if url.startswith(MOCK_SCHEME):
        return HashedBagOfWordsEmbedder()
    if url.startswith(("http://", "https://")):
        return HttpEmbedder(url, retries=retries, backoff=backoff)
    raise ClientError(f"unsupported embedder URL: {url!r}")
