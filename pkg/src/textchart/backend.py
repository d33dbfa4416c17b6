"""Completion backends: live HTTP service, fixture-replay mock, recorders.

Every pipeline stage demands a JSON response conforming to a per-stage
contract. Responses failing the contract are retried up to a bounded count,
then the stage fails with BackendFailure. The mock backend replays fixture
files keyed by a stable SHA-256 hash of the prompt, which makes the whole
pipeline a pure function of its inputs and the fixture pack.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
from dataclasses import dataclass
from pathlib import Path

import httpx
import jsonschema

from .errors import BackendFailure

DEFAULT_MAX_INPUT_CHARS = 48_000


@dataclass(frozen=True)
class BackendCapabilities:
    max_input_chars: int = DEFAULT_MAX_INPUT_CHARS


@dataclass(frozen=True)
class BackendConfig:
    """Configuration for the live completion service.

    The API key is read from the environment variable named by
    ``api_key_env`` at request time and never stored or traced.
    """

    url: str = "http://localhost:8080/v1/chat/completions"
    model: str = "gpt-4"
    api_key_env: str = "TEXTCHART_API_KEY"
    max_retries: int = 3
    temperature: float = 0.0
    timeout_s: float = 120.0
    max_input_chars: int = DEFAULT_MAX_INPUT_CHARS


class ResponseContractError(BackendFailure):
    """A response failed its JSON contract (retried before surfacing)."""


def prompt_hash(prompt: str) -> str:
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()


_FENCE_RE = re.compile(r"^```(?:json)?\s*\n(.*)\n```\s*$", re.DOTALL)


def parse_structured(text: str, contract: dict) -> dict:
    """Parse a (possibly fenced) JSON response and check it against a contract."""
    body = text.strip()
    fenced = _FENCE_RE.match(body)
    if fenced:
        body = fenced.group(1)
    try:
        doc = json.loads(body)
    except json.JSONDecodeError as exc:
        raise ResponseContractError(f"response is not JSON: {exc}")
    try:
        jsonschema.validate(doc, contract)
    except jsonschema.ValidationError as exc:
        raise ResponseContractError(f"response violates contract: {exc.message}")
    return doc


class MockBackend:
    """Replays fixture files: ``<fixture_dir>/<sha256(prompt)>.json``."""

    def __init__(self, fixture_dir: str | Path, max_input_chars: int = DEFAULT_MAX_INPUT_CHARS):
        self.fixture_dir = Path(fixture_dir)
        self.capabilities = BackendCapabilities(max_input_chars)

    def complete(self, prompt: str, response_contract: dict) -> str:
        h = prompt_hash(prompt)
        path = self.fixture_dir / f"{h}.json"
        if not path.exists():
            raise BackendFailure(f"no fixture for prompt hash {h} in {self.fixture_dir}")
        return path.read_text(encoding="utf-8")


class LiveBackend:
    """OpenAI-style chat-completions client over HTTP."""

    def __init__(self, config: BackendConfig | None = None, transport: httpx.BaseTransport | None = None):
        self.config = config or BackendConfig()
        self.capabilities = BackendCapabilities(self.config.max_input_chars)
        self._client = httpx.Client(timeout=self.config.timeout_s, transport=transport)

    def complete(self, prompt: str, response_contract: dict) -> str:
        headers = {"Content-Type": "application/json"}
        key = os.environ.get(self.config.api_key_env, "")
        if key:
            headers["Authorization"] = f"Bearer {key}"
        payload = {
            "model": self.config.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": self.config.temperature,
        }
        try:
            resp = self._client.post(self.config.url, json=payload, headers=headers)
            resp.raise_for_status()
            doc = resp.json()
            return doc["choices"][0]["message"]["content"]
        except (httpx.HTTPError, KeyError, IndexError, ValueError) as exc:
            raise BackendFailure(f"completion request failed: {exc}")

    def close(self) -> None:
        self._client.close()


class ScriptedBackend:
    """Returns authored responses in call order; used to build fixture packs."""

    def __init__(self, responses: list[str], max_input_chars: int = DEFAULT_MAX_INPUT_CHARS):
        self._queue = list(responses)
        self.capabilities = BackendCapabilities(max_input_chars)

    def complete(self, prompt: str, response_contract: dict) -> str:
        if not self._queue:
            raise BackendFailure("scripted backend exhausted")
        return self._queue.pop(0)


class RecordingBackend:
    """Proxies an inner backend and writes each exchange as a mock fixture."""

    def __init__(self, inner, out_dir: str | Path):
        self.inner = inner
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.capabilities = inner.capabilities

    def complete(self, prompt: str, response_contract: dict) -> str:
        response = self.inner.complete(prompt, response_contract)
        path = self.out_dir / f"{prompt_hash(prompt)}.json"
        path.write_text(response, encoding="utf-8")
        return response
