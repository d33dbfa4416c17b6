"""Backend tests: mock replay, fixture recording, contract parsing, retries,
and the live HTTP client against a stub transport."""

import json

import httpx
import pytest

from textchart.backend import (
    BackendConfig,
    LiveBackend,
    MockBackend,
    RecordingBackend,
    ResponseContractError,
    ScriptedBackend,
    parse_structured,
    prompt_hash,
)
from textchart.errors import BackendFailure

CONTRACT = {"type": "object", "required": ["x"], "properties": {"x": {"type": "integer"}}}


class TestParseStructured:
    def test_plain_json(self):
        assert parse_structured('{"x": 1}', CONTRACT) == {"x": 1}

    def test_fenced_json(self):
        assert parse_structured('```json\n{"x": 2}\n```', CONTRACT) == {"x": 2}

    def test_invalid_json(self):
        with pytest.raises(ResponseContractError):
            parse_structured("not json", CONTRACT)

    def test_contract_violation(self):
        with pytest.raises(ResponseContractError):
            parse_structured('{"x": "one"}', CONTRACT)


class TestMockBackend:
    def test_replay_keyed_by_prompt_hash(self, tmp_path):
        prompt = "what is x?"
        (tmp_path / f"{prompt_hash(prompt)}.json").write_text('{"x": 7}')
        backend = MockBackend(tmp_path)
        assert backend.complete(prompt, CONTRACT) == '{"x": 7}'
        assert backend.complete(prompt, CONTRACT) == '{"x": 7}'

    def test_missing_fixture_raises(self, tmp_path):
        with pytest.raises(BackendFailure) as err:
            MockBackend(tmp_path).complete("unknown prompt", CONTRACT)
        assert prompt_hash("unknown prompt") in str(err.value)


class TestRecordingBackend:
    def test_records_fixture_for_replay(self, tmp_path):
        scripted = ScriptedBackend(['{"x": 3}'])
        recorder = RecordingBackend(scripted, tmp_path)
        assert recorder.complete("p", CONTRACT) == '{"x": 3}'
        assert MockBackend(tmp_path).complete("p", CONTRACT) == '{"x": 3}'

    def test_scripted_exhaustion(self):
        backend = ScriptedBackend([])
        with pytest.raises(BackendFailure):
            backend.complete("p", CONTRACT)


class TestLiveBackend:
    def _backend(self, handler, **config):
        transport = httpx.MockTransport(handler)
        return LiveBackend(BackendConfig(url="http://llm.test/v1/chat/completions",
                                         **config), transport=transport)

    def test_request_shape_and_response(self, monkeypatch):
        seen = {}

        def handler(request):
            seen["json"] = json.loads(request.content)
            seen["auth"] = request.headers.get("authorization")
            return httpx.Response(200, json={
                "choices": [{"message": {"content": '{"x": 5}'}}]})

        monkeypatch.setenv("TEXTCHART_API_KEY", "sk-secret")
        backend = self._backend(handler, model="test-model", temperature=0.0)
        assert backend.complete("the prompt", CONTRACT) == '{"x": 5}'
        assert seen["json"]["model"] == "test-model"
        assert seen["json"]["messages"] == [{"role": "user", "content": "the prompt"}]
        assert seen["auth"] == "Bearer sk-secret"

    def test_http_error_becomes_backend_failure(self):
        def handler(request):
            return httpx.Response(500, text="boom")

        with pytest.raises(BackendFailure):
            self._backend(handler).complete("p", CONTRACT)

    def test_malformed_payload_becomes_backend_failure(self):
        def handler(request):
            return httpx.Response(200, json={"unexpected": True})

        with pytest.raises(BackendFailure):
            self._backend(handler).complete("p", CONTRACT)

    def test_no_key_sends_no_auth_header(self, monkeypatch):
        seen = {}

        def handler(request):
            seen["auth"] = request.headers.get("authorization")
            return httpx.Response(200, json={
                "choices": [{"message": {"content": "{}"}}]})

        monkeypatch.delenv("TEXTCHART_API_KEY", raising=False)
        self._backend(handler).complete("p", {"type": "object"})
        assert seen["auth"] is None
