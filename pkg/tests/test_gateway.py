"""Model gateway: scripted determinism, truncation surfacing, profiles."""

from __future__ import annotations

import json

import httpx
import pytest

from covault.gateway import (
    BackendSpec,
    CompletionRequest,
    Gateway,
    GatewayError,
    HttpBackend,
    ModelProfile,
    ScenarioExhausted,
    ScriptedBackend,
)


@pytest.fixture
def scenario(tmp_path):
    steps = [
        {"key": {"depth": "know", "archetype": "Beatrice", "ordinal": 1},
         "response": "You've been circling grammar like someone discovering "
                     "it's not rules but movement.",
         "model_id": "scripted-v1", "note": "portrait-W20"},
        {"key": {"depth": "listen", "archetype": None, "ordinal": 1},
         "response": "steady reply"},
        {"key": {"depth": "know", "archetype": None, "ordinal": 1},
         "response": "deep reply", "model_id": "scripted-deep-v2"},
    ]
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps({"steps": steps}), "utf-8")
    return path


def test_scripted_step_is_byte_identical_across_runs(scenario):
    expected = ("You've been circling grammar like someone discovering "
                "it's not rules but movement.")
    for _ in range(2):
        backend = ScriptedBackend(scenario)
        got = backend.complete(CompletionRequest(
            messages=[("human", "portrait please")], depth="know",
            archetype="Beatrice"))
        assert got.text == expected
        assert got.model_id == "scripted-v1"
        assert got.truncated is False


def test_budget_one_forces_truncation_flag(scenario):
    backend = ScriptedBackend(scenario)
    got = backend.complete(CompletionRequest(
        messages=[("human", "hi")], depth="listen", budget=1))
    assert got.truncated is True
    assert got.output_tokens == 1


def test_replay_same_request_same_model_id(scenario):
    ids = set()
    for _ in range(2):
        backend = ScriptedBackend(scenario)
        got = backend.complete(CompletionRequest(
            messages=[("human", "hi")], depth="listen"))
        ids.add(got.model_id)
    assert ids == {"scripted-v1"}


def test_scenario_exhaustion_raises(scenario):
    backend = ScriptedBackend(scenario)
    backend.complete(CompletionRequest(messages=[("human", "hi")], depth="listen"))
    with pytest.raises(ScenarioExhausted):
        backend.complete(CompletionRequest(messages=[("human", "hi")], depth="listen"))


def test_register_profile_and_duplicate(scenario):
    gateway = Gateway()
    profile = ModelProfile.scripted("replay", scenario)
    assert gateway.register_profile(profile) == "replay"
    assert gateway.get_profile("replay") is profile
    with pytest.raises(GatewayError):
        gateway.register_profile(ModelProfile.scripted("replay", scenario))


def test_distinct_model_id_per_depth_is_reported(scenario):
    gateway = Gateway()
    profile = ModelProfile.scripted("replay", scenario)
    gateway.register_profile(profile)
    got = gateway.complete(CompletionRequest(
        messages=[("human", "weekly synthesis")], depth="know"), profile)
    assert got.model_id == "scripted-deep-v2"


def test_empty_messages_rejected():
    with pytest.raises(ValueError):
        CompletionRequest(messages=[], depth="listen")


def test_http_backend_parses_chat_completion():
    def handler(request: httpx.Request) -> httpx.Response:
        body = json.loads(request.content)
        assert body["model"] == "deep-model"
        assert body["messages"][0]["role"] == "human"
        return httpx.Response(200, json={
            "model": "deep-model-2026-05",
            "choices": [{"message": {"content": "hello there"},
                         "finish_reason": "stop"}],
            "usage": {"prompt_tokens": 4, "completion_tokens": 2},
        })

    spec = BackendSpec(kind="http", base_url="http://provider/v1/chat",
                       model="deep-model")
    backend = HttpBackend(spec, transport=httpx.MockTransport(handler))
    got = backend.complete(CompletionRequest(
        messages=[("human", "hi there friend")], depth="know"))
    assert got.text == "hello there"
    assert got.model_id == "deep-model-2026-05"
    assert got.truncated is False


def test_http_backend_surfaces_length_truncation():
    def handler(request: httpx.Request) -> httpx.Response:
        return httpx.Response(200, json={
            "model": "m", "choices": [{"message": {"content": "cut off mid"},
                                       "finish_reason": "length"}],
        })

    spec = BackendSpec(kind="http", base_url="http://provider/v1/chat", model="m")
    backend = HttpBackend(spec, transport=httpx.MockTransport(handler))
    got = backend.complete(CompletionRequest(messages=[("human", "hi")], depth="listen"))
    assert got.truncated is True


def test_http_backend_unreachable_raises_after_retry():
    calls = {"n": 0}

    def handler(request: httpx.Request) -> httpx.Response:
        calls["n"] += 1
        raise httpx.ConnectError("refused", request=request)

    spec = BackendSpec(kind="http", base_url="http://provider/v1/chat", model="m")
    backend = HttpBackend(spec, retries=1, transport=httpx.MockTransport(handler))
    with pytest.raises(GatewayError):
        backend.complete(CompletionRequest(messages=[("human", "hi")], depth="listen"))
    assert calls["n"] == 2
