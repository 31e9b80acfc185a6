"""Uniform completion interface over scripted and HTTP chat backends.

The scripted backend replays a scenario file and is the test substrate:
steps are keyed by (depth, archetype, ordinal) so prompt text can drift
without invalidating a recorded scenario. The HTTP backend speaks the
common chat-completion POST shape with auth taken from an environment
variable named by the profile.
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass, field
from pathlib import Path

import httpx

DEPTHS = ("listen", "notice", "know")

DEFAULT_BUDGETS = {"listen": 1024, "notice": 2048, "know": 4096}


class GatewayError(Exception):
    """Completion could not be produced (unreachable provider, dry scenario)."""


class ScenarioExhausted(GatewayError):
    """The scripted scenario has no step left for the requested key."""


@dataclass
class CompletionRequest:
    messages: list[tuple[str, str]]  # (role in {system, human, agent}, text)
    depth: str
    archetype: str | None = None
    budget: int | None = None

    def __post_init__(self):
        if not self.messages:
            raise ValueError("messages must be non-empty")
        if self.depth not in DEPTHS:
            raise ValueError(f"depth must be one of {DEPTHS}")
        if self.budget is None:
            self.budget = DEFAULT_BUDGETS[self.depth]
        if self.budget < 1:
            raise ValueError("budget must be >= 1")


@dataclass
class Completion:
    text: str
    model_id: str
    truncated: bool = False
    input_tokens: int = 0
    output_tokens: int = 0


@dataclass
class BackendSpec:
    """One depth's backend: scripted scenario or HTTP endpoint."""

    kind: str  # "scripted" | "http"
    scenario_path: str | None = None
    base_url: str | None = None
    model: str | None = None
    auth_env: str | None = None

    def __post_init__(self):
        if self.kind == "scripted" and not self.scenario_path:
            raise ValueError("scripted backend needs scenario_path")
        if self.kind == "http" and not (self.base_url and self.model):
            raise ValueError("http backend needs base_url and model")
        if self.kind not in ("scripted", "http"):
            raise ValueError(f"unknown backend kind {self.kind!r}")


@dataclass
class ModelProfile:
    name: str
    backends: dict[str, BackendSpec]
    record_model_id: bool = True

    def __post_init__(self):
        missing = [d for d in DEPTHS if d not in self.backends]
        if missing:
            raise ValueError(f"profile {self.name!r} missing depths: {missing}")

    @classmethod
    def scripted(cls, name: str, scenario_path: str | Path) -> "ModelProfile":
        spec = BackendSpec(kind="scripted", scenario_path=str(scenario_path))
        return cls(name=name, backends={d: spec for d in DEPTHS})


def _estimate_tokens(text: str) -> int:
    return len(text.split())


class ScriptedBackend:
    """Deterministic playback of a scenario's steps.

    A scenario is a JSON array of steps (or an object with a "steps" array):
    {"key": {"depth", "archetype", "ordinal"}, "response", "model_id",
    "truncated"}. Ordinals count calls per (depth, archetype) pair, starting
    at 1, and assignment is serialized so concurrent callers stay coherent.
    """

    def __init__(self, scenario_path: str | Path):
        self.path = Path(scenario_path)
        raw = json.loads(self.path.read_text("utf-8"))
        steps = raw["steps"] if isinstance(raw, dict) else raw
        self._steps: dict[tuple[str, str | None, int], dict] = {}
        for step in steps:
            key = step["key"]
            index = (key["depth"], key.get("archetype"), int(key["ordinal"]))
            if index in self._steps:
                raise ValueError(f"duplicate scenario step key {index}")
            self._steps[index] = step
        self._counters: dict[tuple[str, str | None], int] = {}
        self._lock = threading.Lock()

    def reset(self) -> None:
        with self._lock:
            self._counters.clear()

    def complete(self, request: CompletionRequest) -> Completion:
        with self._lock:
            counter_key = (request.depth, request.archetype)
            ordinal = self._counters.get(counter_key, 0) + 1
            self._counters[counter_key] = ordinal
        step = self._steps.get((request.depth, request.archetype, ordinal))
        if step is None:
            raise ScenarioExhausted(
                f"no scenario step for depth={request.depth} "
                f"archetype={request.archetype} ordinal={ordinal}")
        text = step["response"]
        truncated = bool(step.get("truncated", False))
        output_tokens = _estimate_tokens(text)
        if output_tokens >= request.budget:
            words = text.split()
            text = " ".join(words[: request.budget])
            truncated = True
            output_tokens = request.budget
        prompt = " ".join(t for _, t in request.messages)
        return Completion(
            text=text,
            model_id=step.get("model_id", "scripted-v1"),
            truncated=truncated,
            input_tokens=_estimate_tokens(prompt),
            output_tokens=output_tokens,
        )


class HttpBackend:
    """Chat-completion POST client with a single configurable retry."""

    def __init__(self, spec: BackendSpec, retries: int = 1,
                 transport: httpx.BaseTransport | None = None,
                 timeout: float = 60.0):
        self.spec = spec
        self.retries = max(0, retries)
        self._client = httpx.Client(transport=transport, timeout=timeout)

    def complete(self, request: CompletionRequest) -> Completion:
        headers = {}
        if self.spec.auth_env:
            token = os.environ.get(self.spec.auth_env)
            if token:
                headers["Authorization"] = f"Bearer {token}"
        body = {
            "model": self.spec.model,
            "max_tokens": request.budget,
            "messages": [
                {"role": "assistant" if role == "agent" else role, "content": text}
                for role, text in request.messages
            ],
        }
        last_error: Exception | None = None
        for _ in range(self.retries + 1):
            try:
                response = self._client.post(self.spec.base_url, json=body, headers=headers)
                response.raise_for_status()
                data = response.json()
                choice = data["choices"][0]
                text = choice["message"]["content"]
                finish = choice.get("finish_reason")
                usage = data.get("usage", {})
                output_tokens = int(usage.get("completion_tokens", _estimate_tokens(text)))
                truncated = finish in ("length", "max_tokens") or output_tokens >= request.budget
                return Completion(
                    text=text,
                    model_id=str(data.get("model", self.spec.model)),
                    truncated=truncated,
                    input_tokens=int(usage.get("prompt_tokens", 0)),
                    output_tokens=output_tokens,
                )
            except (httpx.HTTPError, KeyError, ValueError) as exc:
                last_error = exc
        raise GatewayError(f"provider unreachable: {last_error}")


class Gateway:
    """Profile registry plus the complete() entry point."""

    def __init__(self):
        self._profiles: dict[str, ModelProfile] = {}
        self._scripted: dict[str, ScriptedBackend] = {}
        self._http: dict[tuple, HttpBackend] = {}
        self._lock = threading.Lock()

    def register_profile(self, profile: ModelProfile) -> str:
        with self._lock:
            if profile.name in self._profiles:
                raise GatewayError(f"duplicate profile name {profile.name!r}")
            self._profiles[profile.name] = profile
        return profile.name

    def get_profile(self, name: str) -> ModelProfile:
        profile = self._profiles.get(name)
        if profile is None:
            raise GatewayError(f"unknown profile {name!r}")
        return profile

    def reset_scripted(self, profile: ModelProfile) -> None:
        """Rewind ordinal counters for every scripted backend of a profile."""
        for spec in profile.backends.values():
            if spec.kind == "scripted":
                self._scripted_backend(spec).reset()

    def _scripted_backend(self, spec: BackendSpec) -> ScriptedBackend:
        with self._lock:
            backend = self._scripted.get(spec.scenario_path)
            if backend is None:
                backend = ScriptedBackend(spec.scenario_path)
                self._scripted[spec.scenario_path] = backend
            return backend

    def _http_backend(self, spec: BackendSpec) -> HttpBackend:
        key = (spec.base_url, spec.model, spec.auth_env)
        with self._lock:
            backend = self._http.get(key)
            if backend is None:
                backend = HttpBackend(spec)
                self._http[key] = backend
            return backend

    def complete(self, request: CompletionRequest, profile: ModelProfile) -> Completion:
        spec = profile.backends.get(request.depth)
        if spec is None:
            raise GatewayError(f"profile {profile.name!r} has no backend for {request.depth}")
        if spec.kind == "scripted":
            completion = self._scripted_backend(spec).complete(request)
        else:
            completion = self._http_backend(spec).complete(request)
        if not profile.record_model_id:
            completion.model_id = ""
        return completion
