"""Per-stream payload schemas.

Validation is deliberately shallow: required fields with the right shapes,
closed enums where the stream demands one, and unknown fields always
preserved. An audit tool has to read imperfect vaults, so reads report
violations instead of refusing them; writes reject them up front.
"""

from __future__ import annotations

from typing import Any

DIMENSIONS = (
    "identity",
    "voice",
    "knowledge",
    "body",
    "relationships",
    "creative",
    "practice",
    "shadow",
)

SURFACES = ("cli", "api", "console", "scheduler")

INTERACTION_TYPES = ("chat", "journal", "skill_reset", "note")

ASSESSMENTS = ("improved", "regressed", "no_change", "insufficient_data")


class SchemaError(ValueError):
    """Payload does not satisfy its stream's schema."""


def _require(payload: dict, field: str, kinds: tuple[type, ...]) -> Any:
    if field not in payload:
        raise SchemaError(f"missing required field {field!r}")
    value = payload[field]
    if not isinstance(value, kinds):
        names = "/".join(k.__name__ for k in kinds)
        raise SchemaError(f"field {field!r} must be {names}, got {type(value).__name__}")
    return value


def _require_enum(payload: dict, field: str, allowed: tuple[str, ...]) -> str:
    value = _require(payload, field, (str,))
    if value not in allowed:
        raise SchemaError(f"field {field!r} must be one of {allowed}, got {value!r}")
    return value


def validate_archetype_log(payload: dict) -> None:
    _require(payload, "archetype", (str,))
    _require(payload, "interaction_id", (str,))
    _require_enum(payload, "surface", SURFACES)
    _require(payload, "success", (bool,))


def validate_partner_learnings(payload: dict) -> None:
    _require(payload, "text", (str,))
    _require_enum(payload, "dimension", DIMENSIONS)
    _require(payload, "source_interaction_id", (str,))


def validate_interactions(payload: dict) -> None:
    _require(payload, "interaction_id", (str,))
    kind = _require_enum(payload, "type", INTERACTION_TYPES)
    if kind == "chat":
        _require_enum(payload, "surface", SURFACES)
        _require(payload, "human_text", (str,))
        _require(payload, "agent_text", (str,))
        _require(payload, "depth", (str,))
        _require(payload, "truncated", (bool,))
    elif kind == "skill_reset":
        _require(payload, "skill_id", (str,))
        _require(payload, "run_id", (str,))


def validate_constitution_scores(payload: dict) -> None:
    _require(payload, "interaction_id", (str,))
    principle = _require(payload, "principle_id", (int,))
    if principle < 1:
        raise SchemaError("principle_id must be >= 1")
    score = _require(payload, "score", (int,))
    if isinstance(score, bool) or score not in (1, 2, 3, 4, 5):
        raise SchemaError(f"score must be an integer in 1..5, got {score!r}")
    _require(payload, "rationale", (str,))


def validate_skills(payload: dict) -> None:
    _require(payload, "skill_id", (str,))
    _require(payload, "prompt_text", (str,))
    count = _require(payload, "episode_count", (int,))
    if isinstance(count, bool) or count < 0:
        raise SchemaError("episode_count must be a non-negative integer")
    _require(payload, "metric_history", (list,))


def validate_improve_runs(payload: dict) -> None:
    _require(payload, "run_id", (str,))
    _require(payload, "skill_id", (str,))
    kind = _require_enum(payload, "kind", ("proposal", "applied", "validation"))
    if kind == "validation":
        _require_enum(payload, "assessment", ASSESSMENTS)
        _require(payload, "paired_samples", (int,))
        _require(payload, "delta", (int, float))


STREAM_VALIDATORS = {
    "archetype_log": validate_archetype_log,
    "partner_learnings": validate_partner_learnings,
    "interactions": validate_interactions,
    "constitution_scores": validate_constitution_scores,
    "skills": validate_skills,
    "improve_runs": validate_improve_runs,
}


def validate_payload(stream: str, payload: dict) -> None:
    """Raise SchemaError if payload violates the stream's schema."""
    if not isinstance(payload, dict):
        raise SchemaError("payload must be a mapping")
    validator = STREAM_VALIDATORS.get(stream)
    if validator is not None:
        validator(payload)
