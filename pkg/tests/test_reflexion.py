"""Reflexion stack: scoring, improve guard, honest validator, meta log."""

from __future__ import annotations

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from covault.clock import FixedClock
from covault.gateway import Gateway, ModelProfile
from covault.reflexion import (
    ReflexionError,
    ReflexionStack,
    ResetBlocked,
    ScoringRejected,
)
from covault.vault import Vault


def make_stack(tmp_path, steps=None, start="2026-04-20T10:00:00Z"):
    vault = Vault(tmp_path / "vault", clock=FixedClock(start))
    vault.ensure_layout()
    gateway = Gateway()
    profile = None
    if steps is not None:
        scenario = tmp_path / "scenario.json"
        scenario.write_text(json.dumps({"steps": steps}), "utf-8")
        profile = ModelProfile.scripted("replay", scenario)
        gateway.register_profile(profile)
    stack = ReflexionStack(vault, gateway=gateway, profile=profile)
    stack.install_constitution()
    return stack


def scores_step(ordinal: int, score: int = 3, n: int = 10) -> dict:
    rows = [{"principle_id": i + 1, "score": score, "rationale": "steady"}
            for i in range(n)]
    return {"key": {"depth": "listen", "archetype": None, "ordinal": ordinal},
            "response": json.dumps(rows)}


def improve_step(ordinal: int, prompt="be sharper", reset=False) -> dict:
    return {"key": {"depth": "notice", "archetype": None, "ordinal": ordinal},
            "response": json.dumps({"prompt_text": prompt, "reset_history": reset})}


def test_all_threes_gives_ten_rows(tmp_path):
    stack = make_stack(tmp_path, steps=[scores_step(1)])
    constitution = stack.load_constitution()
    assert constitution.size == 10
    rows = stack.score_interaction("i-1", "human: hi\nagent: hello", constitution)
    assert len(rows) == 10
    assert all(r.score == 3 for r in rows)
    assert len(stack.vault.read_stream("constitution_scores")) == 10


def test_out_of_range_score_rejected_no_partial_rows(tmp_path):
    bad = [{"principle_id": i + 1, "score": 6 if i == 4 else 3, "rationale": ""}
           for i in range(10)]
    step = {"key": {"depth": "listen", "archetype": None, "ordinal": 1},
            "response": json.dumps(bad)}
    stack = make_stack(tmp_path, steps=[step])
    with pytest.raises(ScoringRejected):
        stack.score_interaction("i-1", "transcript", stack.load_constitution())
    # Unscored means zero rows, never a partial set.
    assert stack.vault.read_stream("constitution_scores") == []


def test_episode_score_mean_of_constant(tmp_path):
    stack = make_stack(tmp_path, steps=[scores_step(1)])
    stack.score_interaction("i-1", "t", stack.load_constitution())
    entry = stack.score_episode("ep-0001", ["i-1"])
    assert entry["score"] == 3.00


def test_episode_score_mean_of_two_interactions(tmp_path):
    steps = [scores_step(1, score=3), scores_step(2, score=4)]
    stack = make_stack(tmp_path, steps=steps)
    constitution = stack.load_constitution()
    stack.score_interaction("i-1", "t", constitution)
    stack.score_interaction("i-2", "t", constitution)
    entry = stack.score_episode("ep-0001", ["i-1", "i-2"])
    assert entry["score"] == 3.50


def test_empty_episode_rejected(tmp_path):
    stack = make_stack(tmp_path)
    with pytest.raises(ReflexionError):
        stack.score_episode("ep-0001", [])


def test_improve_with_no_episodes_errors(tmp_path):
    stack = make_stack(tmp_path, steps=[improve_step(1)])
    stack.create_skill("memory_capture", "capture the moment")
    with pytest.raises(ReflexionError):
        stack.run_improve("memory_capture")


def test_reset_revision_blocked_without_force(tmp_path):
    stack = make_stack(tmp_path, steps=[improve_step(1, reset=True)])
    stack.create_skill("memory_capture", "capture the moment")
    skill = stack.load_skill("memory_capture")
    skill.episode_count = 71
    stack._snapshot(skill)
    revision = stack.run_improve("memory_capture")
    assert revision.blocked is True
    assert revision.applied is False
    assert stack.load_skill("memory_capture").episode_count == 71


def test_forced_reset_logs_human_record(tmp_path):
    stack = make_stack(tmp_path, steps=[improve_step(1, reset=True)])
    stack.create_skill("memory_capture", "capture the moment")
    skill = stack.load_skill("memory_capture")
    skill.episode_count = 71
    stack._snapshot(skill)
    revision = stack.run_improve("memory_capture", force_reset=True)
    assert revision.applied is True
    assert stack.load_skill("memory_capture").episode_count == 0
    resets = [r for r in stack.vault.read_stream("interactions")
              if r.payload.get("type") == "skill_reset"]
    assert len(resets) == 1
    assert resets[0].author == "human"


def test_snapshot_guard_blocks_silent_count_reduction(tmp_path):
    stack = make_stack(tmp_path)
    stack.create_skill("memory_capture", "p")
    stack.attribute_episode("memory_capture")
    skill = stack.load_skill("memory_capture")
    skill.episode_count = 0
    with pytest.raises(ResetBlocked):
        stack._snapshot(skill)


def test_41_null_validations(tmp_path):
    steps = [improve_step(i + 1) for i in range(41)]
    stack = make_stack(tmp_path, steps=steps)
    stack.create_skill("memory_capture", "p")
    stack.attribute_episode("memory_capture")
    episodes = []
    for _ in range(41):
        stack.vault.clock.advance(3600)
        revision = stack.run_improve("memory_capture")
        episodes.append(stack.validate_improve(revision.run_id))
    assert all(e.assessment == "insufficient_data" for e in episodes)
    assert all(e.delta == 0.0 for e in episodes)
    assert all(e.paired_samples == 0 for e in episodes)


def test_regressed_delta_minus_3_69(tmp_path):
    stack = make_stack(tmp_path, steps=[improve_step(1)])
    stack.create_skill("memory_capture", "p")
    stack.attribute_episode("memory_capture")
    clock = stack.vault.clock
    for value in (0.61, 0.62, 0.63, 0.64, 0.6324):
        clock.advance(3600)
        stack.record_metric("memory_capture", value)
    clock.advance(3600)
    revision = stack.run_improve("memory_capture")
    for value in (0.60, 0.61, 0.60, 0.59, 0.5955):
        clock.advance(3600)
        stack.record_metric("memory_capture", value)
    episode = stack.validate_improve(revision.run_id)
    assert episode.paired_samples == 5
    assert episode.delta == -3.69
    assert episode.assessment == "regressed"


def test_no_change_when_before_equals_after(tmp_path):
    stack = make_stack(tmp_path, steps=[improve_step(1)])
    stack.create_skill("memory_capture", "p")
    stack.attribute_episode("memory_capture")
    clock = stack.vault.clock
    for _ in range(5):
        clock.advance(3600)
        stack.record_metric("memory_capture", 0.5)
    clock.advance(3600)
    revision = stack.run_improve("memory_capture")
    for _ in range(5):
        clock.advance(3600)
        stack.record_metric("memory_capture", 0.5)
    episode = stack.validate_improve(revision.run_id)
    assert episode.assessment == "no_change"


@settings(max_examples=25, deadline=None)
@given(n_before=st.integers(min_value=0, max_value=4),
       n_after=st.integers(min_value=0, max_value=6),
       values=st.lists(st.floats(min_value=0.0, max_value=1.0, allow_nan=False),
                       min_size=11, max_size=11))
def test_honesty_is_structural(tmp_path_factory, n_before, n_after, values):
    # Below min_pairs the validator cannot emit a directional verdict,
    # whatever the metric values look like.
    if min(n_before, n_after) >= 5:
        n_after = 4
    tmp_path = tmp_path_factory.mktemp("honesty")
    stack = make_stack(tmp_path, steps=[improve_step(1)])
    stack.create_skill("memory_capture", "p")
    stack.attribute_episode("memory_capture")
    clock = stack.vault.clock
    for value in values[:n_before]:
        clock.advance(3600)
        stack.record_metric("memory_capture", value)
    clock.advance(3600)
    revision = stack.run_improve("memory_capture")
    for value in values[n_before:n_before + n_after]:
        clock.advance(3600)
        stack.record_metric("memory_capture", value)
    episode = stack.validate_improve(revision.run_id)
    assert episode.paired_samples == min(n_before, n_after)
    assert episode.delta == 0.0
    assert episode.assessment == "insufficient_data"


def test_meta_entry_quotes_every_verdict(tmp_path):
    meta_step = {
        "key": {"depth": "notice", "archetype": None, "ordinal": 4},
        "response": json.dumps({
            "diagnosis": "The improve process is not earning directional claims.",
            "proposed_meta_improvements": ["collect paired samples before rewriting"],
        }),
    }
    steps = [improve_step(1), improve_step(2), improve_step(3), meta_step]
    stack = make_stack(tmp_path, start="2026-04-20T10:00:00Z", steps=steps)
    stack.create_skill("memory_capture", "p")
    stack.attribute_episode("memory_capture")
    for _ in range(3):
        stack.vault.clock.advance(600)
        revision = stack.run_improve("memory_capture")
        stack.validate_improve(revision.run_id)
    entry = stack.write_meta_reflexion("2026-W17")
    text = stack.vault.read_markdown_log("meta_reflexion")
    assert text.count("insufficient_data") >= 3
    assert "collect paired samples" in text
    assert entry.evidence == ["run-0001", "run-0002", "run-0003"]


def test_meta_empty_window_errors(tmp_path):
    stack = make_stack(tmp_path)
    with pytest.raises(ReflexionError):
        stack.write_meta_reflexion("2026-W17")


def test_adr_adoption_bumps_version(tmp_path):
    stack = make_stack(tmp_path)
    stack.propose_adr("adr-001-lifecycle-hooks", "Add lifecycle hooks",
                      "Adopt explicit lifecycle hooks for loop stages.")
    assert stack.load_constitution().version == "1.0"
    result = stack.decide_adr("adr-001-lifecycle-hooks", "adopted")
    assert result["constitution_version"] == "1.1"
    assert stack.load_constitution().version == "1.1"
    # Already-decided ADRs conflict.
    with pytest.raises(ReflexionError):
        stack.decide_adr("adr-001-lifecycle-hooks", "rejected")


def test_adr_rejection_leaves_constitution(tmp_path):
    stack = make_stack(tmp_path)
    stack.propose_adr("adr-002-noop", "No-op", "Nothing.")
    stack.decide_adr("adr-002-noop", "rejected")
    assert stack.load_constitution().version == "1.0"
