"""Acceptance suite: every criterion at its stated tolerance.

Each test prints one PASS line on success (run with -s to see them all);
a failure reads as the criterion number plus the violated bound.
"""

from __future__ import annotations

import json
import shutil
import threading
import time
from pathlib import Path

import pytest
from click.testing import CliRunner

from covault.analytics import (
    archetype_share,
    cohen_kappa,
    detect_uptake,
    rate_counterfactual,
    validator_honesty_audit,
    weekly_entropy,
)
from covault.archetypes import ArchetypeEngine
from covault.cli import main
from covault.clock import FixedClock
from covault.conformance import conformance_check
from covault.fixtures import (
    build_honesty_vault,
    build_paper_scenario,
    inject_fabricated_positive,
    mutate_fail_c1,
    mutate_fail_c2,
    mutate_fail_c3,
    mutate_fail_c4,
    mutate_fail_c5,
    mutate_fail_c6,
    seed_archetype_series,
    seed_conformance_vault,
    seed_grammar_arc,
    seed_rate_series,
    shuffled_author_copy,
)
from covault.reflexion import ReflexionStack
from covault.schemas import DIMENSIONS
from covault.vault import Vault

REPO_ROOT = Path(__file__).resolve().parents[1]
PAPER_TRACE = REPO_ROOT / "fixtures" / "paper_trace.json"


def _ok(n: int, text: str) -> None:
    print(f"ACCEPTANCE {n}: PASS — {text}")


@pytest.fixture(scope="module")
def replay_vaults(tmp_path_factory):
    """Criterion 1's two replays, reused by criterion 10."""
    tmp = tmp_path_factory.mktemp("replay")
    runner = CliRunner()
    elapsed = {}
    for name in ("a", "b"):
        start = time.monotonic()
        result = runner.invoke(main, ["replay", "--scenario", str(PAPER_TRACE),
                                      "--out", str(tmp / name)])
        elapsed[name] = time.monotonic() - start
        assert result.exit_code == 0, result.output
    return tmp / "a", tmp / "b", max(elapsed.values())


def _tree_bytes(root: Path) -> dict:
    return {str(p.relative_to(root)): p.read_bytes()
            for p in sorted(root.rglob("*")) if p.is_file()}


def test_01_replay_determinism(replay_vaults):
    vault_a, vault_b, runtime = replay_vaults
    assert PAPER_TRACE.exists(), "bundled fixtures/paper_trace.json missing"
    bundled = json.loads(PAPER_TRACE.read_text("utf-8"))
    assert bundled == build_paper_scenario(), "bundled scenario out of sync"
    a, b = _tree_bytes(vault_a), _tree_bytes(vault_b)
    assert a == b, "replayed vaults differ"
    assert len(a) > 40
    assert runtime < 60.0, f"replay took {runtime:.1f}s"
    _ok(1, f"two replays byte-identical ({len(a)} files, {runtime:.1f}s each)")


@pytest.fixture(scope="module")
def archetype_vault(tmp_path_factory):
    vault = Vault(tmp_path_factory.mktemp("arch") / "vault",
                  clock=FixedClock("2026-04-18T00:00:00Z"))
    vault.ensure_layout()
    seed_archetype_series(vault)
    return vault


def test_02_entropy_trajectory(archetype_vault):
    series = weekly_entropy(archetype_vault, window=("2026-W17", "2026-W21"))
    assert sum(p.event_count for p in series.points) == 192
    by_week = series.by_week()
    assert by_week["2026-W17"] == pytest.approx(2.07, abs=0.05)
    assert by_week["2026-W20"] == pytest.approx(0.95, abs=0.05)
    h = [by_week[w] for w in ("2026-W17", "2026-W18", "2026-W19", "2026-W20")]
    assert all(x >= y for x, y in zip(h, h[1:])), f"not monotone: {h}"
    reduction = (h[0] - h[3]) / h[0]
    assert reduction == pytest.approx(0.54, abs=0.02)
    _ok(2, f"entropy {h[0]:.2f} -> {h[3]:.2f} bits, reduction {reduction:.3f}")


def test_03_beatrice_muse_share(archetype_vault):
    share = archetype_share(archetype_vault, ("2026-W16", "2026-W21"),
                            subset={"Beatrice", "Muse"},
                            from_ts="2026-04-18T00:00:00Z",
                            to_ts="2026-05-18T23:59:59Z")
    assert share == pytest.approx(0.85, abs=0.005)
    _ok(3, f"Beatrice+Muse share {share:.4f} over the 181-event window")


def test_04_rate_counterfactual(tmp_path):
    vault = Vault(tmp_path / "vault", clock=FixedClock("2026-03-08T00:00:00Z"))
    vault.ensure_layout()
    seed_rate_series(vault)
    cmp = rate_counterfactual(vault, "2026-04-16T00:00:00Z")
    assert (cmp.pre_count, cmp.post_count) == (221, 193)
    assert cmp.pre_rate == 5.67
    assert cmp.post_rate == 6.03
    assert cmp.rel_diff <= 0.06
    _ok(4, f"rates {cmp.pre_rate}/{cmp.post_rate} per day, "
           f"rel_diff {cmp.rel_diff:.4f}")


def test_05_validator_honesty(tmp_path):
    vault, stack = build_honesty_vault(tmp_path, n_runs=41)
    verdicts = stack.validations()
    assert len(verdicts) == 41
    assert all(v["assessment"] == "insufficient_data" for v in verdicts)
    assert all(v["delta"] == 0.0 for v in verdicts)
    assert validator_honesty_audit(vault) == []
    inject_fabricated_positive(vault)
    findings = validator_honesty_audit(vault)
    assert len(findings) == 1
    assert findings[0].kind == "fabricated_positive"
    _ok(5, "41/41 verdicts exactly (0.0, insufficient_data); "
           "fabricated positive flagged once")


def test_06_fm2_reset_guard(tmp_path):
    from covault.gateway import Gateway, ModelProfile

    steps = [{"key": {"depth": "notice", "archetype": None, "ordinal": i + 1},
              "response": json.dumps({"prompt_text": "full rewrite",
                                      "reset_history": True})}
             for i in range(2)]
    scenario = tmp_path / "scenario.json"
    scenario.write_text(json.dumps({"steps": steps}), "utf-8")
    vault = Vault(tmp_path / "vault", clock=FixedClock("2026-04-20T10:00:00Z"))
    vault.ensure_layout()
    gateway = Gateway()
    profile = ModelProfile.scripted("fm2", scenario)
    gateway.register_profile(profile)
    stack = ReflexionStack(vault, gateway=gateway, profile=profile)
    stack.install_constitution()
    stack.create_skill("memory_capture", "capture the moment")
    skill = stack.load_skill("memory_capture")
    skill.episode_count = 71
    stack._snapshot(skill)

    blocked = stack.run_improve("memory_capture")
    assert blocked.blocked is True and blocked.applied is False
    assert stack.load_skill("memory_capture").episode_count == 71

    forced = stack.run_improve("memory_capture", force_reset=True)
    assert forced.applied is True
    assert stack.load_skill("memory_capture").episode_count == 0
    resets = [r for r in vault.read_stream("interactions")
              if r.payload.get("type") == "skill_reset"]
    assert len(resets) == 1 and resets[0].author == "human"
    _ok(6, "71->0 reset blocked without force; forced reset leaves a "
           "human-authored record")


def test_07_uptake_chain_and_control(tmp_path):
    vault = Vault(tmp_path / "arc", clock=FixedClock("2026-04-26T00:00:00Z"))
    vault.ensure_layout()
    seed_grammar_arc(vault)
    complete = [c for c in detect_uptake(vault) if c.complete]
    assert len(complete) == 1
    stages = (complete[0].seed.ts, complete[0].reframe.ts,
              complete[0].adoption.ts, complete[0].reuse[0].ts)
    assert stages == ("2026-04-26T05:05:00Z", "2026-04-26T14:58:00Z",
                      "2026-04-28T14:22:00Z", "2026-05-17T03:04:00Z")

    control = Vault(tmp_path / "control", clock=FixedClock("2026-04-26T00:00:00Z"))
    control.ensure_layout()
    shuffled_author_copy(vault, control)
    assert [c for c in detect_uptake(control) if c.complete] == []
    _ok(7, "grammar arc yields exactly 1 complete chain; shuffled control 0")


@pytest.fixture(scope="module")
def conformance_root(tmp_path_factory):
    root = tmp_path_factory.mktemp("conf") / "vault"
    seed_conformance_vault(root)
    return root


def test_08_conformance_and_mutations(conformance_root, tmp_path):
    report = conformance_check(Vault(conformance_root))
    assert report.overall, [c.note for c in report.conditions if not c.passed]
    mutations = {"C1": mutate_fail_c1, "C2": mutate_fail_c2, "C3": mutate_fail_c3,
                 "C4": mutate_fail_c4, "C5": mutate_fail_c5, "C6": mutate_fail_c6}
    for target, mutate in mutations.items():
        mutated = tmp_path / f"vault-{target}"
        shutil.copytree(conformance_root, mutated)
        mutate(mutated)
        failing = conformance_check(Vault(mutated)).failing()
        assert failing == [target], f"{target} mutation failed {failing}"
    _ok(8, "full fixture 6/6; each of six mutations fails exactly its condition")


def test_09_lock_in(archetype_vault, tmp_path):
    engine = ArchetypeEngine(archetype_vault)
    report = engine.detect_lock_in(("2026-W17", "2026-W21"))
    assert report.triggered is True
    assert report.dominant[0] == "Beatrice"
    assert report.dominant[1] >= 0.42
    assert [name for name, _ in report.starved] == ["Daimon", "Psyche"]
    assert all(weeks >= 3 for _, weeks in report.starved)

    uniform = Vault(tmp_path / "uniform", clock=FixedClock("2026-04-20T08:00:00Z"))
    uniform.ensure_layout()
    uniform_engine = ArchetypeEngine(uniform)
    for monday in ("2026-04-20", "2026-04-27", "2026-05-04"):
        uniform.clock.set(f"{monday}T08:00:00Z")
        for name in ("Ariadne", "Beatrice", "Daimon", "Muse", "Musubi", "Psyche"):
            uniform_engine.log_invocation(name, "i", "api")
    assert uniform_engine.detect_lock_in(("2026-W17", "2026-W19")).triggered is False
    _ok(9, f"lock-in: Beatrice {report.dominant[1]:.2f} dominant, "
           f"Daimon+Psyche starved; uniform fixture quiet")


def test_10_triad_completeness(replay_vaults):
    vault = Vault(replay_vaults[0])
    self_profiles = vault.query_docs("self_profile")
    partner_profiles = vault.query_docs("partner_profile")
    deltas = vault.query_docs("delta")
    assert len(self_profiles) + len(partner_profiles) + len(deltas) == 15
    assert len(deltas) == 5
    for delta in deltas:
        assert delta.frontmatter["author"] == "agent"
        for section in ("Focus Shift", "Calibration Arc", "Partnership Alignment"):
            assert f"## {section}" in delta.body, (delta.path, section)
    _ok(10, "5-week run produced 15 triad docs; 5 agent-authored deltas "
            "with all three sections")


def test_11_kappa(tmp_path):
    identical = cohen_kappa(list(DIMENSIONS), list(DIMENSIONS))
    assert identical.kappa == 1.0
    construction = cohen_kappa([DIMENSIONS[i % 8] for i in range(80)],
                               ["identity"] * 80)
    assert construction.kappa == pytest.approx(0.0, abs=1e-3)
    _ok(11, f"kappa identical=1.0, constant-vs-uniform={construction.kappa:.4f}")


def test_12_concurrent_integrity(tmp_path):
    vault = Vault(tmp_path / "vault", clock=FixedClock("2026-04-18T00:00:00Z"))
    vault.ensure_layout()
    streams = ["interactions", "archetype_log", "partner_learnings", "skills"]
    per_stream = 2500

    def pump(stream: str):
        for i in range(per_stream):
            vault.append_record(stream, "agent", _payload(stream, i))

    threads = [threading.Thread(target=pump, args=(s,)) for s in streams]
    for t in threads:
        t.start()
    for t in threads:
        t.join()

    total = 0
    for stream in streams:
        report = vault.verify_stream_integrity(stream)
        assert report.clean, report.findings[:3]
        total += len(vault.read_stream(stream))
    assert total == 10_000
    _ok(12, "10,000 concurrent appends across 4 streams; zero integrity findings")


def _payload(stream: str, i: int) -> dict:
    if stream == "interactions":
        return {"interaction_id": f"i-{i}", "type": "note"}
    if stream == "archetype_log":
        return {"archetype": "Muse", "interaction_id": f"i-{i}",
                "surface": "api", "success": True}
    if stream == "partner_learnings":
        return {"text": f"claim {i}", "dimension": "voice",
                "source_interaction_id": f"i-{i}"}
    return {"skill_id": "memory_capture", "prompt_text": "p",
            "episode_count": i, "metric_history": []}
