"""Vault substrate: streams, documents, integrity."""

from __future__ import annotations

import json
import threading

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from covault.clock import FixedClock
from covault.schemas import SchemaError
from covault.vault import MarkdownDoc, Vault, VaultError


@pytest.fixture
def vault(tmp_path):
    v = Vault(tmp_path / "vault", clock=FixedClock("2026-04-18T10:00:00Z"))
    v.ensure_layout()
    return v


def _clock(vault) -> FixedClock:
    return vault.clock


def test_first_append_gets_seq_1(vault):
    rec = vault.append_record("interactions", "human", _chat("i-1"))
    assert rec.seq == 1
    assert rec.ts == "2026-04-18T10:00:00Z"


def test_identical_payloads_are_both_retained(vault):
    vault.append_record("interactions", "human", _chat("i-1"))
    vault.append_record("interactions", "human", _chat("i-1"))
    records = vault.read_stream("interactions")
    assert [r.seq for r in records] == [1, 2]
    assert records[0].payload == records[1].payload


def test_181_appends_read_back_in_order(vault):
    for i in range(181):
        _clock(vault).advance(60)
        vault.append_record("archetype_log", "agent", {
            "archetype": "Beatrice", "interaction_id": f"i-{i}",
            "surface": "api", "success": True,
        })
    records = vault.read_stream("archetype_log")
    assert len(records) == 181
    assert [r.seq for r in records] == list(range(1, 182))


def test_unknown_stream_rejected(vault):
    with pytest.raises(VaultError):
        vault.append_record("nope", "human", {})
    with pytest.raises(VaultError):
        vault.read_stream("nope")


def test_schema_violation_rejected(vault):
    with pytest.raises(SchemaError):
        vault.append_record("archetype_log", "agent", {"archetype": "Muse"})


def test_clock_regression_clamps_to_last_ts(vault):
    vault.append_record("interactions", "human", _chat("i-1"))
    _clock(vault).set("2026-04-18T09:00:00Z")  # clock moved backward
    rec = vault.append_record("interactions", "human", _chat("i-2"))
    assert rec.ts == "2026-04-18T10:00:00Z"


def test_empty_stream_reads_empty(vault):
    assert vault.read_stream("interactions") == []


def test_time_window_filters_inclusive(vault):
    stamps = ["2026-04-10T00:00:00Z", "2026-04-18T00:00:00Z",
              "2026-05-18T23:00:00Z", "2026-05-19T00:00:00Z"]
    for i, ts in enumerate(stamps):
        _clock(vault).set(ts)
        vault.append_record("interactions", "human", _chat(f"i-{i}"))
    window = vault.read_stream("interactions",
                               from_ts="2026-04-18T00:00:00Z",
                               to_ts="2026-05-18T23:59:59Z")
    assert [r.payload["interaction_id"] for r in window] == ["i-1", "i-2"]


def test_corrupt_middle_line_skipped_with_diagnostic(vault):
    for i in range(5):
        vault.append_record("interactions", "human", _chat(f"i-{i}"))
    path = vault.channel_path("interactions")
    lines = path.read_text("utf-8").splitlines()
    lines[2] = '{"seq": 3, "ts": broken'
    path.write_text("\n".join(lines) + "\n", "utf-8")

    records, diagnostics = vault.read_stream("interactions", with_diagnostics=True)
    assert len(records) == 4
    assert len(diagnostics) == 1
    assert diagnostics[0].line_number == 3


def test_integrity_clean_stream(vault):
    for i in range(10):
        vault.append_record("archetype_log", "agent", {
            "archetype": "Muse", "interaction_id": f"i-{i}",
            "surface": "cli", "success": True,
        })
    assert vault.verify_stream_integrity("archetype_log").clean


def test_integrity_detects_deleted_line_as_gap(vault):
    for i in range(5):
        vault.append_record("interactions", "human", _chat(f"i-{i}"))
    path = vault.channel_path("interactions")
    lines = path.read_text("utf-8").splitlines()
    del lines[2]  # seq 3 vanishes
    path.write_text("\n".join(lines) + "\n", "utf-8")

    report = vault.verify_stream_integrity("interactions")
    gaps = [f for f in report.findings if f.kind == "gap"]
    assert len(gaps) == 1
    assert gaps[0].seq == 3


def test_integrity_detects_ts_regression(vault):
    for i in range(3):
        _clock(vault).advance(60)
        vault.append_record("interactions", "human", _chat(f"i-{i}"))
    path = vault.channel_path("interactions")
    lines = path.read_text("utf-8").splitlines()
    doc = json.loads(lines[1])
    doc["ts"] = "2026-04-18T00:00:00Z"
    lines[1] = json.dumps(doc, sort_keys=True)
    path.write_text("\n".join(lines) + "\n", "utf-8")

    report = vault.verify_stream_integrity("interactions")
    regressions = [f for f in report.findings if f.kind == "ts_regression"]
    assert len(regressions) == 1


def test_append_only_prefix_property(vault):
    vault.append_record("interactions", "human", _chat("i-1"))
    before = vault.channel_path("interactions").read_bytes()
    vault.append_record("interactions", "human", _chat("i-2"))
    after = vault.channel_path("interactions").read_bytes()
    assert after.startswith(before)


def test_tsv_round_trip_and_columns(vault):
    vault.append_record("constitution_scores", "agent", {
        "interaction_id": "i-1", "principle_id": 1, "score": 3,
        "rationale": "steady\twith tabs",
    })
    line = vault.channel_path("constitution_scores").read_text("utf-8").strip()
    fields = line.split("\t")
    assert len(fields) == 5
    assert fields[1] == "i-1"
    records = vault.read_stream("constitution_scores")
    assert records[0].payload["score"] == 3
    assert "\t" not in records[0].payload["rationale"]


# --- documents ----------------------------------------------------------


def _doc(kind: str, path: str, week: str = "2026-W20", author: str = "agent",
         body: str = "Observations.\n") -> MarkdownDoc:
    return MarkdownDoc(path=path, kind=kind, frontmatter={
        "kind": kind, "author": author, "iso_week": week,
        "created_ts": "2026-05-17T03:04:00Z", "generator": "test",
    }, body=body)


def test_write_doc_lands_under_its_root(vault):
    rel = vault.write_doc(_doc("self_portrait", "Wisdom/Lived/2026-W20-portrait.md"))
    assert rel == "Wisdom/Lived/2026-W20-portrait.md"
    assert (vault.root / rel).exists()


def test_rewrite_adds_history_version(vault):
    doc = _doc("self_portrait", "Wisdom/Lived/2026-W20-portrait.md")
    vault.write_doc(doc)
    assert vault.doc_history(doc.path) == []
    _clock(vault).advance(3600)
    doc.body = "Rewritten.\n"
    vault.write_doc(doc)
    assert len(vault.doc_history(doc.path)) == 1


def test_doc_history_with_relative_root(vault, tmp_path, monkeypatch):
    doc = _doc("self_portrait", "Wisdom/Lived/2026-W20-portrait.md")
    vault.write_doc(doc)
    _clock(vault).advance(3600)
    vault.write_doc(doc)
    monkeypatch.chdir(vault.root.parent)
    relative = Vault(vault.root.name, clock=_clock(vault))
    history = relative.doc_history(doc.path)
    assert len(history) == 1
    assert history[0].startswith("Wisdom/Lived/.history/")


def test_human_delta_rejected(vault):
    doc = _doc("delta", "Self/Profiles/2026-W20-delta.md", author="human")
    with pytest.raises(VaultError):
        vault.write_doc(doc)


def test_path_escape_rejected(vault):
    doc = _doc("self_portrait", "Wisdom/Lived/../../escape.md")
    with pytest.raises(VaultError):
        vault.write_doc(doc)


def test_doc_outside_kind_root_rejected(vault):
    doc = _doc("self_portrait", "Self/Profiles/2026-W20-portrait.md")
    with pytest.raises(VaultError):
        vault.write_doc(doc)


def test_query_docs_by_kind_and_week(vault):
    for week in ("2026-W16", "2026-W17", "2026-W18", "2026-W19", "2026-W20"):
        vault.write_doc(_doc("delta", f"Self/Profiles/{week}-delta.md", week=week))
    vault.write_doc(_doc("self_profile", "Self/Profiles/2026-W18-agent.md", week="2026-W18"))
    found = vault.query_docs("delta", week_range=("2026-W16", "2026-W20"))
    assert len(found) == 5
    assert [d.frontmatter["iso_week"] for d in found] == [
        "2026-W16", "2026-W17", "2026-W18", "2026-W19", "2026-W20"]
    assert vault.query_docs("adr") == []


def test_frontmatter_round_trip(vault):
    doc = _doc("growth_journal", "Myself/Journal/20260517-entry.md", author="human")
    doc.frontmatter["reducible"] = True
    vault.write_doc(doc)
    back = vault.read_doc(doc.path)
    assert back.kind == "growth_journal"
    assert back.frontmatter["author"] == "human"
    assert back.frontmatter["reducible"] is True
    assert back.body == "Observations.\n"


# --- properties ----------------------------------------------------------

payloads = st.dictionaries(
    keys=st.text(alphabet="abcdefgh_", min_size=1, max_size=8),
    values=st.one_of(st.integers(min_value=-10**9, max_value=10**9),
                     st.text(max_size=40), st.booleans()),
    max_size=5,
)


@settings(max_examples=50, deadline=None)
@given(payload=payloads)
def test_round_trip_payload_equality(tmp_path_factory, payload):
    root = tmp_path_factory.mktemp("rt")
    vault = Vault(root, clock=FixedClock("2026-04-18T10:00:00Z"))
    vault.ensure_layout()
    payload = dict(payload)
    payload.setdefault("interaction_id", "i-1")
    payload["type"] = "note"
    rec = vault.append_record("interactions", "system", payload)
    got = vault.read_stream("interactions")[-1]
    assert got.payload == rec.payload == payload


def test_concurrent_streams_stay_gap_free(vault):
    streams = ["interactions", "archetype_log", "partner_learnings", "skills"]

    def pump(stream: str, n: int):
        for i in range(n):
            vault.append_record(stream, "agent", _payload_for(stream, i))

    threads = [threading.Thread(target=pump, args=(s, 250)) for s in streams]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    for stream in streams:
        report = vault.verify_stream_integrity(stream)
        assert report.clean, report.findings
        assert len(vault.read_stream(stream)) == 250


def _payload_for(stream: str, i: int) -> dict:
    if stream == "interactions":
        return _chat(f"i-{i}")
    if stream == "archetype_log":
        return {"archetype": "Muse", "interaction_id": f"i-{i}",
                "surface": "api", "success": True}
    if stream == "partner_learnings":
        return {"text": f"claim {i}", "dimension": "voice",
                "source_interaction_id": f"i-{i}"}
    return {"skill_id": "memory_capture", "prompt_text": "p",
            "episode_count": i, "metric_history": []}


def _chat(interaction_id: str) -> dict:
    return {
        "interaction_id": interaction_id, "type": "chat", "surface": "api",
        "human_text": "hello", "agent_text": "hi", "depth": "listen",
        "truncated": False,
    }
