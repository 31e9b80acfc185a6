"""Bidirectional uptake detection over the four-stage fixture."""

from __future__ import annotations

import pytest

from covault.analytics import detect_uptake
from covault.clock import FixedClock, parse_ts
from covault.fixtures import seed_grammar_arc, shuffled_author_copy
from covault.textutil import content_words, ngrams
from covault.vault import Vault


@pytest.fixture
def arc_vault(tmp_path):
    vault = Vault(tmp_path / "vault", clock=FixedClock("2026-04-26T00:00:00Z"))
    vault.ensure_layout()
    seed_grammar_arc(vault)
    return vault


def brute_force_complete_chains(utterances, docs, min_ngram=3, reuse_days=7.0):
    """Independent oracle: exhaustive scan of every agent n-gram under the
    four-stage rule. Utterances are (ts, author, text); docs are
    (ts, author, text)."""
    stream = sorted(utterances, key=lambda u: parse_ts(u[0]))
    humans = [u for u in stream if u[1] == "human"]
    agents = [u for u in stream if u[1] == "agent"]
    agent_docs = [d for d in docs if d[1] == "agent"]
    count = 0
    seen = set()
    for a_ts, _, a_text in agents:
        grams = ngrams(content_words(a_text), min_ngram)
        prior = set()
        for h_ts, _, h_text in humans:
            if parse_ts(h_ts) <= parse_ts(a_ts):
                prior.update(ngrams(content_words(h_text), min_ngram))
        for gram in grams:
            if gram in prior or gram in seen:
                continue
            adopted = [h for h in humans
                       if parse_ts(h[0]) > parse_ts(a_ts)
                       and gram in ngrams(content_words(h[2]), min_ngram)]
            if not adopted:
                continue
            seeds = [h for h in humans
                     if parse_ts(h[0]) < parse_ts(a_ts)
                     and set(content_words(h[2])) & set(content_words(a_text))]
            if not seeds:
                continue
            topic = set(content_words(seeds[-1][2])) & set(content_words(a_text))
            adoption_ts = parse_ts(adopted[0][0])
            reuse = [d for d in agent_docs
                     if parse_ts(d[0]) > adoption_ts
                     and (parse_ts(d[0]) - parse_ts(a_ts)).total_seconds()
                     >= reuse_days * 86400
                     and set(content_words(d[2])) & topic]
            if reuse:
                seen.add(gram)
                count += 1
    return count


def _flatten(vault):
    utterances = []
    for record in vault.read_stream("interactions"):
        p = record.payload
        if p.get("human_text"):
            utterances.append((record.ts, "human", p["human_text"]))
        if p.get("agent_text"):
            utterances.append((record.ts, "agent", p["agent_text"]))
    docs = [(str(d.frontmatter.get("created_ts")), str(d.frontmatter.get("author")),
             d.body) for d in vault.all_docs()]
    return utterances, docs


def test_grammar_arc_yields_exactly_one_complete_chain(arc_vault):
    chains = detect_uptake(arc_vault)
    complete = [c for c in chains if c.complete]
    assert len(complete) == 1
    chain = complete[0]
    assert chain.seed.ts == "2026-04-26T05:05:00Z"
    assert chain.reframe.ts == "2026-04-26T14:58:00Z"
    assert chain.adoption.ts == "2026-04-28T14:22:00Z"
    assert chain.reuse[0].ts == "2026-05-17T03:04:00Z"
    assert "belong" in chain.novel_ngram

    utterances, docs = _flatten(arc_vault)
    assert brute_force_complete_chains(utterances, docs) == 1


def test_stage_timestamps_strictly_ordered(arc_vault):
    chain = [c for c in detect_uptake(arc_vault) if c.complete][0]
    order = [chain.seed.ts, chain.reframe.ts, chain.adoption.ts, chain.reuse[0].ts]
    assert order == sorted(order)
    assert len(set(order)) == 4


def test_verbatim_echo_produces_no_chain(tmp_path):
    vault = Vault(tmp_path / "vault", clock=FixedClock("2026-04-26T00:00:00Z"))
    vault.ensure_layout()
    text = "a new dynamic grammar that frames everything relationally"
    for ts, human, agent in [
        ("2026-04-26T05:05:00Z", text, ""),
        ("2026-04-26T14:58:00Z", "", text),  # agent parrots the human
        ("2026-04-28T14:22:00Z", text, ""),
    ]:
        vault.clock.set(ts)
        vault.append_record("interactions", "human", {
            "interaction_id": f"echo-{ts}", "type": "chat", "surface": "api",
            "human_text": human, "agent_text": agent,
            "depth": "listen", "truncated": False,
        })
    assert [c for c in detect_uptake(vault) if c.complete] == []


def test_shuffled_author_control_has_zero_complete_chains(arc_vault, tmp_path):
    control = Vault(tmp_path / "control", clock=FixedClock("2026-04-26T00:00:00Z"))
    control.ensure_layout()
    shuffled_author_copy(arc_vault, control)
    complete = [c for c in detect_uptake(control) if c.complete]
    assert complete == []

    # Oracle agrees on the mutated fixture.
    utterances, docs = _flatten(control)
    assert brute_force_complete_chains(utterances, docs) == 0


def test_detection_is_pure_function_of_vault(arc_vault):
    first = detect_uptake(arc_vault)
    second = detect_uptake(arc_vault)
    assert [(c.novel_ngram, c.complete) for c in first] == \
        [(c.novel_ngram, c.complete) for c in second]
