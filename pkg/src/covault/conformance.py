"""The six-condition partnership conformance checker.

Each condition is decided from artifacts alone and carries the evidence
paths that justify it, so a failing report names exactly what is missing.
The checks are monotone in evidence: adding documents can only help.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .analytics import delta_reducibility
from .clock import parse_ts
from .vault import MarkdownDoc, Vault

SELF_MODEL_KINDS = ("self_portrait", "self_profile")
PARTNERSHIP_KINDS = ("self_portrait", "self_profile", "delta")

CONDITION_TITLES = {
    "C1": "Persistent bidirectional self-models",
    "C2": "Externalised shared memory",
    "C3": "Recursive mutual modeling",
    "C4": "Temporal continuity",
    "C5": "Partnership-level representation",
    "C6": "Reflexive modification capacity",
}


@dataclass
class ConditionResult:
    condition: str
    title: str
    passed: bool
    evidence: list[str] = field(default_factory=list)
    note: str = ""


@dataclass
class ConformanceReport:
    conditions: list[ConditionResult]

    @property
    def overall(self) -> bool:
        return all(c.passed for c in self.conditions)

    def failing(self) -> list[str]:
        return [c.condition for c in self.conditions if not c.passed]

    def to_dict(self) -> dict:
        return {
            "overall": self.overall,
            "conditions": [
                {"condition": c.condition, "title": c.title, "passed": c.passed,
                 "evidence": c.evidence, "note": c.note}
                for c in self.conditions
            ],
        }


def conformance_check(vault: Vault, span_days: float = 28.0,
                      reducibility_threshold: float = 0.9) -> ConformanceReport:
    docs = vault.all_docs()
    by_kind: dict[str, list[MarkdownDoc]] = {}
    for doc in docs:
        by_kind.setdefault(doc.kind, []).append(doc)
    paths = {doc.path for doc in docs}

    conditions = [
        _c1_bidirectional_self_models(by_kind),
        _c2_shared_substrate(vault),
        _c3_mutual_modeling(vault, by_kind),
        _c4_temporal_continuity(docs, paths, span_days),
        _c5_partnership_representation(by_kind, reducibility_threshold),
        _c6_reflexive_modification(vault, by_kind),
    ]
    return ConformanceReport(conditions=conditions)


def _dated(docs: list[MarkdownDoc]) -> dict[str, MarkdownDoc]:
    """One doc per distinct creation date (the 'dated versions' measure)."""
    out: dict[str, MarkdownDoc] = {}
    for doc in docs:
        created = str(doc.frontmatter.get("created_ts", ""))
        if created:
            out.setdefault(created[:10], doc)
    return out


def _c1_bidirectional_self_models(by_kind) -> ConditionResult:
    agent_docs = [d for kind in SELF_MODEL_KINDS for d in by_kind.get(kind, [])
                  if d.frontmatter.get("author") == "agent"]
    human_docs = [d for d in by_kind.get("growth_journal", [])
                  if d.frontmatter.get("author") == "human"]
    agent_dated = _dated(agent_docs)
    human_dated = _dated(human_docs)
    passed = len(agent_dated) >= 2 and len(human_dated) >= 2
    evidence = ([d.path for d in list(agent_dated.values())[:2]] +
                [d.path for d in list(human_dated.values())[:2]]) if passed else []
    note = (f"{len(agent_dated)} dated agent self-model docs, "
            f"{len(human_dated)} dated human self-docs")
    return ConditionResult("C1", CONDITION_TITLES["C1"], passed, evidence, note)


def _c2_shared_substrate(vault: Vault) -> ConditionResult:
    seen: dict[str, str] = {}
    for stream in vault.layout.record_streams():
        for record in vault.read_stream(stream):
            if record.author in ("human", "agent") and record.author not in seen:
                seen[record.author] = f"{vault.layout.channels[stream].path}#{record.seq}"
        if len(seen) == 2:
            break
    passed = len(seen) == 2
    evidence = sorted(seen.values()) if passed else []
    note = f"stream writers present: {sorted(seen) or 'none'}"
    return ConditionResult("C2", CONDITION_TITLES["C2"], passed, evidence, note)


def _cites(doc: MarkdownDoc, targets: set[str]) -> list[str]:
    return sorted(t for t in targets if t and t in doc.body)


def _c3_mutual_modeling(vault: Vault, by_kind) -> ConditionResult:
    journal_paths = {d.path for d in by_kind.get("growth_journal", [])}
    partner_profile_paths = {d.path for d in by_kind.get("partner_profile", [])}
    learnings_path = vault.layout.channels["partner_learnings"].path

    # Agent's model of the partner citing the partner's own self-docs.
    partner_to_human = []
    for doc in by_kind.get("partner_profile", []):
        hits = _cites(doc, journal_paths)
        if hits:
            partner_to_human.append((doc.path, hits[0]))
    # Agent's self-model citing partner material.
    partner_material = journal_paths | partner_profile_paths | {learnings_path}
    self_to_partner = []
    for kind in SELF_MODEL_KINDS:
        for doc in by_kind.get(kind, []):
            if doc.frontmatter.get("author") != "agent":
                continue
            hits = _cites(doc, partner_material)
            if hits:
                self_to_partner.append((doc.path, hits[0]))
    passed = bool(partner_to_human) and bool(self_to_partner)
    evidence = []
    if passed:
        evidence = [partner_to_human[0][0], self_to_partner[0][0]]
    note = (f"partner-model citations: {len(partner_to_human)}, "
            f"self-model citations of partner material: {len(self_to_partner)}")
    return ConditionResult("C3", CONDITION_TITLES["C3"], passed, evidence, note)


def _c4_temporal_continuity(docs, paths, span_days: float) -> ConditionResult:
    dated = [(parse_ts(str(d.frontmatter["created_ts"])), d) for d in docs
             if d.frontmatter.get("created_ts")]
    if not dated:
        return ConditionResult("C4", CONDITION_TITLES["C4"], False, [],
                               "no dated artifacts")
    dated.sort(key=lambda pair: pair[0])
    span = (dated[-1][0] - dated[0][0]).total_seconds() / 86400.0
    citation = None
    created_by_path = {d.path: t for t, d in dated}
    for instant, doc in dated:
        for target in _cites(doc, paths - {doc.path}):
            if created_by_path.get(target) is not None and created_by_path[target] < instant:
                citation = (doc.path, target)
                break
        if citation:
            break
    passed = span >= span_days and citation is not None
    evidence = [dated[0][1].path, dated[-1][1].path] + (list(citation) if citation else [])
    return ConditionResult("C4", CONDITION_TITLES["C4"], passed,
                           evidence if passed else [],
                           f"span {span:.1f} days; later-cites-earlier: "
                           f"{'yes' if citation else 'no'}")


def _c5_partnership_representation(by_kind, threshold: float) -> ConditionResult:
    deltas = by_kind.get("delta", [])
    if not deltas:
        return ConditionResult("C5", CONDITION_TITLES["C5"], False, [],
                               "no delta documents")
    profiles = {}
    for kind in ("self_profile", "partner_profile"):
        for doc in by_kind.get(kind, []):
            week = str(doc.frontmatter.get("iso_week", ""))
            profiles.setdefault(week, {})[kind] = doc
    irreducible = []
    for delta in deltas:
        week = str(delta.frontmatter.get("iso_week", ""))
        pair = profiles.get(week, {})
        if "self_profile" not in pair or "partner_profile" not in pair:
            continue
        result = delta_reducibility(
            delta.body,
            (pair["self_profile"].body, pair["partner_profile"].body),
            threshold=threshold)
        if not result.reducible:
            irreducible.append(delta.path)
    passed = bool(irreducible)
    note = (f"{len(deltas)} delta docs, {len(irreducible)} irreducible")
    return ConditionResult("C5", CONDITION_TITLES["C5"], passed,
                           irreducible[:3], note)


def _c6_reflexive_modification(vault: Vault, by_kind) -> ConditionResult:
    modified = []
    for kind in PARTNERSHIP_KINDS:
        for doc in by_kind.get(kind, []):
            if doc.frontmatter.get("author") != "agent":
                continue
            if "instructed_by" in doc.frontmatter:
                continue
            history = vault.doc_history(doc.path)
            if history:
                modified.append((doc.path, history[-1]))
    passed = bool(modified)
    evidence = [p for pair in modified[:2] for p in pair]
    note = f"{len(modified)} uninstructed agent self-model modifications"
    return ConditionResult("C6", CONDITION_TITLES["C6"], passed,
                           evidence if passed else [], note)
