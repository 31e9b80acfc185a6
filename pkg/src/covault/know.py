"""Slow-cadence generators: portrait, profile triad, delta, scout, claims.

These run inside the weekly tick. Profiles are assembled deterministically
from the streams; portrait, delta, and scout bodies come through the
gateway so a scripted scenario can pin them exactly.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

from .analytics import delta_reducibility
from .archetypes import ArchetypeEngine
from .gateway import CompletionRequest, Gateway, ModelProfile
from .reflexion import ReflexionStack
from .schemas import DIMENSIONS
from .vault import MarkdownDoc, Vault
from .weeks import in_week, week_end

DELTA_SECTIONS = ("Focus Shift", "Calibration Arc", "Partnership Alignment")

SCOUT_SECTIONS = ("Executive Summary", "Top Findings", "Papers to Read",
                  "Trend Watch", "Recommended Next Build")

PROPOSALS = ("code", "adr", "none")


class KnowError(Exception):
    pass


@dataclass
class PartnerClaim:
    ts: str
    text: str
    dimension: str
    source_interaction_id: str
    modality_tag: str | None = None
    needs_review: bool = False


@dataclass
class ScoutFinding:
    title: str
    source_ref: str
    applicable: int
    novel: int
    credible: int
    situating_note: str
    proposal: str = "none"

    def __post_init__(self):
        for rating in (self.applicable, self.novel, self.credible):
            if not 1 <= int(rating) <= 5:
                raise KnowError(f"scout rating out of 1..5: {rating}")
        if self.proposal not in PROPOSALS:
            raise KnowError(f"unknown proposal kind {self.proposal!r}")


@dataclass
class ScoutDigest:
    iso_week: str
    executive_summary: str
    findings: list[ScoutFinding] = field(default_factory=list)
    papers_to_read: list[str] = field(default_factory=list)
    trend_watch: str = ""
    recommended_next_build: str = ""
    adr_refs: list[str] = field(default_factory=list)
    diagnostics: list[str] = field(default_factory=list)


class KnowLoop:
    def __init__(self, vault: Vault, gateway: Gateway, profile: ModelProfile,
                 engine: ArchetypeEngine, stack: ReflexionStack,
                 agent_name: str = "alicia",
                 reducibility_threshold: float = 0.9):
        self.vault = vault
        self.gateway = gateway
        self.profile = profile
        self.engine = engine
        self.stack = stack
        self.agent_name = agent_name
        self.reducibility_threshold = reducibility_threshold

    # -- helpers -----------------------------------------------------------

    def _week_chats(self, iso_week: str) -> list[dict]:
        out = []
        for record in self.vault.read_stream("interactions"):
            if record.payload.get("type") == "chat" and in_week(record.ts, iso_week):
                entry = dict(record.payload)
                entry["ts"] = record.ts
                out.append(entry)
        return out

    def _week_claims(self, iso_week: str) -> list[dict]:
        out = []
        for record in self.vault.read_stream("partner_learnings"):
            if in_week(record.ts, iso_week):
                entry = dict(record.payload)
                entry["ts"] = record.ts
                out.append(entry)
        return out

    def profile_path(self, subject: str, iso_week: str) -> str:
        name = self.agent_name if subject == "agent" else "partner"
        return f"Self/Profiles/{iso_week}-{name}.md"

    def delta_path(self, iso_week: str) -> str:
        return f"Self/Profiles/{iso_week}-delta.md"

    def portrait_path(self, iso_week: str) -> str:
        return f"Wisdom/Lived/{iso_week}-portrait.md"

    # -- self-portrait -------------------------------------------------------

    def generate_self_portrait(self, iso_week: str) -> MarkdownDoc:
        """Weekly narrative self-model; cites a prior artifact when one exists."""
        chats = self._week_chats(iso_week)
        if not chats:
            raise KnowError(f"no interactions in {iso_week}")
        excerpts = "\n".join(f"- {c['human_text'][:160]}" for c in chats[:12])
        completion = self.gateway.complete(CompletionRequest(
            messages=[("human",
                       f"Write this week's self-portrait ({iso_week}) from these "
                       f"moments:\n{excerpts}")],
            depth="know", archetype="Beatrice"), self.profile)
        body = completion.text.rstrip() + "\n"

        prior = self._latest_prior_artifact(iso_week)
        if prior is not None and prior not in body:
            body += f"\nContinuity: builds on {prior}.\n"

        doc = MarkdownDoc(
            path=self.portrait_path(iso_week), kind="self_portrait",
            frontmatter={"kind": "self_portrait", "author": "agent",
                         "iso_week": iso_week,
                         "created_ts": self.vault.clock.now_ts(),
                         "generator": "know_tick", "archetype": "Beatrice",
                         "model_id": completion.model_id},
            body=body)
        self.vault.write_doc(doc)
        return doc

    def _latest_prior_artifact(self, iso_week: str) -> str | None:
        best: tuple[str, str] | None = None
        for doc in self.vault.all_docs():
            week = doc.frontmatter.get("iso_week")
            if not week or str(week) >= iso_week:
                continue
            key = (str(week), doc.path)
            if best is None or key > best:
                best = key
        return best[1] if best else None

    # -- profiles ---------------------------------------------------------------

    def generate_profile(self, subject: str, iso_week: str,
                         force: bool = False) -> MarkdownDoc:
        if subject not in ("agent", "partner"):
            raise KnowError(f"subject must be agent or partner, got {subject!r}")
        if not force and self.vault.clock.now() < week_end(iso_week):
            raise KnowError(f"week {iso_week} is not closed yet")
        body = (self._agent_profile_body(iso_week) if subject == "agent"
                else self._partner_profile_body(iso_week))
        kind = "self_profile" if subject == "agent" else "partner_profile"
        doc = MarkdownDoc(
            path=self.profile_path(subject, iso_week), kind=kind,
            frontmatter={"kind": kind, "author": "agent", "iso_week": iso_week,
                         "created_ts": self.vault.clock.now_ts(),
                         "generator": "know_tick"},
            body=body)
        self.vault.write_doc(doc)
        return doc

    def _agent_profile_body(self, iso_week: str) -> str:
        chats = self._week_chats(iso_week)
        dist = self.engine.weekly_distribution(iso_week)
        total = sum(dist.values())
        lines = [f"# Agent profile {iso_week}", "", "## Loops", "",
                 f"- listen: {len(chats)} interactions handled",
                 f"- notice: {self._episode_count(iso_week)} episodes scored",
                 f"- know: weekly generators ran for {iso_week}", "",
                 "## Archetype Balance", ""]
        if total:
            for name in sorted(dist, key=lambda n: (-dist[n], n)):
                if dist[name]:
                    share = dist[name] / total
                    lines.append(f"- {name}: {dist[name]} invocations ({share:.0%})")
        else:
            lines.append("- no invocations this week")
        verdicts = self.stack.validations(window=iso_week)
        lines += ["", "## Improve Status", ""]
        if verdicts:
            for v in verdicts:
                lines.append(f"- {v['run_id']}: delta={v['delta']} {v['assessment']}")
        else:
            lines.append("- no validated runs this week")
        lines += ["", "## Partner Signals", "",
                  ("Claims recorded in "
                   f"{self.vault.layout.channels['partner_learnings'].path} "
                   "informed this profile."), ""]
        return "\n".join(lines)

    def _episode_count(self, iso_week: str) -> int:
        return sum(1 for e in self.stack.episodes().values()
                   if e.get("week") == iso_week)

    def _partner_profile_body(self, iso_week: str) -> str:
        claims = self._week_claims(iso_week)
        by_dim: dict[str, list[dict]] = {d: [] for d in DIMENSIONS}
        for claim in claims:
            by_dim.setdefault(claim["dimension"], []).append(claim)
        lines = [f"# Partner profile {iso_week}", ""]
        for dim in DIMENSIONS:
            lines.append(f"## {dim.capitalize()}")
            lines.append("")
            if by_dim[dim]:
                for claim in by_dim[dim]:
                    marker = " (needs review)" if claim.get("needs_review") else ""
                    lines.append(f"- {claim['text']}{marker}")
            else:
                lines.append("- (none)")
            lines.append("")
        lines += ["## Sources", ""]
        journal = self.vault.query_docs("growth_journal",
                                        week_range=(iso_week, iso_week))
        for doc in journal:
            lines.append(f"- {doc.path}")
        lines.append(f"- {len(claims)} claims from the week's conversations")
        lines.append("")
        return "\n".join(lines)

    # -- delta ---------------------------------------------------------------------

    def generate_delta(self, iso_week: str) -> MarkdownDoc:
        """Partnership-level weekly document with the three required sections.

        If the generated text reduces to the two profiles, one regeneration
        is attempted; a still-reducible delta is written with a visible
        `reducible: true` flag rather than suppressed.
        """
        agent_path = self.profile_path("agent", iso_week)
        partner_path = self.profile_path("partner", iso_week)
        if not self.vault.doc_exists(agent_path) or not self.vault.doc_exists(partner_path):
            raise KnowError(f"profiles for {iso_week} must exist before the delta")
        agent_profile = self.vault.read_doc(agent_path)
        partner_profile = self.vault.read_doc(partner_path)

        body, model_id = self._delta_completion(iso_week)
        result = delta_reducibility(body, (agent_profile.body, partner_profile.body),
                                    threshold=self.reducibility_threshold)
        if result.reducible:
            body, model_id = self._delta_completion(iso_week)
            result = delta_reducibility(body, (agent_profile.body, partner_profile.body),
                                        threshold=self.reducibility_threshold)

        frontmatter = {"kind": "delta", "author": "agent", "iso_week": iso_week,
                       "created_ts": self.vault.clock.now_ts(),
                       "generator": "know_tick", "model_id": model_id}
        if result.reducible:
            frontmatter["reducible"] = True
        doc = MarkdownDoc(path=self.delta_path(iso_week), kind="delta",
                          frontmatter=frontmatter, body=body)
        self.vault.write_doc(doc)
        return doc

    def _delta_completion(self, iso_week: str) -> tuple[str, str]:
        completion = self.gateway.complete(CompletionRequest(
            messages=[("human",
                       f"Write the {iso_week} partnership delta with sections "
                       f"{', '.join(DELTA_SECTIONS)}.")],
            depth="know"), self.profile)
        body = completion.text.rstrip() + "\n"
        missing = [s for s in DELTA_SECTIONS if f"## {s}" not in body]
        if missing:
            raise KnowError(f"delta is missing sections: {missing}")
        return body, completion.model_id

    # -- architecture scout -----------------------------------------------------------

    def run_scout(self, iso_week: str, corpus: list[dict]) -> ScoutDigest:
        """Ingest the weekly corpus and write the five-section digest."""
        diagnostics = []
        items = []
        for i, item in enumerate(corpus):
            if not isinstance(item, dict) or "title" not in item or "source_ref" not in item:
                diagnostics.append(f"corpus item {i} malformed; skipped")
                continue
            items.append(item)

        if items:
            listing = "\n".join(
                f"- {item['title']} ({item['source_ref']}) tags={item.get('tags', '')}"
                for item in items)
            completion = self.gateway.complete(CompletionRequest(
                messages=[("human",
                           "Review this week's research corpus. Reply as JSON with "
                           "executive_summary, findings (title, source_ref, "
                           "applicable, novel, credible, situating_note, proposal), "
                           f"papers_to_read, trend_watch, recommended_next_build.\n{listing}")],
                depth="know"), self.profile)
            digest = self._parse_scout_response(iso_week, completion.text)
            model_id = completion.model_id
        else:
            digest = ScoutDigest(
                iso_week=iso_week,
                executive_summary="No sources were available this week.",
                recommended_next_build="none")
            model_id = None
        digest.diagnostics = diagnostics

        for finding in digest.findings:
            if finding.proposal == "adr":
                adr_id = f"adr-{iso_week.lower()}-{_slug(finding.title)}"
                path = self.stack.propose_adr(
                    adr_id, finding.title,
                    f"Proposed from scout finding: {finding.situating_note}\n"
                    f"Source: {finding.source_ref}\n",
                    source=self._digest_path())
                digest.adr_refs.append(path)

        doc = MarkdownDoc(
            path=self._digest_path(), kind="scout_digest",
            frontmatter={"kind": "scout_digest", "author": "agent",
                         "iso_week": iso_week,
                         "created_ts": self.vault.clock.now_ts(),
                         "generator": "know_tick",
                         **({"model_id": model_id} if model_id else {})},
            body=render_scout_digest(digest))
        self.vault.write_doc(doc)
        return digest

    def _digest_path(self) -> str:
        day = self.vault.clock.now_ts()[:10]
        return f"architecture-scout/{day}.md"

    def _parse_scout_response(self, iso_week: str, text: str) -> ScoutDigest:
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise KnowError(f"scout response is not valid JSON: {exc}") from exc
        findings = [
            ScoutFinding(
                title=str(f["title"]), source_ref=str(f["source_ref"]),
                applicable=int(f["applicable"]), novel=int(f["novel"]),
                credible=int(f["credible"]),
                situating_note=str(f.get("situating_note", "")),
                proposal=str(f.get("proposal", "none")),
            )
            for f in raw.get("findings", [])
        ]
        return ScoutDigest(
            iso_week=iso_week,
            executive_summary=str(raw.get("executive_summary", "")),
            findings=findings,
            papers_to_read=[str(p) for p in raw.get("papers_to_read", [])],
            trend_watch=str(raw.get("trend_watch", "")),
            recommended_next_build=str(raw.get("recommended_next_build", "")),
        )

    # -- partner claims -------------------------------------------------------------------

    def extract_claims(self, interaction_id: str, human_text: str,
                       modality_tag: str | None = None) -> list[PartnerClaim]:
        """One-sentence claims about the partner, coded into eight dimensions."""
        if not human_text.strip():
            return []
        if modality_tag is None and "[voice]" in human_text:
            modality_tag = "voice"
        prompt = ("Extract one-sentence claims about the partner from this "
                  "message. Reply as a JSON array of {text, dimension, "
                  "modality_tag} with dimension in "
                  + ", ".join(DIMENSIONS) + f".\nMessage: {human_text}")
        completion = self.gateway.complete(CompletionRequest(
            messages=[("human", prompt)], depth="notice"), self.profile)
        try:
            raw = json.loads(completion.text)
        except json.JSONDecodeError:
            raw = []
        claims = []
        for entry in raw if isinstance(raw, list) else []:
            text = str(entry.get("text", "")).strip()
            if not text:
                continue
            dimension = str(entry.get("dimension", ""))
            needs_review = dimension not in DIMENSIONS
            if needs_review:
                dimension = "identity"
            tag = entry.get("modality_tag") or modality_tag
            payload = {
                "text": text, "dimension": dimension,
                "source_interaction_id": interaction_id,
            }
            if tag:
                payload["modality_tag"] = str(tag)
            if needs_review:
                payload["needs_review"] = True
            record = self.vault.append_record("partner_learnings", "agent", payload,
                                              model_id=completion.model_id)
            claims.append(PartnerClaim(
                ts=record.ts, text=text, dimension=dimension,
                source_interaction_id=interaction_id,
                modality_tag=str(tag) if tag else None,
                needs_review=needs_review))
        return claims


def render_scout_digest(digest: ScoutDigest) -> str:
    lines = [f"# Architecture scout {digest.iso_week}", "",
             "## Executive Summary", "", digest.executive_summary or "(empty)", "",
             "## Top Findings", ""]
    if digest.findings:
        for f in digest.findings:
            lines.append(f"- **{f.title}** ({f.source_ref}) — "
                         f"applicable {f.applicable}/5, novel {f.novel}/5, "
                         f"credible {f.credible}/5; proposal: {f.proposal}")
            if f.situating_note:
                lines.append(f"  - {f.situating_note}")
    else:
        lines.append("- (none)")
    for ref in digest.adr_refs:
        lines.append(f"  - proposed: {ref}")
    lines += ["", "## Papers to Read", ""]
    lines += [f"- {p}" for p in digest.papers_to_read] or ["- (none)"]
    lines += ["", "## Trend Watch", "", digest.trend_watch or "(quiet week)", "",
              "## Recommended Next Build", "",
              digest.recommended_next_build or "(none)", ""]
    if digest.diagnostics:
        lines += ["## Diagnostics", ""]
        lines += [f"- {d}" for d in digest.diagnostics]
        lines.append("")
    return "\n".join(lines)


def parse_scout_digest(doc: MarkdownDoc) -> ScoutDigest:
    """Round-trip a digest doc back into its structured form."""
    sections: dict[str, list[str]] = {}
    current = None
    for line in doc.body.splitlines():
        if line.startswith("## "):
            current = line[3:].strip()
            sections[current] = []
        elif current is not None:
            sections[current].append(line)
    missing = [s for s in SCOUT_SECTIONS if s not in sections]
    if missing:
        raise KnowError(f"digest missing sections: {missing}")

    findings = []
    pattern = re.compile(
        r"- \*\*(?P<title>.+)\*\* \((?P<ref>.+)\) — applicable (?P<a>\d)/5, "
        r"novel (?P<n>\d)/5, credible (?P<c>\d)/5; proposal: (?P<p>\w+)")
    note_next: ScoutFinding | None = None
    for line in sections["Top Findings"]:
        match = pattern.match(line.strip()) if line.strip().startswith("- **") else None
        if match:
            note_next = ScoutFinding(
                title=match["title"], source_ref=match["ref"],
                applicable=int(match["a"]), novel=int(match["n"]),
                credible=int(match["c"]), situating_note="", proposal=match["p"])
            findings.append(note_next)
        elif line.strip().startswith("- ") and note_next is not None:
            note_next.situating_note = line.strip()[2:]

    papers = [l.strip()[2:] for l in sections["Papers to Read"]
              if l.strip().startswith("- ") and l.strip() != "- (none)"]
    return ScoutDigest(
        iso_week=str(doc.frontmatter.get("iso_week", "")),
        executive_summary="\n".join(sections["Executive Summary"]).strip(),
        findings=findings,
        papers_to_read=papers,
        trend_watch="\n".join(sections["Trend Watch"]).strip(),
        recommended_next_build="\n".join(sections["Recommended Next Build"]).strip(),
    )


def _slug(text: str) -> str:
    return re.sub(r"[^a-z0-9]+", "-", text.lower()).strip("-")[:40]
