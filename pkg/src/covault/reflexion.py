"""The three orders of reflexion.

First order: every interaction is scored against the constitution, one TSV
row per principle. Second order: /improve rewrites skill prompts, guarded
so learning history is never silently erased. Third order: a weekly
meta-reflexion entry diagnoses whether the improver itself is improving,
quoting its verdicts verbatim instead of masking them.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field

from .clock import parse_ts
from .gateway import CompletionRequest, Gateway, GatewayError, ModelProfile
from .vault import MarkdownDoc, Vault
from .weeks import in_week

CONSTITUTION_PATH = "Constitution/constitution.md"

DEFAULT_PRINCIPLES = [
    ("Continuity", "Carry forward what came before; cite prior artifacts instead of restarting."),
    ("Witness first", "Describe what is happening for the partner before advising what to do."),
    ("Honest limits", "Never fabricate efficacy, certainty, or improvement that was not observed."),
    ("Vault visibility", "Every durable state lands on disk as text the partner can read."),
    ("Partner voice", "Preserve the partner's own phrasing when capturing claims about them."),
    ("Proportion", "Match the depth of the response to the depth of the question."),
    ("Mode balance", "No single interpretive mode crowds out the others for long."),
    ("Reversibility", "Changes to self-structure are proposed and reviewable before applied."),
    ("Provenance", "Record which model and which mode produced each output."),
    ("Care with shadow", "Approach avoided or difficult material without forcing it open."),
]

EVOLUTION_CLAUSE = ("Amendment clause: principles are added or revised only "
                    "through an adopted ADR; either partner may propose one.")

SCORING_GUIDE = ("Scoring guide: every interaction is scored 1-5 against each "
                 "principle; 1 = violated, 3 = upheld adequately, 5 = exemplary. "
                 "Scores append to constitution_scores.tsv with a one-line rationale.")

ASSESSMENTS = ("improved", "regressed", "no_change", "insufficient_data")

DEFAULT_MIN_PAIRS = 5
NO_CHANGE_BAND_PP = 0.005


class ReflexionError(Exception):
    pass


class ScoringRejected(ReflexionError):
    """Backend returned unusable scores; the interaction stays unscored."""


class ResetBlocked(ReflexionError):
    """A revision would erase learning history without human force."""


@dataclass
class Constitution:
    version: str
    principles: list[tuple[int, str, str]]  # (id, title, text)
    evolution_clause: str = EVOLUTION_CLAUSE

    def __post_init__(self):
        ids = [pid for pid, _, _ in self.principles]
        if ids != list(range(1, len(ids) + 1)):
            raise ReflexionError("principle ids must be dense 1..N")

    @property
    def size(self) -> int:
        return len(self.principles)


@dataclass
class ConstitutionScore:
    interaction_id: str
    principle_id: int
    score: int
    rationale: str


@dataclass
class Skill:
    skill_id: str
    prompt_text: str
    episode_count: int = 0
    metric_history: list[tuple[str, float]] = field(default_factory=list)


@dataclass
class SkillRevision:
    run_id: str
    skill_id: str
    new_prompt: str
    reset_history: bool
    blocked: bool
    applied: bool


@dataclass
class ImproveEpisode:
    run_id: str
    skill_id: str
    before_metric: float | None
    after_metric: float | None
    paired_samples: int
    delta: float
    assessment: str


@dataclass
class MetaReflexionEntry:
    ts: str
    window: str
    diagnosis: str
    proposed_meta_improvements: list[str]
    evidence: list[str]


def default_constitution() -> Constitution:
    principles = [(i + 1, title, text) for i, (title, text) in enumerate(DEFAULT_PRINCIPLES)]
    return Constitution(version="1.0", principles=principles)


def render_constitution(constitution: Constitution) -> str:
    lines = ["# Constitution", ""]
    lines.append("## Principles")
    lines.append("")
    for pid, title, text in constitution.principles:
        lines.append(f"{pid}. **{title}** — {text}")
    lines += ["", "## Operational clauses", "", SCORING_GUIDE, "", constitution.evolution_clause, ""]
    return "\n".join(lines)


def parse_constitution(doc: MarkdownDoc) -> Constitution:
    version = str(doc.frontmatter.get("version", "1.0"))
    principles = []
    for line in doc.body.splitlines():
        line = line.strip()
        if not line or not line[0].isdigit() or "**" not in line:
            continue
        num, _, rest = line.partition(".")
        try:
            pid = int(num)
        except ValueError:
            continue
        title = rest.split("**")[1] if rest.count("**") >= 2 else ""
        text = rest.split("—", 1)[1].strip() if "—" in rest else ""
        principles.append((pid, title, text))
    if not principles:
        raise ReflexionError(f"no principles found in {doc.path}")
    return Constitution(version=version, principles=principles)


class ReflexionStack:
    def __init__(self, vault: Vault, gateway: Gateway | None = None,
                 profile: ModelProfile | None = None,
                 min_pairs: int = DEFAULT_MIN_PAIRS):
        self.vault = vault
        self.gateway = gateway
        self.profile = profile
        self.min_pairs = min_pairs
        self._improve_locks: dict[str, threading.Lock] = {}
        self._improve_locks_guard = threading.Lock()

    def _improve_lock(self, skill_id: str) -> threading.Lock:
        with self._improve_locks_guard:
            return self._improve_locks.setdefault(skill_id, threading.Lock())

    # -- constitution --------------------------------------------------------

    def install_constitution(self, constitution: Constitution | None = None) -> str:
        constitution = constitution or default_constitution()
        doc = MarkdownDoc(
            path=CONSTITUTION_PATH, kind="constitution",
            frontmatter={
                "kind": "constitution", "author": "agent",
                "created_ts": self.vault.clock.now_ts(),
                "version": constitution.version,
            },
            body=render_constitution(constitution),
        )
        return self.vault.write_doc(doc)

    def load_constitution(self) -> Constitution:
        return parse_constitution(self.vault.read_doc(CONSTITUTION_PATH))

    # -- first order -----------------------------------------------------------

    def score_interaction(self, interaction_id: str, transcript: str,
                          constitution: Constitution) -> list[ConstitutionScore]:
        """Score one interaction against every principle; all rows or none."""
        if self.gateway is None or self.profile is None:
            raise ReflexionError("scoring requires a gateway and profile")
        principle_list = "\n".join(
            f"{pid}. {title}: {text}" for pid, title, text in constitution.principles)
        prompt = (
            "Score the following interaction 1-5 against each principle. "
            "Reply as a JSON array of {\"principle_id\", \"score\", \"rationale\"}.\n"
            f"Principles:\n{principle_list}\n\nInteraction:\n{transcript}"
        )
        completion = self.gateway.complete(
            CompletionRequest(messages=[("human", prompt)], depth="listen"),
            self.profile)
        scores = self._parse_scores(interaction_id, completion.text, constitution.size)
        for item in scores:
            self.vault.append_record("constitution_scores", "agent", {
                "interaction_id": item.interaction_id,
                "principle_id": item.principle_id,
                "score": item.score,
                "rationale": item.rationale,
            }, model_id=completion.model_id)
        return scores

    @staticmethod
    def _parse_scores(interaction_id: str, text: str, n: int) -> list[ConstitutionScore]:
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ScoringRejected(f"scores are not valid JSON: {exc}") from exc
        if not isinstance(raw, list) or len(raw) != n:
            raise ScoringRejected(f"expected {n} score entries, got "
                                  f"{len(raw) if isinstance(raw, list) else type(raw).__name__}")
        by_id = {}
        for entry in raw:
            pid = entry.get("principle_id")
            score = entry.get("score")
            if not isinstance(pid, int) or pid in by_id:
                raise ScoringRejected(f"bad or duplicate principle_id {pid!r}")
            if not isinstance(score, int) or isinstance(score, bool) or not 1 <= score <= 5:
                raise ScoringRejected(f"score out of range for principle {pid}: {score!r}")
            by_id[pid] = ConstitutionScore(
                interaction_id=interaction_id, principle_id=pid, score=score,
                rationale=str(entry.get("rationale", "")))
        if sorted(by_id) != list(range(1, n + 1)):
            raise ScoringRejected("principle ids must cover 1..N exactly")
        return [by_id[pid] for pid in range(1, n + 1)]

    def interaction_means(self) -> dict[str, float]:
        sums: dict[str, list[int]] = {}
        for record in self.vault.read_stream("constitution_scores"):
            pid = record.payload["interaction_id"]
            sums.setdefault(pid, []).append(record.payload["score"])
        return {pid: sum(vals) / len(vals) for pid, vals in sums.items()}

    def score_episode(self, episode_id: str, interaction_ids: list[str],
                      skill_id: str | None = None, week: str | None = None) -> dict:
        """Aggregate an episode: mean of interaction means, two decimals."""
        if not interaction_ids:
            raise ReflexionError("episode must contain at least one interaction")
        means = self.interaction_means()
        scored = [means[i] for i in interaction_ids if i in means]
        score = round(sum(scored) / len(scored), 2) if scored else None
        book = self.vault.read_json_channel("episode_scores")
        episodes = book.setdefault("episodes", {})
        episodes[episode_id] = {
            "score": score,
            "interaction_ids": list(interaction_ids),
            "ts": self.vault.clock.now_ts(),
            "skill_id": skill_id,
            "week": week,
        }
        self.vault.write_json_channel("episode_scores", book)
        return episodes[episode_id]

    def episodes(self) -> dict:
        return self.vault.read_json_channel("episode_scores").get("episodes", {})

    # -- skills -----------------------------------------------------------------

    def create_skill(self, skill_id: str, prompt_text: str) -> Skill:
        if self.load_skill(skill_id) is not None:
            raise ReflexionError(f"skill {skill_id!r} already exists")
        skill = Skill(skill_id=skill_id, prompt_text=prompt_text)
        self._snapshot(skill)
        return skill

    def load_skill(self, skill_id: str) -> Skill | None:
        latest = None
        for record in self.vault.read_stream("skills"):
            if record.payload.get("skill_id") == skill_id:
                latest = record
        if latest is None:
            return None
        p = latest.payload
        return Skill(
            skill_id=p["skill_id"], prompt_text=p["prompt_text"],
            episode_count=p["episode_count"],
            metric_history=[(ts, value) for ts, value in p["metric_history"]],
        )

    def _snapshot(self, skill: Skill, reset_record_seq: int | None = None) -> None:
        previous = self.load_skill(skill.skill_id)
        if (previous is not None and skill.episode_count < previous.episode_count
                and reset_record_seq is None):
            raise ResetBlocked(
                f"snapshot would reduce episode_count {previous.episode_count} -> "
                f"{skill.episode_count} without a human-authored reset record")
        payload = {
            "skill_id": skill.skill_id,
            "prompt_text": skill.prompt_text,
            "episode_count": skill.episode_count,
            "metric_history": [[ts, value] for ts, value in skill.metric_history],
        }
        if reset_record_seq is not None:
            payload["reset_record_seq"] = reset_record_seq
        self.vault.append_record("skills", "agent", payload)

    def attribute_episode(self, skill_id: str) -> None:
        skill = self.load_skill(skill_id)
        if skill is None:
            raise ReflexionError(f"unknown skill {skill_id!r}")
        skill.episode_count += 1
        self._snapshot(skill)

    def record_metric(self, skill_id: str, value: float) -> None:
        skill = self.load_skill(skill_id)
        if skill is None:
            raise ReflexionError(f"unknown skill {skill_id!r}")
        skill.metric_history.append((self.vault.clock.now_ts(), float(value)))
        self._snapshot(skill)

    # -- second order -------------------------------------------------------------

    def _next_run_id(self) -> str:
        runs = [r for r in self.vault.read_stream("improve_runs")
                if r.payload.get("kind") == "proposal"]
        return f"run-{len(runs) + 1:04d}"

    def run_improve(self, skill_id: str, force_reset: bool = False) -> SkillRevision:
        """Propose (and, when permitted, apply) a rewrite of a skill prompt.

        Exclusive per skill: two concurrent improve runs on the same skill
        serialize on an advisory lock.
        """
        with self._improve_lock(skill_id):
            return self._run_improve_locked(skill_id, force_reset)

    def _run_improve_locked(self, skill_id: str, force_reset: bool) -> SkillRevision:
        if self.gateway is None or self.profile is None:
            raise ReflexionError("improve requires a gateway and profile")
        skill = self.load_skill(skill_id)
        if skill is None:
            raise ReflexionError(f"unknown skill {skill_id!r}")
        episodes = [e for e in self.episodes().values() if e.get("skill_id") == skill_id]
        if not episodes and skill.episode_count == 0:
            raise ReflexionError(f"skill {skill_id!r} has no episodes to learn from")

        summary = "; ".join(
            f"episode score {e['score']}" for e in episodes if e.get("score") is not None)
        prompt = (
            "Rewrite this skill prompt based on its episode record. Reply as JSON "
            "{\"prompt_text\": ..., \"reset_history\": bool}.\n"
            f"Current prompt: {skill.prompt_text}\nEpisodes: {summary or 'none scored'}")
        completion = self.gateway.complete(
            CompletionRequest(messages=[("human", prompt)], depth="notice"),
            self.profile)
        try:
            parsed = json.loads(completion.text)
            new_prompt = str(parsed["prompt_text"])
            reset_history = bool(parsed.get("reset_history", False))
        except (json.JSONDecodeError, KeyError, TypeError):
            new_prompt = completion.text
            reset_history = False

        run_id = self._next_run_id()
        blocked = reset_history and not force_reset and skill.episode_count > 0
        revision = SkillRevision(run_id=run_id, skill_id=skill_id,
                                 new_prompt=new_prompt, reset_history=reset_history,
                                 blocked=blocked, applied=False)
        before = skill.metric_history[-1][1] if skill.metric_history else None
        self.vault.append_record("improve_runs", "agent", {
            "run_id": run_id, "skill_id": skill_id, "kind": "proposal",
            "new_prompt": new_prompt, "reset_history": reset_history,
            "blocked": blocked, "before_metric": before,
        }, model_id=completion.model_id)

        if not blocked:
            self._apply(skill, revision, force_reset)
            revision.applied = True
        return revision

    def _apply(self, skill: Skill, revision: SkillRevision, force_reset: bool) -> None:
        reset_seq = None
        if revision.reset_history and force_reset:
            reset = self.vault.append_record("interactions", "human", {
                "interaction_id": f"reset-{revision.run_id}",
                "type": "skill_reset",
                "skill_id": skill.skill_id,
                "run_id": revision.run_id,
            })
            reset_seq = reset.seq
            skill.episode_count = 0
            skill.metric_history = []
        skill.prompt_text = revision.new_prompt
        self._snapshot(skill, reset_record_seq=reset_seq)
        self.vault.append_record("improve_runs", "agent", {
            "run_id": revision.run_id, "skill_id": skill.skill_id, "kind": "applied",
            "reset_record_seq": reset_seq,
        })

    def validate_improve(self, run_id: str) -> ImproveEpisode:
        """Honest effectiveness verdict for one improve run.

        Fewer paired samples than min_pairs can never produce a directional
        claim: the verdict is exactly (delta=0.0, insufficient_data).
        """
        proposal = None
        for record in self.vault.read_stream("improve_runs"):
            if record.payload.get("run_id") == run_id and record.payload.get("kind") == "proposal":
                proposal = record
        if proposal is None:
            raise ReflexionError(f"unknown improve run {run_id!r}")
        skill_id = proposal.payload["skill_id"]
        skill = self.load_skill(skill_id)
        history = skill.metric_history if skill else []
        run_instant = parse_ts(proposal.ts)
        before_points = [v for ts, v in history if parse_ts(ts) <= run_instant]
        after_points = [v for ts, v in history if parse_ts(ts) > run_instant]
        paired = min(len(before_points), len(after_points))
        before = before_points[-1] if before_points else None
        after = after_points[-1] if after_points else None

        if paired < self.min_pairs:
            episode = ImproveEpisode(run_id=run_id, skill_id=skill_id,
                                     before_metric=before, after_metric=after,
                                     paired_samples=paired, delta=0.0,
                                     assessment="insufficient_data")
        else:
            delta_pp = (after - before) * 100.0
            if abs(delta_pp) < NO_CHANGE_BAND_PP:
                assessment = "no_change"
            elif delta_pp > 0:
                assessment = "improved"
            else:
                assessment = "regressed"
            episode = ImproveEpisode(run_id=run_id, skill_id=skill_id,
                                     before_metric=before, after_metric=after,
                                     paired_samples=paired,
                                     delta=round(delta_pp, 2), assessment=assessment)
        self.vault.append_record("improve_runs", "agent", {
            "run_id": run_id, "skill_id": skill_id, "kind": "validation",
            "before_metric": episode.before_metric,
            "after_metric": episode.after_metric,
            "paired_samples": episode.paired_samples,
            "delta": episode.delta, "assessment": episode.assessment,
        })
        return episode

    def validations(self, window: str | None = None) -> list[dict]:
        out = []
        for record in self.vault.read_stream("improve_runs"):
            if record.payload.get("kind") != "validation":
                continue
            if window is not None and not in_week(record.ts, window):
                continue
            entry = dict(record.payload)
            entry["ts"] = record.ts
            out.append(entry)
        return out

    # -- third order ------------------------------------------------------------

    def write_meta_reflexion(self, window: str) -> MetaReflexionEntry:
        """Append the weekly diagnosis of the improver to the meta log."""
        verdicts = self.validations(window=window)
        if not verdicts:
            raise ReflexionError(f"no validated improve runs in {window}")
        diagnosis = ""
        improvements: list[str] = []
        if self.gateway is not None and self.profile is not None:
            lines = "; ".join(
                f"{v['run_id']} delta={v['delta']} {v['assessment']}" for v in verdicts)
            prompt = ("Diagnose whether the improve process is itself improving. "
                      "Reply as JSON {\"diagnosis\": ..., "
                      "\"proposed_meta_improvements\": [...]}.\n"
                      f"This week's verdicts: {lines}")
            try:
                completion = self.gateway.complete(
                    CompletionRequest(messages=[("human", prompt)], depth="notice"),
                    self.profile)
                try:
                    parsed = json.loads(completion.text)
                    diagnosis = str(parsed.get("diagnosis", completion.text))
                    improvements = [str(x) for x in parsed.get("proposed_meta_improvements", [])]
                except json.JSONDecodeError:
                    diagnosis = completion.text
            except GatewayError as exc:
                diagnosis = f"(gateway unavailable: {exc})"
        if not diagnosis:
            diagnosis = "No diagnosis produced."

        ts = self.vault.clock.now_ts()
        lines = [f"## {window} — third-order review ({ts})", "",
                 f"Diagnosis: {diagnosis}", "", "Verdicts:"]
        for v in verdicts:
            lines.append(f"- {v['run_id']} {v['skill_id']}: delta={v['delta']} "
                         f"assessment={v['assessment']} paired={v['paired_samples']}")
        if improvements:
            lines += ["", "Proposed meta-improvements:"]
            lines += [f"- {item}" for item in improvements]
        lines.append("")
        self.vault.append_markdown_log("meta_reflexion", "\n".join(lines) + "\n")
        return MetaReflexionEntry(
            ts=ts, window=window, diagnosis=diagnosis,
            proposed_meta_improvements=improvements,
            evidence=[v["run_id"] for v in verdicts])

    # -- ADRs and constitution evolution -------------------------------------------

    def propose_adr(self, adr_id: str, title: str, body: str,
                    source: str | None = None) -> str:
        frontmatter = {
            "kind": "adr", "author": "agent", "status": "proposed",
            "created_ts": self.vault.clock.now_ts(), "title": title,
        }
        if source:
            frontmatter["source"] = source
        doc = MarkdownDoc(path=f"ADRs/{adr_id}.md", kind="adr",
                          frontmatter=frontmatter, body=body)
        return self.vault.write_doc(doc)

    def decide_adr(self, adr_id: str, decision: str) -> dict:
        """Record a human adopt/reject decision; adoption bumps the constitution."""
        if decision not in ("adopted", "rejected"):
            raise ReflexionError(f"decision must be adopted or rejected, got {decision!r}")
        relpath = f"ADRs/{adr_id}.md"
        doc = self.vault.read_doc(relpath)
        if doc.frontmatter.get("status") != "proposed":
            raise ReflexionError(
                f"ADR {adr_id} already decided: {doc.frontmatter.get('status')}")
        doc.frontmatter["status"] = decision
        doc.frontmatter["decided_ts"] = self.vault.clock.now_ts()
        self.vault.write_doc(doc)
        result = {"adr_id": adr_id, "status": decision}
        if decision == "adopted":
            result["constitution_version"] = self._amend_constitution(doc)
        return result

    def _amend_constitution(self, adr: MarkdownDoc) -> str:
        doc = self.vault.read_doc(CONSTITUTION_PATH)
        version = str(doc.frontmatter.get("version", "1.0"))
        major, _, minor = version.partition(".")
        new_version = f"{major}.{int(minor or 0) + 1}"
        doc.frontmatter["version"] = new_version
        title = adr.frontmatter.get("title", adr.path)
        doc.body += (f"\n## Amendment ({new_version})\n\n"
                     f"Adopted from {adr.path}: {title}\n")
        self.vault.write_doc(doc)
        return new_version
