"""The thin harness: Listen handling, Notice/Know ticks, and replay.

All state lives in the vault, so a restart loses nothing: tick idempotence
is keyed by what already exists on disk, never by an in-process flag.
"""

from __future__ import annotations

import json
import threading
from dataclasses import asdict, dataclass
from datetime import timedelta
from pathlib import Path

from .archetypes import ArchetypeEngine
from .clock import Clock, FixedClock, parse_ts
from .config import CONFIG_FILENAME, HarnessConfig
from .gateway import (
    BackendSpec,
    CompletionRequest,
    Gateway,
    GatewayError,
    ModelProfile,
)
from .know import KnowLoop
from .reflexion import ReflexionError, ReflexionStack, ScoringRejected
from .vault import Vault
from .weeks import iso_week_of, week_end, week_start

DEPTHS = ("listen", "notice", "know")


@dataclass
class InteractionRecord:
    interaction_id: str
    ts: str
    surface: str
    human_text: str
    agent_text: str
    archetype: str | None
    depth: str
    truncated: bool
    error: str | None = None
    scored: bool = False

    def to_dict(self) -> dict:
        return asdict(self)


class Harness:
    def __init__(self, vault: Vault, config: HarnessConfig, gateway: Gateway,
                 profile: ModelProfile):
        self.vault = vault
        self.config = config
        self.gateway = gateway
        self.profile = profile
        self.engine = ArchetypeEngine(vault)
        self.stack = ReflexionStack(vault, gateway=gateway, profile=profile,
                                    min_pairs=config.thresholds.min_pairs)
        self.know = KnowLoop(vault, gateway, profile, self.engine, self.stack,
                             agent_name=config.agent_name,
                             reducibility_threshold=config.thresholds.reducibility)
        self._listen_lock = threading.Lock()
        self._tick_lock = threading.Lock()

    # -- construction ------------------------------------------------------

    @classmethod
    def from_config(cls, config: HarnessConfig, clock: Clock | None = None) -> "Harness":
        vault = Vault(config.vault_root, clock=clock)
        gateway = Gateway()
        profile = build_profile(config)
        gateway.register_profile(profile)
        return cls(vault, config, gateway, profile)

    def init_vault(self) -> dict:
        """Create layout, constitution, archetype templates, default skill."""
        self.vault.ensure_layout()
        created = {"constitution": False, "templates": 0, "skill": False}
        if not self.vault.doc_exists("Constitution/constitution.md"):
            self.stack.install_constitution()
            created["constitution"] = True
        templates = self.engine.install_templates(self.vault.clock.now_ts())
        self.engine.registry = self.engine._load_registry()
        created["templates"] = len(templates)
        if self.stack.load_skill(self.config.default_skill) is None:
            self.stack.create_skill(self.config.default_skill,
                                    self.config.default_skill_prompt)
            created["skill"] = True
        # Vaults are self-contained: the scenario that drives a scripted
        # profile is copied in so the recorded config resolves anywhere.
        if self.config.scenario_path:
            source = Path(self.config.scenario_path)
            inside = self.vault.root.resolve() in source.resolve().parents
            if source.exists() and not inside:
                self.vault.put_file("scenario.json", source.read_text("utf-8"))
                self.config.scenario_path = str(self.vault.root / "scenario.json")
        self.vault.put_file(CONFIG_FILENAME, self.config.to_json(portable=True))
        return created

    # -- Listen ---------------------------------------------------------------

    def handle_message(self, surface: str, human_text: str) -> InteractionRecord:
        """One Listen-loop turn: select, complete, log, score."""
        if not human_text.strip():
            raise ValueError("human_text must be non-empty")
        with self._listen_lock:
            interaction_id = f"i-{len(self.vault.read_stream('interactions')) + 1:06d}"
            archetype = self.engine.select_archetype(
                [("human", human_text)], gateway=self.gateway, profile=self.profile)
            charter = self.engine.registry[archetype].charter
            error = None
            try:
                completion = self.gateway.complete(CompletionRequest(
                    messages=[("system", charter), ("human", human_text)],
                    depth="listen", archetype=archetype), self.profile)
                agent_text, truncated = completion.text, completion.truncated
                model_id = completion.model_id
            except GatewayError as exc:
                agent_text, truncated, model_id = "", False, None
                error = str(exc)

            payload = {
                "interaction_id": interaction_id, "type": "chat",
                "surface": surface, "human_text": human_text,
                "agent_text": agent_text, "depth": "listen",
                "truncated": truncated, "archetype": archetype if not error else None,
            }
            if error:
                payload["error"] = error
            record = self.vault.append_record("interactions", "human", payload,
                                              model_id=model_id)
            scored = False
            if not error:
                self.engine.log_invocation(archetype, interaction_id, surface,
                                           success=True, model_id=model_id)
                try:
                    self.stack.score_interaction(
                        interaction_id,
                        f"human: {human_text}\nagent: {agent_text}",
                        self.stack.load_constitution())
                    scored = True
                except (ScoringRejected, GatewayError, ReflexionError):
                    scored = False
            return InteractionRecord(
                interaction_id=interaction_id, ts=record.ts, surface=surface,
                human_text=human_text, agent_text=agent_text,
                archetype=archetype if not error else None, depth="listen",
                truncated=truncated, error=error, scored=scored)

    # -- Notice -----------------------------------------------------------------

    def notice_tick(self) -> dict:
        """Group new interactions into an episode; extract partner claims.

        Idempotent: the cursor lives in the episode book, so a re-run with
        no new interactions is a no-op.
        """
        with self._tick_lock:
            book = self.vault.read_json_channel("episode_scores")
            cursor = int(book.get("cursor", {}).get("interactions_seq", 0))
            fresh = [r for r in self.vault.read_stream("interactions", since_seq=cursor + 1)
                     if r.payload.get("type") == "chat"]
            new_cursor = max((r.seq for r in
                              self.vault.read_stream("interactions", since_seq=cursor + 1)),
                             default=cursor)
            if not fresh:
                if new_cursor != cursor:
                    book.setdefault("cursor", {})["interactions_seq"] = new_cursor
                    self.vault.write_json_channel("episode_scores", book)
                return {"status": "no-op", "episodes": 0, "claims": 0}

            episode_id = f"ep-{len(book.get('episodes', {})) + 1:04d}"
            interaction_ids = [r.payload["interaction_id"] for r in fresh]
            week = iso_week_of(fresh[-1].ts)
            self.stack.score_episode(episode_id, interaction_ids,
                                     skill_id=self.config.default_skill, week=week)
            self.stack.attribute_episode(self.config.default_skill)

            claims = 0
            for record in fresh:
                claims += len(self.know.extract_claims(
                    record.payload["interaction_id"], record.payload["human_text"]))

            book = self.vault.read_json_channel("episode_scores")
            book.setdefault("cursor", {})["interactions_seq"] = new_cursor
            self.vault.write_json_channel("episode_scores", book)
            return {"status": "ok", "episode": episode_id,
                    "interactions": len(fresh), "claims": claims}

    # -- Know --------------------------------------------------------------------

    def know_tick(self, iso_week: str | None = None) -> dict:
        """Weekly generators in order; each failure is isolated.

        Products are keyed by output path, so re-running a week skips what
        already exists.
        """
        with self._tick_lock:
            week = iso_week or iso_week_of(self.vault.clock.now())
            summary: dict = {"week": week}

            path = self.know.portrait_path(week)
            if self.vault.doc_exists(path):
                summary["portrait"] = "skipped (exists)"
            else:
                summary["portrait"] = self._stage(
                    lambda: self.know.generate_self_portrait(week).path)

            for subject in ("agent", "partner"):
                key = f"{subject}_profile"
                path = self.know.profile_path(subject, week)
                if self.vault.doc_exists(path):
                    summary[key] = "skipped (exists)"
                else:
                    summary[key] = self._stage(
                        lambda s=subject: self.know.generate_profile(
                            s, week, force=True).path)

            path = self.know.delta_path(week)
            if self.vault.doc_exists(path):
                summary["delta"] = "skipped (exists)"
            else:
                summary["delta"] = self._stage(
                    lambda: self.know.generate_delta(week).path)

            digest_path = self.know._digest_path()
            if self.vault.doc_exists(digest_path):
                summary["scout"] = "skipped (exists)"
            else:
                corpus = self.config.scout_sources.get(week, [])
                summary["scout"] = self._stage(
                    lambda: (self.know.run_scout(week, corpus), digest_path)[1])

            summary["validated"] = self._stage(lambda: self._validate_pending(week))
            if f"## {week} " in self.vault.read_markdown_log("meta_reflexion"):
                summary["meta"] = "skipped (exists)"
            else:
                summary["meta"] = self._stage(
                    lambda: self.stack.write_meta_reflexion(week).window)
            return summary

    def _validate_pending(self, week: str) -> str:
        proposals = []
        validated = set()
        for record in self.vault.read_stream("improve_runs"):
            kind = record.payload.get("kind")
            if kind == "proposal":
                proposals.append(record)
            elif kind == "validation":
                validated.add(record.payload.get("run_id"))
        count = 0
        for record in proposals:
            run_id = record.payload["run_id"]
            if run_id in validated:
                continue
            if week_start(week) <= parse_ts(record.ts) < week_end(week):
                self.stack.validate_improve(run_id)
                count += 1
        return f"{count} runs validated"

    @staticmethod
    def _stage(fn):
        try:
            return fn()
        except Exception as exc:  # noqa: BLE001 - stage isolation is the contract
            return f"error: {exc}"

    def improve(self, skill_id: str, force_reset: bool = False) -> dict:
        revision = self.stack.run_improve(skill_id, force_reset=force_reset)
        episode = self.stack.validate_improve(revision.run_id)
        return {"run_id": revision.run_id, "blocked": revision.blocked,
                "applied": revision.applied, "assessment": episode.assessment,
                "delta": episode.delta}

    def write_journal_entry(self, text: str) -> str:
        from .vault import MarkdownDoc

        ts = self.vault.clock.now_ts()
        name = ts[:16].replace(":", "").replace("T", "-")
        path = f"Myself/Journal/{name}-entry.md"
        doc = MarkdownDoc(path=path, kind="growth_journal",
                          frontmatter={"kind": "growth_journal", "author": "human",
                                       "created_ts": ts,
                                       "iso_week": iso_week_of(ts)},
                          body=text.rstrip() + "\n")
        return self.vault.write_doc(doc)

    # -- schedulers ----------------------------------------------------------------

    def next_know_fire(self):
        now = self.vault.clock.now()
        spec = self.config.schedule
        candidate = now.replace(hour=spec.know_hour, minute=spec.know_minute,
                                second=0, microsecond=0)
        days_ahead = (spec.know_weekday - now.weekday()) % 7
        candidate = candidate + timedelta(days=days_ahead)
        if candidate <= now:
            candidate += timedelta(days=7)
        return candidate

    def start_schedulers(self, stop_event: threading.Event) -> list[threading.Thread]:
        """Background Notice/Know loops for daemon mode."""

        def notice_loop():
            interval = self.config.schedule.notice_interval_min * 60
            while not stop_event.wait(interval):
                self.notice_tick()

        def know_loop():
            while not stop_event.is_set():
                fire_at = self.next_know_fire()
                while not stop_event.is_set() and self.vault.clock.now() < fire_at:
                    stop_event.wait(20)
                if stop_event.is_set():
                    break
                self.know_tick(iso_week_of(fire_at))

        threads = [threading.Thread(target=notice_loop, daemon=True, name="notice"),
                   threading.Thread(target=know_loop, daemon=True, name="know")]
        for thread in threads:
            thread.start()
        return threads


def build_profile(config: HarnessConfig) -> ModelProfile:
    if config.scenario_path:
        return ModelProfile.scripted("scripted", config.scenario_path)
    if config.http_base_url:
        backends = {}
        for depth in DEPTHS:
            backends[depth] = BackendSpec(
                kind="http", base_url=config.http_base_url,
                model=config.http_models.get(depth, config.http_models.get("default", "")),
                auth_env=config.auth_env)
        return ModelProfile(name="http", backends=backends)
    raise ValueError("config needs either scenario_path or http_base_url")


# -- replay ---------------------------------------------------------------------


def replay_scenario(scenario_path: str | Path, out_root: str | Path) -> dict:
    """Run a scenario's timeline against a fresh vault under a pinned clock.

    The same scenario file replayed into two directories yields
    byte-identical vaults.
    """
    scenario_path = Path(scenario_path)
    doc = json.loads(scenario_path.read_text("utf-8"))
    timeline = doc.get("timeline", [])
    start = doc.get("clock") or (timeline[0]["at"] if timeline else "2026-01-01T00:00:00Z")

    config = HarnessConfig.from_dict(doc.get("config", {}))
    config.vault_root = str(out_root)
    config.scenario_path = str(scenario_path)

    clock = FixedClock(start)
    harness = Harness.from_config(config, clock=clock)
    harness.init_vault()

    counts = {"chat": 0, "journal": 0, "notice": 0, "know": 0,
              "improve": 0, "portrait": 0}
    for event in sorted(timeline, key=lambda e: e["at"]):
        clock.set(event["at"])
        action = event["action"]
        if action == "chat":
            harness.handle_message(event.get("surface", "api"), event["text"])
        elif action == "journal":
            harness.write_journal_entry(event["text"])
        elif action == "notice":
            harness.notice_tick()
        elif action == "know":
            harness.know_tick(event.get("week"))
        elif action == "improve":
            harness.improve(event.get("skill", config.default_skill),
                            force_reset=bool(event.get("force_reset", False)))
        elif action == "portrait":
            harness.know.generate_self_portrait(event["week"])
        else:
            raise ValueError(f"unknown timeline action {action!r}")
        counts[action] = counts.get(action, 0) + 1
    return {"events": len(timeline), "by_action": counts,
            "vault_root": str(out_root)}
