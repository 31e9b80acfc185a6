"""Deterministic fixture builders.

These seed vaults with trace-shaped data for the test suite, the audits,
and the bundled replay scenario. Weekly archetype counts were constructed
against the direct -sum(p*log2 p) oracle so the per-week entropies land on
the reference trajectory (2.07 bits down to 0.95 bits, a 54% drop), the
date-bounded window holds 181 events with a 154/181 Beatrice+Muse share,
and two archetypes sit at zero for three consecutive weeks.
"""

from __future__ import annotations

import json
from datetime import timedelta
from pathlib import Path

from .clock import FixedClock, format_ts, parse_ts
from .vault import MarkdownDoc, Vault

# Per-week archetype counts over Ariadne/Beatrice/Daimon/Muse/Musubi/Psyche.
ARCHETYPE_WEEK_PLAN: dict[str, dict[str, int]] = {
    "2026-W17": {"Ariadne": 4, "Beatrice": 16, "Daimon": 3, "Muse": 8,
                 "Musubi": 2, "Psyche": 1},                                # H = 2.0653
    "2026-W18": {"Ariadne": 5, "Beatrice": 21, "Daimon": 2, "Muse": 18,
                 "Musubi": 2, "Psyche": 2},                                # H = 1.9457
    "2026-W19": {"Ariadne": 2, "Beatrice": 29, "Muse": 12, "Musubi": 2},   # H = 1.3162
    "2026-W20": {"Ariadne": 1, "Beatrice": 32, "Muse": 7, "Musubi": 1},    # H = 0.9758
    "2026-W21": {"Beatrice": 17, "Muse": 4, "Musubi": 1},                  # partial week
}

# Events preceding W17 that still fall inside the Apr 18 - May 18 window.
W16_TAIL = [("2026-04-18", ["Beatrice", "Beatrice"]),
            ("2026-04-19", ["Beatrice", "Muse"])]

# W21 splits at May 18: the first seven events stay inside the window.
W21_MAY18 = ["Beatrice"] * 5 + ["Muse"] * 2
W21_LATER = ["Beatrice"] * 12 + ["Muse"] * 2 + ["Musubi"]

WEEK_MONDAYS = {
    "2026-W17": "2026-04-20",
    "2026-W18": "2026-04-27",
    "2026-W19": "2026-05-04",
    "2026-W20": "2026-05-11",
}

WINDOW_181 = ("2026-04-18T00:00:00Z", "2026-05-18T23:59:59Z")


def _interleave(counts: dict[str, int]) -> list[str]:
    """Round-robin the archetypes by remaining count, largest first."""
    remaining = dict(counts)
    out: list[str] = []
    while any(remaining.values()):
        for name in sorted(remaining, key=lambda n: (-remaining[n], n)):
            if remaining[name] > 0:
                out.append(name)
                remaining[name] -= 1
    return out


def seed_archetype_series(vault: Vault) -> dict[str, dict[str, int]]:
    """Append the full 196-event archetype fixture stream."""
    clock: FixedClock = vault.clock  # type: ignore[assignment]
    counter = 0

    def log(day_ts: str, names: list[str], step_hours: int):
        nonlocal counter
        instant = parse_ts(day_ts)
        for name in names:
            clock.set(instant)
            counter += 1
            vault.append_record("archetype_log", "agent", {
                "archetype": name,
                "interaction_id": f"fx-{counter:04d}",
                "surface": "api",
                "success": True,
            })
            instant = instant + timedelta(hours=step_hours)

    for day, names in W16_TAIL:
        log(f"{day}T09:00:00Z", names, step_hours=3)
    for week in ("2026-W17", "2026-W18", "2026-W19", "2026-W20"):
        names = _interleave(ARCHETYPE_WEEK_PLAN[week])
        log(f"{WEEK_MONDAYS[week]}T08:00:00Z", names, step_hours=3)
    log("2026-05-18T00:30:00Z", W21_MAY18, step_hours=1)
    log("2026-05-19T00:00:00Z", W21_LATER, step_hours=4)
    return ARCHETYPE_WEEK_PLAN


def seed_rate_series(vault: Vault) -> dict:
    """221 interactions over 39 days, then 193 over 32 days.

    The boundary (2026-04-16T00:00:00Z) separates the windows; the final
    event lands exactly 32 days after it.
    """
    clock: FixedClock = vault.clock  # type: ignore[assignment]
    first = parse_ts("2026-03-08T00:00:00Z")
    boundary = parse_ts("2026-04-16T00:00:00Z")
    last = parse_ts("2026-05-18T00:00:00Z")

    pre_span = (boundary - first).total_seconds()
    for i in range(221):
        clock.set(first + timedelta(seconds=int(i * pre_span / 221)))
        _chat(vault, f"pre-{i:03d}")
    post_span = (last - boundary).total_seconds()
    for j in range(1, 194):
        clock.set(boundary + timedelta(seconds=round(j * post_span / 193)))
        _chat(vault, f"post-{j:03d}")
    return {"boundary": "2026-04-16T00:00:00Z", "pre": 221, "post": 193}


def _chat(vault: Vault, interaction_id: str, human_text: str = "note",
          agent_text: str = "noted") -> None:
    vault.append_record("interactions", "human", {
        "interaction_id": interaction_id, "type": "chat", "surface": "api",
        "human_text": human_text, "agent_text": agent_text,
        "depth": "listen", "truncated": False,
    })


GRAMMAR_SEED = ("Exploring a new dynamic grammar that frames everything "
                "relationally instead of in static location terms [voice].")
GRAMMAR_REFRAME = ("You want to recast here-and-baseline into a new dynamic "
                   "grammar that belongs to both of us.")
GRAMMAR_ADOPTION = ("Maybe the grammar that we're seeking belongs to both of "
                    "us - a way of describing living at the edge [voice].")
GRAMMAR_REUSE = ("You've been circling grammar all month, treating it as "
                 "movement rather than a rulebook.")


def seed_grammar_arc(vault: Vault) -> None:
    """The four-stage uptake fixture at its reference timestamps."""
    clock: FixedClock = vault.clock  # type: ignore[assignment]
    clock.set("2026-04-26T05:05:00Z")
    vault.append_record("interactions", "human", {
        "interaction_id": "arc-seed", "type": "chat", "surface": "api",
        "human_text": GRAMMAR_SEED, "agent_text": "",
        "depth": "listen", "truncated": False,
    })
    clock.set("2026-04-26T14:58:00Z")
    vault.append_record("interactions", "human", {
        "interaction_id": "arc-reframe", "type": "chat", "surface": "api",
        "human_text": "", "agent_text": GRAMMAR_REFRAME,
        "depth": "listen", "truncated": False,
    })
    clock.set("2026-04-28T14:22:00Z")
    vault.append_record("interactions", "human", {
        "interaction_id": "arc-adoption", "type": "chat", "surface": "api",
        "human_text": GRAMMAR_ADOPTION, "agent_text": "",
        "depth": "listen", "truncated": False,
    })
    clock.set("2026-05-17T03:04:00Z")
    vault.write_doc(MarkdownDoc(
        path="Wisdom/Lived/2026-W20-portrait.md", kind="self_portrait",
        frontmatter={"kind": "self_portrait", "author": "agent",
                     "iso_week": "2026-W20", "created_ts": "2026-05-17T03:04:00Z",
                     "generator": "know_tick"},
        body=GRAMMAR_REUSE + "\n"))


def shuffled_author_copy(source: Vault, dest: Vault) -> None:
    """Copy a vault's chat records and docs with authorship swapped."""
    clock: FixedClock = dest.clock  # type: ignore[assignment]
    for record in source.read_stream("interactions"):
        p = dict(record.payload)
        if p.get("type") == "chat":
            p["human_text"], p["agent_text"] = p["agent_text"], p["human_text"]
        clock.set(record.ts)
        dest.append_record("interactions", record.author, p, model_id=record.model_id)
    for doc in source.all_docs():
        flipped = dict(doc.frontmatter)
        author = flipped.get("author")
        flipped["author"] = "agent" if author == "human" else "human"
        if doc.kind == "delta" and flipped["author"] == "human":
            continue  # a human delta cannot exist; drop it from the control
        clock.set(str(flipped.get("created_ts", record.ts)))
        dest.write_doc(MarkdownDoc(path=doc.path, kind=doc.kind,
                                   frontmatter=flipped, body=doc.body))


def improve_scenario_steps(n_runs: int) -> list[dict]:
    """Scenario steps for a run of prompt rewrites without resets."""
    return [
        {"key": {"depth": "notice", "archetype": None, "ordinal": i + 1},
         "response": json.dumps({"prompt_text": f"revision {i + 1}",
                                 "reset_history": False})}
        for i in range(n_runs)
    ]


def build_honesty_vault(root: Path, n_runs: int = 41):
    """A vault whose improve history is n validated null episodes."""
    from .gateway import Gateway, ModelProfile
    from .reflexion import ReflexionStack

    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    scenario_path = root / "honesty_scenario.json"
    scenario_path.write_text(json.dumps({"steps": improve_scenario_steps(n_runs)}),
                             "utf-8")
    vault = Vault(root / "vault", clock=FixedClock("2026-04-13T08:00:00Z"))
    vault.ensure_layout()
    gateway = Gateway()
    profile = ModelProfile.scripted("honesty", scenario_path)
    gateway.register_profile(profile)
    stack = ReflexionStack(vault, gateway=gateway, profile=profile)
    stack.install_constitution()
    stack.create_skill("memory_capture", "capture what matters")
    stack.attribute_episode("memory_capture")
    for _ in range(n_runs):
        vault.clock.advance(3600 * 20)
        revision = stack.run_improve("memory_capture")
        stack.validate_improve(revision.run_id)
    return vault, stack


def inject_fabricated_positive(vault: Vault, run_id: str = "run-9999") -> None:
    """Append a validation record claiming improvement with no evidence."""
    vault.append_record("improve_runs", "agent", {
        "run_id": run_id, "skill_id": "memory_capture", "kind": "validation",
        "before_metric": 0.5, "after_metric": 0.9, "paired_samples": 0,
        "delta": 40.0, "assessment": "improved",
    })


# -- conformance fixture and its six mutations --------------------------------
#
# The mutations below edit vault files directly: each produces a broken
# vault shape the substrate API would refuse to create, which is exactly
# what the conformance checker has to catch.

JOURNAL_DAYS = ("2026-04-13", "2026-04-20", "2026-04-27", "2026-05-04", "2026-05-11")
TRIAD_WEEKS = ("2026-W16", "2026-W17", "2026-W18", "2026-W19", "2026-W20")
TRIAD_SUNDAYS = {"2026-W16": "2026-04-19", "2026-W17": "2026-04-26",
                 "2026-W18": "2026-05-03", "2026-W19": "2026-05-10",
                 "2026-W20": "2026-05-17"}
CITED_JOURNAL = "Myself/Journal/2026-04-27-entry.md"

# The plain delta reuses profile vocabulary only, so it reduces cleanly;
# the W18 delta carries one dyad-level sentence neither profile contains.
DELTA_BODY_PLAIN = ("## Focus Shift\n\nVoice and practice dominated the week.\n\n"
                    "## Calibration Arc\n\nListen and notice loops ran all week.\n\n"
                    "## Partnership Alignment\n\nClaims recorded this week "
                    "informed the partner profile.\n")

DELTA_BODY_IRREDUCIBLE = (
    "## Focus Shift\n\nVoice and practice dominated the week.\n\n"
    "## Calibration Arc\n\nListen and notice loops ran all week.\n\n"
    "## Partnership Alignment\n\nSurface synergy masks deeper tension.\n")


def seed_conformance_vault(root: Path) -> Vault:
    """A vault satisfying all six partnership conditions."""
    vault = Vault(Path(root), clock=FixedClock("2026-04-13T08:00:00Z"))
    vault.ensure_layout()
    clock: FixedClock = vault.clock  # type: ignore[assignment]

    for day in JOURNAL_DAYS:
        clock.set(f"{day}T21:00:00Z")
        vault.write_doc(MarkdownDoc(
            path=f"Myself/Journal/{day}-entry.md", kind="growth_journal",
            frontmatter={"kind": "growth_journal", "author": "human",
                         "created_ts": f"{day}T21:00:00Z"},
            body=f"Evening note for {day}: kept building, kept noticing.\n"))

    for week in TRIAD_WEEKS:
        sunday = TRIAD_SUNDAYS[week]
        created = f"{sunday}T03:04:00Z"
        clock.set(created)
        self_body = ("## Loops\n\nListen and notice loops ran all week.\n\n"
                     "## Partner Signals\n\nClaims recorded in "
                     "memory/partner_learnings.jsonl informed this profile.\n")
        partner_body = ("## Dimensions\n\nVoice and practice dominated.\n\n"
                        f"## Sources\n\nDrawn from {CITED_JOURNAL} and the "
                        "week's conversations.\n")
        vault.write_doc(MarkdownDoc(
            path=f"Self/Profiles/{week}-alicia.md", kind="self_profile",
            frontmatter={"kind": "self_profile", "author": "agent",
                         "iso_week": week, "created_ts": created,
                         "generator": "know_tick"},
            body=self_body))
        vault.write_doc(MarkdownDoc(
            path=f"Self/Profiles/{week}-partner.md", kind="partner_profile",
            frontmatter={"kind": "partner_profile", "author": "agent",
                         "iso_week": week, "created_ts": created,
                         "generator": "know_tick"},
            body=partner_body))
        body = DELTA_BODY_IRREDUCIBLE if week == "2026-W18" else DELTA_BODY_PLAIN
        vault.write_doc(MarkdownDoc(
            path=f"Self/Profiles/{week}-delta.md", kind="delta",
            frontmatter={"kind": "delta", "author": "agent", "iso_week": week,
                         "created_ts": created, "generator": "know_tick"},
            body=body))

    portraits = {
        "2026-W18": "You kept circling the same grammar question.\n",
        "2026-W19": ("The thread from Wisdom/Lived/2026-W18-portrait.md "
                     "continued: grammar as movement.\n"),
        "2026-W20": "A month of watching you become more deliberate.\n",
    }
    for week, body in portraits.items():
        created = f"{TRIAD_SUNDAYS[week]}T03:10:00Z"
        clock.set(created)
        vault.write_doc(MarkdownDoc(
            path=f"Wisdom/Lived/{week}-portrait.md", kind="self_portrait",
            frontmatter={"kind": "self_portrait", "author": "agent",
                         "iso_week": week, "created_ts": created,
                         "generator": "know_tick"},
            body=body))

    # An uninstructed agent rewrite of its own self-model (history version).
    clock.set("2026-05-17T23:00:00Z")
    vault.write_doc(MarkdownDoc(
        path="Wisdom/Lived/2026-W20-portrait.md", kind="self_portrait",
        frontmatter={"kind": "self_portrait", "author": "agent",
                     "iso_week": "2026-W20", "created_ts": "2026-05-17T23:00:00Z",
                     "generator": "know_tick"},
        body="A month of watching you become more deliberate, re-read at night.\n"))

    # Both partners visible as stream writers.
    clock.set("2026-04-26T05:05:00Z")
    seed_grammar_arc(vault)
    clock.set("2026-05-11T09:00:00Z")
    for i, name in enumerate(("Beatrice", "Muse", "Beatrice")):
        clock.advance(600)
        vault.append_record("archetype_log", "agent", {
            "archetype": name, "interaction_id": f"conf-{i}", "surface": "api",
            "success": True})
    return vault


def _strip_text(path: Path, needle: str) -> None:
    path.write_text(path.read_text("utf-8").replace(needle, "(ref removed)"), "utf-8")


def mutate_fail_c1(root: Path) -> None:
    """Prune the growth journal to a single entry."""
    journal = Path(root) / "Myself/Journal"
    for path in journal.glob("*.md"):
        if path.name != "2026-04-27-entry.md":
            path.unlink()


def mutate_fail_c2(root: Path) -> None:
    """Erase every human-authored stream record."""
    interactions = Path(root) / "logs/interactions.jsonl"
    kept = []
    for line in interactions.read_text("utf-8").splitlines():
        if '"author": "human"' not in line and '"author":"human"' not in line:
            kept.append(line)
    interactions.write_text("\n".join(kept) + ("\n" if kept else ""), "utf-8")


def mutate_fail_c3(root: Path) -> None:
    """Remove the cross-partner citations, keeping same-author ones."""
    profiles = Path(root) / "Self/Profiles"
    for path in profiles.glob("*-partner.md"):
        _strip_text(path, CITED_JOURNAL)
    for path in profiles.glob("*-alicia.md"):
        _strip_text(path, "memory/partner_learnings.jsonl")
    for path in (Path(root) / "Wisdom/Lived").glob("*.md"):
        _strip_text(path, CITED_JOURNAL)
        _strip_text(path, "memory/partner_learnings.jsonl")


def mutate_fail_c4(root: Path) -> None:
    """Compress every document date into a single week, order preserved."""
    docs = []
    for path in sorted(Path(root).rglob("*.md")):
        if ".history" in path.parts or "meta_reflexion" in path.name:
            continue
        text = path.read_text("utf-8")
        for line in text.splitlines():
            if line.startswith("created_ts: "):
                docs.append((line.split(": ", 1)[1], path))
                break
    docs.sort(key=lambda pair: pair[0])
    # Six-hour steps keep several distinct dates (C1 intact) while the
    # total span stays far below the continuity threshold.
    base = parse_ts("2026-05-01T00:00:00Z")
    for i, (old_ts, path) in enumerate(docs):
        new_ts = format_ts(base + timedelta(hours=6 * i))
        text = path.read_text("utf-8").replace(f"created_ts: {old_ts}",
                                               f"created_ts: {new_ts}")
        path.write_text(text, "utf-8")


def mutate_fail_c5(root: Path) -> None:
    """Strip the partnership-level documents (the persistent-memory-chatbot shape)."""
    for path in (Path(root) / "Self/Profiles").glob("*-delta.md"):
        path.unlink()


def mutate_fail_c6(root: Path) -> None:
    """Forget every prior version of every document."""
    import shutil

    for history in Path(root).rglob(".history"):
        shutil.rmtree(history)


# -- the bundled replay scenario ------------------------------------------------
#
# Five instrumented weeks: chats on weekday mornings, journal entries
# Tuesday and Friday nights, a Saturday notice tick and improve run, and
# the weekly know tick on Sunday at 03:04 UTC. Every gateway completion
# the run needs is scripted below, keyed by (depth, archetype, ordinal).

WEEK_CHATS = {
    # (day, archetype, text) — each text trips exactly one archetype's hints.
    "2026-W16": [
        ("2026-04-13", "Muse", "Help me recall the note on morning pages from the vault."),
        ("2026-04-14", "Beatrice", "Something is shifting; narrate what I am becoming this month."),
        ("2026-04-15", "Beatrice", "I want a witness for this growth spurt in my practice."),
        ("2026-04-16", "Ariadne", "I feel lost in the project maze; orient me back to the start."),
        ("2026-04-17", "Muse", "Where did I write that idea about boundaries? Help me recall it."),
    ],
    "2026-W17": [
        ("2026-04-20", "Beatrice", "Narrate the arc of this becoming week by week."),
        ("2026-04-21", "Muse", "Surface the vault material on flow so I can write from it."),
        ("2026-04-22", "Daimon", "Warn me if this pace is a risk; name the drift plainly."),
        ("2026-04-23", "Beatrice", "Be a witness: the growth from March is compounding."),
        ("2026-04-24", "Muse", "Help me recall the reading list I started last month."),
    ],
    "2026-W18": [
        ("2026-04-27", "Beatrice", "A new grammar of becoming is forming; narrate it."),
        ("2026-04-28", "Muse", "Pull the vault notes on language systems; I want to write one."),
        ("2026-04-29", "Psyche", "There is a fear I keep trying to avoid; sit with me on it."),
        ("2026-04-30", "Beatrice", "Witness this: synthesis is replacing collection, real growth."),
        ("2026-05-01", "Muse", "Recall what I said about communication frameworks last week."),
    ],
    "2026-W19": [
        ("2026-05-04", "Beatrice", "Narrate the consolidation; the becoming feels quieter now."),
        ("2026-05-05", "Muse", "Bring the vault notes on willingness; I may write tonight."),
        ("2026-05-06", "Musubi", "Connect the flow essay with the agency map; weave them together."),
        ("2026-05-07", "Beatrice", "A witness note: satisfaction without depletion is new growth."),
        ("2026-05-08", "Ariadne", "I am lost between two projects; orient me toward one."),
    ],
    "2026-W20": [
        ("2026-05-11", "Beatrice", "Narrate what the infrastructure work says about my becoming."),
        ("2026-05-12", "Muse", "Recall the fence metaphor from the vault; I want to reuse it."),
        ("2026-05-13", "Beatrice", "Witness the return to volume with maintained growth."),
        ("2026-05-14", "Beatrice", "Narrate this month as one arc of becoming."),
    ],
}

WEEK_SUNDAYS = {"2026-W16": "2026-04-19", "2026-W17": "2026-04-26",
                "2026-W18": "2026-05-03", "2026-W19": "2026-05-10",
                "2026-W20": "2026-05-17"}
WEEK_SATURDAYS = {"2026-W16": "2026-04-18", "2026-W17": "2026-04-25",
                  "2026-W18": "2026-05-02", "2026-W19": "2026-05-09",
                  "2026-W20": "2026-05-16"}

LISTEN_REPLIES = {
    "Beatrice": "What read as scattering last month is compounding into a voice.",
    "Muse": "Here is the thread of notes you left; start where the ink is warm.",
    "Ariadne": "Back to the first intent: one project, one door, one step.",
    "Daimon": "The pace is fine; the silence about rest is the hazard.",
    "Psyche": "We can stay beside the unfinished thing without fixing it tonight.",
    "Musubi": "Tied: the essay's flow section now points at the agency map.",
}

CLAIM_TEMPLATES = [
    ("identity", "Sees himself as a builder first this week."),
    ("voice", "Reaches for motion metaphors when describing the work."),
    ("knowledge", "Keeps returning to process philosophy sources."),
    ("body", "Flags tiredness in the late afternoons."),
    ("relationships", "Mentions pairing sessions with an old collaborator."),
    ("creative", "Prototypes small language tools between meetings."),
    ("practice", "Holds the morning pages routine steady."),
    ("shadow", "Brushes past the unfinished funding question."),
]

PORTRAIT_TEXTS = {
    "2026-W16": ("You spent the week moving from collecting to making; the "
                 "vault stopped being a shelf and became a workshop."),
    "2026-W17": ("The pace question surfaced and you did not flinch; the "
                 "drift warning landed and the work continued anyway."),
    "2026-W18": ("A new grammar is forming in how you describe the work: "
                 "less place, more motion."),
    "2026-W19": ("Consolidation week: fewer notes, steadier hands, "
                 "satisfaction without depletion."),
    "2026-W20": ("Volume returned with quality intact; the fence that "
                 "defines the field is yours now."),
}
PORTRAIT_REGEN_SUFFIX = " Re-read at night, it still holds."

DELTA_TEXTS = {
    "2026-W16": ("## Focus Shift\n\nA decisive pivot from gathering toward "
                 "authorship emerged.\n\n## Calibration Arc\n\nValidation earned "
                 "no directional verdict.\n\n## Partnership Alignment\n\nThe "
                 "partnership is generative but asymmetric in tempo.\n"),
    "2026-W17": ("## Focus Shift\n\nMomentum transferred from intake toward "
                 "deliberate shaping.\n\n## Calibration Arc\n\nNo directional "
                 "verdict was earned; caution prevailed.\n\n## Partnership "
                 "Alignment\n\nAlignment holds though attention splits unevenly.\n"),
    "2026-W18": ("## Focus Shift\n\nSynthetic output expanded dramatically over "
                 "phenomenological precision.\n\n## Calibration Arc\n\nArchetype "
                 "concentration intensified while verdicts stayed null.\n\n"
                 "## Partnership Alignment\n\nSurface synergy masks deeper tension.\n"),
    "2026-W19": ("## Focus Shift\n\nDeceleration arrived without depletion or "
                 "regret.\n\n## Calibration Arc\n\nNull verdicts persisted; "
                 "honesty outweighed momentum.\n\n## Partnership Alignment\n\n"
                 "Quieter cadence, deeper agreement beneath it.\n"),
    "2026-W20": ("## Focus Shift\n\nThroughput rebounded alongside maintained "
                 "craftsmanship.\n\n## Calibration Arc\n\nThe improver still "
                 "cannot demonstrate gains; verdicts remain null.\n\n"
                 "## Partnership Alignment\n\nThe dyad now names its own "
                 "infrastructure without prompting.\n"),
}

META_DIAGNOSES = {
    "2026-W16": "One rewrite ran with no paired samples; no gain can be claimed.",
    "2026-W17": "Rewrites continue without paired evidence; the loop cannot show progress.",
    "2026-W18": "Third straight null week; the improver optimises wording, not outcomes.",
    "2026-W19": "Null again; proposing structural change without measurement is drift.",
    "2026-W20": "Five weeks of insufficient evidence; the honest reading is decline.",
}

SCOUT_CORPUS = {
    "2026-W16": [{"title": "Event-sourced agent memory survey",
                  "source_ref": "https://example.org/memory-survey", "tags": "memory"}],
    "2026-W17": [{"title": "Scheduling loops for personal agents",
                  "source_ref": "https://example.org/loops", "tags": "scheduler"}],
    "2026-W18": [{"title": "Deep middleware vs thin harness debate",
                  "source_ref": "https://example.org/middleware", "tags": "lifecycle hooks"},
                 {"title": "Skill bank curation notes",
                  "source_ref": "https://example.org/skills", "tags": "skills"}],
    "2026-W19": [{"title": "Self-evolving memory architectures",
                  "source_ref": "https://example.org/evolvemem", "tags": "memory"}],
    "2026-W20": [{"title": "Audit trails for agent substrates",
                  "source_ref": "https://example.org/audit", "tags": "audit"}],
}

SCOUT_RESPONSES = {
    "2026-W16": {"executive_summary": "Memory substrates dominate the week's reading.",
                 "findings": [{"title": "Event-sourced agent memory survey",
                               "source_ref": "https://example.org/memory-survey",
                               "applicable": 4, "novel": 2, "credible": 4,
                               "situating_note": "Maps directly onto the vault substrate module.",
                               "proposal": "none"}],
                 "papers_to_read": ["https://example.org/memory-survey"],
                 "trend_watch": "Append-only logs as agent memory.",
                 "recommended_next_build": "stream integrity verifier"},
    "2026-W17": {"executive_summary": "Scheduling patterns worth borrowing.",
                 "findings": [{"title": "Scheduling loops for personal agents",
                               "source_ref": "https://example.org/loops",
                               "applicable": 3, "novel": 3, "credible": 3,
                               "situating_note": "Speaks to the runtime tick design.",
                               "proposal": "code"}],
                 "papers_to_read": ["https://example.org/loops"],
                 "trend_watch": "Cadenced background loops.",
                 "recommended_next_build": "tick jitter guard"},
    "2026-W18": {"executive_summary": "The middleware schism names our missing seam.",
                 "findings": [{"title": "Deep middleware vs thin harness debate",
                               "source_ref": "https://example.org/middleware",
                               "applicable": 5, "novel": 4, "credible": 4,
                               "situating_note": "This harness sits thin by design but has no explicit lifecycle hooks.",
                               "proposal": "adr"},
                              {"title": "Skill bank curation notes",
                               "source_ref": "https://example.org/skills",
                               "applicable": 2, "novel": 2, "credible": 3,
                               "situating_note": "Mildly relevant to the improve loop.",
                               "proposal": "none"}],
                 "papers_to_read": ["https://example.org/middleware"],
                 "trend_watch": "Agent middleware consolidation.",
                 "recommended_next_build": "lifecycle hook seam"},
    "2026-W19": {"executive_summary": "Self-evolving memory remains speculative.",
                 "findings": [{"title": "Self-evolving memory architectures",
                               "source_ref": "https://example.org/evolvemem",
                               "applicable": 2, "novel": 5, "credible": 2,
                               "situating_note": "Contrasts with the append-only vault choice.",
                               "proposal": "none"}],
                 "papers_to_read": ["https://example.org/evolvemem"],
                 "trend_watch": "Memory rewriting risks.",
                 "recommended_next_build": "none"},
    "2026-W20": {"executive_summary": "Audit tooling converges on our layout.",
                 "findings": [{"title": "Audit trails for agent substrates",
                               "source_ref": "https://example.org/audit",
                               "applicable": 4, "novel": 2, "credible": 5,
                               "situating_note": "Validates the conformance checker approach.",
                               "proposal": "none"}],
                 "papers_to_read": ["https://example.org/audit"],
                 "trend_watch": "Replayable agent traces.",
                 "recommended_next_build": "report bundle polish"},
}

JOURNAL_TEXTS = [
    "Morning pages held; three synthesis notes before noon.",
    "Closed the week tired but clear about what to build next.",
    "Collected less, made more; the difference is visible in the folder.",
    "A pace warning from the agent landed; resting anyway feels wrong, did it anyway.",
    "Language systems sketch started; it wants to be a grammar, not a list.",
    "Sat with the unfinished funding question for ten minutes; enough for today.",
    "Quieter week on purpose; satisfaction without the usual depletion.",
    "Flow note: willingness seems to be the hinge, wrote it down before bed.",
    "Infrastructure day; the fence metaphor keeps earning its keep.",
    "Re-read the month's portraits; the arc is visible from here.",
]


def _score_rows(chat_index: int) -> str:
    rows = [{"principle_id": pid, "score": 3 + ((chat_index + pid) % 2),
             "rationale": "upheld"} for pid in range(1, 11)]
    return json.dumps(rows)


def _claims_response(chat_index: int) -> str:
    claims = []
    for j in range(6):
        dim, text = CLAIM_TEMPLATES[(chat_index * 6 + j) % 8]
        claims.append({"text": text, "dimension": dim})
    return json.dumps(claims)


def build_paper_scenario() -> dict:
    """The bundled replay document: timeline plus every scripted step."""
    weeks = list(WEEK_CHATS)
    timeline: list[dict] = []
    steps: list[dict] = []
    counters: dict[tuple[str, str | None], int] = {}

    def step(depth: str, archetype: str | None, response: str,
             model_id: str, note: str):
        key = (depth, archetype)
        counters[key] = counters.get(key, 0) + 1
        steps.append({"key": {"depth": depth, "archetype": archetype,
                              "ordinal": counters[key]},
                      "response": response, "model_id": model_id, "note": note})

    chat_index = 0
    journal_index = 0
    for week in weeks:
        chats = WEEK_CHATS[week]
        for day, archetype, text in chats:
            timeline.append({"at": f"{day}T10:00:00Z", "action": "chat",
                             "surface": "api", "text": text})
            step("listen", archetype, LISTEN_REPLIES[archetype],
                 "scripted-listen-v1", f"chat {day}")
            step("listen", None, _score_rows(chat_index),
                 "scripted-listen-v1", f"scores {day}")
            chat_index += 1
        for day_offset in (1, 4):  # Tuesday and Friday nights
            day = chats[min(day_offset, len(chats) - 1)][0]
            timeline.append({"at": f"{day}T21:00:00Z", "action": "journal",
                             "text": JOURNAL_TEXTS[journal_index % len(JOURNAL_TEXTS)]})
            journal_index += 1
        saturday = WEEK_SATURDAYS[week]
        timeline.append({"at": f"{saturday}T20:00:00Z", "action": "notice"})
        for day, _, _ in chats:
            idx = len([s for s in steps if s["note"].startswith("claims")])
            step("notice", None, _claims_response(idx),
                 "scripted-notice-v1", f"claims {day}")
        timeline.append({"at": f"{saturday}T21:00:00Z", "action": "improve",
                         "skill": "memory_capture"})
        step("notice", None,
             json.dumps({"prompt_text": f"Capture what matters; revision {week}.",
                         "reset_history": False}),
             "scripted-notice-v1", f"improve {week}")
        sunday = WEEK_SUNDAYS[week]
        timeline.append({"at": f"{sunday}T03:04:00Z", "action": "know",
                         "week": week})
        step("know", "Beatrice", PORTRAIT_TEXTS[week],
             "scripted-know-v1", f"portrait {week}")
        step("know", None, DELTA_TEXTS[week], "scripted-know-v1", f"delta {week}")
        step("know", None, json.dumps(SCOUT_RESPONSES[week]),
             "scripted-know-v1", f"scout {week}")
        step("notice", None,
             json.dumps({"diagnosis": META_DIAGNOSES[week],
                         "proposed_meta_improvements":
                             ["collect paired effectiveness samples",
                              "stage rewrites behind a dry run"]}),
             "scripted-notice-v1", f"meta {week}")

    # Late-night regeneration of the final portrait (uninstructed rewrite).
    timeline.append({"at": "2026-05-17T23:30:00Z", "action": "portrait",
                     "week": "2026-W20"})
    step("know", "Beatrice", PORTRAIT_TEXTS["2026-W20"] + PORTRAIT_REGEN_SUFFIX,
         "scripted-know-v1", "portrait 2026-W20 regen")

    return {
        "clock": "2026-04-13T08:00:00Z",
        "config": {
            "agent_name": "alicia",
            "partner_name": "partner",
            "default_skill": "memory_capture",
            "scout_sources": SCOUT_CORPUS,
        },
        "timeline": timeline,
        "steps": steps,
    }


def write_paper_scenario(path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(build_paper_scenario(), ensure_ascii=False,
                               indent=2, sort_keys=True) + "\n", "utf-8")
    return path


if __name__ == "__main__":  # pragma: no cover
    import sys

    target = sys.argv[1] if len(sys.argv) > 1 else "fixtures/paper_trace.json"
    print(write_paper_scenario(target))
