"""Archetype registry, selection, invocation logging, and lock-in detection.

Archetypes are interpretive modes, not personas; each invocation is a
first-class record in the archetype stream. Sylph ships as a named
anti-pattern that can never be invoked.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from .gateway import CompletionRequest, Gateway, GatewayError, ModelProfile
from .vault import LogRecord, MarkdownDoc, Vault
from .weeks import iso_week_of, week_range

ARCHETYPE_STREAM = "archetype_log"

DEFAULT_CHARTERS = {
    "Daimon": ("Socratic warning voice. Names drift, risk, and self-deception "
               "plainly; asks the question nobody wants asked."),
    "Beatrice": ("Narrator of becoming. Witnesses growth arcs across weeks and "
                 "names what the partner is turning into."),
    "Ariadne": ("Orientation thread. Re-anchors a lost conversation to its "
                "starting intent and the shortest path back."),
    "Muse": ("Daughter of memory. Surfaces vault material and turns recall "
             "into prompt for new writing."),
    "Psyche": ("Initiation through shadow. Sits with what is avoided, "
               "unfinished, or feared, without rushing to fix it."),
    "Musubi": ("Generative binding. Joins threads across people and projects "
               "without narrating them."),
}

DEFAULT_TRIGGER_HINTS = {
    "Daimon": ["warn", "risk", "drift", "danger"],
    "Beatrice": ["becoming", "growth", "narrate", "witness"],
    "Ariadne": ["lost", "orient", "thread", "where was i"],
    "Muse": ["remember", "vault", "write", "recall"],
    "Psyche": ["shadow", "fear", "avoid", "sit with"],
    "Musubi": ["connect", "bind", "bond", "weave"],
}

SYLPH_CHARTER = ("Anti-pattern: beautiful, empty, interiority-less. Named so "
                 "the registry remembers what an archetype must not be.")

TEMPLATE_ROOT = "examples/archetypes"


class ArchetypeError(Exception):
    pass


@dataclass
class Archetype:
    name: str
    charter: str
    trigger_hints: list[str] = field(default_factory=list)
    invocable: bool = True


@dataclass
class LockInReport:
    window: tuple[str, str]
    dominant: tuple[str, float] | None
    starved: list[tuple[str, int]]
    triggered: bool
    weekly_shares: dict[str, dict[str, float]] = field(default_factory=dict)


def default_registry() -> dict[str, Archetype]:
    registry = {
        name: Archetype(name=name, charter=DEFAULT_CHARTERS[name],
                        trigger_hints=list(DEFAULT_TRIGGER_HINTS[name]))
        for name in DEFAULT_CHARTERS
    }
    registry["Sylph"] = Archetype(name="Sylph", charter=SYLPH_CHARTER,
                                  trigger_hints=[], invocable=False)
    return registry


class ArchetypeEngine:
    def __init__(self, vault: Vault, registry: dict[str, Archetype] | None = None):
        self.vault = vault
        self.registry = registry if registry is not None else self._load_registry()

    # -- registry ----------------------------------------------------------

    def _load_registry(self) -> dict[str, Archetype]:
        """Vault templates win over built-ins when present."""
        registry = default_registry()
        template_dir = self.vault.root / TEMPLATE_ROOT
        if template_dir.exists():
            for path in sorted(template_dir.glob("*.md")):
                doc = MarkdownDoc.parse(str(path), path.read_text("utf-8"))
                name = str(doc.frontmatter.get("name", "")).strip()
                if not name:
                    continue
                hints = str(doc.frontmatter.get("trigger_hints", ""))
                registry[name] = Archetype(
                    name=name,
                    charter=doc.body.strip(),
                    trigger_hints=[h.strip() for h in hints.split(",") if h.strip()],
                    invocable=bool(doc.frontmatter.get("invocable", True)),
                )
        return registry

    def install_templates(self, created_ts: str) -> list[str]:
        """Write the shipped archetype templates into the vault."""
        written = []
        for archetype in default_registry().values():
            text = "\n".join([
                "---",
                f"name: {archetype.name}",
                f"invocable: {'true' if archetype.invocable else 'false'}",
                f"trigger_hints: {', '.join(archetype.trigger_hints)}",
                f"created_ts: {created_ts}",
                "---",
                "",
                archetype.charter,
                "",
            ])
            rel = f"{TEMPLATE_ROOT}/{archetype.name.lower()}.md"
            self.vault.put_file(rel, text)
            written.append(rel)
        return written

    def invocable(self) -> list[Archetype]:
        return [a for a in self.registry.values() if a.invocable]

    # -- selection -----------------------------------------------------------

    def select_archetype(self, context: list[tuple[str, str]], depth: str = "listen",
                         gateway: Gateway | None = None,
                         profile: ModelProfile | None = None) -> str:
        """Pick an invocable archetype for the coming interaction.

        Trigger-hint keyword match first, gateway classification second,
        frequency tie-break third — so selection still works offline.
        """
        candidates = self.invocable()
        if not candidates:
            raise ArchetypeError("no invocable archetype in registry")
        if len(candidates) == 1:
            return candidates[0].name

        human_text = " ".join(t for role, t in context if role == "human").lower()
        if human_text.strip():
            hits = Counter()
            for archetype in candidates:
                count = sum(human_text.count(h.lower()) for h in archetype.trigger_hints)
                if count:
                    hits[archetype.name] = count
            if hits:
                return self._break_ties(hits)
            if gateway is not None and profile is not None:
                name = self._classify(human_text, depth, gateway, profile)
                if name is not None:
                    return name
        freq = self._historical_frequency()
        order = sorted(candidates, key=lambda a: (-freq.get(a.name, 0), a.name))
        return order[0].name

    def _classify(self, human_text: str, depth: str, gateway: Gateway,
                  profile: ModelProfile) -> str | None:
        names = sorted(a.name for a in self.invocable())
        prompt = (f"Classify which mode fits this message: {human_text}\n"
                  f"Answer with exactly one of: {', '.join(names)}")
        try:
            completion = gateway.complete(
                CompletionRequest(messages=[("human", prompt)], depth=depth),
                profile)
        except GatewayError:
            return None
        answer = completion.text.strip()
        return answer if answer in names else None

    def _break_ties(self, hits: Counter) -> str:
        best = max(hits.values())
        tied = [name for name, count in hits.items() if count == best]
        if len(tied) == 1:
            return tied[0]
        freq = self._historical_frequency()
        tied.sort(key=lambda n: (-freq.get(n, 0), n))
        return tied[0]

    def _historical_frequency(self) -> Counter:
        counts = Counter()
        for record in self.vault.read_stream(ARCHETYPE_STREAM):
            counts[record.payload.get("archetype", "")] += 1
        return counts

    # -- logging ----------------------------------------------------------

    def log_invocation(self, archetype: str, interaction_id: str, surface: str,
                       success: bool = True, model_id: str | None = None) -> LogRecord:
        entry = self.registry.get(archetype)
        if entry is None:
            raise ArchetypeError(f"unknown archetype {archetype!r}")
        if not entry.invocable:
            raise ArchetypeError(f"archetype {archetype!r} is not invocable")
        return self.vault.append_record(ARCHETYPE_STREAM, "agent", {
            "archetype": archetype,
            "interaction_id": interaction_id,
            "surface": surface,
            "success": success,
        }, model_id=model_id)

    # -- analytics over the stream ------------------------------------------

    def weekly_distribution(self, iso_week: str) -> dict[str, int]:
        counts = {name: 0 for name in self.registry if self.registry[name].invocable}
        for record in self.vault.read_stream(ARCHETYPE_STREAM):
            if iso_week_of(record.ts) == iso_week:
                name = record.payload.get("archetype", "")
                counts[name] = counts.get(name, 0) + 1
        return counts

    def detect_lock_in(self, window: tuple[str, str],
                       dominance_threshold: float = 0.40,
                       starvation_weeks: int = 2) -> LockInReport:
        """Dominance plus sustained starvation of other archetypes.

        Triggers when some archetype's average weekly share reigns at or
        above the threshold while at least one invocable archetype sits at
        zero invocations for `starvation_weeks` consecutive weeks.
        """
        weeks = week_range(window[0], window[1])
        if not weeks:
            raise ArchetypeError("window is empty")
        weekly_shares: dict[str, dict[str, float]] = {}
        share_sums: Counter = Counter()
        active_weeks = 0
        zero_streaks: dict[str, int] = {}
        best_streaks: dict[str, int] = {}
        invocable_names = [a.name for a in self.invocable()]

        for week in weeks:
            counts = self.weekly_distribution(week)
            total = sum(counts.values())
            if total > 0:
                active_weeks += 1
                shares = {name: counts.get(name, 0) / total for name in counts}
                weekly_shares[week] = shares
                for name, share in shares.items():
                    share_sums[name] += share
            for name in invocable_names:
                if counts.get(name, 0) == 0:
                    zero_streaks[name] = zero_streaks.get(name, 0) + 1
                else:
                    zero_streaks[name] = 0
                best_streaks[name] = max(best_streaks.get(name, 0), zero_streaks[name])

        dominant = None
        if active_weeks:
            name, total_share = max(share_sums.items(), key=lambda kv: (kv[1], kv[0]))
            dominant = (name, total_share / active_weeks)
        starved = sorted(
            (name, streak) for name, streak in best_streaks.items()
            if streak >= starvation_weeks
        )
        triggered = bool(dominant and dominant[1] >= dominance_threshold and starved)
        return LockInReport(window=window, dominant=dominant, starved=starved,
                            triggered=triggered, weekly_shares=weekly_shares)
