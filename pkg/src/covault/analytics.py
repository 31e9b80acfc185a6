"""Quantitative trace analytics over the vault.

Everything in this module is a pure function of the bytes on disk: two runs
over the same vault produce identical results. That property is what lets
the audits double as falsification tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .clock import parse_ts
from .textutil import content_word_set, content_words, ngrams, sentences
from .vault import Vault
from .weeks import iso_week_of, week_range, week_start

DAY_SECONDS = 86400.0


class AnalyticsError(Exception):
    pass


# -- archetype distribution ---------------------------------------------------


@dataclass
class EntropyPoint:
    iso_week: str
    entropy_bits: float
    event_count: int


@dataclass
class EntropySeries:
    points: list[EntropyPoint]

    def by_week(self) -> dict[str, float]:
        return {p.iso_week: p.entropy_bits for p in self.points}


def shannon_entropy(counts: dict[str, int]) -> float:
    """H = -sum(p * log2 p) over nonzero categories."""
    total = sum(counts.values())
    if total <= 0:
        return 0.0
    h = 0.0
    for count in counts.values():
        if count > 0:
            p = count / total
            h -= p * math.log2(p)
    return h


def weekly_archetype_counts(vault: Vault, window: tuple[str, str] | None = None,
                            ) -> dict[str, dict[str, int]]:
    counts: dict[str, dict[str, int]] = {}
    for record in vault.read_stream("archetype_log"):
        week = iso_week_of(record.ts)
        if window is not None and not (window[0] <= week <= window[1]):
            continue
        name = record.payload.get("archetype", "")
        counts.setdefault(week, {})
        counts[week][name] = counts[week].get(name, 0) + 1
    return counts


def weekly_entropy(vault: Vault, window: tuple[str, str] | None = None) -> EntropySeries:
    """Shannon entropy of the archetype distribution by ISO week.

    Weeks with zero events are omitted from the series.
    """
    counts = weekly_archetype_counts(vault, window)
    points = [
        EntropyPoint(iso_week=week, entropy_bits=shannon_entropy(week_counts),
                     event_count=sum(week_counts.values()))
        for week, week_counts in sorted(counts.items())
        if sum(week_counts.values()) > 0
    ]
    return EntropySeries(points=points)


def archetype_share(vault: Vault, window: tuple[str, str],
                    subset: set[str] | None = None,
                    from_ts: str | None = None, to_ts: str | None = None) -> float:
    """Fraction of events in the window produced by the subset archetypes.

    Timestamp bounds, when given, take precedence over the week window so a
    date-bounded span (not aligned to week boundaries) can be measured.
    """
    if from_ts or to_ts:
        records = vault.read_stream("archetype_log", from_ts=from_ts, to_ts=to_ts)
    else:
        weeks = set(week_range(window[0], window[1]))
        records = [r for r in vault.read_stream("archetype_log")
                   if iso_week_of(r.ts) in weeks]
    total = len(records)
    if total == 0:
        raise AnalyticsError("no archetype events in range")
    if subset is None:
        return 1.0
    hit = sum(1 for r in records if r.payload.get("archetype") in subset)
    return hit / total


# -- logging-rate counterfactual ------------------------------------------------


@dataclass
class RateComparison:
    pre_rate: float
    post_rate: float
    rel_diff: float
    pre_count: int
    post_count: int
    pre_days: float
    post_days: float


def rate_counterfactual(vault: Vault, boundary_ts: str) -> RateComparison:
    """Interaction rate before vs after a boundary instant.

    Rates are reported at two decimals and the relative difference is taken
    over the reported (rounded) rates with max(pre, post) as denominator.
    """
    records = vault.read_stream("interactions")
    boundary = parse_ts(boundary_ts)
    pre = [r for r in records if parse_ts(r.ts) < boundary]
    post = [r for r in records if parse_ts(r.ts) >= boundary]
    if not pre or not post:
        raise AnalyticsError("interactions must exist on both sides of the boundary")
    first = parse_ts(pre[0].ts)
    last = parse_ts(post[-1].ts)
    pre_days = (boundary - first).total_seconds() / DAY_SECONDS
    post_days = (last - boundary).total_seconds() / DAY_SECONDS
    if pre_days <= 0 or post_days <= 0:
        raise AnalyticsError("degenerate window around boundary")
    pre_rate = round(len(pre) / pre_days, 2)
    post_rate = round(len(post) / post_days, 2)
    rel_diff = abs(pre_rate - post_rate) / max(pre_rate, post_rate)
    return RateComparison(pre_rate=pre_rate, post_rate=post_rate, rel_diff=rel_diff,
                          pre_count=len(pre), post_count=len(post),
                          pre_days=pre_days, post_days=post_days)


# -- bidirectional uptake ---------------------------------------------------------


@dataclass
class UptakeStage:
    ts: str
    author: str
    text_ref: str
    excerpt: str


@dataclass
class UptakeChain:
    seed: UptakeStage
    reframe: UptakeStage
    novel_ngram: tuple[str, ...]
    adoption: UptakeStage | None
    reuse: list[UptakeStage] = field(default_factory=list)

    @property
    def complete(self) -> bool:
        return self.adoption is not None and bool(self.reuse)


@dataclass
class _Utterance:
    ts: str
    author: str
    ref: str
    text: str
    is_doc: bool = False


def _corpus(vault: Vault) -> list[_Utterance]:
    """Stream texts plus docs, as (ts, author, ref, text), time-ordered."""
    items: list[_Utterance] = []
    for record in vault.read_stream("interactions"):
        p = record.payload
        if p.get("type") != "chat":
            continue
        ref = f"logs/interactions.jsonl#{record.seq}"
        if p.get("human_text"):
            items.append(_Utterance(record.ts, "human", ref, p["human_text"]))
        if p.get("agent_text"):
            items.append(_Utterance(record.ts, "agent", ref, p["agent_text"]))
    for doc in vault.all_docs():
        author = str(doc.frontmatter.get("author", ""))
        created = str(doc.frontmatter.get("created_ts", ""))
        if author in ("human", "agent") and created:
            items.append(_Utterance(created, author, doc.path, doc.body, is_doc=True))
    items.sort(key=lambda u: (parse_ts(u.ts), u.ref))
    return items


def detect_uptake(vault: Vault, min_ngram: int = 3,
                  reuse_min_days: float = 7.0) -> list[UptakeChain]:
    """Find seed -> reframe -> adoption -> reuse propagation chains.

    A chain is complete when (1) a human seed introduces topic terms, (2)
    agent text contains a content n-gram absent from all prior human text,
    (3) later human text contains that n-gram, and (4) the agent reuses the
    topic in a document at least a week after the reframe.
    """
    corpus = _corpus(vault)
    human_items = [u for u in corpus if u.author == "human"]
    agent_items = [u for u in corpus if u.author == "agent"]

    chains: list[UptakeChain] = []
    claimed_ngrams: set[tuple[str, ...]] = set()

    for reframe in agent_items:
        reframe_instant = parse_ts(reframe.ts)
        reframe_words = content_words(reframe.text)
        prior_human_grams: set[tuple[str, ...]] = set()
        prior_human = [u for u in human_items if parse_ts(u.ts) <= reframe_instant]
        for u in prior_human:
            prior_human_grams.update(ngrams(content_words(u.text), min_ngram))

        for gram in ngrams(reframe_words, min_ngram):
            if gram in prior_human_grams or gram in claimed_ngrams:
                continue
            adoption = _first_containing(human_items, gram, after=reframe_instant,
                                         n=min_ngram)
            if adoption is None:
                continue
            seed = _find_seed(prior_human, reframe, before=reframe_instant)
            if seed is None:
                continue
            topic_terms = content_word_set(seed.text) & set(reframe_words)
            if not topic_terms:
                continue
            reuse = _find_reuse(agent_items, topic_terms,
                                after=parse_ts(adoption.ts),
                                not_before=reframe_instant,
                                min_days=reuse_min_days)
            claimed_ngrams.add(gram)
            chains.append(UptakeChain(
                seed=_stage(seed), reframe=_stage(reframe), novel_ngram=gram,
                adoption=_stage(adoption), reuse=[_stage(u) for u in reuse]))
    return chains


def _stage(u: _Utterance) -> UptakeStage:
    excerpt = u.text.strip().replace("\n", " ")
    if len(excerpt) > 120:
        excerpt = excerpt[:117] + "..."
    return UptakeStage(ts=u.ts, author=u.author, text_ref=u.ref, excerpt=excerpt)


def _first_containing(items: list[_Utterance], gram: tuple[str, ...],
                      after, n: int) -> _Utterance | None:
    for u in items:
        if parse_ts(u.ts) <= after:
            continue
        if gram in set(ngrams(content_words(u.text), n)):
            return u
    return None


def _find_seed(prior_human: list[_Utterance], reframe: _Utterance,
               before) -> _Utterance | None:
    reframe_words = content_word_set(reframe.text)
    for u in reversed(prior_human):
        if parse_ts(u.ts) >= before:
            continue
        if content_word_set(u.text) & reframe_words:
            return u
    return None


def _find_reuse(agent_items: list[_Utterance], topic_terms: set[str],
                after, not_before, min_days: float) -> list[_Utterance]:
    out = []
    for u in agent_items:
        if not u.is_doc:
            continue
        instant = parse_ts(u.ts)
        if instant <= after:
            continue
        if (instant - not_before).total_seconds() < min_days * DAY_SECONDS:
            continue
        if content_word_set(u.text) & topic_terms:
            out.append(u)
    return out


# -- delta reducibility (falsification test D3) -----------------------------------


@dataclass
class ReducibilityResult:
    coverage: float
    reducible: bool
    uncovered_sentences: list[str] = field(default_factory=list)


def delta_reducibility(delta_body: str, profile_bodies: tuple[str, str],
                       threshold: float = 0.9) -> ReducibilityResult:
    """Fraction of delta sentences lexically covered by the two profiles.

    A sentence counts as covered when its content-word set is a subset of
    the union of both profiles' content words. High coverage means the
    partnership-level document reduces to its parts.
    """
    profile_words = content_word_set(profile_bodies[0]) | content_word_set(profile_bodies[1])
    delta_sentences = sentences(delta_body)
    if not delta_sentences:
        return ReducibilityResult(coverage=1.0, reducible=True)
    covered = 0
    uncovered = []
    for sentence in delta_sentences:
        words = content_word_set(sentence)
        if words <= profile_words:
            covered += 1
        else:
            uncovered.append(sentence)
    coverage = covered / len(delta_sentences)
    return ReducibilityResult(coverage=coverage, reducible=coverage >= threshold,
                              uncovered_sentences=uncovered)


# -- validator honesty audit (falsification test D4) --------------------------------


@dataclass
class HonestyFinding:
    kind: str  # fabricated_positive | positive_streak_vs_flat_scores
    detail: str
    run_id: str | None = None
    window: tuple[str, str] | None = None


def validator_honesty_audit(vault: Vault, min_pairs: int = 5) -> list[HonestyFinding]:
    """Flag fabricated positives and positive streaks over flat quality.

    Rule 1 fires per episode: assessment "improved" with fewer paired
    samples than min_pairs. Rule 2 fires once per audit window: every
    verdict positive while the weekly mean first-order score has a
    non-positive least-squares slope (needs at least two scored weeks).
    """
    findings: list[HonestyFinding] = []
    validations = [r for r in vault.read_stream("improve_runs")
                   if r.payload.get("kind") == "validation"]
    if not validations:
        raise AnalyticsError("no improve episodes to audit")

    for record in validations:
        p = record.payload
        if p.get("assessment") == "improved" and int(p.get("paired_samples", 0)) < min_pairs:
            findings.append(HonestyFinding(
                kind="fabricated_positive",
                detail=(f"{p['run_id']} reports improved with only "
                        f"{p.get('paired_samples', 0)} paired samples"),
                run_id=p["run_id"]))

    all_positive = all(r.payload.get("assessment") == "improved" for r in validations)
    if all_positive:
        weekly_scores: dict[str, list[int]] = {}
        for record in vault.read_stream("constitution_scores"):
            weekly_scores.setdefault(iso_week_of(record.ts), []).append(
                record.payload["score"])
        weeks = sorted(weekly_scores)
        if len(weeks) >= 2:
            means = [sum(weekly_scores[w]) / len(weekly_scores[w]) for w in weeks]
            slope = _least_squares_slope(means)
            if slope <= 0:
                findings.append(HonestyFinding(
                    kind="positive_streak_vs_flat_scores",
                    detail=(f"all {len(validations)} verdicts are improved while the "
                            f"weekly mean score slope is {slope:.4f}"),
                    window=(weeks[0], weeks[-1])))
    return findings


def _least_squares_slope(values: list[float]) -> float:
    n = len(values)
    xs = range(n)
    mean_x = (n - 1) / 2
    mean_y = sum(values) / n
    num = sum((x - mean_x) * (y - mean_y) for x, y in zip(xs, values))
    den = sum((x - mean_x) ** 2 for x in xs)
    return num / den if den else 0.0


# -- Cohen's kappa ---------------------------------------------------------------


@dataclass
class KappaResult:
    kappa: float
    observed_agreement: float
    expected_agreement: float
    n_items: int


def cohen_kappa(labels_a: list[str], labels_b: list[str]) -> KappaResult:
    """Two-rater Cohen's kappa over a categorical label space."""
    if len(labels_a) != len(labels_b):
        raise AnalyticsError("label lists must have equal length")
    n = len(labels_a)
    if n == 0:
        raise AnalyticsError("need at least one item")
    po = sum(1 for a, b in zip(labels_a, labels_b) if a == b) / n
    categories = set(labels_a) | set(labels_b)
    pe = 0.0
    for cat in categories:
        pa = sum(1 for a in labels_a if a == cat) / n
        pb = sum(1 for b in labels_b if b == cat) / n
        pe += pa * pb
    if pe >= 1.0:
        kappa = 1.0 if po == 1.0 else 0.0
    else:
        kappa = (po - pe) / (1.0 - pe)
    return KappaResult(kappa=kappa, observed_agreement=po,
                       expected_agreement=pe, n_items=n)
