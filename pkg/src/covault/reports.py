"""Audit report assembly: one JSON document, one markdown rendering."""

from __future__ import annotations

import json
from dataclasses import asdict

from .analytics import (
    AnalyticsError,
    detect_uptake,
    validator_honesty_audit,
    weekly_entropy,
)
from .conformance import conformance_check
from .vault import Vault

AUDIT_NAMES = ("conformance", "honesty", "uptake", "entropy")


def run_audits(vault: Vault, which: list[str] | None = None,
               min_pairs: int = 5, span_days: float = 28.0,
               reducibility_threshold: float = 0.9) -> dict:
    """Run the requested audits; each entry carries pass/fail plus detail."""
    which = list(which) if which else list(AUDIT_NAMES)
    report: dict = {"audits": {}, "requested": which}

    if "conformance" in which:
        result = conformance_check(vault, span_days=span_days,
                                   reducibility_threshold=reducibility_threshold)
        report["audits"]["conformance"] = {
            "passed": result.overall,
            "failing": result.failing(),
            **result.to_dict(),
        }
    if "honesty" in which:
        try:
            findings = validator_honesty_audit(vault, min_pairs=min_pairs)
            report["audits"]["honesty"] = {
                "passed": not findings,
                "findings": [asdict(f) for f in findings],
            }
        except AnalyticsError as exc:
            report["audits"]["honesty"] = {
                "passed": True, "findings": [],
                "note": f"nothing to audit: {exc}",
            }
    if "uptake" in which:
        chains = detect_uptake(vault)
        complete = [c for c in chains if c.complete]
        report["audits"]["uptake"] = {
            "passed": bool(complete),
            "complete_chains": len(complete),
            "chains": [_chain_dict(c) for c in chains],
        }
    if "entropy" in which:
        series = weekly_entropy(vault)
        report["audits"]["entropy"] = {
            "passed": True,
            "points": [asdict(p) for p in series.points],
        }
    report["passed"] = all(entry.get("passed", False)
                           for entry in report["audits"].values())
    return report


def _chain_dict(chain) -> dict:
    return {
        "novel_ngram": list(chain.novel_ngram),
        "complete": chain.complete,
        "seed": asdict(chain.seed),
        "reframe": asdict(chain.reframe),
        "adoption": asdict(chain.adoption) if chain.adoption else None,
        "reuse": [asdict(stage) for stage in chain.reuse],
    }


def render_markdown(report: dict) -> str:
    lines = ["# Audit report", ""]
    overall = "PASS" if report.get("passed") else "FAIL"
    lines.append(f"Overall: **{overall}**")
    lines.append("")
    audits = report.get("audits", {})

    if "conformance" in audits:
        entry = audits["conformance"]
        lines += ["## Conformance", ""]
        for condition in entry.get("conditions", []):
            status = "pass" if condition["passed"] else "FAIL"
            lines.append(f"- {condition['condition']} {condition['title']}: "
                         f"{status} — {condition['note']}")
            for evidence in condition.get("evidence", []):
                lines.append(f"  - {evidence}")
        lines.append("")
    if "honesty" in audits:
        entry = audits["honesty"]
        lines += ["## Validator honesty", ""]
        if entry["findings"]:
            for finding in entry["findings"]:
                lines.append(f"- {finding['kind']}: {finding['detail']}")
        else:
            lines.append("- no findings" + (f" ({entry['note']})" if entry.get("note") else ""))
        lines.append("")
    if "uptake" in audits:
        entry = audits["uptake"]
        lines += ["## Bidirectional uptake", "",
                  f"- complete chains: {entry['complete_chains']}"]
        for chain in entry["chains"]:
            if chain["complete"]:
                lines.append(f"  - {' '.join(chain['novel_ngram'])}: "
                             f"{chain['seed']['ts']} -> {chain['reframe']['ts']} -> "
                             f"{chain['adoption']['ts']} -> {chain['reuse'][0]['ts']}")
        lines.append("")
    if "entropy" in audits:
        entry = audits["entropy"]
        lines += ["## Weekly archetype entropy", ""]
        for point in entry["points"]:
            lines.append(f"- {point['iso_week']}: {point['entropy_bits']:.2f} bits "
                         f"({point['event_count']} events)")
        lines.append("")
    return "\n".join(lines)


def write_reports(vault: Vault, report: dict, stem: str = "reports/audit") -> tuple[str, str]:
    json_path = vault.put_file(
        f"{stem}.json",
        json.dumps(report, ensure_ascii=False, sort_keys=True, indent=2) + "\n")
    md_path = vault.put_file(f"{stem}.md", render_markdown(report))
    return json_path, md_path
