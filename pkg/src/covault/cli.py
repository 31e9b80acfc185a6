"""Command-line surface for the harness, the audits, and replay."""

from __future__ import annotations

import json
import sys
import threading
from pathlib import Path

import click

from .clock import Clock
from .config import HarnessConfig
from .reports import AUDIT_NAMES, render_markdown, run_audits, write_reports
from .runtime import Harness, replay_scenario
from .vault import Vault


@click.group()
@click.option("--vault", "vault_root", default=".", show_default=True,
              help="Vault root directory.")
@click.pass_context
def main(ctx, vault_root):
    ctx.ensure_object(dict)
    ctx.obj["vault_root"] = vault_root


def _config(ctx) -> HarnessConfig:
    return HarnessConfig.load(ctx.obj["vault_root"])


def _harness(ctx) -> Harness:
    return Harness.from_config(_config(ctx), clock=Clock())


@main.command()
@click.option("--agent-name", default="alicia", show_default=True)
@click.option("--scenario", default=None, help="Scripted scenario file for the model backend.")
@click.option("--http-base-url", default=None, help="Chat-completion endpoint URL.")
@click.pass_context
def init(ctx, agent_name, scenario, http_base_url):
    """Create the vault layout, constitution, and archetype templates."""
    config = HarnessConfig(vault_root=ctx.obj["vault_root"], agent_name=agent_name,
                           scenario_path=scenario, http_base_url=http_base_url)
    if not scenario and not http_base_url:
        # Init should work before a backend is chosen; an empty scripted
        # scenario stands in until covault.json points somewhere real.
        config.scenario_path = str(Path(ctx.obj["vault_root"]) / "scenario.json")
    harness = Harness.from_config(config)
    if config.scenario_path and not Path(config.scenario_path).exists():
        harness.vault.ensure_layout()
        harness.vault.put_file("scenario.json", '{"steps": []}\n')
    created = harness.init_vault()
    click.echo(json.dumps(created))


@main.command()
@click.option("--url", default=None, help="Daemon URL; in-process when omitted.")
@click.option("--surface", default="cli", show_default=True)
@click.pass_context
def chat(ctx, url, surface):
    """REPL over the chat endpoint."""
    harness = None if url else _harness(ctx)
    client = None
    if url:
        import httpx

        client = httpx.Client(base_url=url, timeout=120)
    click.echo("covault chat (empty line to exit)")
    while True:
        try:
            line = input("> ").strip()
        except EOFError:
            break
        if not line:
            break
        if client is not None:
            response = client.post("/chat", json={"text": line, "surface": surface})
            body = response.json()
        else:
            body = harness.handle_message(surface, line).to_dict()
        badge = body.get("archetype") or "-"
        marker = " [truncated]" if body.get("truncated") else ""
        click.echo(f"[{badge}]{marker} {body.get('agent_text', '')}")


@main.command()
@click.option("--host", default=None)
@click.option("--port", default=None, type=int)
@click.option("--console", "console_dir", default=None,
              type=click.Path(exists=True, file_okay=False),
              help="Serve a built console UI at /console.")
@click.option("--no-schedulers", is_flag=True, default=False,
              help="API only; skip the Notice/Know background loops.")
@click.pass_context
def daemon(ctx, host, port, console_dir, no_schedulers):
    """Serve the HTTP API with the Notice/Know schedulers running."""
    import uvicorn

    from .api import create_app

    config = _config(ctx)
    harness = Harness.from_config(config, clock=Clock())
    harness.init_vault()
    stop = threading.Event()
    if not no_schedulers:
        harness.start_schedulers(stop)
    app = create_app(harness)
    if console_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/console", StaticFiles(directory=console_dir, html=True),
                  name="console")
    try:
        uvicorn.run(app, host=host or config.api_host,
                    port=port or config.api_port, log_level="warning")
    finally:
        stop.set()


@main.command()
@click.option("--week", required=True, help="ISO week, e.g. 2026-W18.")
@click.pass_context
def triad(ctx, week):
    """Generate the weekly profile pair and delta."""
    harness = _harness(ctx)
    for subject in ("agent", "partner"):
        if not harness.vault.doc_exists(harness.know.profile_path(subject, week)):
            harness.know.generate_profile(subject, week, force=True)
    doc = harness.know.generate_delta(week)
    click.echo(doc.path)


@main.command()
@click.option("--week", required=True)
@click.pass_context
def scout(ctx, week):
    """Run the weekly research scout."""
    harness = _harness(ctx)
    corpus = harness.config.scout_sources.get(week, [])
    digest = harness.know.run_scout(week, corpus)
    click.echo(json.dumps({"findings": len(digest.findings),
                           "adrs": digest.adr_refs}))


@main.command()
@click.option("--skill", required=True)
@click.option("--force-reset", is_flag=True, default=False)
@click.pass_context
def improve(ctx, skill, force_reset):
    """Propose, apply when unblocked, and validate a skill rewrite."""
    harness = _harness(ctx)
    click.echo(json.dumps(harness.improve(skill, force_reset=force_reset)))


@main.command()
@click.option("--conformance", "selected", flag_value="conformance")
@click.option("--honesty", "selected", flag_value="honesty")
@click.option("--uptake", "selected", flag_value="uptake")
@click.option("--entropy", "selected", flag_value="entropy")
@click.option("--out", default="reports/audit", show_default=True,
              help="Vault-relative report stem.")
@click.pass_context
def audit(ctx, selected, out):
    """Run audits; nonzero exit when any requested audit fails."""
    config = _config(ctx)
    vault = Vault(config.vault_root)
    which = [selected] if selected else list(AUDIT_NAMES)
    report = run_audits(vault, which,
                        min_pairs=config.thresholds.min_pairs,
                        span_days=config.thresholds.continuity_days,
                        reducibility_threshold=config.thresholds.reducibility)
    write_reports(vault, report, stem=out)
    click.echo(render_markdown(report))
    if not report["passed"]:
        failing = [name for name, entry in report["audits"].items()
                   if not entry.get("passed")]
        click.echo(f"FAILED: {', '.join(failing)}", err=True)
        sys.exit(1)


@main.command()
@click.option("--scenario", required=True, type=click.Path(exists=True))
@click.option("--out", default=None, help="Target vault directory (defaults to --vault).")
@click.pass_context
def replay(ctx, scenario, out):
    """Deterministically rebuild a vault from a scenario file."""
    target = out or ctx.obj["vault_root"]
    summary = replay_scenario(scenario, target)
    click.echo(json.dumps(summary))


@main.command()
@click.pass_context
def report(ctx):
    """Full audit bundle: reports/audit.json and reports/audit.md."""
    config = _config(ctx)
    vault = Vault(config.vault_root)
    full = run_audits(vault, list(AUDIT_NAMES),
                      min_pairs=config.thresholds.min_pairs,
                      span_days=config.thresholds.continuity_days,
                      reducibility_threshold=config.thresholds.reducibility)
    json_path, md_path = write_reports(vault, full)
    click.echo(json.dumps({"json": json_path, "markdown": md_path,
                           "passed": full["passed"]}))


if __name__ == "__main__":
    main()
