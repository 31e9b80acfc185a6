"""Harness configuration: a flat JSON file at the vault root."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

CONFIG_FILENAME = "covault.json"


@dataclass
class ScheduleSpec:
    notice_interval_min: int = 30
    know_weekday: int = 6   # ISO weekday index, Monday=0 .. Sunday=6
    know_hour: int = 3      # UTC
    know_minute: int = 4

    def __post_init__(self):
        if self.notice_interval_min < 1:
            raise ValueError("notice_interval_min must be >= 1")
        if not 0 <= self.know_weekday <= 6:
            raise ValueError("know_weekday must be 0..6")


@dataclass
class Thresholds:
    dominance: float = 0.40
    starvation_weeks: int = 2
    min_pairs: int = 5
    reducibility: float = 0.9
    continuity_days: float = 28.0
    uptake_min_ngram: int = 3


@dataclass
class HarnessConfig:
    vault_root: str = "."
    agent_name: str = "alicia"
    partner_name: str = "partner"
    default_skill: str = "memory_capture"
    default_skill_prompt: str = "Capture what matters from each exchange."
    scenario_path: str | None = None          # scripted profile when set
    http_base_url: str | None = None          # chat-completion endpoint
    http_models: dict = field(default_factory=dict)  # depth -> model id
    auth_env: str = "COVAULT_API_KEY"
    schedule: ScheduleSpec = field(default_factory=ScheduleSpec)
    thresholds: Thresholds = field(default_factory=Thresholds)
    scout_sources: dict = field(default_factory=dict)  # iso_week -> corpus items
    api_host: str = "127.0.0.1"
    api_port: int = 8498

    def to_json(self, portable: bool = False) -> str:
        """Serialize; portable form strips machine-specific paths so a
        replayed vault is byte-identical wherever it lands."""
        raw = asdict(self)
        if portable:
            raw["vault_root"] = "."
            if raw.get("scenario_path"):
                raw["scenario_path"] = Path(raw["scenario_path"]).name
        return json.dumps(raw, ensure_ascii=False, sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_dict(cls, raw: dict) -> "HarnessConfig":
        raw = dict(raw)
        schedule = ScheduleSpec(**raw.pop("schedule", {}))
        thresholds = Thresholds(**raw.pop("thresholds", {}))
        known = {f for f in cls.__dataclass_fields__}
        filtered = {k: v for k, v in raw.items() if k in known}
        return cls(schedule=schedule, thresholds=thresholds, **filtered)

    @classmethod
    def load(cls, vault_root: str | Path) -> "HarnessConfig":
        path = Path(vault_root) / CONFIG_FILENAME
        if not path.exists():
            return cls(vault_root=str(vault_root))
        config = cls.from_dict(json.loads(path.read_text("utf-8")))
        config.vault_root = str(vault_root)
        if config.scenario_path and not Path(config.scenario_path).is_absolute():
            config.scenario_path = str(Path(vault_root) / config.scenario_path)
        return config
