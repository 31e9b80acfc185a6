"""Clock abstraction so replays can pin time.

All timestamps in the vault are RFC 3339 UTC text with second precision
(`2026-04-26T05:05:00Z`). A FixedClock only moves when told to, which is
what makes two replays of the same scenario byte-identical.
"""

from __future__ import annotations

from datetime import datetime, timezone


def parse_ts(text: str) -> datetime:
    """Parse an RFC 3339 UTC timestamp (accepts trailing 'Z' or offset)."""
    raw = text.strip()
    if raw.endswith("Z"):
        raw = raw[:-1] + "+00:00"
    dt = datetime.fromisoformat(raw)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc)


def format_ts(dt: datetime) -> str:
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


class Clock:
    """Wall clock. Subclasses override now()."""

    def now(self) -> datetime:
        return datetime.now(timezone.utc).replace(microsecond=0)

    def now_ts(self) -> str:
        return format_ts(self.now())


class FixedClock(Clock):
    """Clock pinned to an instant; advanced explicitly by the driver."""

    def __init__(self, start: datetime | str):
        self._now = parse_ts(start) if isinstance(start, str) else start

    def now(self) -> datetime:
        return self._now

    def set(self, instant: datetime | str) -> None:
        self._now = parse_ts(instant) if isinstance(instant, str) else instant

    def advance(self, seconds: int) -> None:
        from datetime import timedelta

        self._now = self._now + timedelta(seconds=seconds)
