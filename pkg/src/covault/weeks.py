"""ISO-week helpers. Weeks are always computed in UTC ("2026-W18")."""

from __future__ import annotations

from datetime import date, datetime, timedelta, timezone

from .clock import parse_ts


def iso_week_of(instant: datetime | str) -> str:
    dt = parse_ts(instant) if isinstance(instant, str) else instant.astimezone(timezone.utc)
    year, week, _ = dt.isocalendar()
    return f"{year}-W{week:02d}"


def parse_week(week: str) -> tuple[int, int]:
    """'2026-W18' -> (2026, 18)."""
    year_part, week_part = week.split("-W")
    return int(year_part), int(week_part)


def week_start(week: str) -> datetime:
    """Monday 00:00:00 UTC of the given ISO week."""
    year, number = parse_week(week)
    monday = date.fromisocalendar(year, number, 1)
    return datetime(monday.year, monday.month, monday.day, tzinfo=timezone.utc)


def week_end(week: str) -> datetime:
    """Exclusive end: Monday 00:00:00 UTC of the following week."""
    return week_start(week) + timedelta(days=7)


def next_week(week: str) -> str:
    return iso_week_of(week_start(week) + timedelta(days=7))


def week_range(first: str, last: str) -> list[str]:
    """Inclusive list of ISO weeks from first to last."""
    weeks = [first]
    current = first
    guard = 0
    while current != last:
        current = next_week(current)
        weeks.append(current)
        guard += 1
        if guard > 5000:
            raise ValueError(f"week range too large or inverted: {first}..{last}")
    return weeks


def in_week(ts: str, week: str) -> bool:
    instant = parse_ts(ts)
    return week_start(week) <= instant < week_end(week)
