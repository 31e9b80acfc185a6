"""The on-disk vault: append-only streams plus markdown documents.

Everything the system maintains lives here as inspectable text. This module
is the single write funnel — no other module touches the filesystem — which
is what makes the whole state auditable from artifacts.

Streams are JSONL (one record per line) or TSV; documents are markdown with
a flat `key: value` frontmatter fence. Appends are durable before they
return, stamped with a monotone per-stream timestamp, and numbered with a
gap-free per-stream sequence.
"""

from __future__ import annotations

import copy
import json
import os
import shutil
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable

from .clock import Clock, format_ts, parse_ts
from .schemas import SchemaError, validate_payload
from .weeks import iso_week_of

AUTHORS = ("human", "agent", "system")

DOC_KINDS = (
    "self_portrait",
    "self_profile",
    "partner_profile",
    "delta",
    "scout_digest",
    "meta_reflexion",
    "constitution",
    "growth_journal",
    "adr",
)

TSV_COLUMNS = ("ts", "interaction_id", "principle_id", "score", "rationale")


class VaultError(Exception):
    """Vault contract violation (unknown stream, escaping path, bad doc)."""


@dataclass(frozen=True)
class ChannelSpec:
    path: str
    format: str  # jsonl | tsv | json | mdlog

    def __post_init__(self):
        if self.format not in ("jsonl", "tsv", "json", "mdlog"):
            raise VaultError(f"unknown channel format {self.format!r}")


@dataclass
class VaultLayout:
    """Where each stream and document kind lives, relative to the root."""

    channels: dict[str, ChannelSpec]
    doc_roots: dict[str, str]

    @classmethod
    def default(cls) -> "VaultLayout":
        return cls(
            channels={
                "archetype_log": ChannelSpec("memory/archetype_log.jsonl", "jsonl"),
                "partner_learnings": ChannelSpec("memory/partner_learnings.jsonl", "jsonl"),
                "interactions": ChannelSpec("logs/interactions.jsonl", "jsonl"),
                "constitution_scores": ChannelSpec("constitution_scores.tsv", "tsv"),
                "episode_scores": ChannelSpec("episode_scores.json", "json"),
                "meta_reflexion": ChannelSpec("memory/meta_reflexion_log.md", "mdlog"),
                "skills": ChannelSpec("memory/skills.jsonl", "jsonl"),
                "improve_runs": ChannelSpec("memory/improve_runs.jsonl", "jsonl"),
            },
            doc_roots={
                "self_portrait": "Wisdom/Lived",
                "self_profile": "Self/Profiles",
                "partner_profile": "Self/Profiles",
                "delta": "Self/Profiles",
                "scout_digest": "architecture-scout",
                "meta_reflexion": "memory",
                "constitution": "Constitution",
                "growth_journal": "Myself/Journal",
                "adr": "ADRs",
            },
        )

    def validate(self) -> None:
        for name, spec in self.channels.items():
            _check_relative(spec.path, f"channel {name}")
        for kind, root in self.doc_roots.items():
            if kind not in DOC_KINDS:
                raise VaultError(f"unknown doc kind {kind!r} in layout")
            _check_relative(root, f"doc root {kind}")

    def record_streams(self) -> list[str]:
        return [n for n, s in self.channels.items() if s.format in ("jsonl", "tsv")]


def _check_relative(rel: str, what: str) -> None:
    p = Path(rel)
    if p.is_absolute() or ".." in p.parts:
        raise VaultError(f"{what} path escapes vault root: {rel!r}")


@dataclass
class LogRecord:
    """One event in a named append-only stream."""

    stream: str
    seq: int
    ts: str
    author: str
    payload: dict
    model_id: str | None = None

    def to_json(self) -> str:
        doc = {
            "seq": self.seq,
            "ts": self.ts,
            "author": self.author,
            "model_id": self.model_id,
            "payload": self.payload,
        }
        return json.dumps(doc, ensure_ascii=False, sort_keys=True)

    @classmethod
    def from_json(cls, stream: str, line: str) -> "LogRecord":
        doc = json.loads(line)
        return cls(
            stream=stream,
            seq=int(doc["seq"]),
            ts=str(doc["ts"]),
            author=str(doc["author"]),
            payload=doc.get("payload") or {},
            model_id=doc.get("model_id"),
        )


@dataclass
class ReadDiagnostic:
    stream: str
    line_number: int
    message: str


@dataclass
class IntegrityFinding:
    stream: str
    kind: str  # gap | ts_regression | schema | malformed
    detail: str
    seq: int | None = None
    line_number: int | None = None


@dataclass
class IntegrityReport:
    stream: str
    findings: list[IntegrityFinding] = field(default_factory=list)

    @property
    def clean(self) -> bool:
        return not self.findings


@dataclass
class MarkdownDoc:
    """Vault document with flat frontmatter. Path is vault-relative."""

    path: str
    kind: str
    frontmatter: dict
    body: str

    def render(self) -> str:
        lines = ["---"]
        ordered = ["kind", "author", "iso_week", "created_ts", "generator"]
        seen = set()
        for key in ordered:
            if key in self.frontmatter:
                lines.append(f"{key}: {_fm_value(self.frontmatter[key])}")
                seen.add(key)
        for key in sorted(self.frontmatter):
            if key not in seen:
                lines.append(f"{key}: {_fm_value(self.frontmatter[key])}")
        lines.append("---")
        lines.append("")
        body = self.body if self.body.endswith("\n") else self.body + "\n"
        return "\n".join(lines) + body

    @classmethod
    def parse(cls, relpath: str, text: str) -> "MarkdownDoc":
        frontmatter: dict = {}
        body = text
        if text.startswith("---"):
            lines = text.split("\n")
            try:
                end = lines.index("---", 1)
            except ValueError:
                end = None
            if end is not None:
                for line in lines[1:end]:
                    if ":" not in line:
                        continue
                    key, _, value = line.partition(":")
                    frontmatter[key.strip()] = _fm_parse(value.strip())
                body = "\n".join(lines[end + 1 :]).lstrip("\n")
        kind = str(frontmatter.get("kind", ""))
        return cls(path=relpath, kind=kind, frontmatter=frontmatter, body=body)


def _fm_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def _fm_parse(raw: str):
    if raw == "true":
        return True
    if raw == "false":
        return False
    try:
        return int(raw)
    except ValueError:
        return raw


@dataclass
class _StreamTail:
    lock: threading.Lock
    seq: int
    last_ts: str | None


class Vault:
    """Filesystem-backed vault with one designated writer per stream.

    Writers in different streams may run concurrently; readers always see a
    consistent prefix because reads snapshot the file at EOF.
    """

    def __init__(self, root: str | Path, layout: VaultLayout | None = None,
                 clock: Clock | None = None):
        self.root = Path(root)
        self.layout = layout or VaultLayout.default()
        self.layout.validate()
        self.clock = clock or Clock()
        self._tails: dict[str, _StreamTail] = {}
        self._tails_guard = threading.Lock()
        self._listeners: list[Callable[[LogRecord], None]] = []
        self._doc_lock = threading.Lock()

    # -- paths ----------------------------------------------------------

    def ensure_layout(self) -> None:
        self.root.mkdir(parents=True, exist_ok=True)
        for spec in self.layout.channels.values():
            (self.root / spec.path).parent.mkdir(parents=True, exist_ok=True)
        for rel in self.layout.doc_roots.values():
            (self.root / rel).mkdir(parents=True, exist_ok=True)

    def channel_path(self, stream: str) -> Path:
        spec = self.layout.channels.get(stream)
        if spec is None:
            raise VaultError(f"unknown stream {stream!r}")
        return self.root / spec.path

    def _resolve_inside(self, relpath: str) -> Path:
        _check_relative(relpath, "document")
        target = (self.root / relpath).resolve()
        if not str(target).startswith(str(self.root.resolve()) + os.sep):
            raise VaultError(f"path escapes vault root: {relpath!r}")
        return target

    # -- streams ---------------------------------------------------------

    def subscribe(self, listener: Callable[[LogRecord], None]) -> None:
        """Register a callback invoked after every durable append."""
        self._listeners.append(listener)

    def _tail(self, stream: str) -> _StreamTail:
        with self._tails_guard:
            tail = self._tails.get(stream)
            if tail is None:
                tail = _StreamTail(lock=threading.Lock(), seq=0, last_ts=None)
                path = self.channel_path(stream)
                if path.exists():
                    seq = 0
                    last_ts = None
                    fmt = self.layout.channels[stream].format
                    # Strict '\n' framing: unicode line separators (NEL,
                    # U+2028...) may appear raw inside JSON strings.
                    for line in path.read_text("utf-8").split("\n"):
                        if not line.strip():
                            continue
                        seq += 1
                        try:
                            if fmt == "jsonl":
                                last_ts = str(json.loads(line).get("ts", last_ts))
                            else:
                                last_ts = line.split("\t", 1)[0]
                        except (json.JSONDecodeError, IndexError):
                            pass
                    tail.seq = seq
                    tail.last_ts = last_ts
                self._tails[stream] = tail
            return tail

    def _stamp(self, tail: _StreamTail) -> str:
        # Clock regressions clamp to the stream's last timestamp so the
        # trail stays monotone even under NTP jitter.
        now = self.clock.now_ts()
        if tail.last_ts is not None and now < tail.last_ts:
            return tail.last_ts
        return now

    def append_record(self, stream: str, author: str, payload: dict,
                      model_id: str | None = None) -> LogRecord:
        spec = self.layout.channels.get(stream)
        if spec is None:
            raise VaultError(f"unknown stream {stream!r}")
        if spec.format not in ("jsonl", "tsv"):
            raise VaultError(f"stream {stream!r} is not an appendable record stream")
        if author not in AUTHORS:
            raise VaultError(f"author must be one of {AUTHORS}, got {author!r}")
        try:
            validate_payload(stream, payload)
        except SchemaError as exc:
            raise SchemaError(f"{stream}: {exc}") from exc

        tail = self._tail(stream)
        with tail.lock:
            ts = self._stamp(tail)
            record = LogRecord(stream=stream, seq=tail.seq + 1, ts=ts,
                               author=author, payload=copy.deepcopy(payload),
                               model_id=model_id)
            if spec.format == "jsonl":
                line = record.to_json()
            else:
                line = _tsv_line(record)
            path = self.channel_path(stream)
            path.parent.mkdir(parents=True, exist_ok=True)
            with open(path, "a", encoding="utf-8") as handle:
                handle.write(line + "\n")
                handle.flush()
                os.fsync(handle.fileno())
            tail.seq = record.seq
            tail.last_ts = ts
            # Notified under the stream lock so subscribers observe seq
            # order; listeners must enqueue, never append to this stream.
            for listener in list(self._listeners):
                listener(record)
        return record

    def read_stream(self, stream: str, since_seq: int | None = None,
                    until_seq: int | None = None, from_ts: str | None = None,
                    to_ts: str | None = None,
                    with_diagnostics: bool = False):
        """Records in seq order, optionally windowed by seq or timestamp.

        Timestamp windows are inclusive on both ends. Corrupt lines are
        skipped and reported as diagnostics instead of failing the read.
        """
        spec = self.layout.channels.get(stream)
        if spec is None:
            raise VaultError(f"unknown stream {stream!r}")
        path = self.channel_path(stream)
        records: list[LogRecord] = []
        diagnostics: list[ReadDiagnostic] = []
        if path.exists():
            text = path.read_text("utf-8")
            line_no = 0
            tsv_seq = 0
            for line in text.split("\n"):
                line_no += 1
                if not line.strip():
                    continue
                try:
                    if spec.format == "jsonl":
                        record = LogRecord.from_json(stream, line)
                    else:
                        tsv_seq += 1
                        record = _tsv_parse(stream, tsv_seq, line)
                except (json.JSONDecodeError, KeyError, ValueError) as exc:
                    diagnostics.append(ReadDiagnostic(stream, line_no, str(exc)))
                    continue
                records.append(record)
        lo = parse_ts(from_ts) if from_ts else None
        hi = parse_ts(to_ts) if to_ts else None
        out = []
        for record in records:
            if since_seq is not None and record.seq < since_seq:
                continue
            if until_seq is not None and record.seq > until_seq:
                continue
            if lo is not None or hi is not None:
                instant = parse_ts(record.ts)
                if lo is not None and instant < lo:
                    continue
                if hi is not None and instant > hi:
                    continue
            out.append(record)
        out.sort(key=lambda r: r.seq)
        if with_diagnostics:
            return out, diagnostics
        return out

    def verify_stream_integrity(self, stream: str) -> IntegrityReport:
        """Seq gaps, timestamp regressions, schema violations, bad lines."""
        records, diagnostics = self.read_stream(stream, with_diagnostics=True)
        report = IntegrityReport(stream=stream)
        for diag in diagnostics:
            report.findings.append(IntegrityFinding(
                stream=stream, kind="malformed", detail=diag.message,
                line_number=diag.line_number))
        expected = 1
        prev_ts: str | None = None
        for record in records:
            if record.seq != expected:
                for missing in range(expected, record.seq):
                    report.findings.append(IntegrityFinding(
                        stream=stream, kind="gap",
                        detail=f"missing seq {missing}", seq=missing))
                expected = record.seq
            if prev_ts is not None and record.ts < prev_ts:
                report.findings.append(IntegrityFinding(
                    stream=stream, kind="ts_regression",
                    detail=f"ts {record.ts} < previous {prev_ts}", seq=record.seq))
            try:
                validate_payload(stream, record.payload)
            except SchemaError as exc:
                report.findings.append(IntegrityFinding(
                    stream=stream, kind="schema", detail=str(exc), seq=record.seq))
            prev_ts = record.ts
            expected += 1
        return report

    # -- json channels ----------------------------------------------------

    def read_json_channel(self, name: str) -> dict:
        spec = self.layout.channels.get(name)
        if spec is None or spec.format != "json":
            raise VaultError(f"{name!r} is not a json channel")
        path = self.channel_path(name)
        if not path.exists():
            return {}
        return json.loads(path.read_text("utf-8"))

    def write_json_channel(self, name: str, payload: dict) -> None:
        spec = self.layout.channels.get(name)
        if spec is None or spec.format != "json":
            raise VaultError(f"{name!r} is not a json channel")
        text = json.dumps(payload, ensure_ascii=False, sort_keys=True, indent=2) + "\n"
        self._atomic_write(self.channel_path(name), text)

    # -- markdown log channels ---------------------------------------------

    def append_markdown_log(self, name: str, section: str) -> None:
        spec = self.layout.channels.get(name)
        if spec is None or spec.format != "mdlog":
            raise VaultError(f"{name!r} is not a markdown log channel")
        path = self.channel_path(name)
        path.parent.mkdir(parents=True, exist_ok=True)
        chunk = section if section.endswith("\n") else section + "\n"
        with open(path, "a", encoding="utf-8") as handle:
            handle.write(chunk)
            handle.flush()
            os.fsync(handle.fileno())

    def read_markdown_log(self, name: str) -> str:
        path = self.channel_path(name)
        if not path.exists():
            return ""
        return path.read_text("utf-8")

    # -- documents ---------------------------------------------------------

    def write_doc(self, doc: MarkdownDoc) -> str:
        """Atomically write a doc; any prior version lands in `.history/`."""
        if doc.kind not in DOC_KINDS:
            raise VaultError(f"unknown doc kind {doc.kind!r}")
        author = doc.frontmatter.get("author")
        if author not in ("human", "agent"):
            raise VaultError(f"doc frontmatter.author must be human or agent, got {author!r}")
        if doc.kind == "delta" and author != "agent":
            raise VaultError("delta documents are agent-authored; human delta writes are rejected")
        root = self.layout.doc_roots.get(doc.kind)
        if root is None:
            raise VaultError(f"no doc root configured for kind {doc.kind!r}")
        relpath = doc.path
        if not relpath.startswith(root + "/") and relpath != root:
            raise VaultError(f"doc path {relpath!r} is outside the {doc.kind} root {root!r}")
        if "created_ts" not in doc.frontmatter:
            raise VaultError("doc frontmatter must include created_ts")
        doc.frontmatter.setdefault("kind", doc.kind)
        if doc.frontmatter["kind"] != doc.kind:
            raise VaultError("frontmatter.kind disagrees with doc.kind")

        target = self._resolve_inside(relpath)
        with self._doc_lock:
            target.parent.mkdir(parents=True, exist_ok=True)
            if target.exists():
                self._snapshot_history(target)
            self._atomic_write(target, doc.render())
        return relpath

    def _snapshot_history(self, target: Path) -> None:
        history_dir = target.parent / ".history"
        history_dir.mkdir(exist_ok=True)
        stamp = self.clock.now_ts().replace(":", "").replace("-", "")
        base = f"{target.stem}.{stamp}"
        candidate = history_dir / f"{base}{target.suffix}"
        counter = 2
        while candidate.exists():
            candidate = history_dir / f"{base}-{counter}{target.suffix}"
            counter += 1
        shutil.copy2(target, candidate)

    def _atomic_write(self, target: Path, text: str) -> None:
        target.parent.mkdir(parents=True, exist_ok=True)
        tmp = target.with_name(target.name + ".tmp")
        with open(tmp, "w", encoding="utf-8") as handle:
            handle.write(text)
            handle.flush()
            os.fsync(handle.fileno())
        os.replace(tmp, target)

    def read_doc(self, relpath: str) -> MarkdownDoc:
        target = self._resolve_inside(relpath)
        if not target.exists():
            raise VaultError(f"no such document: {relpath}")
        return MarkdownDoc.parse(relpath, target.read_text("utf-8"))

    def doc_exists(self, relpath: str) -> bool:
        try:
            return self._resolve_inside(relpath).exists()
        except VaultError:
            return False

    def query_docs(self, kind: str, week_range: tuple[str, str] | None = None,
                   ) -> list[MarkdownDoc]:
        """All docs of a kind, ordered by iso_week then path."""
        if kind not in DOC_KINDS:
            raise VaultError(f"unknown doc kind {kind!r}")
        root_rel = self.layout.doc_roots.get(kind)
        if root_rel is None:
            return []
        root = self.root / root_rel
        if not root.exists():
            return []
        docs = []
        for path in sorted(root.rglob("*.md")):
            if ".history" in path.parts:
                continue
            rel = str(path.relative_to(self.root))
            try:
                doc = MarkdownDoc.parse(rel, path.read_text("utf-8"))
            except OSError:
                continue
            if doc.kind != kind:
                continue
            if week_range is not None:
                week = self._doc_week(doc)
                if week is None or not (week_range[0] <= week <= week_range[1]):
                    continue
            docs.append(doc)
        docs.sort(key=lambda d: (self._doc_week(d) or "", d.path))
        return docs

    def doc_history(self, relpath: str) -> list[str]:
        """Vault-relative paths of preserved prior versions, oldest first."""
        target = self._resolve_inside(relpath)
        history_dir = target.parent / ".history"
        if not history_dir.exists():
            return []
        root = self.root.resolve()
        out = []
        for path in sorted(history_dir.iterdir()):
            if path.stem.startswith(target.stem + ".") and path.suffix == target.suffix:
                out.append(str(path.resolve().relative_to(root)))
        return out

    @staticmethod
    def _doc_week(doc: MarkdownDoc) -> str | None:
        week = doc.frontmatter.get("iso_week")
        if week:
            return str(week)
        created = doc.frontmatter.get("created_ts")
        if created:
            try:
                return iso_week_of(str(created))
            except ValueError:
                return None
        return None

    def all_docs(self) -> list[MarkdownDoc]:
        seen: dict[str, MarkdownDoc] = {}
        for kind in DOC_KINDS:
            for doc in self.query_docs(kind):
                seen[doc.path] = doc
        return list(seen.values())

    # -- non-doc text (config, reports, templates) --------------------------

    def put_file(self, relpath: str, text: str) -> str:
        """Atomic write of an auxiliary text file inside the vault."""
        target = self._resolve_inside(relpath)
        self._atomic_write(target, text)
        return relpath

    def get_file(self, relpath: str) -> str:
        target = self._resolve_inside(relpath)
        if not target.exists():
            raise VaultError(f"no such file: {relpath}")
        return target.read_text("utf-8")

    def file_exists(self, relpath: str) -> bool:
        try:
            return self._resolve_inside(relpath).exists()
        except VaultError:
            return False


def _tsv_escape(text: str) -> str:
    return text.replace("\t", " ").replace("\n", " ").replace("\r", " ")


def _tsv_line(record: LogRecord) -> str:
    p = record.payload
    return "\t".join([
        record.ts,
        _tsv_escape(str(p.get("interaction_id", ""))),
        str(p.get("principle_id", "")),
        str(p.get("score", "")),
        _tsv_escape(str(p.get("rationale", ""))),
    ])


def _tsv_parse(stream: str, seq: int, line: str) -> LogRecord:
    parts = line.split("\t")
    if len(parts) != len(TSV_COLUMNS):
        raise ValueError(f"expected {len(TSV_COLUMNS)} tab-separated columns, got {len(parts)}")
    ts, interaction_id, principle_id, score, rationale = parts
    payload = {
        "interaction_id": interaction_id,
        "principle_id": int(principle_id),
        "score": int(score),
        "rationale": rationale,
    }
    return LogRecord(stream=stream, seq=seq, ts=ts, author="agent", payload=payload)


def iter_stream_payloads(records: Iterable[LogRecord]) -> Iterable[dict]:
    for record in records:
        yield record.payload
