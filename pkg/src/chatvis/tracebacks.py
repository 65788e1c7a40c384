"""Structured extraction of interpreter errors from captured pvpython output.

The scanner walks the output line by line. A traceback block opens at a
"Traceback (most recent call last):" header or at an (optionally indented)
`File "` line, accumulates frame and context lines, and closes at the first
line whose leading identifier looks like an exception name. Standalone
"ERROR:" lines, vtkOutputWindow messages, and warning lines become tool_error
reports. Everything returned is verbatim text: each traceback report's raw
block is a contiguous substring of the input.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum

# ── Line patterns ────────────────────────────────────────────────────────────

_TB_HEADER_RE = re.compile(r"^\s*Traceback \(most recent call last\):\s*$")
_FRAME_RE = re.compile(r'^\s*File "(?P<file>[^"]*)", line (?P<line>\d+)(?:, in (?P<where>.*))?\s*$')
# Terminal exception line: Identifier optionally followed by ": message".
_TERMINAL_RE = re.compile(r"^(?P<name>[A-Za-z_][A-Za-z0-9_.]*)(?::\s?(?P<msg>.*))?$")
_ERROR_LINE_RE = re.compile(r"^ERROR:\s*(?P<msg>.*)$")
# VTK object continuation under an ERROR: line, e.g. "vtkXMLReader (0x55e3...): ..."
_VTK_OBJECT_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]* \(0x[0-9A-Fa-f]+\):")
# Python-style warning line, with or without a "path:lineno:" location prefix.
_WARNING_LINE_RE = re.compile(
    r"^(?:.*?:\d+:\s*)?(?P<name>[A-Za-z_][A-Za-z0-9_.]*Warning):\s?(?P<msg>.*)$"
)

# Exception names that do not carry an Error/Exception/Warning suffix.
KNOWN_EXCEPTIONS = frozenset(
    {"KeyboardInterrupt", "SystemExit", "StopIteration", "StopAsyncIteration", "GeneratorExit"}
)
# Kinds the repair loop must not try to fix.
FATAL_KINDS = frozenset({"KeyboardInterrupt", "SystemExit"})

TRUNCATION_MARK = "…[truncated]…"


class ReportSource(str, Enum):
    TRACEBACK = "traceback"
    TOOL_ERROR = "tool_error"
    SYNTHESIZED = "synthesized"


@dataclass(frozen=True)
class FrameRef:
    file: str
    line: int
    context: str | None = None


@dataclass(frozen=True)
class ErrorReport:
    kind: str
    message: str
    raw: str
    source: ReportSource = ReportSource.TRACEBACK
    frames: tuple[FrameRef, ...] = field(default_factory=tuple)

    def is_warning(self) -> bool:
        return self.kind.endswith("Warning")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "message": self.message,
            "source": self.source.value,
            "frames": [
                {"file": f.file, "line": f.line, "context": f.context}
                for f in self.frames
            ],
            "raw": self.raw,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ErrorReport":
        return cls(
            kind=data["kind"],
            message=data["message"],
            raw=data["raw"],
            source=ReportSource(data["source"]),
            frames=tuple(
                FrameRef(f["file"], f["line"], f.get("context"))
                for f in data.get("frames", [])
            ),
        )


def _is_exception_name(name: str) -> bool:
    return name.endswith(("Error", "Exception", "Warning")) or name in KNOWN_EXCEPTIONS


def _terminal_match(line: str) -> tuple[str, str] | None:
    match = _TERMINAL_RE.match(line)
    if not match:
        return None
    name = match.group("name")
    if not _is_exception_name(name):
        return None
    return name, match.group("msg") or ""


def _scan_stream(lines: list[str]) -> list[ErrorReport]:
    reports: list[ErrorReport] = []
    i, n = 0, len(lines)
    while i < n:
        line = lines[i]
        if _TB_HEADER_RE.match(line) or _FRAME_RE.match(line):
            report, i = _collect_traceback(lines, i)
            reports.append(report)
            continue
        if _ERROR_LINE_RE.match(line) or "vtkOutputWindow" in line:
            report, i = _collect_tool_error(lines, i)
            reports.append(report)
            continue
        warning = _WARNING_LINE_RE.match(line)
        if warning:
            report, i = _collect_warning(lines, i, warning)
            reports.append(report)
            continue
        i += 1
    return reports


def _collect_traceback(lines: list[str], start: int) -> tuple[ErrorReport, int]:
    block = [lines[start]]
    frames: list[FrameRef] = []
    if (frame := _FRAME_RE.match(lines[start])) is not None:
        frames.append(_make_frame(frame, lines, start))
    i = start + 1
    while i < len(lines):
        line = lines[i]
        terminal = _terminal_match(line)
        if terminal is not None:
            block.append(line)
            kind, message = terminal
            return (
                ErrorReport(
                    kind=kind,
                    message=message,
                    raw="\n".join(block),
                    source=ReportSource.TRACEBACK,
                    frames=tuple(frames),
                ),
                i + 1,
            )
        if _TB_HEADER_RE.match(line):
            break  # a fresh header can only open a new block
        frame = _FRAME_RE.match(line)
        if frame is not None:
            frames.append(_make_frame(frame, lines, i))
            block.append(line)
        elif line.startswith((" ", "\t")):
            block.append(line)
        else:
            break  # interrupted block: no terminal line reached
        i += 1
    return (
        ErrorReport(
            kind="UnknownError",
            message="",
            raw="\n".join(block),
            source=ReportSource.TRACEBACK,
            frames=tuple(frames),
        ),
        i,
    )


def _make_frame(match: re.Match, lines: list[str], index: int) -> FrameRef:
    context = None
    if index + 1 < len(lines):
        nxt = lines[index + 1]
        if nxt.startswith((" ", "\t")) and not _FRAME_RE.match(nxt) and nxt.strip():
            context = nxt.strip()
    return FrameRef(
        file=match.group("file"), line=int(match.group("line")), context=context
    )


def _collect_tool_error(lines: list[str], start: int) -> tuple[ErrorReport, int]:
    first = lines[start]
    block = [first]
    i = start + 1
    while i < len(lines):
        line = lines[i]
        attached = line.startswith((" ", "\t")) and line.strip()
        if attached or _VTK_OBJECT_RE.match(line):
            block.append(line)
            i += 1
        else:
            break
    error_line = _ERROR_LINE_RE.match(first)
    message = error_line.group("msg") if error_line else first.strip()
    return (
        ErrorReport(
            kind="ToolError",
            message=message,
            raw="\n".join(block),
            source=ReportSource.TOOL_ERROR,
        ),
        i,
    )


def _collect_warning(
    lines: list[str], start: int, match: re.Match
) -> tuple[ErrorReport, int]:
    block = [lines[start]]
    i = start + 1
    # Python echoes the offending source line, indented, after a warning.
    if i < len(lines) and lines[i].startswith((" ", "\t")) and lines[i].strip():
        block.append(lines[i])
        i += 1
    return (
        ErrorReport(
            kind=match.group("name"),
            message=match.group("msg") or "",
            raw="\n".join(block),
            source=ReportSource.TOOL_ERROR,
        ),
        i,
    )


def extract_errors(stdout: str, stderr: str) -> list[ErrorReport]:
    """Scan captured output (stderr first, where pvpython writes tracebacks).

    Total: never raises. Reports come back in encounter order with exact
    duplicates (same raw text) removed.
    """
    reports: list[ErrorReport] = []
    seen: set[str] = set()
    for text in (stderr, stdout):
        if not text:
            continue
        for report in _scan_stream(text.split("\n")):
            if report.raw not in seen:
                seen.add(report.raw)
                reports.append(report)
    return reports


def synthesized_report(kind: str, message: str) -> ErrorReport:
    return ErrorReport(
        kind=kind, message=message, raw=message, source=ReportSource.SYNTHESIZED
    )


def render_for_llm(report: ErrorReport, budget: int = 4000) -> str:
    """Render a report for the repair prompt within a character budget.

    Oversized blocks keep the head (60%) and tail (40%) around a truncation
    marker; the terminal exception line always survives whole.
    """
    if budget < 200:
        raise ValueError("budget must be at least 200 characters")
    raw = report.raw
    if len(raw) <= budget:
        return raw
    available = budget - len(TRUNCATION_MARK)
    terminal = raw.rstrip("\n").rsplit("\n", 1)[-1]
    terminal_start = raw.rfind(terminal)
    tail_len = available - int(available * 0.6)
    tail_len = max(tail_len, len(raw) - terminal_start)
    head_len = max(available - tail_len, 0)
    return raw[:head_len] + TRUNCATION_MARK + raw[len(raw) - tail_len:]
