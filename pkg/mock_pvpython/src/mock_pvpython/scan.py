"""Static scan of a candidate script: calls, constructor bindings, attribute sets.

No execution ever happens here; the mock stays hermetic and deterministic by
reading the script text only.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_BINDING_RE = re.compile(
    r"(?m)^[ \t]*(?P<var>[A-Za-z_][A-Za-z0-9_]*)[ \t]*=[ \t]*(?P<cls>[A-Za-z_][A-Za-z0-9_]*)\("
)
_ATTR_SET_RE = re.compile(
    r"(?m)^[ \t]*(?P<var>[A-Za-z_][A-Za-z0-9_]*)\.(?P<attr>[A-Za-z_][A-Za-z0-9_.]*)[ \t]*=(?![=])"
)

_KEYWORDS = frozenset(
    "False None True and as assert async await break class continue def del elif else "
    "except finally for from global if import in is lambda nonlocal not or pass raise "
    "return try while with yield".split()
)


@dataclass
class ScanResult:
    calls: list[str] = field(default_factory=list)
    bindings: dict[str, str] = field(default_factory=dict)  # var -> constructor name
    attribute_sets: list[tuple[str, str, int, str]] = field(default_factory=list)
    # (var, attribute, 1-based line, source line text)
    screenshots: list[str] = field(default_factory=list)


def _blank(script: str) -> str:
    """Blot out comments and string interiors, preserving offsets and newlines."""
    out = list(script)
    i, n = 0, len(script)
    while i < n:
        ch = script[i]
        if ch == "#":
            while i < n and script[i] != "\n":
                out[i] = " "
                i += 1
        elif ch in "'\"":
            quote = script[i : i + 3] if script[i : i + 3] in ("'''", '"""') else ch
            j = i + len(quote)
            closed = False
            while j < n:
                if script[j] == "\\":
                    j += 2
                    continue
                if script.startswith(quote, j):
                    closed = True
                    break
                j += 1
            end = j if closed else n
            for k in range(i + len(quote), end):
                if out[k] != "\n":
                    out[k] = " "
            i = end + (len(quote) if closed else 0)
        else:
            i += 1
    return "".join(out)


def _depths(blanked: str) -> list[int]:
    depths, depth = [], 0
    for ch in blanked:
        if ch in "([{":
            depths.append(depth)
            depth += 1
        elif ch in ")]}":
            depth = max(depth - 1, 0)
            depths.append(depth)
        else:
            depths.append(depth)
    return depths


def scan_script(script: str) -> ScanResult:
    blanked = _blank(script)
    depths = _depths(blanked)
    result = ScanResult()

    for match in _IDENT_RE.finditer(blanked):
        name = match.group(0)
        if name in _KEYWORDS:
            continue
        j = match.end()
        while j < len(blanked) and blanked[j] in " \t":
            j += 1
        if j < len(blanked) and blanked[j] == "(" and depths[match.start()] == 0:
            result.calls.append(name)

    for match in _BINDING_RE.finditer(blanked):
        if depths[match.start("var")] == 0:
            result.bindings[match.group("var")] = match.group("cls")

    lines = script.split("\n")
    for match in _ATTR_SET_RE.finditer(blanked):
        if depths[match.start("var")] == 0:
            lineno = blanked.count("\n", 0, match.start()) + 1
            result.attribute_sets.append(
                (
                    match.group("var"),
                    match.group("attr").rsplit(".", 1)[-1],
                    lineno,
                    lines[lineno - 1].strip(),
                )
            )

    # Screenshot targets come from the real text (string interiors are blanked).
    for match in re.finditer(r"SaveScreenshot\(\s*['\"]([^'\"]+)['\"]", script):
        result.screenshots.append(match.group(1))
    return result


def contains_subsequence(calls: list[str], required: list[str]) -> str | None:
    """Return the first required call not found in order, or None when satisfied."""
    position = 0
    for name in required:
        try:
            position = calls.index(name, position) + 1
        except ValueError:
            return name
    return None
