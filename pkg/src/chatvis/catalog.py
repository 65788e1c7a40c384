"""Few-shot snippet catalog: one or more example call blocks per operation tag.

The catalog lives in a human-editable text file so visualization people can
extend coverage without touching code. Format: a `[tag: <name>]` header opens
a section, optional `# title:` / `# notes:` comment lines follow, then the
snippet body runs until the next header.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable

from .prompts import CANONICAL_TAG_ORDER, OperationTag

_HEADER_RE = re.compile(r"^\[tag:\s*(?P<name>[A-Za-z0-9_]+)\]\s*$")
_TITLE_RE = re.compile(r"^#\s*title:\s*(?P<value>.*)$")
_NOTES_RE = re.compile(r"^#\s*notes:\s*(?P<value>.*)$")
_CALL_TOKEN_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\(")


class CatalogError(Exception):
    """Raised for unparseable or incomplete catalog files."""


@dataclass(frozen=True)
class Snippet:
    tag: OperationTag
    title: str
    body: str
    notes: str = ""

    def __post_init__(self) -> None:
        if not self.body.strip():
            raise ValueError("snippet body must be non-empty")
        if not _CALL_TOKEN_RE.search(self.body):
            raise ValueError(
                f"snippet {self.title or self.tag.value!r} contains no call-like token"
            )


@dataclass(frozen=True)
class Catalog:
    snippets: tuple[Snippet, ...]

    def for_tag(self, tag: OperationTag) -> list[Snippet]:
        return [s for s in self.snippets if s.tag is tag]

    def tags(self) -> set[OperationTag]:
        return {s.tag for s in self.snippets}


def _parse_sections(text: str) -> list[tuple[int, str, list[str]]]:
    sections: list[tuple[int, str, list[str]]] = []
    current: list[str] | None = None
    for lineno, line in enumerate(text.split("\n"), 1):
        header = _HEADER_RE.match(line)
        if header:
            current = []
            sections.append((lineno, header.group("name"), current))
        elif current is not None:
            current.append(line)
        elif line.strip() and not line.lstrip().startswith("#"):
            raise CatalogError(f"line {lineno}: content before first [tag: ...] header")
    return sections


def parse_catalog(text: str) -> Catalog:
    snippets: list[Snippet] = []
    for lineno, name, lines in _parse_sections(text):
        try:
            tag = OperationTag(name)
        except ValueError:
            raise CatalogError(f"line {lineno}: unknown tag {name!r}") from None
        title = ""
        notes = ""
        body_lines = list(lines)
        while body_lines:
            stripped = body_lines[0]
            if (match := _TITLE_RE.match(stripped)) is not None:
                title = match.group("value").strip()
                body_lines.pop(0)
            elif (match := _NOTES_RE.match(stripped)) is not None:
                notes = match.group("value").strip()
                body_lines.pop(0)
            else:
                break
        body = "\n".join(body_lines).strip("\n")
        if not body.strip():
            raise CatalogError(f"line {lineno}: section [{name}] has an empty body")
        try:
            snippets.append(Snippet(tag=tag, title=title, body=body, notes=notes))
        except ValueError as exc:
            raise CatalogError(f"line {lineno}: {exc}") from None

    missing = [tag.value for tag in CANONICAL_TAG_ORDER if tag not in {s.tag for s in snippets}]
    if missing:
        raise CatalogError(f"catalog is missing snippets for tags: {', '.join(missing)}")
    return Catalog(snippets=tuple(snippets))


def load_catalog(path: str | Path) -> Catalog:
    """Parse and validate a catalog file; every operation tag must be covered."""
    return parse_catalog(Path(path).read_text(encoding="utf-8"))


def save_catalog(catalog: Catalog, path: str | Path) -> None:
    sections = []
    for snippet in catalog.snippets:
        lines = [f"[tag: {snippet.tag.value}]"]
        if snippet.title:
            lines.append(f"# title: {snippet.title}")
        if snippet.notes:
            lines.append(f"# notes: {snippet.notes}")
        lines.append(snippet.body)
        sections.append("\n".join(lines))
    Path(path).write_text("\n\n".join(sections) + "\n", encoding="utf-8")


def default_catalog() -> Catalog:
    text = (resources.files("chatvis") / "data" / "catalog.txt").read_text(
        encoding="utf-8"
    )
    return parse_catalog(text)


def select(tags: Iterable[OperationTag], catalog: Catalog) -> list[Snippet]:
    """Snippets for exactly the requested tags, in canonical pipeline order."""
    wanted = set(tags)
    selected: list[Snippet] = []
    for tag in CANONICAL_TAG_ORDER:
        if tag in wanted:
            selected.extend(catalog.for_tag(tag))
    return selected
