"""Prompt assembly: request refinement, few-shot generation prompts, repair prompts.

Templates are plain-text files with {{placeholder}} substitution so prompt
wording can be tuned without touching code; a packaged default set ships under
chatvis/templates and can be overridden per run.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import TYPE_CHECKING, Iterable

from .executor import CandidateScript
from .llm import ChatMessage, LlmError, LlmProvider, ModelParams, system, user
from .tracebacks import ErrorReport, render_for_llm

if TYPE_CHECKING:
    from .catalog import Snippet

ERROR_RENDER_BUDGET = 4000

# Filenames worth preserving through refinement and worth triggering the
# reader/camera/screenshot trio in operation detection.
FILENAME_RE = re.compile(r"[\w\-./]+\.(?:vtk|ex2|png)\b", re.IGNORECASE)
_NUMBER_RE = re.compile(r"\d+(?:\.\d+)?")
_STEP_PREFIX_RE = re.compile(r"^\s*(?:[-*•]|\d+[.)])\s+(?P<step>.+?)\s*$")


class OperationTag(str, Enum):
    """Visualization operations the snippet catalog covers, in pipeline order."""

    READER = "reader"
    SLICE = "slice"
    CLIP = "clip"
    CONTOUR = "contour"
    DELAUNAY3D = "delaunay3d"
    STREAM_TRACER = "stream_tracer"
    TUBE = "tube"
    GLYPH = "glyph"
    VOLUME_RENDER = "volume_render"
    COLOR_BY = "color_by"
    CAMERA_VIEW = "camera_view"
    LAYOUT = "layout"
    SCREENSHOT = "screenshot"


# Canonical few-shot ordering: read first, render/save last.
CANONICAL_TAG_ORDER: tuple[OperationTag, ...] = tuple(OperationTag)

_KEYWORD_TAGS: tuple[tuple[tuple[str, ...], OperationTag], ...] = (
    (("isosurface", "contour"), OperationTag.CONTOUR),
    (("slice",), OperationTag.SLICE),
    (("clip",), OperationTag.CLIP),
    (("volume rendering",), OperationTag.VOLUME_RENDER),
    (("delaunay",), OperationTag.DELAUNAY3D),
    (("streamline", "stream tracer"), OperationTag.STREAM_TRACER),
    (("tube",), OperationTag.TUBE),
    (("glyph",), OperationTag.GLYPH),
    (("color",), OperationTag.COLOR_BY),
)


@dataclass(frozen=True)
class UserRequest:
    text: str
    session_id: str

    def __post_init__(self) -> None:
        if not self.text:
            raise ValueError("request text must be non-empty")


class RefinementSource(str, Enum):
    LLM_REFINED = "llm_refined"
    PASSTHROUGH = "passthrough"


@dataclass(frozen=True)
class RefinedPrompt:
    preamble: str
    steps: tuple[str, ...]
    source: RefinementSource

    def __post_init__(self) -> None:
        if not self.steps or any(not step for step in self.steps):
            raise ValueError("refined prompt needs at least one non-empty step")


@dataclass(frozen=True)
class ExamplePair:
    example_request: str
    example_refined: str

    def __post_init__(self) -> None:
        if not self.example_request or not self.example_refined:
            raise ValueError("example pair fields must be non-empty")


@dataclass(frozen=True)
class TemplateSet:
    refine_system: str
    refine_user: str
    generate_system: str
    generate_user: str
    repair_system: str
    repair_user: str
    example_request: str
    example_refined: str

    _FILES = (
        "refine_system",
        "refine_user",
        "generate_system",
        "generate_user",
        "repair_system",
        "repair_user",
        "example_request",
        "example_refined",
    )

    @classmethod
    def load(cls, directory: str | Path) -> "TemplateSet":
        directory = Path(directory)
        values = {}
        for name in cls._FILES:
            path = directory / f"{name}.txt"
            if not path.exists():
                raise FileNotFoundError(f"missing template file {path}")
            values[name] = path.read_text(encoding="utf-8")
        return cls(**values)


def default_templates() -> TemplateSet:
    root = resources.files("chatvis") / "templates"
    values = {
        name: (root / f"{name}.txt").read_text(encoding="utf-8")
        for name in TemplateSet._FILES
    }
    return TemplateSet(**values)


def render_template(template: str, **values: str) -> str:
    rendered = template
    for key, value in values.items():
        rendered = rendered.replace("{{" + key + "}}", value)
    return rendered


def default_example_pair(templates: TemplateSet | None = None) -> ExamplePair:
    templates = templates or default_templates()
    return ExamplePair(
        example_request=templates.example_request.strip(),
        example_refined=templates.example_refined.strip(),
    )


def passthrough(request: UserRequest) -> RefinedPrompt:
    return RefinedPrompt(
        preamble="", steps=(request.text,), source=RefinementSource.PASSTHROUGH
    )


def request_parameters(text: str) -> list[str]:
    """Concrete tokens (filenames, numbers) a refinement must not drop."""
    tokens = FILENAME_RE.findall(text)
    tokens.extend(_NUMBER_RE.findall(text))
    seen: set[str] = set()
    unique = []
    for token in tokens:
        if token not in seen:
            seen.add(token)
            unique.append(token)
    return unique


def preserves_parameters(request_text: str, refined_text: str) -> bool:
    return all(token in refined_text for token in request_parameters(request_text))


def screenshot_targets(text: str) -> list[str]:
    """PNG filenames named in a request, in order of first mention."""
    targets = []
    for token in FILENAME_RE.findall(text):
        if token.lower().endswith(".png") and token not in targets:
            targets.append(token)
    return targets


def _parse_refinement(completion: str) -> tuple[str, tuple[str, ...]]:
    preamble_lines: list[str] = []
    steps: list[str] = []
    for line in completion.splitlines():
        match = _STEP_PREFIX_RE.match(line)
        if match:
            steps.append(match.group("step"))
        elif not steps and line.strip():
            preamble_lines.append(line.strip())
    return " ".join(preamble_lines), tuple(steps)


def refine(
    request: UserRequest,
    example: ExamplePair,
    llm: LlmProvider,
    params: ModelParams | None = None,
    templates: TemplateSet | None = None,
) -> RefinedPrompt:
    """Rewrite the request into ordered imperative steps via the LLM.

    Falls back to passthrough (the raw request as a single step) whenever the
    provider fails, the response has no recognizable steps, or the rewrite
    dropped a concrete parameter; refinement never aborts a session.
    """
    params = params or ModelParams()
    templates = templates or default_templates()
    messages = [
        system(templates.refine_system),
        user(
            render_template(
                templates.refine_user,
                example_request=example.example_request,
                example_refined=example.example_refined,
                request=request.text,
            )
        ),
    ]
    try:
        completion = llm.complete(messages, params)
    except LlmError:
        return passthrough(request)
    preamble, steps = _parse_refinement(completion)
    if not steps:
        return passthrough(request)
    refined_text = preamble + "\n" + "\n".join(steps)
    if not preserves_parameters(request.text, refined_text):
        return passthrough(request)
    return RefinedPrompt(
        preamble=preamble, steps=steps, source=RefinementSource.LLM_REFINED
    )


def detect_operations(text: str) -> set[OperationTag]:
    """Deterministic, case-insensitive keyword mapping from request text to tags."""
    lowered = text.lower()
    tags: set[OperationTag] = set()
    if FILENAME_RE.search(text) or "screenshot" in lowered:
        tags.update(
            {OperationTag.READER, OperationTag.CAMERA_VIEW, OperationTag.SCREENSHOT}
        )
    for keywords, tag in _KEYWORD_TAGS:
        if any(keyword in lowered for keyword in keywords):
            tags.add(tag)
    return tags


def build_generation_messages(
    refined: RefinedPrompt,
    snippets: Iterable["Snippet"] = (),
    templates: TemplateSet | None = None,
) -> list[ChatMessage]:
    """System contract + snippet examples + the ordered step list."""
    templates = templates or default_templates()
    snippet_text = "\n\n".join(
        f"# Example — {s.title}\n{s.body}" if s.title else s.body for s in snippets
    )
    steps_text = "\n".join(
        f"{index}. {step}" for index, step in enumerate(refined.steps, 1)
    )
    content = render_template(
        templates.generate_user,
        snippets=snippet_text,
        preamble=refined.preamble,
        steps=steps_text,
    )
    return [system(templates.generate_system), user(content)]


def build_repair_messages(
    script: CandidateScript,
    errors: list[ErrorReport],
    templates: TemplateSet | None = None,
    budget: int = ERROR_RENDER_BUDGET,
) -> list[ChatMessage]:
    """Full prior script plus every rendered error, asking for a complete fix."""
    if not errors:
        raise ValueError("repair prompt requires at least one error report")
    templates = templates or default_templates()
    errors_text = "\n\n".join(render_for_llm(report, budget) for report in errors)
    content = render_template(
        templates.repair_user, script=script.body, errors=errors_text
    )
    return [system(templates.repair_system), user(content)]
