"""Compare produced screenshots against ground truth, and scripts against references.

Images: per-pixel channel tolerance plus a fraction-of-differing-pixels
threshold, absorbing antialiasing noise while catching real failures (wrong
background, blank render). Scripts: a lexical scan over call names and
attribute assignments, so comparison survives variable renaming.
"""

from __future__ import annotations

import keyword
import re
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

DEFAULT_PER_CHANNEL_TOL = 3
DEFAULT_DIFFERING_THRESHOLD = 0.02
NEAR_UNIFORM_FRACTION = 0.995

_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_ASSIGN_RE = re.compile(
    r"(?m)^[ \t]*(?P<target>[A-Za-z_][A-Za-z0-9_]*(?:\.[A-Za-z_][A-Za-z0-9_]*)+)[ \t]*=(?![=])"
)
_KEYWORDS = frozenset(keyword.kwlist)


class ImageVerdict(str, Enum):
    MATCH = "match"
    MISMATCH = "mismatch"
    INCOMPARABLE = "incomparable"


@dataclass
class ImageComparison:
    verdict: ImageVerdict
    dimensions_match: bool
    differing_fraction: float | None = None
    max_channel_delta: int | None = None
    mean_abs_error: float | None = None
    near_uniform: bool = False
    cause: str | None = None

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "dimensions_match": self.dimensions_match,
            "differing_fraction": self.differing_fraction,
            "max_channel_delta": self.max_channel_delta,
            "mean_abs_error": self.mean_abs_error,
            "near_uniform": self.near_uniform,
            "cause": self.cause,
        }


@dataclass
class ScriptComparison:
    calls_reference: list[str]
    calls_candidate: list[str]
    assigns_reference: list[str]
    assigns_candidate: list[str]
    missing: list[str]
    extra: list[str]
    order_preserved: bool

    def to_dict(self) -> dict:
        return {
            "calls_reference": self.calls_reference,
            "calls_candidate": self.calls_candidate,
            "assigns_reference": self.assigns_reference,
            "assigns_candidate": self.assigns_candidate,
            "missing": self.missing,
            "extra": self.extra,
            "order_preserved": self.order_preserved,
        }


def _load_rgb(path: str | Path) -> np.ndarray | None:
    try:
        with Image.open(path) as image:
            return np.asarray(image.convert("RGB"), dtype=np.int16)
    except (FileNotFoundError, UnidentifiedImageError, OSError, ValueError):
        return None


def _near_uniform(pixels: np.ndarray, tol: int) -> bool:
    """True when >= 99.5% of pixels sit within tol of the modal color."""
    flat = pixels.reshape(-1, 3).astype(np.int32)
    encoded = (flat[:, 0] << 16) | (flat[:, 1] << 8) | flat[:, 2]
    colors, counts = np.unique(encoded, return_counts=True)
    modal = colors[np.argmax(counts)]
    modal_rgb = np.array([(modal >> 16) & 255, (modal >> 8) & 255, modal & 255])
    within = (np.abs(flat - modal_rgb) <= tol).all(axis=1)
    return bool(within.mean() >= NEAR_UNIFORM_FRACTION)


def compare_images(
    candidate: str | Path,
    reference: str | Path,
    per_channel_tol: int = DEFAULT_PER_CHANNEL_TOL,
    differing_threshold: float = DEFAULT_DIFFERING_THRESHOLD,
) -> ImageComparison:
    """Pixel-level comparison; a pixel differs when any channel exceeds the tolerance."""
    cand = _load_rgb(candidate)
    if cand is None:
        return ImageComparison(
            verdict=ImageVerdict.INCOMPARABLE,
            dimensions_match=False,
            cause=f"unreadable candidate image: {candidate}",
        )
    ref = _load_rgb(reference)
    if ref is None:
        return ImageComparison(
            verdict=ImageVerdict.INCOMPARABLE,
            dimensions_match=False,
            cause=f"unreadable reference image: {reference}",
        )
    near_uniform = _near_uniform(cand, per_channel_tol)
    if cand.shape != ref.shape:
        return ImageComparison(
            verdict=ImageVerdict.INCOMPARABLE,
            dimensions_match=False,
            near_uniform=near_uniform,
            cause=(
                f"dimension mismatch: candidate {cand.shape[1]}x{cand.shape[0]}, "
                f"reference {ref.shape[1]}x{ref.shape[0]}"
            ),
        )
    delta = np.abs(cand - ref)
    differing = (delta > per_channel_tol).any(axis=2)
    fraction = float(differing.mean())
    verdict = (
        ImageVerdict.MATCH if fraction <= differing_threshold else ImageVerdict.MISMATCH
    )
    return ImageComparison(
        verdict=verdict,
        dimensions_match=True,
        differing_fraction=fraction,
        max_channel_delta=int(delta.max()),
        mean_abs_error=float(delta.mean()),
        near_uniform=near_uniform,
    )


def _blank_strings_and_comments(script: str) -> str:
    """Replace string-literal interiors and comments with spaces, keeping offsets."""
    out = list(script)
    i, n = 0, len(script)
    while i < n:
        ch = script[i]
        if ch == "#":
            j = i
            while j < n and script[j] != "\n":
                out[j] = " "
                j += 1
            i = j
        elif ch in "'\"":
            quote = script[i : i + 3] if script[i : i + 3] in ("'''", '"""') else ch
            j = i + len(quote)
            while j < n:
                if script[j] == "\\":
                    j += 2
                    continue
                if script.startswith(quote, j):
                    j += len(quote)
                    break
                j += 1
            for k in range(i + len(quote), min(j - len(quote), n)):
                if out[k] != "\n":
                    out[k] = " "
            i = j
        else:
            i += 1
    return "".join(out)


def _depths(blanked: str) -> list[int]:
    depths = []
    depth = 0
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


def extract_call_sequence(script: str) -> list[str]:
    """Call names at the top nesting level of each statement, in source order.

    Lexical and total: comments and string literals are ignored, malformed
    text yields a best-effort sequence.
    """
    blanked = _blank_strings_and_comments(script)
    depths = _depths(blanked)
    calls: list[str] = []
    for match in _IDENT_RE.finditer(blanked):
        name = match.group(0)
        if name in _KEYWORDS:
            continue
        j = match.end()
        while j < len(blanked) and blanked[j] in " \t":
            j += 1
        if j < len(blanked) and blanked[j] == "(" and depths[match.start()] == 0:
            calls.append(name)
    return calls


def extract_attribute_assignments(script: str) -> list[str]:
    """Attribute names set by top-level `obj.Attr = ...` statements, in order."""
    blanked = _blank_strings_and_comments(script)
    depths = _depths(blanked)
    assigns: list[str] = []
    for match in _ASSIGN_RE.finditer(blanked):
        if depths[match.start("target")] == 0:
            assigns.append(match.group("target").rsplit(".", 1)[1])
    return assigns


def _lcs_length(a: list[str], b: list[str]) -> int:
    if not a or not b:
        return 0
    previous = [0] * (len(b) + 1)
    for item in a:
        current = [0]
        for j, other in enumerate(b, 1):
            current.append(
                previous[j - 1] + 1 if item == other else max(previous[j], current[-1])
            )
        previous = current
    return previous[-1]


def _multiset_diff(left: list[str], right: list[str]) -> list[str]:
    from collections import Counter

    remaining = Counter(right)
    diff = []
    for item in left:
        if remaining[item] > 0:
            remaining[item] -= 1
        else:
            diff.append(item)
    return diff


def compare_scripts(candidate: str, reference: str) -> ScriptComparison:
    """Multiset diff of calls and attribute assignments, plus an order check.

    Attribute assignments take part in the diff rendered as "Name=" items:
    hallucinated property sets (assigning attributes the target class does not
    have) are a dominant failure mode and must surface as extras.
    """
    calls_ref = extract_call_sequence(reference)
    calls_cand = extract_call_sequence(candidate)
    assigns_ref = extract_attribute_assignments(reference)
    assigns_cand = extract_attribute_assignments(candidate)

    items_ref = calls_ref + [f"{name}=" for name in assigns_ref]
    items_cand = calls_cand + [f"{name}=" for name in assigns_cand]
    missing = _multiset_diff(items_ref, items_cand)
    extra = _multiset_diff(items_cand, items_ref)

    from collections import Counter

    common = sum((Counter(calls_ref) & Counter(calls_cand)).values())
    order_preserved = _lcs_length(calls_ref, calls_cand) == common
    return ScriptComparison(
        calls_reference=calls_ref,
        calls_candidate=calls_cand,
        assigns_reference=assigns_ref,
        assigns_candidate=assigns_cand,
        missing=missing,
        extra=extra,
        order_preserved=order_preserved,
    )
