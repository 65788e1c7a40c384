"""Expectation profiles: what a script must call and what the run should produce.

Selected via MOCK_PVPYTHON_PROFILE. Accepted forms:
  "streamline"                  built-in profile, success behavior
  "streamline:attribute_error"  built-in profile with a forced failure mode
  "auto"                        pick the built-in whose screenshot the script saves
  "/path/to/profile.json"       explicit profile file
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

FAILURE_MODES = ("none", "attribute_error", "missing_screenshot", "timeout")


class ProfileError(Exception):
    pass


@dataclass
class ExpectationProfile:
    task_id: str
    required_calls: list[str]
    screenshot_name: str
    resolution: tuple[int, int] = (1920, 1080)
    failure_mode: str = "none"
    # (class name, attribute) pairs a correct script must never assign.
    invalid_attributes: list[tuple[str, str]] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not self.required_calls:
            raise ProfileError("required_calls must be non-empty")
        if self.failure_mode not in FAILURE_MODES:
            raise ProfileError(f"unknown failure_mode {self.failure_mode!r}")


_COMMON_INVALID = [
    ("Glyph", "Scalars"),
    ("Glyph", "Vectors"),
    ("Clip", "InsideOut"),
    ("Contour", "UseSeparateColorMap"),
]

BUILTIN_PROFILES = {
    "isosurface": ExpectationProfile(
        task_id="isosurface",
        required_calls=["LegacyVTKReader", "Contour", "SaveScreenshot"],
        screenshot_name="ml-iso-screenshot.png",
        invalid_attributes=list(_COMMON_INVALID),
    ),
    "slice_contour": ExpectationProfile(
        task_id="slice_contour",
        required_calls=["LegacyVTKReader", "Slice", "Contour", "SaveScreenshot"],
        screenshot_name="ml-slice-iso-screenshot.png",
        invalid_attributes=list(_COMMON_INVALID),
    ),
    "volume_render": ExpectationProfile(
        task_id="volume_render",
        required_calls=["LegacyVTKReader", "SetRepresentationType", "SaveScreenshot"],
        screenshot_name="ml-dvr-screenshot.png",
        invalid_attributes=list(_COMMON_INVALID),
    ),
    "delaunay": ExpectationProfile(
        task_id="delaunay",
        required_calls=["ExodusIIReader", "Delaunay3D", "Clip", "SaveScreenshot"],
        screenshot_name="points-surf-clip-screenshot.png",
        invalid_attributes=list(_COMMON_INVALID),
    ),
    "streamline": ExpectationProfile(
        task_id="streamline",
        required_calls=["ExodusIIReader", "StreamTracer", "Tube", "Glyph", "SaveScreenshot"],
        screenshot_name="stream-glyph-screenshot.png",
        invalid_attributes=list(_COMMON_INVALID),
    ),
}


def load_profile_file(path: Path) -> ExpectationProfile:
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise ProfileError(f"cannot read profile {path}: {exc}") from exc
    try:
        return ExpectationProfile(
            task_id=payload["task_id"],
            required_calls=list(payload["required_calls"]),
            screenshot_name=payload["screenshot_name"],
            resolution=tuple(payload.get("resolution", (1920, 1080))),
            failure_mode=payload.get("failure_mode", "none"),
            invalid_attributes=[
                (cls, attr)
                # Absent key inherits the stock ParaView hallucination set;
                # an explicit empty list disables the check.
                for cls, attr in payload.get("invalid_attributes", _COMMON_INVALID)
            ],
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ProfileError(f"malformed profile {path}: {exc}") from exc


def resolve_profile(value: str, screenshots: list[str]) -> ExpectationProfile:
    """Turn the MOCK_PVPYTHON_PROFILE value into a concrete profile.

    `screenshots` is the list of SaveScreenshot targets found in the script,
    used only by the "auto" form.
    """
    value = value.strip()
    if not value:
        raise ProfileError("MOCK_PVPYTHON_PROFILE is empty")

    name, _, mode = value.partition(":")
    if name == "auto":
        profile = _auto_profile(screenshots)
    elif name.endswith(".json") or "/" in name:
        profile = load_profile_file(Path(name))
    elif name in BUILTIN_PROFILES:
        base = BUILTIN_PROFILES[name]
        profile = ExpectationProfile(
            task_id=base.task_id,
            required_calls=list(base.required_calls),
            screenshot_name=base.screenshot_name,
            resolution=base.resolution,
            invalid_attributes=list(base.invalid_attributes),
        )
    else:
        raise ProfileError(
            f"unknown profile {name!r}; built-ins: {', '.join(sorted(BUILTIN_PROFILES))}"
        )
    if mode:
        if mode not in FAILURE_MODES:
            raise ProfileError(f"unknown failure_mode {mode!r}")
        profile.failure_mode = mode
    return profile


def _auto_profile(screenshots: list[str]) -> ExpectationProfile:
    for profile in BUILTIN_PROFILES.values():
        if profile.screenshot_name in screenshots:
            return ExpectationProfile(
                task_id=profile.task_id,
                required_calls=list(profile.required_calls),
                screenshot_name=profile.screenshot_name,
                resolution=profile.resolution,
                invalid_attributes=list(profile.invalid_attributes),
            )
    if screenshots:
        return ExpectationProfile(
            task_id="adhoc",
            required_calls=["SaveScreenshot"],
            screenshot_name=screenshots[0],
            invalid_attributes=list(_COMMON_INVALID),
        )
    # No screenshot call at all: demand one so the run fails deterministically.
    return ExpectationProfile(
        task_id="adhoc",
        required_calls=["SaveScreenshot"],
        screenshot_name="screenshot.png",
        invalid_attributes=list(_COMMON_INVALID),
    )
