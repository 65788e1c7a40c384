"""Entry point: check the script against the profile, then render or fail."""

from __future__ import annotations

import os
import sys
import time
from pathlib import Path

from .png import gradient_png
from .profiles import ExpectationProfile, ProfileError, resolve_profile
from .scan import contains_subsequence, scan_script

EX_USAGE = 70  # unreadable inputs / misconfiguration
_RUNNER_FRAME = (
    '  File "/usr/lib/mock-paraview/pvpython-runner.py", line 24, in <module>\n'
    "    exec(compile(source, script_path, 'exec'))\n"
)


def _diagnostic(message: str) -> int:
    sys.stderr.write(f"mock-pvpython: {message}\n")
    return EX_USAGE


def _attribute_error(cls: str, attr: str, lineno: int, source_line: str) -> int:
    sys.stderr.write(
        "Traceback (most recent call last):\n"
        + _RUNNER_FRAME
        + f'  File "script.py", line {lineno}, in <module>\n'
        + f"    {source_line}\n"
        + f"AttributeError: type object '{cls}' has no attribute '{attr}'\n"
    )
    return 1


def _name_error(missing_call: str) -> int:
    sys.stderr.write(
        "Traceback (most recent call last):\n"
        + _RUNNER_FRAME
        + '  File "script.py", line 1, in <module>\n'
        + f"    {missing_call}\n"
        + f"NameError: name '{missing_call}' is not defined\n"
    )
    return 1


def run(script_path: Path, profile: ExpectationProfile, script_text: str) -> int:
    if profile.failure_mode == "timeout":
        deadline = time.monotonic() + 600  # far beyond any sane test timeout
        while time.monotonic() < deadline:
            time.sleep(1)
        return 1

    scanned = scan_script(script_text)

    if profile.failure_mode == "attribute_error":
        cls, attr = (profile.invalid_attributes or [("Glyph", "Scalars")])[0]
        return _attribute_error(cls, attr, 1, f"obj.{attr} = ...")

    invalid = {(cls, attr) for cls, attr in profile.invalid_attributes}
    for var, attr, lineno, source_line in scanned.attribute_sets:
        cls = scanned.bindings.get(var)
        if cls and (cls, attr) in invalid:
            return _attribute_error(cls, attr, lineno, source_line)

    missing = contains_subsequence(scanned.calls, profile.required_calls)
    if missing is not None:
        return _name_error(missing)

    if profile.failure_mode == "missing_screenshot":
        return 0

    width, height = profile.resolution
    target = Path(profile.screenshot_name)
    if not target.is_absolute():
        target = script_path.parent / target
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_bytes(gradient_png(width, height))
    return 0


def main(argv: list[str]) -> int:
    if len(argv) != 1:
        return _diagnostic("usage: mock-pvpython <script.py>")
    script_path = Path(argv[0])
    try:
        script_text = script_path.read_text(encoding="utf-8")
    except OSError as exc:
        return _diagnostic(f"cannot read script {script_path}: {exc}")

    profile_value = os.environ.get("MOCK_PVPYTHON_PROFILE", "")
    if not profile_value:
        return _diagnostic("MOCK_PVPYTHON_PROFILE is not set")
    try:
        profile = resolve_profile(
            profile_value, scan_script(script_text).screenshots
        )
    except ProfileError as exc:
        return _diagnostic(str(exc))

    return run(script_path, profile, script_text)


def console() -> None:
    sys.exit(main(sys.argv[1:]))


if __name__ == "__main__":
    console()
