"""Run candidate scripts under an external interpreter and capture everything.

Two executors share one interface: SubprocessExecutor invokes a real
interpreter binary (pvpython in production, a stand-in in tests), while
SimulatedExecutor fabricates outcomes in-process from pattern rules so session
and benchmark tests stay hermetic and deterministic.
"""

from __future__ import annotations

import hashlib
import os
import re
import shutil
import signal
import subprocess
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol

# Per-stream capture cap; runaway scripts get truncated, not OOM-killed.
STREAM_CAP_BYTES = 16 * 1024 * 1024
TRUNCATION_MARKER = "\n[output truncated]"

_SAVE_SCREENSHOT_RE = re.compile(r"SaveScreenshot\(\s*['\"]([^'\"]+)['\"]")


class ConfigurationError(Exception):
    """Executor misconfiguration (missing interpreter, unwritable workdir)."""


@dataclass
class CandidateScript:
    """One generated visualization script plus generation metadata."""

    body: str
    iteration: int = 0
    digest: str = ""
    from_fence: bool = False

    def __post_init__(self) -> None:
        if not self.body:
            raise ValueError("script body must be non-empty")
        if not self.digest:
            payload = self.body.encode("utf-8", errors="replace")
            self.digest = hashlib.sha256(payload).hexdigest()


@dataclass
class ExecutionOutcome:
    """Captured result of one interpreter run.

    exit_code is None when the run timed out (the timeout marker);
    produced_files holds (workdir-relative path, size) pairs for files that
    appeared during the run.
    """

    exit_code: int | None
    stdout: str
    stderr: str
    duration: float
    produced_files: list[tuple[str, int]] = field(default_factory=list)
    timed_out: bool = False


class ScriptExecutor(Protocol):
    def run(self, script: CandidateScript, workdir: Path) -> ExecutionOutcome: ...


def _resolve_interpreter(interpreter: str | Path) -> Path:
    text = str(interpreter)
    if os.path.sep not in text:
        found = shutil.which(text)
        if found:
            return Path(found)
        raise ConfigurationError(f"interpreter {text!r} not found on PATH")
    path = Path(text)
    if not path.exists():
        raise ConfigurationError(f"interpreter {text!r} does not exist")
    if not os.access(path, os.X_OK):
        raise ConfigurationError(f"interpreter {text!r} is not executable")
    return path


def _snapshot(workdir: Path) -> dict[str, int]:
    listing: dict[str, int] = {}
    for entry in workdir.rglob("*"):
        if entry.is_file():
            listing[entry.relative_to(workdir).as_posix()] = entry.stat().st_size
    return listing


def _cap(data: bytes) -> str:
    text = data[:STREAM_CAP_BYTES].decode("utf-8", errors="replace")
    if len(data) > STREAM_CAP_BYTES:
        text += TRUNCATION_MARKER
    return text


def execute(
    script: CandidateScript,
    workdir: Path,
    interpreter: str | Path,
    timeout: float,
    extra_args: tuple[str, ...] = (),
    env: dict[str, str] | None = None,
) -> ExecutionOutcome:
    """Write the script into workdir, run `<interpreter> script.py`, capture all.

    The child runs with cwd=workdir so relative output filenames land inside
    the session directory. On timeout the whole process group is killed and
    the outcome carries timed_out=True with exit_code=None.
    """
    interpreter_path = _resolve_interpreter(interpreter)
    try:
        workdir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigurationError(f"cannot create workdir {workdir}: {exc}") from exc

    script_path = workdir / "script.py"
    body = script.body if script.body.endswith("\n") else script.body + "\n"
    script_path.write_text(body, encoding="utf-8", errors="replace")

    before = _snapshot(workdir)
    run_env = dict(os.environ)
    if env:
        run_env.update(env)

    start = time.perf_counter()
    proc = subprocess.Popen(
        [str(interpreter_path), *extra_args, "script.py"],
        cwd=workdir,
        stdout=subprocess.PIPE,
        stderr=subprocess.PIPE,
        start_new_session=True,
        env=run_env,
    )
    timed_out = False
    try:
        out, err = proc.communicate(timeout=timeout)
        exit_code: int | None = proc.returncode
    except subprocess.TimeoutExpired:
        timed_out = True
        exit_code = None
        _kill_process_group(proc)
        out, err = proc.communicate()
    duration = time.perf_counter() - start

    after = _snapshot(workdir)
    produced = sorted(
        (path, size) for path, size in after.items() if path not in before
    )
    return ExecutionOutcome(
        exit_code=exit_code,
        stdout=_cap(out),
        stderr=_cap(err),
        duration=duration,
        produced_files=produced,
        timed_out=timed_out,
    )


def _kill_process_group(proc: subprocess.Popen) -> None:
    try:
        os.killpg(os.getpgid(proc.pid), signal.SIGKILL)
    except (ProcessLookupError, PermissionError):
        proc.kill()


def check_artifacts(
    outcome: ExecutionOutcome, expected: list[str]
) -> list[str]:
    """Return expected paths that were not produced; zero-byte files count as missing."""
    produced = {path: size for path, size in outcome.produced_files}
    return [path for path in expected if produced.get(path, 0) <= 0]


class SubprocessExecutor:
    """Runs scripts under a real interpreter binary (pvpython or a stand-in)."""

    def __init__(
        self,
        interpreter: str | Path,
        timeout: float = 120.0,
        extra_args: tuple[str, ...] = (),
        env: dict[str, str] | None = None,
    ) -> None:
        self.interpreter = interpreter
        self.timeout = timeout
        self.extra_args = tuple(extra_args)
        self.env = env

    def run(self, script: CandidateScript, workdir: Path) -> ExecutionOutcome:
        return execute(
            script, workdir, self.interpreter, self.timeout, self.extra_args, self.env
        )


@dataclass(frozen=True)
class SimRule:
    """First rule whose pattern matches the script body decides the outcome."""

    pattern: str
    stderr: str = ""
    stdout: str = ""
    exit_code: int | None = 1
    write_artifacts: bool = False
    timed_out: bool = False


class SimulatedExecutor:
    """In-process interpreter stand-in.

    Without a matching rule the run "succeeds": every SaveScreenshot target in
    the script is written as a small real PNG and the exit code is 0. Duration
    is pinned to 0.0 so replayed runs serialize byte-identically.
    """

    def __init__(
        self, rules: tuple[SimRule, ...] = (), resolution: tuple[int, int] = (64, 48)
    ) -> None:
        self.rules = tuple(rules)
        self.resolution = resolution

    def run(self, script: CandidateScript, workdir: Path) -> ExecutionOutcome:
        workdir.mkdir(parents=True, exist_ok=True)
        body = script.body if script.body.endswith("\n") else script.body + "\n"
        (workdir / "script.py").write_text(body, encoding="utf-8", errors="replace")

        for rule in self.rules:
            if re.search(rule.pattern, script.body, re.MULTILINE):
                produced = (
                    self._write_screenshots(script.body, workdir)
                    if rule.write_artifacts
                    else []
                )
                return ExecutionOutcome(
                    exit_code=None if rule.timed_out else rule.exit_code,
                    stdout=rule.stdout,
                    stderr=rule.stderr,
                    duration=0.0,
                    produced_files=produced,
                    timed_out=rule.timed_out,
                )

        produced = self._write_screenshots(script.body, workdir)
        return ExecutionOutcome(
            exit_code=0,
            stdout="",
            stderr="",
            duration=0.0,
            produced_files=produced,
            timed_out=False,
        )

    def _write_screenshots(self, body: str, workdir: Path) -> list[tuple[str, int]]:
        produced: list[tuple[str, int]] = []
        for name in _SAVE_SCREENSHOT_RE.findall(body):
            target = workdir / name
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_bytes(_placeholder_png(self.resolution))
            produced.append((name, target.stat().st_size))
        return sorted(set(produced))


_PNG_CACHE: dict[tuple[int, int], bytes] = {}


def _placeholder_png(resolution: tuple[int, int]) -> bytes:
    if resolution not in _PNG_CACHE:
        from PIL import Image
        import io

        width, height = resolution
        image = Image.new("RGB", (width, height))
        image.putdata(
            [((x * 7) % 256, (y * 11) % 256, (x + y) % 256)
             for y in range(height) for x in range(width)]
        )
        buffer = io.BytesIO()
        image.save(buffer, format="PNG")
        _PNG_CACHE[resolution] = buffer.getvalue()
    return _PNG_CACHE[resolution]
