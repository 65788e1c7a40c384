"""Session orchestration: generate, execute, extract errors, repair, repeat.

One session is strictly sequential and bounded by an iteration budget. Every
iteration is recorded (prompt digest, script, captured output, extracted
errors, verdict) and the whole history is persisted under the session
directory: session.json at the top, iter<k>/script.py plus the raw streams
per iteration. Each iteration executes in a fresh subdirectory so stale
artifacts from a prior attempt can never satisfy the artifact check.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path

from . import prompts
from .catalog import Catalog, default_catalog, select
from .executor import (
    CandidateScript,
    ConfigurationError,
    ExecutionOutcome,
    ScriptExecutor,
    check_artifacts,
)
from .llm import (
    ChatMessage,
    EmptyScriptError,
    LlmError,
    LlmProvider,
    ModelParams,
    digest_messages,
    extract_script,
    total_chars,
)
from .prompts import (
    ExamplePair,
    RefinedPrompt,
    TemplateSet,
    UserRequest,
    default_example_pair,
    default_templates,
)
from .tracebacks import (
    FATAL_KINDS,
    ErrorReport,
    extract_errors,
    synthesized_report,
)

logger = logging.getLogger("chatvis")


class Verdict(str, Enum):
    SUCCESS = "success"
    REPAIRABLE = "repairable"
    FATAL = "fatal"


class FinalStatus(str, Enum):
    SUCCEEDED = "succeeded"
    EXHAUSTED = "exhausted"
    ABORTED = "aborted"


@dataclass
class SessionConfig:
    workdir: Path
    expected_artifacts: list[str] = field(default_factory=list)
    max_iterations: int = 5
    execution_timeout: float = 120.0
    model_params: ModelParams = field(default_factory=ModelParams)
    interpreter: str | Path | None = None
    interpreter_args: tuple[str, ...] = ()
    use_refinement: bool = True
    use_snippets: bool = True
    treat_warnings_as_errors: bool = False
    templates: TemplateSet | None = None
    catalog: Catalog | None = None
    example: ExamplePair | None = None

    def __post_init__(self) -> None:
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.execution_timeout <= 0:
            raise ValueError("execution_timeout must be positive")
        self.workdir = Path(self.workdir)


@dataclass
class IterationRecord:
    index: int
    prompt_messages: list[ChatMessage]
    script: CandidateScript
    outcome: ExecutionOutcome
    errors: list[ErrorReport]
    verdict: Verdict


@dataclass
class SessionRecord:
    request: UserRequest
    refined: RefinedPrompt
    iterations: list[IterationRecord]
    final_status: FinalStatus
    final_script: CandidateScript | None
    started_at: str
    ended_at: str
    abort_reason: str | None = None


def classify_outcome(
    outcome: ExecutionOutcome,
    errors: list[ErrorReport],
    expected_artifacts: list[str],
) -> tuple[Verdict, list[ErrorReport]]:
    """Total classification of one run, returning the (possibly augmented) errors.

    Success needs all three: exit code 0, zero errors, every expected artifact
    present and non-empty. A clean exit with a missing artifact is repairable,
    with a synthesized report carrying the missing filename; so is a timeout.
    """
    reports = list(errors)
    if any(report.kind in FATAL_KINDS for report in reports):
        return Verdict.FATAL, reports

    if outcome.timed_out and not reports:
        reports.append(
            synthesized_report(
                "TimeoutError",
                f"execution timed out after {outcome.duration:.0f} s",
            )
        )
    missing = check_artifacts(outcome, expected_artifacts)
    if outcome.exit_code == 0 and not reports and not missing:
        return Verdict.SUCCESS, reports
    if not reports and missing:
        for path in missing:
            reports.append(
                synthesized_report(
                    "MissingArtifactError",
                    f"expected output file {path} was not created",
                )
            )
    if not reports:
        tail = outcome.stderr[-400:].strip()
        detail = f": {tail}" if tail else ""
        reports.append(
            synthesized_report(
                "NonzeroExitError",
                f"interpreter exited with code {outcome.exit_code} "
                f"without a recognizable error message{detail}",
            )
        )
    return Verdict.REPAIRABLE, reports


def _actionable(reports: list[ErrorReport], config: SessionConfig) -> list[ErrorReport]:
    if config.treat_warnings_as_errors:
        return list(reports)
    return [report for report in reports if not report.is_warning()]


def _not_executed_outcome() -> ExecutionOutcome:
    return ExecutionOutcome(
        exit_code=-1, stdout="", stderr="", duration=0.0, produced_files=[]
    )


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def run_session(
    request: UserRequest,
    config: SessionConfig,
    llm: LlmProvider,
    executor: ScriptExecutor,
) -> SessionRecord:
    """Drive the repair loop until success or the iteration budget runs out."""
    started_at = _now()
    templates = config.templates or default_templates()
    catalog = config.catalog or default_catalog()
    example = config.example or default_example_pair(templates)

    try:
        config.workdir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        return _aborted(request, started_at, f"workdir not writable: {exc}")

    if config.use_refinement:
        refined = prompts.refine(
            request, example, llm, config.model_params, templates
        )
    else:
        refined = prompts.passthrough(request)

    snippets = (
        select(prompts.detect_operations(request.text), catalog)
        if config.use_snippets
        else []
    )

    iterations: list[IterationRecord] = []
    final_status = FinalStatus.EXHAUSTED
    final_script: CandidateScript | None = None
    abort_reason: str | None = None
    prior_script: CandidateScript | None = None
    prior_errors: list[ErrorReport] = []

    for index in range(1, config.max_iterations + 1):
        if index == 1:
            messages = prompts.build_generation_messages(refined, snippets, templates)
        else:
            messages = prompts.build_repair_messages(
                prior_script, prior_errors, templates
            )
        logger.info(
            "session %s iteration %d: prompting (%d chars)",
            request.session_id, index, total_chars(messages),
        )
        try:
            completion = llm.complete(messages, config.model_params)
        except LlmError as exc:
            final_status = FinalStatus.ABORTED
            abort_reason = f"provider failure: {exc}"
            break

        iter_dir = config.workdir / f"iter{index}"
        try:
            script = extract_script(completion, iteration=index)
        except EmptyScriptError:
            script = CandidateScript(body="# empty completion", iteration=index)
            outcome = _not_executed_outcome()
            errors = [
                synthesized_report(
                    "EmptyScriptError", "completion contained no script text"
                )
            ]
            verdict = Verdict.REPAIRABLE
            _persist_iteration(iter_dir, script, outcome)
        else:
            try:
                outcome = executor.run(script, iter_dir)
            except ConfigurationError as exc:
                final_status = FinalStatus.ABORTED
                abort_reason = f"executor configuration error: {exc}"
                break
            extracted = extract_errors(outcome.stdout, outcome.stderr)
            verdict, errors = classify_outcome(
                outcome, _actionable(extracted, config), config.expected_artifacts
            )
            _persist_iteration(iter_dir, None, outcome)

        iterations.append(
            IterationRecord(
                index=index,
                prompt_messages=messages,
                script=script,
                outcome=outcome,
                errors=errors,
                verdict=verdict,
            )
        )
        logger.info(
            "session %s iteration %d: verdict=%s errors=%d",
            request.session_id, index, verdict.value, len(errors),
        )

        if verdict is Verdict.SUCCESS:
            final_status = FinalStatus.SUCCEEDED
            final_script = script
            break
        if verdict is Verdict.FATAL:
            final_status = FinalStatus.ABORTED
            abort_reason = f"fatal error: {errors[0].kind}" if errors else "fatal error"
            break
        prior_script, prior_errors = script, errors

    record = SessionRecord(
        request=request,
        refined=refined,
        iterations=iterations,
        final_status=final_status,
        final_script=final_script,
        started_at=started_at,
        ended_at=_now(),
        abort_reason=abort_reason,
    )
    try:
        save_session_record(record, config.workdir)
    except OSError as exc:
        logger.warning("could not persist session record: %s", exc)
    return record


def _aborted(request: UserRequest, started_at: str, reason: str) -> SessionRecord:
    return SessionRecord(
        request=request,
        refined=prompts.passthrough(request),
        iterations=[],
        final_status=FinalStatus.ABORTED,
        final_script=None,
        started_at=started_at,
        ended_at=_now(),
        abort_reason=reason,
    )


def _persist_iteration(
    iter_dir: Path, script: CandidateScript | None, outcome: ExecutionOutcome
) -> None:
    iter_dir.mkdir(parents=True, exist_ok=True)
    if script is not None:  # executors write script.py themselves otherwise
        body = script.body if script.body.endswith("\n") else script.body + "\n"
        (iter_dir / "script.py").write_text(body, encoding="utf-8", errors="replace")
    (iter_dir / "stdout.txt").write_text(outcome.stdout, encoding="utf-8")
    (iter_dir / "stderr.txt").write_text(outcome.stderr, encoding="utf-8")


def record_to_dict(record: SessionRecord) -> dict:
    return {
        "request": {"text": record.request.text, "session_id": record.request.session_id},
        "refined": {
            "preamble": record.refined.preamble,
            "steps": list(record.refined.steps),
            "source": record.refined.source.value,
        },
        "iterations": [
            {
                "index": it.index,
                "messages_digest": digest_messages(it.prompt_messages),
                "script_path": f"iter{it.index}/script.py",
                "exit_code": it.outcome.exit_code,
                "timed_out": it.outcome.timed_out,
                "errors": [report.to_dict() for report in it.errors],
                "verdict": it.verdict.value,
            }
            for it in record.iterations
        ],
        "final_status": record.final_status.value,
        "final_script_digest": record.final_script.digest if record.final_script else None,
        "started_at": record.started_at,
        "ended_at": record.ended_at,
        "abort_reason": record.abort_reason,
    }


def save_session_record(record: SessionRecord, session_dir: Path) -> Path:
    session_dir.mkdir(parents=True, exist_ok=True)
    path = session_dir / "session.json"
    path.write_text(
        json.dumps(record_to_dict(record), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    return path


def unassisted_config(config: SessionConfig) -> SessionConfig:
    """Degenerate single-shot mode: no refinement, no snippets, one iteration."""
    return replace(
        config, use_refinement=False, use_snippets=False, max_iterations=1
    )
