import json

import pytest

from chatvis.executor import (
    ExecutionOutcome,
    SimRule,
    SimulatedExecutor,
)
from chatvis.llm import (
    RecordingProvider,
    ReplayProvider,
    ScriptedProvider,
    TransportError,
)
from chatvis.prompts import UserRequest
from chatvis.session import (
    FinalStatus,
    SessionConfig,
    Verdict,
    classify_outcome,
    record_to_dict,
    run_session,
    unassisted_config,
)
from chatvis.tracebacks import ReportSource, extract_errors, synthesized_report

GLYPH_TRACEBACK = (
    "Traceback (most recent call last):\n"
    '  File "script.py", line 2, in <module>\n'
    "    glyph.Scalars = ['POINTS', 'Temp']\n"
    "AttributeError: type object 'Glyph' has no attribute 'Scalars'\n"
)

BROKEN_SCRIPT = (
    "from paraview.simple import *\n"
    "glyph.Scalars = ['POINTS', 'Temp']\n"
    "SaveScreenshot('ml-iso-screenshot.png', renderView)\n"
)
FIXED_SCRIPT = (
    "from paraview.simple import *\n"
    "glyph = Glyph(Input=reader, GlyphType='Cone')\n"
    "SaveScreenshot('ml-iso-screenshot.png', renderView)\n"
)
BLANK_SCRIPT = "from paraview.simple import *\nShow(reader, renderView)\n"


def sim_executor():
    return SimulatedExecutor(
        rules=(
            SimRule(pattern=r"\.Scalars\s*=", stderr=GLYPH_TRACEBACK, exit_code=1),
            SimRule(pattern=r"HANG_FOREVER", timed_out=True),
            SimRule(
                pattern=r"KEYBOARD_STOP",
                stderr=(
                    "Traceback (most recent call last):\n"
                    '  File "script.py", line 1, in <module>\n'
                    "    run()\n"
                    "KeyboardInterrupt\n"
                ),
                exit_code=1,
            ),
        )
    )


def make_config(tmp_path, **overrides):
    options = dict(
        workdir=tmp_path / "session",
        expected_artifacts=["ml-iso-screenshot.png"],
        use_refinement=False,
        max_iterations=5,
    )
    options.update(overrides)
    return SessionConfig(**options)


REQUEST = UserRequest(
    "Generate an isosurface and save a screenshot of the result in the filename "
    "ml-iso-screenshot.png.",
    session_id="test-session",
)


def test_repair_loop_converges_in_two_iterations(tmp_path):
    provider = ScriptedProvider([BROKEN_SCRIPT, FIXED_SCRIPT])
    record = run_session(REQUEST, make_config(tmp_path), provider, sim_executor())
    assert record.final_status is FinalStatus.SUCCEEDED
    assert len(record.iterations) == 2
    assert record.iterations[0].verdict is Verdict.REPAIRABLE
    assert record.iterations[1].verdict is Verdict.SUCCESS
    assert record.final_script is not None
    assert record.final_script.body == FIXED_SCRIPT.strip()


def test_iteration_errors_appear_verbatim_in_next_prompt(tmp_path):
    provider = ScriptedProvider([BROKEN_SCRIPT, FIXED_SCRIPT])
    record = run_session(REQUEST, make_config(tmp_path), provider, sim_executor())
    repair_prompt = "\n".join(
        message.content for message in record.iterations[1].prompt_messages
    )
    for report in record.iterations[0].errors:
        assert report.raw in repair_prompt
    assert record.iterations[0].script.body in repair_prompt


def test_always_broken_provider_exhausts_budget(tmp_path):
    provider = ScriptedProvider([BROKEN_SCRIPT] * 3)
    config = make_config(tmp_path, max_iterations=3)
    record = run_session(REQUEST, config, provider, sim_executor())
    assert record.final_status is FinalStatus.EXHAUSTED
    assert [it.index for it in record.iterations] == [1, 2, 3]
    assert record.final_script is None
    for iteration in record.iterations:
        assert iteration.errors
        assert iteration.script.body == BROKEN_SCRIPT.strip()


def test_first_script_correct_single_iteration(tmp_path):
    provider = ScriptedProvider([FIXED_SCRIPT])
    record = run_session(REQUEST, make_config(tmp_path), provider, sim_executor())
    assert record.final_status is FinalStatus.SUCCEEDED
    assert len(record.iterations) == 1
    artifact = tmp_path / "session" / "iter1" / "ml-iso-screenshot.png"
    assert artifact.stat().st_size > 0


def test_blank_output_is_repairable_with_synthesized_report(tmp_path):
    provider = ScriptedProvider([BLANK_SCRIPT, FIXED_SCRIPT])
    record = run_session(REQUEST, make_config(tmp_path), provider, sim_executor())
    assert record.final_status is FinalStatus.SUCCEEDED
    first = record.iterations[0]
    assert first.outcome.exit_code == 0
    assert first.verdict is Verdict.REPAIRABLE
    (report,) = first.errors
    assert report.source is ReportSource.SYNTHESIZED
    assert "ml-iso-screenshot.png was not created" in report.message
    repair_prompt = record.iterations[1].prompt_messages[-1].content
    assert report.message in repair_prompt


def test_timeout_is_repairable(tmp_path):
    provider = ScriptedProvider(["HANG_FOREVER\n", FIXED_SCRIPT])
    record = run_session(REQUEST, make_config(tmp_path), provider, sim_executor())
    assert record.final_status is FinalStatus.SUCCEEDED
    first = record.iterations[0]
    assert first.outcome.timed_out
    assert first.verdict is Verdict.REPAIRABLE
    assert any("timed out" in report.message for report in first.errors)


def test_provider_failure_aborts_with_cause(tmp_path):
    class Dying:
        kind = "scripted"

        def complete(self, messages, params):
            raise TransportError("socket closed", status=None)

    record = run_session(REQUEST, make_config(tmp_path), Dying(), sim_executor())
    assert record.final_status is FinalStatus.ABORTED
    assert "socket closed" in record.abort_reason
    assert record.iterations == []
    assert record.final_script is None


def test_fatal_error_aborts(tmp_path):
    provider = ScriptedProvider(["KEYBOARD_STOP\n"])
    record = run_session(REQUEST, make_config(tmp_path), provider, sim_executor())
    assert record.final_status is FinalStatus.ABORTED
    assert record.iterations[-1].verdict is Verdict.FATAL


def test_empty_completion_is_repairable(tmp_path):
    provider = ScriptedProvider(["   ", FIXED_SCRIPT])
    record = run_session(REQUEST, make_config(tmp_path), provider, sim_executor())
    assert record.final_status is FinalStatus.SUCCEEDED
    first = record.iterations[0]
    assert first.verdict is Verdict.REPAIRABLE
    assert first.errors[0].kind == "EmptyScriptError"


def test_warnings_do_not_block_success_by_default(tmp_path):
    executor = SimulatedExecutor(
        rules=(
            SimRule(
                pattern=r"SaveScreenshot",
                stderr="script.py:1: DeprecationWarning: old API\n  SaveScreenshot('x')\n",
                exit_code=0,
                write_artifacts=True,
            ),
        )
    )
    provider = ScriptedProvider([FIXED_SCRIPT])
    record = run_session(REQUEST, make_config(tmp_path), provider, executor)
    assert record.final_status is FinalStatus.SUCCEEDED

    strict = make_config(tmp_path, workdir=tmp_path / "strict", treat_warnings_as_errors=True)
    provider = ScriptedProvider([FIXED_SCRIPT] * 5)
    record = run_session(REQUEST, strict, provider, executor)
    assert record.final_status is FinalStatus.EXHAUSTED


def test_session_json_schema_and_layout(tmp_path):
    provider = ScriptedProvider([BROKEN_SCRIPT, FIXED_SCRIPT])
    config = make_config(tmp_path)
    record = run_session(REQUEST, config, provider, sim_executor())
    session_dir = config.workdir
    payload = json.loads((session_dir / "session.json").read_text())
    assert set(payload) >= {
        "request", "refined", "iterations", "final_status",
        "final_script_digest", "started_at", "ended_at",
    }
    assert payload["final_status"] == "succeeded"
    assert payload["final_script_digest"] == record.final_script.digest
    assert [it["index"] for it in payload["iterations"]] == [1, 2]
    for entry in payload["iterations"]:
        assert set(entry) == {
            "index", "messages_digest", "script_path", "exit_code",
            "timed_out", "errors", "verdict",
        }
        script_path = session_dir / entry["script_path"]
        assert script_path.exists()
        iter_dir = script_path.parent
        assert (iter_dir / "stdout.txt").exists()
        assert (iter_dir / "stderr.txt").exists()
    assert payload["iterations"][0]["errors"][0]["kind"] == "AttributeError"


def test_replay_determinism_byte_identical_modulo_timestamps(tmp_path):
    fixtures = tmp_path / "fixtures"
    recorder = RecordingProvider(
        ScriptedProvider(["- do the thing with ml-iso-screenshot.png\n", FIXED_SCRIPT]),
        fixtures,
    )
    seed_config = make_config(tmp_path, workdir=tmp_path / "seed", use_refinement=True)
    run_session(REQUEST, seed_config, recorder, sim_executor())

    def normalized(workdir):
        config = make_config(tmp_path, workdir=workdir, use_refinement=True)
        run_session(REQUEST, config, ReplayProvider(fixtures), sim_executor())
        payload = json.loads((workdir / "session.json").read_text())
        del payload["started_at"], payload["ended_at"]
        return json.dumps(payload, sort_keys=True)

    first = normalized(tmp_path / "run1")
    second = normalized(tmp_path / "run2")
    assert first == second


def test_unassisted_config_is_single_shot(tmp_path):
    config = unassisted_config(make_config(tmp_path, use_refinement=True))
    assert config.max_iterations == 1
    assert not config.use_refinement
    assert not config.use_snippets
    provider = ScriptedProvider([BROKEN_SCRIPT])
    record = run_session(REQUEST, config, provider, sim_executor())
    assert record.final_status is FinalStatus.EXHAUSTED
    assert len(record.iterations) == 1
    assert provider.remaining() == 0


def test_classify_outcome_success():
    outcome = ExecutionOutcome(
        exit_code=0, stdout="", stderr="", duration=0.1,
        produced_files=[("shot.png", 100)],
    )
    verdict, reports = classify_outcome(outcome, [], ["shot.png"])
    assert verdict is Verdict.SUCCESS
    assert reports == []


def test_classify_outcome_repairable_on_error():
    outcome = ExecutionOutcome(
        exit_code=1, stdout="", stderr=GLYPH_TRACEBACK, duration=0.1
    )
    errors = extract_errors(outcome.stdout, outcome.stderr)
    verdict, reports = classify_outcome(outcome, errors, ["shot.png"])
    assert verdict is Verdict.REPAIRABLE
    assert reports == errors


def test_classify_outcome_synthesizes_missing_artifact():
    outcome = ExecutionOutcome(exit_code=0, stdout="", stderr="", duration=0.1)
    verdict, reports = classify_outcome(outcome, [], ["shot.png"])
    assert verdict is Verdict.REPAIRABLE
    (report,) = reports
    assert report.kind == "MissingArtifactError"
    assert report.message == "expected output file shot.png was not created"


def test_classify_outcome_zero_byte_artifact_missing():
    outcome = ExecutionOutcome(
        exit_code=0, stdout="", stderr="", duration=0.1,
        produced_files=[("shot.png", 0)],
    )
    verdict, reports = classify_outcome(outcome, [], ["shot.png"])
    assert verdict is Verdict.REPAIRABLE
    assert "shot.png was not created" in reports[0].message


def test_classify_outcome_fatal_kind():
    outcome = ExecutionOutcome(exit_code=1, stdout="", stderr="", duration=0.1)
    report = synthesized_report("KeyboardInterrupt", "")
    verdict, _ = classify_outcome(outcome, [report], [])
    assert verdict is Verdict.FATAL


def test_classify_outcome_nonzero_exit_without_reports():
    outcome = ExecutionOutcome(
        exit_code=2, stdout="", stderr="something odd", duration=0.1
    )
    verdict, reports = classify_outcome(outcome, [], [])
    assert verdict is Verdict.REPAIRABLE
    assert reports[0].kind == "NonzeroExitError"
    assert "code 2" in reports[0].message


def test_config_validation(tmp_path):
    with pytest.raises(ValueError):
        SessionConfig(workdir=tmp_path, max_iterations=0)
    with pytest.raises(ValueError):
        SessionConfig(workdir=tmp_path, execution_timeout=0)


def test_record_to_dict_sorted_and_stable(tmp_path):
    provider = ScriptedProvider([FIXED_SCRIPT])
    record = run_session(REQUEST, make_config(tmp_path), provider, sim_executor())
    payload = record_to_dict(record)
    assert payload["request"]["session_id"] == "test-session"
    assert payload["refined"]["source"] == "passthrough"
