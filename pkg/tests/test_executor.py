import time

import pytest

from chatvis.executor import (
    CandidateScript,
    ConfigurationError,
    ExecutionOutcome,
    SimRule,
    SimulatedExecutor,
    SubprocessExecutor,
    check_artifacts,
    execute,
)

SCRIPT = CandidateScript(body="print('hello')", iteration=1)


def test_success_run_captures_produced_files(fake_interpreter, tmp_path):
    interp = fake_interpreter(
        "import sys\n"
        "open('out.png', 'wb').write(b'not-a-real-png')\n"
        "print('done')\n"
    )
    outcome = execute(SCRIPT, tmp_path / "work", interp, timeout=30)
    assert outcome.exit_code == 0
    assert not outcome.timed_out
    assert ("out.png", 14) in outcome.produced_files
    assert "done" in outcome.stdout
    assert (tmp_path / "work" / "script.py").read_text().startswith("print")


def test_failure_run_captures_stderr_traceback(fake_interpreter, tmp_path):
    interp = fake_interpreter(
        "import sys\n"
        "sys.stderr.write('Traceback (most recent call last):\\n'\n"
        "                 '  File \"script.py\", line 1, in <module>\\n'\n"
        "                 '    coneGlyph.Scalars = 1\\n'\n"
        "                 \"AttributeError: type object 'Glyph' has no attribute 'Scalars'\\n\")\n"
        "sys.exit(1)\n"
    )
    outcome = execute(SCRIPT, tmp_path / "work", interp, timeout=30)
    assert outcome.exit_code == 1
    assert "AttributeError" in outcome.stderr


def test_timeout_kills_and_marks_outcome(fake_interpreter, tmp_path):
    interp = fake_interpreter("import time\ntime.sleep(3600)\n")
    start = time.perf_counter()
    outcome = execute(SCRIPT, tmp_path / "work", interp, timeout=1.0)
    elapsed = time.perf_counter() - start
    assert outcome.timed_out
    assert outcome.exit_code is None
    assert 0.5 <= outcome.duration <= 1.5
    assert elapsed < 5


def test_capture_completeness_one_mib_each_stream(fake_interpreter, tmp_path):
    interp = fake_interpreter(
        "import sys\n"
        "sys.stdout.write('o' * (1024 * 1024))\n"
        "sys.stderr.write('e' * (1024 * 1024))\n"
    )
    outcome = execute(SCRIPT, tmp_path / "work", interp, timeout=60)
    assert len(outcome.stdout) == 1024 * 1024
    assert len(outcome.stderr) == 1024 * 1024


def test_missing_interpreter_is_configuration_error(tmp_path):
    with pytest.raises(ConfigurationError):
        execute(SCRIPT, tmp_path / "work", tmp_path / "nope", timeout=5)
    with pytest.raises(ConfigurationError):
        execute(SCRIPT, tmp_path / "work", "definitely-not-on-path-xyz", timeout=5)


def test_interpreter_runs_with_cwd_workdir(fake_interpreter, tmp_path):
    interp = fake_interpreter(
        "import os\nopen('cwd.txt', 'w').write(os.getcwd())\n"
    )
    workdir = tmp_path / "work"
    outcome = execute(SCRIPT, workdir, interp, timeout=30)
    assert ("cwd.txt", len(str(workdir))) in outcome.produced_files
    assert (workdir / "cwd.txt").read_text() == str(workdir)


def test_deterministic_outcome_modulo_duration(fake_interpreter, tmp_path):
    interp = fake_interpreter("print('stable')\n")
    a = execute(SCRIPT, tmp_path / "a", interp, timeout=30)
    b = execute(SCRIPT, tmp_path / "b", interp, timeout=30)
    assert (a.exit_code, a.stdout, a.stderr, a.produced_files, a.timed_out) == (
        b.exit_code, b.stdout, b.stderr, b.produced_files, b.timed_out,
    )


def _outcome(produced):
    return ExecutionOutcome(
        exit_code=0, stdout="", stderr="", duration=0.0, produced_files=produced
    )


def test_check_artifacts_present():
    assert check_artifacts(_outcome([("a.png", 10), ("log.txt", 1)]), ["a.png"]) == []


def test_check_artifacts_absent():
    assert check_artifacts(_outcome([]), ["a.png"]) == ["a.png"]


def test_check_artifacts_zero_byte_counts_missing():
    assert check_artifacts(_outcome([("a.png", 0)]), ["a.png"]) == ["a.png"]


def test_subprocess_executor_wraps_execute(fake_interpreter, tmp_path):
    interp = fake_interpreter("print('ok')\n")
    executor = SubprocessExecutor(interp, timeout=30)
    outcome = executor.run(SCRIPT, tmp_path / "work")
    assert outcome.exit_code == 0


def test_simulated_executor_writes_screenshots(tmp_path):
    script = CandidateScript(
        body="SaveScreenshot('shot.png', view, ImageResolution=[64, 48])"
    )
    outcome = SimulatedExecutor().run(script, tmp_path / "sim")
    assert outcome.exit_code == 0
    assert outcome.duration == 0.0
    names = [path for path, size in outcome.produced_files]
    assert names == ["shot.png"]
    assert (tmp_path / "sim" / "shot.png").stat().st_size > 0
    assert (tmp_path / "sim" / "script.py").exists()


def test_simulated_executor_rules_take_precedence(tmp_path):
    rules = (
        SimRule(pattern=r"\.Scalars\s*=", stderr="AttributeError: nope", exit_code=1),
        SimRule(pattern=r"HANG", timed_out=True),
    )
    executor = SimulatedExecutor(rules)
    broken = CandidateScript(body="glyph.Scalars = ['POINTS', 'Temp']")
    outcome = executor.run(broken, tmp_path / "a")
    assert outcome.exit_code == 1
    assert "AttributeError" in outcome.stderr
    hang = CandidateScript(body="HANG\nSaveScreenshot('x.png')")
    outcome = executor.run(hang, tmp_path / "b")
    assert outcome.timed_out
    assert outcome.exit_code is None
    assert outcome.produced_files == []
