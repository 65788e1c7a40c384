"""Shared paths and corpus loading for the test suite."""

import json
from pathlib import Path

REPO_ROOT = Path(__file__).resolve().parent.parent
FIXTURES = Path(__file__).resolve().parent / "fixtures"
TRACEBACK_CORPUS = REPO_ROOT / "fixtures" / "tracebacks"
MOCK_PVPYTHON = REPO_ROOT / "mock_pvpython" / "bin" / "mock-pvpython"


def load_corpus_streams(out_path: Path) -> tuple[str, str]:
    """Split a corpus .out file into (stdout, stderr)."""
    text = out_path.read_text(encoding="utf-8")
    if text.startswith("===STDOUT===\n"):
        rest = text[len("===STDOUT===\n"):]
        stdout, stderr = rest.split("===STDERR===\n", 1)
        return stdout, stderr
    return "", text


def load_corpus() -> list[tuple[str, str, str, list[dict]]]:
    corpus = []
    for out_path in sorted(TRACEBACK_CORPUS.glob("*.out")):
        stdout, stderr = load_corpus_streams(out_path)
        expected = json.loads(out_path.with_suffix(".expected").read_text("utf-8"))
        corpus.append((out_path.stem, stdout, stderr, expected))
    return corpus
