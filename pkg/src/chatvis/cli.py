"""Command-line entry points: run one request, run the benchmark, evaluate outputs.

Exit codes are fixed so the benchmark can be scripted:
0 success, 1 evaluation mismatch / benchmark column failure, 2 session
exhausted its iteration budget, 3 session aborted, 64 bad usage.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from pathlib import Path

from .catalog import CatalogError, load_catalog
from .evaluation import ImageVerdict, compare_images, compare_scripts
from .executor import SubprocessExecutor
from .llm import (
    HttpProvider,
    LlmProvider,
    ModelParams,
    ReplayProvider,
    ScriptedProvider,
)
from .prompts import TemplateSet, UserRequest, screenshot_targets
from .session import FinalStatus, SessionConfig, run_session
from .tasks import BenchColumn, list_tasks, run_benchmark

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_EXHAUSTED = 2
EXIT_ABORTED = 3
EXIT_USAGE = 64

_COLUMN_LABELS = ("assisted", "unassisted")


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # argparse default exits 2
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="chatvis",
        description=(
            "Generate ParaView Python scripts from natural language with an "
            "LLM, execute them, and repair them from interpreter errors."
        ),
    )
    parser.add_argument("--verbose", action="store_true", help="log progress to stderr")
    commands = parser.add_subparsers(
        dest="command", metavar="{run,bench,eval}", parser_class=_Parser
    )

    run_cmd = commands.add_parser(
        "run", help="run one visualization request end to end"
    )
    _add_provider_flags(run_cmd)
    run_cmd.add_argument("--prompt", help="request text")
    run_cmd.add_argument("--prompt-file", help="file containing the request text")
    run_cmd.add_argument("--session-id", help="session directory name (default: prompt digest)")
    run_cmd.add_argument("--max-iters", type=int, default=5, help="repair iteration budget")
    run_cmd.add_argument("--no-refine", action="store_true", help="skip prompt refinement")
    run_cmd.add_argument("--no-snippets", action="store_true", help="omit few-shot snippets")

    bench_cmd = commands.add_parser(
        "bench", help="run the five-task benchmark matrix"
    )
    _add_provider_flags(bench_cmd)
    bench_cmd.add_argument(
        "--columns",
        default="assisted,unassisted",
        help="comma-separated provider columns (assisted, unassisted)",
    )
    bench_cmd.add_argument(
        "--primary-column",
        default="assisted",
        help="column that must be all-green for exit code 0",
    )
    bench_cmd.add_argument("--max-iters", type=int, default=5, help="repair iteration budget")
    bench_cmd.add_argument("--jobs", type=int, default=2, help="concurrent sessions")
    bench_cmd.add_argument("--trials", type=int, default=1, help="runs per matrix cell")

    eval_cmd = commands.add_parser(
        "eval", help="compare a candidate against a reference"
    )
    eval_cmd.add_argument("--candidate", required=True, help="candidate image or script")
    eval_cmd.add_argument("--reference", required=True, help="reference image or script")
    eval_cmd.add_argument("--report-json", help="write the comparison report here")
    eval_cmd.add_argument("--figure", help="write a side-by-side diff figure (images only)")
    eval_cmd.add_argument(
        "--per-channel-tol", type=int, default=3, help="per-channel pixel tolerance"
    )
    eval_cmd.add_argument(
        "--differing-threshold",
        type=float,
        default=0.02,
        help="max fraction of differing pixels for a match",
    )
    return parser


def _add_provider_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--provider",
        choices=("http", "replay", "scripted"),
        default="http",
        help="chat-completion provider kind",
    )
    parser.add_argument("--model", default="gpt-4", help="model identifier")
    parser.add_argument("--interpreter", required=True, help="script interpreter executable")
    parser.add_argument(
        "--interpreter-arg",
        action="append",
        default=[],
        help="extra flag passed to the interpreter (repeatable)",
    )
    parser.add_argument("--out-dir", default="runs", help="where session directories go")
    parser.add_argument("--catalog", help="snippet catalog file (default: built-in)")
    parser.add_argument("--templates", help="prompt template directory (default: built-in)")
    parser.add_argument("--timeout-s", type=float, default=120.0, help="execution timeout")
    parser.add_argument(
        "--fixtures", default="fixtures/replay", help="replay fixture directory"
    )
    parser.add_argument(
        "--responses", help="JSON file with a list of scripted responses"
    )
    parser.add_argument(
        "--warnings-as-errors",
        action="store_true",
        help="let warnings trigger the repair loop",
    )


def _make_provider(args: argparse.Namespace, parser: argparse.ArgumentParser) -> LlmProvider:
    if args.provider == "http":
        return HttpProvider()
    if args.provider == "replay":
        return ReplayProvider(args.fixtures)
    if not args.responses:
        parser.error("--provider scripted requires --responses")
    try:
        responses = json.loads(Path(args.responses).read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        parser.error(f"cannot read --responses: {exc}")
    if not isinstance(responses, list) or not all(isinstance(r, str) for r in responses):
        parser.error("--responses must contain a JSON list of strings")
    return ScriptedProvider(responses)


def _make_config(
    args: argparse.Namespace,
    parser: argparse.ArgumentParser,
    workdir: Path,
    expected: list[str],
) -> SessionConfig:
    catalog = None
    if args.catalog:
        try:
            catalog = load_catalog(args.catalog)
        except (OSError, CatalogError) as exc:
            parser.error(f"cannot load catalog: {exc}")
    templates = None
    if args.templates:
        try:
            templates = TemplateSet.load(args.templates)
        except (OSError, FileNotFoundError) as exc:
            parser.error(f"cannot load templates: {exc}")
    return SessionConfig(
        workdir=workdir,
        expected_artifacts=expected,
        max_iterations=getattr(args, "max_iters", 5),
        execution_timeout=args.timeout_s,
        model_params=ModelParams(model=args.model),
        interpreter=args.interpreter,
        interpreter_args=tuple(args.interpreter_arg),
        use_refinement=not getattr(args, "no_refine", False),
        use_snippets=not getattr(args, "no_snippets", False),
        treat_warnings_as_errors=args.warnings_as_errors,
        templates=templates,
        catalog=catalog,
    )


def cmd_run(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    if bool(args.prompt) == bool(args.prompt_file):
        parser.error("exactly one of --prompt or --prompt-file is required")
    if args.prompt:
        text = args.prompt
    else:
        try:
            text = Path(args.prompt_file).read_text(encoding="utf-8").strip()
        except OSError as exc:
            parser.error(f"cannot read --prompt-file: {exc}")
    if not text:
        parser.error("request text is empty")

    session_id = args.session_id or hashlib.sha256(text.encode("utf-8")).hexdigest()[:12]
    workdir = Path(args.out_dir) / session_id
    config = _make_config(args, parser, workdir, screenshot_targets(text))
    provider = _make_provider(args, parser)
    executor = SubprocessExecutor(
        args.interpreter, timeout=args.timeout_s, extra_args=tuple(args.interpreter_arg)
    )
    request = UserRequest(text=text, session_id=session_id)
    record = run_session(request, config, provider, executor)

    print(f"session: {workdir}")
    print(f"status: {record.final_status.value}")
    if record.abort_reason:
        print(f"reason: {record.abort_reason}")
    if record.final_status is FinalStatus.SUCCEEDED:
        final_dir = workdir / f"iter{record.iterations[-1].index}"
        for artifact in config.expected_artifacts:
            print(f"artifact: {final_dir / artifact}")
        return EXIT_OK
    if record.final_status is FinalStatus.EXHAUSTED:
        return EXIT_EXHAUSTED
    return EXIT_ABORTED


def cmd_bench(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    labels = [label.strip() for label in args.columns.split(",") if label.strip()]
    if not labels:
        parser.error("--columns must name at least one column")
    for label in labels:
        if label not in _COLUMN_LABELS:
            parser.error(f"unknown provider label {label!r}")
    if args.primary_column not in labels:
        parser.error("--primary-column must be one of the selected columns")

    provider = _make_provider(args, parser)
    columns = [
        BenchColumn(label=label, provider=provider)
        if label == "assisted"
        else BenchColumn.unassisted(label, provider)
        for label in labels
    ]
    out_dir = Path(args.out_dir)
    config = _make_config(args, parser, out_dir, [])
    executor = SubprocessExecutor(
        args.interpreter, timeout=args.timeout_s, extra_args=tuple(args.interpreter_arg)
    )
    matrix = run_benchmark(
        list_tasks(), columns, config, executor, jobs=args.jobs, trials=args.trials
    )

    from . import report

    out_dir.mkdir(parents=True, exist_ok=True)
    text = report.render_matrix_text(matrix)
    (out_dir / "matrix.txt").write_text(text, encoding="utf-8")
    report.write_matrix_json(matrix, out_dir / "matrix.json")
    report.write_matrix_csv(matrix, out_dir / "matrix.csv")
    report.render_matrix_figure(matrix, out_dir / "matrix.png")
    print(text, end="")
    print(f"artifacts: {out_dir}/matrix.{{json,csv,txt,png}}")
    return EXIT_OK if matrix.column_all_green(args.primary_column) else EXIT_MISMATCH


def cmd_eval(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    candidate, reference = Path(args.candidate), Path(args.reference)
    is_image = candidate.suffix.lower() == ".png"
    if is_image != (reference.suffix.lower() == ".png"):
        parser.error("--candidate and --reference must both be images or both scripts")

    if is_image:
        comparison = compare_images(
            candidate,
            reference,
            per_channel_tol=args.per_channel_tol,
            differing_threshold=args.differing_threshold,
        )
        payload = comparison.to_dict()
        ok = comparison.verdict is ImageVerdict.MATCH
        if args.figure and comparison.verdict is not ImageVerdict.INCOMPARABLE:
            from . import report

            report.render_image_diff_figure(candidate, reference, comparison, args.figure)
    else:
        try:
            cand_text = candidate.read_text(encoding="utf-8")
            ref_text = reference.read_text(encoding="utf-8")
        except OSError as exc:
            parser.error(f"cannot read scripts: {exc}")
        comparison = compare_scripts(cand_text, ref_text)
        payload = comparison.to_dict()
        ok = not comparison.missing

    rendered = json.dumps(payload, indent=2, sort_keys=True)
    print(rendered)
    if args.report_json:
        Path(args.report_json).write_text(rendered + "\n", encoding="utf-8")
    return EXIT_OK if ok else EXIT_MISMATCH


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    if args.command == "run":
        return cmd_run(args, parser)
    if args.command == "bench":
        return cmd_bench(args, parser)
    if args.command == "eval":
        return cmd_eval(args, parser)
    parser.print_help()
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
