"""The five canonical visualization tasks and the Error/SS benchmark matrix.

Prompt texts are frozen verbatim (golden-file and hash-pinned in the test
suite): do not edit them. The referenced datasets (ml-100.vtk from a
Marschner-Lobb generator, disk.ex2 and can_points.ex2 from the ParaView
sample-data collection) are not redistributed here; the registry records the
filenames and a stand-in interpreter covers them in tests.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path

from .executor import ScriptExecutor
from .llm import LlmProvider
from .prompts import UserRequest
from .session import (
    FinalStatus,
    SessionConfig,
    SessionRecord,
    Verdict,
    run_session,
)
from .tracebacks import ReportSource


class TaskId(str, Enum):
    ISOSURFACE = "isosurface"
    SLICE_CONTOUR = "slice_contour"
    VOLUME_RENDER = "volume_render"
    DELAUNAY = "delaunay"
    STREAMLINE = "streamline"


@dataclass(frozen=True)
class TaskSpec:
    id: TaskId
    title: str
    prompt_text: str
    input_files: tuple[str, ...]
    expected_screenshot: str
    resolution: tuple[int, int] = (1920, 1080)


_ISOSURFACE_PROMPT = """\
Please generate a ParaView Python script for the following operations.
Read in the file named ml-100.vtk.
Generate an isosurface of the variable var0 at value 0.5.
Save a screenshot of the result in the filename ml-iso-screenshot.png.
The rendered view and saved screenshot should be 1920 x 1080 pixels."""

_SLICE_CONTOUR_PROMPT = """\
Please generate a ParaView Python script for the following operations.
Read in the file named `ml-100.vtk'.
Slice the volume in a plane parallel to the y-z plane at x=0.
Take a contour through the slice at the value 0.5.
Color the contour red.
Rotate the view to look at the +x direction.
Save a screenshot of the result in the filename `ml-slice-iso-screenshot.png'.
The rendered view and saved screenshot should be 1920 x 1080 pixels."""

_VOLUME_RENDER_PROMPT = """\
Please generate a ParaView Python script for the following operations.
Read in the file named `ml-100.vtk'.
Generate a volume rendering using the default transfer function.
Rotate the view to an isometric direction.
Save a screenshot of the result in the filename `ml-dvr-screenshot.png'.
The rendered view and saved screenshot should be 1920 x 1080 pixels."""

_DELAUNAY_PROMPT = """\
Please generate a ParaView Python script for the following operations.
Read in the file named `can_points.ex2'.
Generate a 3d Delaunay triangulation of the dataset.
Clip the data with a y-z plane at x=0, keeping the -x half of the data and removing the +x half.
Render the image as a wireframe.
View the result in an isometric view.
Save a screenshot of the result in the filename `points-surf-clip-screenshot.png'.
The rendered view and saved screenshot should be 1920 x 1080 pixels."""

_STREAMLINE_PROMPT = """\
Please generate a ParaView Python script for the following operations.
Read in the file named `disk.ex2'.
Trace streamlines of the V data array seeded from a default point cloud.
Render the streamlines with tubes.
Add cone glyphs to the streamlines.
Color the streamlines and glyphs by the Temp data array.
View the result in the +X direction.
Save a screenshot of the result in the filename `stream-glyph-screenshot.png'.
The rendered view and saved screenshot should be 1920 x 1080 pixels."""

_TASKS: tuple[TaskSpec, ...] = (
    TaskSpec(
        id=TaskId.ISOSURFACE,
        title="Isosurfacing",
        prompt_text=_ISOSURFACE_PROMPT,
        input_files=("ml-100.vtk",),
        expected_screenshot="ml-iso-screenshot.png",
    ),
    TaskSpec(
        id=TaskId.SLICE_CONTOUR,
        title="Slicing then contouring",
        prompt_text=_SLICE_CONTOUR_PROMPT,
        input_files=("ml-100.vtk",),
        expected_screenshot="ml-slice-iso-screenshot.png",
    ),
    TaskSpec(
        id=TaskId.VOLUME_RENDER,
        title="Volume rendering",
        prompt_text=_VOLUME_RENDER_PROMPT,
        input_files=("ml-100.vtk",),
        expected_screenshot="ml-dvr-screenshot.png",
    ),
    TaskSpec(
        id=TaskId.DELAUNAY,
        title="Delaunay triangulation",
        prompt_text=_DELAUNAY_PROMPT,
        input_files=("can_points.ex2",),
        expected_screenshot="points-surf-clip-screenshot.png",
    ),
    TaskSpec(
        id=TaskId.STREAMLINE,
        title="Streamline tracing",
        prompt_text=_STREAMLINE_PROMPT,
        input_files=("disk.ex2",),
        expected_screenshot="stream-glyph-screenshot.png",
    ),
)


def list_tasks() -> list[TaskSpec]:
    """The five canonical tasks, in fixed order."""
    return list(_TASKS)


def get_task(task_id: TaskId | str) -> TaskSpec:
    task_id = TaskId(task_id)
    for task in _TASKS:
        if task.id is task_id:
            return task
    raise KeyError(task_id)


@dataclass
class BenchColumn:
    """One provider column of the matrix, with its session mode.

    The unassisted baseline is a degenerate column: no refinement, no
    snippets, a single iteration.
    """

    label: str
    provider: LlmProvider
    refine: bool = True
    snippets: bool = True
    max_iterations: int | None = None

    @classmethod
    def unassisted(cls, label: str, provider: LlmProvider) -> "BenchColumn":
        return cls(
            label=label, provider=provider, refine=False, snippets=False, max_iterations=1
        )


@dataclass
class BenchmarkCell:
    task_id: TaskId
    provider_label: str
    error_free: bool
    screenshot_produced: bool
    iterations_used: int
    note: str | None = None


@dataclass
class BenchmarkMatrix:
    tasks: list[TaskSpec]
    provider_labels: list[str]
    cells: list[BenchmarkCell] = field(default_factory=list)

    def cell(self, task_id: TaskId, label: str) -> BenchmarkCell:
        for cell in self.cells:
            if cell.task_id is task_id and cell.provider_label == label:
                return cell
        raise KeyError((task_id, label))

    def column_all_green(self, label: str) -> bool:
        column = [c for c in self.cells if c.provider_label == label]
        return bool(column) and all(
            c.error_free and c.screenshot_produced for c in column
        )


def _cell_from_record(
    task: TaskSpec, label: str, record: SessionRecord
) -> BenchmarkCell:
    if not record.iterations:
        return BenchmarkCell(
            task_id=task.id,
            provider_label=label,
            error_free=False,
            screenshot_produced=False,
            iterations_used=0,
            note=record.abort_reason,
        )
    final = record.iterations[-1]
    hard_errors = [
        report
        for report in final.errors
        if report.source in (ReportSource.TRACEBACK, ReportSource.TOOL_ERROR)
        and not report.is_warning()
    ]
    error_free = (
        final.outcome.exit_code == 0
        and not final.outcome.timed_out
        and not hard_errors
    )
    note = None
    if record.final_status is FinalStatus.ABORTED:
        note = record.abort_reason
    return BenchmarkCell(
        task_id=task.id,
        provider_label=label,
        error_free=error_free,
        screenshot_produced=final.verdict is Verdict.SUCCESS,
        iterations_used=len(record.iterations),
        note=note,
    )


def _merge_trials(cells: list[BenchmarkCell]) -> BenchmarkCell:
    first = cells[0]
    return BenchmarkCell(
        task_id=first.task_id,
        provider_label=first.provider_label,
        error_free=all(c.error_free for c in cells),
        screenshot_produced=all(c.screenshot_produced for c in cells),
        iterations_used=max(c.iterations_used for c in cells),
        note=next((c.note for c in cells if c.note), None),
    )


def _run_cell(
    task: TaskSpec,
    column: BenchColumn,
    config: SessionConfig,
    executor: ScriptExecutor,
    out_dir: Path,
    trials: int,
) -> BenchmarkCell:
    trial_cells = []
    for trial in range(1, trials + 1):
        workdir = out_dir / column.label / task.id.value
        if trials > 1:
            workdir = workdir / f"trial{trial}"
        cell_config = replace(
            config,
            workdir=workdir,
            expected_artifacts=[task.expected_screenshot],
            use_refinement=column.refine and config.use_refinement,
            use_snippets=column.snippets and config.use_snippets,
            max_iterations=column.max_iterations or config.max_iterations,
        )
        request = UserRequest(
            text=task.prompt_text,
            session_id=f"{column.label}-{task.id.value}"
            + (f"-trial{trial}" if trials > 1 else ""),
        )
        record = run_session(request, cell_config, column.provider, executor)
        trial_cells.append(_cell_from_record(task, column.label, record))
    return _merge_trials(trial_cells)


def run_benchmark(
    tasks: list[TaskSpec],
    columns: list[BenchColumn],
    config: SessionConfig,
    executor: ScriptExecutor,
    jobs: int = 2,
    trials: int = 1,
) -> BenchmarkMatrix:
    """One cell per (task, column); cells never share session state."""
    out_dir = Path(config.workdir)
    jobs = max(1, jobs)
    work = [(task, column) for task in tasks for column in columns]
    results: dict[tuple[str, str], BenchmarkCell] = {}
    if jobs == 1:
        for task, column in work:
            results[(task.id.value, column.label)] = _run_cell(
                task, column, config, executor, out_dir, trials
            )
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            futures = {
                pool.submit(
                    _run_cell, task, column, config, executor, out_dir, trials
                ): (task.id.value, column.label)
                for task, column in work
            }
            for future, key in futures.items():
                results[key] = future.result()

    cells = [
        results[(task.id.value, column.label)] for task in tasks for column in columns
    ]
    return BenchmarkMatrix(
        tasks=list(tasks),
        provider_labels=[column.label for column in columns],
        cells=cells,
    )
