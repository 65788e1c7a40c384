"""chatvis: an iterative LLM assistant for ParaView Python visualization scripts.

Pipeline: refine the natural-language request into steps, generate a script
with few-shot snippet examples, execute it, extract interpreter errors, and
prompt for repairs until the script runs cleanly and produces the requested
screenshot.
"""

from .catalog import Catalog, Snippet, default_catalog, load_catalog, save_catalog, select
from .evaluation import (
    ImageComparison,
    ImageVerdict,
    ScriptComparison,
    compare_images,
    compare_scripts,
    extract_call_sequence,
)
from .executor import (
    CandidateScript,
    ExecutionOutcome,
    SimRule,
    SimulatedExecutor,
    SubprocessExecutor,
    check_artifacts,
    execute,
)
from .llm import (
    ChatMessage,
    HttpProvider,
    ModelParams,
    RecordingProvider,
    ReplayProvider,
    ScriptedProvider,
    digest_messages,
    extract_script,
)
from .prompts import (
    ExamplePair,
    OperationTag,
    RefinedPrompt,
    UserRequest,
    build_generation_messages,
    build_repair_messages,
    detect_operations,
    refine,
)
from .session import (
    FinalStatus,
    IterationRecord,
    SessionConfig,
    SessionRecord,
    Verdict,
    classify_outcome,
    run_session,
)
from .tasks import BenchColumn, BenchmarkCell, BenchmarkMatrix, TaskSpec, list_tasks, run_benchmark
from .tracebacks import ErrorReport, FrameRef, extract_errors, render_for_llm

__version__ = "0.1.0"
