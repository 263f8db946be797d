"""Term-modal epistemic planning toolkit."""

import os
import sys

try:
    from ._termplan import EngineError, ParseFailure, Task, check_frame, load_task
except ImportError:  # in-tree builds keep the module next to the other targets
    _dir = os.environ.get("TERMPLAN_MODULE_DIR")
    if not _dir:
        raise
    sys.path.insert(0, _dir)
    try:
        from _termplan import (  # noqa: F401
            EngineError,
            ParseFailure,
            Task,
            check_frame,
            load_task,
        )
    finally:
        sys.path.pop(0)


def load_files(domain_path, problem_path):
    """Parse a domain file and a problem file into a Task."""
    with open(domain_path, "r", encoding="utf-8") as f:
        domain_text = f.read()
    with open(problem_path, "r", encoding="utf-8") as f:
        problem_text = f.read()
    return load_task(domain_text, problem_text)


__all__ = [
    "EngineError",
    "ParseFailure",
    "Task",
    "check_frame",
    "load_task",
    "load_files",
]
