"""
compiler.py

Turn heuristic source into a standalone worker executable.

The source is injected into the template's heuristic slot, byte-compiled by the host
toolchain in a subprocess, and checked for a top-level ``heuristic`` taking exactly two
positional parameters. A launcher script next to the slot becomes the worker.
"""

import ast
import logging
import os
import stat
import subprocess
import sys
import tempfile
import time
from pathlib import Path
from typing import Optional

from .errors import ToolchainMissing
from .models import CompileStatus, HeuristicArtifact, Phase

logger = logging.getLogger(__name__)

DEFAULT_TEMPLATE_DIR = Path(__file__).resolve().parent.parent / "worker_template"
PACKAGE_ROOT = Path(__file__).resolve().parent.parent.parent

SLOT_FILE = "heuristic_slot.py"
LAUNCHER_TEMPLATE = "launcher.py.tmpl"
SLOT_MARKER = "# @@HEURISTIC_SOURCE@@"
WORKER_NAME = "worker"


def _check_signature(source: str) -> Optional[str]:
    """Return a diagnostic when the module lacks a usable heuristic entry point."""
    tree = ast.parse(source)
    for node in tree.body:
        if isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef)) and node.name == "heuristic":
            if isinstance(node, ast.AsyncFunctionDef):
                return "heuristic must be a plain function, not async"
            args = node.args
            positional = len(args.posonlyargs) + len(args.args)
            required_kw = [a.arg for a, d in zip(args.kwonlyargs, args.kw_defaults) if d is None]
            if positional != 2 or args.vararg is not None or required_kw:
                return (f"heuristic must take exactly two positional parameters (state, task), "
                        f"line {node.lineno} defines {positional}")
            return None
    return "no top-level function named 'heuristic'"


def compile_heuristic(source: str,
                      template_dir: Optional[Path] = None,
                      build_dir: Optional[Path] = None,
                      phase: Phase = Phase.UNREFINED,
                      attempt_index: int = 1,
                      timeout_seconds: float = 120.0,
                      python: Optional[str] = None) -> HeuristicArtifact:
    """
    Build a worker executable embedding ``source``.

    Args:
        source: Heuristic module source.
        template_dir: Directory holding the slot file and launcher template.
        build_dir: Output directory; a fresh temporary directory when omitted.
        phase: Prompt phase the source came from.
        attempt_index: 1-based attempt number recorded on the artifact.
        timeout_seconds: Toolchain timeout.
        python: Interpreter used as toolchain and worker runtime.

    Returns:
        HeuristicArtifact with Ok(worker_path) or Failed(diagnostics).

    Raises:
        ToolchainMissing: If the interpreter cannot run or the template is incomplete.
    """
    started = time.monotonic()
    template_dir = Path(template_dir or DEFAULT_TEMPLATE_DIR)
    python = python or sys.executable
    slot_template = template_dir / SLOT_FILE
    launcher_template = template_dir / LAUNCHER_TEMPLATE
    if not slot_template.is_file() or not launcher_template.is_file():
        raise ToolchainMissing(f"worker template incomplete in {template_dir}")
    slot_text = slot_template.read_text(encoding="utf-8")
    if SLOT_MARKER not in slot_text:
        raise ToolchainMissing(f"{slot_template} has no {SLOT_MARKER} marker")

    build_dir = Path(build_dir) if build_dir else Path(tempfile.mkdtemp(prefix="planforge-"))
    build_dir.mkdir(parents=True, exist_ok=True)
    slot_path = build_dir / SLOT_FILE
    slot_path.write_text(slot_text.replace(SLOT_MARKER, source.rstrip() + "\n"), encoding="utf-8")

    def artifact(status: CompileStatus) -> HeuristicArtifact:
        elapsed = time.monotonic() - started
        logger.info(f"Compiled attempt {attempt_index} ({phase.value}): {status} in {elapsed:.2f}s")
        return HeuristicArtifact(source=source, phase=phase, compile_status=status,
                                 attempt_index=attempt_index, compile_seconds=elapsed)

    try:
        proc = subprocess.run([python, "-m", "py_compile", str(slot_path)],
                              capture_output=True, text=True, timeout=timeout_seconds)
    except (FileNotFoundError, PermissionError) as e:
        raise ToolchainMissing(f"cannot run {python}: {e}") from e
    except subprocess.TimeoutExpired:
        return artifact(CompileStatus.failed(f"toolchain timed out after {timeout_seconds}s"))

    if proc.returncode != 0:
        return artifact(CompileStatus.failed((proc.stderr + proc.stdout).strip()))

    problem = _check_signature(slot_path.read_text(encoding="utf-8"))
    if problem:
        return artifact(CompileStatus.failed(problem))

    worker_path = build_dir / WORKER_NAME
    launcher = launcher_template.read_text(encoding="utf-8").format(
        python=python,
        package_root=str(PACKAGE_ROOT),
        heuristic_path=str(slot_path))
    worker_path.write_text(launcher, encoding="utf-8")
    worker_path.chmod(worker_path.stat().st_mode | stat.S_IXUSR | stat.S_IXGRP | stat.S_IXOTH)
    if not os.access(worker_path, os.X_OK):
        return artifact(CompileStatus.failed(f"{worker_path} is not executable"))
    return artifact(CompileStatus.success(worker_path))
