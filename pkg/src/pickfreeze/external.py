"""Subprocess harness for externally evaluated models.

Protocol: the design is written as a CSV, the external command is invoked
with the design path and an output path as its two trailing arguments, and
the output CSV must contain exactly one row per design row, keyed by
(block, replicate, role).  Rows may come back in any order.
"""

from __future__ import annotations

import csv
import os
import subprocess
import tempfile
from dataclasses import replace

import numpy as np

from .design import CvmDesign, PickFreezeDesign, design_rows, write_design_csv
from .errors import (
    ModelEvalError,
    ModelTimeoutError,
    OutputParseError,
    ProtocolError,
)


def read_output_csv(path):
    """Parse an output CSV into {(block, replicate, role): y-vector}."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:3]] != [
            "block",
            "replicate",
            "role",
        ]:
            raise ProtocolError(f"{path}: bad header {header}")
        k = len(header) - 3
        if k < 1:
            raise ProtocolError(f"{path}: no output columns in header")
        outputs = {}
        for lineno, rec in enumerate(reader, start=2):
            if len(rec) != 3 + k:
                raise ProtocolError(
                    f"{path}:{lineno}: expected {3 + k} cells, got {len(rec)}"
                )
            try:
                key = (int(rec[0]), int(rec[1]), rec[2].strip())
            except ValueError as exc:
                raise OutputParseError(f"{path}:{lineno}: bad key: {exc}") from exc
            y = np.empty(k)
            for c, cell in enumerate(rec[3:]):
                try:
                    y[c] = float(cell)
                except ValueError as exc:
                    raise OutputParseError(
                        f"{path}:{lineno}: column y{c + 1} is not numeric: "
                        f"{cell!r} (key {key})"
                    ) from exc
            if key in outputs:
                raise ProtocolError(f"{path}:{lineno}: duplicate key {key}")
            outputs[key] = y
    return k, outputs


def attach_outputs(design, outputs: dict, k: int):
    """Match outputs to the design's keyed rows and return an evaluated
    design; missing or extra keys are protocol errors naming the key."""
    keys = list(_keyed(design))
    for key in keys:
        if key not in outputs:
            raise ProtocolError(f"output is missing row {key}")
    if len(outputs) != len(keys):
        extra = sorted(set(outputs) - set(keys))[0]
        raise ProtocolError(f"output has unexpected row {extra}")

    if isinstance(design, PickFreezeDesign):
        Y = np.empty((design.p, design.N, k))
        for r in range(design.p):
            for j in range(design.N):
                Y[r, j] = outputs[(j + 1, r + 1, "pf")]
        return replace(design, Y=Y)
    Z1 = np.empty((design.N, k))
    Z2 = np.empty((design.N, k))
    W = np.empty((design.N, k))
    for j in range(design.N):
        Z1[j] = outputs[(j + 1, 1, "pf")]
        Z2[j] = outputs[(j + 1, 2, "pf")]
        W[j] = outputs[(j + 1, 1, "w")]
    return replace(design, Z1=Z1, Z2=Z2, W=W)


def _keyed(design):
    for block, rep, role, _x in design_rows(design):
        yield (block, rep, role)


def external_model_roundtrip(
    design,
    command,
    workdir=None,
    timeout=None,
    keep_dir=None,
):
    """Write the design, run the command, read back and attach outputs."""
    own_tmp = keep_dir is None
    tmpdir = tempfile.mkdtemp(prefix="pickfreeze-") if own_tmp else keep_dir
    os.makedirs(tmpdir, exist_ok=True)
    design_path = os.path.join(tmpdir, "design.csv")
    output_path = os.path.join(tmpdir, "output.csv")
    write_design_csv(design, design_path)
    cmd = list(command) + [design_path, output_path]
    try:
        proc = subprocess.run(
            cmd,
            cwd=workdir,
            capture_output=True,
            text=True,
            timeout=timeout,
        )
    except subprocess.TimeoutExpired as exc:
        raise ModelTimeoutError(
            f"external model timed out after {timeout}s: {' '.join(cmd)}"
        ) from exc
    if proc.returncode != 0:
        tail = (proc.stderr or proc.stdout or "").strip()[-2000:]
        raise ModelEvalError(
            f"external model exited {proc.returncode}: {tail}"
        )
    if not os.path.exists(output_path):
        raise ProtocolError(f"external model produced no output file {output_path}")
    k, outputs = read_output_csv(output_path)
    evaluated = attach_outputs(design, outputs, k)
    if own_tmp:
        for path in (design_path, output_path):
            try:
                os.remove(path)
            except OSError:
                pass
        try:
            os.rmdir(tmpdir)
        except OSError:
            pass
    return evaluated
