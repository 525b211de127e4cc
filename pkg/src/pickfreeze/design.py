"""Designs of experiment for Pick-and-Freeze estimation.

A Pick-and-Freeze design holds p replicated output samples that share the
frozen coordinate(s) within each block; the three-sample design adds a
fully independent output sample used as integration points by the
Cramer-von-Mises estimator.

Frozen coordinates are drawn once per block and copied, never re-drawn, so
replicates share them bit-for-bit.  Stream purposes separate frozen draws,
per-replicate draws and the independent sample: growing p or N extends a
design instead of reshuffling it.
"""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .distributions import InputModel
from .errors import ModelEvalError, ParameterError
from .streams import Stream


@dataclass
class Model:
    """Deterministic vectorized model: (n, d) inputs -> (n, k) outputs."""

    input_names: list
    output_dim: int
    fn: object
    name: str = ""

    @property
    def d(self):
        return len(self.input_names)


def evaluate_model(model: Model, X: np.ndarray, threads=None, replicate=None):
    """Evaluate a model over the rows of X, optionally in parallel chunks.

    Rows are independent and results are placed by index, so the output is
    identical for every thread count.  Failures are re-run row by row to
    name the offending block.
    """
    n = X.shape[0]

    def run(block):
        out = np.asarray(model.fn(block), dtype=float)
        if out.ndim == 1:
            out = out[:, None]
        if out.shape != (block.shape[0], model.output_dim):
            raise ModelEvalError(
                f"model {model.name!r} returned shape {out.shape}, "
                f"expected {(block.shape[0], model.output_dim)}",
                replicate=replicate,
            )
        return out

    def locate_failure(exc):
        for j in range(n):
            try:
                run(X[j : j + 1])
            except ModelEvalError:
                raise
            except Exception:
                raise ModelEvalError(
                    f"model {model.name!r} failed at block {j + 1}"
                    + (f", replicate {replicate}" if replicate else "")
                    + f": {exc}",
                    block=j + 1,
                    replicate=replicate,
                ) from exc
        raise ModelEvalError(str(exc), replicate=replicate) from exc

    if not threads or threads <= 1 or n < 2:
        try:
            return run(X)
        except ModelEvalError:
            raise
        except Exception as exc:
            return locate_failure(exc)

    chunk = max(1, -(-n // (threads * 4)))
    starts = list(range(0, n, chunk))
    out = np.empty((n, model.output_dim), dtype=float)
    try:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for start, res in zip(
                starts, pool.map(lambda s: run(X[s : s + chunk]), starts)
            ):
                out[start : start + chunk] = res
    except ModelEvalError:
        raise
    except Exception as exc:
        return locate_failure(exc)
    return out


def _normalize_v(v, d):
    if isinstance(v, (int, np.integer)):
        v = (int(v),)
    v = tuple(sorted(int(i) for i in v))
    if not v:
        raise ParameterError("frozen index set v must be nonempty")
    if len(set(v)) != len(v):
        raise ParameterError(f"duplicate indices in v={v}")
    if v[0] < 0 or v[-1] >= d:
        raise ParameterError(f"v={v} out of range for d={d} inputs")
    return v


@dataclass
class PickFreezeDesign:
    """p x N replicated sample; replicates share X_v within each block."""

    v: tuple
    p: int
    N: int
    Y: np.ndarray  # (p, N, k); None until evaluated
    X: np.ndarray  # (p, N, d)
    input_names: list
    seed: str = ""

    @property
    def k(self):
        return self.Y.shape[2]


@dataclass
class CvmDesign:
    """Pick-and-Freeze pair (Z1, Z2) plus an independent sample W."""

    v: tuple
    N: int
    Z1: np.ndarray  # (N, k)
    Z2: np.ndarray  # (N, k)
    W: np.ndarray  # (N, k)
    X1: np.ndarray = None
    X2: np.ndarray = None
    XW: np.ndarray = None
    input_names: list = field(default_factory=list)
    seed: str = ""

    @property
    def k(self):
        return self.W.shape[1]


def draw_pickfreeze_inputs(inputs: InputModel, v, p, N, stream: Stream):
    """Input matrices (p, N, d): frozen coordinates drawn once per block
    and copied across replicates, all others drawn per replicate."""
    d = len(inputs)
    v = _normalize_v(v, d)
    if p < 2:
        raise ParameterError(f"replicate count p must be >= 2, got {p}")
    if N < 1:
        raise ParameterError(f"block count N must be >= 1, got {N}")
    # replicate identity lives in the purpose tag; the caller's
    # replicate_index/block_index fields stay untouched, so callers may use
    # them to label independent runs
    frozen = {
        i: inputs.dists[i].sample(N, stream.sub("frozen").child(input_index=i))
        for i in v
    }
    X = np.empty((p, N, d), dtype=float)
    for r in range(p):
        for i in range(d):
            if i in frozen:
                X[r, :, i] = frozen[i]
            else:
                X[r, :, i] = inputs.dists[i].sample(
                    N, stream.sub(f"replicate-{r}").child(input_index=i)
                )
    return v, X


def draw_w_inputs(inputs: InputModel, N, stream: Stream):
    """Independent (N, d) sample on the disjoint 'w' stream."""
    return np.column_stack(
        [
            dist.sample(N, stream.sub("w").child(input_index=i))
            for i, dist in enumerate(inputs.dists)
        ]
    )


def build_pickfreeze(
    model: Model,
    inputs: InputModel,
    v,
    p: int,
    N: int,
    stream: Stream,
    threads=None,
) -> PickFreezeDesign:
    """Draw and evaluate the p-replicate Pick-and-Freeze design.

    Exactly p*N model evaluations; N*|v| + p*N*(d-|v|) input draws.
    """
    v, X = draw_pickfreeze_inputs(inputs, v, p, N, stream)
    Y = np.empty((p, N, model.output_dim), dtype=float)
    for r in range(p):
        Y[r] = evaluate_model(model, X[r], threads=threads, replicate=r + 1)
    return PickFreezeDesign(
        v=v, p=p, N=N, Y=Y, X=X, input_names=list(inputs.names), seed=stream.label()
    )


def build_cvm_design(
    model: Model,
    inputs: InputModel,
    v,
    N: int,
    stream: Stream,
    threads=None,
) -> CvmDesign:
    """Pick-and-Freeze pair plus an independent W sample; 3N evaluations."""
    pf = build_pickfreeze(model, inputs, v, 2, N, stream, threads=threads)
    XW = draw_w_inputs(inputs, N, stream)
    W = evaluate_model(model, XW, threads=threads)
    return CvmDesign(
        v=pf.v,
        N=N,
        Z1=pf.Y[0],
        Z2=pf.Y[1],
        W=W,
        X1=pf.X[0],
        X2=pf.X[1],
        XW=XW,
        input_names=list(inputs.names),
        seed=stream.label(),
    )


def unevaluated_pickfreeze(inputs: InputModel, v, p, N, stream: Stream):
    """Design shell with inputs drawn but no outputs, for external models."""
    v, X = draw_pickfreeze_inputs(inputs, v, p, N, stream)
    return PickFreezeDesign(
        v=v, p=p, N=N, Y=None, X=X, input_names=list(inputs.names),
        seed=stream.label(),
    )


def unevaluated_cvm(inputs: InputModel, v, N, stream: Stream):
    """CvM design shell with inputs drawn but no outputs."""
    v, X = draw_pickfreeze_inputs(inputs, v, 2, N, stream)
    XW = draw_w_inputs(inputs, N, stream)
    return CvmDesign(
        v=v, N=N, Z1=None, Z2=None, W=None,
        X1=X[0], X2=X[1], XW=XW,
        input_names=list(inputs.names), seed=stream.label(),
    )


# ---------------------------------------------------------------------------
# CSV exchange (design export / output import for external models)
# ---------------------------------------------------------------------------

def _fmt(x: float) -> str:
    # repr of a Python float is the shortest round-trip decimal form
    return repr(float(x))


def design_rows(design):
    """Yield (block, replicate, role, input_vector) rows, 1-based keys."""
    if isinstance(design, PickFreezeDesign):
        for r in range(design.p):
            for j in range(design.N):
                yield j + 1, r + 1, "pf", design.X[r, j]
    elif isinstance(design, CvmDesign):
        for r, X in ((1, design.X1), (2, design.X2)):
            for j in range(design.N):
                yield j + 1, r, "pf", X[j]
        for j in range(design.N):
            yield j + 1, 1, "w", design.XW[j]
    else:
        raise TypeError(f"unsupported design type {type(design).__name__}")


def write_design_csv(design, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["block", "replicate", "role"] + list(design.input_names))
        for block, rep, role, x in design_rows(design):
            writer.writerow([block, rep, role] + [_fmt(xi) for xi in x])


def write_output_csv(path, rows, k):
    """Write evaluated outputs: rows of ((block, replicate, role), y)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["block", "replicate", "role"] + [f"y{c + 1}" for c in range(k)]
        )
        for (block, rep, role), y in rows:
            writer.writerow([block, rep, role] + [_fmt(yi) for yi in np.atleast_1d(y)])


def read_design_csv(path):
    """Parse a design CSV; returns (input_names, list of keyed rows)."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        names = header[3:]
        rows = []
        for rec in reader:
            key = (int(rec[0]), int(rec[1]), rec[2])
            rows.append((key, np.array([float(c) for c in rec[3:]])))
    return names, rows
