"""Giant-cell-arteritis management case study.

Four clinical strategies (treat none / biopsy and treat positives / biopsy
and treat all / treat all) are scored by expected utility over eleven
parameters; seven of them are uncertain and modeled as truncated-Beta
mixtures.  The study estimates the four expected utilities, ranks the
strategies, and compares three sensitivity indices on the 4-vector output.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from .design import Model, build_cvm_design, build_pickfreeze, evaluate_model
from .distributions import Distribution, InputModel, TruncatedBetaMixture
from .errors import DegenerateOutputError, ParameterError
from .estimators import Estimate, beta_index, cvm_estimate, multivariate_sobol
from .streams import Stream

STRATEGIES = ("A", "B", "C", "D")

# Uncertain inputs, in table row order; positions 1..7 in ranking strings.
RANDOM_INPUTS = (
    # name, alpha, beta, min, max, base value
    ("gc", 4.179, 11.011, 0.05, 0.5, 0.3),
    ("pc", 2.647, 10.589, 0.05, 0.5, 0.2),
    ("e", 27.787, 3.087, 0.8, 1.0, 0.9),
    ("sens", 7.554, 1.547, 0.6, 1.0, 0.83),
    ("du_gc", 27.454, 6.864, 0.3, 0.9, 0.8),
    ("du_p", 4.555, 52.380, 0.03, 0.2, 0.08),
    ("du_pc", 15.291, 35.680, 0.2, 0.9, 0.3),
)

FIXED = {"g": 0.8, "du_s": 0.12, "du_b": 0.005, "du_dx": 0.025}

# Mean-consistent alternative for the gc shape parameter: the printed
# 4.179 gives mean 0.275 rather than the base value 0.3, while 4.719
# (a likely digit transposition) fits exactly.  The printed value is the
# default; the alternative is available through GcaStudyConfig.
GC_ALPHA_PRINTED = 4.179
GC_ALPHA_MEAN_FIT = 4.719


@dataclass(frozen=True)
class GcaParams:
    """One full parameter vector; probabilities and disutilities in [0,1]."""

    g: float
    gc: float
    pc: float
    e: float
    sens: float
    du_gc: float
    du_p: float
    du_pc: float
    du_s: float
    du_b: float
    du_dx: float

    def __post_init__(self):
        for name, value in self.__dict__.items():
            if not 0.0 <= value <= 1.0:
                raise ParameterError(f"{name}={value} outside [0,1]")

    @classmethod
    def at_base(cls) -> "GcaParams":
        base = {name: b for name, *_, b in RANDOM_INPUTS}
        return cls(**base, **FIXED)


def strategy_utilities(gc, pc, e, sens, du_gc, du_p, du_pc,
                       g=FIXED["g"], du_s=FIXED["du_s"],
                       du_b=FIXED["du_b"], du_dx=FIXED["du_dx"]):
    """Vectorized expected utilities (U_A, U_B, U_C, U_D).

    Treated patients carry the therapy disutility plus the expected
    iatrogenic one; treatment failures (rate 1-e) among GCA patients still
    risk the major complication; the no-biopsy strategies carry the
    diagnostic-uncertainty disutility and the biopsy strategies the biopsy
    one.
    """
    treated = du_p + pc * du_pc
    failed = (1.0 - e) * gc * du_gc
    u_a = (
        g * (gc * (1 - du_s - du_gc - du_dx) + (1 - gc) * (1 - du_s - du_dx))
        + (1 - g) * (1 - du_dx)
    )
    u_b = (
        g * sens * (1 - du_b - du_s - treated - failed)
        + g * (1 - sens) * (1 - du_b - du_s - gc * du_gc)
        + (1 - g) * (1 - du_b)
    )
    u_c = g * (1 - du_b - du_s - treated - failed) + (1 - g) * (1 - du_b - treated)
    u_d = g * (1 - du_s - treated - du_dx - failed) + (1 - g) * (1 - treated - du_dx)
    return np.stack([u_a, u_b, u_c, u_d], axis=-1)


def gca_utilities(theta: GcaParams) -> np.ndarray:
    """Expected utilities of the four strategies at one parameter vector."""
    return strategy_utilities(
        theta.gc, theta.pc, theta.e, theta.sens,
        theta.du_gc, theta.du_p, theta.du_pc,
        g=theta.g, du_s=theta.du_s, du_b=theta.du_b, du_dx=theta.du_dx,
    )


@dataclass(frozen=True)
class _PointMass(Distribution):
    """Degenerate input used when the study is run at base values."""

    value: float
    kind = "point_mass"

    def sample(self, n, stream):
        return np.full(n, self.value)

    def cdf(self, t):
        return (np.asarray(t, dtype=float) >= self.value).astype(float)

    def mean(self):
        return self.value

    def variance(self):
        return 0.0


@dataclass
class GcaStudyConfig:
    """Study knobs; defaults reproduce the published setting."""

    N: int = 100_000
    seed: int = 1234
    index_n: int = 10_000
    partitions: int = 20
    gc_alpha: float = GC_ALPHA_PRINTED
    degenerate_at_base: bool = False
    threads: int | None = None

    def input_model(self) -> InputModel:
        pairs = []
        for name, alpha, beta, m, M, base in RANDOM_INPUTS:
            if self.degenerate_at_base:
                pairs.append((name, _PointMass(base)))
                continue
            if name == "gc":
                alpha = self.gc_alpha
            pairs.append((name, TruncatedBetaMixture(alpha, beta, m, M)))
        return InputModel.of(*pairs)


def gca_model() -> Model:
    return Model(
        input_names=[row[0] for row in RANDOM_INPUTS],
        output_dim=4,
        fn=lambda X: strategy_utilities(*(X[:, i] for i in range(7))),
        name="gca",
    )


def expected_utilities_oracle(cfg: GcaStudyConfig) -> np.ndarray:
    """Deterministic E[Y_s]: every random parameter enters each utility
    affinely and products mix distinct independent inputs, so the
    expectation equals the utility at the input means."""
    means = [dist.mean() for dist in cfg.input_model().dists]
    return strategy_utilities(*means)


def ranking_string(values) -> str:
    """Input positions (1-based, table row order) by decreasing index."""
    order = np.argsort(-np.asarray(values, dtype=float), kind="stable")
    return "".join(str(i + 1) for i in order)


@dataclass
class GcaStudyReport:
    expected: dict  # strategy -> (value, se)
    best: str
    indices: dict  # input name -> {method: Estimate}
    rankings: dict  # method -> ranking string
    N: int
    index_n: int
    seed: int

    def to_json_dict(self) -> dict:
        return {
            "expected_utilities": {
                s: {"value": v, "se": se} for s, (v, se) in self.expected.items()
            },
            "best": self.best,
            "indices": {
                name: {
                    method: {"value": est.value, "se": est.std_error}
                    for method, est in per.items()
                }
                for name, per in self.indices.items()
            },
            "rankings": dict(self.rankings),
            "N": self.N,
            "index_n": self.index_n,
            "seed": self.seed,
        }

    def to_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                ["position", "input", "cvm", "cvm_se",
                 "multivariate_sobol", "multivariate_sobol_se", "beta", "beta_se"]
            )
            for pos, (name, per) in enumerate(self.indices.items(), start=1):
                row = [pos, name]
                for method in ("cvm", "multivariate_sobol", "beta"):
                    est = per[method]
                    row += [repr(est.value), repr(est.std_error)]
                writer.writerow(row)


def run_gca_study(cfg: GcaStudyConfig) -> GcaStudyReport:
    """Monte Carlo expected utilities plus the three-index comparison."""
    if cfg.N < 1000:
        raise ParameterError(f"study needs N >= 1000, got {cfg.N}")
    inputs = cfg.input_model()
    model = gca_model()
    root = Stream(master_seed=cfg.seed, purpose="gca")

    X = inputs.sample_matrix(cfg.N, root.sub("means"))
    Y = evaluate_model(model, X, threads=cfg.threads)
    means = Y.mean(axis=0)
    ses = Y.std(axis=0, ddof=1) / np.sqrt(cfg.N)
    expected = {
        s: (float(m), float(se)) for s, m, se in zip(STRATEGIES, means, ses)
    }
    best = STRATEGIES[int(np.argmax(means))]

    indices: dict = {}
    for v, (name, *_rest) in enumerate(RANDOM_INPUTS):
        per: dict = {}
        cvm_design = build_cvm_design(
            model, inputs, v, cfg.index_n, root.sub(f"cvm[{name}]"),
            threads=cfg.threads,
        )
        per["cvm"] = cvm_estimate(cvm_design, se="plugin")

        pf = build_pickfreeze(
            model, inputs, v, 2, cfg.N, root.sub(f"sobol[{name}]"),
            threads=cfg.threads,
        )
        try:
            per["multivariate_sobol"] = multivariate_sobol(pf, n_boot=200)
        except DegenerateOutputError:
            per["multivariate_sobol"] = Estimate(
                value=0.0, std_error=0.0, ci_low=0.0, ci_high=0.0,
                N=cfg.N, method="multivariate_sobol", ci_method="none",
                seed=pf.seed,
            )

        per["beta"] = beta_index(
            inputs, model, v, cfg.index_n, partitions=cfg.partitions,
            stream=root.sub(f"beta[{name}]"), threads=cfg.threads,
        )
        indices[name] = per

    rankings = {
        "cvm": ranking_string([indices[n]["cvm"].value for n, *_ in RANDOM_INPUTS]),
        "sobol": ranking_string(
            [indices[n]["multivariate_sobol"].value for n, *_ in RANDOM_INPUTS]
        ),
        "beta": ranking_string([indices[n]["beta"].value for n, *_ in RANDOM_INPUTS]),
    }
    return GcaStudyReport(
        expected=expected,
        best=best,
        indices=indices,
        rankings=rankings,
        N=cfg.N,
        index_n=cfg.index_n,
        seed=cfg.seed,
    )
