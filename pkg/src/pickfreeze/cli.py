"""Command-line front end.

Subcommands: ``estimate`` (run designs and estimators from a JSON config),
``oracle`` (print closed-form index values for the builtin models),
``gca`` (run the decision-tree case study), ``design`` (emit design CSVs
without evaluating) and ``ingest`` (attach externally produced outputs and
estimate).  Exit codes: 0 success, 2 config error, 3 model failure,
4 numeric error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import dataclass, field

import jsonschema

from . import analytic
from .design import (
    Model,
    build_cvm_design,
    build_pickfreeze,
    unevaluated_cvm,
    unevaluated_pickfreeze,
    write_design_csv,
)
from .distributions import InputModel, dist_from_dict
from .errors import (
    ConfigError,
    ModelEvalError,
    NoSolutionError,
    ParameterError,
    PickFreezeError,
    ProtocolError,
    QuadratureError,
)
from .external import external_model_roundtrip, read_output_csv, attach_outputs
from .gca import GcaStudyConfig, gca_model, run_gca_study
from .estimators import (
    beta_index,
    cvm_estimate,
    cvm_normalize,
    hsobol,
    multivariate_sobol,
    sobol_classic,
)
from .streams import Stream

METHODS = ("sobol", "hsobol", "cvm", "cvm_normalized", "beta", "multivariate_sobol")

CONFIG_SCHEMA = {
    "type": "object",
    "required": ["seed", "N", "method", "targets", "model"],
    "additionalProperties": False,
    "properties": {
        "seed": {"type": "integer"},
        "N": {"type": "integer", "minimum": 2},
        "method": {"enum": list(METHODS)},
        "p": {"type": "integer", "minimum": 2, "maximum": 12},
        "ratio": {"type": "boolean"},
        "continuous_scalar": {"type": "boolean"},
        "partitions": {"type": "integer", "minimum": 2},
        "n_boot": {"type": "integer", "minimum": 0},
        "se": {"enum": ["bootstrap", "plugin", "none"]},
        "targets": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "array",
                "minItems": 1,
                "items": {"type": "integer", "minimum": 1},
            },
        },
        "inputs": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["name", "dist"],
                "additionalProperties": False,
                "properties": {
                    "name": {"type": "string", "minLength": 1},
                    "dist": {
                        "type": "object",
                        "required": ["kind"],
                        "properties": {"kind": {"type": "string"}},
                    },
                },
            },
        },
        "model": {
            "type": "object",
            "minProperties": 1,
            "maxProperties": 1,
            "additionalProperties": False,
            "properties": {
                "builtin": {
                    "type": "object",
                    "required": ["name"],
                    "properties": {
                        "name": {"enum": ["exp", "toy", "gca", "sum"]},
                        "family": {"enum": list(analytic.FAMILIES)},
                        "prob": {"type": "number"},
                        "alpha": {"type": "number"},
                    },
                },
                "external": {
                    "type": "object",
                    "required": ["command"],
                    "additionalProperties": False,
                    "properties": {
                        "command": {
                            "type": "array",
                            "minItems": 1,
                            "items": {"type": "string"},
                        },
                        "workdir": {"type": "string"},
                        "timeout": {"type": "number", "exclusiveMinimum": 0},
                        "reentrant": {"type": "boolean"},
                    },
                },
            },
        },
        "out_dir": {"type": "string"},
    },
}


@dataclass
class StudyConfig:
    seed: int
    N: int
    method: str
    targets: list  # 0-based tuples
    inputs: InputModel
    model: Model | None
    external: dict | None
    p: int = 2
    ratio: bool = False
    continuous_scalar: bool = False
    partitions: int = 20
    n_boot: int = 500
    se: str = "bootstrap"
    out_dir: str = "."
    threads: int | None = None

    def target_tag(self, target) -> str:
        return "v" + "-".join(str(i + 1) for i in target)


def _builtin(spec: dict):
    """Builtin model plus its canonical inputs (None when inputs must come
    from the config)."""
    name = spec["name"]
    if name == "exp":
        em = analytic.ExpModel()
        return em.model(), em.input_model()
    if name == "toy":
        for key in ("family", "prob", "alpha"):
            if key not in spec:
                raise ConfigError(f"model.builtin.{key} is required for 'toy'")
        tm = analytic.ToyModel(
            alpha=spec["alpha"], prob=spec["prob"], x2_family=spec["family"]
        )
        return tm.model(), tm.input_model()
    if name == "gca":
        return gca_model(), GcaStudyConfig().input_model()
    # 'sum': generic additive model over the configured inputs
    return Model(input_names=[], output_dim=1,
                 fn=lambda X: X.sum(axis=1), name="sum"), None


def load_config(path, seed=None, out_dir=None, threads=None) -> StudyConfig:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    try:
        jsonschema.validate(raw, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"config {path}: {exc.json_path}: {exc.message}") from exc

    inputs = None
    if "inputs" in raw:
        try:
            inputs = InputModel.of(
                *((spec["name"], dist_from_dict(spec["dist"])) for spec in raw["inputs"])
            )
        except ParameterError as exc:
            raise ConfigError(f"config {path}: inputs: {exc}") from exc

    model = external = None
    if "builtin" in raw["model"]:
        try:
            model, canonical = _builtin(raw["model"]["builtin"])
        except ParameterError as exc:
            raise ConfigError(f"config {path}: model.builtin: {exc}") from exc
        if inputs is None:
            inputs = canonical
        if model.name == "sum" and inputs is not None:
            model.input_names = list(inputs.names)
    else:
        external = dict(raw["model"]["external"])
    if inputs is None:
        raise ConfigError(f"config {path}: 'inputs' is required for this model")

    d = len(inputs)
    targets = []
    for t in raw["targets"]:
        if len(set(t)) != len(t):
            raise ConfigError(f"config {path}: duplicate index in target {t}")
        if max(t) > d:
            raise ConfigError(
                f"config {path}: target {t} exceeds the {d} configured inputs"
            )
        targets.append(tuple(sorted(i - 1 for i in t)))

    method = raw["method"]
    if method == "beta":
        if any(len(t) != 1 for t in targets):
            raise ConfigError("beta accepts singleton targets only")
        if external is not None:
            raise ConfigError("beta requires a builtin model")

    return StudyConfig(
        seed=seed if seed is not None else raw["seed"],
        N=raw["N"],
        method=method,
        targets=targets,
        inputs=inputs,
        model=model,
        external=external,
        p=raw.get("p", 2),
        ratio=raw.get("ratio", False),
        continuous_scalar=raw.get("continuous_scalar", False),
        partitions=raw.get("partitions", 20),
        n_boot=raw.get("n_boot", 500),
        se=raw.get("se", "bootstrap"),
        out_dir=out_dir if out_dir is not None else raw.get("out_dir", "."),
        threads=threads,
    )


def _needs_cvm(method: str) -> bool:
    return method in ("cvm", "cvm_normalized")


def _design_stream(cfg: StudyConfig, tag: str) -> Stream:
    return Stream(master_seed=cfg.seed, purpose=f"target[{tag}]")


def _build_design(cfg: StudyConfig, target, evaluate=True):
    tag = cfg.target_tag(target)
    stream = _design_stream(cfg, tag)
    p = cfg.p if cfg.method == "hsobol" else 2
    if cfg.external is not None:
        if _needs_cvm(cfg.method):
            shell = unevaluated_cvm(cfg.inputs, target, cfg.N, stream)
        else:
            shell = unevaluated_pickfreeze(cfg.inputs, target, p, cfg.N, stream)
        if not evaluate:
            return shell
        return external_model_roundtrip(
            shell,
            cfg.external["command"],
            workdir=cfg.external.get("workdir"),
            timeout=cfg.external.get("timeout"),
        )
    if not evaluate:
        if _needs_cvm(cfg.method):
            return unevaluated_cvm(cfg.inputs, target, cfg.N, stream)
        return unevaluated_pickfreeze(cfg.inputs, target, p, cfg.N, stream)
    if _needs_cvm(cfg.method):
        return build_cvm_design(
            cfg.model, cfg.inputs, target, cfg.N, stream, threads=cfg.threads
        )
    return build_pickfreeze(
        cfg.model, cfg.inputs, target, p, cfg.N, stream, threads=cfg.threads
    )


def _estimate_target(cfg: StudyConfig, target, design=None):
    if cfg.method == "beta":
        return beta_index(
            cfg.inputs,
            cfg.model,
            target[0],
            cfg.N,
            partitions=cfg.partitions,
            stream=_design_stream(cfg, cfg.target_tag(target)),
            n_boot=cfg.n_boot if cfg.se == "bootstrap" else 0,
            threads=cfg.threads,
        )
    if design is None:
        design = _build_design(cfg, target)
    if cfg.method == "sobol":
        return sobol_classic(design, ratio=cfg.ratio, n_boot=cfg.n_boot)
    if cfg.method == "hsobol":
        return hsobol(design)
    if cfg.method == "multivariate_sobol":
        return multivariate_sobol(design, n_boot=cfg.n_boot)
    est = cvm_estimate(design, se=cfg.se, n_boot=cfg.n_boot)
    if cfg.method == "cvm_normalized":
        est = cvm_normalize(est, continuous_scalar=cfg.continuous_scalar)
    return est


def _write_reports(cfg: StudyConfig, results):
    os.makedirs(cfg.out_dir, exist_ok=True)
    report = {
        "method": cfg.method,
        "seed": cfg.seed,
        "N": cfg.N,
        "estimates": [
            {"target": [i + 1 for i in target], "estimate": est.to_dict()}
            for target, est in results
        ],
    }
    json_path = os.path.join(cfg.out_dir, "report.json")
    with open(json_path, "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    csv_path = os.path.join(cfg.out_dir, "estimates.csv")
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["target", "method", "value", "std_error", "ci_low", "ci_high", "N"]
        )
        for target, est in results:
            writer.writerow(
                [
                    cfg.target_tag(target),
                    est.method,
                    repr(est.value),
                    repr(est.std_error) if est.std_error is not None else "",
                    repr(est.ci_low) if est.ci_low is not None else "",
                    repr(est.ci_high) if est.ci_high is not None else "",
                    est.N,
                ]
            )
    return json_path, csv_path


def cmd_estimate(args) -> int:
    cfg = load_config(args.config, args.seed, args.out_dir, args.threads)
    results = []
    for target in cfg.targets:
        est = _estimate_target(cfg, target)
        results.append((target, est))
        se = f" +- {est.std_error:.6g}" if est.std_error is not None else ""
        print(f"{cfg.target_tag(target)} {est.method}: {est.value:.6g}{se}")
    json_path, csv_path = _write_reports(cfg, results)
    print(f"wrote {json_path} and {csv_path}")
    return 0


def cmd_design(args) -> int:
    cfg = load_config(args.config, args.seed, args.out_dir, args.threads)
    os.makedirs(cfg.out_dir, exist_ok=True)
    for target in cfg.targets:
        shell = _build_design(cfg, target, evaluate=False)
        path = os.path.join(cfg.out_dir, f"design_{cfg.target_tag(target)}.csv")
        write_design_csv(shell, path)
        print(f"wrote {path}")
    return 0


def cmd_ingest(args) -> int:
    cfg = load_config(args.config, args.seed, args.out_dir, args.threads)
    results = []
    for target in cfg.targets:
        tag = cfg.target_tag(target)
        out_path = os.path.join(args.outputs_dir, f"output_{tag}.csv")
        if not os.path.exists(out_path):
            raise ProtocolError(f"missing output file {out_path}")
        k, outputs = read_output_csv(out_path)
        shell = _build_design(cfg, target, evaluate=False)
        design = attach_outputs(shell, outputs, k)
        est = _estimate_target(cfg, target, design=design)
        results.append((target, est))
        print(f"{tag} {est.method}: {est.value:.6g}")
    json_path, csv_path = _write_reports(cfg, results)
    print(f"wrote {json_path} and {csv_path}")
    return 0


def cmd_oracle(args) -> int:
    if args.model == "exp":
        print(f"D1 = {analytic.exp_cvm_closed(1):.4f}")
        print(f"D2 = {analytic.exp_cvm_closed(2):.4f}")
        print(f"S1 = {analytic.exp_sobol_closed(1):.4f}")
        print(f"S2 = {analytic.exp_sobol_closed(2):.4f}")
        return 0
    m = analytic.ToyModel(alpha=args.alpha, prob=args.prob, x2_family=args.family)
    print(f"D1 = {analytic.toy_cvm_closed(m, 1):.6f}")
    print(f"D2 = {analytic.toy_cvm_closed(m, 2):.6f}")
    if args.q is not None:
        print(f"H1_{args.q} = {analytic.toy_hq_closed(m, 1, args.q):.6g}")
        print(f"H2_{args.q} = {analytic.toy_hq_closed(m, 2, args.q):.6g}")
    if args.dump_grid:
        analytic.dump_toy_oracle_csv(args.dump_grid)
        print(f"wrote {args.dump_grid}")
    return 0


def cmd_gca(args) -> int:
    cfg = GcaStudyConfig(
        N=args.n,
        seed=args.seed,
        index_n=args.index_n,
        partitions=args.partitions,
        gc_alpha=args.gc_alpha,
        degenerate_at_base=args.degenerate,
        threads=args.threads,
    )
    report = run_gca_study(cfg)
    os.makedirs(args.out_dir, exist_ok=True)
    json_path = os.path.join(args.out_dir, "gca_report.json")
    csv_path = os.path.join(args.out_dir, "gca_indices.csv")
    report.to_json(json_path)
    report.to_csv(csv_path)
    for strategy, (value, se) in report.expected.items():
        print(f"E[Y_{strategy}] = {value:.4f} +- {se:.4f}")
    print(f"best strategy: {report.best}")
    for method, ranking in report.rankings.items():
        print(f"ranking {method}: {ranking}")
    print(f"wrote {json_path} and {csv_path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pickfreeze",
        description="Pick-and-Freeze global sensitivity analysis",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config_flags(sp):
        sp.add_argument("--config", required=True, help="JSON study config")
        sp.add_argument("--seed", type=int, default=None, help="override config seed")
        sp.add_argument("--threads", type=int, default=os.cpu_count(),
                        help="evaluation threads (results are identical)")
        sp.add_argument("--out-dir", default=None, help="override output directory")

    sp = sub.add_parser("estimate", help="run designs and estimators")
    add_config_flags(sp)
    sp.set_defaults(fn=cmd_estimate)

    sp = sub.add_parser("design", help="emit design CSVs without evaluating")
    add_config_flags(sp)
    sp.set_defaults(fn=cmd_design)

    sp = sub.add_parser("ingest", help="attach external outputs and estimate")
    add_config_flags(sp)
    sp.add_argument("--outputs-dir", required=True,
                    help="directory holding output_<target>.csv files")
    sp.set_defaults(fn=cmd_ingest)

    sp = sub.add_parser("oracle", help="print closed-form index values")
    sp.add_argument("model", choices=["exp", "toy"])
    sp.add_argument("--family", choices=list(analytic.FAMILIES), default="gaussian")
    sp.add_argument("--prob", type=float, default=0.3)
    sp.add_argument("--alpha", type=float, default=1.0)
    sp.add_argument("--q", type=int, default=None, help="also print order-q indices")
    sp.add_argument("--dump-grid", default=None,
                    help="write the oracle curve grid as CSV")
    sp.set_defaults(fn=cmd_oracle)

    sp = sub.add_parser("gca", help="run the decision-tree case study")
    sp.add_argument("--n", type=int, default=100_000)
    sp.add_argument("--index-n", type=int, default=10_000)
    sp.add_argument("--seed", type=int, default=1234)
    sp.add_argument("--partitions", type=int, default=20)
    sp.add_argument("--gc-alpha", type=float, default=4.179)
    sp.add_argument("--degenerate", action="store_true",
                    help="pin all random inputs at their base values")
    sp.add_argument("--threads", type=int, default=os.cpu_count())
    sp.add_argument("--out-dir", default=".")
    sp.set_defaults(fn=cmd_gca)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (ModelEvalError, ProtocolError) as exc:
        print(f"model error: {exc}", file=sys.stderr)
        return 3
    except (QuadratureError, NoSolutionError, PickFreezeError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
