#!/usr/bin/env python3
"""Replication study of the estimators' asymptotic variances.

Repeats each estimator on independent designs and compares the empirical
variance of sqrt(N) * (estimate - truth) against the plug-in variance, and
reports the dispersion of the standardized errors (1.0 when the CLT and
the plug-in both hold).
"""

import argparse

import numpy as np

from pickfreeze import (
    ExpModel,
    Gaussian,
    InputModel,
    Model,
    Stream,
    ToyModel,
    build_cvm_design,
    build_pickfreeze,
    cvm_estimate,
    cvm_variance_plugin,
    exp_cvm_closed,
    hsobol,
    hsobol_variance,
    toy_hq_closed,
)


def replicate(build, estimate, truth, reps, n, root):
    values = np.empty(reps)
    plugins = np.empty(reps)
    for r in range(reps):
        design = build(root.child(replicate_index=r))
        values[r], plugins[r] = estimate(design)
    scaled = np.sqrt(n) * (values - truth)
    z = scaled / np.sqrt(plugins)
    return {
        "empirical_var": float(n * np.var(values, ddof=1)),
        "mean_plugin": float(plugins.mean()),
        "standardized_var": float(np.var(z, ddof=1)),
        "mean_z": float(z.mean()),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--reps", type=int, default=1000)
    ap.add_argument("--n", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=4242)
    args = ap.parse_args()
    reps, n = args.reps, args.n

    em = ExpModel()
    res = replicate(
        lambda s: build_cvm_design(em.model(), em.input_model(), 0, n, s),
        lambda d: (cvm_estimate(d, se="none").value, cvm_variance_plugin(d)),
        exp_cvm_closed(1),
        reps, n, Stream(args.seed, "cvm"),
    )
    print("cvm (log-normal model, v=1):", res)

    inputs = InputModel.of(("x1", Gaussian(0, 1)), ("x2", Gaussian(0, 1)))
    passthrough = Model(input_names=["x1", "x2"], output_dim=1, fn=lambda X: X[:, 0])
    res = replicate(
        lambda s: build_pickfreeze(passthrough, inputs, 0, 2, n, s),
        lambda d: (hsobol(d).value, hsobol_variance(d)),
        1.0,
        reps, n, Stream(args.seed, "h2"),
    )
    print("hsobol p=2 (Gaussian passthrough):", res)

    toy = ToyModel(alpha=2.0, prob=0.3, x2_family="gaussian")
    res = replicate(
        lambda s: build_pickfreeze(toy.model(), toy.input_model(), 0, 3, n, s),
        lambda d: (hsobol(d).value, hsobol_variance(d)),
        toy_hq_closed(toy, 1, 3),
        reps, n, Stream(args.seed, "h3"),
    )
    print("hsobol p=3 (Gaussian linear model):", res)


if __name__ == "__main__":
    main()
