"""Sensitivity-index estimators on Pick-and-Freeze designs.

Implements the classical Sobol numerator/ratio, the order-p generalization
built from replicate-symmetric products with its delta-method variance, the
Cramer-von-Mises index with bootstrap and plug-in uncertainty, and the two
comparison indices used by the case study (trace-aggregated multivariate
Sobol and the Kolmogorov-distance beta index).

Multivariate outputs are ordered by componentwise <= throughout; ties are
deterministic because all indicators are non-strict.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np
from scipy.special import ndtri

from .design import CvmDesign, Model, PickFreezeDesign, evaluate_model
from .distributions import InputModel
from .errors import (
    DegenerateOutputError,
    InsufficientSampleError,
    OrderLimitError,
    ParameterError,
    PartitionError,
)
from .streams import Stream

Z975 = float(ndtri(0.975))
MAX_ORDER = 12
DEFAULT_BOOT = 500


@dataclass
class Estimate:
    """Point value with uncertainty and provenance metadata."""

    value: float
    std_error: float | None
    ci_low: float | None
    ci_high: float | None
    N: int
    method: str
    ci_method: str = "none"
    p: int | None = None
    seed: str | None = None

    def __post_init__(self):
        # a percentile CI can, rarely, exclude the point estimate; widen it
        if self.ci_low is not None and self.ci_low > self.value:
            self.ci_low = self.value
        if self.ci_high is not None and self.ci_high < self.value:
            self.ci_high = self.value

    def to_dict(self) -> dict:
        out = {
            "method": self.method,
            "value": self.value,
            "std_error": self.std_error,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
            "N": self.N,
            "seed": self.seed,
            "ci_method": self.ci_method,
        }
        if self.p is not None:
            out["p"] = self.p
        return out


@dataclass
class SymmetricProducts:
    """Block-averaged replicate-symmetric products, orders 0..p."""

    p: int
    Pbar: np.ndarray  # Pbar[0] == 1 by the empty-product convention


def _boot_stream(design, stream: Stream | None) -> Stream:
    if stream is not None:
        return stream
    return Stream(master_seed=0, purpose=f"bootstrap|{design.seed}")


def _block_bootstrap(gen, n_boot, N, statistic, cells=2 * 10**7):
    """Resample block indices in batches; batching does not change the
    draw sequence, so results are independent of the batch size."""
    boots = np.empty(n_boot)
    batch = max(1, cells // max(1, N))
    done = 0
    while done < n_boot:
        b = min(batch, n_boot - done)
        idx = gen.integers(0, N, size=(b, N))
        boots[done : done + b] = statistic(idx)
        done += b
    return boots


def _block_bootstrap_weighted(gen, n_boot, N, statistic, cells=2 * 10**7):
    """Block bootstrap through per-block multiplicity weights.

    Resampled block means become weight/data matrix products, which keeps
    large-N bootstraps cheap.  statistic receives a (batch, N) float
    matrix of multiplicities summing to N per row.
    """
    boots = np.empty(n_boot)
    batch = max(1, cells // max(1, N))
    done = 0
    while done < n_boot:
        b = min(batch, n_boot - done)
        idx = gen.integers(0, N, size=(b, N))
        weights = np.empty((b, N))
        for row in range(b):
            weights[row] = np.bincount(idx[row], minlength=N)
        boots[done : done + b] = statistic(weights)
        done += b
    return boots


def _sobol_moments(y1, y2):
    """Per-block products, sums and square sums; resampled means of these
    three reproduce the Pick-and-Freeze numerator and pooled variance."""
    return y1 * y2, y1 + y2, y1 * y1 + y2 * y2


def _percentile_ci(values):
    lo, hi = np.percentile(values, [2.5, 97.5])
    return float(lo), float(hi)


def dominance_count(points, queries, chunk_cells: int = 4 * 10**7):
    """For each query q, count points x with x <= q componentwise."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    queries = np.atleast_2d(np.asarray(queries, dtype=float))
    if points.shape[0] == 1 and points.shape[1] > 1 and queries.shape[1] == 1:
        points = points.T
    k = points.shape[1]
    if k == 1:
        sorted_pts = np.sort(points[:, 0])
        return np.searchsorted(sorted_pts, queries[:, 0], side="right").astype(
            np.int64
        )
    out = np.empty(queries.shape[0], dtype=np.int64)
    step = max(1, chunk_cells // max(1, points.shape[0]))
    for s in range(0, queries.shape[0], step):
        q = queries[s : s + step]
        # running AND over dimensions keeps the buffers two-dimensional
        le = points[:, None, 0] <= q[None, :, 0]
        for dim in range(1, k):
            le &= points[:, None, dim] <= q[None, :, dim]
        out[s : s + step] = le.sum(axis=0)
    return out


# ---------------------------------------------------------------------------
# Classical Sobol (p = 2)
# ---------------------------------------------------------------------------

def _check_not_degenerate(den, scale):
    # a constant output leaves only summation-order noise in the variance
    if np.any(den <= (1e-12 * max(1.0, scale)) ** 2):
        raise DegenerateOutputError("pooled output variance is zero")


def _sobol_value(y1, y2, ratio):
    half_sum = 0.5 * np.mean(y1 + y2, axis=-1)
    num = np.mean(y1 * y2, axis=-1) - half_sum * half_sum
    if not ratio:
        return num
    pooled = np.concatenate([y1, y2], axis=-1)
    den = np.var(pooled, axis=-1)
    _check_not_degenerate(den, float(np.abs(pooled).max(initial=0.0)))
    return num / den


def sobol_classic(
    design: PickFreezeDesign,
    component: int = 0,
    ratio: bool = False,
    n_boot: int = DEFAULT_BOOT,
    stream: Stream | None = None,
) -> Estimate:
    """Pick-and-Freeze estimator of the Sobol numerator (or ratio).

    value = (1/N) sum Y_j Y^v_j - ((1/2N) sum (Y_j + Y^v_j))^2, with an
    option to divide by the pooled empirical variance.  Uncertainty by
    block bootstrap.
    """
    if design.p != 2:
        raise ParameterError(f"sobol_classic requires p=2, got p={design.p}")
    if design.N < 2:
        raise InsufficientSampleError(f"need N >= 2 blocks, got {design.N}")
    y1 = design.Y[0][:, component]
    y2 = design.Y[1][:, component]
    value = float(_sobol_value(y1, y2, ratio))

    se = ci_lo = ci_hi = None
    ci_method = "none"
    if n_boot:
        gen = _boot_stream(design, stream).generator()
        boots = _block_bootstrap(
            gen, n_boot, design.N, lambda idx: _sobol_value(y1[idx], y2[idx], ratio)
        )
        se = float(np.std(boots, ddof=1))
        ci_lo, ci_hi = _percentile_ci(boots)
        ci_method = "bootstrap"
    return Estimate(
        value=value,
        std_error=se,
        ci_low=ci_lo,
        ci_high=ci_hi,
        N=design.N,
        method="sobol_classic",
        ci_method=ci_method,
        seed=design.seed,
    )


# ---------------------------------------------------------------------------
# Higher-order indices via replicate-symmetric products
# ---------------------------------------------------------------------------

def _elementary_products(design: PickFreezeDesign, component: int) -> np.ndarray:
    """Per-block elementary symmetric polynomials e_l, shape (p+1, N).

    Replicates are put in canonical sorted order first so the floating
    point result is exactly invariant under replicate permutations.
    """
    p = design.p
    if not 0 < p <= MAX_ORDER:
        raise OrderLimitError(f"replicate order p={p} outside 1..{MAX_ORDER}")
    y = np.sort(design.Y[:, :, component], axis=0)
    e = np.zeros((p + 1, design.N))
    e[0] = 1.0
    for r in range(p):
        for l in range(r + 1, 0, -1):
            e[l] += e[l - 1] * y[r]
    return e


def symmetric_products(
    design: PickFreezeDesign, component: int = 0
) -> SymmetricProducts:
    """Block averages of the normalized symmetric products P_l."""
    e = _elementary_products(design, component)
    p = design.p
    scale = np.array([comb(p, l) for l in range(p + 1)], dtype=float)
    return SymmetricProducts(p=p, Pbar=e.mean(axis=1) / scale)


def hsobol(design: PickFreezeDesign, component: int = 0) -> Estimate:
    """Order-p Pick-and-Freeze estimator of the p-th conditional moment.

    Computed in the algebraically identical centered form
    (1/N) sum_j prod_i (Y^i_j - Ybar), which is exactly translation
    invariant and avoids the cancellation of the raw power sums.
    """
    p = design.p
    if p < 2:
        raise ParameterError(f"hsobol requires p >= 2, got {p}")
    if design.N < 2:
        raise InsufficientSampleError(f"need N >= 2 blocks, got {design.N}")
    y = design.Y[:, :, component]
    centered = np.sort(y - y.mean(), axis=0)
    value = float(np.prod(centered, axis=0).mean())
    sigma2 = hsobol_variance(design, component)
    se = float(np.sqrt(sigma2 / design.N))
    return Estimate(
        value=value,
        std_error=se,
        ci_low=value - Z975 * se,
        ci_high=value + Z975 * se,
        N=design.N,
        method="hsobol",
        ci_method="asymptotic",
        p=p,
        seed=design.seed,
    )


def _hsobol_gradient(p: int, mu: float, m: np.ndarray) -> np.ndarray:
    """Gradient of the power-sum combination at the empirical moments.

    b_1 carries the extra sum because the first symmetric product enters
    both as itself and through every (Pbar_1)^{p-l} factor; b_l for l >= 2
    is the plain binomial coefficient term.
    """
    b = np.zeros(p)
    b1 = (-1.0) ** (p - 1) * p * (p - 1) * mu ** (p - 1)
    for l in range(2, p):
        b1 += comb(p, l) * (-1.0) ** (p - l) * (p - l) * mu ** (p - l - 1) * m[l]
    b[0] = b1
    for l in range(2, p + 1):
        b[l - 1] = comb(p, l) * (-1.0) ** (p - l) * mu ** (p - l)
    return b


def hsobol_variance(design: PickFreezeDesign, component: int = 0) -> float:
    """Plug-in delta-method estimate of the asymptotic variance of hsobol.

    The per-block symmetric-product vector (P_1,...,P_p) satisfies a CLT
    with its own covariance matrix; the estimator is a smooth combination
    of its mean, so sigma^2 = b' C b with b the combination's gradient and
    C the covariance, both replaced by empirical counterparts.
    """
    p = design.p
    e = _elementary_products(design, component)
    scale = np.array([comb(p, l) for l in range(1, p + 1)], dtype=float)
    P = e[1:] / scale[:, None]  # (p, N)
    m = np.concatenate([[1.0], P.mean(axis=1)])  # m[l] = mean P_l, m[0]=1
    mu = m[1]
    b = _hsobol_gradient(p, mu, m)
    C = np.cov(P, ddof=0) if p > 1 else np.array([[np.var(P[0])]])
    C = np.atleast_2d(C)
    return float(max(b @ C @ b, 0.0))


# ---------------------------------------------------------------------------
# Cramer-von-Mises index
# ---------------------------------------------------------------------------

def _cvm_value_from_counts(count_both, count_1, count_2, N):
    terms = count_both / N - ((count_1 + count_2) / (2.0 * N)) ** 2
    return terms.mean(), terms


def _cvm_value(z1, z2, w):
    N = z1.shape[0]
    both = np.maximum(z1, z2)
    c_both = dominance_count(both, w)
    c1 = dominance_count(z1, w)
    c2 = dominance_count(z2, w)
    value, _ = _cvm_value_from_counts(c_both, c1, c2, N)
    return value


def cvm_estimate(
    design: CvmDesign,
    se: str = "bootstrap",
    n_boot: int = DEFAULT_BOOT,
    stream: Stream | None = None,
) -> Estimate:
    """Empirical Cramer-von-Mises sensitivity index.

    Double Monte Carlo sum over the design: for every integration point
    W_k, the Pick-and-Freeze covariance of the output indicators is
    averaged over blocks.  Scalar outputs use a sorted-rank counting path
    that reproduces the direct double sum exactly.

    se: "bootstrap" (block bootstrap, resampling (Z1,Z2) blocks and W
    points independently), "plugin" (asymptotic variance), or "none".
    Multivariate bootstrap recomputes pairwise counts per resample, which
    is quadratic in N; prefer "plugin" for large multivariate designs.
    """
    N = design.N
    value = float(_cvm_value(design.Z1, design.Z2, design.W))

    se_val = ci_lo = ci_hi = None
    ci_method = "none"
    if se == "bootstrap" and N >= 2:
        gen = _boot_stream(design, stream).generator()
        boots = np.empty(n_boot)
        for b in range(n_boot):
            zi = gen.integers(0, N, size=N)
            wi = gen.integers(0, N, size=N)
            boots[b] = _cvm_value(design.Z1[zi], design.Z2[zi], design.W[wi])
        se_val = float(np.std(boots, ddof=1))
        ci_lo, ci_hi = _percentile_ci(boots)
        ci_method = "bootstrap"
    elif se == "plugin":
        se_val = float(np.sqrt(cvm_variance_plugin(design) / N))
        ci_lo, ci_hi = value - Z975 * se_val, value + Z975 * se_val
        ci_method = "asymptotic"
    return Estimate(
        value=value,
        std_error=se_val,
        ci_low=ci_lo,
        ci_high=ci_hi,
        N=N,
        method="cvm",
        ci_method=ci_method,
        seed=design.seed,
    )


def cvm_normalize(est: Estimate, continuous_scalar: bool = False) -> Estimate:
    """Scale a cvm estimate onto [0, 1]: factor 4, or 6 for a continuous
    scalar output."""
    if est.method != "cvm":
        raise ParameterError(f"can only normalize cvm estimates, got {est.method}")
    factor = 6.0 if continuous_scalar else 4.0
    scale = lambda x: None if x is None else factor * x
    return Estimate(
        value=factor * est.value,
        std_error=scale(est.std_error),
        ci_low=scale(est.ci_low),
        ci_high=scale(est.ci_high),
        N=est.N,
        method=f"cvm_normalized({int(factor)})",
        ci_method=est.ci_method,
        seed=est.seed,
    )


def cvm_variance_plugin(design: CvmDesign) -> float:
    """Plug-in estimate of the asymptotic variance of the cvm estimator.

    The limit splits into two independent empirical-process contributions:
    a W-sample term U evaluated at the integration points and a
    Pick-and-Freeze term V evaluated at the (Z1, Z2) pairs; the variance
    is Var(U) + Var(V) with the output CDF replaced by the empirical CDF
    of W and the pair CDF by the empirical joint CDF of (Z1, Z2).
    """
    N = design.N
    if N < 10:
        raise InsufficientSampleError(f"plug-in variance needs N >= 10, got {N}")
    both = np.maximum(design.Z1, design.Z2)

    g_ww = dominance_count(both, design.W) / N
    f_w = dominance_count(design.W, design.W) / N
    u = g_ww - f_w**2

    f_z1 = dominance_count(design.W, design.Z1) / N
    f_z2 = dominance_count(design.W, design.Z2) / N
    f_both = dominance_count(design.W, both) / N
    v = 0.5 * (f_z1**2 + f_z2**2) - f_both

    return float(np.var(u, ddof=1) + np.var(v, ddof=1))


# ---------------------------------------------------------------------------
# Comparison indices for the case study
# ---------------------------------------------------------------------------

def multivariate_sobol(
    design: PickFreezeDesign,
    n_boot: int = DEFAULT_BOOT,
    stream: Stream | None = None,
) -> Estimate:
    """Trace-aggregated Sobol index for vector outputs.

    Componentwise Pick-and-Freeze numerators and pooled variances are
    summed before taking the ratio, so components are weighted by their
    share of the total output variance.
    """
    if design.p != 2:
        raise ParameterError(f"multivariate_sobol requires p=2, got {design.p}")
    if design.N < 2:
        raise InsufficientSampleError(f"need N >= 2 blocks, got {design.N}")
    y1 = design.Y[0]
    y2 = design.Y[1]

    def ratio(a, b):
        # a, b: (..., N, k)
        pooled = np.concatenate([a, b], axis=-2)
        half = 0.5 * np.mean(a + b, axis=-2)
        nums = np.mean(a * b, axis=-2) - half * half
        den = np.var(pooled, axis=-2).sum(axis=-1)
        _check_not_degenerate(den, float(np.abs(pooled).max(initial=0.0)))
        return nums.sum(axis=-1) / den

    value = float(ratio(y1, y2))
    se = ci_lo = ci_hi = None
    ci_method = "none"
    if n_boot:
        gen = _boot_stream(design, stream).generator()
        boots = _block_bootstrap(
            gen, n_boot, design.N, lambda idx: ratio(y1[idx], y2[idx]),
            cells=max(1, 2 * 10**7 // design.k),
        )
        se = float(np.std(boots, ddof=1))
        ci_lo, ci_hi = _percentile_ci(boots)
        ci_method = "bootstrap"
    return Estimate(
        value=value,
        std_error=se,
        ci_low=ci_lo,
        ci_high=ci_hi,
        N=design.N,
        method="multivariate_sobol",
        ci_method=ci_method,
        seed=design.seed,
    )


def _beta_value(X_v, Y, partitions):
    N = Y.shape[0]
    order = np.argsort(X_v, kind="stable")
    Ys = Y[order]
    pooled = dominance_count(Ys, Ys) / N
    bins = np.array_split(np.arange(N), partitions)
    if any(len(b) == 0 for b in bins):
        raise PartitionError(
            f"{partitions} partitions leave an empty bin at N={N}"
        )
    total = 0.0
    sups = []
    for b in bins:
        fb = dominance_count(Ys[b], Ys) / len(b)
        sup = float(np.abs(pooled - fb).max())
        sups.append(sup)
        total += (len(b) / N) * sup
    return total, np.array(sups)


def beta_index(
    inputs: InputModel,
    model: Model,
    v: int,
    N: int,
    partitions: int = 20,
    stream: Stream | None = None,
    n_boot: int = 0,
    threads=None,
) -> Estimate:
    """Kolmogorov-distance sensitivity index E[sup_y |F_Y - F_{Y|X_v}|].

    The conditional CDF is estimated within equal-count bins of X_v; the
    sup runs over the pooled sample points and bins are weighted by their
    sample mass.  With n_boot=0 the standard error is approximated from
    the spread of the per-bin sup distances.
    """
    if partitions < 2:
        raise ParameterError(f"need at least 2 partitions, got {partitions}")
    if N // partitions < 20:
        raise ParameterError(
            f"N={N} too small for {partitions} partitions (need >= 20 per bin)"
        )
    if stream is None:
        stream = Stream(master_seed=0, purpose="beta")
    X = inputs.sample_matrix(N, stream.sub("beta-sample"))
    Y = evaluate_model(model, X, threads=threads)
    value, sups = _beta_value(X[:, v], Y, partitions)

    if n_boot:
        gen = stream.sub("beta-boot").generator()
        boots = np.empty(n_boot)
        for b in range(n_boot):
            idx = gen.integers(0, N, size=N)
            boots[b], _ = _beta_value(X[idx, v], Y[idx], partitions)
        se = float(np.std(boots, ddof=1))
        ci_lo, ci_hi = _percentile_ci(boots)
        ci_method = "bootstrap"
    else:
        se = float(np.std(sups, ddof=1) / np.sqrt(partitions))
        ci_lo, ci_hi = value - Z975 * se, value + Z975 * se
        ci_method = "asymptotic"
    return Estimate(
        value=float(value),
        std_error=se,
        ci_low=ci_lo,
        ci_high=ci_hi,
        N=N,
        method="beta_index",
        ci_method=ci_method,
        seed=stream.label(),
    )
