"""Analytic test models with closed-form sensitivity indices.

Two benchmark models: a linear Bernoulli-plus-noise model whose second
input can be Gaussian, uniform or exponential (with parameters coupled so
both inputs share the same variance, hence identical classical Sobol
indices), and a log-normal model exp(X1 + 2 X2) with exact arctan
expressions for its distribution-based indices.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import ndtr

from .design import Model
from .distributions import Bernoulli, Exponential, Gaussian, InputModel, Uniform
from .errors import ParameterError, QuadratureError

FAMILIES = ("gaussian", "uniform", "exponential")


def quadrature(fn, domain, tol: float = 1e-9, points=None) -> float:
    """Adaptive quadrature with absolute error <= tol.

    Infinite endpoints are handled by the underlying transformation; when
    breakpoints are supplied on a half-infinite domain the integral is
    split there instead (quad cannot mix points with infinite limits).
    """
    a, b = domain
    if tol <= 0.0:
        raise ParameterError(f"tolerance must be > 0, got {tol}")
    inner = [x for x in (points or []) if a < x < b]
    edges = [a] + sorted(inner) + [b]
    total, err = 0.0, 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        finite = np.isfinite(lo) and np.isfinite(hi)
        # the contract is an absolute tolerance; keep epsrel out of the way
        val, abserr = integrate.quad(
            fn,
            lo,
            hi,
            epsabs=tol / 10.0,
            epsrel=1e-13,
            limit=200,
            points=[x for x in inner if lo < x < hi] if finite else None,
        )
        total += val
        err += abserr
    if err > tol:
        raise QuadratureError(
            f"quadrature error estimate {err:.3e} exceeds tolerance {tol:.3e}"
        )
    return total


# ---------------------------------------------------------------------------
# Linear toy model: Y = alpha * X1 + X2, X1 ~ Bernoulli(prob)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ToyModel:
    """Y = alpha X1 + X2 with Var(X2) coupled to alpha^2 p (1-p)."""

    alpha: float
    prob: float
    x2_family: str = "gaussian"

    def __post_init__(self):
        if self.alpha <= 0.0:
            raise ParameterError(f"alpha must be > 0, got {self.alpha}")
        if not 0.0 < self.prob < 1.0:
            raise ParameterError(f"prob must lie in (0,1), got {self.prob}")
        if self.x2_family not in FAMILIES:
            raise ParameterError(f"unknown x2 family {self.x2_family!r}")

    @property
    def pq(self) -> float:
        return self.prob * (1.0 - self.prob)

    @property
    def sigma(self) -> float:
        return self.alpha * math.sqrt(self.pq)

    @property
    def b(self) -> float:
        return 2.0 * self.alpha * math.sqrt(3.0 * self.pq)

    @property
    def rate(self) -> float:
        return 1.0 / (self.alpha * math.sqrt(self.pq))

    def x2_dist(self):
        if self.x2_family == "gaussian":
            return Gaussian(0.0, self.sigma)
        if self.x2_family == "uniform":
            return Uniform(0.0, self.b)
        return Exponential(self.rate)

    def input_model(self) -> InputModel:
        return InputModel.of(("x1", Bernoulli(self.prob)), ("x2", self.x2_dist()))

    def model(self) -> Model:
        alpha = self.alpha
        return Model(
            input_names=["x1", "x2"],
            output_dim=1,
            fn=lambda X: alpha * X[:, 0] + X[:, 1],
            name=f"toy[{self.x2_family}]",
        )

    def _density(self):
        if self.x2_family == "gaussian":
            s = self.sigma
            return lambda t: np.exp(-0.5 * (t / s) ** 2) / (s * math.sqrt(2 * math.pi))
        if self.x2_family == "uniform":
            b = self.b
            return lambda t: (1.0 / b) if 0.0 <= t <= b else 0.0
        lam = self.rate
        return lambda t: lam * math.exp(-lam * t) if t >= 0.0 else 0.0


def toy_eval(m: ToyModel, x1, x2) -> float:
    if x1 not in (0, 1):
        raise ParameterError(f"x1 must be 0 or 1, got {x1}")
    return m.alpha * x1 + x2


def toy_cvm_integral(m: ToyModel, which: int, tol: float = 1e-9) -> float:
    """Distribution-based indices by direct quadrature of their integral
    forms; the reference path the explicit family formulas are checked
    against."""
    F = m.x2_dist().cdf
    f = m._density()
    p, a = m.prob, m.alpha
    if m.x2_family == "gaussian":
        domain, points = (-np.inf, np.inf), [0.0, a]
    elif m.x2_family == "uniform":
        domain, points = (0.0, m.b + a), [min(a, m.b), max(min(a, m.b), m.b)]
    else:
        domain, points = (0.0, np.inf), [a]

    if which == 1:
        def integrand(t):
            diff = float(F(t)) - float(F(t - a))
            return diff * diff * ((1.0 - p) * f(t) + p * f(t - a))

        return m.pq * quadrature(integrand, domain, tol, points=points)
    if which == 2:
        inner = quadrature(lambda t: float(F(t - a)) * f(t), domain, tol, points=points)
        return 1.0 / 6.0 - m.pq * (0.5 - inner)
    raise ParameterError(f"which must be 1 or 2, got {which}")


def toy_cvm_closed(m: ToyModel, which: int) -> float:
    """Closed forms where the family admits one; Gaussian first index falls
    back to quadrature."""
    p, a, pq = m.prob, m.alpha, m.pq
    if which not in (1, 2):
        raise ParameterError(f"which must be 1 or 2, got {which}")
    if m.x2_family == "exponential":
        decay = 1.0 - math.exp(-m.rate * a)
        if which == 1:
            return pq / 3.0 * decay**2
        return 1.0 / 6.0 - pq / 2.0 * decay
    if m.x2_family == "uniform":
        b = m.b
        if which == 1:
            if a <= b:
                r = a / b
                return pq * r * r * (1.0 - 2.0 * r / 3.0)
            return pq / 3.0
        shrink = ((b - a) / b) ** 2 if a <= b else 0.0
        return 1.0 / 6.0 - pq / 2.0 * (1.0 - shrink)
    # gaussian
    if which == 1:
        return toy_cvm_integral(m, 1)
    overlap = float(ndtr(-a / (m.sigma * math.sqrt(2.0))))
    return 1.0 / 6.0 - pq * (0.5 - overlap)


def _exponential_central_moment(rate: float, q: int) -> float:
    """Brute-force central moment of an exponential law by quadrature."""
    mean = 1.0 / rate
    return quadrature(
        lambda x: (x - mean) ** q * rate * math.exp(-rate * x),
        (0.0, np.inf),
        tol=1e-10 * max(1.0, mean**q),
        points=[mean],
    )


def toy_hq_closed(m: ToyModel, which: int, q: int) -> float:
    """Order-q conditional-moment indices of the linear model.

    The first input's index has a single closed form for every family;
    the second equals the q-th central moment of X2.
    """
    if q < 2:
        raise ParameterError(f"order q must be >= 2, got {q}")
    p = m.prob
    if which == 1:
        return m.alpha**q * (p * (1.0 - p) ** q + (-p) ** q * (1.0 - p))
    if which != 2:
        raise ParameterError(f"which must be 1 or 2, got {which}")
    if m.x2_family == "gaussian":
        if q % 2 == 1:
            return 0.0
        half = q // 2
        return m.sigma**q * math.factorial(q) / (2**half * math.factorial(half))
    if m.x2_family == "uniform":
        if q % 2 == 1:
            return 0.0
        return (m.b / 2.0) ** q / (q + 1.0)
    return _exponential_central_moment(m.rate, q)


# ---------------------------------------------------------------------------
# Log-normal model: Z = exp(X1 + 2 X2)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExpModel:
    """Z = exp(X1 + 2 X2) with independent standard Gaussian inputs."""

    def input_model(self) -> InputModel:
        return InputModel.of(("x1", Gaussian(0.0, 1.0)), ("x2", Gaussian(0.0, 1.0)))

    def model(self) -> Model:
        return Model(
            input_names=["x1", "x2"],
            output_dim=1,
            fn=lambda X: np.exp(X[:, 0] + 2.0 * X[:, 1]),
            name="exp",
        )

    def cdf(self, y):
        y = np.asarray(y, dtype=float)
        out = np.zeros_like(y)
        pos = y > 0.0
        out[pos] = ndtr(np.log(y[pos]) / math.sqrt(5.0))
        return out


def gaussian_orthant_g(a: float) -> float:
    """P(U <= aV, U' <= aV) for independent standard Gaussians."""
    return math.atan(math.sqrt(1.0 + 2.0 * a * a)) / math.pi


def exp_cvm_closed(which: int) -> float:
    """Exact distribution-based indices of the log-normal model."""
    if which == 1:
        return math.atan(2.0) / math.pi - 1.0 / 3.0
    if which == 2:
        return math.atan(math.sqrt(19.0)) / math.pi - 1.0 / 3.0
    raise ParameterError(f"which must be 1 or 2, got {which}")


def exp_sobol_closed(which: int) -> float:
    """Exact classical Sobol ratios of the log-normal model.

    Var(E[Z|X_i]) = e^5 (e^{c_i^2} - 1) with c1=1, c2=2 and
    Var(Z) = e^5 (e^5 - 1).
    """
    e = math.e
    if which == 1:
        return (e - 1.0) / (e**5 - 1.0)
    if which == 2:
        return (e**4 - 1.0) / (e**5 - 1.0)
    raise ParameterError(f"which must be 1 or 2, got {which}")


def exp_hq_closed(which: int, q: int) -> float:
    """Order-q conditional-moment indices of the log-normal model.

    E[Z|X1] = e^{X1+2} and E[Z|X2] = e^{2X2+1/2} are log-normal, so the
    central moments expand into binomial sums of their power means.
    """
    if q < 2:
        raise ParameterError(f"order q must be >= 2, got {q}")
    if which == 1:
        power_mean = lambda i: math.exp(2.0 * i + 0.5 * i * i)
    elif which == 2:
        power_mean = lambda i: math.exp(0.5 * i + 2.0 * i * i)
    else:
        raise ParameterError(f"which must be 1 or 2, got {which}")
    mu = math.exp(2.5)
    return sum(
        math.comb(q, i) * (-1.0) ** (q - i) * power_mean(i) * mu ** (q - i)
        for i in range(q + 1)
    )


def dump_toy_oracle_csv(path, families=FAMILIES, probs=(0.1, 0.3, 0.5),
                        alphas=(0.5, 1.0, 2.0)):
    """Write the oracle curves as CSV rows family,p,alpha,index,value."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["family", "p", "alpha", "index", "value"])
        for family in families:
            for p in probs:
                for alpha in alphas:
                    m = ToyModel(alpha=alpha, prob=p, x2_family=family)
                    for which, tag in ((1, "D1"), (2, "D2")):
                        writer.writerow(
                            [family, p, alpha, tag, repr(toy_cvm_closed(m, which))]
                        )
