"""Univariate input distributions and the independent-input model.

Six families are supported; the truncated-Beta mixture is the input law of
the decision-tree case study: a Beta variable is kept where it falls inside
[m, M), while the stray mass below m (at or above M) is redrawn uniformly
on [0, m] (on [M, 1]).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import optimize, special

from .errors import NoSolutionError, ParameterError
from .streams import Stream


class Distribution:
    """Base class; subclasses are frozen dataclasses with numeric params."""

    kind: str = ""

    def sample(self, n: int, stream: Stream) -> np.ndarray:
        raise NotImplementedError

    def cdf(self, t):
        raise NotImplementedError

    def mean(self) -> float:
        raise NotImplementedError

    def variance(self) -> float:
        raise NotImplementedError

    def to_dict(self) -> dict:
        out = {"kind": self.kind}
        out.update({k: float(v) for k, v in self.__dict__.items()})
        return out


def _check_n(n):
    if n < 1:
        raise ParameterError(f"sample size must be >= 1, got {n}")


@dataclass(frozen=True)
class Bernoulli(Distribution):
    p: float
    kind = "bernoulli"

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ParameterError(f"Bernoulli p must lie in [0,1], got {self.p}")

    def sample(self, n, stream):
        _check_n(n)
        return (stream.generator().random(n) < self.p).astype(float)

    def cdf(self, t):
        t = np.asarray(t, dtype=float)
        return np.where(t < 0.0, 0.0, np.where(t < 1.0, 1.0 - self.p, 1.0))

    def mean(self):
        return self.p

    def variance(self):
        return self.p * (1.0 - self.p)


@dataclass(frozen=True)
class Gaussian(Distribution):
    mu: float
    sigma: float
    kind = "gaussian"

    def __post_init__(self):
        if self.sigma <= 0.0:
            raise ParameterError(f"Gaussian sigma must be > 0, got {self.sigma}")

    def sample(self, n, stream):
        _check_n(n)
        return stream.generator().normal(self.mu, self.sigma, n)

    def cdf(self, t):
        return special.ndtr((np.asarray(t, dtype=float) - self.mu) / self.sigma)

    def mean(self):
        return self.mu

    def variance(self):
        return self.sigma**2


@dataclass(frozen=True)
class Uniform(Distribution):
    a: float
    b: float
    kind = "uniform"

    def __post_init__(self):
        if not self.a < self.b:
            raise ParameterError(f"Uniform requires a < b, got [{self.a}, {self.b}]")

    def sample(self, n, stream):
        _check_n(n)
        return stream.generator().uniform(self.a, self.b, n)

    def cdf(self, t):
        t = np.asarray(t, dtype=float)
        return np.clip((t - self.a) / (self.b - self.a), 0.0, 1.0)

    def mean(self):
        return 0.5 * (self.a + self.b)

    def variance(self):
        return (self.b - self.a) ** 2 / 12.0


@dataclass(frozen=True)
class Exponential(Distribution):
    rate: float
    kind = "exponential"

    def __post_init__(self):
        if self.rate <= 0.0:
            raise ParameterError(f"Exponential rate must be > 0, got {self.rate}")

    def sample(self, n, stream):
        _check_n(n)
        return stream.generator().exponential(1.0 / self.rate, n)

    def cdf(self, t):
        t = np.asarray(t, dtype=float)
        return np.where(t < 0.0, 0.0, -np.expm1(-self.rate * np.maximum(t, 0.0)))

    def mean(self):
        return 1.0 / self.rate

    def variance(self):
        return 1.0 / self.rate**2


@dataclass(frozen=True)
class Beta(Distribution):
    alpha: float
    beta: float
    kind = "beta"

    def __post_init__(self):
        if self.alpha <= 0.0 or self.beta <= 0.0:
            raise ParameterError(
                f"Beta shapes must be > 0, got ({self.alpha}, {self.beta})"
            )

    def sample(self, n, stream):
        _check_n(n)
        return stream.generator().beta(self.alpha, self.beta, n)

    def cdf(self, t):
        t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
        return special.betainc(self.alpha, self.beta, t)

    def mean(self):
        return self.alpha / (self.alpha + self.beta)

    def variance(self):
        s = self.alpha + self.beta
        return self.alpha * self.beta / (s * s * (s + 1.0))

    def partial_moment(self, lo: float, hi: float, order: int = 1) -> float:
        """E[X^order ; lo <= X <= hi] for this Beta law."""
        a, b = self.alpha, self.beta
        scale = 1.0
        for i in range(order):
            scale *= (a + i) / (a + b + i)
        shifted = Beta(a + order, b)
        return scale * float(shifted.cdf(hi) - shifted.cdf(lo))


@dataclass(frozen=True)
class TruncatedBetaMixture(Distribution):
    """Beta(alpha, beta) kept on [m, M); stray mass spread uniformly.

    Draws below m are replaced by an independent Uniform[0, m] variable,
    draws at or above M by an independent Uniform[M, 1] variable.
    """

    alpha: float
    beta: float
    m: float
    M: float
    kind = "truncated_beta_mixture"

    def __post_init__(self):
        if self.alpha <= 0.0 or self.beta <= 0.0:
            raise ParameterError(
                f"Beta shapes must be > 0, got ({self.alpha}, {self.beta})"
            )
        if not 0.0 <= self.m < self.M <= 1.0:
            raise ParameterError(
                f"mixture range requires 0 <= m < M <= 1, got [{self.m}, {self.M}]"
            )

    def _base(self) -> Beta:
        return Beta(self.alpha, self.beta)

    def sample(self, n, stream):
        _check_n(n)
        # Independent component streams keep the draws extendable in n.
        z = self._base().sample(n, stream.sub("z"))
        low = (
            stream.sub("u").generator().uniform(0.0, self.m, n)
            if self.m > 0.0
            else np.zeros(n)
        )
        high = stream.sub("v").generator().uniform(self.M, 1.0, n)
        return np.where(z < self.m, low, np.where(z >= self.M, high, z))

    def cdf(self, t):
        base = self._base()
        p_low = float(base.cdf(self.m))
        p_high = 1.0 - float(base.cdf(self.M))
        t = np.asarray(t, dtype=float)
        below = p_low * (t / self.m if self.m > 0.0 else np.ones_like(t))
        middle = base.cdf(t)
        if self.M < 1.0:
            above = (1.0 - p_high) + p_high * (t - self.M) / (1.0 - self.M)
        else:
            above = np.ones_like(t)
        out = np.where(t < self.m, below, np.where(t < self.M, middle, above))
        return np.clip(np.where(t < 0.0, 0.0, np.where(t >= 1.0, 1.0, out)), 0.0, 1.0)

    def _weights(self):
        base = self._base()
        p_low = float(base.cdf(self.m))
        p_high = 1.0 - float(base.cdf(self.M))
        return base, p_low, p_high

    def mean(self):
        base, p_low, p_high = self._weights()
        kept = base.partial_moment(self.m, self.M, 1)
        return kept + p_low * self.m / 2.0 + p_high * (self.M + 1.0) / 2.0

    def variance(self):
        base, p_low, p_high = self._weights()
        kept2 = base.partial_moment(self.m, self.M, 2)
        low2 = self.m**2 / 3.0
        high2 = (1.0 + self.M + self.M**2) / 3.0
        second = kept2 + p_low * low2 + p_high * high2
        return second - self.mean() ** 2


_KINDS = {
    d.kind: d
    for d in (Bernoulli, Gaussian, Uniform, Exponential, Beta, TruncatedBetaMixture)
}


def dist_from_dict(spec: dict) -> Distribution:
    """Rebuild a distribution from its dict form (CLI configs, reports)."""
    spec = dict(spec)
    kind = spec.pop("kind", None)
    if kind not in _KINDS:
        raise ParameterError(f"unknown distribution kind {kind!r}")
    try:
        return _KINDS[kind](**spec)
    except TypeError as exc:
        raise ParameterError(f"bad parameters for {kind}: {exc}") from exc


def sample(dist: Distribution, n: int, stream: Stream) -> np.ndarray:
    """n i.i.d. draws, fully determined by the stream descriptor."""
    return dist.sample(n, stream)


def cdf(dist: Distribution, t):
    """P(X <= t), vectorized over t."""
    return dist.cdf(t)


@dataclass(frozen=True)
class InputModel:
    """Ordered list of named independent inputs; order defines positions."""

    inputs: tuple

    def __post_init__(self):
        names = [name for name, _ in self.inputs]
        if any(not name for name in names):
            raise ParameterError("input names must be nonempty")
        if len(set(names)) != len(names):
            raise ParameterError(f"duplicate input names in {names}")

    @classmethod
    def of(cls, *pairs) -> "InputModel":
        return cls(tuple((str(n), d) for n, d in pairs))

    @property
    def names(self):
        return [name for name, _ in self.inputs]

    @property
    def dists(self):
        return [dist for _, dist in self.inputs]

    def __len__(self):
        return len(self.inputs)

    def sample_matrix(self, n: int, stream: Stream) -> np.ndarray:
        """(n, d) joint i.i.d. sample; column i uses its own sub-stream."""
        cols = [
            dist.sample(n, stream.child(input_index=i))
            for i, (_, dist) in enumerate(self.inputs)
        ]
        return np.column_stack(cols)


def fit_beta(base: float, m: float, M: float, mass: float = 0.95) -> tuple:
    """Find Beta shapes with mean == base and P(m <= X <= M) == mass.

    The mean constraint pins beta = alpha*(1-base)/base; alpha is found by
    bisection (the captured mass increases with alpha as the law tightens
    around its mean inside [m, M]).
    """
    if not 0.0 <= m < base < M <= 1.0:
        raise ParameterError(f"need 0 <= m < base < M <= 1, got {(m, base, M)}")
    if not 0.0 < mass < 1.0:
        raise ParameterError(f"mass must lie in (0,1), got {mass}")

    def captured(alpha):
        beta = alpha * (1.0 - base) / base
        return float(
            special.betainc(alpha, beta, M) - special.betainc(alpha, beta, m)
        ) - mass

    lo, hi = 1e-3, 1e4
    f_lo, f_hi = captured(lo), captured(hi)
    if f_lo * f_hi > 0.0:
        raise NoSolutionError(
            f"mass {mass} in [{m}, {M}] not bracketed for base {base}: "
            f"captured({lo})={f_lo + mass:.6f}, captured({hi})={f_hi + mass:.6f}"
        )
    alpha = optimize.bisect(captured, lo, hi, xtol=1e-8)
    return alpha, alpha * (1.0 - base) / base
