import csv
import math

import numpy as np
import pytest

import pickfreeze as pf
from pickfreeze import Stream
from pickfreeze.analytic import FAMILIES, quadrature
from pickfreeze.errors import ParameterError, QuadratureError

S = Stream(16180, "analytic-tests")

GRID = [
    (family, p, alpha)
    for family in FAMILIES
    for p in (0.1, 0.3, 0.5)
    for alpha in (0.5, 1.0, 2.0)
]


def subfactorial(q):
    # derangement count: exact exponential central moment is !q / rate^q
    total = 0
    for i in range(q + 1):
        total += math.comb(q, i) * (-1) ** (q - i) * math.factorial(i)
    return total


# --- quadrature engine -------------------------------------------------------

def test_quadrature_basics():
    assert quadrature(lambda x: x, (0.0, 1.0), tol=1e-10) == pytest.approx(
        0.5, abs=1e-10
    )
    gauss = lambda t: math.exp(-t * t / 2.0) / math.sqrt(2.0 * math.pi)
    assert quadrature(gauss, (-np.inf, np.inf), tol=1e-8) == pytest.approx(
        1.0, abs=1e-8
    )


def test_quadrature_honors_breakpoints_on_infinite_domain():
    lam = 2.0
    val = quadrature(
        lambda t: lam * math.exp(-lam * t) if t >= 1.0 else 0.0,
        (0.0, np.inf),
        tol=1e-9,
        points=[1.0],
    )
    assert val == pytest.approx(math.exp(-lam), abs=1e-9)


def test_quadrature_tolerance_error():
    rough = lambda t: math.sin(1.0 / t) if t != 0 else 0.0
    with pytest.raises(QuadratureError):
        quadrature(rough, (0.0, 1.0), tol=1e-14)
    with pytest.raises(ParameterError):
        quadrature(lambda t: t, (0.0, 1.0), tol=0.0)


# --- toy model ---------------------------------------------------------------

def test_toy_eval():
    m = pf.ToyModel(alpha=2.0, prob=0.5)
    assert pf.toy_eval(m, 0, 1.5) == 1.5
    assert pf.toy_eval(m, 1, 0.0) == 2.0
    assert pf.toy_eval(pf.ToyModel(alpha=1.0, prob=0.5), 1, -1.0) == 0.0
    with pytest.raises(ParameterError):
        pf.toy_eval(m, 2, 0.0)


@pytest.mark.parametrize("family", FAMILIES)
def test_toy_variance_coupling_exact(family):
    for p, alpha in ((0.1, 0.5), (0.3, 1.0), (0.5, 2.0)):
        m = pf.ToyModel(alpha=alpha, prob=p, x2_family=family)
        assert m.x2_dist().variance() == pytest.approx(
            alpha**2 * p * (1 - p), rel=1e-12
        )


@pytest.mark.parametrize("family,p,alpha", GRID)
def test_toy_closed_forms_match_quadrature(family, p, alpha):
    m = pf.ToyModel(alpha=alpha, prob=p, x2_family=family)
    for which in (1, 2):
        closed = pf.toy_cvm_closed(m, which)
        integral = pf.toy_cvm_integral(m, which)
        assert closed == pytest.approx(integral, abs=1e-8)


def test_toy_uniform_saturated_branch():
    # alpha >= b puts the first index on its 1/3 plateau; the coupling
    # b = 2 alpha sqrt(3pq) leaves alpha > b only when p(1-p) < 1/12
    m = pf.ToyModel(alpha=2.0, prob=0.05, x2_family="uniform")
    assert m.b < m.alpha
    assert pf.toy_cvm_closed(m, 1) == pytest.approx(0.05 * 0.95 / 3.0)


def test_toy_exponential_separation_limit_by_substitution():
    # Under the variance coupling lambda*alpha = 1/sqrt(pq) is pinned by p,
    # so the e^{-lambda alpha} -> 0 limit is checked by substituting
    # lambda*alpha = 50 directly into the exponential closed forms.
    p = 0.5
    d1 = lambda la: p * (1 - p) / 3.0 * (1.0 - math.exp(-la)) ** 2
    d2 = lambda la: 1.0 / 6.0 - p * (1 - p) / 2.0 * (1.0 - math.exp(-la))
    assert d1(50.0) == pytest.approx(1.0 / 12.0, abs=1e-8)
    assert d2(50.0) == pytest.approx(1.0 / 24.0, abs=1e-8)
    # and the package formula agrees with the substitution at the coupled
    # value lambda*alpha = 1/sqrt(pq) = 2
    m = pf.ToyModel(alpha=3.0, prob=p, x2_family="exponential")
    assert m.rate * m.alpha == pytest.approx(2.0, rel=1e-12)
    assert pf.toy_cvm_closed(m, 1) == pytest.approx(d1(2.0), rel=1e-12)
    assert pf.toy_cvm_closed(m, 2) == pytest.approx(d2(2.0), rel=1e-12)


@pytest.mark.parametrize("family", FAMILIES)
def test_toy_small_p_limits(family):
    m = pf.ToyModel(alpha=1.0, prob=1e-3, x2_family=family)
    assert pf.toy_cvm_closed(m, 1) == pytest.approx(0.0, abs=1e-3)
    assert pf.toy_cvm_closed(m, 2) == pytest.approx(1.0 / 6.0, abs=1e-3)


@pytest.mark.parametrize("family", FAMILIES)
def test_toy_order2_indices_coincide(family):
    m = pf.ToyModel(alpha=1.5, prob=0.3, x2_family=family)
    h1 = pf.toy_hq_closed(m, 1, 2)
    h2 = pf.toy_hq_closed(m, 2, 2)
    assert h1 == pytest.approx(m.alpha**2 * m.pq, rel=1e-9)
    assert h2 == pytest.approx(h1, rel=1e-9)


def test_toy_gaussian_even_moments_restore_sigma_factor():
    m = pf.ToyModel(alpha=2.0, prob=0.3, x2_family="gaussian")
    assert pf.toy_hq_closed(m, 2, 4) == pytest.approx(3.0 * m.sigma**4, rel=1e-12)
    assert pf.toy_hq_closed(m, 2, 6) == pytest.approx(15.0 * m.sigma**6, rel=1e-12)
    assert pf.toy_hq_closed(m, 2, 3) == 0.0


def test_toy_uniform_moments():
    m = pf.ToyModel(alpha=1.0, prob=0.3, x2_family="uniform")
    assert pf.toy_hq_closed(m, 2, 4) == pytest.approx((m.b / 2) ** 4 / 5.0, rel=1e-12)
    assert pf.toy_hq_closed(m, 2, 5) == 0.0


@pytest.mark.parametrize("q", [2, 3, 4, 5, 6])
def test_toy_exponential_moments_match_derangement_formula(q):
    # independent oracle: q-th central moment of Exp(rate) is !q / rate^q;
    # the once-printed q!/2 form fails from q=3 on
    m = pf.ToyModel(alpha=1.0, prob=0.3, x2_family="exponential")
    want = subfactorial(q) / m.rate**q
    assert pf.toy_hq_closed(m, 2, q) == pytest.approx(want, rel=1e-8)
    if q >= 3:
        assert pf.toy_hq_closed(m, 2, q) != pytest.approx(
            math.factorial(q) / 2.0 / m.rate**q, rel=1e-3
        )


def test_toy_odd_symmetric_first_index_vanishes():
    m = pf.ToyModel(alpha=1.0, prob=0.5)
    assert pf.toy_hq_closed(m, 1, 3) == 0.0


def test_toy_hq_requires_order_two():
    with pytest.raises(ParameterError):
        pf.toy_hq_closed(pf.ToyModel(alpha=1.0, prob=0.5), 1, 1)


# --- log-normal model --------------------------------------------------------

def test_exp_cvm_closed_paper_values():
    assert round(pf.exp_cvm_closed(1), 4) == 0.0191
    assert round(pf.exp_cvm_closed(2), 4) == 0.0949
    for which in (1, 2):
        assert 0.0 < pf.exp_cvm_closed(which) < 1.0 / 6.0


def test_exp_sobol_closed_exact_formulas():
    e = math.e
    assert pf.exp_sobol_closed(1) == pytest.approx((e - 1) / (e**5 - 1), rel=1e-15)
    assert pf.exp_sobol_closed(2) == pytest.approx(
        (e**4 - 1) / (e**5 - 1), rel=1e-15
    )
    assert pf.exp_sobol_closed(1) + pf.exp_sobol_closed(2) < 1.0


def test_exp_sobol_matches_conditional_variance_quadrature():
    # independent oracle: Var(E[Z|X1]) via quadrature over the Gaussian;
    # evaluated in log scale to survive the transformed tails
    e5 = math.exp(5.0)

    def integrand(x):
        expo = 2.0 * (x + 2.0) - 0.5 * x * x
        return math.exp(expo) / math.sqrt(2.0 * math.pi) if expo > -700 else 0.0

    second = quadrature(integrand, (-np.inf, np.inf), 1e-6)
    var_cond = second - math.exp(5.0)
    var_total = e5 * (e5 - 1.0)
    assert pf.exp_sobol_closed(1) == pytest.approx(var_cond / var_total, rel=1e-7)


def test_gaussian_orthant_values():
    assert pf.gaussian_orthant_g(0.0) == pytest.approx(0.25, rel=1e-15)
    assert pf.gaussian_orthant_g(1.0) == pytest.approx(1.0 / 3.0, rel=1e-15)


def test_gaussian_orthant_monte_carlo():
    gen = S.sub("orthant").generator()
    n = 10**7
    u, up, v = gen.normal(size=(3, n))
    mc = np.mean((u <= 3.0 * v) & (up <= 3.0 * v))
    assert pf.gaussian_orthant_g(3.0) == pytest.approx(mc, abs=1e-3)


def test_gaussian_orthant_monotone_with_range():
    grid = np.linspace(0.0, 50.0, 200)
    vals = [pf.gaussian_orthant_g(a) for a in grid]
    assert np.all(np.diff(vals) > 0.0)
    assert vals[0] == 0.25 and vals[-1] < 0.5
    assert pf.gaussian_orthant_g(-2.0) == pf.gaussian_orthant_g(2.0)


def test_exp_hq_closed_against_quadrature():
    gauss = lambda t: math.exp(-t * t / 2.0) / math.sqrt(2.0 * math.pi)
    mu = math.exp(2.5)
    for q in (2, 3, 4):
        # cut the tails before exp() overflows; the Gaussian factor makes
        # everything past |x|=60 vanish to far below the tolerance
        closed = pf.exp_hq_closed(1, q)
        direct = quadrature(
            lambda x: (
                (math.exp(x + 2.0) - mu) ** q * gauss(x) if abs(x) < 60.0 else 0.0
            ),
            (-np.inf, np.inf),
            tol=1e-8 * abs(closed),
        )
        assert closed == pytest.approx(direct, rel=1e-8)
    # second-order values are the conditional variances
    e = math.e
    assert pf.exp_hq_closed(1, 2) == pytest.approx(e**5 * (e - 1.0), rel=1e-12)
    assert pf.exp_hq_closed(2, 2) == pytest.approx(e**5 * (e**4 - 1.0), rel=1e-12)


def test_exp_model_cdf_matches_samples():
    em = pf.ExpModel()
    z = np.sort(
        em.model().fn(em.input_model().sample_matrix(10**5, S.sub("expcdf")))
    )
    F = em.cdf(z)
    n = len(z)
    k = np.abs(np.arange(1, n + 1) / n - F).max()
    assert k < 0.01


# --- estimator convergence over the oracle grid ------------------------------

@pytest.mark.parametrize("family", FAMILIES)
def test_monte_carlo_converges_to_toy_oracles(family):
    m = pf.ToyModel(alpha=1.0, prob=0.3, x2_family=family)
    for which, v in ((1, 0), (2, 1)):
        d = pf.build_cvm_design(
            m.model(), m.input_model(), v, 10**4, S.sub(f"conv-{family}-{v}")
        )
        est = pf.cvm_estimate(d, se="plugin")
        assert abs(est.value - pf.toy_cvm_closed(m, which)) < 3.0 * est.std_error


def test_oracle_csv_dump(tmp_path):
    path = tmp_path / "oracle.csv"
    pf.dump_toy_oracle_csv(path)
    with open(path) as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 3 * 3 * 3 * 2
    row = rows[0]
    assert set(row) == {"family", "p", "alpha", "index", "value"}
    m = pf.ToyModel(alpha=float(row["alpha"]), prob=float(row["p"]),
                    x2_family=row["family"])
    assert float(row["value"]) == pf.toy_cvm_closed(m, 1)
