import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad
from scipy.special import gammaln

from corrnet.corr import CorrelationMatrix
from corrnet.errors import DataError
from corrnet.filtgraph import mst, pmfg
from corrnet.stats import mst_vs_pmfg, mst_vs_pmfg_pvalues, student_t_cdf, student_t_sf2, welch_ttest
from corrnet.synth import equicorrelation_matrix
from oracles import random_correlation


def welch_oracle(a, b, dps=50):
    """Welch statistic, dof and two-sided p in high precision; p by integrating the t density."""
    with mpmath.workdps(dps):
        a = [mpmath.mpf(x) for x in a]
        b = [mpmath.mpf(x) for x in b]
        m1, m2 = sum(a) / len(a), sum(b) / len(b)
        v1 = sum((x - m1) ** 2 for x in a) / (len(a) - 1)
        v2 = sum((x - m2) ** 2 for x in b) / (len(b) - 1)
        s1, s2 = v1 / len(a), v2 / len(b)
        t = (m1 - m2) / mpmath.sqrt(s1 + s2)
        nu = (s1 + s2) ** 2 / (s1 ** 2 / (len(a) - 1) + s2 ** 2 / (len(b) - 1))
        norm = mpmath.gamma((nu + 1) / 2) / (mpmath.sqrt(nu * mpmath.pi) * mpmath.gamma(nu / 2))
        pdf = lambda x: norm * (1 + x * x / nu) ** (-(nu + 1) / 2)  # noqa: E731
        p = 2 * mpmath.quad(pdf, [abs(t), mpmath.inf])
        return float(t), float(nu), float(p)


def t_cdf_by_quadrature(t, dof):
    log_norm = gammaln((dof + 1) / 2) - gammaln(dof / 2) - 0.5 * np.log(dof * np.pi)
    pdf = lambda x: np.exp(log_norm - (dof + 1) / 2 * np.log1p(x * x / dof))  # noqa: E731
    if t <= 0:
        return quad(pdf, -np.inf, t, epsabs=1e-14, epsrel=1e-13)[0]
    return 0.5 + quad(pdf, 0, t, epsabs=1e-14, epsrel=1e-13)[0]


def test_reference_example():
    r = welch_ttest([1, 2, 3], [2, 3, 4])
    assert r.t_statistic == pytest.approx(-1.224745, abs=1e-6)
    assert r.dof == pytest.approx(4.0, abs=1e-12)
    # dof = 4 has a closed-form CDF: with a = t / sqrt(4 + t^2), p = 1 - (3a - a^3) / 2
    a = 1.224744871391589 / np.sqrt(4 + 1.5)
    assert r.p_value == pytest.approx(1 - (3 * a - a ** 3) / 2, abs=1e-12)
    assert r.p_value == pytest.approx(0.2878641347266907, abs=1e-12)
    t, nu, p = welch_oracle([1, 2, 3], [2, 3, 4])
    assert r.p_value == pytest.approx(p, abs=1e-10)


def test_identical_samples():
    r = welch_ttest([1.0, 4.0, 2.5], [1.0, 4.0, 2.5])
    assert r.t_statistic == 0.0 and r.p_value == 1.0


def test_errors():
    with pytest.raises(DataError, match="zero variance in both samples"):
        welch_ttest([1, 1, 1], [2, 2])
    with pytest.raises(DataError, match="too small"):
        welch_ttest([1], [1, 2, 3])
    # one constant sample is fine
    assert welch_ttest([1, 1, 1], [1, 2, 3]).dof == pytest.approx(2.0)


def test_against_high_precision_oracle():
    rng = np.random.default_rng(0)
    for _ in range(50):
        a = rng.normal(rng.normal(), rng.uniform(0.1, 3), int(rng.integers(2, 40)))
        b = rng.normal(rng.normal(), rng.uniform(0.1, 3), int(rng.integers(2, 40)))
        r = welch_ttest(a, b)
        t, nu, p = welch_oracle(a, b)
        assert r.t_statistic == pytest.approx(t, abs=1e-10, rel=1e-12)
        assert r.dof == pytest.approx(nu, abs=1e-9)
        assert r.p_value == pytest.approx(p, abs=1e-10)


@pytest.mark.parametrize("dof", [1, 2, 4, 10, 30, 100])
def test_t_cdf_matches_quadrature(dof):
    for t in np.linspace(-10, 10, 81):
        assert student_t_cdf(t, dof) == pytest.approx(t_cdf_by_quadrature(t, dof), abs=1e-8)


def test_tail_helper():
    assert student_t_sf2(0.0, 5) == 1.0
    assert student_t_sf2(float("inf"), 5) == 0.0
    with pytest.raises(DataError):
        student_t_sf2(1.0, 0)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-100, 100), min_size=2, max_size=20),
       st.lists(st.floats(-100, 100), min_size=2, max_size=20),
       st.floats(-50, 50), st.floats(0.1, 10))
def test_symmetries(a, b, shift, scale):
    a = np.asarray(a)
    b = np.asarray(b)
    if np.ptp(a) < 1e-3 and np.ptp(b) < 1e-3:
        return
    r = welch_ttest(a, b)
    s = welch_ttest(b, a)
    assert s.t_statistic == pytest.approx(-r.t_statistic, abs=1e-12, rel=1e-12)
    assert s.p_value == pytest.approx(r.p_value, abs=1e-12)
    assert 0.0 <= r.p_value <= 1.0
    assert r.dof <= r.n1 + r.n2 - 2 + 1e-9
    shifted = welch_ttest(a + shift, b + shift)
    scaled = welch_ttest(a * scale, b * scale)
    assert shifted.t_statistic == pytest.approx(r.t_statistic, rel=1e-8, abs=1e-8)
    assert scaled.t_statistic == pytest.approx(r.t_statistic, rel=1e-12, abs=1e-12)


def test_mst_mean_dominates_pmfg_mean():
    rng = np.random.default_rng(3)
    mats = [CorrelationMatrix([str(k) for k in range(20)], random_correlation(20, rng)) for _ in range(30)]
    for r in mst_vs_pmfg_pvalues(mats):
        assert r.mean1 >= r.mean2
        assert (r.n1, r.n2) == (19, 54)


def test_shared_links_option():
    c = random_correlation(15, np.random.default_rng(1))
    tree, planar = mst(c), pmfg(c)
    incl = mst_vs_pmfg(c)
    excl = mst_vs_pmfg(c, exclude_shared=True)
    assert incl.n2 == 39 and excl.n2 == 39 - 14
    assert excl.mean2 == pytest.approx(np.mean([w for i, j, w in planar.edges if (i, j) not in tree.pairs()]))
    assert mst_vs_pmfg(c, graphs=(tree, planar)) == incl


def test_near_equicorrelated_matrix_keeps_small_mean_gap():
    # tiny symmetric noise around a constant correlation: both link populations sit at rho,
    # with the MST taking the top of the noise distribution
    rng = np.random.default_rng(0)
    for _ in range(10):
        e = rng.normal(0, 1e-4, (30, 30))
        c = equicorrelation_matrix(30, 0.3) + (e + e.T) / 2
        np.fill_diagonal(c, 1.0)
        r = mst_vs_pmfg(c)
        assert abs(r.mean1 - 0.3) < 5e-4 and abs(r.mean2 - 0.3) < 5e-4
        assert r.mean1 >= r.mean2
