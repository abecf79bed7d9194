import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from aquasim.stats import (DomainError, InsufficientDataError, betainc, mean_and_variance,
                           rankdata, spearman, student_t_cdf, welch_t)
from conftest import load_json

CORPUS = load_json("ttest_corpus.json")


@pytest.mark.parametrize("case", CORPUS["welch"], ids=lambda c: f"na{len(c['a'])}nb{len(c['b'])}")
def test_welch_corpus(case):
    r = welch_t(case["a"], case["b"], pooled=case["pooled"])
    assert r.t_statistic == pytest.approx(case["t"], rel=1e-8, abs=1e-8)
    assert r.df == pytest.approx(case["df"], rel=1e-8)
    assert abs(r.p_value - case["p"]) < 1e-8


@pytest.mark.parametrize("case", CORPUS["cdf"], ids=lambda c: f"t{c['t']:.2f}df{c['df']:.1f}")
def test_cdf_corpus(case):
    assert abs(student_t_cdf(case["t"], case["df"]) - case["cdf"]) < 1e-8


@pytest.mark.parametrize("t", [-50.0, -3.0, -1.0, -0.2, 0.0, 0.5, 1.0, 7.0, 1e3])
def test_cauchy_closed_form(t):
    assert abs(student_t_cdf(t, 1) - (0.5 + math.atan(t) / math.pi)) < 1e-12


@pytest.mark.parametrize("t", [-4.0, -1.0, 0.3, 2.5])
def test_df2_closed_form(t):
    assert abs(student_t_cdf(t, 2) - (0.5 + t / (2 * math.sqrt(2 + t * t)))) < 1e-12


def test_hand_worked_example():
    r = welch_t([1, 2, 3, 4, 5], [2, 3, 4, 5, 6])
    assert r.t_statistic == -1.0 and r.df == 8.0
    # df = 8, |t| = 1: I_{8/9}(4, 1/2) by elementary integration
    assert abs(r.p_value - 0.3465935070873343) < 1e-12


def test_betainc_edges_and_symmetry():
    assert betainc(2, 3, 0) == 0 and betainc(2, 3, 1) == 1
    for a, b, x in [(0.5, 0.5, 0.3), (5, 2, 0.9), (30, 0.5, 0.99)]:
        assert betainc(a, b, x) + betainc(b, a, 1 - x) == pytest.approx(1, abs=1e-13)
    with pytest.raises(DomainError):
        betainc(1, 1, 1.5)
    with pytest.raises(DomainError):
        student_t_cdf(1, 0)


def test_variance_matches_exact_arithmetic():
    # values on a 2**-10 grid are exact doubles, so integer sums give the truth
    rng = random.Random(9)
    ks = [2**30 + rng.randint(0, 2**20) for _ in range(10**6)]
    xs = [k / 1024 for k in ks]
    n = len(ks)
    s1, s2 = sum(ks), sum(k * k for k in ks)
    exact_mean = Fraction(s1, n * 1024)
    exact_var = Fraction(n * s2 - s1 * s1, n * (n - 1) * 1024**2)
    mean, v = mean_and_variance(xs)
    assert abs(mean - float(exact_mean)) <= math.ulp(mean)
    assert abs(v - float(exact_var)) / float(exact_var) < 1e-12


def test_variance_errors():
    with pytest.raises(InsufficientDataError):
        mean_and_variance([1.0])
    with pytest.raises(ValueError):
        mean_and_variance([1.0, math.nan])


samples = st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=2, max_size=30)


@given(samples, samples)
def test_welch_antisymmetric(a, b):
    r1, r2 = welch_t(a, b), welch_t(b, a)
    if r1.degenerate:
        return
    assert r1.t_statistic == pytest.approx(-r2.t_statistic)
    assert r1.p_value == pytest.approx(r2.p_value)
    assert 0.0 <= r1.p_value <= 1.0


@given(samples, samples, st.sampled_from([1e-3, 2.0, 1e4]), st.floats(-1e3, 1e3))
def test_welch_affine_invariant(a, b, k, c):
    r1 = welch_t(a, b)
    if r1.degenerate or abs(r1.t_statistic) > 1e6 or min(mean_and_variance(a)[1],
                                                          mean_and_variance(b)[1]) < 1e-6:
        return
    r2 = welch_t([k * x + c for x in a], [k * x + c for x in b])
    assert r2.t_statistic == pytest.approx(r1.t_statistic, rel=1e-6, abs=1e-9)


def test_degenerate_cases():
    same = welch_t([6.0, 6.0, 6.0], [6.0, 6.0])
    assert same.degenerate and same.t_statistic == 0.0 and same.p_value == 1.0
    diff = welch_t([6.0, 6.0], [12.0, 12.0])
    assert diff.degenerate and diff.t_statistic == -math.inf and diff.p_value == 0.0
    js = diff.to_json("block_time_s")
    assert js["t_statistic"] is None and js["degenerate"] is True
    assert "degenerate" not in welch_t([1, 2], [3, 5]).to_json("x")


def test_pooled_equal_sizes_matches_welch_t():
    a, b = [1.0, 4.0, 2.0, 8.0], [3.0, 3.5, 9.0, 7.0]
    assert welch_t(a, b, pooled=True).t_statistic == pytest.approx(welch_t(a, b).t_statistic)
    assert welch_t(a, b, pooled=True).df == 6.0


def test_rankdata_and_spearman():
    assert rankdata([10, 20, 20, 5]) == [2.0, 3.5, 3.5, 1.0]
    assert spearman([1, 2, 3, 4], [10, 20, 30, 1000]) == 1.0
    assert spearman([1, 2, 3], [3, 2, 1]) == -1.0
    assert math.isnan(spearman([1, 2, 3], [5, 5, 5]))
    with pytest.raises(InsufficientDataError):
        spearman([1], [1])
