import io
import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from molab.catalog import character_over_n_alpha, eta_family, g_family, mobius_over_n, mobius_raw
from molab.core import build_spf_sieve, sieve_values
from molab.errors import DomainError, NonFiniteError, PoleError, RangeError
from molab.series import (
    PartialSumSeries,
    StepFunctionA,
    abel_weighted_sum,
    alternating_sign,
    checkpoint_grid,
    closed_form_eta_series,
    closed_form_gk_series,
    compensated_sum,
    direct_weighted_sum,
    gk_raw,
    partial_sums,
    partial_sums_of_values,
    raw_counting_sums,
)
from molab.zeta import zeta

RHO1 = complex(0.5, 14.134725141734693)


def test_compensated_sum_small_terms():
    terms = [1.0] + [1e-16] * 10**4
    exact = Fraction(1) + 10**4 * Fraction(1e-16)
    got = compensated_sum(terms)
    assert abs(Fraction(got.real) - exact) / exact <= Fraction(1, 10**15)


def test_compensated_sum_trivial():
    assert compensated_sum([]) == 0
    assert compensated_sum([complex(1, 2), complex(-1, -2)]) == 0


def test_compensated_sum_nonfinite():
    with pytest.raises(NonFiniteError):
        compensated_sum([1e308, 1e308])


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-1e6, 1e6, allow_nan=False), max_size=300))
def test_compensated_sum_matches_fsum(xs):
    assert compensated_sum(xs).real == pytest.approx(math.fsum(xs), abs=1e-9)


def test_checkpoint_grid():
    g = checkpoint_grid(10**6)
    assert g[0] == 1 and g[-1] == 10**6
    assert all(10**j in set(g.tolist()) for j in range(7))
    assert np.all(np.diff(g) > 0)
    assert np.all(g[1:] <= np.maximum(g[:-1] + 1, np.ceil(g[:-1] * 1.05)))
    assert checkpoint_grid(12345)[-1] == 12345


def test_partial_sums_three_terms():
    s = partial_sums(mobius_over_n().spec, 3)
    assert s.final == pytest.approx(1 / 6, abs=1e-16)


def test_mertens_exact(spf_1e6):
    s = partial_sums(mobius_raw().spec, 10**4, spf_1e6)
    assert s.at(10) == -1 and s.at(100) == 1 and s.at(1000) == 2 and s.at(10**4) == -23


def test_eta_series_at_2(spf_1e6):
    s = partial_sums(eta_family(2).spec, 10**6, spf_1e6)
    assert abs(s.final - math.pi**2 / 12) <= 1e-6


def test_g9_series_at_2(spf_1e6):
    s = partial_sums(g_family(9, 2).spec, 10**6, spf_1e6)
    assert abs(s.final - (8 / 9) * math.pi**2 / 6) <= 1e-5


def test_checkpoint_consistency():
    spec = eta_family(RHO1).spec
    s = partial_sums(spec, 50000)
    v = sieve_values(spec, 50000)
    for x in (1, 2, 10, 999, 31415, 50000):
        if x not in set(s.x.tolist()):
            continue
        re, im = math.fsum(v[1 : x + 1].real.tolist()), math.fsum(v[1 : x + 1].imag.tolist())
        got = s.at(x)
        assert abs(got.real - re) <= 4 * math.ulp(max(abs(re), 1e-300)) + 1e-300
        assert abs(got.imag - im) <= 4 * math.ulp(max(abs(im), 1e-300)) + 1e-300


def test_interval_sup_inf_match_brute_force():
    spec = eta_family(RHO1).spec
    s = partial_sums(spec, 20000)
    S = np.abs(np.cumsum(sieve_values(spec, 20000)[1:]))
    x = s.x
    for i in range(1, x.size):
        seg = S[x[i - 1] : x[i]]
        assert s.interval_sup[i] == pytest.approx(seg.max(), rel=1e-12)
        assert s.interval_inf[i] == pytest.approx(seg.min(), rel=1e-9, abs=1e-15)


def test_threads_and_segments_do_not_change_result(spf_1e6):
    spec = eta_family(RHO1).spec
    a = partial_sums(spec, 300000, spf_1e6, threads=1)
    b = partial_sums(spec, 300000, spf_1e6, threads=3, segment_size=12345)
    assert a == b


def test_partial_sums_of_values_matches():
    spec = mobius_over_n().spec
    v = sieve_values(spec, 5000)
    assert partial_sums_of_values(spec.name, v) == partial_sums(spec, 5000)


def test_csv_roundtrip():
    s = partial_sums(mobius_over_n().spec, 1000)
    buf = io.StringIO()
    s.write_csv(buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "x,re,im"
    last = lines[-1].split(",")
    assert int(last[0]) == 1000 and float(last[1]) == s.final.real


def test_at_requires_checkpoint():
    s = partial_sums(mobius_over_n().spec, 1000)
    with pytest.raises(RangeError):
        s.at(999)


def test_counting_function_examples():
    A = raw_counting_sums(alternating_sign(), 10)
    assert A(5) == 1
    A4 = raw_counting_sums(gk_raw(4), 10)
    assert A4(7) == 3 and A4(8) == 0
    with pytest.raises(RangeError):
        A4(11)


@pytest.mark.parametrize("k", range(2, 31))
def test_gk_counting_function_bounded(k):
    A = raw_counting_sums(gk_raw(k), 10**5)
    vals = A(np.arange(0, 10**5 + 1))
    assert vals.dtype.kind == "i"
    assert vals.min() == 0 and vals.max() == k - 1
    # independent definition by divisibility
    n = np.arange(1, 10**5 + 1)
    direct = np.concatenate(([0], np.cumsum(np.where(n % k == 0, 1 - k, 1))))
    assert np.array_equal(vals, direct)


def test_tabulated_counting_function():
    A = raw_counting_sums(lambda n: np.where(n % 3 == 0, 2, -1), 100)
    assert isinstance(A, StepFunctionA)
    assert A(3) == 0 and A(4) == -1 and A(100) == -1


def test_abel_three_terms():
    A = raw_counting_sums(alternating_sign(), 10)
    assert abel_weighted_sum(A, 1, 3) == pytest.approx(5 / 6, rel=1e-15)


def test_abel_eta_2():
    A = raw_counting_sums(alternating_sign(), 10**4)
    a = abel_weighted_sum(A, 2, 10**4)
    d = direct_weighted_sum(alternating_sign(), 2, 10**4)
    assert abs(a - d) <= 1e-12


def test_abel_g9_at_zero():
    A = raw_counting_sums(gk_raw(9), 10**4)
    a = abel_weighted_sum(A, RHO1, 10**4)
    d = direct_weighted_sum(gk_raw(9), RHO1, 10**4)
    assert abs(a - d) <= 1e-10


SEQS = [alternating_sign(), gk_raw(2), gk_raw(4), gk_raw(9), gk_raw(25), character_over_n_alpha(3).raw_sequence,
        character_over_n_alpha(4).raw_sequence]


@settings(max_examples=50, deadline=None)
@given(
    st.sampled_from(SEQS),
    st.floats(0.1, 3.0),
    st.floats(-30, 30),
    st.integers(1, 10**4),
)
def test_abel_identity_property(seq, re, im, x):
    alpha = complex(re, im)
    a = abel_weighted_sum(raw_counting_sums(seq, x), alpha, x)
    d = direct_weighted_sum(seq, alpha, x)
    assert abs(a - d) <= max(1e-10 * abs(d), 1e-12)


def test_abel_domain():
    A = raw_counting_sums(alternating_sign(), 10)
    with pytest.raises(DomainError):
        abel_weighted_sum(A, 0, 5)


def test_closed_forms():
    assert closed_form_eta_series(2) == pytest.approx(math.pi**2 / 12, rel=1e-14)
    assert abs(closed_form_eta_series(RHO1)) <= 1e-9
    assert closed_form_eta_series(3) == pytest.approx(0.75 * float(mpmath.zeta(3)), rel=1e-13)
    assert closed_form_gk_series(9, 2) == pytest.approx((8 / 9) * math.pi**2 / 6, rel=1e-14)
    assert abs(closed_form_gk_series(4, RHO1)) <= 1e-9
    for alpha in (2, 3, complex(0.7, 5), complex(1.5, -20)):
        assert closed_form_gk_series(2, alpha) == closed_form_eta_series(alpha)
    with pytest.raises(PoleError):
        closed_form_eta_series(1)
    with pytest.raises(DomainError):
        closed_form_gk_series(9, -1)


def test_closed_form_uses_supplied_zeta():
    assert closed_form_eta_series(2, zeta_eval=lambda s: 2.0) == pytest.approx(1.0)


@pytest.mark.parametrize("alpha", [2, 3, complex(1.5, 1)])
def test_convergence_to_closed_form(alpha):
    N = 10**5
    tail = N ** (1 - alpha.real if isinstance(alpha, complex) else 1 - alpha) / (
        (alpha.real if isinstance(alpha, complex) else alpha) - 1
    )
    for entry, k in ((eta_family(alpha), 2), (g_family(9, alpha), 9)):
        s = partial_sums(entry.spec, N)
        assert abs(s.final - closed_form_gk_series(k, alpha)) <= (k - 1) * tail + 1e-13
    s = partial_sums(__import__("molab").power_over_n(alpha).spec, N)
    assert abs(s.final - zeta(alpha)) <= tail
