import io
import json
import math

import numpy as np
import pytest
from conftest import primes_upto
from hypothesis import given, settings
from hypothesis import strategies as st

from molab.catalog import (
    character_over_n_alpha,
    eta_family,
    from_prime_power_table,
    g_family,
    liouville_over_n,
    mobius_over_n,
    power_over_n,
)
from molab.core import Envelope, MultiplicativeSpec, TailCertificate, build_spf_sieve, sieve_values
from molab.errors import PreconditionError, UncertifiableError
from molab.mo import (
    Weight,
    absolute_convergence_diag,
    check_condition_i,
    check_condition_ii,
    distance,
    euler_factor,
    euler_factor_closed,
    is_multiplicative_bruteforce,
    metric_axiom_check,
    mo_check,
    omega_scan,
    perturb,
    random_spec,
    transfer_experiment,
)
from molab.series import partial_sums

RHO1 = complex(0.5, 14.134725141734693)
PRIME_POWERS_TO_30 = [2, 3, 4, 5, 7, 8, 9, 11, 13, 16, 17, 19, 23, 25, 27, 29]


def gk_values(k, N):
    n = np.arange(N + 1)
    v = np.where(n % k == 0, 1 - k, 1).astype(np.complex128)
    v[0] = 0
    return v


# --- Euler factors -----------------------------------------------------------


def test_euler_factor_examples():
    r = euler_factor(mobius_over_n(), 5)
    assert r.value == pytest.approx(0.8, rel=1e-15) and r.tail_bound == 0
    r = euler_factor(eta_family(2), 2)
    assert abs(r.value - 2 / 3) <= r.tail_bound + 1e-15
    r = euler_factor(g_family(4, 2), 2)
    assert abs(r.value - 1) <= r.tail_bound + 1e-15
    assert r.method == "truncated_geometric" and r.tail_bound <= 1e-12


def test_euler_factor_tail_is_minimal():
    spec = liouville_over_n().spec
    r = euler_factor(spec, 3, target_tail=1e-10)
    bound = lambda K: abs(spec.value(3, K + 1)) / (1 - 1 / 3)  # noqa: E731
    assert bound(r.K) <= 1e-10 < bound(r.K - 1)


def test_euler_factor_closed_examples():
    assert euler_factor_closed(liouville_over_n(), 2).value == pytest.approx(2 / 3)
    for alpha in (2, complex(0.3, 40)):
        v = euler_factor_closed(eta_family(alpha), 7).value
        assert v == pytest.approx(1 / (1 - 7 ** -complex(alpha)), rel=1e-13) and v != 0
    assert euler_factor_closed(g_family(9, 2), 5).value == pytest.approx(1 / (1 - 5**-2.0))
    # generic completely multiplicative spec without a catalog closed form
    bare = character_over_n_alpha(3, alpha=1).spec
    assert euler_factor_closed(bare, 5).value == pytest.approx(1 / (1 + 1 / 5))


def test_uncertifiable():
    spec = MultiplicativeSpec("no tail", lambda p, k: (p ** -k.astype(float)).astype(complex))
    with pytest.raises(UncertifiableError):
        euler_factor(spec, 3)
    with pytest.raises(UncertifiableError):
        euler_factor_closed(spec, 3)


def _families(alpha):
    fams = [(eta_family(alpha), None), (power_over_n(alpha), None)]
    fams += [(g_family(k, alpha), k) for k in (2, 4, 9, 25)]
    fams += [(character_over_n_alpha(q, alpha=alpha), None) for q in (3, 4)]
    return fams


@settings(max_examples=15, deadline=None)
@given(st.floats(0.05, 3.0), st.floats(-30, 30))
def test_closed_forms_match_truncation(re, im):
    alpha = complex(re, im)
    for entry, _ in _families(alpha):
        for p in (2, 3, 5, 7, 97, 997):
            t = euler_factor(entry, p, target_tail=1e-13)
            c = euler_factor_closed(entry, p)
            assert abs(t.value - c.value) <= t.tail_bound + 1e-12


@pytest.mark.parametrize("entry", [liouville_over_n(), power_over_n(1.5), character_over_n_alpha(4, alpha=0.7)])
def test_cm_factor_formula(entry):
    for p in primes_upto(200):
        fp = entry.spec.value(p, 1)
        assert abs(euler_factor(entry, p).value - 1 / (1 - fp)) <= 1e-12


# --- condition (ii) ----------------------------------------------------------


def test_condition_ii_mobius():
    r = check_condition_ii(mobius_over_n(), 10**5)
    assert r.verdict == "holds_up_to_pmax" and r.min_abs_factor == 0.5 and r.min_factor_prime == 2
    assert r.complete_via_closed_form


def test_condition_ii_eta_at_2alpha_eq_2():
    r = check_condition_ii(eta_family(1 + 2j * math.pi / math.log(2)), 10)
    assert r.verdict == "fails_at_witness" and r.witness_prime == 2


def test_condition_ii_trivial_example():
    f = from_prime_power_table("f(2)=-1", {(2, 1): -1})
    r = check_condition_ii(f, 50)
    assert r.verdict == "fails_at_witness" and r.witness_prime == 2 and r.min_abs_factor == 0


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 200))
def test_fails_verdict_always_has_witness(pm):
    for f in (from_prime_power_table("z", {(3, 1): -1}), mobius_over_n().spec):
        r = check_condition_ii(f, pm)
        assert (r.verdict == "fails_at_witness") == (r.witness_prime is not None)


# --- condition (i) -----------------------------------------------------------


def test_condition_i_verdicts(spf_1e6):
    assert check_condition_i(mobius_over_n(), 10**6, spf_1e6).verdict == "consistent_with_zero"
    assert check_condition_i(eta_family(2), 10**6, spf_1e6).verdict == "inconsistent"
    r = check_condition_i(eta_family(RHO1), 10**6, spf_1e6)
    assert r.verdict == "consistent_with_zero" and 0.3 <= r.fitted_decay_exponent <= 0.7
    assert check_condition_i(character_over_n_alpha(4), 10**6, spf_1e6).verdict == "inconsistent"


def test_condition_i_small_limit_rejected():
    with pytest.raises(ValueError):
        check_condition_i(mobius_over_n(), 100)


def test_mo_check_report_json(spf_1e6):
    r = mo_check(mobius_over_n(), 10**5, 1000, table=spf_1e6)
    d = json.loads(r.to_json())
    assert d["schema_version"] == 1 and d["condition_i"]["verdict"] == "consistent_with_zero"
    assert set(d["condition_i"]["S_at_limit"]) == {"re", "im"} and not r.failed


# --- absolute convergence ----------------------------------------------------


def test_abs_convergence_mobius():
    r = absolute_convergence_diag(mobius_over_n(), 10**4, 5, 10**5)
    assert r.prime_power_sum == pytest.approx(math.fsum(1 / p for p in primes_upto(10**4)), rel=1e-13)
    assert r.prime_trend == "divergent" and r.n_trend == "divergent"


def test_abs_convergence_inverse_square():
    r = absolute_convergence_diag(power_over_n(2), 10**4, 30, 10**5)
    assert r.prime_trend == "convergent" and r.n_trend == "convergent"
    assert r.n_sum == pytest.approx(math.pi**2 / 6, abs=1.1e-5)
    inc = [w[2] for w in r.n_windows[5:] if w[1] - w[0] + 1 == w[0]]  # complete windows only
    ratios = np.array(inc[1:]) / np.array(inc[:-1])
    assert np.all(np.abs(ratios - 0.5) < 0.05)  # dyadic increments of a 1/x tail halve


def test_abs_convergence_eta_at_zero():
    r = absolute_convergence_diag(eta_family(RHO1), 10**4, 30, 10**4)
    ps = primes_upto(10**4)
    oracle = math.fsum((1 - p**-15) / (math.sqrt(p) - 1) for p in ps)  # sum_{k<=30} p^-k/2
    assert r.prime_power_sum == pytest.approx(oracle, rel=1e-9)
    assert r.prime_trend == "divergent"


# --- multiplicativity ----------------------------------------------------------


def test_multiplicativity_examples():
    r = is_multiplicative_bruteforce(gk_values(6, 100))
    assert not r.passed and r.counterexample == (2, 3)
    assert is_multiplicative_bruteforce(gk_values(8, 10**4)).passed
    assert is_multiplicative_bruteforce(gk_values(12, 100)).counterexample == (3, 4)


def test_multiplicativity_criterion_k_to_30():
    passing = [k for k in range(2, 31) if is_multiplicative_bruteforce(gk_values(k, 10**4)).passed]
    assert passing == PRIME_POWERS_TO_30


def test_multiplicativity_precondition():
    v = gk_values(6, 10) * 2
    with pytest.raises(PreconditionError):
        is_multiplicative_bruteforce(v)


def test_multiplicativity_counterexample_is_first():
    v = gk_values(30, 200)
    r = is_multiplicative_bruteforce(v)
    # brute force in lexicographic order
    first = next(
        (m, n) for m in range(1, 201) for n in range(m, 201) if m * n <= 200 and math.gcd(m, n) == 1 and v[m * n] != v[m] * v[n]
    )
    assert r.counterexample == first


# --- distance ------------------------------------------------------------------


def test_distance_examples():
    mu = mobius_over_n().spec
    assert distance(mu, mu, 1000, 10).lower_bound == 0
    g = perturb(mu, {(2, 1): 0})
    d = distance(mu, g, 1000, 10)
    assert d.lower_bound == 0.5 and d.tail_bound == 0
    g3 = perturb(mu, {(3, 1): -1})
    assert distance(mu, g3, 100, 5).lower_bound == pytest.approx(2 / 3, rel=1e-15)
    assert distance(mu, perturb(mu, {}), 100, 5).lower_bound == 0


def test_distance_mobius_liouville(spf_1e6):
    d = distance(mobius_over_n().spec, liouville_over_n().spec, 10**6, 60, spf_1e6)
    oracle = math.fsum(1 / (p * (p - 1)) for p in spf_1e6.primes.tolist())
    assert abs(d.lower_bound - oracle) <= 1e-10
    assert d.tail_bound is not None and d.tail_bound <= 2e-6
    # the true remainder sum_{p > P} 1/(p(p-1)) is below the certified tail
    assert 1 / (10**6 - 1) <= 1.01 * d.tail_bound


def test_distance_tail_unknown_without_envelope():
    bare = MultiplicativeSpec("bare", lambda p, k: np.where(k == 1, -1.0 / p, 0).astype(complex), finite_depth=1)
    assert distance(mobius_over_n().spec, bare, 100, 3).tail_bound is None


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 300), st.integers(1, 10), st.integers(0, 300), st.integers(0, 5))
def test_distance_monotone(p, k, dp, dk):
    f, g = eta_family(complex(0.8, 3)).spec, liouville_over_n().spec
    a = distance(f, g, p, k).lower_bound
    assert distance(f, g, p + dp, k).lower_bound >= a
    assert distance(f, g, p, k + dk).lower_bound >= a


def test_metric_axioms_random_triples():
    rng = np.random.default_rng(20240601)
    for _ in range(50):
        f, g, h = (random_spec(rng) for _ in range(3))
        assert metric_axiom_check(f, g, h, 50, 5).passed


def test_metric_axioms_catalog_triple():
    v = metric_axiom_check(mobius_over_n(), liouville_over_n(), eta_family(2), 500, 20)
    assert v.passed and v.d_fg > 0


# --- perturbation and transfer --------------------------------------------------


def test_perturb_keeps_certificates():
    lam = liouville_over_n().spec
    g = perturb(lam, {(2, 3): 5.0, (3, 1): 0.1})
    assert g.value(2, 3) == 5 and g.value(2, 4) == lam.value(2, 4) and g.value(3, 1) == 0.1
    assert g.tail(2).start == 4 and g.tail(5) == lam.tail(5)
    assert g.prime_signature is None and g.envelope.const >= 5 * 8
    r = euler_factor(g, 2)
    direct = 1 - 0.5 + 0.25 + 5 + sum((-0.5) ** k for k in range(4, 80))
    assert abs(r.value - direct) <= r.tail_bound + 1e-12


def test_transfer_mobius_zero_at_2(spf_1e6):
    f = mobius_over_n().spec
    r = transfer_experiment(f, {(2, 1): 0}, 10**6, p_max=10**4, table=spf_1e6)
    assert r.status == "ok" and r.distance.lower_bound == 0.5
    assert r.g_condition_i.verdict == "consistent_with_zero"
    assert abs(r.g_condition_i.S_at_limit) <= 10 * abs(r.f_condition_i.S_at_limit) + 1e-3
    assert r.local_factor_lower_bound > 0


def test_transfer_mobius_one_at_2(spf_1e6):
    r = transfer_experiment(mobius_over_n(), {(2, 1): 1}, 10**6, p_max=10**3, table=spf_1e6)
    assert r.g_condition_i.verdict == "consistent_with_zero" and r.g_condition_ii.verdict == "holds_up_to_pmax"


def test_transfer_empty_overrides_identical(spf_1e6):
    f = mobius_over_n().spec
    r = transfer_experiment(f, {}, 10**5, p_max=10**3, table=spf_1e6)
    assert r.g_condition_i == check_condition_i(f, 10**5, spf_1e6)
    assert r.g_condition_i == r.f_condition_i
    assert r.distance.lower_bound == 0


def test_transfer_reports_violations(spf_1e6):
    # killing the Euler factor at 2 violates the hypothesis on g
    r = transfer_experiment(mobius_over_n(), {(2, 1): -1}, 10**5, p_max=100, table=spf_1e6)
    assert r.status == "hypothesis-violated"
    assert any("g condition (ii)" in v for v in r.hypothesis_violations)
    # f itself not MO
    r = transfer_experiment(eta_family(2), {}, 10**5, p_max=100, table=spf_1e6)
    assert r.status == "hypothesis-violated"


# --- scans ---------------------------------------------------------------------


def test_weights():
    x = np.array([16.0])
    assert Weight.parse("xlogx")(x)[0] == pytest.approx(16 * math.log(16))
    assert Weight.parse("xloglog2")(x)[0] == pytest.approx(16 * math.log(math.log(16)) ** 2)
    assert Weight.parse("pow:0.5")(x)[0] == 4
    assert Weight.parse("xlogpow:0.5")(x)[0] == pytest.approx(16 * math.log(16) ** 0.5)
    with pytest.raises(ValueError):
        Weight.parse("bogus")


def test_scan_matches_brute_force():
    spec = eta_family(RHO1).spec
    N = 40000
    rep = omega_scan(spec, N, "pow:0.5", x_min=3, segment_size=1000)
    S = np.abs(np.cumsum(sieve_values(spec, N)[1:]))
    x = np.arange(1, N + 1)
    w = np.sqrt(x) * S
    for lo, hi, sup, at in rep.windows:
        seg = w[lo - 1 : hi]
        assert sup == pytest.approx(seg.max(), rel=1e-10)
        assert lo <= at <= hi
    assert rep.windows[0][0] == 3 and rep.windows[-1][1] == N
    assert rep.tail_inf[-1] == rep.windows[-1][2]
    assert rep.global_inf_of_window_sups == min(s for _, _, s, _ in rep.windows)


def test_scan_eta_zero_band(spf_1e6):
    rep = omega_scan(eta_family(RHO1), 10**6, "pow:0.5", table=spf_1e6)
    sups = [s for _, _, s, _ in rep.windows]
    assert min(sups) >= 1e-3 and max(sups) <= 1e3


def test_scan_liouville_weight_x(spf_1e6):
    rep = omega_scan(liouville_over_n(), 10**6, "pow:1", table=spf_1e6)
    sups = [s for _, _, s, _ in rep.windows]
    # x |S(x)| does not decay to 0 along the windows
    assert min(sups[-5:]) >= 0.1 * max(sups[:5])


def test_scan_csv_and_threads():
    a = omega_scan(mobius_over_n(), 10**5, "xlogx", threads=1)
    b = omega_scan(mobius_over_n(), 10**5, "xlogx", threads=3, segment_size=4096)
    assert a.windows == b.windows
    buf = io.StringIO()
    a.write_csv(buf)
    assert buf.getvalue().splitlines()[0] == "window_lo,window_hi,sup_weighted,at_x"


def test_scan_limit_precondition():
    with pytest.raises(ValueError):
        omega_scan(mobius_over_n(), 1000, "xlogx")


# --- scaling -------------------------------------------------------------------


def _scaled(spec, c):
    return MultiplicativeSpec(
        f"{c}*{spec.name}",
        lambda p, k: c * spec.prime_power_value(p, k),
        tail=spec.tail,
        finite_depth=spec.finite_depth,
        envelope=None if spec.envelope is None else Envelope(spec.envelope.sigma, abs(c) * spec.envelope.const),
    )


@settings(max_examples=20, deadline=None)
@given(st.floats(0.1, 10), st.floats(0, 2 * math.pi))
def test_scaling_is_linear(r, th):
    c = complex(r * math.cos(th), r * math.sin(th))
    # scale every prime-power value of a finitely supported spec by c; the
    # level-one values of the product then scale by c, so use one prime
    base = from_prime_power_table("b", {(2, 1): 0.5, (2, 2): -0.25, (2, 3): 0.125})
    scaled = _scaled(base, c)
    sb, ss = partial_sums(base, 100), partial_sums(scaled, 100)
    # on powers of 2 alone the value is f(2^k); S - 1 scales by c
    np.testing.assert_allclose(ss.S - 1, c * (sb.S - 1), rtol=1e-12, atol=1e-15)
    zero = from_prime_power_table("z", {})
    assert distance(zero, scaled, 10, 5).lower_bound == pytest.approx(abs(c) * distance(zero, base, 10, 5).lower_bound)
    e0, e1 = euler_factor(base, 2), euler_factor(scaled, 2)
    assert e1.value - 1 == pytest.approx(c * (e0.value - 1), rel=1e-12)
