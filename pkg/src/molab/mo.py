"""Numerical checks of the MO conditions and related machinery.

A multiplicative f is MO when (i) ``sum f(n) = 0`` and (ii) every Euler
factor ``sum_k f(p^k)`` is non-zero.  Neither can be decided from finitely
many values, so everything here produces *evidence* with explicit
thresholds, never proofs:

* condition (ii) is certified prime by prime up to ``p_max`` (plus a flag
  when a closed form settles all remaining primes);
* condition (i) is judged from checkpointed partial sums and a fitted decay
  exponent;
* Omega-type lower bounds are reported as raw windowed suprema.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Optional, Union

import numpy as np

from ._kernels import NeumaierState
from .catalog import CatalogEntry, from_prime_power_table
from .core import (
    DEFAULT_SEGMENT,
    Envelope,
    MultiplicativeSpec,
    SpfTable,
    TailCertificate,
    build_spf_sieve,
    iter_value_segments,
    sieve_values,
)
from .errors import DivergenceError, PreconditionError, UncertifiableError
from .series import PartialSumSeries, iter_prefix_segments, partial_sums

SCHEMA_VERSION = 1

#: |factor| at or below tail_bound + ZERO_TOL counts as a vanishing factor.
ZERO_TOL = 1e-12
DEFAULT_TAIL = 1e-12
MAX_EULER_DEPTH = 1 << 20

# condition (i) thresholds
CONSISTENT_SCALE = 10.0
CONSISTENT_POWER = 0.2
INCONSISTENT_MARGIN = 5.0
INCONSISTENT_MAX_EXPONENT = 0.02
FIT_WINDOW_RATIO = math.sqrt(2.0)

SpecLike = Union[MultiplicativeSpec, CatalogEntry]


def _split(f: SpecLike):
    if isinstance(f, CatalogEntry):
        return f.spec, f
    return f, None


def _cplx(z: complex) -> dict:
    return {"re": float(z.real), "im": float(z.imag)}


def _jsonable(obj):
    if isinstance(obj, complex):
        return _cplx(obj)
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, float) and not math.isfinite(obj):
        return None if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    return obj


class _Report:
    def to_dict(self) -> dict:
        d = _jsonable(asdict(self))
        d["schema_version"] = SCHEMA_VERSION
        return d

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=kw.pop("indent", 2), **kw)


# --- Euler factors -----------------------------------------------------------


@dataclass(frozen=True)
class EulerFactorReport(_Report):
    p: int
    value: complex
    K: int
    tail_bound: float
    method: str  # "closed_form" | "truncated_geometric"


def euler_factor(f: SpecLike, p: int, target_tail: float = DEFAULT_TAIL) -> EulerFactorReport:
    """Truncated ``sum_{k=0}^K f(p^k)`` with a certified bound on the rest.

    Uses ``|rest| <= |f(p^(K+1))| / (1 - r)`` from the tail
    certificate, with the smallest admissible K.  Finitely supported specs are
    summed exactly.  Catalog entries without a certificate fall back to their
    closed form.
    """
    spec, entry = _split(f)
    p = int(p)
    if target_tail <= 0:
        raise ValueError("target_tail must be > 0")
    if spec.finite_depth is not None:
        K = spec.finite_depth
        vals = spec.values(np.full(K, p), np.arange(1, K + 1)) if K else np.zeros(0, np.complex128)
        return EulerFactorReport(p, _sum_with_one(vals), K, 0.0, "truncated_geometric")
    if spec.tail is None:
        if entry is not None and entry.euler_factor is not None:
            return euler_factor_closed(entry, p)
        raise UncertifiableError(f"{spec.name}: no tail certificate and no closed form at p={p}")
    cert = spec.tail(p)
    denom = 1.0 - cert.ratio
    chunk = 64
    vals = np.zeros(0, np.complex128)
    kmin = max(0, cert.start - 1)
    while True:
        have = vals.size
        new = spec.values(np.full(chunk, p), np.arange(have + 1, have + chunk + 1))
        vals = np.concatenate((vals, new))
        # bound for truncation depth K uses |f(p^(K+1))| = |vals[K]|
        bounds = np.abs(vals[kmin:]) / denom
        ok = np.flatnonzero(bounds <= target_tail)
        if ok.size:
            K = kmin + int(ok[0])
            return EulerFactorReport(p, _sum_with_one(vals[:K]), K, float(bounds[ok[0]]), "truncated_geometric")
        if vals.size >= MAX_EULER_DEPTH:
            raise UncertifiableError(f"{spec.name}: tail at p={p} not below {target_tail} within {vals.size} terms")
        chunk = min(2 * chunk, MAX_EULER_DEPTH - vals.size)


def _sum_with_one(vals: np.ndarray) -> complex:
    state = NeumaierState()
    state.add(np.concatenate(([1.0 + 0j], vals)))
    return state.total


def euler_factor_closed(f: SpecLike, p: int) -> EulerFactorReport:
    """Exact Euler factor from a catalog closed form, or ``1 / (1 - f(p))``
    for a completely multiplicative spec (which needs ``|f(p)| < 1``)."""
    spec, entry = _split(f)
    p = int(p)
    if entry is not None and entry.euler_factor is not None:
        value = complex(entry.euler_factor(p))
    elif spec.completely_multiplicative:
        fp = spec.value(p, 1)
        if abs(fp) >= 1:
            raise DivergenceError(f"|f({p})| >= 1: geometric Euler factor diverges")
        value = 1 / (1 - fp)
    else:
        raise UncertifiableError(f"{spec.name}: no closed-form Euler factor")
    return EulerFactorReport(p, value, 0, 0.0, "closed_form")


# --- condition (ii) ----------------------------------------------------------


@dataclass(frozen=True)
class ConditionII(_Report):
    p_max: int
    min_abs_factor: float
    min_factor_prime: int
    witness_prime: Optional[int]
    verdict: str  # holds_up_to_pmax | fails_at_witness | inconclusive
    min_margin: float
    primes_checked: int
    complete_via_closed_form: bool


def _primes_upto(n: int, table: Optional[SpfTable]) -> np.ndarray:
    if table is None or table.limit < n:
        table = build_spf_sieve(max(n, 2))
    pr = table.primes
    return pr[pr <= n]


def check_condition_ii(
    f: SpecLike,
    p_max: int,
    target_tail: float = DEFAULT_TAIL,
    zero_tol: float = ZERO_TOL,
    table: Optional[SpfTable] = None,
) -> ConditionII:
    """Certify ``sum_k f(p^k) != 0`` for every prime ``p <= p_max``.

    A factor counts as vanishing when ``|value| <= tail_bound + zero_tol``;
    the first such prime is the witness.  For catalog entries with a closed
    Euler factor the answer is complete for all primes (their non-vanishing
    beyond the exceptional primes is analytic), recorded in
    ``complete_via_closed_form``.
    """
    spec, entry = _split(f)
    if p_max < 2:
        raise ValueError("p_max must be >= 2")
    primes = _primes_upto(int(p_max), table)
    min_abs, min_p, min_margin = math.inf, 2, math.inf
    witness = None
    for p in primes.tolist():
        rep = euler_factor(f, p, target_tail)
        a = abs(rep.value)
        margin = a - rep.tail_bound
        if a < min_abs:
            min_abs, min_p = a, p
        min_margin = min(min_margin, margin)
        if witness is None and a <= rep.tail_bound + zero_tol:
            witness = p
    if witness is not None:
        verdict = "fails_at_witness"
    elif min_margin > 0:
        verdict = "holds_up_to_pmax"
    else:
        verdict = "inconclusive"
    closed = entry is not None and entry.euler_factor is not None
    return ConditionII(int(p_max), min_abs, min_p, witness, verdict, min_margin, int(primes.size), closed)


# --- condition (i) -----------------------------------------------------------


@dataclass(frozen=True)
class ConditionI(_Report):
    S_at_limit: complex
    fitted_decay_exponent: float
    fit_window: tuple
    verdict: str  # consistent_with_zero | inconsistent | inconclusive
    threshold: float
    last_decade_min_abs: float
    last_decade_spread: float
    fit_points: int


def window_suprema(series: PartialSumSeries, x_lo: int, x_hi: int, ratio: float = FIT_WINDOW_RATIO):
    """Sup of ``|S|`` over consecutive windows of geometric width ``ratio``.

    Windows are unions of whole checkpoint intervals ``(x[i-1], x[i]]`` lying
    in ``[x_lo, x_hi]``.  Returns arrays ``(centres, sups)`` where each centre
    is the geometric mean of the window bounds.
    """
    x = series.x
    centres, sups = [], []
    i = int(np.searchsorted(x, x_lo))  # first checkpoint >= x_lo; intervals start after it
    start = None
    cur = -math.inf
    for j in range(i + 1, x.size):
        if x[j] > x_hi:
            break
        if start is None:
            start = x[j - 1]
            cur = -math.inf
        cur = max(cur, series.interval_sup[j])
        if x[j] >= ratio * start:
            centres.append(math.sqrt(float(start) * float(x[j])))
            sups.append(cur)
            start = None
    return np.array(centres), np.array(sups)


def fit_decay_exponent(series: PartialSumSeries, fit_window: Optional[tuple] = None):
    """Least-squares slope c in ``sup |S| ~ x^-c`` over window suprema.

    Default window: the upper half of the checkpoints in log x, i.e.
    ``[sqrt(limit), limit]``.  Returns ``(c, (x_lo, x_hi), n_points)``.
    """
    if fit_window is None:
        fit_window = (math.isqrt(series.limit), series.limit)
    lo, hi = int(fit_window[0]), int(fit_window[1])
    centres, sups = window_suprema(series, lo, hi)
    good = sups > 0
    if good.sum() < 2:
        return math.nan, (lo, hi), int(good.sum())
    slope = np.polyfit(np.log(centres[good]), np.log(sups[good]), 1)[0]
    return float(-slope), (lo, hi), int(good.sum())


def condition_i_from_series(series: PartialSumSeries, fit_window: Optional[tuple] = None) -> ConditionI:
    limit = series.limit
    c, window, npts = fit_decay_exponent(series, fit_window)
    S = series.final
    threshold = CONSISTENT_SCALE * limit ** (-CONSISTENT_POWER)
    last = series.x >= limit / 10
    last_min = float(series.interval_inf[last].min())
    last_spread = float(series.interval_sup[last].max() - last_min)
    if abs(S) <= threshold and c > INCONSISTENT_MAX_EXPONENT:
        verdict = "consistent_with_zero"
    elif last_min >= INCONSISTENT_MARGIN * last_spread and c <= INCONSISTENT_MAX_EXPONENT:
        verdict = "inconsistent"
    else:
        verdict = "inconclusive"
    return ConditionI(S, c, window, verdict, threshold, last_min, last_spread, npts)


def check_condition_i(
    f: SpecLike,
    limit: int,
    table: Optional[SpfTable] = None,
    threads: int = 1,
    fit_window: Optional[tuple] = None,
) -> ConditionI:
    """Judge ``sum f(n) = 0`` from partial sums up to ``limit``.

    * consistent_with_zero: ``|S(limit)| <= 10 limit^-0.2`` and fitted c
      positive beyond the 0.02 noise band (so the two verdicts never overlap);
    * inconsistent: over the last decade ``min |S| >= 5 (max |S| - min |S|)``
      and c <= 0.02, i.e. S has settled on a non-zero value;
    * inconclusive otherwise.
    """
    spec, _ = _split(f)
    if limit < 1000:
        raise ValueError("limit must be >= 1000")
    series = partial_sums(spec, limit, table, threads=threads)
    return condition_i_from_series(series, fit_window)


@dataclass(frozen=True)
class MoCheckReport(_Report):
    function_name: str
    limit: int
    condition_i: ConditionI
    condition_ii: ConditionII
    threads: int = 1

    @property
    def failed(self) -> bool:
        return self.condition_i.verdict == "inconsistent" or self.condition_ii.verdict == "fails_at_witness"


def mo_check(
    f: SpecLike,
    limit: int,
    p_max: int,
    target_tail: float = DEFAULT_TAIL,
    threads: int = 1,
    table: Optional[SpfTable] = None,
) -> MoCheckReport:
    spec, _ = _split(f)
    if table is None:
        table = build_spf_sieve(max(limit, p_max))
    ci = check_condition_i(f, limit, table, threads)
    cii = check_condition_ii(f, p_max, target_tail, table=table)
    return MoCheckReport(spec.name, int(limit), ci, cii, threads)


# --- absolute convergence ----------------------------------------------------


@dataclass(frozen=True)
class AbsConvergenceReport(_Report):
    prime_power_sum: float
    n_sum: float
    prime_windows: list  # (lo, hi, increment) dyadic in p
    n_windows: list  # (lo, hi, increment) dyadic in n
    prime_trend: str  # "divergent" | "convergent"
    n_trend: str


def _dyadic_increments(idx: np.ndarray, terms: np.ndarray, lo: int, hi: int) -> list:
    out = []
    j = max(0, int(math.floor(math.log2(lo))))
    while (1 << j) <= hi:
        a, b = max(1 << j, lo), min((1 << (j + 1)) - 1, hi)
        sel = (idx >= a) & (idx <= b)
        out.append((a, b, math.fsum(terms[sel].tolist())))
        j += 1
    return out


def _trend(windows: list) -> str:
    """Divergent unless window increments shrink geometrically (median ratio < 0.75)."""
    inc = np.array([w[2] for w in windows if (w[1] - w[0] + 1) == w[0]])  # complete dyadic windows
    inc = inc[len(inc) // 2 :]
    if inc.size < 2 or np.all(inc == 0):
        return "convergent"
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = inc[1:] / inc[:-1]
    ratios = ratios[np.isfinite(ratios)]
    if ratios.size == 0:
        return "convergent"
    return "divergent" if float(np.median(ratios)) >= 0.75 else "convergent"


def absolute_convergence_diag(
    f: SpecLike,
    p_max: int,
    k_max: int,
    n_max: int,
    table: Optional[SpfTable] = None,
) -> AbsConvergenceReport:
    """Truncations of ``sum_p sum_k |f(p^k)|`` and ``sum_n |f(n)|`` with trends."""
    spec, _ = _split(f)
    if min(p_max, k_max, n_max) < 2:
        raise ValueError("bounds must be >= 2")
    if table is None or table.limit < max(p_max, n_max):
        table = build_spf_sieve(max(p_max, n_max))
    primes = _primes_upto(p_max, table)
    per_prime = np.zeros(primes.size)
    for k in range(1, k_max + 1):
        per_prime += np.abs(spec.values(primes, np.full(primes.size, k)))
    vals = np.abs(sieve_values(spec, n_max, table))[1:]
    n_idx = np.arange(1, n_max + 1)
    pw = _dyadic_increments(primes, per_prime, 2, p_max)
    nw = _dyadic_increments(n_idx, vals, 1, n_max)
    return AbsConvergenceReport(
        math.fsum(per_prime.tolist()), math.fsum(vals.tolist()), pw, nw, _trend(pw), _trend(nw)
    )


# --- multiplicativity --------------------------------------------------------


@dataclass(frozen=True)
class MultiplicativityVerdict(_Report):
    passed: bool
    counterexample: Optional[tuple]  # (m, n), first in lexicographic order
    N: int


def is_multiplicative_bruteforce(values, rtol: float = 1e-12) -> MultiplicativityVerdict:
    """Check ``v[mn] = v[m] v[n]`` for all coprime ``m <= n`` with ``mn <= N``.

    ``values[n]`` is the value at n for ``n = 1..N``; ``values[0]`` is ignored
    (the layout of :func:`molab.core.sieve_values`).
    """
    v = np.asarray(values, dtype=np.complex128)
    N = v.size - 1
    if N < 1 or v[1] != 1:
        raise PreconditionError("values[1] must equal 1")
    for m in range(1, math.isqrt(N) + 1):
        n = np.arange(m, N // m + 1, dtype=np.int64)
        n = n[np.gcd(n, m) == 1]
        lhs = v[m * n]
        rhs = v[m] * v[n]
        scale = np.maximum(np.abs(lhs), np.abs(rhs))
        bad = np.flatnonzero(np.abs(lhs - rhs) > rtol * scale)
        if bad.size:
            return MultiplicativityVerdict(False, (m, int(n[bad[0]])), N)
    return MultiplicativityVerdict(True, None, N)


# --- distance ----------------------------------------------------------------


@dataclass(frozen=True)
class DistanceResult(_Report):
    lower_bound: float
    tail_bound: Optional[float]  # certified bound on the omitted part, if available
    p_max: int
    k_max: int

    @property
    def upper_bound(self) -> Optional[float]:
        return None if self.tail_bound is None else self.lower_bound + self.tail_bound


def _level_tail(spec: MultiplicativeSpec, p: np.ndarray, k_max: int) -> Optional[np.ndarray]:
    """Per-prime bound on ``sum_{k > k_max} |f(p^k)|``."""
    if spec.finite_depth is not None:
        if spec.finite_depth <= k_max:
            return np.zeros(p.size)
        return None
    if spec.tail is not None:
        out = np.empty(p.size)
        nxt = np.abs(spec.values(p, np.full(p.size, k_max + 1)))
        for i, q in enumerate(p.tolist()):
            cert = spec.tail(q)
            if k_max + 1 < cert.start:
                return None
            out[i] = nxt[i] / (1 - cert.ratio)
        return out
    return None


def _sum_over_n_above(P: int, a: float) -> float:
    """``sum_{n > P} n^-a <= P^(1-a) / (a - 1)`` for a > 1."""
    return P ** (1 - a) / (a - 1)


def _prime_tail(spec: MultiplicativeSpec, P: int, level: str) -> Optional[float]:
    """Bound on ``sum_{p > P}`` of |f| at level k=1 or over all k >= 2."""
    if spec.finite_depth is not None and (level == "k>=2" and spec.finite_depth <= 1):
        return 0.0
    if spec.finite_depth == 0:
        return 0.0
    env = spec.envelope
    if env is None:
        return None
    if env.const == 0:
        return 0.0
    s = env.sigma
    if level == "k=1":
        return env.const * _sum_over_n_above(P, s) if s > 1 else None
    if s <= 0.5:
        return None
    # sum_{k>=2} p^-ks = p^-2s / (1 - p^-s) <= n^-2s / (1 - P^-s) for n > P
    return env.const * _sum_over_n_above(P, 2 * s) / (1 - P ** -s)


def distance(
    f: MultiplicativeSpec,
    g: MultiplicativeSpec,
    p_max: int,
    k_max: int,
    table: Optional[SpfTable] = None,
) -> DistanceResult:
    """Truncated ``D(f, g) = sum_{p <= p_max} sum_{k <= k_max} |g(p^k) - f(p^k)|``.

    The ``k = 0`` term is always 0.  The truncation is a lower bound for D
    (computed with ``math.fsum``, so it is monotone in both cut-offs).  A
    certified bound on the omitted part is attached when available: exactly
    for perturbations, otherwise from tail certificates (k > k_max), uniform
    envelopes (p > p_max, k >= 2) and shared prime signatures or envelopes
    (p > p_max, k = 1).
    """
    f, _ = _split(f)
    g, _ = _split(g)
    if p_max < 2 or k_max < 1:
        raise ValueError("p_max must be >= 2 and k_max >= 1")
    primes = _primes_upto(int(p_max), table)
    parts = []
    for k in range(1, k_max + 1):
        kk = np.full(primes.size, k)
        parts.append(np.abs(g.values(primes, kk) - f.values(primes, kk)))
    lower = math.fsum(np.concatenate(parts).tolist()) if parts else 0.0
    return DistanceResult(lower, _distance_tail(f, g, primes, int(p_max), int(k_max)), int(p_max), int(k_max))


def _distance_tail(f, g, primes, p_max, k_max) -> Optional[float]:
    for a, b in ((f, g), (g, f)):
        if b.perturbation_of is a:
            rest = [abs(v - a.value(p, k)) for (p, k), v in b.overrides if p > p_max or k > k_max]
            return math.fsum(rest)
    tf, tg = _level_tail(f, primes, k_max), _level_tail(g, primes, k_max)
    if tf is None or tg is None:
        return None
    pieces = [math.fsum(tf.tolist()), math.fsum(tg.tolist())]
    for spec in (f, g):
        t = _prime_tail(spec, p_max, "k>=2")
        if t is None:
            return None
        pieces.append(t)
    if f.prime_signature is None or f.prime_signature != g.prime_signature:
        for spec in (f, g):
            t = _prime_tail(spec, p_max, "k=1")
            if t is None:
                return None
            pieces.append(t)
    return math.fsum(pieces)


@dataclass(frozen=True)
class AxiomVerdict(_Report):
    identity: bool
    symmetry: bool
    triangle: bool
    d_fg: float
    d_gh: float
    d_fh: float

    @property
    def passed(self) -> bool:
        return self.identity and self.symmetry and self.triangle


def metric_axiom_check(f, g, h, p_max: int, k_max: int, slack: float = 1e-12) -> AxiomVerdict:
    """Axioms of D on the truncation box: identity of indiscernibles,
    exact symmetry and the triangle inequality up to ``slack``."""
    f, _ = _split(f)
    g, _ = _split(g)
    h, _ = _split(h)
    table = build_spf_sieve(max(p_max, 2))
    d = lambda a, b: distance(a, b, p_max, k_max, table).lower_bound  # noqa: E731
    primes = _primes_upto(p_max, table)

    def same(a, b):
        return all(
            np.array_equal(a.values(primes, np.full(primes.size, k)), b.values(primes, np.full(primes.size, k)))
            for k in range(1, k_max + 1)
        )

    identity = True
    for a, b in ((f, g), (g, h), (f, h)):
        identity &= d(a, a) == 0.0 and (d(a, b) == 0.0) == same(a, b)
    d_fg, d_gh, d_fh = d(f, g), d(g, h), d(f, h)
    symmetry = d_fg == d(g, f) and d_gh == d(h, g) and d_fh == d(h, f)
    triangle = (
        d_fh <= d_fg + d_gh + slack and d_fg <= d_fh + d_gh + slack and d_gh <= d_fg + d_fh + slack
    )
    return AxiomVerdict(identity, symmetry, triangle, d_fg, d_gh, d_fh)


def random_spec(rng: np.random.Generator, p_bound: int = 50, k_bound: int = 5, name: str = "random") -> MultiplicativeSpec:
    """Finitely supported spec with random values of modulus <= 1 at p <= p_bound, k <= k_bound."""
    primes = [p for p in range(2, p_bound + 1) if all(p % q for q in range(2, math.isqrt(p) + 1))]
    table = {}
    for p in primes:
        for k in range(1, k_bound + 1):
            if rng.random() < 0.5:
                r, th = rng.random(), rng.uniform(0, 2 * math.pi)
                table[(p, k)] = complex(r * math.cos(th), r * math.sin(th))
    return from_prime_power_table(name, table)


# --- perturbation and the closeness-transfer experiment --------------------------


def perturb(f: SpecLike, overrides: dict) -> MultiplicativeSpec:
    """g agreeing with f except ``g(p^k) = overrides[(p, k)]``.

    The tail certificate at an overridden prime restarts after the last
    overridden exponent, and the envelope constant is raised to cover the new
    values, so g keeps every certificate f had.
    """
    spec, _ = _split(f)
    ov = {(int(p), int(k)): complex(v) for (p, k), v in dict(overrides).items()}
    if any(k < 1 for _, k in ov):
        raise ValueError("override exponents must be >= 1")
    if not ov:
        return MultiplicativeSpec(
            spec.name,
            spec.prime_power_value,
            spec.completely_multiplicative,
            spec.tail,
            spec.finite_depth,
            spec.envelope,
            spec.prime_signature,
            perturbation_of=spec,
            overrides=(),
        )
    keys = sorted(ov)
    base_rule = spec.prime_power_value

    def rule(p, k):
        out = np.array(base_rule(p, k), dtype=np.complex128, copy=True)
        out = np.broadcast_to(out, np.broadcast(p, k).shape).copy()
        pb, kb = np.broadcast_arrays(p, k)
        for (op, ok) in keys:
            out[(pb == op) & (kb == ok)] = ov[(op, ok)]
        return out

    last_k = {}
    for p, k in keys:
        last_k[p] = max(last_k.get(p, 0), k)
    tail = None
    if spec.tail is not None:
        base_tail = spec.tail

        def tail(p: int) -> TailCertificate:
            c = base_tail(p)
            if p in last_k:
                return TailCertificate(c.ratio, max(c.start, last_k[p] + 1))
            return c

    finite = None if spec.finite_depth is None else max(spec.finite_depth, max(k for _, k in keys))
    env = spec.envelope
    if env is not None:
        need = max(abs(v) * p ** (k * env.sigma) for (p, k), v in ov.items())
        env = Envelope(env.sigma, max(env.const, need))
    signature = spec.prime_signature if all(k > 1 for _, k in keys) else None
    return MultiplicativeSpec(
        f"{spec.name} with {len(keys)} override(s)",
        rule,
        spec.completely_multiplicative and False,
        tail,
        finite,
        env,
        signature,
        perturbation_of=spec,
        overrides=tuple((key, ov[key]) for key in keys),
    )


#: Grid for the heuristic check of the uniform lower bound on local factors.
LOCAL_GRID_SIGMAS = (0.0, 0.25, 0.5, 1.0)
LOCAL_GRID_TS = tuple(range(-50, 51))


def local_factor_lower_bound(
    f: SpecLike,
    p_max: int = 1000,
    sigmas=LOCAL_GRID_SIGMAS,
    ts=LOCAL_GRID_TS,
    table: Optional[SpfTable] = None,
) -> float:
    """Heuristic ``min |sum_k f(p^k) p^-ks|`` over primes ``p <= p_max`` and a
    finite grid of ``s = sigma + i t``.  Each local sum is truncated with the
    same certificate as :func:`euler_factor` (valid since ``|p^-ks| <= 1``)
    and the certified tail is subtracted, so the value is a lower bound on the
    grid, not over the half-plane."""
    spec, _ = _split(f)
    s = (np.asarray(sigmas, float)[:, None] + 1j * np.asarray(ts, float)[None, :]).ravel()
    best = math.inf
    for p in _primes_upto(p_max, table).tolist():
        rep = euler_factor(spec, p, DEFAULT_TAIL)
        K = rep.K
        if K == 0:
            best = min(best, 1.0 - rep.tail_bound)
            continue
        k = np.arange(1, K + 1)
        vals = spec.values(np.full(K, p), k)
        local = 1 + (vals[None, :] * np.exp(-np.outer(s, k) * math.log(p))).sum(axis=1)
        best = min(best, float(np.abs(local).min()) - rep.tail_bound)
    return best


@dataclass(frozen=True)
class TransferReport(_Report):
    f_name: str
    g_name: str
    overrides: list
    limit: int
    distance: DistanceResult
    f_condition_i: ConditionI
    f_condition_ii: ConditionII
    g_condition_ii: ConditionII
    g_condition_i: Optional[ConditionI]
    local_factor_lower_bound: float
    local_factor_grid: dict
    hypothesis_violations: list = field(default_factory=list)
    status: str = "ok"  # ok | hypothesis-violated
    prediction_confirmed: Optional[bool] = None


def transfer_experiment(
    f: SpecLike,
    overrides: dict,
    limit: int,
    p_max: int = 10**4,
    k_max: int = 60,
    grid_p_max: int = 1000,
    sigmas=LOCAL_GRID_SIGMAS,
    ts=LOCAL_GRID_TS,
    threads: int = 1,
    table: Optional[SpfTable] = None,
) -> TransferReport:
    """Perturb an MO candidate f at finitely many prime powers and check that
    the perturbation g still has partial sums tending to 0.

    Hypotheses are checked empirically: f passes conditions (i) and (ii), g
    passes (ii), and the local factors of f stay away from 0 on a finite grid
    of s (heuristic certificate only).  Violations are reported, not raised.
    """
    spec, _ = _split(f)
    if table is None:
        table = build_spf_sieve(max(limit, p_max, grid_p_max))
    g = perturb(spec, overrides)
    dist = distance(spec, g, min(p_max, table.limit), k_max, table)
    f_i = check_condition_i(f, limit, table, threads)
    f_ii = check_condition_ii(f, p_max, table=table)
    violations = []
    if f_i.verdict != "consistent_with_zero":
        violations.append(f"f condition (i): {f_i.verdict}")
    if f_ii.verdict != "holds_up_to_pmax":
        violations.append(f"f condition (ii): {f_ii.verdict}")
    try:
        g_ii = check_condition_ii(g, p_max, table=table)
    except UncertifiableError as exc:
        violations.append(f"g condition (ii): {exc}")
        g_ii = ConditionII(p_max, math.nan, 0, None, "inconclusive", math.nan, 0, False)
    if g_ii.verdict != "holds_up_to_pmax":
        violations.append(f"g condition (ii): {g_ii.verdict}")
    a = local_factor_lower_bound(spec, grid_p_max, sigmas, ts, table)
    if not a > 0:
        violations.append(f"local factor lower bound on grid: {a:.3g}")
    g_i = check_condition_i(g, limit, table, threads)
    grid = {"p_max": grid_p_max, "sigmas": list(sigmas), "t_min": min(ts), "t_max": max(ts), "n_t": len(ts)}
    return TransferReport(
        spec.name,
        g.name,
        [[p, k, v.real, v.imag] for (p, k), v in g.overrides],
        int(limit),
        dist,
        f_i,
        f_ii,
        g_ii,
        g_i,
        a,
        grid,
        violations,
        "hypothesis-violated" if violations else "ok",
        g_i.verdict == "consistent_with_zero",
    )


# --- Omega scans ---------------------------------------------------------------


MIN_SCAN_LIMIT = 10**4


@dataclass(frozen=True)
class Weight:
    """Weight ``w(x)`` multiplying ``|S(x)|``; Omega(1/w) evidence is a
    positive lower envelope of ``sup w |S|`` over windows."""

    kind: str  # x_log_x | x_loglog_sq | x_pow | x_log_pow | x_loglog_pow
    param: float = 0.0

    @classmethod
    def parse(cls, text: str) -> "Weight":
        t = text.strip().lower()
        if t in ("xlogx", "x_log_x"):
            return cls("x_log_x")
        if t in ("xloglog2", "x_loglog_sq"):
            return cls("x_loglog_sq")
        for prefix, kind in (("pow:", "x_pow"), ("xlogpow:", "x_log_pow"), ("xloglogpow:", "x_loglog_pow")):
            if t.startswith(prefix):
                return cls(kind, float(t[len(prefix) :]))
        raise ValueError(f"unknown weight {text!r}")

    def __str__(self) -> str:
        return self.kind if self.kind in ("x_log_x", "x_loglog_sq") else f"{self.kind}({self.param:g})"

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if self.kind == "x_log_x":
            return x * np.log(x)
        if self.kind == "x_loglog_sq":
            return x * np.log(np.log(x)) ** 2
        if self.kind == "x_pow":
            return x**self.param
        if self.kind == "x_log_pow":
            return x * np.log(x) ** self.param
        if self.kind == "x_loglog_pow":
            return x * np.abs(np.log(np.log(x))) ** self.param
        raise ValueError(self.kind)


@dataclass(frozen=True)
class ScanReport(_Report):
    function_name: str
    weight: str
    limit: int
    x_min: int
    windows: list  # (x_lo, x_hi, sup_w_abs_S, at_x)
    tail_inf: list  # min of window sups from this window on
    global_inf_of_window_sups: float
    threads: int = 1

    def write_csv(self, fh) -> None:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["window_lo", "window_hi", "sup_weighted", "at_x"])
        for lo, hi, sup, at in self.windows:
            w.writerow([lo, hi, f"{sup:.17g}", at])


def omega_scan(
    f: SpecLike,
    limit: int,
    weight: Union[Weight, str],
    x_min: int = 2,
    table: Optional[SpfTable] = None,
    threads: int = 1,
    segment_size: int = DEFAULT_SEGMENT,
) -> ScanReport:
    """Sup of ``w(x) |S(x)|`` over dyadic windows ``[2^j, 2^(j+1))`` of ``[x_min, limit]``.

    The sup runs over every integer x in the window (S is constant between
    integers).  Whether the sups stay bounded below is the caller's
    interpretation; Omega statements concern lim sup and cannot be settled by
    finite data.
    """
    spec, _ = _split(f)
    if isinstance(weight, str):
        weight = Weight.parse(weight)
    limit, x_min = int(limit), int(x_min)
    if limit < MIN_SCAN_LIMIT:
        raise ValueError(f"scan limit must be >= {MIN_SCAN_LIMIT}")
    if x_min < 2 or x_min > limit:
        raise ValueError("need 2 <= x_min <= limit")
    bounds = []
    j = x_min.bit_length() - 1
    while (1 << j) <= limit:
        bounds.append((max(1 << j, x_min), min((1 << (j + 1)) - 1, limit)))
        j += 1
    sups = [-math.inf] * len(bounds)
    at = [0] * len(bounds)
    segs = iter_value_segments(spec, limit, table, segment_size=segment_size, threads=threads)
    wi = 0
    for lo, S in iter_prefix_segments(segs):
        hi = lo + S.size - 1
        while wi < len(bounds) and bounds[wi][1] < lo:
            wi += 1
        j = wi
        while j < len(bounds) and bounds[j][0] <= hi:
            a, b = max(bounds[j][0], lo), min(bounds[j][1], hi)
            xs = np.arange(a, b + 1)
            ws = weight(xs) * np.abs(S[a - lo : b - lo + 1])
            i = int(np.argmax(ws))
            if ws[i] > sups[j]:
                sups[j], at[j] = float(ws[i]), int(xs[i])
            j += 1
    windows = [(a, b, s, x) for (a, b), s, x in zip(bounds, sups, at)]
    tail_inf = list(np.minimum.accumulate(np.array(sups)[::-1])[::-1].astype(float))
    return ScanReport(spec.name, str(weight), limit, x_min, windows, tail_inf, float(min(sups)), threads)
