"""Compensated partial sums, Abel summation and closed-form series values.

All sums are accumulated in ascending order of n with Neumaier compensation
applied separately to the real and imaginary parts.  The series handled here
are conditionally convergent, so the summation order is part of the result
and is never changed.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Optional

import numpy as np

from ._kernels import NeumaierState
from .core import DEFAULT_SEGMENT, MultiplicativeSpec, SpfTable, iter_value_segments
from .errors import DomainError, NonFiniteError, PoleError, RangeError, SizeError

CHECKPOINT_RATIO = 1.05


def compensated_sum(terms: Iterable[complex]) -> complex:
    """Neumaier-compensated sum of a finite sequence of complex numbers."""
    arr = np.asarray(list(terms) if not isinstance(terms, np.ndarray) else terms, dtype=np.complex128)
    state = NeumaierState()
    if arr.size:
        state.add(arr.ravel())
    total = state.total
    if not (math.isfinite(total.real) and math.isfinite(total.imag)):
        raise NonFiniteError("compensated sum is not finite")
    return total


def checkpoint_grid(limit: int, ratio: float = CHECKPOINT_RATIO) -> np.ndarray:
    """Geometric grid with the given ratio, plus every power of 10 and limit."""
    limit = int(limit)
    xs = set()
    x = 1
    while x <= limit:
        xs.add(x)
        x = max(x + 1, math.ceil(x * ratio))
    p = 1
    while p <= limit:
        xs.add(p)
        p *= 10
    xs.add(limit)
    return np.array(sorted(xs), dtype=np.int64)


@dataclass(frozen=True)
class PartialSumSeries:
    """Checkpointed running sums ``S(x) = sum_{n <= x} f(n)``.

    ``interval_sup[i]`` / ``interval_inf[i]`` are the sup / inf of ``|S(y)|``
    over the integers ``x[i-1] < y <= x[i]`` (for ``i = 0`` just ``y = x[0]``).
    """

    function_name: str
    limit: int
    x: np.ndarray = field(repr=False)
    S: np.ndarray = field(repr=False)
    interval_sup: np.ndarray = field(repr=False)
    interval_inf: np.ndarray = field(repr=False)
    checkpoint_policy: str = f"geometric ratio {CHECKPOINT_RATIO} + powers of 10 + limit"

    @property
    def checkpoints(self) -> list:
        return [(int(a), complex(b)) for a, b in zip(self.x, self.S)]

    @property
    def final(self) -> complex:
        return complex(self.S[-1])

    def at(self, x: int) -> complex:
        i = int(np.searchsorted(self.x, x))
        if i >= self.x.size or self.x[i] != x:
            raise RangeError(f"{x} is not a checkpoint")
        return complex(self.S[i])

    def write_csv(self, fh) -> None:
        """Header ``x,re,im``; values with 17 significant digits."""
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "re", "im"])
        for x, s in zip(self.x, self.S):
            w.writerow([int(x), f"{s.real:.17g}", f"{s.imag:.17g}"])

    def __eq__(self, other):
        if not isinstance(other, PartialSumSeries):
            return NotImplemented
        return (
            self.function_name == other.function_name
            and self.limit == other.limit
            and np.array_equal(self.x, other.x)
            and np.array_equal(self.S, other.S)
            and np.array_equal(self.interval_sup, other.interval_sup)
            and np.array_equal(self.interval_inf, other.interval_inf)
        )

    __hash__ = None


def iter_prefix_segments(value_segments: Iterable[tuple]) -> Iterator[tuple]:
    """Turn ``(lo, values)`` segments into ``(lo, prefix_sums)`` segments."""
    state = NeumaierState()
    for lo, vals in value_segments:
        S = state.prefix(vals)
        if not np.all(np.isfinite(S)):
            raise NonFiniteError(f"partial sum not finite near x={lo}")
        yield lo, S


def _collect_checkpoints(name, limit, prefix_segments, ratio) -> PartialSumSeries:
    cps = checkpoint_grid(limit, ratio)
    S_out = np.empty(cps.size, dtype=np.complex128)
    sup_out = np.empty(cps.size)
    inf_out = np.empty(cps.size)
    j = 0
    run_sup, run_inf = -math.inf, math.inf
    for lo, S in prefix_segments:
        n = S.size
        absS = np.abs(S)
        hi = lo + n
        ends = cps[(cps >= lo) & (cps < hi)] - lo
        starts = np.concatenate(([0], ends + 1))
        starts = starts[starts < n]
        mx = np.maximum.reduceat(absS, starts)
        mn = np.minimum.reduceat(absS, starts)
        for i in range(starts.size):
            run_sup = max(run_sup, mx[i])
            run_inf = min(run_inf, mn[i])
            if i < ends.size:
                S_out[j] = S[ends[i]]
                sup_out[j] = run_sup
                inf_out[j] = run_inf
                j += 1
                run_sup, run_inf = -math.inf, math.inf
    assert j == cps.size
    return PartialSumSeries(name, int(limit), cps, S_out, sup_out, inf_out)


def partial_sums(
    f: MultiplicativeSpec,
    limit: int,
    table: Optional[SpfTable] = None,
    threads: int = 1,
    ratio: float = CHECKPOINT_RATIO,
    segment_size: int = DEFAULT_SEGMENT,
) -> PartialSumSeries:
    """Stream ``f(1..limit)`` through a compensated accumulator.

    Memory beyond the checkpoints is one segment of values.
    """
    limit = int(limit)
    if limit < 1:
        raise SizeError("limit must be >= 1")
    segs = iter_value_segments(f, limit, table, segment_size=segment_size, threads=threads)
    return _collect_checkpoints(f.name, limit, iter_prefix_segments(segs), ratio)


def partial_sums_of_values(name: str, values: np.ndarray, ratio: float = CHECKPOINT_RATIO) -> PartialSumSeries:
    """Same as :func:`partial_sums` for an explicit array ``values[1..N]``.

    ``values[0]`` is ignored, matching the layout of :func:`sieve_values`.
    """
    values = np.asarray(values, dtype=np.complex128)
    limit = values.size - 1
    if limit < 1:
        raise SizeError("need at least one value")
    segs = ((lo, values[lo : lo + DEFAULT_SEGMENT]) for lo in range(1, limit + 1, DEFAULT_SEGMENT))
    return _collect_checkpoints(name, limit, iter_prefix_segments(segs), ratio)


# --- counting functions A(x) ---------------------------------------------


class PeriodicSequence:
    """Integer-indexed periodic sequence given by one period ``a(1..P)``."""

    def __init__(self, name: str, period_values):
        vals = np.asarray(period_values)
        if vals.ndim != 1 or vals.size == 0:
            raise ValueError("period must be a non-empty 1-d sequence")
        self.name = name
        self.period_values = vals
        self.period = vals.size

    def __call__(self, n):
        n = np.asarray(n, dtype=np.int64)
        return self.period_values[(n - 1) % self.period]


def alternating_sign() -> PeriodicSequence:
    """``(-1)^(n-1)``."""
    return PeriodicSequence("(-1)^(n-1)", np.array([1, -1], dtype=np.int64))


def gk_raw(k: int) -> PeriodicSequence:
    """``g_k(n) = 1 - k`` if ``k | n`` else 1, defined for every ``k >= 2``."""
    if k < 2:
        raise DomainError("g_k needs k >= 2")
    vals = np.ones(k, dtype=np.int64)
    vals[-1] = 1 - k
    return PeriodicSequence(f"g_{k}", vals)


class StepFunctionA:
    """``A(x) = sum_{n <= x} a(n)``, with ``A(0) = 0``; callable on ints or arrays.

    Periodic sequences are answered from the period structure in O(1) memory;
    other sequences from a stored prefix array up to ``limit``.
    """

    def __init__(self, name: str, *, prefix=None, period_values=None, limit=None):
        self.name = name
        self.limit = limit
        if period_values is not None:
            pv = np.asarray(period_values)
            self._period = pv.size
            self._period_prefix = np.concatenate(([0], np.cumsum(pv))).astype(pv.dtype)
            self._period_total = self._period_prefix[-1]
            self._prefix = None
        else:
            self._prefix = np.asarray(prefix)
            self._period = None

    @classmethod
    def periodic(cls, seq: PeriodicSequence, limit=None) -> "StepFunctionA":
        return cls(seq.name, period_values=seq.period_values, limit=limit)

    def __call__(self, x):
        scalar = np.ndim(x) == 0
        x = np.floor(np.asarray(x)).astype(np.int64)
        if np.any(x < 0):
            raise RangeError("A(x) defined for x >= 0")
        if self.limit is not None and np.any(x > self.limit):
            raise RangeError(f"A(x) only available up to {self.limit}")
        if self._period is not None:
            q, r = np.divmod(x, self._period)
            out = q * self._period_total + self._period_prefix[r]
        else:
            out = self._prefix[x]
        return out[()] if scalar else out


def raw_counting_sums(a_rule: Callable, limit: int) -> StepFunctionA:
    """Counting function of ``a_rule`` up to ``limit``.

    Rules exposing a ``period_values`` attribute (see :class:`PeriodicSequence`)
    get the closed periodic form; anything else is tabulated.  Integer-valued
    rules are accumulated in exact integer arithmetic.
    """
    limit = int(limit)
    if limit < 1:
        raise SizeError("limit must be >= 1")
    if isinstance(a_rule, PeriodicSequence):
        return StepFunctionA.periodic(a_rule, limit=limit)
    vals = np.asarray(a_rule(np.arange(1, limit + 1, dtype=np.int64)))
    if np.issubdtype(vals.dtype, np.integer):
        prefix = np.concatenate(([0], np.cumsum(vals, dtype=np.int64)))
    else:
        prefix = np.concatenate(([0], NeumaierState().prefix(vals.astype(np.complex128))))
    return StepFunctionA(getattr(a_rule, "name", "a"), prefix=prefix, limit=limit)


def _neg_power(n: np.ndarray, alpha: complex) -> np.ndarray:
    return np.exp(-alpha * np.log(n.astype(np.float64)))


def abel_weighted_sum(A: StepFunctionA, alpha: complex, x: int, chunk: int = 1 << 20) -> complex:
    """``sum_{n <= x} a(n) n^-alpha`` through the counting function A.

    Evaluates ``A(x) x^-alpha + alpha * int_1^x A(t) t^(-alpha-1) dt`` with the
    integral done exactly on each unit interval, i.e.
    ``sum_{n<x} A(n) (n^-alpha - (n+1)^-alpha) + A(x) x^-alpha``.  The
    differences are formed as ``-n^-alpha * expm1(-alpha * log1p(1/n))`` to
    avoid cancellation at large n.
    """
    alpha = complex(alpha)
    if alpha.real <= 0:
        raise DomainError("Abel summation here needs Re(alpha) > 0")
    x = int(x)
    if x < 1:
        raise DomainError("x must be >= 1")
    state = NeumaierState()
    for lo in range(1, x, chunk):
        n = np.arange(lo, min(lo + chunk, x), dtype=np.int64)
        nf = n.astype(np.float64)
        diff = -_neg_power(n, alpha) * np.expm1(-alpha * np.log1p(1.0 / nf))
        state.add(A(n) * diff)
    state.add(np.array([complex(A(x)) * complex(_neg_power(np.array([x]), alpha)[0])]))
    return state.total


def direct_weighted_sum(a_rule: Callable, alpha: complex, x: int, chunk: int = 1 << 20) -> complex:
    """``sum_{n <= x} a(n) n^-alpha`` by straight compensated summation."""
    alpha = complex(alpha)
    state = NeumaierState()
    for lo in range(1, int(x) + 1, chunk):
        n = np.arange(lo, min(lo + chunk, int(x) + 1), dtype=np.int64)
        state.add(np.asarray(a_rule(n)) * _neg_power(n, alpha))
    return state.total


# --- closed forms ------------------------------------------------------------


def _default_zeta():
    from .zeta import zeta

    return zeta


def _check_alpha(alpha: complex) -> complex:
    alpha = complex(alpha)
    if alpha.real <= 0:
        raise DomainError("closed forms need Re(alpha) > 0")
    if alpha == 1:
        raise PoleError("alpha = 1: the product form is 0 * infinity")
    return alpha


def closed_form_gk_series(k: int, alpha: complex, zeta_eval: Optional[Callable] = None) -> complex:
    """``sum g_k(n) / n^alpha = (1 - k^(1-alpha)) * zeta(alpha)``."""
    if k < 2:
        raise DomainError("k must be >= 2")
    alpha = _check_alpha(alpha)
    zeta_eval = zeta_eval or _default_zeta()
    factor = -np.expm1((1 - alpha) * math.log(k))
    return complex(factor * zeta_eval(alpha))


def closed_form_eta_series(alpha: complex, zeta_eval: Optional[Callable] = None) -> complex:
    """``sum (-1)^(n-1) / n^alpha = (1 - 2^(1-alpha)) * zeta(alpha)``."""
    return closed_form_gk_series(2, alpha, zeta_eval)
