"""Prime sieving, factorization and evaluation of multiplicative functions.

A multiplicative function is described only by its values on prime powers
(:class:`MultiplicativeSpec`); everything else is assembled here from a
smallest-prime-factor table.

Complex powers ``n**-alpha`` are always formed as ``exp(-alpha * log(n))`` in
double precision.  The phase ``Im(alpha) * log(n)`` then carries an absolute
error of roughly ``eps * Im(alpha) * log(n)``, i.e. about ``log2(theta)`` bits
are lost; for ``n <= 1e8`` and ``|Im(alpha)| <= 1e3`` this stays below
``1e-11`` and is irrelevant for every computation in this package.
"""

from __future__ import annotations

import math
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional

import numpy as np

from .errors import NonFiniteError, RangeError, SizeError

#: Largest sieve limit accepted.  The SPF table plus the prime-power index
#: cost 8 bytes per integer, so this bound corresponds to about 1.6 GB.
MAX_SIEVE_LIMIT = 2 * 10**8

DEFAULT_SEGMENT = 1 << 18


@dataclass(frozen=True)
class TailCertificate:
    """``|f(p^(k+1))| <= ratio * |f(p^k)|`` for all ``k >= start``."""

    ratio: float
    start: int = 1

    def __post_init__(self):
        if not (0.0 <= self.ratio < 1.0):
            raise ValueError(f"tail ratio must lie in [0, 1), got {self.ratio}")
        if self.start < 1:
            raise ValueError("tail certificate start must be >= 1")


@dataclass(frozen=True)
class Envelope:
    """Uniform decay bound ``|f(p^k)| <= const * p^(-k * sigma)`` for all p, k >= 1."""

    sigma: float
    const: float = 1.0


@dataclass(frozen=True)
class MultiplicativeSpec:
    """A multiplicative function given by its prime-power values.

    ``prime_power_value(p, k)`` must accept integer numpy arrays of equal
    shape (primes and exponents ``k >= 1``) and return a complex array of the
    same shape.  ``f(1) = 1`` is implied and never asked of the rule.

    Optional certificates used by the Euler-factor and distance code:

    * ``tail(p)`` returns a :class:`TailCertificate` for the prime ``p``.
    * ``finite_depth``: ``f(p^k) = 0`` for every ``k > finite_depth``.
    * ``envelope``: a uniform :class:`Envelope` valid for every prime.
    * ``prime_signature``: specs sharing a non-empty signature have equal
      values at every prime ``p`` (the ``k = 1`` level).
    """

    name: str
    prime_power_value: Callable[[np.ndarray, np.ndarray], np.ndarray] = field(repr=False)
    completely_multiplicative: bool = False
    tail: Optional[Callable[[int], TailCertificate]] = field(default=None, repr=False)
    finite_depth: Optional[int] = None
    envelope: Optional[Envelope] = None
    prime_signature: Optional[str] = None
    #: set by :func:`molab.mo.perturb`: the base spec and ``((p, k), value)`` pairs
    perturbation_of: Optional["MultiplicativeSpec"] = field(default=None, repr=False, compare=False)
    overrides: tuple = field(default=(), repr=False, compare=False)

    def values(self, p, k) -> np.ndarray:
        """Vectorised ``f(p^k)``; raises :class:`NonFiniteError` on NaN/inf."""
        p = np.asarray(p, dtype=np.int64)
        k = np.asarray(k, dtype=np.int64)
        out = np.asarray(self.prime_power_value(p, k), dtype=np.complex128)
        out = np.broadcast_to(out, np.broadcast(p, k).shape)
        if not np.all(np.isfinite(out)):
            raise NonFiniteError(f"{self.name}: non-finite prime-power value")
        return out

    def value(self, p: int, k: int) -> complex:
        """Scalar ``f(p^k)``; ``k = 0`` gives 1."""
        if k == 0:
            return 1 + 0j
        return complex(self.values(np.array([p]), np.array([k]))[0])


@dataclass(frozen=True)
class SpfTable:
    """Smallest prime factor of every integer in ``1..limit``.

    ``spf[1] == 1`` is a sentinel; ``spf[0]`` is unused.
    """

    limit: int
    spf: np.ndarray = field(repr=False)

    @property
    def primes(self) -> np.ndarray:
        cached = self.__dict__.get("_primes")
        if cached is None:
            idx = np.arange(self.limit + 1, dtype=self.spf.dtype)
            cached = np.flatnonzero((self.spf == idx) & (idx >= 2)).astype(np.int64)
            cached.setflags(write=False)
            object.__setattr__(self, "_primes", cached)
        return cached

    def is_prime(self, n: int) -> bool:
        if not 1 <= n <= self.limit:
            raise RangeError(f"{n} outside 1..{self.limit}")
        return n >= 2 and int(self.spf[n]) == n


@dataclass(frozen=True)
class Factorization:
    n: int
    factors: tuple  # ((p, k), ...) with p strictly increasing

    def expand(self) -> int:
        out = 1
        for p, k in self.factors:
            out *= p**k
        return out


def build_spf_sieve(limit: int) -> SpfTable:
    """Build the smallest-prime-factor table for ``1..limit``.

    Eratosthenes-style: each prime p <= sqrt(limit) marks the still-unmarked
    multiples from p*p on, O(limit log log limit) overall.
    """
    limit = int(limit)
    if limit < 1:
        raise SizeError("sieve limit must be >= 1")
    if limit > MAX_SIEVE_LIMIT:
        raise SizeError(f"sieve limit {limit} exceeds memory bound {MAX_SIEVE_LIMIT}")
    try:
        spf = np.zeros(limit + 1, dtype=np.int32)
    except MemoryError as exc:  # pragma: no cover - depends on host
        raise SizeError(f"cannot allocate sieve of size {limit}") from exc
    for p in range(2, math.isqrt(limit) + 1):
        if spf[p] == 0:
            seg = spf[p * p :: p]
            seg[seg == 0] = p
    unmarked = np.flatnonzero(spf == 0)
    spf[unmarked] = unmarked
    spf[0] = 0
    spf[1] = 1
    spf.setflags(write=False)
    return SpfTable(limit, spf)


def _check_range(n: int, table: SpfTable) -> None:
    if not 1 <= n <= table.limit:
        raise RangeError(f"{n} outside sieve range 1..{table.limit}")


def factorize(n: int, table: SpfTable) -> Factorization:
    n = int(n)
    _check_range(n, table)
    spf = table.spf
    factors = []
    m = n
    while m > 1:
        p = int(spf[m])
        k = 0
        while m % p == 0:
            m //= p
            k += 1
        factors.append((p, k))
    return Factorization(n, tuple(factors))


def eval_at(f: MultiplicativeSpec, n: int, table: SpfTable) -> complex:
    """``f(n)`` as the product of ``f(p^k)`` over the factorization of n.

    Factors are multiplied in increasing order of p, which is also the order
    used by :func:`sieve_values`, so both agree bit for bit.
    """
    fac = factorize(n, table)
    if not fac.factors:
        return 1 + 0j
    ps = np.array([p for p, _ in fac.factors], dtype=np.int64)
    ks = np.array([k for _, k in fac.factors], dtype=np.int64)
    vals = f.values(ps, ks)
    re, im = float(vals[0].real), float(vals[0].imag)
    for v in vals[1:]:
        re, im = re * v.real - im * v.imag, re * v.imag + im * v.real
    if not (math.isfinite(re) and math.isfinite(im)):
        raise NonFiniteError(f"{f.name}({n}) is not finite")
    return complex(re, im)


def _cmul_inplace(out: np.ndarray, pos: np.ndarray, vals: np.ndarray) -> None:
    """``out[pos] *= vals`` with the textbook formula.

    numpy's complex multiply may fuse operations (FMA) in its vector loops,
    which breaks bitwise agreement with scalar evaluation; separate real
    multiplies and adds round identically everywhere.
    """
    a = out[pos]
    re = a.real * vals.real - a.imag * vals.imag
    im = a.real * vals.imag + a.imag * vals.real
    out.real[pos] = re
    out.imag[pos] = im


def prime_powers(table: SpfTable):
    """All prime powers ``q = p^k <= limit`` as arrays ``(q, p, k)``."""
    primes = table.primes
    limit = table.limit
    qs, ps, ks = [], [], []
    k = 1
    cur = primes.copy()
    base = primes
    while cur.size:
        qs.append(cur)
        ps.append(base)
        ks.append(np.full(cur.size, k, dtype=np.int64))
        keep = cur <= limit // base
        base = base[keep]
        cur = cur[keep] * base
        k += 1
    if not qs:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty, empty
    return np.concatenate(qs), np.concatenate(ps), np.concatenate(ks)


class _ValueSieve:
    """Segment evaluator for one spec over one SPF table.

    Prime-power values are computed once (one rule call for all prime powers
    <= limit) and looked up through a dense index.  Every n is then built as
    ``f(q1) * f(q2) * ...`` with ``q1 < q2 < ...`` the prime-power parts of
    n in order of increasing prime.
    """

    def __init__(self, f: MultiplicativeSpec, table: SpfTable):
        self.f = f
        self.table = table
        q, p, k = prime_powers(table)
        self.pp_values = f.values(p, k) if q.size else np.zeros(0, np.complex128)
        try:
            index = np.full(table.limit + 1, -1, dtype=np.int32)
        except MemoryError as exc:  # pragma: no cover
            raise SizeError("cannot allocate prime-power index") from exc
        index[q] = np.arange(q.size, dtype=np.int32)
        self.index = index

    def _split(self, idx: np.ndarray):
        """Smallest prime-power part and cofactor of each entry of idx (> 1)."""
        p = self.table.spf[idx].astype(np.int64)
        rest = idx // p
        q = p.copy()
        sel = np.flatnonzero(rest % p == 0)
        while sel.size:
            ps = p[sel]
            rest[sel] //= ps
            q[sel] *= ps
            sel = sel[rest[sel] % ps == 0]
        return q, rest

    def segment(self, lo: int, hi: int) -> np.ndarray:
        """Values ``f(n)`` for ``lo <= n < hi``."""
        n = np.arange(lo, hi, dtype=np.int64)
        out = np.ones(n.size, dtype=np.complex128)
        pos = np.flatnonzero(n > 1)
        cur = n[pos]
        first = True
        while pos.size:
            q, rest = self._split(cur)
            vals = self.pp_values[self.index[q]]
            if first:
                out[pos] = vals
                first = False
            else:
                _cmul_inplace(out, pos, vals)
            keep = rest > 1
            pos = pos[keep]
            cur = rest[keep]
        if not np.all(np.isfinite(out)):
            raise NonFiniteError(f"{self.f.name}: non-finite value in [{lo}, {hi})")
        return out


def iter_value_segments(
    f: MultiplicativeSpec,
    limit: int,
    table: Optional[SpfTable] = None,
    segment_size: int = DEFAULT_SEGMENT,
    threads: int = 1,
) -> Iterator[tuple]:
    """Yield ``(lo, values)`` covering ``1..limit`` in increasing order.

    With ``threads > 1`` segments are evaluated concurrently but yielded in
    order; each value is computed independently, so the output does not
    depend on the thread count.
    """
    limit = int(limit)
    if limit < 1:
        raise SizeError("limit must be >= 1")
    if table is None or table.limit < limit:
        table = build_spf_sieve(limit)
    sieve = _ValueSieve(f, table)
    bounds = [(lo, min(lo + segment_size, limit + 1)) for lo in range(1, limit + 1, segment_size)]
    if threads <= 1:
        for lo, hi in bounds:
            yield lo, sieve.segment(lo, hi)
        return
    with ThreadPoolExecutor(max_workers=threads) as pool:
        pending = deque()
        it = iter(bounds)
        for lo, hi in it:
            pending.append((lo, pool.submit(sieve.segment, lo, hi)))
            if len(pending) >= 2 * threads:
                break
        while pending:
            lo, fut = pending.popleft()
            nxt = next(it, None)
            if nxt is not None:
                pending.append((nxt[0], pool.submit(sieve.segment, *nxt)))
            yield lo, fut.result()


def sieve_values(
    f: MultiplicativeSpec,
    limit: int,
    table: Optional[SpfTable] = None,
    threads: int = 1,
) -> np.ndarray:
    """``f(n)`` for ``n = 0..limit``; entry 0 is a zero placeholder."""
    out = np.zeros(int(limit) + 1, dtype=np.complex128)
    for lo, vals in iter_value_segments(f, limit, table, threads=threads):
        out[lo : lo + vals.size] = vals
    return out
