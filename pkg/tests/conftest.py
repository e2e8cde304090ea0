"""Independent oracles shared by the test modules.

Nothing here imports from molab: these are straightforward re-derivations
(trial division, direct definitions) used to check the library.
"""

import math

import pytest


def trial_factor(n: int) -> list:
    out, d = [], 2
    while d * d <= n:
        k = 0
        while n % d == 0:
            n //= d
            k += 1
        if k:
            out.append((d, k))
        d += 1
    if n > 1:
        out.append((n, 1))
    return out


def mobius(n: int) -> int:
    fac = trial_factor(n)
    if any(k > 1 for _, k in fac):
        return 0
    return -1 if len(fac) % 2 else 1


def liouville(n: int) -> int:
    return -1 if sum(k for _, k in trial_factor(n)) % 2 else 1


def is_prime(n: int) -> bool:
    return n >= 2 and all(n % d for d in range(2, math.isqrt(n) + 1))


def primes_upto(n: int) -> list:
    return [p for p in range(2, n + 1) if is_prime(p)]


@pytest.fixture(scope="session")
def spf_1e6():
    from molab.core import build_spf_sieve

    return build_spf_sieve(10**6)
