"""
Sieving multiplicative functions
================================

A multiplicative function is pinned down by its values on prime powers.
Here we build a smallest-prime-factor table once and reuse it to sieve
mu(n), mu(n)/n and lambda(n)/n, then look at their running sums.
"""

import numpy as np

from molab import build_spf_sieve, factorize, liouville_over_n, mobius_over_n, mobius_raw, partial_sums, sieve_values

N = 10**6
table = build_spf_sieve(N)

# factorisations come straight out of the table
print("360 =", " * ".join(f"{p}^{k}" for p, k in factorize(360, table).factors))

# raw Moebius values and the Mertens function M(x)
mu = sieve_values(mobius_raw().spec, 30, table)[1:].real.astype(int)
print("mu(1..30):", mu.tolist())

M = partial_sums(mobius_raw().spec, N, table)
for x in (10, 100, 1000, 10**4, 10**5, 10**6):
    print(f"M({x}) = {M.at(x).real:+.0f}")

# with the 1/n weight the running sums drift to 0
S = partial_sums(mobius_over_n().spec, N, table)
L = partial_sums(liouville_over_n().spec, N, table)
for x in (10**2, 10**4, 10**6):
    print(f"x={x:>7}  sum mu(n)/n = {S.at(x).real:+.3e}   sum lambda(n)/n = {L.at(x).real:+.3e}")

# largest |S| seen on each checkpoint interval, last decade only
last = S.x >= N // 10
print("max |sum mu(n)/n| on [1e5, 1e6]:", float(np.max(S.interval_sup[last])))
