"""
Euler factors and the two conditions
====================================

For a multiplicative f we ask two things: does sum f(n) vanish, and is
every local factor sum_k f(p^k) non-zero?  mo_check answers both
numerically, with a certified tail on each local factor.
"""

import math

from molab import eta_family, euler_factor, euler_factor_closed, g_family, mo_check, mobius_over_n

# truncated sum with a certified remainder versus the closed form
for entry, p in ((eta_family(2), 2), (eta_family(complex(0.7, 9)), 11), (g_family(9, 1.5), 3)):
    t = euler_factor(entry, p, target_tail=1e-13)
    c = euler_factor_closed(entry, p)
    print(f"{entry.spec.name:>24}  p={p:<3} K={t.K:<3} |trunc - closed| = {abs(t.value - c.value):.1e} <= {t.tail_bound:.1e}")

cases = {
    "mu(n)/n": mobius_over_n(),
    "eta at first zero": eta_family(complex(0.5, 14.134725141734694)),
    "eta at 1 + 2 pi i / ln 2": eta_family(complex(1, 2 * math.pi / math.log(2))),
    "eta at 2": eta_family(2),
}
for label, entry in cases.items():
    r = mo_check(entry, 10**5, 1000)
    ci, cii = r.condition_i, r.condition_ii
    extra = f" (vanishes at p={cii.witness_prime})" if cii.witness_prime else ""
    print(f"{label:>26}: sum -> {ci.verdict:<21} factors {cii.verdict}{extra}")
