"""
Changing finitely many prime powers
===================================

The distance D(f, g) adds up |f(p^k) - g(p^k)| over all prime powers.  If g
differs from mu(n)/n at a single prime power it stays at finite distance,
and its series should still sum to zero.
"""

from molab import distance, liouville_over_n, mobius_over_n, transfer_experiment

f = mobius_over_n()
d = distance(f.spec, liouville_over_n().spec, 10**5, 60)
print(f"D(mu/n, lambda/n) in [{d.lower_bound:.12f}, {d.upper_bound:.12f}]")

for value in (0, 1, -2):
    r = transfer_experiment(f, {(2, 1): value}, 10**6)
    print(
        f"g(2) = {value:+d}: D = {r.distance.lower_bound}, S_g(1e6) = {abs(r.g_condition_i.S_at_limit):.2e},"
        f" verdict {r.g_condition_i.verdict}, hypotheses {r.status}"
    )
    for v in r.hypothesis_violations:
        print("    ", v)
