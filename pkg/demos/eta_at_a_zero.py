"""
Alternating series at a zeta zero
=================================

At a zero rho of zeta on the critical line, the alternating series
sum (-1)^(n-1) n^(-rho) converges to eta(rho) = 0.  We locate the first few
zeros, watch the partial sums shrink and fit their decay rate.
"""

import math

from molab import eta, eta_family, find_zero, hardy_z, load_zero_table, partial_sums
from molab.mo import fit_decay_exponent, window_suprema

# Hardy's Z changes sign at each zero; find_zero brackets and refines
for guess in (14, 21, 25, 30.4):
    z = find_zero(guess, tol=1e-10)
    print(f"zero #{z.index}: t = {z.imag:.12f}   |eta(rho)| = {z.residual:.1e}")

print("Z(20) =", hardy_z(20.0))
print("bundled table:", len(load_zero_table()), "zeros below t = 100")

rho = find_zero(14).rho
series = partial_sums(eta_family(rho).spec, 10**6)
for x in (10**2, 10**3, 10**4, 10**5, 10**6):
    print(f"|S({x})| = {abs(series.at(x)):.3e}    x^(-1/2) = {x ** -0.5:.3e}")

# sup |S| over windows of ratio sqrt(2), then a log-log slope
centres, sups = window_suprema(series, 10**4, 10**6)
c, window, npts = fit_decay_exponent(series, (10**4, 10**6))
print(f"{npts} windows on {window}: sup|S(x)| ~ x^-{c:.3f}")

# an accuracy check against the definition at s = 2
print("eta(2) - pi^2/12 =", abs(eta(2) - math.pi**2 / 12))
