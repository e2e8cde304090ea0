"""
Weighted sup scans
==================

How slowly can the partial sums of mu(n)/n decay?  Multiply |S(x)| by a
growing weight and record the largest value in each dyadic window.  Window
sups that stay away from zero are evidence the weight is too strong to
be beaten.
"""

import io

from molab import mobius_over_n, omega_scan

for weight in ("pow:0.5", "xlogx"):
    rep = omega_scan(mobius_over_n(), 10**6, weight)
    print(f"weight {weight}: {len(rep.windows)} windows, min window sup {rep.global_inf_of_window_sups:.3f}")
    for lo, hi, sup, at in rep.windows[-4:]:
        print(f"   [{lo:>7}, {hi:>7})  sup = {sup:.4f} at x = {at}")

buf = io.StringIO()
rep.write_csv(buf)
print(buf.getvalue().splitlines()[0])
