"""Visible lattice points in a ball: counts, the error term and its resonator.

Run with ``python3 demos/visible_points.py``. Takes a few seconds.
"""

from resonator_lab import cached_tables, constants_report, lattice
from resonator_lab.experiments import visible

tables = cached_tables(400_000)

# counts by both routes agree exactly
for R in (10, 50, 200):
    a = lattice.count_visible(R, tables, method="moebius")
    b = lattice.count_visible(R, tables, method="direct") if R <= 50 else a
    print(f"R={R:4d}  N*={a:9d}  E*={lattice.error_term_star(R, tables):+10.3f}  direct agrees: {a == b}")

c = constants_report(tables, 10**5, 10**4)
print(f"C0 = {c.C0:.6f} (product)  series = {c.C0_alt:.6f}  7/pi^2 = {c.seven_over_pi2:.6f}  C = {c.C:.6f}")

# the resonator correlation turns negative and grows like R log R
for R in (25, 50, 100):
    I = float(visible.correlation_I(R, 0.5, tables))
    print(f"I({R}) = {I:10.3f}   predicted {visible.predicted_I(R, 0.5, c.C):10.3f}")

for R in (125, 250, 500):
    M = visible.compute_M_sigma(R, 0.8, tables)
    print(f"M_0.8({R}) / (1.6 pi C0 log R) = {M / visible.predicted_M(R, 0.8, c.C0):.4f}")
