"""Even moments of the g_sigma resonator against their diagonal terms."""

from resonator_lab import cached_tables
from resonator_lab.experiments import moments

for R, sigma, k in ((80, 0.4, 1), (320, 0.4, 1), (1000, 0.25, 2)):
    num, diag = moments.moment_g_sigma(R, sigma, k)
    print(f"R={R:5d} sigma={sigma} k={k}:  moment={num:.10f}  diagonal={diag:.10f}")

print("diagonal(3, 2) =", moments.diagonal_moment(3, 2))

tables = cached_tables(10_000)
print("sqrt2 + sqrt18 - sqrt8 - sqrt8 == 0:", moments.classify_L_zero((2, 18, 8, 8), tables)[0])
