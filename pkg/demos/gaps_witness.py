"""Large values of a sine series next to a gap in its frequencies."""

from resonator_lab import GapProfile
from resonator_lab.experiments import gaps

profile = GapProfile((1, 10, 25), (1, 3 + 4j, 1), 2)
print("correlation against the Fejer kernel:", gaps.gaps_correlation(profile))
for alpha in (0.0, 0.5, 1.0):
    w = gaps.gaps_witness(profile, alpha)
    print(f"alpha={alpha:.1f}  B={gaps.gaps_bound(profile, alpha):.5f}  x={w.x:+.6f}  margin={w.margin:.4f}")

p, lam, B = gaps.cube_prime_gaps(8)
for q, g, b in zip(p, lam, B):
    print(f"p={q:3d}  gap around p^3 = {g:6d}  B = {b:9.3f}")
