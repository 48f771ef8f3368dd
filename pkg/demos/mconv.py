"""Multiplicative convolution of a resonator with a bounded arithmetic function."""

from resonator_lab.experiments import mconv

inst = mconv.MconvInstance((1,) * 8, "chi4")
print("b =", inst.b.tolist(), " scriptB =", inst.scriptB)
for R in (32, 64, 128):
    r = mconv.mconv_correlation(inst, R)
    print(f"R={R:4d}  correlation={r.value.real:.10f}  relative gap={r.relative_gap:.2e}")

# the hypothesis sum scales with R when N is held fixed
for row in mconv.mconv_hypothesis(inst, 64, [0.5, 1, 4]):
    print(f"V={float(row.V):4}  triple sum={float(row.triple_sum):8.1f}  ratio={row.ratio:.3f}")
