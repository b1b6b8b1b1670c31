"""Finite-sample bound calculators: how much data does the pipeline need?

Every bound here is an exact formula evaluation, also reachable from the
command line via `cwcp bounds <name> ...`.
"""

from cwcp import (
    bias_deviation_bound,
    moment_bias_bound,
    required_sample_sizes,
    wcp_calibration_size,
    weighted_dkw_bound,
)

print("ratio-fitting sample sizes (complexity constants C = C~ = 1):")
print("  B | epsilon |   m_train |   m_test")
for b, eps in ((1.0, 0.5), (2.0, 0.5), (2.0, 0.25), (5.0, 0.25)):
    plan = required_sample_sizes(b, eps, delta=0.1, c_b=1.0, c_tilde_b=1.0)
    print(f"{b:3g} | {eps:7g} | {plan.m_train:9d} | {plan.m_test:8d}")

print("\ncalibration size for dataset-conditional coverage:")
print("  B | epsilon | delta |        m")
for b, eps, delta in ((1.0, 0.1, 0.1), (2.0, 0.1, 0.1), (2.0, 0.05, 0.05)):
    print(f"{b:3g} | {eps:7g} | {delta:5g} | {wcp_calibration_size(b, eps, delta):8d}")

print("\nbias-estimate deviation probability, clip level B=2:")
print("  m     | gamma | bound")
for m, gamma in ((100, 0.5), (400, 0.25), (1600, 0.125)):
    print(f"{m:7d} | {gamma:5g} | {bias_deviation_bound(2.0, 0.0, gamma, m):.4f}")

print("\nweighted uniform CDF deviation (normalized weight bound B'=4):")
for m in (10**3, 10**4, 10**5):
    print(f"  m={m:<7d} gamma=0.05 -> {weighted_dkw_bound(m, 0.05, 4.0):.6f}")

print("\nclipping-bias ceiling from a tail moment (E[f(w)] <= 1, f(x) = x^2):")
for b in (2.0, 4.0, 8.0, 16.0):
    print(f"  B={b:4g} -> bias <= {moment_bias_bound(1.0, 1.0, 2.0, 0.0, b):.4f}")
