"""Two ways weighted conformal prediction fails when the ratio is unbounded.

The needle family concentrates extra test mass on a tiny ball, so the true
density ratio is bounded only by 1/r^d.  Two failure modes follow:

1. even with the *exact* ratio, a small calibration set that happens to hit
   the ball gets its score threshold dragged inside it, collapsing coverage
   to roughly theta;
2. when the ratio is *learned* without clipping, the miss/hit event (source
   sample misses the ball, target sample hits it) makes empirical risk
   minimization pick the largest valid on-ball weight, maximizing L1 error.

Both demos run at reduced trial counts here; the acceptance suite runs them
at full scale.
"""

from cwcp.experiments import run_needle_demo
from cwcp.ingest import NeedleDemoConfig, RunConfig, ShiftConfig

threshold_cfg = RunConfig(
    kind="needle-demo",
    seed=7,
    out_dir="/tmp/cwcp-demos/needle-threshold",
    trials=2000,
    alpha=0.1,
    shift=ShiftConfig(family="needle", d=1, r=0.001, theta=0.1, grid=(0.1,)),
    needle=NeedleDemoConfig(c=0.01),
)
td = run_needle_demo(threshold_cfg)["threshold_demo"]
print("-- exact-ratio threshold collapse --")
print(f"calibration size m:            {td['m']}")
print(f"threshold entered ball:        {td['threshold_hit_frequency']:.4f} of trials")
print(f"first-principles probability:  {td['threshold_hit_probability']:.4f}")
print(f"worst coverage on that event:  {td['max_coverage_on_event']:.4f}")
print(f"analytic ceiling on the event: {td['coverage_bound_on_event']:.4f}")

over_cfg = RunConfig(
    kind="needle-demo",
    seed=7,
    out_dir="/tmp/cwcp-demos/needle-overestimation",
    trials=2000,
    alpha=0.1,
    shift=ShiftConfig(family="needle", d=1, r=0.01, theta=0.2, grid=(0.2,)),
    needle=NeedleDemoConfig(m=50, n=50),
)
od = run_needle_demo(over_cfg)["overestimation_demo"]
print("\n-- unclipped ratio overestimation --")
print(f"miss/hit event frequency:      {od['event_frequency']:.4f} (floor {od['event_probability_floor']:.4f})")
print(f"top weight chosen on event:    {od['top_beta_selected']}/{od['events']} trials (beta = {od['top_beta']:.0f})")
mean_l1 = sum(od["l1_values"]) / len(od["l1_values"])
print(f"mean L1 error on event:        {mean_l1:.6f} (formula {od['l1_expected']:.6f})")
