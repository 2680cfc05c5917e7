"""Classifying receivers by power and fusing their estimates.

Each UAV shares its received power and its own position estimate. Nodes
within 6 dB of the strongest are taken as line-of-sight; the weighted rule
averages only those, the arithmetic rule averages everybody.
"""

# %%
import numpy as np

from coopsdf import NodeReport, classify_conditions, fuse_arithmetic, fuse_weighted
from coopsdf.sdf import LocalEstimate


def est(p):
    p = np.asarray(p, dtype=float)
    return LocalEstimate(0, 0.0, p, p, 0.0, 1)


truth = np.array([0.0, 0.0, 0.0])
reports = [
    NodeReport(1, 0.0, -70.0, est((6, -4, 0))),
    NodeReport(2, 0.0, -71.0, est((-3, 8, 0))),
    NodeReport(3, 0.0, -95.0, est((180, -60, 0))),
    NodeReport(4, 0.0, -93.0, est((-90, 140, 0))),
    NodeReport(5, 0.0, -96.0, est((40, 210, 0))),
]
reports = classify_conditions(reports, 6.0)
for r in reports:
    print("uav %d  %6.1f dBm  %s" % (r.uav_id, r.power, r.classified_condition.value))

# %%
for fused in (fuse_arithmetic(reports), fuse_weighted(reports)):
    err = np.hypot(*(fused.position_world - truth)[:2])
    print("%-10s from %s -> error %.1f m" % (fused.rule_used.value, fused.contributing_ids, err))

# %% when everyone is obstructed the weighted rule falls back to the plain mean
# (reports start out NLOS until classified)
weak = [NodeReport(r.uav_id, r.t, r.power, r.estimate) for r in reports]
fb, ar = fuse_weighted(weak), fuse_arithmetic(weak)
print("\nall NLOS ->", fb.rule_used.value, "same point:", np.array_equal(fb.position_world, ar.position_world))
