"""Thinning a random Rips complex and counting the patterns that bound b_1.

A point cloud in the unit square gives a Rips complex; thinning drops edges
and triangles independently (a face can only survive if its boundary did).
Hollow triangles that appear as whole components are lower bounds for b_1,
and edges in components of at least four vertices bound the excess.
"""

from softcomplex.census import census
from softcomplex.complex import build_rips, thin
from softcomplex.experiments import TrialConfig, conditional_thinning_check, predicted_thinning_factor
from softcomplex.geometry import Domain, build_graph, sample_binomial
from softcomplex.homology import betti

cloud = sample_binomial(400, Domain("cube", 2), seed=3)
rips = build_rips(build_graph(cloud, 0.04), k_max=2)
soft = thin(rips, [0.9, 0.5], seed=3)
print("faces before thinning:", rips.f, " after:", soft.f)

rep = census(soft, [1])
b1 = betti(soft)[1]
lo, extra = rep.empty_simplex[1], rep.faces_in_large[(1, 4)]
print(f"hollow triangle components {lo} <= b_1 = {b1} <= {lo} + {extra}")

# Every isolated full triangle turns into a hollow one with probability (1 - p2) * p1^3.
cfg = TrialConfig(n=2000, r=0.01, rho=(1.0, 1.0), k_max=2, seed=6)
for rho in [(1.0, 0.5), (0.8, 0.5), (0.9, 0.1)]:
    res = conditional_thinning_check(1, rho, cfg, trials=60)
    print(f"rho={rho}: observed {res.mean:.3f} ± {res.ci_halfwidth:.3f} over {res.trials} triangles,"
          f" predicted {predicted_thinning_factor(1, rho):.4f}")
