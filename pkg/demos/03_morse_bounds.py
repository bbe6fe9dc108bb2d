"""Discrete gradient fields as cheap upper bounds on Betti numbers.

Vertices are ranked by distance from the origin and every face is offered to
the coface that adds a lower-ranked vertex. The unmatched (critical) faces
bound each Betti number from above and have the same Euler characteristic.
"""

from softcomplex.complex import build_cech, thin
from softcomplex.geometry import Domain, sample_binomial
from softcomplex.homology import euler_characteristic, full_betti
from softcomplex.morse import build_gradient_field, critical_counts, verify_gradient

cloud = sample_binomial(300, Domain("cube", 3), seed=11)
cech = thin(build_cech(cloud, 0.2, k_max=3), [0.95, 0.8, 0.8], seed=11)
field = build_gradient_field(cech, cloud)
crit = critical_counts(field)
b = full_betti(cech)

print("faces    ", cech.f)
print("critical ", crit)
print("betti    ", list(b))
print("gradient verified:", verify_gradient(field, cech))
alt = sum((-1) ** i * c for i, c in enumerate(crit))
print("Euler characteristic from faces", euler_characteristic(cech), "and from critical faces", alt)
print("matched fraction of faces:", 1 - sum(crit) / sum(cech.f))
