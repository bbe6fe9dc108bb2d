"""Exact Z/2 homology on small hand-built complexes.

Builds the hollow simplices and cross-polytopes, reads off their Betti numbers
and Euler characteristics, and round-trips a complex through the text format.
"""

from softcomplex import complex as cx
from softcomplex.homology import euler_characteristic, full_betti

for k in (1, 2, 3):
    sphere = cx.simplex_boundary(k)
    print(f"hollow {k + 1}-simplex: f={sphere.f}  betti={tuple(full_betti(sphere))}")

for k in (1, 2, 3):
    octa = cx.cross_polytope(k)
    print(f"cross-polytope O_{k}: f={octa.f}  chi={euler_characteristic(octa)}  betti={tuple(full_betti(octa))}")

# two circles side by side: Betti numbers add up
pair = cx.disjoint_union(cx.simplex_boundary(1), cx.simplex_boundary(1))
print("two hollow triangles:", tuple(full_betti(pair)))

text = cx.dumps(cx.simplex_boundary(1, k_max=1))
print("text format of the hollow triangle:")
print(text)
assert cx.loads(text) == cx.simplex_boundary(1, k_max=1)
