"""Genus-one loop equation at random rational points, in Q(sqrt D).

The left side collapses to -e^u/D^2.  The source term as printed does not
match it up to a constant; with the sign of (v - lambda)^2 flipped it matches
with prefactor 1.
"""
from extoda.highergenus import loop_check, loop_lhs_genus1, loop_samples

for s in loop_samples(3, seed=1):
    print(f"lambda={s.lam}  D={s.D}  lhs={tuple(str(x) for x in loop_lhs_genus1(s).pair())}  -E/D^2={-s.E / s.D ** 2}")

for source in ("printed", "corrected"):
    r = loop_check(5, 42, source)
    print(source, "PASS" if r.passed else "FAIL", "prefactor", r.details["prefactor"])
