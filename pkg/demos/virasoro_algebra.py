"""The Virasoro operators: commutators, the free-field limit and the constraints on log Z."""
from extoda.highergenus import GenusExpansion
from extoda.ring.config import DEFAULT
from extoda.virasoro import free_field_check, virasoro_commutator, virasoro_direct, virasoro_residual

for rec in virasoro_direct(0, 1).describe():
    print(rec)

ok = all(virasoro_commutator(i, j, 4).passed for i in range(-1, 4) for j in range(-1, 4))
print("[L_i, L_j] = (i-j) L_{i+j} for -1 <= i, j <= 3:", ok)
print("free-field limit equals direct formula:", all(free_field_check(m, 4).passed for m in range(-1, 5)))

logZ = GenusExpansion(DEFAULT).logZ
for m in (-1, 0, 1, 2):
    r, pred = virasoro_residual(m, logZ)
    n = sum(1 for k in logZ.terms if pred(k))
    print(f"L_{m}: residual {'zero' if not r else r} on {n} evaluable terms of log Z")
