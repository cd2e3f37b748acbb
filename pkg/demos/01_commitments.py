"""Commitments 101: hiding, binding, and why breaking binding is a dlog.

Walks through the commitment layer on the tiny test group (p=107,
q=53), where everything can be checked by exhaustive search.
"""

from dcmesh.groups import (
    brute_force_dlog,
    combine,
    commit,
    derive_params,
    negate,
    verify_open,
)

params = derive_params("test_small", b"dc-mesh/v1")
print(f"group: p={params.p} q={params.q} g={params.g} h={params.h}")

c = commit(params, 5, 7)
print(f"\ncommit(value=5, blinding=7) = {c}")
print(f"opens with (5,7):  {verify_open(params, c, 5, 7)}")
print(f"opens with (6,7):  {verify_open(params, c, 6, 7)}")

print("\nhomomorphism: commit(a,r) * commit(b,s) == commit(a+b, r+s)")
lhs = combine(params, commit(params, 5, 7), commit(params, 11, 2))
print(f"  commit(5,7)*commit(11,2) = {lhs} = commit(16,9) = {commit(params, 16, 9)}")
print(f"  commit(5,7) * commit(-5,-7) = {combine(params, c, negate(params, c))}")

print("\nhiding: for a fixed value, every blinding gives a distinct element")
outputs = {commit(params, 5, r) for r in range(params.q)}
print(f"  53 blindings -> {len(outputs)} distinct commitments (the whole subgroup)")

print("\nbinding: a double opening would reveal log_h(g)")
lam = brute_force_dlog(params, params.h, params.g)
print(f"  brute force says log_h(g) = {lam}")
a, b, delta = 20, 31, 6
a2, b2 = (a + delta) % 53, (b - lam * delta) % 53
assert commit(params, a, b) == commit(params, a2, b2)
recovered = (b2 - b) * pow(a - a2, -1, 53) % 53
print(f"  fabricated openings ({a},{b}) and ({a2},{b2}) collide;")
print(f"  the collision formula recovers log_h(g) = {recovered}")
