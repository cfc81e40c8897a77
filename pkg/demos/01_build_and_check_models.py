"""Build ladder-operator models and verify their algebra pointwise.

Every model packages four coefficient functions:

    a = alpha_a(x) d/dx + beta_a(x)      (lowering)
    b = -d/dx alpha_b(x) + beta_b(x)     (raising)

The pair is pseudo-bosonic when [a, b] f = f for smooth f, which reduces
to two coefficient identities checked on a grid below.
"""

import numpy as np

import pseudobosons as pb

grid = np.linspace(-5, 5, 1001)

print("== coefficient conditions on the built-in models ==")
for name, params in [
    ("bosonic", {}),
    ("shifted", {"alpha": 0.15 + 0.1j, "beta": 0.2}),
    ("swanson", {"theta": 0.3}),
    ("constant_alpha", {"alpha_a": 1.0, "alpha_b": 0.5, "k": 0.7}),
    ("example1", {}),
    ("example2", {}),
]:
    m = pb.build_builtin(name, **params)
    rep = pb.check_pb_conditions(m, grid, tol=1e-10)
    print(f"  {name:<16} residual1={rep.max_abs1:.2e} "
          f"residual2={rep.max_abs2:.2e}  -> {rep.verdict}")

print()
print("== a model that is NOT pseudo-bosonic ==")
bad = pb.from_expressions("1", "0", "x", "0", name="broken")
rep = pb.check_pb_conditions(bad, np.linspace(0.5, 3, 41))
print(f"  residual1 is identically {rep.residual1[0].real:.1f} "
      f"-> {rep.verdict}")

print()
print("== commutator defect sup |(ab - ba) f - f| on a bump ==")
m = pb.build_builtin("example2")
bump = pb.TestFunction(center=0.3, width=1.2)
sub = grid[(grid > bump.support[0]) & (grid < bump.support[1])]
stats = pb.commutator_residual(m, bump.jet, sub)
print(f"  example2: {stats.sup_abs:.2e}")

print()
print("== the lowering operator kills the vacuum ==")
m1 = pb.build_builtin("example1")
for x in (-1.5, 0.0, 2.0):
    out = pb.apply_ladder(m1, "a", m1.phi_vacuum_jet, x, 0)
    print(f"  (a phi_0)({x:+.1f}) = {abs(out.value):.2e}")
