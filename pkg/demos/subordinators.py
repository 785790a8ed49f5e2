"""Tour of the subordinator families: Laplace exponents, scaling, and the
complete-monotonicity / doubling diagnostics."""

import numpy as np

from sbmpot import Subordinator

lam = np.array([0.01, 0.1, 1.0, 10.0, 100.0])

families = [
    Subordinator("stable_mixture", alpha=1.0),
    Subordinator("mixed_stable", alpha=1.2, beta=0.6),
    Subordinator("relativistic", alpha=1.0, mass=1.0),
    Subordinator("geometric_stable", alpha=1.4),
    Subordinator("brownian_only"),
]

print("phi(lambda) across families")
print("%-34s" % "", "  ".join("%8.3g" % v for v in lam))
for sub in families:
    print("%-34s" % sub.family, "  ".join("%8.4g" % p for p in sub.phi(lam)))

print()
print("jump-part diagnostics (K=1)")
for sub in families:
    if not sub.has_jumps:
        print("%-34s (no jump part)" % sub.family)
        continue
    r = sub.check_condition(1.0)
    print("%-34s doubling=%.4f  cm_violations=%d"
          % (sub.family, r["doubling_constant"], r["cm_violations"]))

# the half-stable branch dominates phi at infinity, so phi(2l)/phi(l)
# approaches 2^(alpha/2) far out while the drift gives ratio 2 near zero
sub = Subordinator("stable_mixture", alpha=1.0)
for l in (1e-4, 1e4):
    print("phi(2l)/phi(l) at l=%g: %.4f" % (l, sub.phi(2 * l) / sub.phi(l)))
