"""Why nontangential convergence cannot be widened to tangential
approach: dyadic arc data whose surrogate average settles along every
radius but keeps oscillating along tangential curves delta^(1/2) wide
-- plus the near-one bound that powers the construction."""

import numpy as np

from sbmpot import Domain
from sbmpot.fatou import littlewood_counterexample, near_one_check, \
    near_one_margin

dom = Domain("unit_ball", d=2)

# the bound: approaching the middle of an arc of half-width lam, the
# surrogate average of its indicator is already >= 1 - eps at distance
# lam * eps / 3.5
res = near_one_check(dom, dom.boundary_mesh(2 ** 15),
                     lams=(0.125, 0.03125, 0.0078125),
                     eps_list=(0.5, 0.1))
print("near-one bound (exact quadrature): margin(eps) = eps / 3.5")
print("  lam        eps    delta       u_hat     >= 1-eps?")
for row in res["rows"]:
    print("  %.7f  %.2f   %.2e   %.5f   %s"
          % (row["lam"], row["eps"], row["delta"], row["u_hat"],
             row["pass"]))
print("  margin(0.25) = %.5f" % near_one_margin(0.25))

out = littlewood_counterexample(depth=25, mesh_cells=2 ** 16)
print()
print("arc construction, %d test angles, gamma = 0.5:" % len(out["theta"]))
rr, rt = out["reports"][0]
th0 = out["theta"][0]
print("  first angle theta = %.3f:" % th0)
print("    radial tail oscillation      %.4f  (tol <= %.2f)"
      % (rr.oscillation, out["radial_tol"]))
print("    tangential tail oscillation  %.4f  (need >= %.2f)"
      % (rt.oscillation, out["tangential_tol"]))
print("    tangential u_hat along the sweep (every 4th depth):")
for i in range(0, len(rt.values), 4):
    print("      delta=%.5f  u_hat=%.4f" % (rt.deltas[i], rt.values[i]))
print("  pass fraction over all angles: %.2f (need 0.90);"
      % out["pass_fraction"])
print("  radial < tangential everywhere: %s" % out["dichotomy"])
