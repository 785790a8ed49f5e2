"""The boundary wins close up: the probability F(x) of exiting by
hitting the boundary (rather than jumping clean over it) climbs toward
1 as the start point slides toward the boundary.  The Gaussian part of
the motion is what makes this happen -- and also what keeps F < 1
strictly inside, since a jump from anywhere can still clear the rim."""

import numpy as np

from sbmpot import Domain, JumpKernel, Subordinator
from sbmpot.pathsim import estimate_F, subseed

dom = Domain("unit_ball", d=2)

for fam, kw in [("stable_mixture", {"alpha": 1.0}),
                ("relativistic", {"alpha": 1.2, "mass": 1.0})]:
    kern = JumpKernel(Subordinator(fam, **kw), d=2, delta_cut=0.02)
    print("%s:" % fam)
    print("  delta     F_hat    stderr")
    prev = None
    for i, delta in enumerate([0.4, 0.2, 0.1, 0.05, 0.025]):
        x = np.array([1.0 - delta, 0.0])
        r = estimate_F(dom, kern, x, 20_000, seed=subseed(14, i))
        step = "" if prev is None else \
            "  (+%.4f, %.0f sigma)" % (r["F_hat"] - prev,
                                       (r["F_hat"] - prev)
                                       / np.hypot(r["stderr"], prev_se))
        print("  %.3f   %.4f   %.4f%s" % (delta, r["F_hat"], r["stderr"],
                                          step))
        prev, prev_se = r["F_hat"], r["stderr"]
    print()

print("each halving of the distance buys a strict, many-sigma increase;")
print("the limit is 1 but the approach is slow (the deficit scales like")
print("the distance, not like a power of it, for these kernels)")
