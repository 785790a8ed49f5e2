"""The jump kernel j(r) behind a subordinate Brownian motion: small-r
power law, compound-Poisson rate above the cutoff, and jump sampling."""

import numpy as np

from sbmpot import JumpKernel, Subordinator

kern = JumpKernel(Subordinator("stable_mixture", alpha=1.0), d=2,
                  delta_cut=0.02)

# alpha=1 in d=2: j(r) ~ A(2,1) r^-3 with A(2,1) = 1/(2 pi)
r = np.array([1e-3, 1e-2, 1e-1, 1.0, 3.0])
print("r          j(r)          j(r)*2pi*r^3")
for ri, ji in zip(r, kern.jump_density(r)):
    print("%8.0e  %12.5g  %12.5g" % (ri, ji, ji * 2 * np.pi * ri ** 3))

print()
print("compound-Poisson rate above delta=0.02: lam = %.3f  (1/delta = %.0f)"
      % (kern.lam, 1 / 0.02))
print("small-jump variance substitute sigma2 = %.5g" % kern.sigma2_small)

# the sampled radial law should integrate the tail: check a couple of
# quantiles against tail_mass
rng = np.random.default_rng(0)
jumps = kern.sample_jump(rng, 200_000)
rr = np.linalg.norm(jumps, axis=1)
print()
print("sampled jumps: min r = %.4f (cutoff %.3f)" % (rr.min(), kern.delta_cut))
for q in (0.1, 0.5):
    frac = float((rr > q).mean())
    print("P(jump > %.1f): sampled %.4f   tail_mass ratio %.4f"
          % (q, frac, kern.tail_mass(q) / kern.lam))

# isotropy: mean of the unit directions should vanish like n^-1/2
# (raw jump vectors are no good here -- the heavy tail lets one giant
# jump dominate the average)
u = jumps / rr[:, None]
print("mean unit direction: %s  (expect ~ %.4f)"
      % (np.round(u.mean(axis=0), 4), 1 / np.sqrt(len(rr))))
