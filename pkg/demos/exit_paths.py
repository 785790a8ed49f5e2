"""First exits from the unit disk: exit classes, times against the
closed form, and a single traced path."""

import numpy as np

from sbmpot import Domain, JumpKernel, PathConfig, Subordinator, simulate_exits
from sbmpot.pathsim import EXIT_BOUNDARY, EXIT_JUMP, shard_rng, trace_path

dom = Domain("unit_ball", d=2)
stab = JumpKernel(Subordinator("stable_mixture", alpha=1.0), d=2,
                  delta_cut=0.02)
brown = JumpKernel(Subordinator("brownian_only"), d=2, delta_cut=0.02)

n = 20_000
b = simulate_exits(dom, brown, np.zeros(2), n, seed=1)
t = b.exit_time
print("pure diffusion, %d paths from the centre:" % n)
print("  E[tau] = %.5f +- %.5f   (closed form (1-|x|^2)/(2d) = 0.25)"
      % (t.mean(), t.std(ddof=1) / np.sqrt(n)))
print("  all boundary exits: %s, censored: %.1e"
      % (bool(np.all(b.exit_type == EXIT_BOUNDARY)), b.censored_fraction))

s = simulate_exits(dom, stab, np.zeros(2), n, seed=1)
jump = s.exit_type == EXIT_JUMP
print()
print("with jumps (stable alpha=1):")
print("  boundary-exit fraction F = %.4f, jump-exit fraction = %.4f"
      % ((s.exit_type == EXIT_BOUNDARY).mean(), jump.mean()))
rj = np.linalg.norm(s.exit_pos[jump], axis=1)
print("  jump landings: median |X| = %.3f, max |X| = %.2f"
      % (np.median(rj), rj.max()))

# one path, step by step
rows = trace_path(dom, stab, np.array([0.3, 0.0]), PathConfig(),
                  shard_rng(7, 0))
print()
print("single traced path: %d events, finale %r at t=%.4f"
      % (len(rows), rows[-1][3], rows[-1][1]))
for step, tt, x, ev in rows[:3] + rows[-2:]:
    print("  step %4d  t=%.4f  x=(%+.3f, %+.3f)  %s"
          % (step, tt, x[0], x[1], ev))
