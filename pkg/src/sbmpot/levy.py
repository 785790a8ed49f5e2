"""Isotropic jump kernel of the subordinated motion.

j(r) = int_0^inf (4*pi*t)^(-d/2) exp(-r^2/(4t)) m(t) dt, the radial density
of the Levy measure J(dy) = j(|y|) dy in R^d.  The compound-Poisson cutoff
machinery lives here too: tail intensity Lambda(delta), the per-coordinate
variance rate of the discarded small jumps, and an inverse-CDF sampler for
jump radii above the cutoff.

Tail mass and small-jump variance swap the (r,t) integration order
analytically, which turns nested quadratures into single well-behaved ones:

    Lambda(delta)      = int m(t) * P(chi2_d > delta^2/(2t)) dt
    sigma2_small(delta) = int m(t) * 2t * P(chi2_{d+2} <= delta^2/(2t)) dt

(per-coordinate Brownian variance is 2t; the second identity uses
E[chi2_d; chi2_d <= x] = d * P(chi2_{d+2} <= x)).
"""
from __future__ import annotations

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import PchipInterpolator
from scipy.special import gamma
from scipy.stats import chi2

from .bernstein import Subordinator


def sphere_surface(d):
    """Surface measure of the unit sphere S^{d-1}."""
    return 2.0 * np.pi ** (d / 2.0) / gamma(d / 2.0)


def stable_jump_coeff(d, alpha):
    """A(d,alpha) in j(r) = A r^{-d-alpha} for the alpha/2-stable clock."""
    return (alpha * 2.0 ** (alpha - 1.0) * np.pi ** (-d / 2.0)
            * gamma((d + alpha) / 2.0) / gamma(1.0 - alpha / 2.0))


class JumpKernel:
    """Dimension-tagged jump kernel with cutoff tables, immutable after build."""

    def __init__(self, sub: Subordinator, d, delta_cut, table_size=4096,
                 spline_knots=1024):
        if d not in (2, 3):
            raise ValueError("d must be 2 or 3")
        if delta_cut <= 0.0:
            raise ValueError("delta_cut must be positive")
        self.sub = sub
        self.d = int(d)
        self.delta_cut = float(delta_cut)
        self.sd1 = sphere_surface(d)
        if not sub.has_jumps:
            self.lam = 0.0
            self.sigma2_small = 0.0
            self._spline = None
            self._table = None
            return
        self.lam = self.tail_mass(delta_cut)
        self.sigma2_small = self.small_jump_variance(delta_cut)
        self._build_spline(spline_knots)
        self._build_tail_table(table_size)

    # -- pointwise density --------------------------------------------------

    def jump_density_exact(self, r):
        """Adaptive quadrature for j(r) after t = r^2 u (scale-free form)."""
        if not self.sub.has_jumps:
            return 0.0
        if r <= 0.0:
            raise ValueError("jump_density requires r > 0")
        d = self.d
        m = self.sub.levy_density
        pref = (4.0 * np.pi) ** (-d / 2.0) * r ** (2.0 - d)
        val, _ = quad(lambda u: u ** (-d / 2.0) * np.exp(-0.25 / u) * m(r * r * u),
                      0.0, np.inf, limit=200, epsrel=1e-9, epsabs=0.0)
        return pref * val

    def jump_density(self, r):
        """Memoized j(r), vectorized; power-law extension outside the knots."""
        if not self.sub.has_jumps:
            return np.zeros_like(np.asarray(r, float)) if np.ndim(r) else 0.0
        r = np.asarray(r, float)
        scalar = r.ndim == 0
        r = np.atleast_1d(r)
        if np.any(r <= 0.0):
            raise ValueError("jump_density requires r > 0")
        lr = np.log(r)
        lo, hi = self._lr_lo, self._lr_hi
        out = np.empty_like(lr)
        below = lr < lo
        above = lr > hi
        mid = ~(below | above)
        if mid.any():
            out[mid] = self._spline(lr[mid])
        if below.any():
            out[below] = self._j_lo + self._slope_lo * (lr[below] - lo)
        if above.any():
            out[above] = self._j_hi + self._slope_hi * (lr[above] - hi)
        out = np.exp(out)
        return out[0] if scalar else out

    def _build_spline(self, knots):
        r_lo = self.delta_cut / 100.0
        r_hi = self._tail_radius()
        lr = np.linspace(np.log(r_lo), np.log(r_hi), knots)
        lj = np.log([self.jump_density_exact(np.exp(x)) for x in lr])
        self._spline = PchipInterpolator(lr, lj, extrapolate=False)
        self._lr_lo, self._lr_hi = lr[0], lr[-1]
        self._j_lo, self._j_hi = lj[0], lj[-1]
        self._slope_lo = (lj[1] - lj[0]) / (lr[1] - lr[0])
        self._slope_hi = (lj[-1] - lj[-2]) / (lr[-1] - lr[-2])

    def _tail_radius(self):
        """Radius beyond which the residual jump intensity is < 1e-9 * Lambda."""
        target = 1e-9 * self.lam
        r = self.delta_cut
        while self.tail_mass(r) > target:
            r *= 2.0
            if r > 1e12 * self.delta_cut:
                break
        return r

    # -- cutoff moments ------------------------------------------------------

    def tail_mass(self, delta):
        """Lambda(delta): total intensity of jumps of size > delta."""
        if not self.sub.has_jumps:
            return 0.0
        if delta <= 0.0:
            raise ValueError("tail_mass requires delta > 0")
        d, m = self.d, self.sub.levy_density
        # t = delta^2 w / 2 makes the integrand scale-free
        c = delta * delta / 2.0
        val, _ = quad(lambda w: m(c * w) * chi2.sf(1.0 / w, d) * c,
                      0.0, np.inf, limit=300, epsrel=1e-9, epsabs=0.0)
        return val

    def small_jump_variance(self, delta):
        """Per-coordinate variance rate of the jumps at or below delta."""
        if not self.sub.has_jumps:
            return 0.0
        if delta <= 0.0:
            raise ValueError("small_jump_variance requires delta > 0")
        d, m = self.d, self.sub.levy_density
        c = delta * delta / 2.0
        val, _ = quad(lambda w: m(c * w) * 2.0 * (c * w) * chi2.cdf(1.0 / w, d + 2) * c,
                      0.0, np.inf, limit=300, epsrel=1e-9, epsabs=0.0)
        return val

    # -- sampler -------------------------------------------------------------

    def _build_tail_table(self, table_size):
        d = self.d
        lr = np.linspace(np.log(self.delta_cut), self._lr_hi, table_size)
        r = np.exp(lr)
        # d Lambda = -s_{d-1} j(r) r^{d-1} dr = -s_{d-1} j r^d dlog r
        dens = self.sd1 * self.jump_density(r) * r ** d
        seg = 0.5 * (dens[1:] + dens[:-1]) * np.diff(lr)
        tail = np.concatenate([seg[::-1].cumsum()[::-1], [0.0]])
        # residual mass beyond the last radius, folded into the last bin
        p = -self._slope_hi - d
        resid = dens[-1] / p if p > 0 else 0.0
        tail += resid
        total = tail[0]
        cdf = 1.0 - tail / total
        cdf[0], cdf[-1] = 0.0, 1.0
        keep = np.concatenate([[True], np.diff(cdf) > 0.0])
        keep[-1] = True
        self._table = PchipInterpolator(cdf[keep], lr[keep], extrapolate=False)
        self._table_total = total

    def sample_radius(self, rng, size):
        """Jump radii above the cutoff via the inverse-CDF table."""
        if not self.sub.has_jumps:
            raise ValueError("no jump part to sample")
        return np.exp(self._table(rng.random(size)))

    def sample_jump(self, rng, size=None):
        """Isotropic displacement(s) with radius from the tail table."""
        n = 1 if size is None else int(size)
        rad = self.sample_radius(rng, n)
        if self.d == 2:
            th = rng.random(n) * (2.0 * np.pi)
            out = np.column_stack([rad * np.cos(th), rad * np.sin(th)])
        else:
            g = rng.standard_normal((n, 3))
            g /= np.linalg.norm(g, axis=1, keepdims=True)
            out = g * rad[:, None]
        return out[0] if size is None else out

    def mean_jump_radius(self):
        """Quadrature oracle: E[radius | jump above cutoff]."""
        d = self.d
        val, _ = quad(lambda r: self.jump_density(r) * r ** d, self.delta_cut,
                      np.exp(self._lr_hi), limit=300)
        # power-law residual of the first-moment integral past the table
        p = -self._slope_hi - d - 1.0
        rhi = np.exp(self._lr_hi)
        resid = self.jump_density(rhi) * rhi ** (d + 1) / p if p > 0 else 0.0
        return self.sd1 * (val + resid) / self.lam
