"""Bounded smooth domains: distances, projections, cones, boundary meshes.

Shipped kinds: ball (any center/radius, d=2,3; "unit_ball" is the origin
unit ball), annulus (concentric, d=2,3), and perturbed_disk (d=2, radial
profile rho(theta) = 1 + eps*cos(k*theta) with eps*k^2 <= 0.1 so the
boundary keeps uniform interior/exterior tangent balls).

All point-wise queries are vectorized over (n,d) arrays and pure.
"""
from __future__ import annotations

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

_PROFILE_GRID = 4096  # curvature / fallback scan resolution for perturbed_disk


class Domain:
    """Immutable bounded C^{1,1} domain with exact distance machinery."""

    def __init__(self, kind, d=2, r_in=None, eps=None, k=None,
                 center=None, radius=None):
        self.kind = kind
        self.d = int(d)
        if self.d not in (2, 3):
            raise ValueError("d must be 2 or 3")
        if kind == "unit_ball":
            self.center = np.zeros(self.d)
            self.radius = 1.0
            self.R0 = 1.0
            self.Lam0 = 1.0
        elif kind == "ball":
            self.center = np.asarray(center, float)
            self.radius = float(radius)
            if self.center.shape != (self.d,) or self.radius <= 0:
                raise ValueError("ball needs center in R^d and radius > 0")
            self.R0 = self.radius
            self.Lam0 = 1.0 / self.radius
        elif kind == "annulus":
            if r_in is None or not 0.0 < r_in < 1.0:
                raise ValueError("annulus needs r_in in (0,1)")
            self.center = np.zeros(self.d)
            self.radius = 1.0
            self.r_in = float(r_in)
            # tangent balls are limited by the hole AND by the gap width
            self.R0 = min(self.r_in, (1.0 - self.r_in) / 2.0)
            self.Lam0 = 1.0 / self.r_in
        elif kind == "perturbed_disk":
            if self.d != 2:
                raise ValueError("perturbed_disk is d=2 only")
            if eps is None or k is None or eps <= 0 or int(k) < 2:
                raise ValueError("perturbed_disk needs eps > 0 and integer k >= 2")
            if eps * k * k > 0.1:
                raise ValueError("need eps*k^2 <= 0.1 for the C^{1,1} bound")
            self.center = np.zeros(2)
            self.radius = 1.0 + eps
            self.eps = float(eps)
            self.k = int(k)
            th = np.linspace(0.0, 2.0 * np.pi, _PROFILE_GRID, endpoint=False)
            rho, dr, ddr = self._profile(th)
            kappa = (rho * rho + 2 * dr * dr - rho * ddr) / (rho * rho + dr * dr) ** 1.5
            self.Lam0 = float(np.max(np.abs(kappa)))
            self.R0 = 0.9 * min(1.0 / self.Lam0, float(np.min(rho)))
        else:
            raise ValueError(f"unknown domain kind {kind!r}")
        self.diam = 2.0 * self.radius

    def __repr__(self):
        return f"Domain({self.kind}, d={self.d})"

    def _profile(self, th):
        rho = 1.0 + self.eps * np.cos(self.k * th)
        dr = -self.eps * self.k * np.sin(self.k * th)
        ddr = -self.eps * self.k * self.k * np.cos(self.k * th)
        return rho, dr, ddr

    def _boundary_curve(self, th):
        rho = 1.0 + self.eps * np.cos(self.k * th)
        return np.stack([rho * np.cos(th), rho * np.sin(th)], axis=-1)

    # -- distances ----------------------------------------------------------

    def signed_dist(self, x):
        """Positive inside (= delta_D), negative outside (= -dist to closure)."""
        x = np.asarray(x, float)
        scalar = x.ndim == 1
        x = np.atleast_2d(x)
        if self.kind in ("unit_ball", "ball"):
            out = self.radius - np.linalg.norm(x - self.center, axis=1)
        elif self.kind == "annulus":
            r = np.linalg.norm(x, axis=1)
            out = np.minimum(1.0 - r, r - self.r_in)
        else:
            out = self._pd_signed(x)
        return out[0] if scalar else out

    def dist(self, x):
        """delta_D(x): distance to the complement, 0 outside."""
        s = self.signed_dist(x)
        return np.maximum(s, 0.0)

    def contains(self, x):
        return self.signed_dist(x) > 0.0

    def project(self, x):
        """Nearest boundary point."""
        x = np.asarray(x, float)
        scalar = x.ndim == 1
        x = np.atleast_2d(x)
        if self.kind in ("unit_ball", "ball"):
            v = x - self.center
            nv = np.linalg.norm(v, axis=1, keepdims=True)
            nv[nv == 0.0] = 1.0
            out = self.center + self.radius * v / nv
        elif self.kind == "annulus":
            r = np.linalg.norm(x, axis=1, keepdims=True)
            r[r == 0.0] = 1.0
            target = np.where(1.0 - r <= r - self.r_in, 1.0, self.r_in)
            out = x / r * target
        else:
            th = self._pd_nearest_angle(x)
            out = self._boundary_curve(th)
        return out[0] if scalar else out

    def _pd_nearest_angle(self, x):
        # Newton on f(th) = (x - c(th)).c'(th) from the polar angle; the
        # profile is a <=10% perturbation of the circle so this converges
        # fast except near the center, where a coarse scan seeds it instead.
        th = np.arctan2(x[:, 1], x[:, 0])
        close = np.linalg.norm(x, axis=1) < 0.3
        if close.any():
            grid = np.linspace(0.0, 2.0 * np.pi, 128, endpoint=False)
            b = self._boundary_curve(grid)
            d2 = ((x[close, None, :] - b[None, :, :]) ** 2).sum(axis=2)
            th[close] = grid[np.argmin(d2, axis=1)]
        for _ in range(8):
            rho, dr, ddr = self._profile(th)
            ct, st = np.cos(th), np.sin(th)
            c = np.stack([rho * ct, rho * st], axis=-1)
            cp = np.stack([dr * ct - rho * st, dr * st + rho * ct], axis=-1)
            cpp = np.stack([(ddr - rho) * ct - 2 * dr * st,
                            (ddr - rho) * st + 2 * dr * ct], axis=-1)
            v = x - c
            f = (v * cp).sum(axis=1)
            fp = (v * cpp).sum(axis=1) - (cp * cp).sum(axis=1)
            step = f / np.where(np.abs(fp) < 1e-14, -1e-14, fp)
            step = np.clip(step, -0.5, 0.5)
            th = th - step
        return th

    def _pd_signed(self, x):
        th = self._pd_nearest_angle(x)
        d = np.linalg.norm(x - self._boundary_curve(th), axis=1)
        r = np.linalg.norm(x, axis=1)
        rho = 1.0 + self.eps * np.cos(self.k * np.arctan2(x[:, 1], x[:, 0]))
        return np.where(r < rho, d, -d)

    def normal(self, z):
        """Outward unit normal at boundary point(s) z."""
        z = np.asarray(z, float)
        scalar = z.ndim == 1
        z = np.atleast_2d(z)
        if self.kind in ("unit_ball", "ball"):
            v = z - self.center
            out = v / np.linalg.norm(v, axis=1, keepdims=True)
        elif self.kind == "annulus":
            r = np.linalg.norm(z, axis=1, keepdims=True)
            sign = np.where(r > (1.0 + self.r_in) / 2.0, 1.0, -1.0)
            out = sign * z / r
        else:
            th = np.arctan2(z[:, 1], z[:, 0])
            rho, dr, _ = self._profile(th)
            ct, st = np.cos(th), np.sin(th)
            tx, ty = dr * ct - rho * st, dr * st + rho * ct
            out = np.stack([ty, -tx], axis=-1)
            out /= np.linalg.norm(out, axis=1, keepdims=True)
        return out[0] if scalar else out

    # -- surface measure ----------------------------------------------------

    def surface_measure(self):
        if self.kind in ("unit_ball", "ball"):
            if self.d == 2:
                return 2.0 * np.pi * self.radius
            return 4.0 * np.pi * self.radius ** 2
        if self.kind == "annulus":
            if self.d == 2:
                return 2.0 * np.pi * (1.0 + self.r_in)
            return 4.0 * np.pi * (1.0 + self.r_in ** 2)
        th = np.linspace(0.0, 2.0 * np.pi, 1 << 14, endpoint=False)
        rho, dr, _ = self._profile(th)
        # periodic trapezoid rule is spectrally accurate here
        return float(np.sqrt(rho * rho + dr * dr).sum() * (2.0 * np.pi / (1 << 14)))

    def boundary_ball_measure(self, z, r):
        """Exact surface measure of B(z, r) intersected with the boundary."""
        z = np.asarray(z, float)
        if self.kind in ("unit_ball", "ball"):
            a = self.radius
            if self.d == 2:
                return 4.0 * a * np.arcsin(min(r / (2.0 * a), 1.0))
            return np.pi * min(r, 2.0 * a) ** 2
        if self.kind == "annulus":
            if self.d == 2:
                rz = np.linalg.norm(z)
                total = 0.0
                for rc in (1.0, self.r_in):
                    cosphi = (rc * rc + rz * rz - r * r) / (2.0 * rc * rz)
                    total += 2.0 * rc * np.arccos(np.clip(cosphi, -1.0, 1.0))
                return total
            rz = np.linalg.norm(z)
            total = 0.0
            for rc in (1.0, self.r_in):
                # spherical cap of the concentric sphere cut by |w-z| <= r
                cosphi = (rc * rc + rz * rz - r * r) / (2.0 * rc * rz)
                total += 2.0 * np.pi * rc * rc * (1.0 - np.clip(cosphi, -1.0, 1.0))
            return total
        return self._pd_ball_measure(z, r)

    def _pd_ball_measure(self, z, r):
        n = _PROFILE_GRID
        th = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
        f = np.linalg.norm(self._boundary_curve(th) - z, axis=1) - r
        inside = f < 0.0
        if not inside.any():
            return 0.0
        if inside.all():
            return self.surface_measure()

        def g(t):
            return float(np.linalg.norm(self._boundary_curve(np.array([t]))[0] - z) - r)

        def ds(t):
            rho, dr, _ = self._profile(np.array([t]))
            return float(np.sqrt(rho * rho + dr * dr)[0])

        h = 2.0 * np.pi / n
        cross = [brentq(g, th[i], th[i] + h, xtol=1e-12)
                 for i in range(n) if inside[i] != inside[(i + 1) % n]]
        # pair crossings into the windows where the boundary is inside B(z,r)
        if inside[0]:
            pts = [0.0] + cross + [2.0 * np.pi]
        else:
            pts = cross
        total = 0.0
        for a, b in zip(pts[0::2], pts[1::2]):
            val, _ = quad(ds, a, b, limit=100)
            total += val
        return total

    def boundary_mesh(self, n_cells):
        return BoundaryMesh(self, n_cells)


class BoundaryMesh:
    """Partition of the boundary into cells of comparable surface measure."""

    def __init__(self, domain: Domain, n_cells):
        if n_cells < 8:
            raise ValueError("n_cells must be >= 8")
        self.domain = domain
        d, kind = domain.d, domain.kind
        if kind in ("unit_ball", "ball") and d == 2:
            a, c = domain.radius, domain.center
            self.kind = "circle"
            self.n_theta = int(n_cells)
            th = (np.arange(n_cells) + 0.5) * 2.0 * np.pi / n_cells
            self.centers = c + a * np.stack([np.cos(th), np.sin(th)], axis=-1)
            self.sigmas = np.full(n_cells, 2.0 * np.pi * a / n_cells)
            self.thetas = th
        elif kind in ("unit_ball", "ball") and d == 3:
            self._build_sphere(domain, n_cells)
        elif kind == "annulus" and d == 2:
            frac = 1.0 / (1.0 + domain.r_in)
            n_out = max(4, int(round(n_cells * frac)))
            n_in = max(4, n_cells - n_out)
            self.kind = "two_circles"
            self.n_out, self.n_in = n_out, n_in
            th_o = (np.arange(n_out) + 0.5) * 2.0 * np.pi / n_out
            th_i = (np.arange(n_in) + 0.5) * 2.0 * np.pi / n_in
            co = np.stack([np.cos(th_o), np.sin(th_o)], axis=-1)
            ci = domain.r_in * np.stack([np.cos(th_i), np.sin(th_i)], axis=-1)
            self.centers = np.concatenate([co, ci])
            self.sigmas = np.concatenate([
                np.full(n_out, 2.0 * np.pi / n_out),
                np.full(n_in, 2.0 * np.pi * domain.r_in / n_in)])
        elif kind == "perturbed_disk":
            self._build_perturbed(domain, n_cells)
        else:
            raise ValueError(f"no mesh rule for {kind} in d={d}")
        self.n_cells = len(self.sigmas)

    def _build_sphere(self, domain, n_cells):
        a, c = domain.radius, domain.center
        self.kind = "sphere"
        n_b = max(2, int(round(np.sqrt(n_cells * np.pi) / 2.0)))
        edges = np.linspace(-1.0, 1.0, n_b + 1)  # equal-area bands in z/a
        self.band_edges = edges
        counts, centers, sigmas, phases = [], [], [], []
        for b in range(n_b):
            zc = 0.5 * (edges[b] + edges[b + 1])
            frac = (edges[b + 1] - edges[b]) / 2.0
            m_b = max(1, int(round(n_cells * frac)))
            counts.append(m_b)
            phase = np.pi * b / n_b
            phases.append(phase)
            ph = phase + (np.arange(m_b) + 0.5) * 2.0 * np.pi / m_b
            s = np.sqrt(max(0.0, 1.0 - zc * zc))
            for p in ph:
                centers.append(c + a * np.array([s * np.cos(p), s * np.sin(p), zc]))
            band_area = 2.0 * np.pi * a * a * (edges[b + 1] - edges[b])
            sigmas.extend([band_area / m_b] * m_b)
        self.band_counts = np.array(counts)
        self.band_phases = np.array(phases)
        self.band_start = np.concatenate([[0], np.cumsum(counts)])
        self.centers = np.array(centers)
        self.sigmas = np.array(sigmas)

    def _build_perturbed(self, domain, n_cells):
        self.kind = "curve"
        th = np.linspace(0.0, 2.0 * np.pi, 1 << 14)
        rho, dr, _ = domain._profile(th)
        ds = np.sqrt(rho * rho + dr * dr)
        s = np.concatenate([[0.0], np.cumsum(0.5 * (ds[1:] + ds[:-1]) * np.diff(th))])
        total = s[-1]
        s_edges = np.linspace(0.0, total, n_cells + 1)
        th_edges = np.interp(s_edges, s, th)
        th_mid = np.interp(0.5 * (s_edges[1:] + s_edges[:-1]), s, th)
        self.centers = domain._boundary_curve(th_mid)
        self.sigmas = np.full(n_cells, total / n_cells)
        self._s_of_th = (th, s)
        self._total_len = total

    def cell_of(self, pts):
        """Index of the cell whose boundary patch contains each point."""
        pts = np.asarray(pts, float)
        scalar = pts.ndim == 1
        pts = np.atleast_2d(pts)
        dom = self.domain
        if self.kind == "circle":
            v = pts - dom.center
            th = np.mod(np.arctan2(v[:, 1], v[:, 0]), 2.0 * np.pi)
            idx = np.minimum((th / (2.0 * np.pi) * self.n_theta).astype(int),
                             self.n_theta - 1)
        elif self.kind == "sphere":
            v = (pts - dom.center) / dom.radius
            z = np.clip(v[:, 2], -1.0, 1.0)
            n_b = len(self.band_counts)
            b = np.minimum(((z + 1.0) / 2.0 * n_b).astype(int), n_b - 1)
            ph = np.mod(np.arctan2(v[:, 1], v[:, 0]) - self.band_phases[b], 2.0 * np.pi)
            m = self.band_counts[b]
            idx = self.band_start[b] + np.minimum((ph / (2.0 * np.pi) * m).astype(int), m - 1)
        elif self.kind == "two_circles":
            r = np.linalg.norm(pts, axis=1)
            th = np.mod(np.arctan2(pts[:, 1], pts[:, 0]), 2.0 * np.pi)
            outer = np.abs(r - 1.0) <= np.abs(r - dom.r_in)
            idx = np.where(
                outer,
                np.minimum((th / (2 * np.pi) * self.n_out).astype(int), self.n_out - 1),
                self.n_out + np.minimum((th / (2 * np.pi) * self.n_in).astype(int),
                                        self.n_in - 1))
        else:
            th = np.mod(np.arctan2(pts[:, 1], pts[:, 0]), 2.0 * np.pi)
            tg, sg = self._s_of_th
            s = np.interp(th, tg, sg)
            n = self.n_cells
            idx = np.minimum((s / self._total_len * n).astype(int), n - 1)
        return idx[0] if scalar else idx


class ConeSpec:
    """Nontangential approach region at a boundary point."""

    def __init__(self, z, beta, r0):
        self.z = np.asarray(z, float)
        self.beta = float(beta)
        self.r0 = float(r0)
        kappa = r0 / 2.0
        if not self.beta > max(1.0, (1.0 - kappa) / kappa):
            raise ValueError("aperture too small: the cone is empty")


def stolz_contains(domain: Domain, cone: ConeSpec, x):
    """x lies in the Stolz cone of aperture beta at cone.z."""
    x = np.asarray(x, float)
    scalar = x.ndim == 1
    x = np.atleast_2d(x)
    d = domain.dist(x)
    r = np.linalg.norm(x - cone.z, axis=1)
    out = (d < cone.r0) & (r < cone.beta * d) & (d > 0.0)
    return bool(out[0]) if scalar else out


def cone_sequence(domain: Domain, cone: ConeSpec, n, mode="radial"):
    """n points marching to cone.z inside the cone, delta_D halving each step."""
    if n < 1:
        raise ValueError("n >= 1")
    nrm = domain.normal(cone.z)
    t = cone.r0 * 0.5 ** np.arange(1, n + 1)
    if mode == "radial":
        pts = cone.z[None, :] - t[:, None] * nrm[None, :]
    elif mode == "zigzag":
        tau = np.zeros_like(nrm)
        tau[0], tau[1] = -nrm[1], nrm[0]  # any tangential direction works
        c = 0.5 * np.sqrt(cone.beta ** 2 - 1.0)
        while True:
            off = c * t * (-1.0) ** np.arange(1, n + 1)
            pts = cone.z[None, :] - t[:, None] * nrm[None, :] + off[:, None] * tau[None, :]
            if stolz_contains(domain, cone, pts).all():
                break
            c *= 0.5
            if c < 1e-6:
                raise RuntimeError("could not fit a zigzag inside the cone")
    else:
        raise ValueError("mode must be radial or zigzag")
    if not stolz_contains(domain, cone, pts).all():
        raise RuntimeError("cone sequence left the Stolz cone")
    return pts


def tangential_curve(theta, gamma, deltas):
    """Unit-disk boundary approach with angular offset delta^gamma.

    The ratio |x - w| / delta_D(x) ~ delta^(gamma-1) blows up, so the tail
    leaves every Stolz cone.
    """
    if not 0.0 < gamma < 1.0:
        raise ValueError("gamma must lie in (0,1)")
    deltas = np.asarray(deltas, float)
    ang = theta + deltas ** gamma
    return np.stack([(1.0 - deltas) * np.cos(ang),
                     (1.0 - deltas) * np.sin(ang)], axis=-1)
