"""Deterministic kernel formulas and estimator post-processing.

Closed forms: the Green-function envelope and the Martin-kernel surrogate
shape delta_D(x)/|x-z|^d (envelope constants set to 1).  Estimators: Green
ratios extrapolated toward the boundary, the Poisson kernel as a Green-cell
quadrature against the jump density, the two-route check of the jump-exit
identity, the boundary exit density on a mesh, and a Harnack ratio probe.
"""
import csv

import numpy as np

from . import pathsim
from .pathsim import (EXIT_BOUNDARY, EXIT_CENSORED, PathConfig, SpatialGrid,
                      functional_stats, simulate_exits)


class KernelGrid:
    """Per-cell estimates over a mesh or spatial grid: values, stderr, sample
    count, plus (optionally) the batch accumulator behind them so that later
    cell quadratures can carry honest clustered error bars."""

    def __init__(self, cells, values, stderr, n, accum=None):
        self.cells = cells
        self.values = np.asarray(values, float)
        self.stderr = np.asarray(stderr, float)
        self.n = int(n)
        self.accum = accum

    @property
    def n_cells(self):
        return self.values.size

    def merge(self, other):
        """Exact pooling of two independent runs over the same cells."""
        if other.cells is not self.cells and other.n_cells != self.n_cells:
            raise ValueError("grids cover different cells")
        n1, n2 = self.n, other.n
        vals = (n1 * self.values + n2 * other.values) / (n1 + n2)
        if self.accum is not None and other.accum is not None:
            acc = self.accum.merge(other.accum)
            mean, se = acc.mean_stderr()
            vols = getattr(self.cells, "vols", None)
            errs = se / vols if vols is not None else se
            return KernelGrid(self.cells, vals, errs, n1 + n2, accum=acc)
        errs = np.sqrt((n1 * self.stderr) ** 2 + (n2 * other.stderr) ** 2) / (n1 + n2)
        return KernelGrid(self.cells, vals, errs, n1 + n2)

    def to_csv(self, path):
        centers = self.cells.centers
        d = centers.shape[1]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["cell"] + ["c%s" % "xyz"[i] for i in range(d)]
                       + ["value", "stderr", "n"])
            for i in range(self.n_cells):
                w.writerow([i] + [repr(float(c)) for c in centers[i]]
                           + [repr(float(self.values[i])),
                              repr(float(self.stderr[i])), self.n])


# -- closed forms -----------------------------------------------------------

def green_envelope(dom, x, y):
    """Two-sided Green envelope shape g_D(x,y): |x-y|^(2-d) * (1 ^ dd'/|x-y|^2)
    for d >= 3, log(1 + dd'/|x-y|^2) for d = 2.  Infinite at x = y."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    dx = dom.dist(x)
    dy = dom.dist(y)
    r2 = np.sum((x - y) ** 2, axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        q = dx * dy / r2
        if dom.d == 2:
            out = np.log1p(q)
        else:
            out = r2 ** (1.0 - dom.d / 2.0) * np.minimum(1.0, q)
    return np.where(r2 == 0.0, np.inf, out)


def martin_surrogate(dom, x, z):
    """Martin-kernel envelope shape delta_D(x)/|x-z|^d with constants 1."""
    x = np.asarray(x, float)
    z = np.asarray(z, float)
    r = np.linalg.norm(np.atleast_2d(x) - np.atleast_2d(z), axis=-1)
    if x.ndim == 1 and z.ndim == 1:
        r = r[0]
    return dom.dist(x) / r ** dom.d


def _default_x0(dom):
    if dom.contains(dom.center):
        return np.asarray(dom.center, float)
    # annulus: center of mass sits in the hole; use a mid-gap point instead
    x0 = np.zeros(dom.d)
    x0[0] = 0.5 * (dom.r_in + 1.0)
    return x0


# -- Green-based estimators -------------------------------------------------

def martin_estimate(dom, kern, x, z, t_levels, n, cfg=None, seed=0, lanes=1,
                    x0=None, grid=None):
    """Martin kernel at (x, z) as the Richardson-extrapolated ratio
    G_hat(x, y_t)/G_hat(x0, y_t) along y_t = z - t*n(z), t in t_levels.

    Two independent occupation runs (seeds derived from `seed`) feed the
    numerator and denominator.  Raises when any needed cell has
    stderr/value > 0.2 ("insufficient samples").
    """
    t_levels = sorted((float(t) for t in t_levels), reverse=True)
    if len(t_levels) < 2:
        raise ValueError("need at least two t_levels")
    if grid is None:
        grid = SpatialGrid(dom, 48, 64)
    cell_size = (grid.r_edges[-1] - grid.r_edges[0]) / grid.n_r
    if t_levels[-1] < 10.0 * cell_size:
        raise ValueError("smallest t_level %g below 10x cell size %g"
                         % (t_levels[-1], cell_size))
    x0 = _default_x0(dom) if x0 is None else np.asarray(x0, float)
    z = np.asarray(z, float)
    nrm = dom.normal(z)
    ys = np.array([z - t * nrm for t in t_levels])
    cells = grid.cell_of(ys)

    g_x = pathsim.occupation_green(dom, kern, x, grid, n, cfg,
                                   seed=pathsim.subseed(seed, 0), lanes=lanes)
    g_0 = pathsim.occupation_green(dom, kern, x0, grid, n, cfg,
                                   seed=pathsim.subseed(seed, 1), lanes=lanes)
    for kg, tag in ((g_x, "numerator"), (g_0, "denominator")):
        v, s = kg.values[cells], kg.stderr[cells]
        bad = ~np.isfinite(s) | (v <= 0.0) | (s > 0.2 * np.abs(v))
        if bad.any():
            raise RuntimeError("insufficient samples: %s Green cells at t=%s "
                               "have stderr/value > 0.2"
                               % (tag, [t_levels[i] for i in np.flatnonzero(bad)]))
    ratios = g_x.values[cells] / g_0.values[cells]
    rerr = ratios * np.sqrt((g_x.stderr[cells] / g_x.values[cells]) ** 2
                            + (g_0.stderr[cells] / g_0.values[cells]) ** 2)
    # first-order Richardson from the two smallest levels
    t1, t2 = t_levels[-2], t_levels[-1]
    r1, r2 = ratios[-2], ratios[-1]
    m_hat = (t1 * r2 - t2 * r1) / (t1 - t2)
    m_err = np.hypot(t1 * rerr[-1], t2 * rerr[-2]) / (t1 - t2)
    diffs = np.diff(ratios)
    monotone = bool(np.all(diffs >= -rerr[1:] - rerr[:-1])
                    or np.all(diffs <= rerr[1:] + rerr[:-1]))
    return {"M_hat": float(m_hat), "stderr": float(m_err),
            "t_levels": t_levels, "ratios": ratios.tolist(),
            "ratio_stderr": rerr.tolist(), "monotone_trend": monotone,
            "x0": x0.tolist()}


def poisson_K(dom, kern, green, z_out, eps_b=None):
    """Poisson kernel K_D(x, z_out) as the Green-cell quadrature
    sum_c G_hat(x, c) * j(|c - z_out|) * vol(c)."""
    if eps_b is None:
        eps_b = 1e-4 * dom.diam
    z_out = np.asarray(z_out, float)
    if dom.signed_dist(z_out) > -eps_b:
        raise ValueError("singular target: z_out within eps_b of the boundary")
    grid = green.cells
    w = kern.jump_density(np.linalg.norm(grid.centers - z_out, axis=1))
    if green.accum is not None:
        est, se = green.accum.linear_stat(w)
    else:
        est = float(np.sum(green.values * w * grid.vols))
        se = float(np.sqrt(np.sum((green.stderr * w * grid.vols) ** 2)))
    return {"K_hat": est, "stderr": se}


def _exterior_nodes(dom, r_lo, r_hi, n_r, n_th):
    """Polar midpoint rule on the annulus r_lo < |z - center| < r_hi."""
    re = np.linspace(r_lo, r_hi, n_r + 1)
    rm = 0.5 * (re[:-1] + re[1:])
    if dom.d == 2:
        dth = 2.0 * np.pi / n_th
        th = (np.arange(n_th) + 0.5) * dth
        dirs = np.stack([np.cos(th), np.sin(th)], axis=1)
        wang = np.full(n_th, dth)
    else:
        from .geometry import Domain, BoundaryMesh
        sm = BoundaryMesh(Domain("unit_ball", d=3), n_th)
        dirs = sm.centers / np.linalg.norm(sm.centers, axis=1, keepdims=True)
        wang = sm.sigmas
    nodes = (rm[:, None, None] * dirs[None, :, :]).reshape(-1, dom.d) + dom.center
    rpow = rm ** (dom.d - 1) * np.diff(re)
    wts = np.outer(rpow, wang).ravel()
    return nodes, wts


def levy_system_check(dom, kern, x, f, n, cfg=None, seed=0, lanes=1,
                      grid=None, n_r_ext=128, n_th_ext=128, f_sup=None,
                      green=None):
    """Two independent routes to E_x[f(X_tau); jump exit].

    mc: the jump-exit functional by direct simulation.  quad: the Green
    occupation grid from a second, independently seeded run, integrated
    against the jump density over a truncated exterior shell; the truncation
    radius is grown until sup|f| * (mean exit time) * tail_mass(radius margin)
    certifies < 1% of the running quadrature value.  Pass a precomputed
    occupation KernelGrid as green= to reuse one expensive Green run across
    several test functions (it must come from paths independent of this
    seed's mc side).
    """
    if kern.lam == 0.0:
        return {"mc": 0.0, "mc_stderr": 0.0, "quad": 0.0, "quad_stderr": 0.0,
                "sigma_distance": 0.0, "truncation_radius": 0.0,
                "truncation_bound": 0.0, "censored_fraction": 0.0}
    cfg = cfg if cfg is not None else PathConfig()
    eps_b = cfg.eps_b if cfg.eps_b is not None else 1e-4 * dom.diam
    mc = pathsim.exit_functional(dom, kern, x, f, cls="jump", n=n, cfg=cfg,
                                 seed=seed, lanes=lanes)
    if green is not None:
        grid = green.cells
    elif grid is None:
        grid = SpatialGrid(dom, 48, 64) if dom.d == 2 else SpatialGrid(dom, 32, 256)
    if green is None:
        green = pathsim.occupation_green(dom, kern, x, grid, n, cfg,
                                         seed=pathsim.subseed(seed, 101),
                                         lanes=lanes)
    mean_tau = green.mean_exit_time
    if f_sup is None:
        probe, pw = _exterior_nodes(dom, dom.radius + eps_b, dom.radius + 40.0,
                                    256, 64)
        f_sup = float(np.max(np.abs(f(probe))))
        f_sup = max(f_sup, 1e-12)
    r_far = float(np.max(np.linalg.norm(grid.centers - dom.center, axis=1)))
    mean_cell = green.accum.mean_stderr()[0]  # mean time per cell

    r_t = dom.radius + 1.0
    quad = 0.0
    w_cell = np.zeros(grid.n_cells)
    r_prev = dom.radius + eps_b
    for _ in range(60):
        nodes, wts = _exterior_nodes(dom, r_prev, r_t, n_r_ext, n_th_ext)
        fv = np.asarray(f(nodes), float)
        live = np.flatnonzero(fv != 0.0)
        if live.size:
            for lo in range(0, live.size, 1024):
                sel = live[lo:lo + 1024]
                dist = np.linalg.norm(grid.centers[:, None, :]
                                      - nodes[sel][None, :, :], axis=2)
                w_cell += kern.jump_density(dist) @ (fv[sel] * wts[sel])
        quad = float(mean_cell @ w_cell)
        bound = f_sup * mean_tau * kern.tail_mass(max(r_t - r_far,
                                                      kern.delta_cut))
        if bound < 0.01 * abs(quad) or (quad == 0.0 and bound < 1e-15):
            break
        r_prev, r_t = r_t, dom.radius + 2.0 * (r_t - dom.radius)
    else:
        raise RuntimeError("truncation bound %g not attainable below radius %g"
                           % (bound, r_t))
    est, se = green.accum.linear_stat(w_cell)
    comb = float(np.hypot(mc["stderr"], se))
    sig = abs(mc["estimate"] - est) / comb if comb > 0 else 0.0
    return {"mc": mc["estimate"], "mc_stderr": mc["stderr"], "quad": est,
            "quad_stderr": se, "sigma_distance": float(sig),
            "truncation_radius": float(r_t), "truncation_bound": float(bound),
            "censored_fraction": mc["censored_fraction"]}


# -- boundary estimators ----------------------------------------------------

def boundary_density(dom, kern, x, mesh, n, cfg=None, seed=0, lanes=1,
                     batch=None):
    """Harmonic-measure density on the mesh: P_hat(x, cell) =
    (#boundary exits in cell)/(n_effective * sigma_cell); the cell sums
    reproduce F_hat exactly (same paths)."""
    if batch is None:
        if n < 10_000:
            raise ValueError("need n >= 1e4")
        batch = simulate_exits(dom, kern, x, n, cfg, seed=seed, lanes=lanes)
    live = batch.exit_type != EXIT_CENSORED
    n_eff = int(live.sum())
    bnd = batch.exit_type == EXIT_BOUNDARY
    counts = np.bincount(mesh.cell_of(batch.exit_pos[bnd]),
                         minlength=mesh.n_cells).astype(float)
    p = counts / n_eff
    vals = p / mesh.sigmas
    errs = np.sqrt(p * (1.0 - p) / n_eff) / mesh.sigmas
    kg = KernelGrid(mesh, vals, errs, batch.n)
    kg.counts = counts
    kg.n_effective = n_eff
    kg.censored_fraction = batch.censored_fraction
    kg.F_hat = float(counts.sum() / n_eff) if n_eff else np.nan
    return kg


def envelope_ratio_stats(p_grid, dom, x):
    """Spread statistics of rho(cell) = P_hat * |x - z_cell|^d / delta_D(x)
    over cells with stderr/value <= 0.2; errors out unless those cells carry
    at least 90% of the exit mass."""
    x = np.asarray(x, float)
    mesh = p_grid.cells
    mass = p_grid.values * mesh.sigmas
    good = (p_grid.values > 0.0) & (p_grid.stderr <= 0.2 * p_grid.values)
    total = float(mass.sum())
    frac = float(mass[good].sum() / total) if total > 0 else 0.0
    if frac < 0.9:
        raise RuntimeError("qualifying cells carry only %.1f%% of the exit "
                           "mass (need 90%%)" % (100 * frac,))
    rho = (p_grid.values[good]
           * np.linalg.norm(mesh.centers[good] - x, axis=1) ** dom.d
           / dom.dist(x))
    return {"ratio_min": float(rho.min()), "ratio_max": float(rho.max()),
            "spread": float(rho.max() / rho.min()),
            "n_qualifying": int(good.sum()), "mass_fraction": frac}


def harnack_check(dom, kern, x0, r, pair_count, n, cfg=None, seed=0, lanes=1,
                  g=None):
    """Harnack ratio probe: u(y) = E_y[g(X_{tau_B})] for B = B(x0, r) and a
    fixed nonnegative g supported away from B; evaluates u at pair_count
    random points of B(x0, r/2) and returns the worst pairwise ratio."""
    from .geometry import Domain
    x0 = np.asarray(x0, float)
    if dom.signed_dist(x0) <= r:
        raise ValueError("B(x0, r) must sit inside the domain")
    ball = Domain("ball", d=dom.d, center=x0, radius=r)
    if g is None:
        def g(y):
            return (y[..., 0] - x0[0] >= 2.0 * r).astype(float)
    rng = np.random.default_rng(
        np.random.SeedSequence(pathsim.subseed(seed, 977)))
    npts = 2 * int(pair_count)
    u = rng.standard_normal((npts, dom.d))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    rad = 0.5 * r * rng.random(npts) ** (1.0 / dom.d)
    pts = x0 + u * rad[:, None]
    vals = np.empty(npts)
    errs = np.empty(npts)
    for i, y in enumerate(pts):
        st = pathsim.exit_functional(ball, kern, y, g, cls="all", n=n, cfg=cfg,
                                     seed=pathsim.subseed(seed, i + 1),
                                     lanes=lanes)
        vals[i] = st["estimate"]
        errs[i] = st["stderr"]
    if np.any(vals <= 0.0):
        raise RuntimeError("u vanished at a probe point; pick g with more "
                           "mass or larger n")
    hi, lo = int(np.argmax(vals)), int(np.argmin(vals))
    ratio = vals[hi] / vals[lo]
    se = ratio * np.hypot(errs[hi] / vals[hi], errs[lo] / vals[lo])
    return {"max_ratio": float(ratio), "stderr": float(se),
            "values": vals.tolist(), "value_stderr": errs.tolist(),
            "points": pts.tolist()}
