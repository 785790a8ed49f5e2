"""First-exit Monte Carlo for the jump diffusion.

Paths are advanced by an Euler scheme on the independent decomposition of the
process: a Gaussian part with per-coordinate variance rate 2 + sigma2_small
(the generator-Delta diffusion plus the compensating variance of the removed
small jumps) and a compound-Poisson stream of jumps above delta_cut drawn
exactly from the kernel's tail table.  Steps shrink quadratically with the
boundary distance down to h/refine_factor, a Brownian-bridge acceptance test
catches in-step crossings, and jump landings past the boundary are classified
as jump exits (landing beyond the eps_b collar) or boundary exits (landing
inside it).

Determinism contract: paths are partitioned into shards of SHARD_PATHS
consecutive paths; shard i uses default_rng(SeedSequence(seed, spawn_key=(i,))).
Execution lanes only schedule shards, so results are byte-identical for any
lane count.  Estimator merging is exact associative addition in shard order.
"""
import csv
from dataclasses import dataclass

import numpy as np

EXIT_BOUNDARY, EXIT_JUMP, EXIT_CENSORED = 0, 1, 2
EXIT_NAMES = ("boundary", "jump", "censored")

SHARD_PATHS = 65536   # paths per RNG shard: the determinism unit
BATCH_PATHS = 8192    # cluster size for batch-means error bars on cell grids


@dataclass(frozen=True)
class PathConfig:
    """Discretisation knobs.  eps_b defaults to 1e-4 * diam(D) at run time;
    delta_cut, if set, is checked against the kernel (the kernel's tables are
    built for its own cutoff, so a mismatch would be a silent inconsistency).
    """
    h: float = 1e-3
    eps_b: float = None
    delta_cut: float = None
    t_max: float = 25.0
    refine_factor: float = 16.0

    def __post_init__(self):
        if self.h <= 0.0:
            raise ValueError("h must be positive")
        if self.t_max <= 0.0:
            raise ValueError("t_max must be positive")
        if self.refine_factor < 1.0:
            raise ValueError("refine_factor must be >= 1")
        if self.eps_b is not None and self.eps_b <= 0.0:
            raise ValueError("eps_b must be positive")
        if self.delta_cut is not None and self.delta_cut <= 0.0:
            raise ValueError("delta_cut must be positive")


def _resolve(dom, kern, cfg):
    eps_b = cfg.eps_b if cfg.eps_b is not None else 1e-4 * dom.diam
    if cfg.delta_cut is not None and kern.lam > 0.0:
        if abs(cfg.delta_cut - kern.delta_cut) > 1e-9 * kern.delta_cut:
            raise ValueError(
                "config delta_cut %g does not match the kernel's %g"
                % (cfg.delta_cut, kern.delta_cut))
    return eps_b, 2.0 + kern.sigma2_small, kern.lam


@dataclass
class ExitRecord:
    exit_type: str                 # "boundary" | "jump" | "censored"
    exit_point: np.ndarray
    pre_exit_point: np.ndarray
    exit_time: float
    occupation: np.ndarray = None  # per-cell time, when a grid was attached


class ExitBatch:
    """Struct-of-arrays record of n simulated exits, in deterministic
    shard-major path order."""

    def __init__(self, exit_type, exit_pos, pre_exit_pos, exit_time):
        self.exit_type = exit_type
        self.exit_pos = exit_pos
        self.pre_exit_pos = pre_exit_pos
        self.exit_time = exit_time

    @property
    def n(self):
        return self.exit_type.shape[0]

    @property
    def d(self):
        return self.exit_pos.shape[1]

    def mask(self, cls):
        if cls == "all":
            return self.exit_type != EXIT_CENSORED
        if cls == "boundary":
            return self.exit_type == EXIT_BOUNDARY
        if cls == "jump":
            return self.exit_type == EXIT_JUMP
        if cls == "censored":
            return self.exit_type == EXIT_CENSORED
        raise ValueError("unknown exit class %r" % (cls,))

    @property
    def censored_fraction(self):
        return float(np.mean(self.exit_type == EXIT_CENSORED))

    def record(self, i):
        return ExitRecord(EXIT_NAMES[self.exit_type[i]], self.exit_pos[i].copy(),
                          self.pre_exit_pos[i].copy(), float(self.exit_time[i]))


class CellAccum:
    """Per-batch, per-cell sums of path cell-times.

    The full batch matrix is kept (batches are BATCH_PATHS consecutive paths,
    so it is small) because later linear functionals of the cells -- Green
    totals, quadratures against the jump density -- need error bars that
    respect the correlation between cells visited by the same path.  Merging
    is concatenation in shard order, hence associative and lane-independent.
    """

    def __init__(self, n_cells):
        self.n_cells = n_cells
        self._rows = []
        self._counts = []

    def fold(self, sums, counts):
        self._rows.append(sums)
        self._counts.append(counts)

    def merge(self, other):
        self._rows.extend(other._rows)
        self._counts.extend(other._counts)
        return self

    @property
    def sums(self):
        if len(self._rows) > 1:
            self._rows = [np.concatenate(self._rows)]
            self._counts = [np.concatenate(self._counts)]
        return self._rows[0]

    @property
    def counts(self):
        self.sums
        return self._counts[0]

    @property
    def n(self):
        return float(self.counts.sum())

    def mean_stderr(self):
        """Per-cell mean path total and clustered stderr."""
        s, c, n = self.sums, self.counts, self.n
        m = s.sum(axis=0) / n
        resid = s - np.outer(c, m)
        return m, np.sqrt((resid * resid).sum(axis=0)) / n

    def linear_stat(self, w):
        """Mean and stderr of the per-path functional sum_c w[c]*(time in c)."""
        q = self.sums @ np.asarray(w, float)
        n = self.n
        est = q.sum() / n
        var = float(((q - est * self.counts) ** 2).sum())
        return est, np.sqrt(var) / n


class SpatialGrid:
    """Product cell partition of a ball or annulus: n_r radial rings times an
    angular mesh (uniform angles in d=2, equal-area sphere patches in d=3).
    Cell volumes are exact; centers are geometric midpoints."""

    def __init__(self, domain, n_r, n_ang):
        self.domain = domain
        self.d = domain.d
        self.n_r = int(n_r)
        self.n_ang = int(n_ang)
        if domain.kind in ("unit_ball", "ball"):
            r_lo = 0.0
        elif domain.kind == "annulus":
            r_lo = domain.r_in
        else:
            raise ValueError("spatial grids cover balls and annuli only")
        self.r_edges = np.linspace(r_lo, domain.radius, self.n_r + 1)
        self.n_cells = self.n_r * self.n_ang
        e = self.r_edges
        r_mid = 0.5 * (e[:-1] + e[1:])
        if self.d == 2:
            dth = 2.0 * np.pi / self.n_ang
            th = (np.arange(self.n_ang) + 0.5) * dth
            ring_area = 0.5 * (e[1:] ** 2 - e[:-1] ** 2) * dth
            dirs = np.stack([np.cos(th), np.sin(th)], axis=1)
            self.vols = np.repeat(ring_area, self.n_ang)
            self._dirs = dirs
        else:
            from .geometry import Domain, BoundaryMesh
            self._smesh = BoundaryMesh(Domain("unit_ball", d=3), self.n_ang)
            self.n_ang = self._smesh.n_cells
            self.n_cells = self.n_r * self.n_ang
            shell = (e[1:] ** 3 - e[:-1] ** 3) / 3.0
            self.vols = np.outer(shell, self._smesh.sigmas).ravel()
            dirs = self._smesh.centers
            self._dirs = dirs / np.linalg.norm(dirs, axis=1, keepdims=True)
        self.centers = (r_mid[:, None, None] * self._dirs[None, :, :]).reshape(
            self.n_cells, self.d) + domain.center

    def cell_of(self, x):
        """Cell index of each point (points assumed inside the domain)."""
        x = np.atleast_2d(np.asarray(x, float))
        rel = x - self.domain.center
        r = np.linalg.norm(rel, axis=1)
        ir = np.clip(np.searchsorted(self.r_edges, r, side="right") - 1,
                     0, self.n_r - 1)
        if self.d == 2:
            th = np.mod(np.arctan2(rel[:, 1], rel[:, 0]), 2.0 * np.pi)
            ia = np.minimum((th / (2.0 * np.pi) * self.n_ang).astype(np.int64),
                            self.n_ang - 1)
        else:
            safe = np.where(r[:, None] > 0.0, rel, [[1.0, 0.0, 0.0]])
            ia = self._smesh.cell_of(safe)
        return ir * self.n_ang + ia


def _run_shard(dom, kern, x0, n, rng, cfg, out, base,
               occ_grid=None, occ_acc=None, trace=None):
    """Advance n paths from x0 and write their records into out[base:base+n).

    RNG draw order per iteration (part of the determinism contract):
    standard_normal for the move, uniform for the bridge test on interior
    endpoints, poisson for jump counts, then the kernel's draws per jump
    round.
    """
    d = dom.d
    eps_b, v, lam = _resolve(dom, kern, cfg)
    h0, refine, t_max = cfg.h, cfg.refine_factor, cfg.t_max
    R0 = dom.R0
    et_, ep_, pp_, tm_ = out

    x0 = np.asarray(x0, float)
    pos = x0.copy() if x0.ndim == 2 else np.tile(x0, (n, 1))
    tt = np.zeros(n)
    slot = np.arange(n)

    if occ_grid is not None:
        n_b = -(-n // BATCH_PATHS)
        osum = np.zeros(n_b * occ_grid.n_cells)
        ocnt = np.bincount(np.arange(n) // BATCH_PATHS, minlength=n_b)
    step = 0
    while slot.size:
        m = slot.size
        dd = dom.dist(pos)
        hp = h0 * np.clip((dd / R0) ** 2, 1.0 / refine, 1.0)

        # censor before stepping so recorded times never exceed t_max
        cen = tt + hp > t_max
        if cen.any():
            i = np.flatnonzero(cen)
            s = slot[i] + base
            et_[s] = EXIT_CENSORED
            ep_[s] = pos[i]
            pp_[s] = pos[i]
            tm_[s] = t_max
            if occ_grid is not None:
                cells = occ_grid.cell_of(pos[i])
                flat = (slot[i] // BATCH_PATHS) * occ_grid.n_cells + cells
                osum += np.bincount(flat, weights=t_max - tt[i],
                                    minlength=osum.size)
            keep = ~cen
            pos, tt, slot = pos[keep], tt[keep], slot[keep]
            dd, hp = dd[keep], hp[keep]
            m = slot.size
            if m == 0:
                break

        if occ_grid is not None:
            cells = occ_grid.cell_of(pos)
            flat = (slot // BATCH_PATHS) * occ_grid.n_cells + cells
            osum += np.bincount(flat, weights=hp, minlength=osum.size)
        if trace is not None:
            for i in range(m):
                trace.append((step, tt[i], pos[i].copy(), "step"))

        newpos = pos + rng.standard_normal((m, d)) * np.sqrt(v * hp)[:, None]
        sd2 = dom.signed_dist(newpos)
        crossed = sd2 <= eps_b
        idx_in = np.flatnonzero(~crossed)
        pcr = np.exp(-2.0 * dd[idx_in] * sd2[idx_in] / (v * hp[idx_in]))
        acc = rng.random(idx_in.size) < pcr
        bridge = np.zeros(m, bool)
        bridge[idx_in[acc]] = True
        exiting = crossed | bridge
        if exiting.any():
            i = np.flatnonzero(exiting)
            s = slot[i] + base
            mid = np.where(bridge[i, None], 0.5 * (pos[i] + newpos[i]), newpos[i])
            et_[s] = EXIT_BOUNDARY
            ep_[s] = dom.project(mid)
            pp_[s] = pos[i]
            tm_[s] = tt[i] + np.where(bridge[i], 0.5, 1.0) * hp[i]
            if trace is not None:
                for q in range(i.size):
                    trace.append((step, tm_[s[q]], ep_[s[q]].copy(), "exit_boundary"))
        alive = ~exiting
        pos = newpos[alive]
        tt = tt[alive] + hp[alive]
        hp = hp[alive]
        slot = slot[alive]

        if lam > 0.0 and slot.size:
            k = rng.poisson(lam * hp)
            while k.any():
                j = np.flatnonzero(k > 0)
                land = pos[j] + kern.sample_jump(rng, j.size)
                sd = dom.signed_dist(land)
                far = sd < -eps_b
                col = ~far & (sd <= eps_b)
                done = far | col
                surv = ~done
                if surv.any():
                    pos[j[surv]] = land[surv]
                    if trace is not None:
                        for q in np.flatnonzero(surv):
                            trace.append((step, tt[j[q]], land[q].copy(), "jump"))
                if done.any():
                    i = j[done]
                    s = slot[i] + base
                    et_[s] = np.where(far[done], EXIT_JUMP, EXIT_BOUNDARY
                                      ).astype(np.int8)
                    ep_[s] = np.where(far[done, None], land[done],
                                      dom.project(land[done]))
                    pp_[s] = pos[i]
                    tm_[s] = tt[i]
                    if trace is not None:
                        for q in range(i.size):
                            nm = "exit_jump" if et_[s[q]] == EXIT_JUMP else "exit_boundary"
                            trace.append((step, tm_[s[q]], ep_[s[q]].copy(), nm))
                    keep = np.ones(slot.size, bool)
                    keep[i] = False
                    pos, tt, hp, slot, k = (pos[keep], tt[keep], hp[keep],
                                            slot[keep], k[keep])
                k = np.maximum(k - 1, 0)
        step += 1

    if occ_grid is not None and occ_acc is not None:
        occ_acc.fold(osum.reshape(n_b, occ_grid.n_cells), ocnt.astype(float))


def shard_rng(seed, shard_index):
    """The shard seeding rule; exposed so tests can pin it."""
    return np.random.default_rng(
        np.random.SeedSequence(seed, spawn_key=(shard_index,)))


def subseed(seed, *more):
    """Compose hierarchical seeds as entropy tuples for SeedSequence, so
    sub-experiments get independent streams whether seed is an int or an
    already-derived tuple."""
    base = tuple(seed) if isinstance(seed, tuple) else (int(seed),)
    return base + tuple(int(m) for m in more)


def simulate_exits(dom, kern, x0, n, cfg=None, seed=0, lanes=1, occ_grid=None):
    """Simulate n independent exits.  x0 is one start point or an (n,d) array
    of per-path start points; seed may be an int or a tuple of ints (fed to
    SeedSequence, handy for deriving independent sub-experiments).  Returns an
    ExitBatch, or (ExitBatch, CellAccum) when an occupation grid is attached."""
    cfg = cfg if cfg is not None else PathConfig()
    x0 = np.asarray(x0, float)
    n = int(n)
    if x0.ndim == 2 and x0.shape[0] != n:
        raise ValueError("per-path x0 must have shape (n, d)")
    if not np.all(dom.contains(x0)):
        raise ValueError("x0 must lie inside the domain")
    if n <= 0:
        raise ValueError("n must be positive")
    et = np.empty(n, np.int8)
    ep = np.empty((n, dom.d))
    pp = np.empty((n, dom.d))
    tm = np.empty(n)
    out = (et, ep, pp, tm)
    n_shards = -(-n // SHARD_PATHS)
    accs = [None] * n_shards

    def work(si):
        lo = si * SHARD_PATHS
        hi = min(lo + SHARD_PATHS, n)
        start = x0[lo:hi] if x0.ndim == 2 else x0
        acc = CellAccum(occ_grid.n_cells) if occ_grid is not None else None
        _run_shard(dom, kern, start, hi - lo, shard_rng(seed, si), cfg, out, lo,
                   occ_grid, acc)
        accs[si] = acc

    if lanes > 1 and n_shards > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=int(lanes)) as ex:
            list(ex.map(work, range(n_shards)))
    else:
        for si in range(n_shards):
            work(si)

    batch = ExitBatch(et, ep, pp, tm)
    if occ_grid is None:
        return batch
    total = accs[0]
    for a in accs[1:]:
        total.merge(a)
    return batch, total


def simulate_exit(dom, kern, x0, cfg, rng, grid=None):
    """One path with the caller's generator; occupation attached if a grid is
    given."""
    et = np.empty(1, np.int8)
    ep = np.empty((1, dom.d))
    pp = np.empty((1, dom.d))
    tm = np.empty(1)
    x0 = np.asarray(x0, float)
    if not dom.contains(x0):
        raise ValueError("x0 must lie inside the domain")
    acc = CellAccum(grid.n_cells) if grid is not None else None
    _run_shard(dom, kern, x0, 1, rng, cfg, (et, ep, pp, tm), 0, grid, acc)
    occ = acc.sums[0].copy() if grid is not None else None
    return ExitRecord(EXIT_NAMES[et[0]], ep[0], pp[0], float(tm[0]), occ)


def functional_stats(batch, f, cls="all"):
    """Sample mean of f(exit_point) over the requested exit class, against the
    non-censored denominator.  f must be vectorised (n,d)->(n,)."""
    if cls not in ("boundary", "jump", "all"):
        raise ValueError("exit class must be boundary, jump or all")
    live = batch.exit_type != EXIT_CENSORED
    n_eff = int(live.sum())
    cf = batch.censored_fraction
    if n_eff == 0:
        return {"estimate": np.nan, "stderr": np.inf, "n": batch.n,
                "n_effective": 0, "censored_fraction": cf, "warn_censored": True}
    vals = np.zeros(batch.n)
    sel = live & batch.mask(cls)
    if sel.any():
        vals[sel] = np.asarray(f(batch.exit_pos[sel]), float)
    vals = vals[live]
    est = float(vals.mean())
    se = float(vals.std(ddof=1) / np.sqrt(n_eff)) if n_eff > 1 else np.inf
    return {"estimate": est, "stderr": se, "n": batch.n, "n_effective": n_eff,
            "censored_fraction": cf, "warn_censored": cf > 0.01}


def estimate_F(dom, kern, x, n, cfg=None, seed=0, lanes=1, batch=None):
    """Boundary-exit probability estimate with binomial stderr.  Censored
    paths are excluded from numerator and denominator and reported."""
    if batch is None:
        if n < 100:
            raise ValueError("need n >= 100")
        batch = simulate_exits(dom, kern, x, n, cfg, seed=seed, lanes=lanes)
    live = batch.exit_type != EXIT_CENSORED
    n_eff = int(live.sum())
    cf = batch.censored_fraction
    if n_eff == 0:
        return {"F_hat": np.nan, "stderr": np.inf, "n": batch.n,
                "n_effective": 0, "censored_fraction": cf, "warn_censored": True}
    f_hat = float(np.mean(batch.exit_type[live] == EXIT_BOUNDARY))
    se = float(np.sqrt(f_hat * (1.0 - f_hat) / n_eff))
    return {"F_hat": f_hat, "stderr": se, "n": batch.n, "n_effective": n_eff,
            "censored_fraction": cf, "warn_censored": cf > 0.01}


def exit_functional(dom, kern, x, f, cls="all", n=1000, cfg=None, seed=0,
                    lanes=1, batch=None):
    """E_x[f(X_tau); exit class] by plain Monte Carlo.  Pass batch= to reuse
    already-simulated paths (e.g. to trace several functionals on one run)."""
    if batch is None:
        if n < 100:
            raise ValueError("need n >= 100")
        batch = simulate_exits(dom, kern, x, n, cfg, seed=seed, lanes=lanes)
    return functional_stats(batch, f, cls)


def occupation_green(dom, kern, x, grid, n, cfg=None, seed=0, lanes=1):
    """Cellwise Green estimates G_hat = (mean time in cell)/vol(cell).
    Cells never visited get stderr = inf.  Returns a KernelGrid whose attached
    accumulator supports honest error bars for later cell quadratures."""
    from .kernels import KernelGrid
    if n < 1000:
        raise ValueError("need n >= 1000")
    batch, acc = simulate_exits(dom, kern, x, n, cfg, seed=seed, lanes=lanes,
                                occ_grid=grid)
    mean, se = acc.mean_stderr()
    vals = mean / grid.vols
    errs = se / grid.vols
    errs[mean == 0.0] = np.inf
    kg = KernelGrid(grid, vals, errs, batch.n, accum=acc)
    kg.censored_fraction = batch.censored_fraction
    kg.mean_exit_time = float(batch.exit_time.mean())
    return kg


def trace_path(dom, kern, x0, cfg, rng, path=None):
    """Debug dump of a single path: rows (step, time, x..., event).  Writes
    CSV to `path` when given, returns the rows either way."""
    rows = []
    et = np.empty(1, np.int8)
    ep = np.empty((1, dom.d))
    pp = np.empty((1, dom.d))
    tm = np.empty(1)
    _run_shard(dom, kern, np.asarray(x0, float), 1, rng, cfg,
               (et, ep, pp, tm), 0, trace=rows)
    if path is not None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["step", "time"] + ["x%d" % i for i in range(dom.d)]
                       + ["event"])
            for stp, t, x, ev in rows:
                w.writerow([stp, repr(float(t))] + [repr(float(c)) for c in x]
                           + [ev])
    return rows
