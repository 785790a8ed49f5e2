"""Boundary-limit experiments.

Nontangential traces of harmonic functionals and their ratios along Stolz-cone
sequences, the maximal inequality for surrogate-kernel averages, boundedness
of the surrogate total kernel, exit locality, the two-route integral
representation, and the tangential-failure counterexample built from dyadic
arc families.
"""
import json

import numpy as np

from . import pathsim
from .geometry import ConeSpec, cone_sequence, tangential_curve
from .kernels import martin_surrogate
from .pathsim import (EXIT_BOUNDARY, EXIT_CENSORED, EXIT_JUMP, PathConfig,
                      subseed)


def _wrap(a):
    return np.mod(np.asarray(a, float) + np.pi, 2.0 * np.pi) - np.pi


# -- boundary data ----------------------------------------------------------

class BoundaryData:
    """Piecewise-constant function (or, where an operation says so, a discrete
    measure: one atom per cell) on a boundary mesh."""

    def __init__(self, mesh, values):
        values = np.asarray(values, float)
        if values.shape != (mesh.n_cells,):
            raise ValueError("need one value per mesh cell")
        if not np.all(np.isfinite(values)):
            raise ValueError("boundary values must be finite")
        self.mesh = mesh
        self.values = values

    def __call__(self, pts):
        return self.values[self.mesh.cell_of(pts)]

    def value_at(self, z):
        return float(self.values[int(self.mesh.cell_of(np.asarray(z, float)))])

    @classmethod
    def from_function(cls, mesh, fn):
        return cls(mesh, np.asarray(fn(mesh.centers), float))


def hemisphere_indicator(mesh, z):
    """Indicator of the half boundary on z's side of the center."""
    c = mesh.domain.center
    z = np.asarray(z, float)
    vals = ((mesh.centers - c) @ (z - c) > 0.0).astype(float)
    return BoundaryData(mesh, vals)


def affine_in_angle(mesh, z, value_at=0.3, slope=0.08):
    """d=2: g(theta) = value_at + slope * wrap(theta - theta_z); continuous at
    z, with its wrap discontinuity at the antipode."""
    if mesh.domain.d != 2:
        raise ValueError("affine_in_angle is d=2 only")
    z = np.asarray(z, float)
    thz = np.arctan2(z[1] - mesh.domain.center[1], z[0] - mesh.domain.center[0])
    c = mesh.centers - mesh.domain.center
    th = np.arctan2(c[:, 1], c[:, 0])
    return BoundaryData(mesh, value_at + slope * _wrap(th - thz))


# -- reports ----------------------------------------------------------------

class ConvergenceReport:
    """Trace of a boundary approach: points, values with errors, the deepest
    value as the limit estimate, and the oscillation max-min over the deeper
    half of the trace."""

    def __init__(self, target, approach, points, deltas, values, stderr,
                 target_value=None, tolerance=None, verdict=None):
        self.target = np.asarray(target, float)
        self.approach = dict(approach)
        self.points = np.asarray(points, float)
        self.deltas = np.asarray(deltas, float)
        self.values = np.asarray(values, float)
        self.stderr = np.asarray(stderr, float)
        self.target_value = target_value
        self.tolerance = tolerance
        self.limit = float(self.values[-1])
        self.limit_stderr = float(self.stderr[-1])
        tail = self.values[self.values.size // 2:]
        self.oscillation = float(tail.max() - tail.min())
        self.verdict = verdict

    def decide(self, tol):
        """pass/fail against |limit - target_value| <= tol + 3*stderr;
        inconclusive (never a false pass) when noise exceeds the tolerance."""
        self.tolerance = tol
        if not np.isfinite(self.limit_stderr) or self.limit_stderr > tol:
            self.verdict = "inconclusive"
        elif abs(self.limit - self.target_value) <= tol + 3.0 * self.limit_stderr:
            self.verdict = "pass"
        else:
            self.verdict = "fail"
        return self.verdict

    def as_dict(self):
        return {"schema_version": 1,
                "target": self.target.tolist(),
                "approach": self.approach,
                "points": self.points.tolist(),
                "deltas": self.deltas.tolist(),
                "values": self.values.tolist(),
                "stderr": self.stderr.tolist(),
                "limit": self.limit,
                "limit_stderr": self.limit_stderr,
                "oscillation": self.oscillation,
                "target_value": self.target_value,
                "tolerance": self.tolerance,
                "verdict": self.verdict}

    def to_json(self, path=None):
        s = json.dumps(self.as_dict(), indent=1)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(s + "\n")
        return s

    def to_csv(self, path):
        import csv
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["depth", "delta", "value", "stderr"])
            for i in range(self.values.size):
                w.writerow([i, repr(float(self.deltas[i])),
                            repr(float(self.values[i])),
                            repr(float(self.stderr[i]))])


# -- traces -----------------------------------------------------------------

def trace_stats(dom, kern, points, n, cfg=None, seed=0, lanes=1, funcs=None):
    """Simulate once per trace point and evaluate every named boundary
    functional on the shared paths: u_g (class=boundary), the ratio u_g/F with
    a delta-method error (exact 0 for proportional data), and F itself."""
    funcs = funcs or {}
    points = np.atleast_2d(np.asarray(points, float))
    kpts = points.shape[0]
    F = np.empty(kpts)
    F_se = np.empty(kpts)
    cens = np.empty(kpts)
    res = {name: {"u": np.empty(kpts), "u_se": np.empty(kpts),
                  "ratio": np.empty(kpts), "ratio_se": np.empty(kpts)}
           for name in funcs}
    for i, x in enumerate(points):
        batch = pathsim.simulate_exits(dom, kern, x, n, cfg,
                                       seed=subseed(seed, i), lanes=lanes)
        live = batch.exit_type != EXIT_CENSORED
        m = int(live.sum())
        cens[i] = batch.censored_fraction
        b = (batch.exit_type[live] == EXIT_BOUNDARY).astype(float)
        F[i] = b.mean() if m else np.nan
        F_se[i] = np.sqrt(F[i] * (1.0 - F[i]) / m) if m else np.inf
        for name, g in funcs.items():
            a = np.zeros(batch.n)
            sel = batch.exit_type == EXIT_BOUNDARY
            if sel.any():
                a[sel] = np.asarray(g(batch.exit_pos[sel]), float)
            a = a[live]
            u = a.mean() if m else np.nan
            r = res[name]
            r["u"][i] = u
            r["u_se"][i] = a.std(ddof=1) / np.sqrt(m) if m > 1 else np.inf
            if F[i] > 0.0:
                rat = u / F[i]
                r["ratio"][i] = rat
                r["ratio_se"][i] = (np.sqrt(np.mean((a - rat * b) ** 2) / m)
                                    / F[i])
            else:
                r["ratio"][i] = np.nan
                r["ratio_se"][i] = np.inf
    return {"points": points, "deltas": dom.dist(points), "F": F,
            "F_se": F_se, "censored": cens, "funcs": res}


def _cone_desc(cone, mode):
    return {"kind": "cone", "z": np.asarray(cone.z, float).tolist(),
            "beta": cone.beta, "r0": cone.r0, "mode": mode}


def fatou_trace(dom, kern, g, z, cone, depth, n, cfg=None, seed=0, lanes=1,
                tol=0.05, mode="radial", stats=None, name=None):
    """Trace u_g along the cone sequence toward z; verdict compares the
    deepest value with g(z).  Pass stats= (from trace_stats) to reuse paths."""
    if stats is None:
        points = cone_sequence(dom, cone, depth, mode=mode)
        stats = trace_stats(dom, kern, points, n, cfg, seed, lanes, {"g": g})
        name = "g"
    r = stats["funcs"][name]
    rep = ConvergenceReport(z, _cone_desc(cone, mode), stats["points"],
                            stats["deltas"], r["u"], r["u_se"],
                            target_value=g.value_at(z))
    rep.decide(tol)
    return rep


def relative_fatou_trace(dom, kern, g, z, cone, depth, n, cfg=None, seed=0,
                         lanes=1, tol=0.05, mode="radial", stats=None,
                         name=None):
    """Trace u_g/F along the cone sequence (same paths top and bottom, so
    proportional data cancels exactly); verdict against g(z)."""
    if stats is None:
        points = cone_sequence(dom, cone, depth, mode=mode)
        stats = trace_stats(dom, kern, points, n, cfg, seed, lanes, {"g": g})
        name = "g"
    if np.any(stats["F"] < 0.05):
        raise RuntimeError("ratio unstable: F below 0.05 at a trace point")
    r = stats["funcs"][name]
    rep = ConvergenceReport(z, _cone_desc(cone, mode), stats["points"],
                            stats["deltas"], r["ratio"], r["ratio_se"],
                            target_value=g.value_at(z))
    rep.decide(tol)
    return rep


# -- surrogate-kernel checks ------------------------------------------------

def maximal_inequality_check(mu, nu, dom, x, z, t):
    """Surrogate-kernel average of mu over nu against closed-ball mass ratios
    centred at z, with C(t) = max((3t)^d, 2^(3d)).

    mu, nu are discrete measures (one atom per mesh cell).  Requires the cone
    condition |x-z| <= t*delta_D(x).
    """
    if mu.mesh is not nu.mesh and mu.mesh.n_cells != nu.mesh.n_cells:
        raise ValueError("mu and nu must share a mesh")
    if np.any(mu.values < 0.0) or np.any(nu.values < 0.0):
        raise ValueError("measures must be nonnegative")
    x = np.asarray(x, float)
    z = np.asarray(z, float)
    dx = float(dom.dist(x))
    if np.linalg.norm(x - z) > t * dx:
        raise ValueError("cone condition |x-z| <= t*delta_D(x) violated")
    mesh = mu.mesh
    K = martin_surrogate(dom, x, mesh.centers)
    denom = float(K @ nu.values)
    if denom <= 0.0:
        raise ValueError("nu carries no mass against the kernel")
    mid = float(K @ mu.values) / denom

    # closed-ball cumulative ratios over the discrete radii |center - z|
    r = np.linalg.norm(mesh.centers - z, axis=1)
    order = np.argsort(r)
    rs = r[order]
    cmu = np.cumsum(mu.values[order])
    cnu = np.cumsum(nu.values[order])
    last = np.flatnonzero(np.diff(rs) > 1e-12 * max(rs[-1], 1.0))
    last = np.append(last, rs.size - 1)   # closed balls: include ties
    cmu, cnu = cmu[last], cnu[last]
    seen = (cmu > 0.0) | (cnu > 0.0)
    cmu, cnu = cmu[seen], cnu[seen]
    sup = np.inf if np.any((cnu == 0.0) & (cmu > 0.0)) else \
        float(np.max(cmu[cnu > 0.0] / cnu[cnu > 0.0]))
    inf_r = float(np.min(cmu[cnu > 0.0] / cnu[cnu > 0.0]))
    C = max((3.0 * t) ** dom.d, 2.0 ** (3 * dom.d))
    lhs = inf_r / C
    rhs = C * sup
    ok = bool(lhs <= mid and (mid <= rhs or rhs == np.inf))
    return {"lhs": lhs, "mid": mid, "rhs": rhs, "pass": ok,
            "sup_ratio": sup, "inf_ratio": inf_r, "C": C}


def G_boundedness_check(dom, mesh, x_list):
    """Gsur(x) = sum K_hat(x, z_cell) * sigma_cell over x_list; the mesh must
    resolve the smallest boundary distance (cell size <= delta/4)."""
    x_list = np.atleast_2d(np.asarray(x_list, float))
    deltas = dom.dist(x_list)
    if np.any(deltas <= 0.0):
        raise ValueError("x_list must lie inside the domain")
    cell = float(np.max(mesh.sigmas)) if dom.d == 2 else \
        float(np.sqrt(np.max(mesh.sigmas)))
    if cell > deltas.min() / 4.0:
        raise RuntimeError("mesh too coarse: cell size %g > min delta/4 = %g"
                           % (cell, deltas.min() / 4.0))
    vals = np.array([float(martin_surrogate(dom, x, mesh.centers)
                           @ mesh.sigmas) for x in x_list])
    return {"min": float(vals.min()), "max": float(vals.max()),
            "values": vals.tolist(), "deltas": deltas.tolist()}


# -- locality and representation -------------------------------------------

def exit_locality_check(dom, kern, z, r, x_list, n, cfg=None, seed=0, lanes=1):
    """q(x) = P_x(boundary exit outside B(z, r)) along x_list -> z; fits
    log q against log delta_D and reports the slope."""
    if not r < dom.R0:
        raise ValueError("need r < R0")
    z = np.asarray(z, float)
    x_list = np.atleast_2d(np.asarray(x_list, float))
    deltas = dom.dist(x_list)

    def far(y):
        return (np.linalg.norm(y - z, axis=-1) > r).astype(float)

    q = np.empty(x_list.shape[0])
    qs = np.empty(x_list.shape[0])
    for i, x in enumerate(x_list):
        st = pathsim.exit_functional(dom, kern, x, far, cls="boundary", n=n,
                                     cfg=cfg, seed=subseed(seed, i),
                                     lanes=lanes)
        q[i] = st["estimate"]
        qs[i] = st["stderr"]
    if np.all(q <= 3.0 * qs):
        return {"slope": np.nan, "verdict": "inconclusive",
                "delta": deltas.tolist(), "q": q.tolist(),
                "q_stderr": qs.tolist()}
    good = q > 0.0
    w = (q[good] / np.maximum(qs[good], 1e-300)) ** 2
    A = np.stack([np.log(deltas[good]), np.ones(good.sum())], axis=1)
    coef = np.linalg.lstsq(A * np.sqrt(w)[:, None],
                           np.log(q[good]) * np.sqrt(w), rcond=None)[0]
    decreasing = bool(np.all(np.diff(q) < 3.0 * np.hypot(qs[1:], qs[:-1])))
    return {"slope": float(coef[0]), "intercept": float(coef[1]),
            "verdict": "ok", "monotone_decreasing": decreasing,
            "delta": deltas.tolist(), "q": q.tolist(), "q_stderr": qs.tolist()}


def representation_check(dom, kern, phi_ext, x_list, n, cfg=None, seed=0,
                         lanes=1, ball_radius_frac=0.7, green=None):
    """Two checks of the exterior-data representation of
    u(x) = E_x[phi_ext(X_tau); jump exit].

    Route (i): the jump-exit functional against the Green-cell quadrature
    (independent runs).  Route (ii): the two-step identity through an
    intermediate ball B(x, frac*delta_D(x)) -- exits of B that land beyond the
    closure of D score phi_ext directly, every other exit point continues with
    one fresh path to the exit of D.
    """
    from .geometry import Domain
    from .kernels import levy_system_check
    cfg = cfg if cfg is not None else PathConfig()
    eps_b = cfg.eps_b if cfg.eps_b is not None else 1e-4 * dom.diam
    x_list = np.atleast_2d(np.asarray(x_list, float))
    out = []
    for i, x in enumerate(x_list):
        ls = levy_system_check(dom, kern, x, phi_ext, n, cfg,
                               seed=subseed(seed, i, 0), lanes=lanes,
                               green=green if x_list.shape[0] == 1 else None)
        ball = Domain("ball", d=dom.d, center=x,
                      radius=ball_radius_frac * float(dom.dist(x)))
        b1 = pathsim.simulate_exits(ball, kern, x, n, cfg,
                                    seed=subseed(seed, i, 1), lanes=lanes)
        live1 = b1.exit_type != EXIT_CENSORED
        sd = dom.signed_dist(b1.exit_pos)
        ext = live1 & (sd < -eps_b)
        # landings inside D's collar are boundary exits of D (score 0), same
        # convention the one-shot run applies during flight; only strictly
        # interior points continue
        cont = live1 & (sd > eps_b)
        vals = np.zeros(b1.n)
        vals[ext] = np.asarray(phi_ext(b1.exit_pos[ext]), float)
        valid = live1.copy()
        idx = np.flatnonzero(cont)
        if idx.size:
            b2 = pathsim.simulate_exits(dom, kern, b1.exit_pos[idx], idx.size,
                                        cfg, seed=subseed(seed, i, 2),
                                        lanes=lanes)
            live2 = b2.exit_type != EXIT_CENSORED
            jump2 = b2.exit_type == EXIT_JUMP
            v2 = np.zeros(idx.size)
            if jump2.any():
                v2[jump2] = np.asarray(phi_ext(b2.exit_pos[jump2]), float)
            vals[idx] = v2
            valid[idx[~live2]] = False
        v = vals[valid]
        two = float(v.mean())
        two_se = float(v.std(ddof=1) / np.sqrt(v.size))
        sig_i = ls["sigma_distance"]
        comb = float(np.hypot(ls["mc_stderr"], two_se))
        sig_ii = abs(ls["mc"] - two) / comb if comb > 0 else 0.0
        out.append({"x": x.tolist(), "direct": ls["mc"],
                    "direct_stderr": ls["mc_stderr"], "quad": ls["quad"],
                    "quad_stderr": ls["quad_stderr"], "two_step": two,
                    "two_step_stderr": two_se, "sigma_route_i": sig_i,
                    "sigma_route_ii": float(sig_ii),
                    "censored_fraction": max(ls["censored_fraction"],
                                             b1.censored_fraction),
                    "pass": bool(sig_i <= 3.0 and sig_ii <= 3.0)})
    return {"per_x": out, "pass": bool(all(r["pass"] for r in out))}


# -- tangential counterexample ---------------------------------------------

def surrogate_trace(dom, mesh, data, xs):
    """u_hat(x) = (sum K_hat(x,w) U(w) sigma) / (sum K_hat(x,w) sigma) --
    deterministic quadrature of the surrogate kernel on the mesh (d=2)."""
    xs = np.atleast_2d(np.asarray(xs, float))
    w = mesh.centers
    us = data.values * mesh.sigmas
    w2 = (w ** 2).sum(axis=1)
    out = np.empty(xs.shape[0])
    # delta_D(x) multiplies numerator and denominator alike, so only the
    # |x-w|^-d factor matters
    for lo in range(0, xs.shape[0], 32):
        hi = min(lo + 32, xs.shape[0])
        xc = xs[lo:hi]
        r2 = (xc ** 2).sum(axis=1)[:, None] + w2[None, :] - 2.0 * (xc @ w.T)
        np.maximum(r2, 1e-300, out=r2)
        Kr = 1.0 / r2 if dom.d == 2 else r2 ** (-1.5)
        out[lo:hi] = (Kr @ us) / (Kr @ mesh.sigmas)
    return out


def littlewood_arcs(mesh, k_max=6, lam0=0.02, n_clusters=8,
                    test_offsets=(0.018, 0.024, 0.030, 0.036)):
    """Dyadic arc families on the circle: one level-1 arc per cluster centre
    (full width lam0/2, value 1/2) plus level-k arcs (width lam0*2^-k, value
    2^-k) at fixed offsets so tangential sweeps cross them repeatedly while
    all arcs stay clear of the radial test angles.

    Returns (BoundaryData U, meta) where meta lists cluster centres and the
    32 test angles theta = c_i - a for a in test_offsets.
    """
    if mesh.domain.d != 2:
        raise ValueError("the arc construction lives on the circle")
    th = np.arctan2(mesh.centers[:, 1], mesh.centers[:, 0])
    U = np.zeros(mesh.n_cells)
    arcs = []
    clusters = 2.0 * np.pi * np.arange(n_clusters) / n_clusters
    level_offsets = {1: 0.0, 2: 0.07, 3: 0.13}
    for k in range(4, k_max + 1):
        level_offsets[k] = np.pi / n_clusters + 0.01 * (k - 4)
    for c in clusters:
        for k in range(1, k_max + 1):
            a = c + level_offsets[k]
            hw = 0.5 * lam0 * 2.0 ** (-k)
            U[np.abs(_wrap(th - a)) <= hw] += 2.0 ** (-k)
            arcs.append((float(a), float(hw), 2.0 ** (-k)))
    thetas = np.array([c - a for c in clusters for a in test_offsets])
    meta = {"clusters": clusters.tolist(), "test_offsets": list(test_offsets),
            "arcs": arcs, "k_max": k_max, "lam0": lam0}
    return BoundaryData(mesh, U), meta


def near_one_margin(eps):
    """delta(eps) for the surrogate near-one bound: along the radius toward
    the centre of an arc of half-width lam, the surrogate average of the arc
    indicator satisfies 1 - u_hat <= 3.5 * (delta/lam) for delta <= 1/2 (a
    half-space comparison of the kernel tails against 2*arctan(pi/delta) of
    total mass), so u_hat >= 1 - eps once delta <= lam * eps / 3.5."""
    return eps / 3.5


def near_one_check(dom, mesh, lams=(0.125, 0.0625, 0.03125, 0.015625,
                                    0.0078125),
                   eps_list=(0.5, 0.25, 0.1, 0.05), theta0=0.0):
    """Exact quadrature check of the near-one bound for each (lam, eps)."""
    th = np.arctan2(mesh.centers[:, 1], mesh.centers[:, 0])
    rows = []
    ok = True
    for lam in lams:
        data = BoundaryData(mesh, (np.abs(_wrap(th - theta0)) <= lam
                                   ).astype(float))
        for eps in eps_list:
            delta = lam * near_one_margin(eps)
            x = (1.0 - delta) * np.array([np.cos(theta0), np.sin(theta0)])
            u = float(surrogate_trace(dom, mesh, data, x)[0])
            good = u >= 1.0 - eps
            ok = ok and good
            rows.append({"lam": lam, "eps": eps, "delta": delta, "u_hat": u,
                         "pass": bool(good)})
    return {"pass": bool(ok), "rows": rows}


def littlewood_counterexample(arcs=None, gamma=0.5, theta_list=None, depth=33,
                              mode="surrogate_quadrature", dom=None,
                              mesh_cells=2 ** 17, k_max=6, lam0=0.02,
                              n=20000, cfg=None, seed=0, lanes=1, kern=None,
                              radial_tol=0.05, tangential_tol=0.3,
                              delta_max=2.0 ** -5, delta_ratio=2.0 ** -0.25):
    """Radial/tangential trace pairs of the arc average u_hat for each test
    angle.  Radial approaches must stay flat over the tail (oscillation <=
    radial_tol); tangential curves x = (1-delta) e^{i(theta+delta^gamma)} must
    oscillate (>= tangential_tol) by sweeping across the level-1 arcs.

    mode=surrogate_quadrature evaluates u_hat exactly on the mesh;
    mode=monte_carlo re-estimates the ratio u_U/F from paths at moderate
    depth (needs kern, n).
    """
    from .geometry import Domain
    if dom is None:
        dom = Domain("unit_ball", d=2)
    if dom.d != 2:
        raise ValueError("the counterexample lives on the unit disk")
    mesh = dom.boundary_mesh(mesh_cells)
    cell_width = 2.0 * np.pi / mesh.n_cells
    if cell_width >= lam0 * 2.0 ** (-k_max):
        raise RuntimeError("mesh cells (%g) coarser than the finest arc (%g)"
                           % (cell_width, lam0 * 2.0 ** (-k_max)))
    if arcs is None:
        data, meta = littlewood_arcs(mesh, k_max=k_max, lam0=lam0)
    elif callable(arcs):
        data, meta = arcs(mesh)
    else:
        data, meta = arcs
    if theta_list is None:
        theta_list = meta["test_angles"] if "test_angles" in meta else \
            np.array([c - a for c in meta["clusters"]
                      for a in meta["test_offsets"]])
    theta_list = np.asarray(theta_list, float)
    deltas = delta_max * delta_ratio ** np.arange(depth)

    if mode == "monte_carlo":
        deltas = deltas[deltas >= 2.0 ** -9]
    elif mode != "surrogate_quadrature":
        raise ValueError("unknown mode %r" % (mode,))

    reports = []
    n_pass = 0
    dichotomy = True
    for ti, th0 in enumerate(theta_list):
        rad = np.stack([(1.0 - deltas) * np.cos(th0),
                        (1.0 - deltas) * np.sin(th0)], axis=1)
        tan = tangential_curve(th0, gamma, deltas)
        z = np.array([np.cos(th0), np.sin(th0)])
        if mode == "surrogate_quadrature":
            vr = surrogate_trace(dom, mesh, data, rad)
            vt = surrogate_trace(dom, mesh, data, tan)
            er = np.zeros_like(vr)
            et = np.zeros_like(vt)
        else:
            sr = trace_stats(dom, kern, rad, n, cfg, subseed(seed, ti, 0), lanes,
                             {"U": data})
            stt = trace_stats(dom, kern, tan, n, cfg, subseed(seed, ti, 1),
                              lanes, {"U": data})
            vr, er = sr["funcs"]["U"]["ratio"], sr["funcs"]["U"]["ratio_se"]
            vt, et = stt["funcs"]["U"]["ratio"], stt["funcs"]["U"]["ratio_se"]
        rep_r = ConvergenceReport(z, {"kind": "radial", "theta": float(th0)},
                                  rad, deltas, vr, er)
        rep_t = ConvergenceReport(z, {"kind": "tangential", "theta": float(th0),
                                      "gamma": gamma}, tan, deltas, vt, et)
        ok_r = rep_r.oscillation <= radial_tol
        ok_t = rep_t.oscillation >= tangential_tol
        rep_r.verdict = "pass" if ok_r else "fail"
        rep_t.verdict = "pass" if ok_t else "fail"
        n_pass += ok_r and ok_t
        dichotomy = dichotomy and (rep_r.oscillation < rep_t.oscillation)
        reports.append((rep_r, rep_t))
    frac = n_pass / len(theta_list)
    return {"theta": theta_list.tolist(), "reports": reports,
            "pass_fraction": float(frac), "dichotomy": bool(dichotomy),
            "pass": bool(frac >= 0.9), "meta": meta,
            "radial_tol": radial_tol, "tangential_tol": tangential_tol}
