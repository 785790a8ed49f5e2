"""Experiment runner.

``sbmpot run <config>`` executes one named experiment from a flat key=value
config file (dotted section names, ``#`` comments) and writes an immutable
run directory: ``summary.json`` plus CSV data files.  ``sbmpot report <dir>``
consolidates the summaries under a directory into one table and a figures/
bundle.

Every parameter is either set in the config or taken from the documented
DEFAULTS table below; the effective values are echoed into the summary.
Unknown keys are errors.  (config, seed) determine every CSV byte-for-byte,
independent of the lane count; the output root comes from --out, run.out, or
$SBMPOT_OUT.
"""
import argparse
import csv
import json
import os
import shutil
import sys
import time

import numpy as np

from . import fatou as ftu
from . import kernels as knl
from . import pathsim
from .bernstein import Subordinator
from .geometry import ConeSpec, Domain, cone_sequence
from .levy import JumpKernel
from .pathsim import EXIT_BOUNDARY, EXIT_CENSORED, EXIT_JUMP, PathConfig


EXPERIMENTS = ("exit-stats", "green", "boundary-density", "levy-system",
               "fatou", "relative-fatou", "maximal", "g-bound", "locality",
               "representation", "counterexample", "harnack",
               "condition-check")

# key -> (parse, default); default None means "no value unless set" and
# "auto" defaults are resolved per experiment.  This table is the single
# source of truth echoed into summaries and into configs/DEFAULTS.md.
DEFAULTS = {
    "experiment": (str, None),
    "domain.kind": (str, "unit_ball"),
    "domain.d": (int, 2),
    "domain.r_in": (float, None),
    "domain.eps": (float, None),
    "domain.k": (int, None),
    "domain.center": (str, None),
    "domain.radius": (float, None),
    "subordinator.family": (str, "stable_mixture"),
    "subordinator.alpha": (float, 1.0),
    "subordinator.beta": (float, None),
    "subordinator.mass": (float, None),
    "kernel.delta_cut": (float, 0.02),
    "path.h": (float, 1e-3),
    "path.t_max": (float, 25.0),
    "path.eps_b": (float, None),
    "path.refine_factor": (float, 16.0),
    "run.n": (int, 100_000),
    "run.seed": (int, 0),
    "run.lanes": (int, 1),
    "run.out": (str, None),
    "x": (str, "auto"),
    "z": (str, "auto"),
    "mesh.cells": (int, None),
    "grid.n_r": (int, 48),
    "grid.n_ang": (int, 64),
    "f.r_lo": (float, 1.5),
    "f.r_hi": (float, 2.5),
    "cone.beta": (float, 2.0),
    "cone.r0": (float, None),
    "cone.depth": (int, 8),
    "cone.mode": (str, "radial"),
    "data.kind": (str, "hemisphere"),
    "data.value": (float, 0.3),
    "data.slope": (float, 0.08),
    "data.const": (float, 1.0),
    "fatou.tol": (float, 0.05),
    "maximal.t": (float, 2.0),
    "maximal.mu": (str, "0:1"),
    "maximal.nu": (str, "0:1"),
    "gbound.count": (int, 40),
    "gbound.delta_min": (float, 1e-4),
    "gbound.delta_max": (float, 0.5),
    "gbound.band": (float, 50.0),
    "locality.r": (float, 0.25),
    "locality.count": (int, 6),
    "locality.delta_min": (float, 0.02),
    "locality.delta_max": (float, 0.3),
    "locality.slope_min": (float, 0.8),
    "representation.frac": (float, 0.7),
    "representation.xs": (str, "auto"),
    "counterexample.gamma": (float, 0.5),
    "counterexample.kmax": (int, 6),
    "counterexample.lam0": (float, 0.02),
    "counterexample.depth": (int, 33),
    "counterexample.mode": (str, "surrogate_quadrature"),
    "counterexample.mesh_cells": (int, 2 ** 17),
    "counterexample.radial_tol": (float, 0.05),
    "counterexample.tangential_tol": (float, 0.3),
    "harnack.r": (float, 0.3),
    "harnack.pairs": (int, 4),
    "harnack.bound": (float, 25.0),
    "condition.K": (float, 1.0),
    "condition.doubling_bound": (float, 16.0),
}

_MESH_DEFAULT = {"boundary-density": 64, "fatou": 4096, "relative-fatou": 4096,
                 "maximal": 16}


class ConfigError(Exception):
    pass


def parse_config(path):
    """Flat key = value lines; '#' comments; every key must be in DEFAULTS;
    duplicates and unparsable values are line-numbered errors."""
    values = {}
    lines = {}
    try:
        fh = open(path)
    except OSError as e:
        raise ConfigError(str(e))
    with fh:
        for no, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError("%s:%d: expected key = value" % (path, no))
            key, val = (s.strip() for s in line.split("=", 1))
            if key not in DEFAULTS:
                raise ConfigError("%s:%d: unknown key %r" % (path, no, key))
            if key in values:
                raise ConfigError("%s:%d: duplicate key %r (first at line %d)"
                                  % (path, no, key, lines[key]))
            typ = DEFAULTS[key][0]
            try:
                values[key] = typ(val)
            except ValueError:
                raise ConfigError("%s:%d: cannot parse %r as %s for %r"
                                  % (path, no, val, typ.__name__, key))
            lines[key] = no
    if "experiment" not in values:
        raise ConfigError("%s: missing required key 'experiment'" % path)
    if values["experiment"] not in EXPERIMENTS:
        raise ConfigError("%s:%d: unknown experiment %r (choose from %s)"
                          % (path, lines["experiment"], values["experiment"],
                             ", ".join(EXPERIMENTS)))
    cfg = {k: d for k, (_, d) in DEFAULTS.items()}
    cfg.update(values)
    return cfg


def _point(cfg, key, dom):
    s = cfg[key]
    if s is None or s == "auto":
        return None
    try:
        p = np.array([float(t) for t in s.split(",")], float)
    except ValueError:
        raise ConfigError("cannot parse point %r for %r" % (s, key))
    if p.shape != (dom.d,):
        raise ConfigError("%r needs %d comma-separated components" %
                          (key, dom.d))
    return p


def build_domain(cfg):
    kw = {}
    for name in ("r_in", "eps", "k", "radius"):
        if cfg["domain." + name] is not None:
            kw[name] = cfg["domain." + name]
    if cfg["domain.center"] is not None:
        kw["center"] = np.array([float(t) for t in
                                 cfg["domain.center"].split(",")])
    try:
        return Domain(cfg["domain.kind"], d=cfg["domain.d"], **kw)
    except (ValueError, TypeError) as e:
        raise ConfigError("domain: %s" % e)


def build_kernel(cfg):
    try:
        sub = Subordinator(cfg["subordinator.family"],
                           alpha=cfg["subordinator.alpha"]
                           if cfg["subordinator.family"] != "brownian_only"
                           else None,
                           beta=cfg["subordinator.beta"],
                           mass=cfg["subordinator.mass"])
        return JumpKernel(sub, d=cfg["domain.d"],
                          delta_cut=cfg["kernel.delta_cut"])
    except ValueError as e:
        raise ConfigError("subordinator/kernel: %s" % e)


def build_pathconfig(cfg):
    try:
        return PathConfig(h=cfg["path.h"], eps_b=cfg["path.eps_b"],
                          delta_cut=cfg["kernel.delta_cut"],
                          t_max=cfg["path.t_max"],
                          refine_factor=cfg["path.refine_factor"])
    except ValueError as e:
        raise ConfigError("path: %s" % e)


def _annulus_f(dom, r_lo, r_hi):
    c = dom.center

    def f(y):
        r = np.linalg.norm(np.asarray(y, float) - c, axis=-1)
        return ((r > r_lo) & (r < r_hi)).astype(float)
    return f


def _default_z(dom):
    z = dom.center.copy()
    z[0] += dom.radius
    return dom.project(z)


def _boundary_data(cfg, mesh, z):
    kind = cfg["data.kind"]
    if kind == "hemisphere":
        return ftu.hemisphere_indicator(mesh, z)
    if kind == "affine":
        return ftu.affine_in_angle(mesh, z, value_at=cfg["data.value"],
                                   slope=cfg["data.slope"])
    if kind == "constant":
        return ftu.BoundaryData(mesh, np.full(mesh.n_cells,
                                              cfg["data.const"]))
    raise ConfigError("data.kind must be hemisphere, affine or constant")


def _atoms(spec, mesh, what):
    vals = np.zeros(mesh.n_cells)
    try:
        for part in spec.split(","):
            idx, w = part.split(":")
            vals[int(idx)] = float(w)
    except (ValueError, IndexError):
        raise ConfigError("%s atoms: expected 'index:weight,...' got %r"
                          % (what, spec))
    return ftu.BoundaryData(mesh, vals)


# -- experiment bodies ------------------------------------------------------
# each returns (results, verdicts, csvs) with csvs: filename -> (header, rows)

def _exp_exit_stats(cfg, dom, kern, pcfg):
    x = _point(cfg, "x", dom)
    x = knl._default_x0(dom) if x is None else x
    batch = pathsim.simulate_exits(dom, kern, x, cfg["run.n"], pcfg,
                                   seed=cfg["run.seed"],
                                   lanes=cfg["run.lanes"])
    live = batch.exit_type != EXIT_CENSORED
    m = int(live.sum())
    F = float((batch.exit_type[live] == EXIT_BOUNDARY).mean()) if m else float("nan")
    tm = batch.exit_time[live]
    res = {"x": x.tolist(),
           "F_hat": F,
           "F_stderr": float(np.sqrt(max(F * (1 - F), 0.0) / m)) if m else None,
           "mean_exit_time": float(tm.mean()) if m else None,
           "mean_exit_time_stderr": float(tm.std(ddof=1) / np.sqrt(m)) if m > 1 else None,
           "censored_fraction": batch.censored_fraction,
           "counts": {"boundary": int((batch.exit_type == EXIT_BOUNDARY).sum()),
                      "jump": int((batch.exit_type == EXIT_JUMP).sum()),
                      "censored": int((batch.exit_type == EXIT_CENSORED).sum())}}
    verd = {"completed": "pass" if batch.censored_fraction <= 0.05 else "fail"}
    rows = [[k, res["counts"][k], repr(res["counts"][k] / batch.n)]
            for k in ("boundary", "jump", "censored")]
    return res, verd, {"exit_stats.csv": (["class", "count", "fraction"], rows)}


def _exp_green(cfg, dom, kern, pcfg):
    x = _point(cfg, "x", dom)
    x = knl._default_x0(dom) if x is None else x
    grid = pathsim.SpatialGrid(dom, cfg["grid.n_r"], cfg["grid.n_ang"])
    g = pathsim.occupation_green(dom, kern, x, grid, cfg["run.n"], pcfg,
                                 seed=cfg["run.seed"], lanes=cfg["run.lanes"])
    total = float(g.values @ grid.vols)
    tau = g.mean_exit_time
    rel = abs(total - tau) / tau if tau > 0 else float("inf")
    res = {"x": x.tolist(), "mean_exit_time": tau,
           "green_volume_integral": total, "occupation_identity_rel": rel,
           "censored_fraction": g.censored_fraction}
    verd = {"occupation_identity": "pass" if rel <= 1e-3 else "fail"}
    hdr = ["cell"] + ["c" + a for a in "xyz"[:dom.d]] + ["value", "stderr", "n"]
    rows = [[i] + [repr(float(c)) for c in grid.centers[i]]
            + [repr(float(g.values[i])), repr(float(g.stderr[i])), g.n]
            for i in range(g.n_cells)]
    return res, verd, {"green_cells.csv": (hdr, rows)}


def _exp_boundary_density(cfg, dom, kern, pcfg):
    x = _point(cfg, "x", dom)
    x = knl._default_x0(dom) if x is None else x
    mesh = dom.boundary_mesh(cfg["mesh.cells"])
    p = knl.boundary_density(dom, kern, x, mesh, cfg["run.n"], pcfg,
                             seed=cfg["run.seed"], lanes=cfg["run.lanes"])
    cons = abs(float(p.values @ mesh.sigmas) - p.F_hat)
    res = {"x": x.tolist(), "F_hat": p.F_hat, "conservation_gap": cons,
           "censored_fraction": p.censored_fraction,
           "n_effective": p.n_effective}
    verd = {"conservation": "pass" if cons <= 1e-9 else "fail"}
    hdr = ["cell"] + ["c" + a for a in "xyz"[:dom.d]] + ["value", "stderr"]
    rows = [[i] + [repr(float(c)) for c in mesh.centers[i]]
            + [repr(float(p.values[i])), repr(float(p.stderr[i]))]
            for i in range(mesh.n_cells)]
    csvs = {"boundary_density.csv": (hdr, rows)}
    if not kern.sub.has_jumps and dom.kind == "unit_ball" and dom.d == 2:
        pk = (1.0 - x @ x) / (2.0 * np.pi *
                              ((mesh.centers - x) ** 2).sum(axis=1))
        zmax = float(np.max(np.abs(p.values - pk) /
                            np.where(p.stderr > 0, p.stderr, np.inf)))
        res["classical_kernel_max_sigma"] = zmax
        verd["classical_oracle"] = "pass" if zmax <= 3.0 else "fail"
        for i, row in enumerate(rows):
            row.append(repr(float(pk[i])))
        hdr.append("classical")
    return res, verd, csvs


def _exp_levy_system(cfg, dom, kern, pcfg):
    x = _point(cfg, "x", dom)
    x = knl._default_x0(dom) if x is None else x
    f = _annulus_f(dom, cfg["f.r_lo"], cfg["f.r_hi"])
    grid = pathsim.SpatialGrid(dom, cfg["grid.n_r"], cfg["grid.n_ang"])
    r = knl.levy_system_check(dom, kern, x, f, cfg["run.n"], pcfg,
                              seed=cfg["run.seed"], lanes=cfg["run.lanes"],
                              grid=grid)
    res = dict(r)
    res["x"] = x.tolist()
    verd = {"identity": "pass" if r["sigma_distance"] <= 3.0 else "fail"}
    rows = [[repr(r["mc"]), repr(r["mc_stderr"]), repr(r["quad"]),
             repr(r["quad_stderr"]), repr(r["sigma_distance"])]]
    return res, verd, {"levy_system.csv":
                       (["mc", "mc_stderr", "quad", "quad_stderr",
                         "sigma_distance"], rows)}


def _trace_experiment(cfg, dom, kern, pcfg, relative):
    z = _point(cfg, "z", dom)
    z = _default_z(dom) if z is None else dom.project(z)
    mesh = dom.boundary_mesh(cfg["mesh.cells"])
    g = _boundary_data(cfg, mesh, z)
    r0 = cfg["cone.r0"] if cfg["cone.r0"] is not None else dom.R0
    cone = ConeSpec(z, cfg["cone.beta"], r0)
    fn = ftu.relative_fatou_trace if relative else ftu.fatou_trace
    rep = fn(dom, kern, g, z, cone, cfg["cone.depth"], cfg["run.n"], pcfg,
             seed=cfg["run.seed"], lanes=cfg["run.lanes"],
             tol=cfg["fatou.tol"], mode=cfg["cone.mode"])
    res = rep.as_dict()
    verd = {"convergence": rep.verdict}
    rows = [[i, repr(float(rep.deltas[i])), repr(float(rep.values[i])),
             repr(float(rep.stderr[i]))] for i in range(rep.values.size)]
    return res, verd, {"trace.csv": (["depth", "delta", "value", "stderr"],
                                     rows)}


def _exp_maximal(cfg, dom, kern, pcfg):
    mesh = dom.boundary_mesh(cfg["mesh.cells"])
    mu = _atoms(cfg["maximal.mu"], mesh, "maximal.mu")
    nu = _atoms(cfg["maximal.nu"], mesh, "maximal.nu")
    x = _point(cfg, "x", dom)
    x = 0.5 * (dom.center + _default_z(dom)) if x is None else x
    z = _point(cfg, "z", dom)
    z = _default_z(dom) if z is None else dom.project(z)
    r = ftu.maximal_inequality_check(mu, nu, dom, x, z, cfg["maximal.t"])
    verd = {"inequality": "pass" if r["pass"] else "fail"}
    rows = [[repr(r["lhs"]), repr(r["mid"]), repr(r["rhs"]), r["pass"]]]
    return r, verd, {"maximal.csv": (["lhs", "mid", "rhs", "pass"], rows)}


def _exp_g_bound(cfg, dom, kern, pcfg):
    z = _point(cfg, "z", dom)
    z = _default_z(dom) if z is None else dom.project(z)
    deltas = np.geomspace(cfg["gbound.delta_max"], cfg["gbound.delta_min"],
                          cfg["gbound.count"])
    nrm = dom.normal(z)
    xs = z[None, :] - deltas[:, None] * nrm[None, :]
    cells = cfg["mesh.cells"] or 2 ** 18
    mesh = dom.boundary_mesh(cells)
    r = ftu.G_boundedness_check(dom, mesh, xs)
    band = r["max"] / r["min"]
    res = dict(r, band_ratio=band, z=z.tolist())
    verd = {"bounded": "pass" if band <= cfg["gbound.band"] else "fail"}
    rows = [[repr(float(deltas[i])), repr(float(r["values"][i]))]
            for i in range(deltas.size)]
    return res, verd, {"g_bound.csv": (["delta", "G_surrogate"], rows)}


def _exp_locality(cfg, dom, kern, pcfg):
    z = _point(cfg, "z", dom)
    z = _default_z(dom) if z is None else dom.project(z)
    deltas = np.geomspace(cfg["locality.delta_max"], cfg["locality.delta_min"],
                          cfg["locality.count"])
    nrm = dom.normal(z)
    xs = z[None, :] - deltas[:, None] * nrm[None, :]
    r = ftu.exit_locality_check(dom, kern, z, cfg["locality.r"], xs,
                                cfg["run.n"], pcfg, seed=cfg["run.seed"],
                                lanes=cfg["run.lanes"])
    res = dict(r, z=z.tolist())
    if r["verdict"] == "inconclusive":
        verd = {"locality": "inconclusive"}
    else:
        ok = r["slope"] >= cfg["locality.slope_min"] and \
            r.get("monotone_decreasing", False)
        verd = {"locality": "pass" if ok else "fail"}
    rows = [[repr(float(d)), repr(float(q)), repr(float(s))]
            for d, q, s in zip(r["delta"], r["q"], r["q_stderr"])]
    return res, verd, {"locality.csv": (["delta", "q", "q_stderr"], rows)}


def _exp_representation(cfg, dom, kern, pcfg):
    spec = cfg["representation.xs"]
    if spec == "auto":
        xs = knl._default_x0(dom)[None, :]
    else:
        try:
            xs = np.array([[float(t) for t in pt.split(",")]
                           for pt in spec.split(";")])
        except ValueError:
            raise ConfigError("representation.xs: expected 'x,y;x,y;...'")
    f = _annulus_f(dom, cfg["f.r_lo"], cfg["f.r_hi"])
    r = ftu.representation_check(dom, kern, f, xs, cfg["run.n"], pcfg,
                                 seed=cfg["run.seed"], lanes=cfg["run.lanes"],
                                 ball_radius_frac=cfg["representation.frac"])
    verd = {"routes_agree": "pass" if r["pass"] else "fail"}
    hdr = ["x", "direct", "direct_stderr", "quad", "quad_stderr", "two_step",
           "two_step_stderr", "sigma_route_i", "sigma_route_ii"]
    rows = [["(%s)" % ";".join(repr(float(c)) for c in p["x"])]
            + [repr(float(p[k])) for k in hdr[1:]] for p in r["per_x"]]
    return r, verd, {"representation.csv": (hdr, rows)}


def _exp_counterexample(cfg, dom, kern, pcfg):
    r = ftu.littlewood_counterexample(
        gamma=cfg["counterexample.gamma"], depth=cfg["counterexample.depth"],
        mode=cfg["counterexample.mode"], dom=dom,
        mesh_cells=cfg["counterexample.mesh_cells"],
        k_max=cfg["counterexample.kmax"], lam0=cfg["counterexample.lam0"],
        n=cfg["run.n"], cfg=pcfg, seed=cfg["run.seed"],
        lanes=cfg["run.lanes"], kern=kern,
        radial_tol=cfg["counterexample.radial_tol"],
        tangential_tol=cfg["counterexample.tangential_tol"])
    res = {"pass_fraction": r["pass_fraction"], "dichotomy": r["dichotomy"],
           "radial_osc_max": max(a.oscillation for a, _ in r["reports"]),
           "tangential_osc_min": min(b.oscillation for _, b in r["reports"]),
           "theta_count": len(r["theta"])}
    verd = {"tangential_failure": "pass" if r["pass"] else "fail",
            "dichotomy": "pass" if r["dichotomy"] else "fail"}
    rows = [[repr(float(th)), repr(float(a.oscillation)),
             repr(float(b.oscillation)), a.verdict, b.verdict]
            for th, (a, b) in zip(r["theta"], r["reports"])]
    csvs = {"oscillations.csv": (["theta", "radial_osc", "tangential_osc",
                                  "radial_verdict", "tangential_verdict"],
                                 rows)}
    a0, b0 = r["reports"][0]
    csvs["trace_pair_theta0.csv"] = (
        ["delta", "radial_value", "tangential_value"],
        [[repr(float(a0.deltas[i])), repr(float(a0.values[i])),
          repr(float(b0.values[i]))] for i in range(a0.values.size)])
    return res, verd, csvs


def _exp_harnack(cfg, dom, kern, pcfg):
    x = _point(cfg, "x", dom)
    x = dom.center.copy() if x is None else x
    r = knl.harnack_check(dom, kern, x, cfg["harnack.r"],
                          cfg["harnack.pairs"], cfg["run.n"], pcfg,
                          seed=cfg["run.seed"], lanes=cfg["run.lanes"])
    res = {"max_ratio": r["max_ratio"], "max_ratio_stderr": r["stderr"],
           "x": x.tolist()}
    verd = {"harnack": "pass"
            if r["max_ratio"] <= cfg["harnack.bound"] else "fail"}
    rows = [[i] + [repr(float(c)) for c in r["points"][i]]
            + [repr(float(r["values"][i])), repr(float(r["value_stderr"][i]))]
            for i in range(len(r["values"]))]
    hdr = ["point"] + ["c" + a for a in "xyz"[:dom.d]] + ["value", "stderr"]
    return res, verd, {"harnack.csv": (hdr, rows)}


def _exp_condition_check(cfg, dom, kern, pcfg):
    if not kern.sub.has_jumps:
        raise ConfigError("condition-check needs a jump part "
                          "(subordinator.family != brownian_only)")
    r = kern.sub.check_condition(cfg["condition.K"])
    res = dict(r, family=kern.sub.family)
    ok = r["cm_violations"] == 0 and \
        r["doubling_constant"] <= cfg["condition.doubling_bound"]
    verd = {"condition": "pass" if ok else "fail"}
    rows = [[repr(float(r["doubling_constant"])), r["cm_violations"]]]
    return res, verd, {"condition.csv": (["doubling_constant",
                                          "cm_violations"], rows)}


_BODIES = {"exit-stats": _exp_exit_stats,
           "green": _exp_green,
           "boundary-density": _exp_boundary_density,
           "levy-system": _exp_levy_system,
           "fatou": lambda *a: _trace_experiment(*a, relative=False),
           "relative-fatou": lambda *a: _trace_experiment(*a, relative=True),
           "maximal": _exp_maximal,
           "g-bound": _exp_g_bound,
           "locality": _exp_locality,
           "representation": _exp_representation,
           "counterexample": _exp_counterexample,
           "harnack": _exp_harnack,
           "condition-check": _exp_condition_check}


# -- plumbing ---------------------------------------------------------------

def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.bool_,)):
        return bool(o)
    raise TypeError("not serializable: %r" % type(o))


def _make_run_dir(root, experiment):
    os.makedirs(root, exist_ok=True)
    stamp = time.strftime("%Y%m%d-%H%M%S")
    base = os.path.join(root, "%s-%s" % (experiment, stamp))
    path = base
    k = 0
    while True:
        try:
            os.mkdir(path)
            return path
        except FileExistsError:
            k += 1
            path = "%s-%d" % (base, k)


def _write_csvs(out_dir, csvs):
    for name, (header, rows) in csvs.items():
        with open(os.path.join(out_dir, name), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            w.writerows(rows)


def cmd_run(args):
    try:
        cfg = parse_config(args.config)
        if args.seed is not None:
            cfg["run.seed"] = args.seed
        if args.lanes is not None:
            cfg["run.lanes"] = args.lanes
        if args.out is not None:
            cfg["run.out"] = args.out
        if cfg["run.lanes"] < 1 or cfg["run.n"] < 1:
            raise ConfigError("run.lanes and run.n must be >= 1")
        if cfg["mesh.cells"] is None:
            cfg["mesh.cells"] = _MESH_DEFAULT.get(cfg["experiment"])
        dom = build_domain(cfg)
        kern = build_kernel(cfg)
        pcfg = build_pathconfig(cfg)
    except ConfigError as e:
        print("config error: %s" % e, file=sys.stderr)
        return 2
    root = cfg["run.out"] or os.environ.get("SBMPOT_OUT", "runs")
    out_dir = _make_run_dir(root, cfg["experiment"])
    summary = {"schema_version": 1, "experiment": cfg["experiment"],
               "config": {k: v for k, v in sorted(cfg.items())
                          if v is not None}}
    t0 = time.time()
    try:
        results, verdicts, csvs = _BODIES[cfg["experiment"]](cfg, dom, kern,
                                                             pcfg)
        _write_csvs(out_dir, csvs)
    except ConfigError as e:
        print("config error: %s" % e, file=sys.stderr)
        return 2
    except Exception as e:   # runtime numeric failure: flag partial artifacts
        summary.update({"error": "%s: %s" % (type(e).__name__, e),
                        "partial": True, "wall_time_s": time.time() - t0})
        with open(os.path.join(out_dir, "summary.json"), "w") as fh:
            json.dump(summary, fh, indent=1, default=_json_default)
        print("runtime error (partial artifacts in %s): %s" % (out_dir, e),
              file=sys.stderr)
        return 1
    summary.update({"results": results, "verdicts": verdicts,
                    "wall_time_s": time.time() - t0,
                    "censored_fraction": results.get("censored_fraction")})
    with open(os.path.join(out_dir, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=1, default=_json_default)
    ok = all(v in ("pass", "inconclusive") for v in verdicts.values())
    print(out_dir)
    for name, v in sorted(verdicts.items()):
        print("  %-22s %s" % (name, v))
    return 0 if ok else 1


def cmd_report(args):
    if not os.path.isdir(args.dir):
        print("not a directory: %s" % args.dir, file=sys.stderr)
        return 2
    rows = []
    problems = []
    runs = []
    for name in sorted(os.listdir(args.dir)):
        sub = os.path.join(args.dir, name)
        sf = os.path.join(sub, "summary.json")
        if not os.path.isdir(sub) or not os.path.exists(sf):
            continue
        try:
            with open(sf) as fh:
                s = json.load(fh)
        except (OSError, json.JSONDecodeError) as e:
            problems.append("%s: %s" % (sf, e))
            continue
        if "error" in s:
            rows.append([name, s.get("experiment", "?"), "error",
                         s["error"][:60]])
            continue
        verd = ";".join("%s=%s" % kv for kv in sorted(s.get("verdicts",
                                                            {}).items()))
        key = _key_numbers(s)
        rows.append([name, s.get("experiment", "?"), verd, key])
        runs.append((name, sub, s))
    widths = [max((len(str(r[i])) for r in rows), default=8) for i in range(4)]
    fmt = "  ".join("%%-%ds" % w for w in widths)
    if rows:
        print(fmt % ("run", "experiment", "verdicts", "key numbers"))
        for r in rows:
            print(fmt % tuple(str(c) for c in r))
    else:
        print("no runs found")
    for p in problems:
        print("problem: %s" % p, file=sys.stderr)
    with open(os.path.join(args.dir, "report_table.csv"), "w",
              newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["run", "experiment", "verdicts", "key_numbers"])
        w.writerows(rows)
    figdir = os.path.join(args.dir, "figures")
    os.makedirs(figdir, exist_ok=True)
    for name, sub, _ in runs:
        for f in sorted(os.listdir(sub)):
            if f.endswith(".csv"):
                shutil.copyfile(os.path.join(sub, f),
                                os.path.join(figdir, "%s__%s" % (name, f)))
    return 0


def _key_numbers(s):
    r = s.get("results", {})
    exp = s.get("experiment")
    picks = {"exit-stats": ("F_hat", "mean_exit_time"),
             "green": ("mean_exit_time", "occupation_identity_rel"),
             "boundary-density": ("F_hat", "classical_kernel_max_sigma"),
             "levy-system": ("mc", "quad", "sigma_distance"),
             "fatou": ("limit", "oscillation"),
             "relative-fatou": ("limit", "oscillation"),
             "maximal": ("lhs", "mid", "rhs"),
             "g-bound": ("min", "max"),
             "locality": ("slope",),
             "representation": ("pass",),
             "counterexample": ("pass_fraction", "dichotomy"),
             "harnack": ("max_ratio",),
             "condition-check": ("doubling_constant", "cm_violations")}
    out = []
    for k in picks.get(exp, ()):
        if k in r:
            v = r[k]
            out.append("%s=%.6g" % (k, v) if isinstance(v, float)
                       else "%s=%s" % (k, v))
    return " ".join(out)


def main(argv=None):
    ap = argparse.ArgumentParser(prog="sbmpot",
                                 description="simulation experiments for "
                                 "subordinate Brownian motion with a "
                                 "Gaussian component")
    sp = ap.add_subparsers(dest="cmd", required=True)
    rp = sp.add_parser("run", help="execute one experiment from a config")
    rp.add_argument("config")
    rp.add_argument("--seed", type=int, default=None,
                    help="override run.seed")
    rp.add_argument("--lanes", type=int, default=None,
                    help="override run.lanes")
    rp.add_argument("--out", default=None, help="override output root "
                    "(default: run.out, then $SBMPOT_OUT, then ./runs)")
    rp.set_defaults(fn=cmd_run)
    tp = sp.add_parser("report", help="consolidate run summaries")
    tp.add_argument("dir")
    tp.set_defaults(fn=cmd_report)
    args = ap.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
