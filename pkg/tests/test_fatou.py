import json

import numpy as np
import pytest

from sbmpot.bernstein import Subordinator
from sbmpot.fatou import (BoundaryData, ConvergenceReport, G_boundedness_check,
                          affine_in_angle, exit_locality_check, fatou_trace,
                          hemisphere_indicator, littlewood_arcs,
                          littlewood_counterexample, maximal_inequality_check,
                          near_one_check, near_one_margin,
                          relative_fatou_trace, representation_check,
                          surrogate_trace, trace_stats)
from sbmpot.geometry import ConeSpec, Domain, cone_sequence
from sbmpot.levy import JumpKernel


@pytest.fixture(scope="module")
def disk():
    return Domain("unit_ball", d=2)


@pytest.fixture(scope="module")
def stab():
    return JumpKernel(Subordinator("stable_mixture", alpha=1.0), d=2,
                      delta_cut=0.02)


@pytest.fixture(scope="module")
def brown():
    return JumpKernel(Subordinator("brownian_only"), d=2, delta_cut=0.02)


def test_boundary_data_basics(disk):
    mesh = disk.boundary_mesh(16)
    data = BoundaryData(mesh, np.arange(16.0))
    pts = mesh.centers[[3, 11]]
    assert np.array_equal(data(pts), [3.0, 11.0])
    assert data.value_at(mesh.centers[5]) == 5.0
    fn = BoundaryData.from_function(mesh, lambda w: w[:, 0] ** 2)
    assert np.allclose(fn.values, mesh.centers[:, 0] ** 2)


def test_hemisphere_indicator(disk):
    mesh = disk.boundary_mesh(64)
    z = np.array([1.0, 0.0])
    g = hemisphere_indicator(mesh, z)
    assert set(np.unique(g.values)) == {0.0, 1.0}
    assert int(g.values.sum()) == 32
    assert g.value_at(z) == 1.0
    assert g.value_at(-z) == 0.0


def test_affine_in_angle(disk):
    mesh = disk.boundary_mesh(4096)
    z = np.array([1.0, 0.0])
    g = affine_in_angle(mesh, z)
    assert abs(g.value_at(z) - 0.3) < 1e-3
    assert g.values.min() > 0.3 - 0.08 * np.pi - 1e-6
    assert g.values.max() < 0.3 + 0.08 * np.pi + 1e-6
    ball = Domain("unit_ball", d=3)
    with pytest.raises(ValueError):
        affine_in_angle(ball.boundary_mesh(64), np.array([1.0, 0.0, 0.0]))


def test_convergence_report_verdicts():
    pts = np.array([[0.5, 0.0], [0.75, 0.0], [0.9, 0.0], [0.95, 0.0]])
    deltas = np.array([0.5, 0.25, 0.1, 0.05])
    rep = ConvergenceReport(np.array([1.0, 0.0]), {"kind": "cone"}, pts,
                            deltas, np.array([0.7, 0.8, 0.93, 0.97]),
                            np.array([0.01, 0.01, 0.01, 0.005]),
                            target_value=1.0)
    assert rep.limit == 0.97 and rep.limit_stderr == 0.005
    assert abs(rep.oscillation - 0.04) < 1e-15
    assert rep.decide(0.05) == "pass"          # |0.97-1| <= 0.05 + 0.015
    assert rep.decide(0.01) == "fail"          # 0.03 > 0.01 + 0.015
    assert rep.decide(0.004) == "inconclusive"  # stderr above tol
    d = json.loads(rep.to_json())
    assert d["schema_version"] == 1 and d["verdict"] == "inconclusive"
    assert d["limit"] == 0.97 and len(d["values"]) == 4


def test_convergence_report_csv(tmp_path):
    rep = ConvergenceReport(np.array([1.0, 0.0]), {}, np.zeros((2, 2)),
                            np.array([0.5, 0.25]), np.array([0.3, 0.31]),
                            np.array([0.01, 0.01]), target_value=0.3)
    p = tmp_path / "trace.csv"
    rep.to_csv(p)
    lines = p.read_text().strip().splitlines()
    assert lines[0] == "depth,delta,value,stderr"
    assert len(lines) == 3
    assert float(lines[2].split(",")[2]) == 0.31


def test_trace_stats_proportional_data(disk, stab):
    mesh = disk.boundary_mesh(64)
    ones = BoundaryData(mesh, np.ones(64))
    pts = np.array([[0.0, 0.0], [0.5, 0.0]])
    st = trace_stats(disk, stab, pts, 2000, seed=17, funcs={"one": ones})
    r = st["funcs"]["one"]
    # u_1 integrates the boundary indicator: exactly F, ratio exactly 1
    assert np.array_equal(r["u"], st["F"])
    assert np.all(r["ratio"] == 1.0)
    assert np.all(r["ratio_se"] == 0.0)
    assert np.all(st["F_se"] > 0.0)
    assert np.all(st["censored"] == 0.0)
    assert np.allclose(st["deltas"], [1.0, 0.5])


def test_relative_trace_constant_data_is_exact(disk, stab):
    mesh = disk.boundary_mesh(64)
    g = BoundaryData(mesh, np.full(64, 0.7))
    z = np.array([1.0, 0.0])
    cone = ConeSpec(z, 2.0, 1.0)
    rep = relative_fatou_trace(disk, stab, g, z, cone, 3, 1500, seed=23)
    assert rep.verdict == "pass"
    assert rep.oscillation < 1e-14
    assert np.allclose(rep.values, 0.7, rtol=1e-14, atol=0)
    # the guard against vanishing denominators
    broke = {"F": np.array([0.01])}
    with pytest.raises(RuntimeError):
        relative_fatou_trace(disk, stab, g, z, cone, 3, 1500, stats=broke,
                             name="g")


def test_fatou_and_relative_share_paths(disk, stab):
    mesh = disk.boundary_mesh(4096)
    g = hemisphere_indicator(mesh, np.array([1.0, 0.0]))
    z = np.array([1.0, 0.0])
    cone = ConeSpec(z, 2.0, 1.0)
    points = cone_sequence(disk, cone, 5, mode="radial")
    st = trace_stats(disk, stab, points, 4000, seed=29, funcs={"g": g})
    rep_u = fatou_trace(disk, stab, g, z, cone, 5, 4000, tol=0.1,
                        stats=st, name="g")
    rep_r = relative_fatou_trace(disk, stab, g, z, cone, 5, 4000, tol=0.05,
                                 stats=st, name="g")
    assert rep_u.verdict == "pass" and rep_r.verdict == "pass"
    # same paths top and bottom: the ratio sits above the plain average
    assert np.all(rep_r.values >= rep_u.values)
    assert rep_r.as_dict()["approach"]["mode"] == "radial"
    assert np.array_equal(rep_u.points, points)


def test_maximal_inequality_hand_case(disk):
    mesh = disk.boundary_mesh(16)
    z = np.array([np.cos(0.37), np.sin(0.37)])
    rng = np.random.default_rng(7)
    mu = BoundaryData(mesh, rng.exponential(size=16))
    nu = BoundaryData(mesh, rng.exponential(size=16))
    res = maximal_inequality_check(mu, nu, disk, np.zeros(2), z, 2.0)
    # brute-force recomputation of the closed-ball mass ratios
    r = np.linalg.norm(mesh.centers - z, axis=1)
    ratios, inf_flag = [], False
    for rho in np.unique(r):
        inside = r <= rho + 1e-9
        mmu, mnu = mu.values[inside].sum(), nu.values[inside].sum()
        if mmu == 0.0 and mnu == 0.0:
            continue
        if mnu == 0.0:
            inf_flag = True
            continue
        ratios.append(mmu / mnu)
    sup = np.inf if inf_flag else max(ratios)
    assert np.isclose(res["sup_ratio"], sup, rtol=1e-12)
    assert np.isclose(res["inf_ratio"], min(ratios), rtol=1e-12)
    assert res["C"] == 64.0    # max((3t)^d, 2^(3d)) with t=2, d=2
    assert res["pass"]
    assert res["lhs"] <= res["mid"] <= res["rhs"]


def test_maximal_inequality_edge_cases(disk):
    mesh = disk.boundary_mesh(16)
    z = np.array([np.cos(0.37), np.sin(0.37)])
    ones = BoundaryData(mesh, np.ones(16))
    res = maximal_inequality_check(ones, ones, disk, np.zeros(2), z, 2.0)
    assert res["mid"] == 1.0 and res["sup_ratio"] == 1.0
    assert res["inf_ratio"] == 1.0 and res["pass"]
    # scaling mu scales every ratio together
    mu3 = BoundaryData(mesh, 3.0 * np.ones(16))
    res3 = maximal_inequality_check(mu3, ones, disk, np.zeros(2), z, 2.0)
    assert np.isclose(res3["mid"], 3.0) and np.isclose(res3["sup_ratio"], 3.0)
    # mu mass where nu has none: the sup blows up but the bound holds
    muv = np.zeros(16)
    muv[int(np.argmin(np.linalg.norm(mesh.centers - z, axis=1)))] = 1.0
    nuv = np.zeros(16)
    nuv[int(np.argmax(np.linalg.norm(mesh.centers - z, axis=1)))] = 1.0
    res_inf = maximal_inequality_check(BoundaryData(mesh, muv),
                                       BoundaryData(mesh, nuv),
                                       disk, np.zeros(2), z, 2.0)
    assert res_inf["sup_ratio"] == np.inf and res_inf["rhs"] == np.inf
    assert res_inf["pass"]
    with pytest.raises(ValueError):
        maximal_inequality_check(ones, ones, disk, np.array([0.9, 0.0]), z,
                                 0.5)
    with pytest.raises(ValueError):
        maximal_inequality_check(BoundaryData(mesh, -np.ones(16)), ones, disk,
                                 np.zeros(2), z, 2.0)
    with pytest.raises(ValueError):
        maximal_inequality_check(ones, BoundaryData(disk.boundary_mesh(8),
                                                    np.ones(8)),
                                 disk, np.zeros(2), z, 2.0)


def test_G_boundedness(disk):
    mesh = disk.boundary_mesh(4096)
    # at the centre the surrogate kernel is identically 1: Gsur = |circle|
    res = G_boundedness_check(disk, mesh, np.zeros(2))
    assert abs(res["values"][0] - 2.0 * np.pi) < 1e-9
    xs = np.array([[0.0, 0.0], [0.9, 0.0], [0.99, 0.0]])
    res2 = G_boundedness_check(disk, mesh, xs)
    assert res2["max"] < 10.0 and res2["min"] > 1.0
    assert res2["max"] / res2["min"] < 5.0
    with pytest.raises(RuntimeError):
        G_boundedness_check(disk, disk.boundary_mesh(16),
                            np.array([0.99, 0.0]))
    with pytest.raises(ValueError):
        G_boundedness_check(disk, mesh, np.array([1.5, 0.0]))


def test_exit_locality(disk, stab, brown):
    z = np.array([1.0, 0.0])
    xs = z[None, :] * (1.0 - np.array([0.3, 0.15, 0.075]))[:, None]
    res = exit_locality_check(disk, stab, z, 0.25, xs, 2000, seed=31)
    assert res["verdict"] == "ok"
    assert res["slope"] > 0.5
    assert res["monotone_decreasing"]
    assert all(np.diff(res["q"]) < 0)
    # diffusion from deep points almost never lands far: flat zeros are
    # reported as inconclusive, not as a slope
    xs2 = z[None, :] * (1.0 - np.array([2e-3, 1e-3]))[:, None]
    res2 = exit_locality_check(disk, brown, z, 0.25, xs2, 300, seed=37)
    assert res2["verdict"] == "inconclusive"
    assert np.isnan(res2["slope"])
    with pytest.raises(ValueError):
        exit_locality_check(disk, stab, z, 1.5, xs, 2000)


def test_surrogate_trace_constant(disk):
    mesh = disk.boundary_mesh(512)
    data = BoundaryData(mesh, np.full(512, 0.42))
    rng = np.random.default_rng(3)
    th = rng.uniform(0, 2 * np.pi, 40)
    rr = rng.uniform(0.05, 0.95, 40)
    xs = np.stack([rr * np.cos(th), rr * np.sin(th)], axis=1)
    u = surrogate_trace(disk, mesh, data, xs)
    assert np.allclose(u, 0.42, rtol=1e-12, atol=0)


def test_littlewood_arcs_structure(disk):
    mesh = disk.boundary_mesh(2 ** 17)
    U, meta = littlewood_arcs(mesh)
    assert len(meta["arcs"]) == 48          # 8 clusters x 6 levels
    assert len(meta["clusters"]) == 8
    # levels never overlap, so the largest value is the level-1 weight
    assert U.values.max() == 0.5
    assert U.values.min() == 0.0
    # total arc mass: 8 * lam0 * sum_k 4^-k, discretised on the mesh
    mass = float(U.values @ mesh.sigmas)
    exact = 8.0 * 0.02 * sum(4.0 ** -k for k in range(1, 7))
    assert abs(mass - exact) < 0.05 * exact
    # every radial test angle stays off every arc
    for th in (np.array(meta["clusters"])[:, None]
               - np.array(meta["test_offsets"])[None, :]).ravel():
        zt = np.array([np.cos(th), np.sin(th)])
        assert U.value_at(zt) == 0.0
    with pytest.raises(ValueError):
        littlewood_arcs(Domain("unit_ball", d=3).boundary_mesh(64))


def test_near_one_margin_grid(disk):
    assert abs(near_one_margin(0.35) - 0.1) < 1e-15
    mesh = disk.boundary_mesh(2 ** 17)
    res = near_one_check(disk, mesh)
    assert res["pass"]
    assert len(res["rows"]) == 20
    assert all(r["u_hat"] >= 1.0 - r["eps"] for r in res["rows"])


def test_littlewood_mesh_guard():
    with pytest.raises(RuntimeError):
        littlewood_counterexample(mesh_cells=2 ** 14)


def test_representation_smoke(disk, stab):
    def phi(y):
        r = np.linalg.norm(y, axis=1)
        return ((1.2 < r) & (r < 2.0)).astype(float)

    res = representation_check(disk, stab, phi, np.zeros(2), 4000, seed=41)
    row = res["per_x"][0]
    assert row["direct"] > 0.0 and row["two_step"] > 0.0 and row["quad"] > 0.0
    assert row["sigma_route_i"] < 4.0 and row["sigma_route_ii"] < 4.0
    assert row["censored_fraction"] == 0.0
    assert res["pass"] == row["pass"]
