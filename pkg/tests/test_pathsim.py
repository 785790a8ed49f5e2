import csv

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import sbmpot.pathsim as ps
from sbmpot.bernstein import Subordinator
from sbmpot.geometry import Domain
from sbmpot.levy import JumpKernel
from sbmpot.pathsim import (CellAccum, PathConfig, SpatialGrid, estimate_F,
                            functional_stats, occupation_green, shard_rng,
                            simulate_exit, simulate_exits, subseed, trace_path)


@pytest.fixture(scope="module")
def disk():
    return Domain("unit_ball", d=2)


@pytest.fixture(scope="module")
def brown():
    return JumpKernel(Subordinator("brownian_only"), d=2, delta_cut=0.02)


@pytest.fixture(scope="module")
def stab():
    return JumpKernel(Subordinator("stable_mixture", alpha=1.0), d=2,
                      delta_cut=0.02)


@pytest.fixture(scope="module")
def brown_batch(disk, brown):
    return simulate_exits(disk, brown, np.zeros(2), 20_000, seed=11)


def test_config_validation():
    with pytest.raises(ValueError):
        PathConfig(h=0.0)
    with pytest.raises(ValueError):
        PathConfig(t_max=-1.0)
    with pytest.raises(ValueError):
        PathConfig(refine_factor=0.5)
    with pytest.raises(ValueError):
        PathConfig(eps_b=0.0)
    with pytest.raises(ValueError):
        PathConfig(delta_cut=-0.1)


def test_input_validation(disk, brown, stab):
    with pytest.raises(ValueError):
        simulate_exits(disk, brown, np.array([1.5, 0.0]), 10)
    with pytest.raises(ValueError):
        simulate_exits(disk, brown, np.zeros(2), 0)
    with pytest.raises(ValueError):
        simulate_exits(disk, brown, np.zeros((7, 2)), 10)
    # the config cutoff must agree with the kernel's tables ...
    with pytest.raises(ValueError):
        simulate_exits(disk, stab, np.zeros(2), 10, PathConfig(delta_cut=0.05))
    # ... but a pure-diffusion kernel has no tables to disagree with
    simulate_exits(disk, brown, np.zeros(2), 10, PathConfig(delta_cut=0.05))


def test_subseed_composition():
    assert subseed(3) == (3,)
    assert subseed(3, 1, 2) == (3, 1, 2)
    assert subseed((2, 5), 7) == (2, 5, 7)
    assert subseed(subseed(4, 1), 0) == (4, 1, 0)


def test_shard_rng_is_pinned():
    a = shard_rng(5, 2).standard_normal(4)
    b = np.random.default_rng(
        np.random.SeedSequence(5, spawn_key=(2,))).standard_normal(4)
    assert np.array_equal(a, b)


def test_brownian_all_boundary(disk, brown_batch):
    b = brown_batch
    assert b.n == 20_000 and b.d == 2
    assert np.all(b.exit_type == ps.EXIT_BOUNDARY)
    assert b.censored_fraction == 0.0
    # exits are projected exactly onto the circle
    r = np.linalg.norm(b.exit_pos, axis=1)
    assert np.max(np.abs(r - 1.0)) < 1e-9
    assert np.all(disk.contains(b.pre_exit_pos))


def test_brownian_mean_exit_time(disk, brown_batch):
    # generator Delta on the unit disk: E_x[tau] = (1-|x|^2)/(2d), so 1/4
    # from the centre; variance is 3/32 - 1/16 = 1/32
    t = brown_batch.exit_time
    se = t.std(ddof=1) / np.sqrt(t.size)
    assert abs(float(t.mean()) - 0.25) < 3.0 * se + 5e-4
    assert abs(float(t.var(ddof=1)) - 1.0 / 32.0) < 0.1 / 32.0


def test_step_halving_agrees(disk, brown):
    m = []
    for h, seed in ((1e-3, 21), (5e-4, 22)):
        b = simulate_exits(disk, brown, np.zeros(2), 20_000,
                           PathConfig(h=h), seed=seed)
        t = b.exit_time
        m.append((t.mean(), t.std(ddof=1) / np.sqrt(t.size)))
    assert abs(m[0][0] - m[1][0]) < 3.0 * np.hypot(m[0][1], m[1][1])


def test_exit_classes_and_collar(disk, stab):
    b = simulate_exits(disk, stab, np.zeros(2), 4000, seed=2)
    eps_b = 1e-4 * disk.diam
    jump = b.exit_type == ps.EXIT_JUMP
    bdry = b.exit_type == ps.EXIT_BOUNDARY
    assert jump.sum() > 200 and bdry.sum() > 200
    sd = disk.signed_dist(b.exit_pos)
    # jump exits land strictly beyond the collar, un-projected
    assert np.all(sd[jump] < -eps_b)
    assert np.max(np.abs(sd[bdry])) < 1e-9
    assert np.all(disk.contains(b.pre_exit_pos[jump]))
    hop = np.linalg.norm(b.exit_pos[jump] - b.pre_exit_pos[jump], axis=1)
    assert np.all(hop >= stab.delta_cut - 1e-12)


def test_censoring_at_t_max(disk, brown):
    b = simulate_exits(disk, brown, np.zeros(2), 2000, PathConfig(t_max=0.05),
                       seed=3)
    cen = b.exit_type == ps.EXIT_CENSORED
    assert cen.sum() > 100
    assert np.all(b.exit_time[cen] == 0.05)
    assert np.all(b.exit_time <= 0.05)
    assert np.all(disk.contains(b.exit_pos[cen]))
    fs = functional_stats(b, lambda y: np.ones(len(y)))
    assert fs["warn_censored"]
    assert fs["n_effective"] == int((~cen).sum())


def test_functional_stats_all_censored(disk, brown):
    b = simulate_exits(disk, brown, np.zeros(2), 200, PathConfig(t_max=5e-4),
                       seed=4)
    assert b.censored_fraction == 1.0
    fs = functional_stats(b, lambda y: np.ones(len(y)))
    assert np.isnan(fs["estimate"]) and fs["stderr"] == np.inf
    with pytest.raises(ValueError):
        functional_stats(b, lambda y: np.ones(len(y)), cls="interior")


def test_estimate_F_binomial(disk, stab):
    r = estimate_F(disk, stab, np.array([0.9, 0.0]), 2000, seed=7)
    p = r["F_hat"]
    assert 0.0 < p < 1.0
    assert abs(r["stderr"] - np.sqrt(p * (1.0 - p) / r["n_effective"])) < 1e-15
    with pytest.raises(ValueError):
        estimate_F(disk, stab, np.zeros(2), 50)


def test_boundary_indicator_matches_F(disk, stab):
    b = simulate_exits(disk, stab, np.zeros(2), 3000, seed=8)
    r = estimate_F(disk, stab, np.zeros(2), 0, batch=b)
    g = functional_stats(b, lambda y: np.ones(len(y)), cls="boundary")
    assert abs(r["F_hat"] - g["estimate"]) < 1e-14
    # and the two exit classes partition the live paths
    j = functional_stats(b, lambda y: np.ones(len(y)), cls="jump")
    assert abs(r["F_hat"] + j["estimate"] - 1.0) < 1e-14


def test_shard_determinism_and_lane_independence(disk, stab):
    grid = SpatialGrid(disk, 6, 8)
    old = ps.SHARD_PATHS
    ps.SHARD_PATHS = 512
    try:
        a, aa = simulate_exits(disk, stab, np.zeros(2), 2000, seed=5,
                               occ_grid=grid)
        b, ab = simulate_exits(disk, stab, np.zeros(2), 2000, seed=5, lanes=3,
                               occ_grid=grid)
        pre = simulate_exits(disk, stab, np.zeros(2), 512, seed=5)
        other = simulate_exits(disk, stab, np.zeros(2), 512, seed=6)
    finally:
        ps.SHARD_PATHS = old
    for f in ("exit_type", "exit_pos", "pre_exit_pos", "exit_time"):
        assert np.array_equal(getattr(a, f), getattr(b, f))
        # shard 0 is byte-stable under extension of the run
        assert np.array_equal(getattr(pre, f), getattr(a, f)[:512])
    assert np.array_equal(aa.sums, ab.sums)
    assert np.array_equal(aa.counts, ab.counts)
    assert not np.array_equal(other.exit_time, pre.exit_time)


def test_occupation_green_total_time(disk, brown):
    grid = SpatialGrid(disk, 24, 32)
    kg = occupation_green(disk, brown, np.zeros(2), grid, 20_000, seed=9)
    # sum of cell time equals total time in the domain, up to the half-step
    # attribution at bridge exits
    total = float(np.sum(kg.values * grid.vols))
    assert abs(total - kg.mean_exit_time) < 2e-3 * kg.mean_exit_time
    assert abs(kg.mean_exit_time - 0.25) < 5e-3
    assert kg.censored_fraction == 0.0
    # unit weights turn the accumulator into per-path total time
    est, se = kg.accum.linear_stat(np.ones(grid.n_cells))
    assert abs(est - total) < 1e-12
    assert 0.0 < se < 0.01
    with pytest.raises(ValueError):
        occupation_green(disk, brown, np.zeros(2), grid, 500)


def test_unvisited_cells_flagged(disk, brown):
    grid = SpatialGrid(disk, 48, 64)
    kg = occupation_green(disk, brown, np.zeros(2), grid, 1000,
                          PathConfig(t_max=0.005), seed=13)
    unseen = ~np.isfinite(kg.stderr)
    assert unseen.any()
    assert np.all(kg.values[unseen] == 0.0)
    assert np.all(np.isfinite(kg.stderr[~unseen]))
    # at this horizon the rim is unreachable but the start cell is not
    far = np.linalg.norm(grid.centers, axis=1) > 0.9
    assert np.all(unseen[far])
    assert not unseen[grid.cell_of(np.zeros((1, 2)))[0]]


def test_per_path_start_points(disk, brown):
    rng = np.random.default_rng(0)
    th = rng.uniform(0.0, 2.0 * np.pi, 400)
    x0 = 0.995 * np.stack([np.cos(th), np.sin(th)], axis=1)
    b = simulate_exits(disk, brown, x0, 400, seed=10)
    assert np.all(b.exit_type == ps.EXIT_BOUNDARY)
    assert float(b.exit_time.mean()) < 0.01
    # starting 0.005 from the wall, exits hug the nearest arc
    dots = np.sum(b.exit_pos * x0, axis=1) / np.linalg.norm(x0, axis=1)
    assert float(np.mean(dots > 0.9)) > 0.9


def test_single_path_record(disk, stab):
    cfg = PathConfig()
    grid = SpatialGrid(disk, 8, 8)
    rec = simulate_exit(disk, stab, np.zeros(2), cfg,
                        np.random.default_rng(3), grid=grid)
    assert rec.exit_type in ("boundary", "jump", "censored")
    assert rec.occupation.shape == (grid.n_cells,)
    assert abs(float(rec.occupation.sum()) - rec.exit_time) <= 0.51 * cfg.h
    rec2 = simulate_exit(disk, stab, np.zeros(2), cfg, np.random.default_rng(3))
    assert rec2.occupation is None
    assert rec2.exit_type == rec.exit_type and rec2.exit_time == rec.exit_time


def test_trace_path_csv(tmp_path, disk, stab):
    p = tmp_path / "trace.csv"
    rows = trace_path(disk, stab, np.array([0.3, 0.0]), PathConfig(),
                      np.random.default_rng(12), path=str(p))
    events = [r[3] for r in rows]
    assert events[-1] in ("exit_boundary", "exit_jump")
    assert all(e in ("step", "jump", "exit_boundary", "exit_jump")
               for e in events)
    steps = [r[0] for r in rows]
    assert steps == sorted(steps)
    times = np.array([r[1] for r in rows])
    assert np.all(np.diff(times) >= -1e-12)
    with open(p) as fh:
        rd = list(csv.reader(fh))
    assert rd[0] == ["step", "time", "x0", "x1", "event"]
    assert len(rd) == len(rows) + 1
    # repr round-trip: the CSV is lossless
    assert float(rd[1][1]) == rows[0][1]
    assert float(rd[-1][2]) == rows[-1][2][0]


@given(st.integers(0, 2 ** 32 - 1), st.integers(1, 5), st.integers(2, 5))
@settings(max_examples=25, deadline=None)
def test_cellaccum_merge_invariance(seed, n_cells, n_chunks):
    rng = np.random.default_rng(seed)
    chunks = [rng.exponential(size=(int(rng.integers(1, 7)), n_cells))
              for _ in range(n_chunks)]
    counts = [rng.integers(1, 9, size=c.shape[0]).astype(float)
              for c in chunks]
    whole = CellAccum(n_cells)
    whole.fold(np.concatenate(chunks), np.concatenate(counts))
    piecewise = CellAccum(n_cells)
    for c, k in zip(chunks, counts):
        piecewise.fold(c, k)
    merged = CellAccum(n_cells)
    merged.fold(chunks[0], counts[0])
    for c, k in zip(chunks[1:], counts[1:]):
        part = CellAccum(n_cells)
        part.fold(c, k)
        merged.merge(part)
    w = rng.normal(size=n_cells)
    for acc in (piecewise, merged):
        assert np.array_equal(acc.sums, whole.sums)
        assert np.array_equal(acc.counts, whole.counts)
        assert acc.linear_stat(w) == whole.linear_stat(w)
        m1, s1 = acc.mean_stderr()
        m2, s2 = whole.mean_stderr()
        assert np.array_equal(m1, m2) and np.array_equal(s1, s2)


@given(st.integers(0, 2 ** 32 - 1))
@settings(max_examples=25, deadline=None)
def test_cellaccum_stats_against_brute_force(seed):
    rng = np.random.default_rng(seed)
    nb, nc = int(rng.integers(2, 9)), int(rng.integers(1, 5))
    sums = rng.exponential(size=(nb, nc))
    counts = rng.integers(1, 9, size=nb).astype(float)
    acc = CellAccum(nc)
    acc.fold(sums, counts)
    n = counts.sum()
    m, se = acc.mean_stderr()
    assert np.allclose(m, sums.sum(axis=0) / n, rtol=1e-13, atol=0)
    resid = sums - counts[:, None] * m[None, :]
    assert np.allclose(se, np.sqrt((resid ** 2).sum(axis=0)) / n,
                       rtol=1e-12, atol=0)
    w = rng.normal(size=nc)
    est, lse = acc.linear_stat(w)
    q = sums @ w
    assert abs(est - q.sum() / n) < 1e-12 * max(1.0, abs(est))
    assert abs(lse - np.sqrt(((q - est * counts) ** 2).sum()) / n) < 1e-12
