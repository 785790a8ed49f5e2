import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from sbmpot.geometry import (ConeSpec, Domain, cone_sequence, stolz_contains,
                             tangential_curve)


def test_unit_ball_basics():
    dom = Domain("unit_ball", d=2)
    x = np.array([[0.0, 0.0], [0.6, 0.0], [0.0, -0.25]])
    assert np.allclose(dom.signed_dist(x), [1.0, 0.4, 0.75])
    z = dom.project(np.array([2.0, 0.0]))
    assert np.allclose(z, [1.0, 0.0])
    assert np.allclose(dom.normal(np.array([0.0, 1.0])), [0.0, 1.0])
    assert abs(dom.surface_measure() - 2.0 * np.pi) < 1e-12
    assert dom.R0 == 1.0 and dom.diam == 2.0


def test_ball_shifted():
    dom = Domain("ball", d=3, center=[1.0, 2.0, 3.0], radius=0.5)
    assert abs(dom.signed_dist(np.array([1.0, 2.0, 3.0])) - 0.5) < 1e-12
    assert abs(dom.surface_measure() - 4.0 * np.pi * 0.25) < 1e-12
    n = dom.normal(np.array([1.5, 2.0, 3.0]))
    assert np.allclose(n, [1.0, 0.0, 0.0])


def test_annulus_r0_tangent_ball_invariant():
    dom = Domain("annulus", d=2, r_in=0.5)
    # R0 limited by the gap: a tangent interior ball at the outer circle of
    # radius R0 must not poke into the hole
    assert abs(dom.R0 - 0.25) < 1e-12
    z = np.array([1.0, 0.0])
    c = z - dom.R0 * dom.normal(z)
    assert np.linalg.norm(c) - dom.R0 >= 0.5 - 1e-12
    # and at the inner circle
    zi = np.array([0.5, 0.0])
    ci = zi - dom.R0 * dom.normal(zi)
    assert dom.signed_dist(ci) >= dom.R0 - 1e-12
    assert abs(dom.surface_measure() - 2.0 * np.pi * 1.5) < 1e-12


def test_annulus_signed_dist_and_project():
    dom = Domain("annulus", d=2, r_in=0.5)
    x = np.array([[0.6, 0.0], [0.9, 0.0]])
    assert np.allclose(dom.signed_dist(x), [0.1, 0.1])
    assert np.allclose(dom.project(np.array([0.55, 0.0])), [0.5, 0.0])
    assert np.allclose(dom.project(np.array([0.98, 0.0])), [1.0, 0.0])
    # normal points away from the domain on both components
    assert np.allclose(dom.normal(np.array([0.5, 0.0])), [-1.0, 0.0])


def test_perturbed_signed_dist_against_dense_boundary():
    dom = Domain("perturbed_disk", d=2, eps=0.08 / 9.0, k=3)
    eps = 0.08 / 9.0
    th = np.linspace(0.0, 2.0 * np.pi, 200_000, endpoint=False)
    r = 1.0 + eps * np.cos(3.0 * th)
    bdry = np.stack([r * np.cos(th), r * np.sin(th)], axis=1)
    rng = np.random.default_rng(0)
    pts = rng.uniform(-0.6, 0.6, size=(60, 2))
    pts = pts[dom.signed_dist(pts) > 0.05]
    for x in pts:
        want = np.min(np.linalg.norm(x - bdry, axis=1))
        assert abs(dom.signed_dist(x) - want) < 1e-6


@settings(max_examples=40, deadline=None)
@given(st.floats(-0.99, 0.99), st.floats(-0.99, 0.99))
def test_project_lands_on_boundary(a, b):
    dom = Domain("unit_ball", d=2)
    x = np.array([a, b])
    assume(1e-3 < np.linalg.norm(x) < 0.999)
    z = dom.project(x)
    assert abs(dom.signed_dist(z)) < 1e-9
    assert abs(np.linalg.norm(x - z) - dom.dist(x)) < 1e-9
    assert abs(np.linalg.norm(dom.normal(z)) - 1.0) < 1e-9


def test_boundary_mesh_partition():
    for dom, n in ((Domain("unit_ball", d=2), 64),
                   (Domain("unit_ball", d=3), 200),
                   (Domain("annulus", d=2, r_in=0.5), 48),
                   (Domain("perturbed_disk", d=2, eps=0.01, k=3), 96)):
        mesh = dom.boundary_mesh(n)
        assert abs(mesh.sigmas.sum() - dom.surface_measure()) \
            < 1e-6 * dom.surface_measure()
        got = mesh.cell_of(mesh.centers)
        assert np.array_equal(got, np.arange(mesh.n_cells)), dom.kind
        assert np.all(np.abs(dom.signed_dist(mesh.centers))
                      < 1e-6 * dom.diam)


def test_boundary_ball_measure_ahlfors():
    dom = Domain("unit_ball", d=2)
    z = np.array([1.0, 0.0])
    for r in (0.05, 0.2, 0.8):
        s = dom.boundary_ball_measure(z, r)
        want = 4.0 * np.arcsin(min(r / 2.0, 1.0))
        assert abs(s - want) < 1e-6, r
        assert 1.0 <= s / r <= np.pi  # Ahlfors window


def test_cone_spec_validation():
    z = np.array([1.0, 0.0])
    ConeSpec(z, 2.0, 1.0)
    with pytest.raises(ValueError):
        ConeSpec(z, 0.9, 1.0)      # beta <= 1
    with pytest.raises(ValueError):
        ConeSpec(z, 1.5, 0.5)      # beta <= (1-kappa)/kappa = 3


def test_cone_sequence_inside_and_halving():
    dom = Domain("unit_ball", d=2)
    z = np.array([np.cos(0.7), np.sin(0.7)])
    cone = ConeSpec(z, 2.0, 1.0)
    for mode in ("radial", "zigzag"):
        pts = cone_sequence(dom, cone, 8, mode=mode)
        d = dom.dist(pts)
        if mode == "radial":
            assert np.all(np.abs(np.log2(d[:-1] / d[1:]) - 1.0) < 1e-9)
        else:
            # tangential offsets bend delta_D away from exact halving, but the
            # ratio settles to 2 as the points straighten out
            assert np.all(np.diff(d) < 0.0)
            assert abs(d[-2] / d[-1] - 2.0) < 0.02
        assert stolz_contains(dom, cone, pts).all(), mode


def test_tangential_curve_leaves_every_cone():
    dom = Domain("unit_ball", d=2)
    th = 0.3
    z = np.array([np.cos(th), np.sin(th)])
    deltas = 2.0 ** -np.arange(3, 14).astype(float)
    pts = tangential_curve(th, 0.5, deltas)
    assert np.allclose(dom.dist(pts), deltas, atol=1e-12)
    for beta in (2.0, 8.0, 32.0):
        cone = ConeSpec(z, beta, 1.0)
        assert not stolz_contains(dom, cone, pts[-1])
    # |x - z| / delta ~ delta^(-1/2) grows as delta shrinks
    rat = np.linalg.norm(pts - z, axis=1) / deltas
    assert np.all(np.diff(rat) > 0.0)


def test_domain_validation_errors():
    with pytest.raises(ValueError):
        Domain("unit_ball", d=4)
    with pytest.raises(ValueError):
        Domain("annulus", d=2, r_in=1.2)
    with pytest.raises(ValueError):
        Domain("perturbed_disk", d=2, eps=0.5, k=3)  # eps*k^2 too large
    with pytest.raises(ValueError):
        Domain("perturbed_disk", d=3, eps=0.01, k=3)
    with pytest.raises(ValueError):
        Domain("ball", d=2, center=[0.0, 0.0], radius=-1.0)
    with pytest.raises(ValueError):
        Domain("egg", d=2)
