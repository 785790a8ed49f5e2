import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sbmpot.bernstein import FAMILIES, Subordinator


def test_family_list_frozen():
    assert FAMILIES == ("stable_mixture", "mixed_stable", "relativistic",
                        "geometric_stable", "brownian_only")


def test_constructor_validation():
    with pytest.raises(ValueError):
        Subordinator("stable")
    with pytest.raises(ValueError):
        Subordinator("stable_mixture", alpha=2.5)
    with pytest.raises(ValueError):
        Subordinator("mixed_stable", alpha=0.5, beta=1.0)  # beta < alpha
    with pytest.raises(ValueError):
        Subordinator("relativistic", alpha=1.0)            # mass missing
    with pytest.raises(ValueError):
        Subordinator("brownian_only", alpha=1.0)


def test_phi_stable_mixture_closed_form():
    # phi(lam) = lam + lam^(alpha/2): drift 1 plus the alpha/2-stable part
    sub = Subordinator("stable_mixture", alpha=1.0)
    lam = np.array([0.25, 1.0, 4.0, 9.0])
    assert np.allclose(sub.phi(lam), lam + np.sqrt(lam), rtol=1e-12)
    sub2 = Subordinator("stable_mixture", alpha=1.5)
    assert np.allclose(sub2.phi(lam), lam + lam ** 0.75, rtol=1e-12)


def test_phi_brownian_is_identity():
    sub = Subordinator("brownian_only")
    lam = np.array([0.1, 1.0, 10.0])
    assert np.allclose(sub.phi(lam), lam)
    assert not sub.has_jumps


def test_phi_relativistic_closed_form():
    # (m^(2/alpha) + lam)^(alpha/2) - m + lam
    sub = Subordinator("relativistic", alpha=1.0, mass=2.0)
    lam = np.array([0.5, 1.0, 3.0])
    want = np.sqrt(4.0 + lam) - 2.0 + lam
    assert np.allclose(sub.phi(lam), want, rtol=1e-10)


def test_phi_geometric_stable_closed_form():
    # log(1 + lam^(alpha/2)) + lam
    sub = Subordinator("geometric_stable", alpha=1.0)
    lam = np.array([0.5, 1.0, 4.0])
    assert np.allclose(sub.phi(lam), np.log1p(np.sqrt(lam)) + lam, rtol=1e-10)


def test_phi_from_levy_density_consistent():
    # phi(lam) = lam + int (1 - e^{-lam t}) m(t) dt must hold for the families
    # whose phi is written in closed form (cross-check of m against phi)
    from scipy.integrate import quad
    for sub in (Subordinator("stable_mixture", alpha=1.2),
                Subordinator("relativistic", alpha=1.0, mass=1.5)):
        for lam in (0.7, 2.0):
            val, _ = quad(lambda t: -np.expm1(-lam * t) * sub.levy_density(t),
                          0.0, np.inf, limit=400)
            assert abs(val + lam - sub.phi(lam)) < 1e-6 * sub.phi(lam)


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(["stable_mixture", "mixed_stable", "relativistic",
                        "geometric_stable"]),
       st.floats(min_value=0.05, max_value=20.0))
def test_phi_bernstein_finite_differences(family, lam):
    # phi >= 0, phi' >= 0, phi'' <= 0 via central differences
    kwargs = {"stable_mixture": dict(alpha=1.0),
              "mixed_stable": dict(alpha=1.4, beta=0.6),
              "relativistic": dict(alpha=1.0, mass=1.0),
              "geometric_stable": dict(alpha=1.0)}[family]
    sub = Subordinator(family, **kwargs)
    h = 1e-3 * lam
    f0, fm, fp = sub.phi(lam), sub.phi(lam - h), sub.phi(lam + h)
    assert f0 > 0.0
    assert fp - fm > -1e-9 * f0            # nondecreasing
    assert fp - 2.0 * f0 + fm < 1e-9 * f0  # concave


def test_levy_density_positive_decreasing():
    t = np.geomspace(1e-4, 10.0, 200)
    for sub in (Subordinator("stable_mixture", alpha=1.0),
                Subordinator("mixed_stable", alpha=1.4, beta=0.6),
                Subordinator("relativistic", alpha=1.0, mass=1.0),
                Subordinator("geometric_stable", alpha=1.0)):
        m = sub.levy_density(t)
        assert np.all(m > 0.0)
        assert np.all(np.diff(m) < 0.0), sub.family


def test_levy_density_stable_exponent():
    # m(t) ~ c t^(-1-alpha/2) at small t
    sub = Subordinator("stable_mixture", alpha=1.0)
    t = np.array([1e-5, 1e-4])
    ratio = sub.levy_density(t[0]) / sub.levy_density(t[1])
    assert abs(ratio / 10.0 ** 1.5 - 1.0) < 1e-3


def test_geometric_stable_density_integrates_to_log():
    # int (1 - e^{-t}) m(t) dt = phi(1) - 1 = log 2 for alpha = 1
    from scipy.integrate import quad
    sub = Subordinator("geometric_stable", alpha=1.0)
    val, _ = quad(lambda t: -np.expm1(-t) * sub.levy_density(t), 0.0, np.inf,
                  limit=400)
    assert abs(val - np.log(2.0)) < 2e-6


def test_check_condition_doubling_stable():
    # pure power law t^(-1-alpha/2): m(r)/m(2r) = 2^(1+alpha/2) exactly
    sub = Subordinator("stable_mixture", alpha=1.0)
    r = sub.check_condition(1.0)
    assert r["cm_violations"] == 0
    assert abs(r["doubling_constant"] - 2.0 ** 1.5) < 1e-9


def test_check_condition_all_jump_families():
    for sub in (Subordinator("mixed_stable", alpha=1.4, beta=0.6),
                Subordinator("relativistic", alpha=1.0, mass=1.0),
                Subordinator("geometric_stable", alpha=1.0)):
        r = sub.check_condition(1.0)
        assert r["cm_violations"] == 0, sub.family
        assert np.isfinite(r["doubling_constant"])


def test_check_condition_rejects_brownian():
    with pytest.raises(ValueError):
        Subordinator("brownian_only").check_condition(1.0)
