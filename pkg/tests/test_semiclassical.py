import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from jcdimer import semiclassical as sc
from jcdimer.core import BranchLabel, ModelParams, SemiclassicalState
from jcdimer.errors import ConvergenceError, DegenerateInputError, DomainError

FP_PI = BranchLabel.from_name("FP-pi")
FP_AF = BranchLabel.from_name("FP-AF")
GS = BranchLabel.from_name("Gs")

STABLE_POINTS = [("FP-pi", 1.0, 1.5), ("ST1", 1.0, 5.0), ("PST", 5.0, 2.0),
                 ("FP-AF", 0.5, 0.5), ("ST2", 1.0, 2.0), ("FP-F", 0.5, 0.5)]


def _random_state(rng):
    n = rng.uniform(0.05, 0.9, 2)
    return (n, rng.uniform(-math.pi, math.pi, 2), rng.uniform(-0.95, 0.95, 2),
            rng.uniform(-math.pi, math.pi, 2))


def test_chain_rule_matches_polar_equations():
    rng = np.random.default_rng(1234)
    worst = 0.0
    for _ in range(100):
        p = ModelParams(omega=rng.uniform(1, 3), omega0=rng.uniform(1, 3),
                        g_scaled=rng.uniform(0.3, 6), u_scaled=rng.uniform(0, 8),
                        mu=rng.uniform(-1, 1))
        n, psi, z, phi = _random_state(rng)
        state = SemiclassicalState.from_polar(n, psi, z, phi)
        d = sc.eom_rhs(state, p)
        expected = oracles.polar_rhs(n, psi, z, phi, p)
        for k, (x, pp) in enumerate(((state.x_L, state.p_L), (state.x_R, state.p_R))):
            dx, dp, dz, dphi = d[4 * k:4 * k + 4]
            dn = x * dx + pp * dp
            dpsi = (x * dp - pp * dx) / (x * x + pp * pp)
            got = np.array([dn, dpsi, dz, dphi])
            worst = max(worst, np.max(np.abs(got - np.array(expected[k]))
                                      / np.maximum(1.0, np.abs(expected[k]))))
    assert worst < 1e-10


@given(st.floats(0.05, 0.9), st.floats(0.05, 0.9), st.floats(-3, 3), st.floats(-3, 3),
       st.floats(-0.9, 0.9), st.floats(-0.9, 0.9), st.floats(-3, 3), st.floats(-3, 3))
@settings(max_examples=80, deadline=None)
def test_swap_equivariance(nl, nr, psil, psir, zl, zr, phil, phir):
    p = ModelParams(g_scaled=1.7, u_scaled=3.0)
    s = SemiclassicalState.from_polar((nl, nr), (psil, psir), (zl, zr), (phil, phir))
    d = sc.eom_rhs(s, p)
    ds = sc.eom_rhs(s.swapped(), p)
    assert np.array_equal(ds, np.concatenate([d[4:], d[:4]]))


def test_cartesian_jacobian_matches_finite_differences():
    rng = np.random.default_rng(7)
    p = ModelParams(g_scaled=1.2, u_scaled=2.5, mu=0.4)
    y = SemiclassicalState.from_polar(*_random_state(rng)).to_cartesian()
    jac = sc.cartesian_jacobian(y, p)
    h = 1e-6
    fd = np.column_stack([(sc.cartesian_rhs(y + h * e, p) - sc.cartesian_rhs(y - h * e, p)) / (2 * h)
                          for e in np.eye(y.size)])
    assert np.max(np.abs(jac - fd)) < 1e-7


@pytest.mark.parametrize("name,g,u", STABLE_POINTS)
def test_fixed_points_are_stationary(name, g, u):
    p = ModelParams(g_scaled=g, u_scaled=u)
    fp = sc.find_fixed_point(p, name)
    assert fp.branch.name == name
    assert fp.residual < 1e-12
    assert np.max(np.abs(sc.eom_rhs(fp.state, p.with_(mu=fp.mu_star)))) < 1e-12
    assert abs(fp.n_star[0] + fp.n_star[1] + 0.5 * p.eta * (sum(fp.z_star) + 2) - 1) < 1e-12


@pytest.mark.parametrize("name,g,u", STABLE_POINTS)
def test_stability_spectrum_quadruples(name, g, u):
    p = ModelParams(g_scaled=g, u_scaled=u)
    fp = sc.find_fixed_point(p, name)
    assert fp.stable
    lam = 1j * np.asarray(fp.eigenfrequencies)
    for image in (-lam, lam.conj(), -lam.conj()):
        dist = np.abs(lam[:, None] - image[None, :]).min(axis=1)
        assert dist.max() < 1e-8
    assert fp.omega0_min > 0


def test_fixed_point_unchanged_by_gauge():
    p = ModelParams(g_scaled=1.0, u_scaled=5.0)
    a = sc.find_fixed_point(p, "ST1")
    b = sc.find_fixed_point(p.with_(mu=0.9), "ST1")
    assert a.f == pytest.approx(b.f, abs=1e-10)
    assert a.mu_star == pytest.approx(b.mu_star, abs=1e-10)
    assert a.omega0_min == pytest.approx(b.omega0_min, abs=1e-8)


def test_trajectory_observables_gauge_invariant():
    p = ModelParams(g_scaled=1.0, u_scaled=2.0)
    s = SemiclassicalState.from_polar((0.6, 0.35), (0.2, -0.4), (-0.3, 0.1), (0.5, 1.0))
    a = sc.integrate(s, p, 20.0, 0.1)
    b = sc.integrate(s, p.with_(mu=0.8), 20.0, 0.1)
    for key in ("n_L", "n_R", "z_L", "Z_p", "psi_r", "residual"):
        assert np.max(np.abs(a[key] - b[key])) < 1e-7


def test_conservation_over_long_run():
    p = ModelParams(g_scaled=1.0, u_scaled=2.0)
    s = SemiclassicalState.from_polar((0.6, 0.3667), (0.2, -0.4), (-0.3, 0.1), (0.5, 1.0))
    ts = sc.integrate(s, p, 100.0, 0.5)
    assert np.max(np.abs(ts["residual"] - ts["residual"][0])) < 1e-8
    e = ts["energy"]
    assert np.max(np.abs(e - e[0])) / abs(e[0]) < 1e-8


def test_fixed_point_start_is_stationary():
    p = ModelParams(g_scaled=1.0, u_scaled=1.5)
    fp = sc.find_fixed_point(p, "FP-pi")
    ts = sc.integrate(fp.state, p.with_(mu=fp.mu_star), 20.0, 0.5)
    for key in ("n_L", "n_R", "z_L", "z_R", "psi_L", "phi_L", "energy"):
        assert np.ptp(ts[key]) < 1e-8


def test_integrate_domain():
    s = SemiclassicalState.from_polar((0.5, 0.5), (0, 0), (0, 0), (0, 0))
    with pytest.raises(DomainError):
        sc.integrate(s, ModelParams(), -1.0, 0.1)


# ---------------------------------------------------------------------------
# small-eta root function
# ---------------------------------------------------------------------------

def test_mu_small_eta_examples():
    p = ModelParams(omega=2.0, u_scaled=0.0, g_scaled=1.0)
    assert sc.mu_small_eta(1.0, p, GS) == pytest.approx(2 - 1 - 1 / math.sqrt(2), abs=1e-12)
    assert sc.mu_small_eta(1.0, p, GS) == pytest.approx(0.29289, abs=1e-5)
    p = ModelParams(omega=2.0, u_scaled=2.0, g_scaled=0.5)
    assert sc.mu_small_eta(1.0, p, FP_PI) == pytest.approx(4.35355, abs=1e-5)


@given(st.floats(1e-3, 1.0), st.sampled_from([GS, FP_PI, FP_AF]))
@settings(max_examples=50, deadline=None)
def test_mu_small_eta_mirror(f, branch):
    p = ModelParams(g_scaled=1.4, u_scaled=3.0)
    assert sc.mu_small_eta(f, p, branch) == pytest.approx(sc.mu_small_eta(1 / f, p, branch),
                                                          rel=1e-12)


def test_y_symmetric_root_exact():
    rng = np.random.default_rng(0)
    for _ in range(200):
        p = ModelParams(omega=rng.uniform(1, 3), omega0=rng.uniform(1, 3),
                        g_scaled=rng.uniform(0.3, 6), u_scaled=rng.uniform(0, 8))
        for branch in (GS, FP_PI, FP_AF):
            assert sc.y_function(1.0, p, branch) == 0.0
            assert sc.y_exact(1.0, p, branch) == 0.0


def test_y_rejects_nonpositive_f():
    with pytest.raises(DomainError):
        sc.y_function(0.0, ModelParams(), GS)


def test_roots_match_brute_force():
    p = ModelParams(g_scaled=1.0, u_scaled=5.0)
    roots = sc.find_roots_y(p, FP_PI)
    ref = oracles.brute_force_roots(lambda f: sc.y_function(f, p, FP_PI))
    assert roots[-1] == 1.0
    assert len(roots) - 1 == len(ref) >= 1
    assert np.max(np.abs(np.array(roots[:-1]) - np.array(ref))) < 1e-10


def test_roots_grid_refinement_stable():
    p = ModelParams(g_scaled=3.0, u_scaled=3.0)
    label = BranchLabel.symmetric(1, 1)
    coarse = sc.find_roots_y(p, label)
    fine = sc.find_roots_y(p, label, sc.RootScanConfig(grid_points=8000))
    assert len(coarse) == len(fine) == 3
    assert np.max(np.abs(np.array(coarse) - np.array(fine))) < 1e-11


def test_root_counts_for_reference_cases():
    # two self-trapped states plus the symmetric one
    assert len(sc.find_roots_exact(ModelParams(g_scaled=3.0, u_scaled=3.0),
                                   BranchLabel.symmetric(1, 1))) == 3
    # below the pitchfork only the symmetric state
    assert sc.find_roots_exact(ModelParams(g_scaled=1.0, u_scaled=1.5), FP_PI) == [1.0]


def test_exact_roots_differ_at_second_order_in_eta():
    diffs = []
    for m in (30, 60, 120):
        p = ModelParams(g_scaled=1.0, u_scaled=5.0, excitations=m)
        f_small = sc.find_roots_y(p, FP_PI)[0]
        f_exact = sc.find_fixed_point(p, "ST1").f
        diffs.append(abs(f_small - f_exact))
        assert diffs[-1] < 2.0 * p.eta ** 2
    assert diffs[0] / diffs[1] == pytest.approx(4.0, rel=0.2)
    assert diffs[1] / diffs[2] == pytest.approx(4.0, rel=0.2)


def test_root_config_domain():
    with pytest.raises(DomainError):
        sc.RootScanConfig(f_min=0.0)
    with pytest.raises(DomainError):
        sc.RootScanConfig(grid_points=10)


# ---------------------------------------------------------------------------
# spin inversion and critical lines
# ---------------------------------------------------------------------------

def test_atomic_inversion_examples():
    p = ModelParams(g_scaled=1.0)
    assert sc.atomic_inversion_star(0.4, p.omega0, p, 1) == 0.0
    assert sc.atomic_inversion_star(0.0, 1.0, p, 1) == 1.0
    assert sc.atomic_inversion_star(0.0, 3.0, p, 1) == -1.0
    assert sc.atomic_inversion_star(0.0, 3.0, p, -1) == 1.0
    with pytest.raises(DegenerateInputError):
        sc.atomic_inversion_star(0.0, p.omega0, p, 1)
    with pytest.raises(DomainError):
        sc.atomic_inversion_star(-0.1, 1.0, p, 1)


def test_atomic_inversion_large_coupling():
    n, mu = 0.3, 1.2
    for g in (50.0, 500.0):
        p = ModelParams(g_scaled=g)
        asym = p.eta * abs(p.omega0 - mu) / (2 * g * math.sqrt(n))
        assert abs(sc.atomic_inversion_star(n, mu, p, 1)) == pytest.approx(asym, rel=1e-3)


def test_critical_line_examples():
    assert sc.critical_lines(ModelParams(u_scaled=0.0), eta=0.0)[1] == pytest.approx(
        2 * math.sqrt(2), abs=1e-12)
    assert sc.critical_lines(ModelParams(g_scaled=1.0), eta=0.0)[2] == pytest.approx(
        2 + 1 / math.sqrt(2), abs=1e-12)
    g_c1 = sc.critical_lines(ModelParams(u_scaled=3.0, excitations=30))[0]
    assert g_c1 == pytest.approx(2 + 3 * 2 ** (4 / 3) * 30 ** (-2 / 3) - 1 / 60, abs=1e-12)
    assert g_c1 == pytest.approx(2.766, abs=1e-3)


def test_mode_softening_towards_pitchfork():
    p = ModelParams(g_scaled=1.0)
    u_c1 = sc.critical_lines(p)[2]
    below = [sc.find_fixed_point(p.with_(u_scaled=u_c1 - d), "FP-pi").omega0_min
             for d in (0.8, 0.4, 0.2, 0.1)]
    assert all(a > b for a, b in zip(below, below[1:]))
    above = [sc.find_fixed_point(p.with_(u_scaled=u_c1 + d), "ST1").omega0_min
             for d in (0.8, 0.4, 0.2, 0.1)]
    assert all(a > b for a, b in zip(above, above[1:]))


def test_symmetric_guess_stays_symmetric():
    p = ModelParams(g_scaled=1.0, u_scaled=5.0)
    guess = sc.fixed_point_guess(1.0, p, FP_PI)
    fp = sc.solve_steady_state_exact(guess, p)
    assert fp.n_star[0] == pytest.approx(fp.n_star[1], abs=1e-12)
    assert fp.z_star[0] == pytest.approx(fp.z_star[1], abs=1e-12)
    assert not fp.stable  # beyond the pitchfork


def test_missing_branch_raises():
    with pytest.raises(ConvergenceError):
        sc.find_fixed_point(ModelParams(g_scaled=1.0, u_scaled=1.0), "ST1")


def test_steady_states_sorted_and_seedings_agree():
    p = ModelParams(g_scaled=1.0, u_scaled=5.0)
    exact = sc.steady_states(p, -1, 1)
    small = sc.steady_states(p, -1, 1, seeding="small_eta")
    assert [fp.f for fp in exact] == sorted([fp.f for fp in exact], reverse=True)
    assert [fp.branch.name for fp in exact] == ["FP-pi", "ST1"]
    assert np.allclose([fp.f for fp in exact], [fp.f for fp in small], atol=1e-10)
    with pytest.raises(DomainError):
        sc.steady_states(p, -1, 1, seeding="other")
