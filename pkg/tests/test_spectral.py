import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq

from tjstab.errors import DomainError
from tjstab.geometry import MAX_L_STAR, alpha_beta, build_dimensionless
from tjstab.spectral import determinants as dt
from tjstab.spectral.systems import CaseSolution, assemble_full_system, full_det_batch, singular_ratio
from tjstab.spectral.verdict import (
    INCONCLUSIVE,
    STABLE,
    UNSTABLE,
    StabilityReport,
    find_sign_changes,
    scan_and_verdict,
)

S3 = math.sqrt(3.0)
l_stars = st.floats(0.02, MAX_L_STAR * 0.99)


# ---------------------------------------------------------------------------
# case I determinant


@settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(st.floats(0.01, 0.99), l_stars, st.floats(0.01, 20.0))
def test_D1_matches_reference(mpD1, x, ls, Ls):
    ref = float(mpD1(x, ls, Ls))
    assert dt.det_D1(x, ls, Ls) == pytest.approx(ref, rel=1e-9, abs=1e-12 * max(1.0, math.exp(Ls)))


def test_D1_small_L_example():
    x, ls = 0.5, 0.4
    assert dt.det_D1(x, ls, 1e-8) == pytest.approx(dt.d1_small_L_limit(x, ls), rel=1e-5)


def test_D1_positive_small_L():
    xs = np.linspace(1e-4, 1 - 1e-4, 2001)
    assert np.all(dt.det_D1(xs, 0.4, 0.1) > 0)


def test_D1_finite_at_one(mpD1):
    ls, Ls = 0.3, 2.0
    near = dt.det_D1(1 - 1e-6, ls, Ls)
    assert math.isfinite(near)
    assert near == pytest.approx(float(mpD1(1 - 1e-6, ls, Ls, dps=80)), rel=1e-6)
    # the approach to x = 1 goes like sqrt(1 - x), so compare against the limit itself
    limit = float(mpD1("0." + "9" * 30, ls, Ls, dps=120))
    assert dt.d1_stable(1.0, ls, Ls) == pytest.approx(limit, rel=1e-12)


def test_xcot_series():
    for ls in (0.1, 0.3, 0.5):
        for x in np.geomspace(1e-12, 1e-4, 30):
            ref = float(mp.mpf(x) / mp.tan(mp.mpf(ls) * mp.mpf(x)))
            assert abs(dt.xcot(x, ls) - ref) <= 1e-12 / ls
            if x <= 1e-6:
                assert abs(dt.xcot(x, ls) - 1 / ls) <= 1e-12


def test_D1_domain():
    with pytest.raises(DomainError):
        dt.det_D1(0.5, MAX_L_STAR, 1.0)
    with pytest.raises(DomainError):
        dt.det_D1(0.5, 0.3, -1.0)


@settings(max_examples=40, deadline=None)
@given(l_stars, st.floats(0.01, 0.5))
def test_lemma_region_has_no_antisymmetric_root(ls, Ls):
    assert dt.lemma_hypothesis(ls, Ls)
    xs = np.linspace(1e-4, 1 - 1e-4, 512)
    vals = dt.sa_residual_I(xs, ls, Ls)
    assert np.all(vals > 0) or np.all(vals < 0)


# ---------------------------------------------------------------------------
# case II determinant


@settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(st.floats(0.01, 30.0), l_stars, st.floats(0.01, 10.0))
def test_D2_matches_reference(mpD2, x, ls, Ls):
    # entries reach exp(L* p + 2 l* x), so the reference needs extra digits
    ref = float(mpD2(x, ls, Ls, dps=150))
    assert dt.det_D2(x, ls, Ls) == pytest.approx(ref, rel=1e-8)


def test_D2_small_L_limit():
    x, ls = 0.3, 0.4
    assert dt.det_D2(x, ls, 1e-9) == pytest.approx(dt.d2_small_L_limit(x, ls), rel=1e-5)


@pytest.mark.parametrize("x", [0.5, 1.0, 2.0, 5.0])
def test_D2_positive(x):
    assert dt.det_D2(x, 0.4, 0.1) > 0


def test_D2_asymptote():
    x, ls, Ls = 50.0, 0.4, 0.1
    scaled = dt.det_D2(x, ls, Ls) / (math.exp(Ls * math.sqrt(1 + x * x)) * math.exp(2 * x * ls) * x)
    assert scaled == pytest.approx(dt.d2_asymptote(ls, Ls), rel=0.05)


def test_sa_II_negative():
    xs = np.geomspace(1e-4, 1e3, 500)
    for ls, Ls in ((0.1, 0.05), (0.5, 20.0), (0.3, 2.0)):
        assert np.all(dt.sa_residual_II(xs, ls, Ls) < 0)


def test_choose_x0():
    x0, ok = dt.choose_x0(0.4, 1.0)
    assert ok and 1.0 <= x0 <= 100.0
    x0, ok = dt.choose_x0(0.4, 0.01)
    assert ok and x0 <= 1e4
    _, ok = dt.choose_x0(0.4, 0.01, x_max=2.0)
    assert not ok


# ---------------------------------------------------------------------------
# cases III and IV


def test_case_III_limit_root():
    assert brentq(dt.case_III_limit, 1.0, 2.5, xtol=1e-15) == pytest.approx(S3, abs=1e-12)


def test_case_III_small_L():
    ls = 0.3
    r0 = dt.case_III_limit(ls)
    r1 = 2 * ls + ls**3 / 3 + 0.5 * (ls**2 - ls**3 / S3)
    eps = 1e-6
    assert dt.case_III_residual(ls, eps) == pytest.approx(r0 + eps * r1, abs=1e-10)
    assert dt.case_III_residual(0.4, 0.1) > 0


@settings(max_examples=60)
@given(l_stars, st.floats(1e-6, 50.0))
def test_case_III_positive(ls, Ls):
    assert dt.case_III_scaled(ls, Ls) > 0


def test_case_IV_examples():
    for ls in (0.1, 0.25, 0.4, 0.5):
        assert dt.case_IV_residual(ls, 0.0) == dt.case_IV_limit(ls)
    assert dt.case_IV_residual(0.4, 0.1) != 0.0
    root = brentq(lambda L: dt.case_IV_residual(0.4, L), 5.0, 8.0)
    assert root == pytest.approx(6.33, abs=0.01)
    sa = brentq(lambda L: dt.sa_residual_IV(0.4, L), 0.5, 4.0)
    assert sa == pytest.approx(2 * math.cos(0.4) / math.sin(0.4 + math.pi / 3), rel=1e-12)


# ---------------------------------------------------------------------------
# full systems


def test_full_system_rank():
    cfg = build_dimensionless(0.4, 10.0)
    ratio, _ = singular_ratio(assemble_full_system("I", 0.5, cfg))
    assert ratio > 1e-6
    x = brentq(lambda t: dt.d1_stable(t, 0.4, 10.0), 0.7, 0.85, xtol=1e-15)
    ratio, _ = singular_ratio(assemble_full_system("I", x, cfg))
    assert ratio < 1e-10
    sol = CaseSolution.at_root("I", x, cfg)
    u = sol.standard_unknowns()
    scale = max(abs(v) for v in u.values())
    assert abs(u["lambda2"] - u["lambda3"]) < 1e-8 * scale
    q = sol.q_star
    z = math.exp(q * cfg.L_star)
    assert abs(u["D1"] - z * u["C1"]) < 1e-8 * max(abs(u["D1"]), 1.0)
    cs = [u[f"C{p}"] for p in (2, 3, 4, 5)]
    assert max(cs) - min(cs) < 1e-8 * scale


def test_full_determinant_tracks_reductions():
    ls, Ls = 0.3, 7.0
    xs = np.linspace(0.01, 0.99, 400)
    full, _ = find_sign_changes(lambda x: full_det_batch("I", x, ls, Ls), xs, 1e-14)
    red = sorted(
        [r for r, _ in find_sign_changes(lambda x: dt.d1_stable(x, ls, Ls), xs, 1e-14)[0]]
        + [r for r, _ in find_sign_changes(lambda x: dt.sa_residual_I(x, ls, Ls), xs, 1e-14)[0]]
    )
    assert [r for r, _ in full] == pytest.approx(red, abs=1e-10)


def test_case_IV_full_system_drops_rank():
    root = brentq(lambda L: dt.case_IV_residual(0.4, L), 5.0, 8.0, xtol=1e-15)
    ratio, _ = singular_ratio(assemble_full_system("IV", None, build_dimensionless(0.4, root)))
    assert ratio < 1e-10
    ratio, _ = singular_ratio(assemble_full_system("IV", None, build_dimensionless(0.4, 3.0)))
    assert ratio > 1e-6


@pytest.mark.parametrize("Ls", [0.5, 2.0, 10.0])
def test_case_III_full_system_regular(Ls):
    ratio, _ = singular_ratio(assemble_full_system("III", None, build_dimensionless(0.4, Ls)))
    assert ratio > 1e-8


def _roots_for(ls, Ls):
    rep = scan_and_verdict(build_dimensionless(ls, Ls))
    return build_dimensionless(ls, Ls), rep.all_roots()


@pytest.mark.parametrize("ls,Ls", [(0.4, 2.0), (0.4, 10.0), (0.2, 15.0)])
def test_solution_residuals(ls, Ls):
    cfg, roots = _roots_for(ls, Ls)
    assert roots
    alpha, _ = alpha_beta(cfg, 1)
    for root in roots:
        sol = CaseSolution.at_root(root.case, root.x, cfg)
        assert sol.norm_squared() == pytest.approx(1.0, rel=1e-10)
        for leaf in range(1, 6):
            s = np.linspace(0, sol.leaf_length(leaf), 17)
            assert np.max(np.abs(sol.ode_residual(leaf, s))) < 1e-8
            if leaf > 1:
                assert abs(sol.f(leaf, sol.l, 1)) < 1e-8
        assert np.max(np.abs(sol.boundary_residuals(alpha))) < 1e-8


def test_case_IV_solution_residuals():
    root = brentq(lambda L: dt.case_IV_residual(0.4, L), 5.0, 8.0, xtol=1e-15)
    cfg = build_dimensionless(0.4, root)
    sol = CaseSolution.at_root("IV", None, cfg)
    assert sol.mu == 0.0
    alpha, _ = alpha_beta(cfg, 1)
    assert np.max(np.abs(sol.boundary_residuals(alpha))) < 1e-8


# ---------------------------------------------------------------------------
# verdicts


def test_verdict_stable_small_L():
    rep = scan_and_verdict(build_dimensionless(0.4, 0.05))
    assert rep.verdict == STABLE and rep.mu is None and rep.lemma_hypothesis
    assert not rep.all_roots()


def test_verdict_coarse_grid():
    rep = scan_and_verdict(build_dimensionless(0.4, 0.05), grid_n=64, tol=1e-3)
    assert rep.verdict == STABLE


def test_verdict_unstable():
    rep = scan_and_verdict(build_dimensionless(0.4, 10.0))
    assert rep.verdict == UNSTABLE and rep.mu < 0
    assert rep.verdict_bracket[0] <= rep.verdict_x <= rep.verdict_bracket[1]
    assert rep.mu == min(r.mu for r in rep.all_roots())


def test_verdict_physical_scaling():
    a = scan_and_verdict(build_dimensionless(0.4, 10.0))
    b = scan_and_verdict(build_dimensionless(0.4, 10.0, kappa=2.0))
    assert b.mu_star == pytest.approx(a.mu_star, rel=1e-12)
    assert b.mu == pytest.approx(4 * a.mu, rel=1e-12)


@pytest.mark.parametrize("kwargs", [{"grid_n": 63}, {"tol": 0.0}, {"tol": -1.0}])
def test_verdict_domain(kwargs):
    with pytest.raises(DomainError):
        scan_and_verdict(build_dimensionless(0.4, 1.0), **kwargs)


def test_verdict_rejects_flipped():
    with pytest.raises(DomainError):
        scan_and_verdict(build_dimensionless(0.4, 1.0, orientation=-1))


@pytest.mark.parametrize("ls", [0.1, 0.2, 0.3, 0.4, 0.5])
def test_frontier_monotone(ls):
    verdicts = [scan_and_verdict(build_dimensionless(ls, Ls), grid_n=512).verdict for Ls in (0.01, 0.5, 1.0, 1.5, 2.5, 4.0, 8.0)]
    assert verdicts[0] == STABLE
    assert INCONCLUSIVE not in verdicts
    first_bad = verdicts.index(UNSTABLE) if UNSTABLE in verdicts else len(verdicts)
    assert all(v == UNSTABLE for v in verdicts[first_bad:])


def test_report_round_trip():
    rep = scan_and_verdict(build_dimensionless(0.4, 10.0))
    again = StabilityReport.from_dict(rep.to_dict())
    assert again == rep


def test_touch_detection():
    xs = np.linspace(0, 1, 101)
    roots, touches = find_sign_changes(lambda x: (x - 0.3037) ** 2, xs, 1e-12)
    assert not roots and touches and touches[0] == pytest.approx(0.3037, abs=1e-5)
    roots, touches = find_sign_changes(lambda x: (x - 0.3037) ** 2 - 1e-6, xs, 1e-12)
    assert [r for r, _ in roots] == pytest.approx([0.3027, 0.3047], abs=1e-10)
