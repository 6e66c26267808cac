import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq

from tjstab.errors import ConstraintError, ShapeError
from tjstab.geometry import MAX_L_STAR, alpha_beta, build_config, build_dimensionless
from tjstab.spectral.determinants import d1_stable
from tjstab.spectral.systems import CaseSolution
from tjstab.variation import (
    VariationSample,
    constant_variation_screen,
    constraint_residuals,
    eval_J,
    leaf_lengths,
    screen_sample,
)

S3 = math.sqrt(3.0)
CFG = build_config(1.0, 0.4, 1.0)


def smooth_variation(cfg, n, c=(0.3, -0.7, 0.2, 0.5)):
    """An analytic variation satisfying compatibility at both junctions."""
    L = cfg.L
    f1 = lambda s: np.cos(s) + c[0] * s
    a0, aL = f1(0.0), f1(L)
    funcs = [
        f1,
        lambda s: np.sin(3 * s) + c[1] * np.cos(s),
        lambda s: -a0 - c[1] + s**2,
        lambda s: c[2] * np.cosh(s) + s,
        lambda s: -aL - c[2] + np.sin(2 * s) * c[3],
    ]
    return VariationSample.from_function(cfg, n, funcs)


def test_zero_variation():
    v = VariationSample.zeros(CFG, 20)
    assert eval_J(CFG, v) == 0.0
    assert constraint_residuals(CFG, v) == (0.0, 0.0, -1.0)


@given(st.floats(-100, 100))
def test_quadratic_scaling(c):
    v = smooth_variation(CFG, 40)
    assert eval_J(CFG, v.scaled(c)) == pytest.approx(c * c * eval_J(CFG, v), rel=1e-12, abs=1e-12)


@settings(max_examples=30)
@given(
    st.floats(0.02, MAX_L_STAR * 0.99),
    st.floats(0.05, 10.0),
    st.lists(st.floats(-2, 2), min_size=4, max_size=4),
)
def test_junction_swap_symmetry(ls, Ls, c):
    cfg = build_dimensionless(ls, Ls)
    v = smooth_variation(cfg, 32, c)
    f = v.f
    mirrored = VariationSample((f[0][::-1], f[3], f[4], f[1], f[2]), v.lengths)
    assert eval_J(cfg, mirrored) == pytest.approx(eval_J(cfg, v), rel=1e-12, abs=1e-12)


def test_second_order_convergence():
    vals = [eval_J(CFG, smooth_variation(CFG, n)) for n in (50, 100, 200, 400)]
    diffs = np.abs(np.diff(vals))
    ratios = diffs[:-1] / diffs[1:]
    assert np.all((ratios > 3.5) & (ratios < 4.5))


def test_hand_quadrature_single_leaf():
    n = 16
    v = VariationSample.zeros(CFG, n)
    f = [a.copy() for a in v.f]
    f[1][:] = 1.0
    f[0][0] = -1.0  # forced by compatibility at junction 1
    v = VariationSample(tuple(f), v.lengths)
    alpha, _ = alpha_beta(CFG, 1)
    h = CFG.L / n
    # leaf 1 gradient, leaf 2 potential, junction term with h1 = (0 - 1)/sqrt3
    expected = 1.0 / h - CFG.l + alpha * (1.0 - 1.0 / 3.0)
    assert eval_J(CFG, v) == pytest.approx(expected, rel=1e-14)


def test_constraints_example():
    n = 10
    L, l = CFG.L, CFG.l
    vals = (1.0, L / (2 * l), 0.0, L / (2 * l), 0.0)
    v = VariationSample(tuple(np.full(n + 1, c) for c in vals), leaf_lengths(CFG))
    res = constraint_residuals(CFG, v)
    assert res.vol3 == pytest.approx(0.0, abs=1e-15)
    assert res.vol2 == pytest.approx(-L, rel=1e-14)
    assert res.norm == pytest.approx(L + 2 * l * (L / (2 * l)) ** 2 - 1, rel=1e-14)


def test_shape_errors():
    with pytest.raises(ShapeError):
        VariationSample(tuple(np.zeros(5) for _ in range(4)), (1.0,) * 4)
    with pytest.raises(ShapeError):
        VariationSample((np.zeros(5),) * 4 + (np.zeros(6),), (1.0,) * 5)
    with pytest.raises(ShapeError):
        VariationSample((np.zeros(5),) * 5, (1.0, 1.0, -1.0, 1.0, 1.0))
    v = VariationSample.zeros(build_config(1.0, 0.3, 1.0), 8)
    with pytest.raises(ShapeError):
        eval_J(CFG, v)


def test_compatibility_error():
    v = VariationSample.zeros(CFG, 8)
    f = [a.copy() for a in v.f]
    f[2][0] = 1e-6
    with pytest.raises(ConstraintError):
        eval_J(CFG, VariationSample(tuple(f), v.lengths))


def test_eigenfunction_matches_mu():
    cfg = build_dimensionless(0.4, 10.0)
    x = brentq(lambda t: d1_stable(t, 0.4, 10.0), 0.7, 0.85, xtol=1e-15)
    sol = CaseSolution.at_root("I", x, cfg)
    sample = sol.sample(2000)
    assert abs(eval_J(cfg, sample) - sol.mu) <= 2e-3 * abs(sol.mu)


def test_screen_examples():
    cfg = build_dimensionless(0.4, 1.0)
    res = constant_variation_screen(cfg)
    assert not res.feasible and res.j_min > 0
    flipped = constant_variation_screen(cfg.flipped())
    assert flipped.j_min <= 0


@settings(max_examples=30, deadline=None)
@given(st.floats(0.02, MAX_L_STAR * 0.99), st.floats(0.05, 10.0), st.sampled_from([1, -1]))
def test_screen_sample_agrees_with_form(ls, Ls, orient):
    cfg = build_dimensionless(ls, Ls, orientation=orient)
    res = constant_variation_screen(cfg)
    v = screen_sample(cfg, res.params, 12)
    vol = constraint_residuals(cfg, v)
    assert abs(vol.vol2) < 1e-12 and abs(vol.vol3) < 1e-12
    assert vol.norm == pytest.approx(0.0, abs=1e-10)
    assert eval_J(cfg, v) == pytest.approx(res.j_min, rel=1e-10, abs=1e-10)
