"""Reduced determinants and scalar root conditions in dimensionless form.

All functions take ``x = k / kappa`` together with ``l_star = kappa*l`` and
``L_star = kappa*L`` and accept numpy arrays for ``x``.  Two families appear:

* junction-symmetric conditions (``det_D1``, ``det_D2``, case III and IV
  residuals), whose null vectors have equal multipliers and equal arc
  constants;
* junction-antisymmetric conditions (``sa_residual_*``), where the mode on
  leaf 1 is odd about its midpoint and the multipliers vanish.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.special import exprel

from ..errors import DomainError
from ..geometry import MAX_L_STAR

SQRT3 = math.sqrt(3.0)


def check_params(l_star: float, L_star: float) -> None:
    if not (math.isfinite(l_star) and 0.0 < l_star < MAX_L_STAR):
        raise DomainError(f"l_star must lie in (0, pi/6), got {l_star!r}")
    if not (math.isfinite(L_star) and L_star > 0.0):
        raise DomainError(f"L_star must be positive, got {L_star!r}")


def _check_params_closed(l_star: float, L_star: float) -> None:
    # L_star = 0 is allowed where the closed-form limit is requested
    if not (math.isfinite(l_star) and 0.0 < l_star < MAX_L_STAR):
        raise DomainError(f"l_star must lie in (0, pi/6), got {l_star!r}")
    if not (math.isfinite(L_star) and L_star >= 0.0):
        raise DomainError(f"L_star must be nonnegative, got {L_star!r}")


def _asarray(x):
    return np.asarray(x, dtype=float)


def _series_switch(u, small, series, direct):
    u = _asarray(u)
    out = np.empty_like(u)
    mask = np.abs(u) < small
    out[mask] = series(u[mask])
    with np.errstate(divide="ignore", invalid="ignore"):
        out[~mask] = direct(u[~mask])
    return out if out.ndim else float(out)


def xcot(x, l_star: float):
    """``x * cot(l_star * x)`` with its series near ``x = 0``."""
    x = _asarray(x)
    u = l_star * x

    def series(v):
        v2 = v * v
        return (1.0 - v2 / 3.0 - v2 * v2 / 45.0 - 2.0 * v2**3 / 945.0) / l_star

    return _series_switch(u, 1e-3, series, lambda v: (v / np.tan(v)) / l_star)


def _h_cot(u):
    """``(1 - u cot u) / u**2``; equals 1/3 at ``u = 0``."""

    def series(v):
        v2 = v * v
        return 1 / 3 + v2 / 45 + 2 * v2**2 / 945 + v2**3 / 4725 + 2 * v2**4 / 93555

    return _series_switch(u, 0.1, series, lambda v: (1.0 - v / np.tan(v)) / (v * v))


_G_COEF = [(2 - m) / math.factorial(m) for m in range(3, 20)]


def _g_exp(t):
    """``((e^t - 1)(2 - t) - 2t) / t^3``; equals -1/6 at ``t = 0``."""

    def series(v):
        return np.polynomial.polynomial.polyval(v, _G_COEF)

    return _series_switch(t, 0.25, series, lambda v: (np.expm1(v) * (2 - v) - 2 * v) / v**3)


def _w_coth(w):
    """``w / tanh(w)``; equals 1 at ``w = 0``."""

    def series(v):
        v2 = v * v
        return 1 + v2 / 3 - v2 * v2 / 45 + 2 * v2**3 / 945

    return _series_switch(w, 1e-2, series, lambda v: v / np.tanh(v))


# ---------------------------------------------------------------------------
# case I


def d1_stable(x, l_star: float, L_star: float):
    """``det_D1`` on the closed interval ``[0, 1]`` without removable
    singularities (no domain checks; used by the scanners)."""
    x = _asarray(x)
    l, L = l_star, L_star
    q = np.sqrt(np.clip(1.0 - x * x, 0.0, None))
    t = L * q
    em = np.expm1(t)
    E = L * exprel(t)
    x2 = x * x
    a11, a21, a31 = x2, np.ones_like(x), l * (1.0 - x2) - L * x2
    a12 = (2.0 / SQRT3) * E - 2.0 - em
    a32 = L**3 * _g_exp(t) + (2.0 + em) * (l + L)
    a13 = 2.0 / SQRT3 + 2.0 / l
    a23 = 2.0 * l * _h_cot(l * x)
    a33 = -2.0 * (1.0 + L / l)
    # expansion with the zero in position (2, 2)
    det = a11 * (-a23 * a32) - a12 * (a21 * a33 - a23 * a31) + a13 * (a21 * a32)
    return (1.0 + x) * det


def det_D1(x, l_star: float, L_star: float):
    """Case I reduced determinant in the normalization with prefactor
    ``1 / (x^2 (1 - x))``; roots in ``(0, 1)`` are eigenvalues
    ``mu = kappa^2 (x^2 - 1)``.
    """
    check_params(l_star, L_star)
    xa = _asarray(x)
    if np.any(~((xa > 0) & (xa < 1))):
        raise DomainError("det_D1 requires 0 < x < 1")
    return d1_stable(x, l_star, L_star)


def d1_small_L_limit(x, l_star: float):
    """Zeroth-order term of ``det_D1`` as ``L_star -> 0``."""
    x = _asarray(x)
    return 4.0 * (x + 1.0) / (x * x) * (l_star / SQRT3 * x * x + l_star * xcot(x, l_star) - 1.0)


def sa_residual_I(x, l_star: float, L_star: float):
    """Junction-antisymmetric case I condition
    ``x tan(l x) + sqrt3 - 2 q coth(L q / 2)``, ``q = sqrt(1 - x^2)``."""
    x = _asarray(x)
    q = np.sqrt(np.clip(1.0 - x * x, 0.0, None))
    return x * np.tan(l_star * x) + SQRT3 - (4.0 / L_star) * _w_coth(0.5 * L_star * q)


# ---------------------------------------------------------------------------
# case II


def _d2_matrix_scaled(x, l_star, L_star):
    """Columns 2 and 3 of the case II matrix divided by ``z`` and ``E``."""
    x = _asarray(x)
    p = np.sqrt(1.0 + x * x)
    a = (2.0 / SQRT3) * p
    zm = -np.expm1(-L_star * p)  # 1 - 1/z
    zp = 2.0 - zm  # 1 + 1/z
    Em = -np.expm1(-2.0 * l_star * x)
    Ep = 2.0 - Em
    col1 = (x * x, np.ones_like(x), L_star * x * x + l_star * (x * x + 1.0))
    col2 = (a * zm - zp, zp, -2.0 * zm / p)
    col3 = (-(2.0 / SQRT3) * x * Em, 2.0 * Ep, 2.0 * Em / x)
    return col1, col2, col3


def _det3(c1, c2, c3):
    return (
        c1[0] * (c2[1] * c3[2] - c2[2] * c3[1])
        - c2[0] * (c1[1] * c3[2] - c1[2] * c3[1])
        + c3[0] * (c1[1] * c2[2] - c1[2] * c2[1])
    )


def _d2_scaled_mp(x, l_star, L_star, dps=40):
    import mpmath as mp

    with mp.workdps(dps):
        x, l, L = mp.mpf(x), mp.mpf(l_star), mp.mpf(L_star)
        p = mp.sqrt(1 + x * x)
        a = 2 / mp.sqrt(3) * p
        zm, Em = -mp.expm1(-L * p), -mp.expm1(-2 * l * x)
        zp, Ep = 2 - zm, 2 - Em
        m = mp.matrix(
            [
                [x * x, a * zm - zp, -2 / mp.sqrt(3) * x * Em],
                [1, zp, 2 * Ep],
                [L * x * x + l * (x * x + 1), -2 * zm / p, 2 * Em / x],
            ]
        )
        return float(mp.det(m) / (x * x))


MP_SWITCH_X = 1e-2


def d2_scaled(x, l_star: float, L_star: float):
    """``det_D2 / (z E)`` with ``E = exp(2 x l_star)``: finite for all
    ``x > 0`` and tending to ``2 sqrt3 (L_star + l_star) x`` for large ``x``.

    Small ``x`` suffers cancellation in double precision and is evaluated
    in extended precision instead.
    """
    x = _asarray(x)
    scalar = x.ndim == 0
    xv = np.atleast_1d(x)
    out = np.empty_like(xv)
    small = xv < MP_SWITCH_X
    out[small] = [_d2_scaled_mp(v, l_star, L_star) for v in xv[small]]
    big = ~small
    if np.any(big):
        out[big] = _det3(*_d2_matrix_scaled(xv[big], l_star, L_star)) / (xv[big] ** 2)
    return float(out[0]) if scalar else out


def det_D2(x, l_star: float, L_star: float):
    """Case II reduced determinant (prefactor ``1 / x^2``); roots for
    ``x > 0`` are eigenvalues ``mu = -kappa^2 (x^2 + 1)``.

    Overflows to ``inf`` magnitude for large ``x * (L_star + l_star)``;
    use :func:`d2_scaled` there.
    """
    check_params(l_star, L_star)
    xa = _asarray(x)
    if np.any(~(xa > 0)):
        raise DomainError("det_D2 requires x > 0")
    scale = np.exp(L_star * np.sqrt(1.0 + xa * xa) + 2.0 * xa * l_star)
    return d2_scaled(x, l_star, L_star) * scale


def d2_asymptote(l_star: float, L_star: float) -> float:
    """Limit of ``det_D2 / (z E x)`` as ``x -> inf``."""
    return 2.0 * SQRT3 * (L_star + l_star)


def d2_small_L_limit(x, l_star: float):
    x = _asarray(x)
    l = l_star
    x2 = x * x
    e = np.exp(2 * l * x)
    return 4 * (x2 + 1) / x**3 * ((l / SQRT3 * x2 - l * x + 1) * e - l / SQRT3 * x2 - l * x - 1)


def sa_residual_II(x, l_star: float, L_star: float):
    """Junction-antisymmetric case II condition; negative for all inputs."""
    x = _asarray(x)
    p = np.sqrt(1.0 + x * x)
    return SQRT3 - (4.0 / L_star) * _w_coth(0.5 * L_star * p) - x * np.tanh(l_star * x)


def choose_x0(l_star: float, L_star: float, x_min: float = 1.0, x_max: float | None = None, n: int = 256):
    """Scan cutoff for case II.

    Returns ``(x0, converged)`` where ``x0`` is the smallest point of a
    log grid on ``[x_min, x_max]`` past which ``d2_scaled / x`` stays within
    10 % of its asymptote.  ``converged`` is False when ``x_max`` is hit.
    The exponentials ``exp(-L_star x)`` only die out once ``x >> 1/L_star``,
    so the default cap is ``max(100, 100 / L_star)``.
    """
    if x_max is None:
        x_max = max(100.0, 100.0 / L_star)
    xs = np.geomspace(x_min, x_max, n)
    A = d2_asymptote(l_star, L_star)
    ok = np.abs(d2_scaled(xs, l_star, L_star) / xs - A) < 0.1 * A
    if not ok[-1]:
        return x_max, False
    bad = np.nonzero(~ok)[0]
    idx = 0 if bad.size == 0 else bad[-1] + 1
    return float(xs[idx]), True


# ---------------------------------------------------------------------------
# cases III and IV (single values of mu)


def case_III_residual(l_star: float, L_star: float) -> float:
    """Case III condition (``mu = -kappa^2``), ``z = exp(L_star)``."""
    check_params(l_star, L_star)
    l, L = l_star, L_star
    zm = math.expm1(L)
    return (SQRT3 + 2 * l + l**3 / 3 + L) * zm + 0.5 * (l * l - l**3 / SQRT3 - SQRT3 * L) * (zm + 2.0)


def case_III_scaled(l_star: float, L_star: float) -> float:
    """Case III residual divided by ``1 + z``, bounded for large ``L_star``."""
    return case_III_residual(l_star, L_star) / (2.0 + math.expm1(L_star))


def case_III_limit(l_star: float) -> float:
    """``L_star -> 0`` limit of the case III residual.

    Defined for every ``l_star`` so the root ``sqrt(3)`` can be located.
    """
    return l_star * l_star - l_star**3 / SQRT3


def case_IV_residual(l_star: float, L_star: float) -> float:
    """Junction-symmetric condition for ``mu = 0``.

    ``-4 cot(l) [ (l phi - sqrt3) + 2 L + cot(l) L^2 - phi L^3 / 12 ]`` with
    ``phi = sqrt3 cot(l) + 1``; ``L_star = 0`` is accepted.
    """
    _check_params_closed(l_star, L_star)
    c = 1.0 / math.tan(l_star)
    phi = SQRT3 * c + 1.0
    L = L_star
    return -4.0 * c * ((l_star * phi - SQRT3) + 2.0 * L + c * L * L - phi * L**3 / 12.0)


def case_IV_limit(l_star: float) -> float:
    c = 1.0 / math.tan(l_star)
    return -4.0 * c * (l_star * (SQRT3 * c + 1.0) - SQRT3)


def sa_residual_IV(l_star: float, L_star: float) -> float:
    """Junction-antisymmetric condition for ``mu = 0``."""
    _check_params_closed(l_star, L_star)
    return L_star * math.sin(l_star + math.pi / 3.0) - 2.0 * math.cos(l_star)


def lemma_hypothesis(l_star: float, L_star: float) -> bool:
    """``(tan l + sqrt3) L < 4``: the antisymmetric case I branch is then
    root free and only ``det_D1`` can vanish."""
    return (math.tan(l_star) + SQRT3) * L_star < 4.0
