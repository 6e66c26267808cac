"""Closed-form eigenfunction families and the full 8x8 boundary systems.

Everything here is dimensionless (``kappa = 1``); :class:`CaseSolution`
converts back to physical units.

Unknowns of the full system, in column order::

    S, Dd, E1, O1, C2, C3, C4, C5

``S`` and ``Dd`` are rescaled sum and difference of the two Lagrange
multipliers, ``E1``/``O1`` the even/odd parts (about ``s = L/2``) of the
homogeneous solution on leaf 1, and ``C2..C5`` the arc constants.  This is
an invertible, well-scaled reparametrization of the textbook unknowns
``(lambda2, lambda3, C1, D1, C2, ..., C5)``: it changes the determinant by a
factor of fixed sign on each case's range, so roots and ranks coincide.
In these coordinates ``lambda2 = lambda3`` reads ``Dd = 0`` and
``D1 = z C1`` reads ``O1 = 0``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from ..errors import DomainError
from ..geometry import SQRT3, PartitionConfig, alpha_beta
from .determinants import check_params

UNKNOWNS = ("S", "Dd", "E1", "O1", "C2", "C3", "C4", "C5")
_IS, _IDD, _IE, _IO = 0, 1, 2, 3
_IC = {2: 4, 3: 5, 4: 6, 5: 7}
_PHASE_SIGN = {2: 1.0, 3: -1.0, 4: 1.0, 5: -1.0}


@dataclass(frozen=True)
class SpectralCase:
    """One closed-form family; ``mu_range`` is in units of ``kappa^2``."""

    tag: str
    mu_range: tuple[float, float]

    def mu_of_x(self, x):
        if self.tag == "I":
            return x * x - 1.0
        if self.tag == "II":
            return -(x * x + 1.0)
        return self.mu_range[0]

    def k_of_mu(self, mu: float, kappa: float = 1.0) -> float:
        """``k`` such that ``k^2 = mu + kappa^2`` (I) or ``-(mu + kappa^2)`` (II)."""
        if self.tag == "I":
            return math.sqrt(mu + kappa * kappa)
        if self.tag == "II":
            return math.sqrt(-(mu + kappa * kappa))
        return 0.0 if self.tag == "III" else kappa

    def check_x(self, x) -> None:
        xa = np.asarray(x, dtype=float)
        if self.tag == "I" and np.any(~((xa > 0) & (xa < 1))):
            raise DomainError("case I requires 0 < x < 1")
        if self.tag == "II" and np.any(~(xa > 0)):
            raise DomainError("case II requires x > 0")


CASE_I = SpectralCase("I", (-1.0, 0.0))
CASE_II = SpectralCase("II", (-math.inf, -1.0))
CASE_III = SpectralCase("III", (-1.0, -1.0))
CASE_IV = SpectralCase("IV", (0.0, 0.0))
CASES = {c.tag: c for c in (CASE_I, CASE_II, CASE_III, CASE_IV)}


def get_case(case) -> SpectralCase:
    if isinstance(case, SpectralCase):
        return case
    try:
        return CASES[str(case)]
    except KeyError:
        raise DomainError(f"unknown case {case!r}") from None


def _tanh_over(q, L):
    """``tanh(q L / 2) / q`` with the limit ``L/2`` at ``q = 0``."""
    w = 0.5 * q * L
    small = np.abs(w) < 1e-4
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(small, 0.5 * L * (1 - w * w / 3), np.tanh(w) / np.where(small, 1.0, q))
    return out


def _sin_over(k, l):
    return l * np.sinc(k * l / math.pi)


def _family_data(tag: str, x, l: float, L: float):
    """Endpoint values, slopes and integrals of every basis function."""
    x = np.asarray(x, dtype=float)
    one, zero = np.ones_like(x), np.zeros_like(x)
    d = {}
    if tag in ("I", "II", "III"):
        if tag == "I":
            k = x
            q = np.sqrt(np.clip(1 - x * x, 0, None))
            a, b, c1 = -q * q / 2, -one, -k * k
            kl = k * l
            phi = (np.cos(kl), k * np.sin(kl), _sin_over(k, l))
        elif tag == "II":
            k = x
            q = np.sqrt(1 + x * x)
            a, b, c1 = q * q / 2, one, -k * k
            th = np.tanh(k * l)
            with np.errstate(divide="ignore", invalid="ignore"):
                phi_int = np.where(k * l < 1e-8, l * one, th / np.where(k > 0, k, 1.0))
            phi = (one, -k * th, phi_int)
        else:
            q = one
            a, b, c1 = -0.25 * one, -0.5 * one, -one
            phi = (one, zero, l * one)
        if tag == "III":
            psi = (l * l * one, -2 * l * one, l**3 / 3 * one)
        else:
            psi = (one, zero, l * one)
        Tq = _tanh_over(q, L)
        # leaf 1: (value at 0, value at L, slope at 0, slope at L, integral)
        psi1 = (one, one, zero, zero, L * one)
        ev = (one, one, -q * q * Tq, q * q * Tq, 2 * Tq)
        od = (-Tq, Tq, one, one, zero)
    else:
        a, b, c1 = -0.5 * one, -one, 0.5 * one
        phi = (math.cos(l) * one, math.sin(l) * one, math.sin(l) * one)
        psi = (one, zero, l * one)
        psi1 = (zero, L * L * one, zero, 2 * L * one, L**3 / 3 * one)
        ev = (one, one, zero, zero, L * one)
        od = (-L / 2 * one, L / 2 * one, one, one, zero)
    d.update(a=a, b=b, c1=c1, phi=phi, psi=psi, psi1=psi1, ev=ev, od=od)
    return d


def full_system_batch(case, x, l_star: float, L_star: float, alpha_star: float = -SQRT3 / 2) -> np.ndarray:
    """Full systems for an array of ``x`` values, shape ``(n, 8, 8)``.

    ``alpha_star`` is the junction coefficient divided by ``kappa``.
    Rows: three spine conditions at junction 1, three at junction 2, then
    the two volume constraints.
    """
    tag = get_case(case).tag
    x = np.atleast_1d(np.asarray(x, dtype=float))
    n = x.size
    d = _family_data(tag, x, l_star, L_star)

    def curved(leaf, which):
        # which: 0 value at the spine, 1 slope at the spine, 2 integral
        v = np.zeros((n, 8))
        v[:, _IS] = d["a"] * d["psi"][which]
        v[:, _IDD] = _PHASE_SIGN[leaf] * d["b"] * d["psi"][which]
        v[:, _IC[leaf]] = d["phi"][which]
        return v

    def flat(which):
        # which indexes (value 0, value L, slope 0, slope L, integral)
        v = np.zeros((n, 8))
        v[:, _IS] = d["c1"] * d["psi1"][which]
        v[:, _IE] = d["ev"][which]
        v[:, _IO] = d["od"][which]
        return v

    rows = []
    for j, (pa, pb) in ((1, (2, 3)), (2, (4, 5))):
        f1 = flat(0 if j == 1 else 1)
        dn1 = -flat(2) if j == 1 else flat(3)
        fa, fb = curved(pa, 0), curved(pb, 0)
        dna, dnb = -curved(pa, 1), -curved(pb, 1)
        rows.append(alpha_star * f1 + dn1 - 0.5 * (dna + dnb))
        rows.append(alpha_star * (fa - fb) - 1.5 * (dna - dnb))
        rows.append(f1 + fa + fb)
    i1 = flat(4)
    rows.append(-i1 + curved(2, 2) + curved(4, 2))
    rows.append(-i1 + curved(3, 2) + curved(5, 2))
    return np.stack(rows, axis=1)


def assemble_full_system(case, x, config: PartitionConfig) -> np.ndarray:
    """Full 8x8 coefficient matrix of the boundary and constraint equations.

    ``x = k / kappa`` for cases I and II and is ignored for III and IV.
    """
    sc = get_case(case)
    if sc.tag in ("I", "II"):
        sc.check_x(x)
    else:
        x = 0.0
    alpha, _ = alpha_beta(config, 1)
    return full_system_batch(sc, x, config.l_star, config.L_star, alpha / config.kappa)[0]


def normalized_rows(m: np.ndarray) -> np.ndarray:
    scale = np.max(np.abs(m), axis=-1, keepdims=True)
    return m / np.where(scale > 0, scale, 1.0)


def full_det_batch(case, x, l_star, L_star, alpha_star=-SQRT3 / 2) -> np.ndarray:
    return np.linalg.det(normalized_rows(full_system_batch(case, x, l_star, L_star, alpha_star)))


def singular_ratio(m: np.ndarray) -> tuple[float, np.ndarray]:
    """``sigma_min / sigma_max`` of the row-normalized matrix and the null
    direction (last right singular vector)."""
    _, s, vt = np.linalg.svd(normalized_rows(m))
    v = vt[-1]
    v = v / v[np.argmax(np.abs(v))]
    return float(s[-1] / s[0]), v


# ---------------------------------------------------------------------------
# eigenfunctions


def _cosh_ratio(q, y, L):
    """cosh(q y) / cosh(q L / 2) and sinh(q y) / cosh(q L / 2), overflow free."""
    ay = np.abs(y)
    base = np.exp(q * (ay - 0.5 * L)) / (1 + np.exp(-q * L))
    e2 = np.exp(-2 * q * ay)
    return base * (1 + e2), np.sign(y) * base * (1 - e2), base


@dataclass(frozen=True)
class CaseSolution:
    """Eigenfunction of one family at a given ``x``, in physical units.

    ``coeffs`` are the dimensionless unknowns in :data:`UNKNOWNS` order.
    Leaf functions are available through :meth:`f`, with derivatives of
    order 0, 1 or 2.
    """

    case: SpectralCase
    x: float
    kappa: float
    l: float
    L: float
    coeffs: np.ndarray = field(repr=False)
    scale: float = 1.0

    @classmethod
    def from_null_vector(cls, case, x: float, config: PartitionConfig, vec) -> "CaseSolution":
        sc = get_case(case)
        x = float(x) if sc.tag in ("I", "II") else 0.0
        return cls(sc, x, config.kappa, config.l, config.L, np.asarray(vec, dtype=float).copy())

    @classmethod
    def at_root(cls, case, x: float, config: PartitionConfig) -> "CaseSolution":
        """Solution spanned by the null direction of the full system."""
        _, v = singular_ratio(assemble_full_system(case, x, config))
        return cls.from_null_vector(case, x, config, v).normalized()

    # dimensionless parameters --------------------------------------------
    @property
    def l_star(self) -> float:
        return self.kappa * self.l

    @property
    def L_star(self) -> float:
        return self.kappa * self.L

    @property
    def mu_star(self) -> float:
        return float(self.case.mu_of_x(self.x))

    @property
    def mu(self) -> float:
        return self.kappa**2 * self.mu_star

    @property
    def k_star(self) -> float:
        return {"I": self.x, "II": self.x, "III": 0.0, "IV": 1.0}[self.case.tag]

    @property
    def q_star(self) -> float:
        t = self.case.tag
        if t == "I":
            return math.sqrt(max(1.0 - self.x**2, 0.0))
        if t == "II":
            return math.sqrt(1.0 + self.x**2)
        return 1.0 if t == "III" else 0.0

    def _data(self):
        return _family_data(self.case.tag, np.array([self.x]), self.l_star, self.L_star)

    def lambdas_star(self) -> tuple[float, float]:
        """Dimensionless multipliers (lambda2, lambda3)."""
        S, Dd = self.scale * self.coeffs[_IS], self.scale * self.coeffs[_IDD]
        t, k2 = self.case.tag, self.k_star**2
        if t in ("I", "II"):
            base = k2 * self.q_star**2 * S
            return base + 2 * k2 * Dd, base - 2 * k2 * Dd
        return S + 2 * Dd, S - 2 * Dd

    @property
    def lambda2(self) -> float:
        return self.kappa**2 * self.lambdas_star()[0]

    @property
    def lambda3(self) -> float:
        return self.kappa**2 * self.lambdas_star()[1]

    def leaf_lambda(self, leaf: int) -> float:
        l2, l3 = self.lambda2, self.lambda3
        return {1: -(l2 + l3), 2: l2, 4: l2, 3: l3, 5: l3}[leaf]

    def arc_constants(self) -> tuple[float, float, float, float]:
        return tuple(float(self.scale * self.coeffs[_IC[p]]) for p in (2, 3, 4, 5))

    def standard_unknowns(self) -> dict[str, float]:
        """Coefficients in the exponential (or polynomial, case IV) basis
        ``C1 e^{q s} + D1 e^{-q s}`` on leaf 1 plus multipliers and arc
        constants; all dimensionless except the multipliers."""
        E, O = self.scale * self.coeffs[_IE], self.scale * self.coeffs[_IO]
        L = self.L_star
        if self.case.tag == "IV":
            C1, D1 = O, E - O * L / 2
        else:
            q = self.q_star
            c = math.cosh(q * L / 2)
            C1 = (E + O / q) * math.exp(-q * L / 2) / (2 * c)
            D1 = (E - O / q) * math.exp(q * L / 2) / (2 * c)
        l2, l3 = self.lambdas_star()
        out = {"lambda2": l2, "lambda3": l3, "C1": C1, "D1": D1}
        out.update({f"C{p}": c for p, c in zip((2, 3, 4, 5), self.arc_constants())})
        return out

    # evaluation -------------------------------------------------------------
    def _f_star(self, leaf: int, s, order: int):
        s = np.asarray(s, dtype=float)
        d = self._data()
        cf = self.scale * self.coeffs
        t = self.case.tag
        l, L = self.l_star, self.L_star
        if leaf == 1:
            S, E, O = cf[_IS], cf[_IE], cf[_IO]
            y = s - L / 2
            if t == "IV":
                psi = (s * s, 2 * s, 2 * np.ones_like(s))[order]
                e = (np.ones_like(s), 0 * s, 0 * s)[order]
                o = (y, np.ones_like(s), 0 * s)[order]
            else:
                q = self.q_star
                ch, sh, _ = _cosh_ratio(q, y, L)
                psi = np.ones_like(s) if order == 0 else 0 * s
                e = (ch, q * sh, q * q * ch)[order]
                if order == 1:
                    o = ch
                else:
                    if q * L < 1e-3:
                        sq = np.sinh(q * y) / (q * math.cosh(q * L / 2))
                    else:
                        sq = sh / q
                    o = sq if order == 0 else q * q * sq
            return d["c1"][0] * S * psi + E * e + O * o
        S, Dd, C = cf[_IS], cf[_IDD], cf[_IC[leaf]]
        part = d["a"][0] * S + _PHASE_SIGN[leaf] * d["b"][0] * Dd
        u = s - l
        k = self.k_star
        if t == "III":
            psi = (u * u, 2 * u, 2 * np.ones_like(s))[order]
            phi = np.ones_like(s) if order == 0 else 0 * s
        else:
            psi = np.ones_like(s) if order == 0 else 0 * s
            if t == "II":
                c = math.cosh(k * l)
                phi = (np.cosh(k * u) / c, k * np.sinh(k * u) / c, k * k * np.cosh(k * u) / c)[order]
            else:
                phi = (np.cos(k * u), -k * np.sin(k * u), -k * k * np.cos(k * u))[order]
        return part * psi + C * phi

    def f(self, leaf: int, s, order: int = 0):
        """``d^order f_leaf / ds^order`` at physical arc length ``s``."""
        if leaf not in (1, 2, 3, 4, 5) or order not in (0, 1, 2):
            raise DomainError("leaf must be 1..5 and order 0..2")
        return self.kappa**order * self._f_star(leaf, self.kappa * np.asarray(s, dtype=float), order)

    def leaf_length(self, leaf: int) -> float:
        return self.L if leaf == 1 else self.l

    def ode_residual(self, leaf: int, s):
        """``f'' + (mu + kappa_leaf^2) f + lambda_leaf / 2``."""
        k2 = 0.0 if leaf == 1 else self.kappa**2
        return self.f(leaf, s, 2) + (self.mu + k2) * self.f(leaf, s) + 0.5 * self.leaf_lambda(leaf)

    def norm_squared(self) -> float:
        total = 0.0
        for leaf in range(1, 6):
            val, _ = integrate.quad(lambda s: float(self.f(leaf, s)) ** 2, 0.0, self.leaf_length(leaf), limit=200, epsabs=0, epsrel=1e-13)
            total += val
        return total

    def normalized(self) -> "CaseSolution":
        n2 = self.norm_squared()
        if not n2 > 0:
            raise DomainError("zero eigenfunction")
        return CaseSolution(self.case, self.x, self.kappa, self.l, self.L, self.coeffs, self.scale / math.sqrt(n2))

    def boundary_residuals(self, alpha: float) -> np.ndarray:
        """The eight spine and volume equations evaluated from the leaf
        functions themselves (physical units)."""
        L, l = self.L, self.l
        f, dn = self.f, lambda p: -float(self.f(p, 0.0, 1))
        out = []
        for j, (pa, pb) in ((1, (2, 3)), (2, (4, 5))):
            s1 = 0.0 if j == 1 else L
            f1 = float(f(1, s1))
            dn1 = -float(f(1, 0.0, 1)) if j == 1 else float(f(1, L, 1))
            fa, fb = float(f(pa, 0.0)), float(f(pb, 0.0))
            out.append(alpha * f1 + dn1 - 0.5 * (dn(pa) + dn(pb)))
            out.append(alpha * (fa - fb) - 1.5 * (dn(pa) - dn(pb)))
            out.append(f1 + fa + fb)

        def integral(p):
            return integrate.quad(lambda s: float(f(p, s)), 0.0, self.leaf_length(p), epsabs=1e-12, epsrel=1e-12)[0]

        i1 = integral(1)
        out.append(-i1 + integral(2) + integral(4))
        out.append(-i1 + integral(3) + integral(5))
        return np.array(out)

    def sample(self, n: int):
        """Nodal values on uniform grids with ``n`` cells per leaf."""
        from ..variation import VariationSample

        arrays = []
        for leaf in range(1, 6):
            s = np.linspace(0.0, self.leaf_length(leaf), n + 1)
            arrays.append(np.asarray(self.f(leaf, s), dtype=float))
        return VariationSample(tuple(arrays), (self.L, self.l, self.l, self.l, self.l))


def check_config_params(config: PartitionConfig) -> None:
    check_params(config.l_star, config.L_star)
