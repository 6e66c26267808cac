"""Root scans over the four eigenvalue families and the stability verdict."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from ..errors import DomainError
from ..geometry import PartitionConfig, alpha_beta
from ..variation import ScreenResult, constant_variation_screen
from . import determinants as dt
from .systems import CASES, full_det_batch, full_system_batch, singular_ratio

STABLE, UNSTABLE, INCONCLUSIVE = "Stable", "Unstable", "Inconclusive"
GUARD = 1e-6
CERT_RATIO = 1e-8
POINT_TOL = 1e-6


@dataclass(frozen=True)
class Root:
    """A located zero of one condition.

    ``x`` is ``k/kappa`` (cases I, II) or None; ``mu`` is physical and
    ``mu_star = mu / kappa^2``.  ``sv_ratio`` is the smallest-to-largest
    singular value ratio of the full system at the root.
    """

    case: str
    branch: str
    x: float | None
    bracket: tuple[float, float]
    mu: float
    mu_star: float
    residual: float
    certified: bool
    sv_ratio: float


@dataclass(frozen=True)
class CaseScan:
    case: str
    grid_points: int
    x_range: tuple[float, float]
    roots: tuple[Root, ...] = ()
    touches: tuple[float, ...] = ()
    residuals: dict = field(default_factory=dict)


@dataclass(frozen=True)
class OracleCheck:
    n: int
    mu_coarse: tuple[float, ...]
    mu_fine: tuple[float, ...]
    mu_extrapolated: tuple[float, ...]
    agrees: bool
    nearest: float | None = None


@dataclass(frozen=True)
class StabilityReport:
    kappa: float
    l: float
    L: float
    l_star: float
    L_star: float
    verdict: str
    mu: float | None
    mu_star: float | None
    verdict_case: str | None
    verdict_x: float | None
    verdict_bracket: tuple[float, float] | None
    cases: tuple[CaseScan, ...]
    lemma_hypothesis: bool
    x0: float
    x0_converged: bool
    screen: ScreenResult
    grid_n: int
    tol: float
    notes: tuple[str, ...] = ()
    oracle: OracleCheck | None = None

    def case(self, tag: str) -> CaseScan:
        return next(c for c in self.cases if c.case == tag)

    def all_roots(self) -> list[Root]:
        return [r for c in self.cases for r in c.roots]

    def to_dict(self) -> dict:
        d = asdict(self)
        d["screen"] = {"j_min": self.screen.j_min, "feasible": self.screen.feasible, "params": list(self.screen.params)}
        return _jsonable(d)

    @classmethod
    def from_dict(cls, d: dict) -> "StabilityReport":
        d = dict(d)
        d["cases"] = tuple(
            CaseScan(
                c["case"],
                c["grid_points"],
                tuple(c["x_range"]),
                tuple(Root(**{**r, "bracket": tuple(r["bracket"])}) for r in c["roots"]),
                tuple(c["touches"]),
                dict(c["residuals"]),
            )
            for c in d["cases"]
        )
        s = d["screen"]
        d["screen"] = ScreenResult(s["j_min"], s["feasible"], tuple(s["params"]))
        if d.get("verdict_bracket") is not None:
            d["verdict_bracket"] = tuple(d["verdict_bracket"])
        d["notes"] = tuple(d.get("notes", ()))
        if d.get("oracle") is not None:
            o = d["oracle"]
            d["oracle"] = OracleCheck(
                o["n"], tuple(o["mu_coarse"]), tuple(o["mu_fine"]), tuple(o["mu_extrapolated"]), o["agrees"], o.get("nearest")
            )
        return cls(**d)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


# ---------------------------------------------------------------------------
# generic 1-D scanning


def _scalar(fn):
    return lambda t: float(np.asarray(fn(np.array([t])))[0])


def find_sign_changes(fn, xs: np.ndarray, tol: float, vals: np.ndarray | None = None):
    """Roots of ``fn`` bracketed by sign changes on the grid ``xs`` plus
    suspected tangential touches.

    Returns ``(roots, touches)`` with roots as ``(x, (lo, hi))``.  A touch
    is an interior local minimum of ``|fn|`` whose refined value falls below
    ``sqrt(tol)`` times the neighbouring magnitudes; when refinement reveals
    an actual sign change, both crossings are returned as roots.
    """
    f1 = _scalar(fn)
    if vals is None:
        vals = np.asarray(fn(xs), dtype=float)
    roots, touches = [], []
    sgn = np.sign(vals)
    for i in np.nonzero(sgn == 0)[0]:
        roots.append((float(xs[i]), (float(xs[i]), float(xs[i]))))
    for i in np.nonzero(sgn[:-1] * sgn[1:] < 0)[0]:
        lo, hi = float(xs[i]), float(xs[i + 1])
        r = brentq(f1, lo, hi, xtol=tol, rtol=4 * np.finfo(float).eps, maxiter=500)
        roots.append((r, (lo, hi)))
    a = np.abs(vals)
    for i in range(1, len(xs) - 1):
        if not (a[i] < a[i - 1] and a[i] <= a[i + 1] and sgn[i - 1] == sgn[i] == sgn[i + 1] != 0):
            continue
        s = sgn[i]
        lo, hi = float(xs[i - 1]), float(xs[i + 1])
        res = minimize_scalar(lambda t: s * f1(t), bounds=(lo, hi), method="bounded", options={"xatol": min(tol, 1e-10)})
        m = float(res.fun)
        if m < 0:
            xm = float(res.x)
            for blo, bhi in ((lo, xm), (xm, hi)):
                r = brentq(f1, blo, bhi, xtol=tol, rtol=4 * np.finfo(float).eps, maxiter=500)
                roots.append((r, (blo, bhi)))
        elif m <= math.sqrt(tol) * min(a[i - 1], a[i + 1]):
            touches.append(float(res.x))
    roots.sort()
    return roots, touches


def _polish(fn, x: float, bracket: tuple[float, float]) -> float:
    lo, hi = bracket
    f1 = _scalar(fn)
    if lo < hi and f1(lo) * f1(hi) < 0:
        return brentq(f1, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    return x


def certify(tag: str, x: float, l_star: float, L_star: float, alpha_star: float) -> tuple[bool, float]:
    m = full_system_batch(tag, x, l_star, L_star, alpha_star)[0]
    ratio, _ = singular_ratio(m)
    return ratio < CERT_RATIO, ratio


def case_I_grid(grid_n: int) -> np.ndarray:
    ends = np.geomspace(GUARD, 1e-2, 32)
    return np.unique(np.concatenate([np.linspace(GUARD, 1 - GUARD, grid_n), ends, 1.0 - ends]))


def case_II_grid(grid_n: int, x0: float) -> np.ndarray:
    parts = [np.geomspace(GUARD, dt.MP_SWITCH_X, 48), np.linspace(dt.MP_SWITCH_X, min(x0, 10.0), grid_n // 2)]
    if x0 > 10.0:
        parts.append(np.geomspace(10.0, x0, grid_n - grid_n // 2))
    return np.unique(np.concatenate(parts))


def _scan_family(tag, conditions, xs, l_star, L_star, alpha_star, kappa, tol):
    roots, touches, merged = [], [], []
    for branch, fn in conditions:
        found, tch = find_sign_changes(fn, xs, tol)
        touches.extend(tch)
        for x, br in found:
            xp = _polish(fn, x, br)
            ok, ratio = certify(tag, xp, l_star, L_star, alpha_star)
            mu_star = float(CASES[tag].mu_of_x(x))
            roots.append(Root(tag, branch, x, br, kappa**2 * mu_star, mu_star, float(_scalar(fn)(x)), ok, ratio))
    # the full-system backstop duplicates reduced roots; keep one per location
    for r in sorted(roots, key=lambda r: (r.x, r.branch == "full")):
        if merged and abs(merged[-1].x - r.x) <= max(1e3 * tol, 1e-9):
            if merged[-1].branch == "full" and r.branch != "full":
                merged[-1] = r
            continue
        merged.append(r)
    return merged, touches


def scan_and_verdict(config: PartitionConfig, grid_n: int = 2048, tol: float = 1e-12) -> StabilityReport:
    """Scan every family for eigenvalues ``mu <= 0`` and classify.

    Stable needs every scan to be root free, no tangential touches and the
    single-value conditions of cases III/IV away from zero; a certified
    root (full-system rank drop) with ``mu < 0`` gives Unstable; anything
    else is Inconclusive.
    """
    if grid_n < 64:
        raise DomainError("grid_n must be at least 64")
    if not tol > 0:
        raise DomainError("tol must be positive")
    if config.orientation != 1:
        raise DomainError("the closed-form scan assumes the alpha < 0 orientation")
    ls, Ls, kappa = config.l_star, config.L_star, config.kappa
    dt.check_params(ls, Ls)
    alpha_star = alpha_beta(config, 1)[0] / kappa
    notes = []
    hyp = dt.lemma_hypothesis(ls, Ls)

    xs1 = case_I_grid(grid_n)
    conds_I = [
        ("symmetric", lambda x: dt.d1_stable(x, ls, Ls)),
        ("antisymmetric", lambda x: dt.sa_residual_I(x, ls, Ls)),
        ("full", lambda x: full_det_batch("I", x, ls, Ls, alpha_star)),
    ]
    roots_I, touch_I = _scan_family("I", conds_I, xs1, ls, Ls, alpha_star, kappa, tol)
    if hyp and any(r.branch == "antisymmetric" for r in roots_I):
        notes.append("antisymmetric case I root found although (tan l + sqrt3) L < 4")
    scans = [CaseScan("I", xs1.size, (float(xs1[0]), float(xs1[-1])), tuple(roots_I), tuple(touch_I))]

    x0, x0_ok = dt.choose_x0(ls, Ls)
    if not x0_ok:
        notes.append("case II cutoff did not reach its asymptotic regime")
    xs2 = case_II_grid(grid_n, x0)
    conds_II = [
        ("symmetric", lambda x: dt.d2_scaled(x, ls, Ls)),
        ("antisymmetric", lambda x: dt.sa_residual_II(x, ls, Ls)),
        ("full", lambda x: full_det_batch("II", x, ls, Ls, alpha_star)),
    ]
    roots_II, touch_II = _scan_family("II", conds_II, xs2, ls, Ls, alpha_star, kappa, tol)
    scans.append(CaseScan("II", xs2.size, (float(xs2[0]), float(xs2[-1])), tuple(roots_II), tuple(touch_II)))

    point_issues = []
    for tag, residuals in (
        ("III", {"symmetric": dt.case_III_scaled(ls, Ls)}),
        (
            "IV",
            {
                "symmetric": dt.case_IV_residual(ls, Ls) / (4.0 / math.tan(ls) * (1.0 + Ls**3)),
                "antisymmetric": dt.sa_residual_IV(ls, Ls) / (1.0 + Ls),
            },
        ),
    ):
        roots = []
        mu_star = CASES[tag].mu_range[0]
        for branch, val in residuals.items():
            if abs(val) <= POINT_TOL:
                ok, ratio = certify(tag, 0.0, ls, Ls, alpha_star)
                roots.append(Root(tag, branch, None, (Ls, Ls), kappa**2 * mu_star, mu_star, val, ok, ratio))
                point_issues.append(tag)
        scans.append(CaseScan(tag, 1, (0.0, 0.0), tuple(roots), (), {k: float(v) for k, v in residuals.items()}))

    all_roots = [r for s in scans for r in s.roots]
    negative = [r for r in all_roots if r.certified and r.mu < 0]
    verdict, pick = STABLE, None
    if negative:
        verdict = UNSTABLE
        pick = min(negative, key=lambda r: r.mu)
    elif all_roots or touch_I or touch_II or point_issues or not x0_ok:
        verdict = INCONCLUSIVE
        if touch_I or touch_II:
            notes.append("tangential sign touch")
        if any(not r.certified for r in all_roots):
            notes.append("root without full-system rank drop")
        if any(r.certified and r.mu == 0 for r in all_roots):
            notes.append("neutral eigenvalue mu = 0")
    screen = constant_variation_screen(config)
    return StabilityReport(
        kappa=kappa,
        l=config.l,
        L=config.L,
        l_star=ls,
        L_star=Ls,
        verdict=verdict,
        mu=None if pick is None else pick.mu,
        mu_star=None if pick is None else pick.mu_star,
        verdict_case=None if pick is None else pick.case,
        verdict_x=None if pick is None else pick.x,
        verdict_bracket=None if pick is None else pick.bracket,
        cases=tuple(scans),
        lemma_hypothesis=hyp,
        x0=x0,
        x0_converged=x0_ok,
        screen=screen,
        grid_n=grid_n,
        tol=tol,
        notes=tuple(notes),
    )


def oracle_check(report: StabilityReport, config: PartitionConfig, n: int = 400, k: int = 3) -> StabilityReport:
    """Attach a Richardson-extrapolated oracle comparison to ``report``."""
    from dataclasses import replace

    from ..oracle import richardson

    res = richardson(config, n, k)
    mus = res.mu
    nearest = None
    if report.verdict == STABLE:
        agrees = bool(mus[0] > 0)
    elif report.verdict == UNSTABLE:
        nearest = float(mus[np.argmin(np.abs(mus - report.mu))])
        agrees = abs(nearest - report.mu) <= 1e-3 * abs(report.mu)
    else:
        agrees = True
    chk = OracleCheck(n, tuple(map(float, res.coarse)), tuple(map(float, res.fine)), tuple(map(float, mus)), agrees, nearest)
    return replace(report, oracle=chk)
