"""Double triple-junction configuration and the spine-frame algebra.

The configuration has a flat leaf (leaf 1) of length ``L`` joining two
junctions, and four circular arcs (leaves 2..5) of length ``l`` and curvature
magnitude ``kappa`` that run from a junction to the outer wall.  Leaves 2 and
3 belong to junction 1, leaves 4 and 5 to junction 2.  Leaves 2 and 4 carry
the phase-2 curvature, leaves 3 and 5 the phase-3 curvature.

Parametrization: curved leaves run from ``s = 0`` at their junction to
``s = l`` at the wall; leaf 1 runs from ``s = 0`` at junction 1 to ``s = L``
at junction 2.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

SQRT3 = math.sqrt(3.0)
MAX_L_STAR = math.pi / 6.0
EXACT_TOL = 1e-12

# leaf ids meeting at each junction, ordered (flat, phase-2 arc, phase-3 arc)
JUNCTION_LEAVES = {1: (1, 2, 3), 2: (1, 4, 5)}
# index into the per-phase curvature triple for each leaf id
LEAF_PHASE = {1: 0, 2: 1, 3: 2, 4: 1, 5: 2}


@dataclass(frozen=True)
class Leaf:
    id: int
    kappa: float
    length: float
    s_spine: float = 0.0
    s_wall: float | None = None
    sigma_wall: float | None = None

    def __post_init__(self):
        if not self.length > 0:
            raise DomainError(f"leaf {self.id}: length must be positive, got {self.length}")

    @property
    def meets_wall(self) -> bool:
        return self.s_wall is not None


@dataclass(frozen=True)
class PartitionConfig:
    """Validated double-junction geometry (surface tensions fixed to 1).

    ``orientation = +1`` is the stable-leaning arrangement with ``alpha < 0``;
    ``-1`` flips the phase-2/phase-3 curvature signs (``alpha > 0``).
    """

    kappa: float
    l: float
    L: float
    orientation: int = 1
    gamma: tuple[float, float, float] = (1.0, 1.0, 1.0)
    leaves: tuple[Leaf, ...] = field(default=(), repr=False)

    @property
    def l_star(self) -> float:
        return self.kappa * self.l

    @property
    def L_star(self) -> float:
        return self.kappa * self.L

    @property
    def signed_curvatures(self) -> tuple[float, float, float]:
        k = self.orientation * self.kappa
        return (0.0, -k, k)

    def leaf(self, leaf_id: int) -> Leaf:
        return self.leaves[leaf_id - 1]

    def leaf_kappa(self, leaf_id: int) -> float:
        return self.signed_curvatures[LEAF_PHASE[leaf_id]]

    def flipped(self) -> "PartitionConfig":
        return build_config(self.kappa, self.l, self.L, orientation=-self.orientation)


@dataclass(frozen=True)
class SpineTrace:
    """Normal (f) and conormal (h) components of a variation at one spine."""

    f1: float
    h1: float
    f2: float
    h2: float
    f3: float
    h3: float

    @property
    def f(self) -> tuple[float, float, float]:
        return (self.f1, self.f2, self.f3)

    @property
    def h(self) -> tuple[float, float, float]:
        return (self.h1, self.h2, self.h3)


def build_config(kappa: float, l: float, L: float, orientation: int = 1) -> PartitionConfig:
    """Build and validate the configuration for curvature ``kappa``, arc
    length ``l`` and flat length ``L``.

    Raises DomainError for nonpositive inputs or when ``kappa * l`` reaches
    pi/6, beyond which the arcs cannot meet a convex wall orthogonally.
    """
    for name, value in (("kappa", kappa), ("l", l), ("L", L)):
        if not (isinstance(value, (int, float, np.floating)) and math.isfinite(value) and value > 0):
            raise DomainError(f"{name} must be a positive finite number, got {value!r}")
    if orientation not in (1, -1):
        raise DomainError(f"orientation must be +1 or -1, got {orientation!r}")
    if kappa * l >= MAX_L_STAR:
        raise DomainError(
            f"kappa*l = {kappa * l:.6g} must be < pi/6 = {MAX_L_STAR:.6g} for a minimal configuration"
        )
    k = orientation * kappa
    signed = (0.0, -k, k)
    leaves = [Leaf(1, 0.0, float(L))]
    for leaf_id in (2, 3, 4, 5):
        leaves.append(
            Leaf(leaf_id, signed[LEAF_PHASE[leaf_id]], float(l), s_wall=float(l), sigma_wall=0.0)
        )
    config = PartitionConfig(float(kappa), float(l), float(L), orientation, (1.0, 1.0, 1.0), tuple(leaves))
    if abs(mean_curvature_sum(config)) > EXACT_TOL:
        raise DomainError("weighted curvature sum does not vanish")
    return config


def build_dimensionless(l_star: float, L_star: float, kappa: float = 1.0, orientation: int = 1) -> PartitionConfig:
    """Configuration from the dimensionless lengths ``kappa*l`` and ``kappa*L``."""
    if not kappa > 0:
        raise DomainError(f"kappa must be positive, got {kappa!r}")
    return build_config(kappa, l_star / kappa, L_star / kappa, orientation=orientation)


def mean_curvature_sum(config: PartitionConfig) -> float:
    return float(sum(g * k for g, k in zip(config.gamma, config.signed_curvatures)))


def spine_transform(f1, h1) -> SpineTrace:
    """Components on the two other leaves of a junction from ``(f1, h1)``.

    Accepts scalars or numpy arrays.
    """
    c = SQRT3 / 2.0
    return SpineTrace(
        f1=f1,
        h1=h1,
        f2=-0.5 * f1 - c * h1,
        h2=c * f1 - 0.5 * h1,
        f3=-0.5 * f1 + c * h1,
        h3=-c * f1 - 0.5 * h1,
    )


def conormal_from_normals(f1, f2):
    """Conormal component ``h1`` implied by the normal components on leaves
    1 and 2 (inverse of the ``f2`` row of :func:`spine_transform`)."""
    return -(f1 + 2.0 * f2) / SQRT3


def second_fundamental_forms(config: PartitionConfig, junction: int) -> tuple[float, float, float]:
    """II(nu, nu) on the three leaves of ``junction``: the signed curvatures."""
    _check_junction(junction)
    return tuple(config.leaf_kappa(i) for i in JUNCTION_LEAVES[junction])


def alpha_beta(config: PartitionConfig, junction: int) -> tuple[float, float]:
    """Point-term coefficients of the second variation at ``junction``."""
    ii1, ii2, ii3 = second_fundamental_forms(config, junction)
    return SQRT3 / 4.0 * (ii2 - ii3), 0.75 * ii1


def _check_junction(junction: int) -> None:
    if junction not in (1, 2):
        raise DomainError(f"junction must be 1 or 2, got {junction!r}")


# ---------------------------------------------------------------------------
# planar layout

# direction in which each leaf leaves its junction, and its turning sense
# (+1 counterclockwise); chosen so both phase-1 lobes are lens shaped
_LEAF_START_ANGLE = {2: 2 * math.pi / 3, 3: 4 * math.pi / 3, 4: math.pi / 3, 5: -math.pi / 3}
_LEAF_TURN = {2: 1, 3: -1, 4: -1, 5: 1}


def junction_points(config: PartitionConfig) -> dict[int, np.ndarray]:
    half = config.L / 2.0
    return {1: np.array([-half, 0.0]), 2: np.array([half, 0.0])}


def leaf_tangent_angle(config: PartitionConfig, leaf_id: int, s: float = 0.0) -> float:
    """Angle of the unit tangent of a leaf in direction of increasing ``s``."""
    if leaf_id == 1:
        return 0.0
    return _LEAF_START_ANGLE[leaf_id] + _LEAF_TURN[leaf_id] * config.kappa * s


def leaf_point(config: PartitionConfig, leaf_id: int, s) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    pts = junction_points(config)
    if leaf_id == 1:
        return np.stack([pts[1][0] + s, np.zeros_like(s)], axis=-1)
    start = pts[1] if leaf_id in (2, 3) else pts[2]
    th0 = _LEAF_START_ANGLE[leaf_id]
    d = _LEAF_TURN[leaf_id]
    th = th0 + d * config.kappa * s
    r = d / config.kappa
    x = start[0] + r * (np.sin(th) - math.sin(th0))
    y = start[1] - r * (np.cos(th) - math.cos(th0))
    return np.stack([x, y], axis=-1)


def arc_center(config: PartitionConfig, leaf_id: int) -> np.ndarray:
    start = leaf_point(config, leaf_id, 0.0)
    th0 = _LEAF_START_ANGLE[leaf_id]
    r = _LEAF_TURN[leaf_id] / config.kappa
    return start + r * np.array([-math.sin(th0), math.cos(th0)])


def conormals(config: PartitionConfig, junction: int, angle_offsets: dict[int, float] | None = None) -> np.ndarray:
    """Outward unit conormals (rows) of the three leaves at ``junction``."""
    _check_junction(junction)
    angle_offsets = angle_offsets or {}
    rows = []
    for leaf_id in JUNCTION_LEAVES[junction]:
        th = leaf_tangent_angle(config, leaf_id)
        if leaf_id == 1 and junction == 2:
            th = math.pi
        th += angle_offsets.get(leaf_id, 0.0)
        # the conormal points out of the leaf, i.e. against the leaving direction
        rows.append([-math.cos(th), -math.sin(th)])
    return np.array(rows)


def young_residual(config: PartitionConfig, angle_offsets: dict[int, float] | None = None) -> np.ndarray:
    """``sum_p gamma_p nu_p`` at each junction, shape (2, 2).

    ``angle_offsets`` rotates individual conormals (keyed by leaf id) to probe
    non-equilibrium arrangements.
    """
    gamma = np.asarray(config.gamma)
    return np.array([gamma @ conormals(config, j, angle_offsets) for j in (1, 2)])


# ---------------------------------------------------------------------------
# SVG output


def wall_contacts(config: PartitionConfig) -> dict[int, tuple[np.ndarray, np.ndarray]]:
    """Outer endpoint and the wall's tangent direction there, per curved leaf.

    The wall tangent is the arc's radial direction, so contact is orthogonal.
    """
    out = {}
    for leaf_id in (2, 3, 4, 5):
        p = leaf_point(config, leaf_id, config.l)
        th = leaf_tangent_angle(config, leaf_id, config.l)
        out[leaf_id] = (p, np.array([-math.sin(th), math.cos(th)]))
    return out


def _line_intersection(p, u, q, v) -> np.ndarray:
    a = np.column_stack([u, -v])
    t = np.linalg.solve(a, q - p)
    return p + t[0] * u


def boundary_segments(config: PartitionConfig) -> list[tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]]:
    """Cubic Bezier pieces of the convex wall, counterclockwise from leaf 5.

    Both interior control points sit at the intersection of the two contact
    tangent lines, which makes the wall straight (zero curvature) at every
    contact point.
    """
    contacts = wall_contacts(config)
    order = (5, 4, 2, 3)
    segments = []
    for a, b in zip(order, order[1:] + order[:1]):
        pa, ua = contacts[a]
        pb, ub = contacts[b]
        x = _line_intersection(pa, ua, pb, ub)
        segments.append((pa, x, x.copy(), pb))
    return segments


def _fmt(v: float) -> str:
    return repr(float(v))


def emit_geometry_svg(config: PartitionConfig, path: str | os.PathLike, size: float = 640.0) -> None:
    """Write an SVG drawing of the configuration and a compatible convex wall.

    Coordinates are in model units with the y axis flipped by the viewBox
    transform; every number is written at full double precision.
    """
    segments = boundary_segments(config)
    pts = np.array([p for seg in segments for p in seg])
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    pad = 0.08 * float(max(hi - lo))
    lo, hi = lo - pad, hi + pad
    width, height = hi - lo
    stroke = _fmt(0.004 * float(max(width, height)))

    def xy(p):
        return f"{_fmt(p[0])},{_fmt(p[1])}"

    wall = "M " + xy(segments[0][0]) + " " + " ".join(
        f"C {xy(c1)} {xy(c2)} {xy(p1)}" for _, c1, c2, p1 in segments
    ) + " Z"
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        '<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{size:.0f}" height="{size * height / width:.0f}" '
        f'viewBox="{_fmt(lo[0])} {_fmt(-hi[1])} {_fmt(width)} {_fmt(height)}">',
        f"<desc>kappa={_fmt(config.kappa)} l={_fmt(config.l)} L={_fmt(config.L)} "
        f"orientation={config.orientation}</desc>",
        '<g transform="scale(1,-1)" fill="none" stroke-linecap="round">',
        f'<path id="wall" d="{wall}" stroke="#555555" stroke-width="{stroke}"/>',
    ]
    j = junction_points(config)
    lines.append(
        f'<path id="leaf1" d="M {xy(j[1])} L {xy(j[2])}" stroke="#1f4e9c" stroke-width="{stroke}"/>'
    )
    r = 1.0 / config.kappa
    for leaf_id in (2, 3, 4, 5):
        p0 = leaf_point(config, leaf_id, 0.0)
        p1 = leaf_point(config, leaf_id, config.l)
        sweep = 1 if _LEAF_TURN[leaf_id] > 0 else 0
        lines.append(
            f'<path id="leaf{leaf_id}" d="M {xy(p0)} A {_fmt(r)} {_fmt(r)} 0 0 {sweep} {xy(p1)}" '
            f'stroke="#b22222" stroke-width="{stroke}"/>'
        )
    lines.append("</g>")
    lines.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
