"""Second-variation form, constraint functionals and the constant-variation
screen, all on nodal variations sampled over uniform per-leaf grids."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.linalg as sla

from .errors import ConstraintError, ShapeError
from .geometry import (
    JUNCTION_LEAVES,
    SQRT3,
    PartitionConfig,
    SpineTrace,
    alpha_beta,
    conormal_from_normals,
    spine_transform,
)

COMPAT_TOL = 1e-9


@dataclass(frozen=True)
class VariationSample:
    """Normal components ``f`` of a variation, one array per leaf (leaf 1
    first), each sampled at ``n + 1`` equispaced nodes over ``[0, length]``.

    The conormal value at a junction is not stored: it is implied by the
    endpoint values through ``h1 = (f_b - f_a) / sqrt3``, where ``a``/``b``
    are the phase-2/phase-3 leaves of that junction.
    """

    f: tuple[np.ndarray, ...]
    lengths: tuple[float, ...]

    def __post_init__(self):
        if len(self.f) != 5 or len(self.lengths) != 5:
            raise ShapeError("a variation needs exactly five leaves")
        arrays = tuple(np.asarray(a, dtype=float) for a in self.f)
        sizes = {a.shape for a in arrays}
        if len(sizes) != 1 or arrays[0].ndim != 1 or arrays[0].size < 2:
            raise ShapeError(f"leaf arrays must be 1-D of equal size >= 2, got shapes {[a.shape for a in arrays]}")
        if not all(length > 0 for length in self.lengths):
            raise ShapeError("leaf lengths must be positive")
        object.__setattr__(self, "f", arrays)
        object.__setattr__(self, "lengths", tuple(float(v) for v in self.lengths))

    @classmethod
    def zeros(cls, config: PartitionConfig, n: int) -> "VariationSample":
        return cls(tuple(np.zeros(n + 1) for _ in range(5)), leaf_lengths(config))

    @classmethod
    def from_function(cls, config: PartitionConfig, n: int, funcs) -> "VariationSample":
        """Sample ``funcs[i](s)`` (vectorized callables) on each leaf."""
        lengths = leaf_lengths(config)
        return cls(tuple(np.asarray(fn(np.linspace(0, ln, n + 1)), float) for fn, ln in zip(funcs, lengths)), lengths)

    @property
    def n(self) -> int:
        return self.f[0].size - 1

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(ln / self.n for ln in self.lengths)

    def spine_end(self, junction: int) -> tuple[float, float, float]:
        """``(f1, f_a, f_b)`` at a junction."""
        _, a, b = JUNCTION_LEAVES[junction]
        f1 = self.f[0][0] if junction == 1 else self.f[0][-1]
        return float(f1), float(self.f[a - 1][0]), float(self.f[b - 1][0])

    def spine(self, junction: int) -> SpineTrace:
        f1, fa, _ = self.spine_end(junction)
        return spine_transform(f1, conormal_from_normals(f1, fa))

    def compatibility_residuals(self) -> tuple[float, float]:
        return tuple(sum(self.spine_end(j)) for j in (1, 2))

    def scaled(self, c: float) -> "VariationSample":
        return VariationSample(tuple(c * a for a in self.f), self.lengths)

    def as_vector(self) -> np.ndarray:
        return np.concatenate(self.f)


def leaf_lengths(config: PartitionConfig) -> tuple[float, ...]:
    return tuple(config.leaf(i).length for i in range(1, 6))


def trapezoid_weights(n: int, length: float) -> np.ndarray:
    w = np.full(n + 1, length / n)
    w[0] *= 0.5
    w[-1] *= 0.5
    return w


def _check_shapes(config: PartitionConfig, v: VariationSample) -> None:
    for got, want in zip(v.lengths, leaf_lengths(config)):
        if abs(got - want) > 1e-12 * max(1.0, want):
            raise ShapeError(f"variation lengths {v.lengths} do not match the configuration")


def _check_compat(v: VariationSample) -> None:
    for j, r in zip((1, 2), v.compatibility_residuals()):
        if abs(r) > COMPAT_TOL:
            raise ConstraintError(f"spine compatibility violated at junction {j}: residual {r:.3e}")


def eval_J(config: PartitionConfig, v: VariationSample) -> float:
    """Second variation of a discretized variation.

    Bulk terms use cell differences for ``f'`` (the exact Dirichlet energy
    of the piecewise-linear interpolant) and the trapezoid rule for ``f^2``.
    The result equals ``v^T A v`` for the oracle's stiffness matrix ``A``.
    """
    _check_shapes(config, v)
    _check_compat(v)
    total = 0.0
    for leaf_id, (arr, h) in enumerate(zip(v.f, v.spacing), start=1):
        k = config.leaf_kappa(leaf_id)
        d = np.diff(arr)
        total += float(d @ d) / h - k * k * float(trapezoid_weights(v.n, v.lengths[leaf_id - 1]) @ (arr * arr))
        leaf = config.leaf(leaf_id)
        if leaf.meets_wall and leaf.sigma_wall:
            total -= leaf.sigma_wall * arr[-1] ** 2
    for j in (1, 2):
        alpha, beta = alpha_beta(config, j)
        tr = v.spine(j)
        total += alpha * (tr.f1**2 - tr.h1**2) + 2.0 * beta * tr.f1 * tr.h1
    return total


class Constraints(NamedTuple):
    vol2: float
    vol3: float
    norm: float


def constraint_residuals(config: PartitionConfig, v: VariationSample) -> Constraints:
    """Volume residuals and ``sum int f^2 - 1``.

    ``vol3 = -int f1 + int f2 + int f4`` and ``vol2 = -int f1 + int f3 +
    int f5``: each phase region is bounded by leaf 1 and one arc per
    junction, and the label follows the phase whose area is conserved.
    """
    _check_shapes(config, v)
    ints, sq = [], 0.0
    for arr, ln in zip(v.f, v.lengths):
        w = trapezoid_weights(v.n, ln)
        ints.append(float(w @ arr))
        sq += float(w @ (arr * arr))
    return Constraints(-ints[0] + ints[2] + ints[4], -ints[0] + ints[1] + ints[3], sq - 1.0)


# ---------------------------------------------------------------------------
# constant-variation screen


class ScreenResult(NamedTuple):
    """``j_min`` is the smallest value of ``J`` over unit-norm admissible
    piecewise-constant variations; ``j_min <= 0`` proves instability, a
    positive value proves nothing."""

    j_min: float
    feasible: bool
    params: tuple[float, float, float]


def _constant_leaf_map(config: PartitionConfig) -> np.ndarray:
    """Constant value on each leaf as a linear map of ``(f, h1, h2)``."""
    c = SQRT3 / 2
    return np.array(
        [
            [1.0, 0.0, 0.0],
            [-0.5, -c, 0.0],
            [-0.5, c, 0.0],
            [-0.5, 0.0, -c],
            [-0.5, 0.0, c],
        ]
    )


def constant_variation_screen(config: PartitionConfig) -> ScreenResult:
    """Minimize ``J`` over variations that are constant on every leaf.

    The family is parametrized by the common normal value ``f`` on leaf 1
    and the conormal values ``h1``, ``h2`` at the two junctions; the curved
    leaves follow from the spine transform.  ``feasible`` reports whether
    the volume constraints admit a member with ``f != 0``; when they do
    not, the search runs on the remaining ``f = 0`` branch.
    """
    P = _constant_leaf_map(config)
    lengths = np.array(leaf_lengths(config))
    kap2 = np.array([config.leaf_kappa(i) ** 2 for i in range(1, 6)])
    vol = np.array([[-1, 1, 0, 1, 0], [-1, 0, 1, 0, 1]], dtype=float) * lengths
    Z = sla.null_space(vol @ P)
    feasible = bool(np.any(np.abs(Z[0]) > 1e-12))
    if Z.shape[1] == 0:
        return ScreenResult(math.inf, False, (0.0, 0.0, 0.0))
    # bulk: -kappa^2 * length * value^2 per leaf; junctions: alpha (f^2 - h^2)
    Q = P.T @ np.diag(-kap2 * lengths) @ P
    for j, col in ((1, 1), (2, 2)):
        alpha, beta = alpha_beta(config, j)
        e_f, e_h = np.eye(3)[0], np.eye(3)[col]
        Q += alpha * (np.outer(e_f, e_f) - np.outer(e_h, e_h)) + beta * (np.outer(e_f, e_h) + np.outer(e_h, e_f))
    N = P.T @ np.diag(lengths) @ P
    w, vecs = sla.eigh(Z.T @ Q @ Z, Z.T @ N @ Z)
    p = Z @ vecs[:, 0]
    return ScreenResult(float(w[0]), feasible, tuple(float(t) for t in p))


def screen_sample(config: PartitionConfig, params, n: int) -> VariationSample:
    """Nodal representation of a member of the constant family."""
    vals = _constant_leaf_map(config) @ np.asarray(params, dtype=float)
    return VariationSample(tuple(np.full(n + 1, c) for c in vals), leaf_lengths(config))
