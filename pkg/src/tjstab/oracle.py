"""Brute-force eigenvalue check of the constrained second variation.

Nothing here uses the closed-form families: the form is discretized with
linear elements on every leaf, the four linear constraints (two spine
compatibility rows, two volume rows) are removed by an orthogonal
projection, and the projected matrix goes to a dense symmetric solver.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.linalg as sla

from .errors import ConstraintError, DomainError, NumericalError
from .geometry import JUNCTION_LEAVES, SQRT3, PartitionConfig, alpha_beta
from .variation import VariationSample, leaf_lengths, trapezoid_weights

COND_LIMIT = 1e12


@dataclass(frozen=True)
class DiscretizedProblem:
    """Quadratic forms ``A`` (second variation) and ``B`` (L2 norm, lumped)
    with constraint rows ``C``; ``offsets[i]`` is the first global index of
    leaf ``i + 1``."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    n: int
    lengths: tuple[float, ...]
    offsets: tuple[int, ...]
    leaf_kappa2: tuple[float, ...] = ()
    junction_coeffs: tuple[tuple[float, float], ...] = ()
    wall_sigma: tuple[float, ...] = ()

    @property
    def size(self) -> int:
        return self.A.shape[0]

    @property
    def reduced_size(self) -> int:
        return self.size - self.C.shape[0]

    def node(self, leaf: int, i: int) -> int:
        return self.offsets[leaf - 1] + (i if i >= 0 else self.n + 1 + i)

    def quadratic_form(self, vec: np.ndarray) -> float:
        """``vec^T A vec`` evaluated leaf by leaf from differences, which
        avoids the cancellation of the assembled ``1/h`` entries."""
        m = self.n + 1
        total = 0.0
        for i, off in enumerate(self.offsets):
            f = vec[off : off + m]
            d = np.diff(f)
            w = trapezoid_weights(self.n, self.lengths[i])
            total += float(d @ d) / (self.lengths[i] / self.n) - self.leaf_kappa2[i] * float(w @ (f * f))
            total -= self.wall_sigma[i] * f[-1] ** 2
        for j, (alpha, beta) in zip((1, 2), self.junction_coeffs):
            _, la, lb = JUNCTION_LEAVES[j]
            f1 = vec[self.offsets[0] + (0 if j == 1 else self.n)]
            h1 = (vec[self.offsets[lb - 1]] - vec[self.offsets[la - 1]]) / SQRT3
            total += alpha * (f1 * f1 - h1 * h1) + 2.0 * beta * f1 * h1
        return total

    def to_sample(self, vec: np.ndarray) -> VariationSample:
        m = self.n + 1
        return VariationSample(tuple(np.array(vec[o : o + m]) for o in self.offsets), self.lengths)


def discretize(config: PartitionConfig, n: int) -> DiscretizedProblem:
    """Assemble the discrete problem with ``n`` cells on every leaf."""
    if not isinstance(n, (int, np.integer)) or n < 8:
        raise DomainError(f"n must be an integer >= 8, got {n!r}")
    m = n + 1
    lengths = leaf_lengths(config)
    offsets = tuple(i * m for i in range(5))
    N = 5 * m
    A = np.zeros((N, N))
    b = np.zeros(N)
    for leaf_id, (ln, off) in enumerate(zip(lengths, offsets), start=1):
        h = ln / n
        w = trapezoid_weights(n, ln)
        idx = np.arange(off, off + m)
        diag = np.full(m, 2.0 / h)
        diag[0] = diag[-1] = 1.0 / h
        k = config.leaf_kappa(leaf_id)
        A[idx, idx] += diag - k * k * w
        A[idx[:-1], idx[1:]] -= 1.0 / h
        A[idx[1:], idx[:-1]] -= 1.0 / h
        b[idx] = w
        leaf = config.leaf(leaf_id)
        if leaf.meets_wall and leaf.sigma_wall:
            A[idx[-1], idx[-1]] -= leaf.sigma_wall

    rows = []
    for j in (1, 2):
        alpha, beta = alpha_beta(config, j)
        _, la, lb = JUNCTION_LEAVES[j]
        i1 = offsets[0] if j == 1 else offsets[0] + n
        ia, ib = offsets[la - 1], offsets[lb - 1]
        e1 = np.zeros(N)
        e1[i1] = 1.0
        # conormal on leaf 1, valid on the compatibility constraint
        eh = np.zeros(N)
        eh[ib], eh[ia] = 1.0 / SQRT3, -1.0 / SQRT3
        A += alpha * (np.outer(e1, e1) - np.outer(eh, eh)) + beta * (np.outer(e1, eh) + np.outer(eh, e1))
        c = np.zeros(N)
        c[[i1, ia, ib]] = 1.0
        rows.append(c)
    for phase_leaves in ((2, 4), (3, 5)):
        c = np.zeros(N)
        c[offsets[0] : offsets[0] + m] = -trapezoid_weights(n, lengths[0])
        for p in phase_leaves:
            c[offsets[p - 1] : offsets[p - 1] + m] = trapezoid_weights(n, lengths[p - 1])
        rows.append(c)
    return DiscretizedProblem(
        A,
        np.diag(b),
        np.array(rows),
        n,
        lengths,
        offsets,
        tuple(config.leaf_kappa(i) ** 2 for i in range(1, 6)),
        tuple(alpha_beta(config, j) for j in (1, 2)),
        tuple(config.leaf(i).sigma_wall or 0.0 for i in range(1, 6)),
    )


def _householder_null_projection(M: np.ndarray, G: np.ndarray):
    """Return ``(Q^T M Q)[r:, r:]`` and the reflectors, where ``Q`` is the
    orthogonal factor of ``G^T`` (``r`` rows of ``G``)."""
    M = M.copy()
    V = G.T.copy()
    r = G.shape[0]
    N = M.shape[0]
    reflectors = []
    rdiag = []
    for i in range(r):
        x = V[i:, i]
        alpha = -math.copysign(np.linalg.norm(x), x[0] if x[0] != 0 else 1.0)
        v = np.zeros(N)
        v[i:] = x
        v[i] -= alpha
        nv = np.linalg.norm(v)
        rdiag.append(abs(alpha))
        if nv == 0:
            reflectors.append(None)
            continue
        v /= nv
        reflectors.append(v)
        V -= 2.0 * np.outer(v, v @ V)
        w = M @ v
        c = v @ w
        u = 2.0 * w - 2.0 * c * v
        M -= np.outer(v, u)
        M -= np.outer(u, v)
    rdiag = np.array(rdiag)
    if r and rdiag.min() <= 1e-12 * rdiag.max():
        raise ConstraintError("constraint rows are linearly dependent")
    return M[r:, r:], reflectors


def _apply_q(reflectors, y: np.ndarray) -> np.ndarray:
    y = y.copy()
    for v in reversed(reflectors):
        if v is not None:
            y -= 2.0 * np.outer(v, v @ y) if y.ndim == 2 else 2.0 * v * (v @ y)
    return y


class Eigenpairs(NamedTuple):
    values: np.ndarray
    vectors: np.ndarray  # columns, B-orthonormal, in the full nodal space


def eigenpairs(problem: DiscretizedProblem, k: int = 1) -> Eigenpairs:
    """Smallest ``k`` eigenpairs of ``A`` on ``{C f = 0}`` relative to ``B``."""
    b = np.diag(problem.B).copy()
    if np.any(b <= 0) or not np.allclose(problem.B, np.diag(b)):
        raise NumericalError("mass matrix must be diagonal positive")
    if b.max() / b.min() > COND_LIMIT:
        raise NumericalError(f"mass matrix condition {b.max() / b.min():.3e} exceeds {COND_LIMIT:.0e}")
    s = 1.0 / np.sqrt(b)
    Ms = problem.A * np.outer(s, s)
    G = problem.C * s
    red, refl = _householder_null_projection(Ms, G)
    red = 0.5 * (red + red.T)
    k = min(k, red.shape[0])
    vals, vecs = sla.eigh(red, subset_by_index=[0, k - 1])
    r = problem.C.shape[0]
    full = np.zeros((problem.size, k))
    full[r:] = vecs
    f = _apply_q(refl, full) * s[:, None]
    # Rayleigh quotients in the original coordinates: the dense solver's
    # eigenvalues carry an error of order eps * ||B^-1/2 A B^-1/2||, which
    # grows like 1/h^2, while the quotient of the returned vector does not
    bf = b[:, None] * f
    f /= np.sqrt(np.einsum("ij,ij->j", f, bf))
    rq = np.array([problem.quadratic_form(f[:, i]) for i in range(k)])
    order = np.argsort(rq)
    return Eigenpairs(rq[order], f[:, order])


def min_eigenvalue(problem: DiscretizedProblem) -> tuple[float, VariationSample]:
    """Smallest constrained eigenvalue and its unit-norm eigenvector."""
    vals, vecs = eigenpairs(problem, 1)
    return float(vals[0]), problem.to_sample(vecs[:, 0])


def eigenvalues(config: PartitionConfig, n: int, k: int = 4) -> np.ndarray:
    return eigenpairs(discretize(config, n), k).values


class RichardsonResult(NamedTuple):
    mu: np.ndarray
    coarse: np.ndarray
    fine: np.ndarray
    n: int


def richardson(config: PartitionConfig, n: int, k: int = 1) -> RichardsonResult:
    """Second-order extrapolation ``(4 mu_2n - mu_n) / 3`` of the lowest
    ``k`` eigenvalues."""
    coarse = eigenvalues(config, n, k)
    fine = eigenvalues(config, 2 * n, k)
    return RichardsonResult((4.0 * fine - coarse) / 3.0, coarse, fine, n)
