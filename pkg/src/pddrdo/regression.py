"""Coefficient estimation for underdetermined basis expansions.

Provides LASSO by cyclic coordinate descent, cross-validated penalty
selection, SVD-based pseudoinverse utilities, and the sparsity-promoting
iterative regression that starts from the LASSO estimate and refines it
on the solution manifold {c : Ac = b} using reweighted projections.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels
from .errors import (
    DegenerateActuals,
    InsufficientData,
    NonFiniteInput,
    SvdFailure,
)

LASSO_TOL = 1e-10
LASSO_MAX_SWEEPS = 10_000


@dataclass(frozen=True)
class SDMorphConfig:
    """Knobs for the sparse manifold regression and its LASSO warm start.

    ``lam`` blends the LASSO prior against the previous iterate in the
    reweighted cost; ``epsilon`` regularizes the reciprocal weights;
    ``rank_tol`` is the relative singular-value cutoff used by every
    pseudoinverse in the pipeline.
    """

    lam: float = 0.2
    epsilon: float = 1e-6
    min_iters: int = 10
    max_iters: int = 50
    rel_tol: float = 1e-6
    rank_tol: float = 1e-10
    lasso_penalty: float | None = None
    cv_folds: int = 5
    cv_grid: tuple[float, ...] = (1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0)
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError("lam must lie in [0, 1]")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.min_iters > self.max_iters:
            raise ValueError("min_iters must not exceed max_iters")
        if len(self.cv_grid) == 0:
            raise ValueError("cv_grid must be non-empty")


@dataclass(frozen=True)
class SDMorphResult:
    coefficients: np.ndarray
    iterations: int
    converged: bool
    lasso_coefficients: np.ndarray = field(repr=False, default=None)
    lasso_penalty: float = float("nan")


def _check_finite(*arrays):
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise NonFiniteInput("non-finite entries in regression input")


def lasso(A: np.ndarray, b: np.ndarray, k: float) -> np.ndarray:
    """Minimize ``|b - Ac|^2 + k * sum_i |c_i|`` by coordinate descent."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    _check_finite(A, b)
    if k < 0:
        raise ValueError("penalty k must be non-negative")
    c, _, _ = _kernels.lasso_cd(A, b, k, LASSO_TOL, LASSO_MAX_SWEEPS)
    return c


def select_penalty(A: np.ndarray, b: np.ndarray, cfg: SDMorphConfig) -> float:
    """Pick the grid penalty with the lowest k-fold cross-validated squared
    prediction error.  Fold assignment is a seeded permutation, so the
    choice is deterministic."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    if cfg.cv_folds < 2:
        raise ValueError("cv_folds must be >= 2")
    if len(cfg.cv_grid) == 1:
        return float(cfg.cv_grid[0])
    n = A.shape[0]
    if n < cfg.cv_folds:
        raise InsufficientData(
            f"{n} samples cannot be split into {cfg.cv_folds} folds"
        )
    rng = np.random.default_rng(cfg.seed)
    order = rng.permutation(n)
    folds = np.array_split(order, cfg.cv_folds)
    errors = np.zeros(len(cfg.cv_grid))
    for fold in folds:
        mask = np.ones(n, dtype=bool)
        mask[fold] = False
        for gi, k in enumerate(cfg.cv_grid):
            c = lasso(A[mask], b[mask], k)
            resid = b[fold] - A[fold] @ c
            errors[gi] += float(resid @ resid)
    return float(cfg.cv_grid[int(np.argmin(errors))])


def pseudoinverse(A: np.ndarray, rank_tol: float = 1e-10) -> np.ndarray:
    """Moore-Penrose inverse with relative singular-value truncation."""
    A = np.asarray(A, dtype=float)
    try:
        U, s, Vt = np.linalg.svd(A, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise SvdFailure(str(exc)) from exc
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((A.shape[1], A.shape[0]))
    inv_s = np.where(s > rank_tol * s[0], 1.0 / np.where(s > 0, s, 1.0), 0.0)
    return (Vt.T * inv_s) @ U.T


def null_projector(A: np.ndarray, rank_tol: float = 1e-10) -> np.ndarray:
    """Orthogonal projector onto the null space of ``A``."""
    A = np.asarray(A, dtype=float)
    return np.eye(A.shape[1]) - pseudoinverse(A, rank_tol) @ A


def dmorph_init(
    A: np.ndarray, b: np.ndarray, c0: np.ndarray, rank_tol: float = 1e-10
) -> np.ndarray:
    """Point of the solution manifold closest to ``c0`` in Euclidean norm."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    c0 = np.asarray(c0, dtype=float)
    Ap = pseudoinverse(A, rank_tol)
    base = Ap @ b
    return base + (c0 - base) - Ap @ (A @ (c0 - base))


def _manifold_step(base, null_basis, W, target):
    """Minimizer of the W-weighted distance to ``target`` over the affine
    manifold ``base + range(null_basis)``.

    Solved as a least-squares problem in the null-space coordinates with
    square-root weights, which stays well conditioned even when the
    reweighting spans many orders of magnitude.
    """
    sqrt_w = np.sqrt(W)
    y, *_ = np.linalg.lstsq(
        sqrt_w[:, None] * null_basis, sqrt_w * (target - base), rcond=None
    )
    return base + null_basis @ y


def sdmorph_fit(
    A: np.ndarray,
    b: np.ndarray,
    cfg: SDMorphConfig,
    prior: np.ndarray | None = None,
) -> SDMorphResult:
    """Sparsity-promoting manifold regression.

    Starts from the LASSO estimate (or a supplied ``prior``), projects it
    onto the solution manifold, then iterates reweighted least-distance
    steps whose diagonal weights are reciprocals of the current coefficient
    magnitudes.  The first weight is pinned to zero so the constant term is
    never penalized.  Each iterate is re-projected onto the manifold, so the
    least-squares residual of the underlying system is preserved.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    _check_finite(A, b)
    L = A.shape[1]

    if prior is not None:
        c0 = np.asarray(prior, dtype=float)
        penalty = float("nan")
    else:
        penalty = (
            cfg.lasso_penalty
            if cfg.lasso_penalty is not None
            else select_penalty(A, b, cfg)
        )
        c0 = lasso(A, b, penalty)

    # one SVD of A yields the particular solution and the null-space basis
    try:
        U, s, Vt = np.linalg.svd(A, full_matrices=True)
    except np.linalg.LinAlgError as exc:
        raise SvdFailure(str(exc)) from exc
    rank = int(np.sum(s > cfg.rank_tol * s[0])) if s.size and s[0] > 0 else 0
    coef = np.zeros(L)
    coef[:rank] = (U.T @ b)[:rank] / s[:rank]
    base = Vt.T @ coef  # minimum-norm least-squares solution
    null_basis = Vt[rank:].T  # (L, L - rank), orthonormal columns

    def project(c):
        return base + null_basis @ (null_basis.T @ (c - base))

    c_prev = project(c0)
    iterations = 0
    converged = False
    if null_basis.shape[1] == 0:
        # full column rank: the manifold is the single least-squares point
        return SDMorphResult(
            coefficients=base, iterations=0, converged=True,
            lasso_coefficients=c0, lasso_penalty=penalty,
        )
    for i in range(cfg.max_iters):
        weights = np.empty(L)
        weights[0] = 0.0
        weights[1:] = 1.0 / (np.abs(c_prev[1:]) + cfg.epsilon)
        target = cfg.lam * c0 + (1.0 - cfg.lam) * c_prev
        c_next = _manifold_step(base, null_basis, weights, target)
        iterations = i + 1
        denom = np.linalg.norm(c_prev)
        change = np.linalg.norm(c_next - c_prev) / (denom if denom > 0 else 1.0)
        c_prev = c_next
        if iterations >= cfg.min_iters and change < cfg.rel_tol:
            converged = True
            break

    return SDMorphResult(
        coefficients=c_prev,
        iterations=iterations,
        converged=converged,
        lasso_coefficients=c0,
        lasso_penalty=penalty,
    )


def r_squared(predicted, actual) -> float:
    """Coefficient of determination, 1 - SS_res / SS_tot."""
    predicted = np.asarray(predicted, dtype=float)
    actual = np.asarray(actual, dtype=float)
    if predicted.shape != actual.shape or actual.size < 2:
        raise ValueError("predicted and actual must be equal-length, size >= 2")
    ss_tot = float(np.sum((actual - actual.mean()) ** 2))
    if ss_tot == 0.0:
        raise DegenerateActuals("actual values are constant")
    ss_res = float(np.sum((actual - predicted) ** 2))
    return 1.0 - ss_res / ss_tot
