"""Measure-consistent univariate orthonormal polynomial families.

Recurrence coefficients are obtained with the Stieltjes procedure on a
64-node Gauss-Legendre discretization of the marginal's measure.  The
monic recurrence is

    p_{j+1}(z) = (z - alpha_j) p_j(z) - beta_j p_{j-1}(z),

and the orthonormal family is psi_j = p_j / sqrt(h_j) with h_j the squared
norm of the monic p_j under the measure.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import DegenerateMeasure, DegreeOutOfRange
from .measures import Marginal


@dataclass(frozen=True)
class OrthoBasis1D:
    """Orthonormal polynomial basis up to ``max_degree`` for one marginal."""

    max_degree: int
    recurrence_alpha: np.ndarray  # alpha_0 .. alpha_{m-1}
    recurrence_beta: np.ndarray   # beta_0 (unused, 0) .. beta_{m-1}
    norms: np.ndarray             # h_0 .. h_m
    measure: Marginal
    _inv_sqrt_norms: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "_inv_sqrt_norms", 1.0 / np.sqrt(self.norms))

    def eval_table(self, z) -> np.ndarray:
        """Values of psi_0..psi_m at every point of ``z``; shape (m+1, len(z))."""
        return _kernels.poly_table(
            self.recurrence_alpha, self.recurrence_beta, self._inv_sqrt_norms, z
        )

    def eval(self, degree: int, z: float) -> float:
        if not 0 <= degree <= self.max_degree:
            raise DegreeOutOfRange(
                f"degree {degree} outside [0, {self.max_degree}]"
            )
        return float(self.eval_table(np.array([float(z)]))[degree, 0])


def build_basis(measure: Marginal, max_degree: int) -> OrthoBasis1D:
    """Stieltjes construction of the orthonormal family for ``measure``."""
    if max_degree < 0:
        raise ValueError("max_degree must be >= 0")
    x, w = measure.quadrature()
    if max_degree >= x.size:
        # n quadrature atoms support at most n orthonormal polynomials
        raise DegenerateMeasure(
            f"degree {max_degree} exceeds the {x.size}-node quadrature support"
        )
    m = max_degree
    alpha = np.zeros(max(m, 1))
    beta = np.zeros(max(m, 1))
    h = np.zeros(m + 1)

    p_prev = np.zeros_like(x)
    p_cur = np.ones_like(x)
    h0 = float(np.sum(w))
    h[0] = h0
    hj = h0
    for j in range(m):
        alpha[j] = float(np.sum(w * x * p_cur * p_cur)) / hj
        p_next = (x - alpha[j]) * p_cur - (beta[j] if j > 0 else 0.0) * p_prev
        h_next = float(np.sum(w * p_next * p_next))
        if h_next <= 0.0 or not np.isfinite(h_next):
            raise DegenerateMeasure(
                f"norm of degree-{j + 1} polynomial is non-positive; "
                f"degree {max_degree} exceeds the quadrature resolution"
            )
        h[j + 1] = h_next
        if j + 1 < len(beta):
            beta[j + 1] = h_next / hj
        p_prev, p_cur, hj = p_cur, p_next, h_next

    return OrthoBasis1D(
        max_degree=m,
        recurrence_alpha=alpha[:m].copy() if m else np.zeros(0),
        recurrence_beta=beta[:m].copy() if m else np.zeros(0),
        norms=h,
        measure=measure,
    )


def gram_matrix(basis: OrthoBasis1D) -> np.ndarray:
    """Quadrature Gram matrix of the orthonormal family; identity up to
    quadrature error."""
    x, w = basis.measure.quadrature()
    table = basis.eval_table(x)
    return (table * w) @ table.T


def eval_poly(basis: OrthoBasis1D, degree: int, z: float) -> float:
    """Orthonormal polynomial of ``degree`` evaluated at ``z``."""
    return basis.eval(degree, z)
