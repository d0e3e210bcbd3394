"""Truncated multivariate basis: index set enumeration and design matrices.

The truncation keeps interactions among at most S variables and, per
retained subset U, degree vectors with every component >= 1 and total
degree <= m.  That yields C(m, |U|) degree vectors per subset and a total
basis count of

    L(N, S, m) = 1 + sum_{s=1}^{S} C(N, s) * C(m, s).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import comb

import numpy as np

from . import _kernels
from .errors import DimensionMismatch, InvalidTruncation
from .orthopoly import OrthoBasis1D


def count_L(N: int, S: int, m: int) -> int:
    """Closed-form size of the truncated basis."""
    if not 1 <= S <= N:
        raise InvalidTruncation(f"need 1 <= S <= N, got S={S}, N={N}")
    if m < S:
        raise InvalidTruncation(f"need m >= S, got m={m}, S={S}")
    return 1 + sum(comb(N, s) * comb(m, s) for s in range(1, S + 1))


def _degree_vectors(size, m):
    """All vectors of ``size`` positive integers with sum <= m, in
    lexicographic order."""
    if size == 0:
        yield ()
        return
    for first in range(1, m - size + 2):
        for rest in _degree_vectors(size - 1, m - first):
            yield (first,) + rest


@dataclass(frozen=True)
class MultiIndexSet:
    """Ordered truncated basis: the constant entry first, then entries
    sorted by subset size, subset, and degree vector.

    Each entry is ``(variables, degrees)`` with 0-based variable indices;
    the constant entry is ``((), ())``.
    """

    N: int
    S: int
    m: int
    entries: tuple[tuple[tuple[int, ...], tuple[int, ...]], ...]

    def __len__(self):
        return len(self.entries)

    def padded_arrays(self):
        """(L, S) int arrays of variable indices and degrees, padded with -1."""
        L = len(self.entries)
        var_idx = np.full((L, self.S), -1, dtype=np.int64)
        deg_idx = np.full((L, self.S), -1, dtype=np.int64)
        for k, (variables, degrees) in enumerate(self.entries):
            for s, (i, j) in enumerate(zip(variables, degrees)):
                var_idx[k, s] = i
                deg_idx[k, s] = j
        return var_idx, deg_idx


def build_index_set(N: int, S: int, m: int) -> MultiIndexSet:
    """Enumerate the truncated basis in canonical order."""
    total = count_L(N, S, m)
    entries = [((), ())]
    for s in range(1, S + 1):
        for subset in combinations(range(N), s):
            for degrees in _degree_vectors(s, m):
                entries.append((subset, degrees))
    if len(entries) != total:
        raise AssertionError("enumeration disagrees with the closed-form count")
    return MultiIndexSet(N=N, S=S, m=m, entries=tuple(entries))


def design_matrix(
    bases: list[OrthoBasis1D], idx: MultiIndexSet, Z: np.ndarray
) -> np.ndarray:
    """Matrix of multivariate basis values at the rows of ``Z``; shape (M, L)."""
    Z = np.asarray(Z, dtype=float)
    if Z.ndim != 2:
        raise DimensionMismatch("Z must be a 2-D array of samples")
    if len(bases) != idx.N or Z.shape[1] != idx.N:
        raise DimensionMismatch(
            f"expected {idx.N} dimensions, got {len(bases)} bases and "
            f"{Z.shape[1]} sample columns"
        )
    n_samples = Z.shape[0]
    tables = np.empty((idx.N, idx.m + 1, n_samples))
    for i, basis in enumerate(bases):
        if basis.max_degree < idx.m:
            raise DimensionMismatch(
                f"basis {i} supports degree {basis.max_degree} < m={idx.m}"
            )
        tables[i] = basis.eval_table(Z[:, i])[: idx.m + 1]
    var_idx, deg_idx = idx.padded_arrays()
    return _kernels.basis_products(tables, var_idx, deg_idx)
