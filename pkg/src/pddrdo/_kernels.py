"""Hot numeric kernels with optional numba acceleration.

Each kernel has a pure-numpy implementation and, when numba is importable
and the environment variable ``PDDRDO_NO_NUMBA`` is unset (or "0"), an
``@njit``-compiled twin.  Both paths compute the same quantities; the
selected implementation is fixed at import time and reported by
``backend_name()``.
"""

import os

import numpy as np

_USE_NUMBA = os.environ.get("PDDRDO_NO_NUMBA", "0") in ("", "0")

if _USE_NUMBA:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover
        _USE_NUMBA = False

if not _USE_NUMBA:
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(f):
            return f

        return wrap


def backend_name():
    return "numba" if _USE_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# univariate orthonormal polynomial tables


def _poly_table_numpy(alpha, beta, inv_sqrt_h, z):
    m = len(alpha)
    z = np.asarray(z, dtype=np.float64)
    table = np.empty((m + 1, z.size), dtype=np.float64)
    table[0] = 1.0
    if m >= 1:
        table[1] = z - alpha[0]
    for j in range(1, m):
        table[j + 1] = (z - alpha[j]) * table[j] - beta[j] * table[j - 1]
    return table * inv_sqrt_h[:, None]


@njit(cache=True)
def _poly_table_numba(alpha, beta, inv_sqrt_h, z):  # pragma: no cover
    m = alpha.shape[0]
    n = z.shape[0]
    table = np.empty((m + 1, n), dtype=np.float64)
    for col in range(n):
        zc = z[col]
        table[0, col] = 1.0
        if m >= 1:
            table[1, col] = zc - alpha[0]
        for j in range(1, m):
            table[j + 1, col] = (zc - alpha[j]) * table[j, col] - beta[j] * table[j - 1, col]
        for j in range(m + 1):
            table[j, col] *= inv_sqrt_h[j]
    return table


def poly_table(alpha, beta, inv_sqrt_h, z):
    """Evaluate monic three-term recurrence, normalized, for degrees 0..m.

    Returns an ``(m+1, len(z))`` array whose row j holds the orthonormal
    polynomial of degree j at every point of ``z``.
    """
    alpha = np.ascontiguousarray(alpha, dtype=np.float64)
    beta = np.ascontiguousarray(beta, dtype=np.float64)
    inv_sqrt_h = np.ascontiguousarray(inv_sqrt_h, dtype=np.float64)
    z = np.ascontiguousarray(np.atleast_1d(z), dtype=np.float64)
    if _USE_NUMBA:
        return _poly_table_numba(alpha, beta, inv_sqrt_h, z)
    return _poly_table_numpy(alpha, beta, inv_sqrt_h, z)


# ---------------------------------------------------------------------------
# multivariate basis products (design matrix assembly)


def _basis_products_numpy(tables, var_idx, deg_idx):
    n_samples = tables.shape[2]
    n_basis = var_idx.shape[0]
    out = np.ones((n_samples, n_basis), dtype=np.float64)
    for k in range(n_basis):
        for s in range(var_idx.shape[1]):
            i = var_idx[k, s]
            if i < 0:
                break
            out[:, k] *= tables[i, deg_idx[k, s], :]
    return out


@njit(cache=True)
def _basis_products_numba(tables, var_idx, deg_idx):  # pragma: no cover
    n_samples = tables.shape[2]
    n_basis = var_idx.shape[0]
    max_vars = var_idx.shape[1]
    out = np.ones((n_samples, n_basis), dtype=np.float64)
    for k in range(n_basis):
        for s in range(max_vars):
            i = var_idx[k, s]
            if i < 0:
                break
            j = deg_idx[k, s]
            for row in range(n_samples):
                out[row, k] *= tables[i, j, row]
    return out


def basis_products(tables, var_idx, deg_idx):
    """Assemble the design matrix from per-dimension polynomial tables.

    ``tables`` is ``(N, m+1, M)``; ``var_idx``/``deg_idx`` are ``(L, S)``
    integer arrays padded with -1 beyond each entry's variable count.
    """
    tables = np.ascontiguousarray(tables, dtype=np.float64)
    var_idx = np.ascontiguousarray(var_idx, dtype=np.int64)
    deg_idx = np.ascontiguousarray(deg_idx, dtype=np.int64)
    if _USE_NUMBA:
        return _basis_products_numba(tables, var_idx, deg_idx)
    return _basis_products_numpy(tables, var_idx, deg_idx)


# ---------------------------------------------------------------------------
# LASSO cyclic coordinate descent


def _lasso_cd_numpy(A, b, k, tol, max_sweeps):
    n_cols = A.shape[1]
    col_norms = np.einsum("ij,ij->j", A, A)
    c = np.zeros(n_cols)
    resid = b.copy()
    half_k = 0.5 * k
    for sweep in range(max_sweeps):
        max_change = 0.0
        for j in range(n_cols):
            nj = col_norms[j]
            if nj == 0.0:
                continue
            old = c[j]
            rho = A[:, j] @ resid + nj * old
            if rho > half_k:
                new = (rho - half_k) / nj
            elif rho < -half_k:
                new = (rho + half_k) / nj
            else:
                new = 0.0
            if new != old:
                resid -= A[:, j] * (new - old)
                c[j] = new
                change = abs(new - old)
                if change > max_change:
                    max_change = change
        if max_change < tol:
            return c, sweep + 1, True
    return c, max_sweeps, False


@njit(cache=True)
def _lasso_cd_numba(A, b, k, tol, max_sweeps):  # pragma: no cover
    n_rows, n_cols = A.shape
    col_norms = np.empty(n_cols)
    for j in range(n_cols):
        s = 0.0
        for i in range(n_rows):
            s += A[i, j] * A[i, j]
        col_norms[j] = s
    c = np.zeros(n_cols)
    resid = b.copy()
    half_k = 0.5 * k
    for sweep in range(max_sweeps):
        max_change = 0.0
        for j in range(n_cols):
            nj = col_norms[j]
            if nj == 0.0:
                continue
            old = c[j]
            rho = nj * old
            for i in range(n_rows):
                rho += A[i, j] * resid[i]
            if rho > half_k:
                new = (rho - half_k) / nj
            elif rho < -half_k:
                new = (rho + half_k) / nj
            else:
                new = 0.0
            if new != old:
                delta = new - old
                for i in range(n_rows):
                    resid[i] -= A[i, j] * delta
                c[j] = new
                change = abs(delta)
                if change > max_change:
                    max_change = change
        if max_change < tol:
            return c, sweep + 1, True
    return c, max_sweeps, False


def lasso_cd(A, b, k, tol=1e-10, max_sweeps=10_000):
    """Cyclic coordinate descent for ``min |b - Ac|^2 + k * sum |c_i|``.

    Returns ``(c, sweeps, converged)``.
    """
    A = np.ascontiguousarray(A, dtype=np.float64)
    b = np.ascontiguousarray(b, dtype=np.float64)
    if _USE_NUMBA:
        return _lasso_cd_numba(A, b, float(k), float(tol), int(max_sweeps))
    return _lasso_cd_numpy(A, b, float(k), float(tol), int(max_sweeps))
