"""Input probability laws: bounded marginals, moments, and sampling.

Two marginal families are supported, uniform and truncated normal, both on
bounded supports.  The joint law of the input vector is the product of its
marginals.  Moments and orthogonality integrals elsewhere in the package
are computed with a fixed 64-node Gauss-Legendre rule on the support,
which is exact for polynomial integrands up to degree 127.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from statistics import NormalDist

import numpy as np
from scipy.special import ndtr, ndtri

QUAD_NODES = 64

_STD_NORMAL = NormalDist()


def _phi(u):
    return math.exp(-0.5 * u * u) / math.sqrt(2.0 * math.pi)


def _Phi(u):
    return 0.5 * (1.0 + math.erf(u / math.sqrt(2.0)))


class Marginal:
    """Common interface of one-dimensional bounded distributions."""

    lower: float
    upper: float

    def pdf(self, x: float) -> float:
        raise NotImplementedError

    def cdf(self, x: float) -> float:
        raise NotImplementedError

    def inv_cdf(self, p: float) -> float:
        raise NotImplementedError

    def inv_cdf_array(self, p: np.ndarray) -> np.ndarray:
        return np.array([self.inv_cdf(v) for v in np.asarray(p, dtype=float)])

    def scaled(self, factor: float) -> "Marginal":
        """Distribution of ``factor * X``; ``factor`` must be positive."""
        raise NotImplementedError

    def quadrature(self, n: int = QUAD_NODES):
        """Gauss-Legendre nodes on the support with pdf-weighted weights."""
        nodes, weights = np.polynomial.legendre.leggauss(n)
        half = 0.5 * (self.upper - self.lower)
        mid = 0.5 * (self.upper + self.lower)
        x = mid + half * nodes
        w = half * weights * np.array([self.pdf(v) for v in x])
        return x, w

    def raw_moment(self, order: int) -> float:
        """E[X^order] by fixed-order quadrature on the bounded support."""
        if order < 0:
            raise ValueError("moment order must be non-negative")
        x, w = self.quadrature()
        return float(np.sum(w * x**order))

    def mean(self) -> float:
        return self.raw_moment(1)


@dataclass(frozen=True)
class Uniform(Marginal):
    lower: float
    upper: float

    def __post_init__(self):
        if not self.lower < self.upper:
            raise ValueError("uniform marginal requires lower < upper")

    def pdf(self, x):
        if self.lower <= x <= self.upper:
            return 1.0 / (self.upper - self.lower)
        return 0.0

    def cdf(self, x):
        if x <= self.lower:
            return 0.0
        if x >= self.upper:
            return 1.0
        return (x - self.lower) / (self.upper - self.lower)

    def inv_cdf(self, p):
        return self.lower + p * (self.upper - self.lower)

    def inv_cdf_array(self, p):
        return self.lower + np.asarray(p, dtype=float) * (self.upper - self.lower)

    def scaled(self, factor):
        if factor <= 0:
            raise ValueError("scale factor must be positive")
        return Uniform(self.lower * factor, self.upper * factor)

    def mean(self):
        return 0.5 * (self.lower + self.upper)


@dataclass(frozen=True)
class TruncatedNormal(Marginal):
    """Normal(mu, sd) restricted to [lower, upper].

    ``mu`` and ``sd`` are the parameters of the parent normal; the sd is a
    stored field, so changing the location does not silently rescale it.
    """

    mu: float
    sd: float
    lower: float
    upper: float

    def __post_init__(self):
        if not self.lower < self.upper:
            raise ValueError("truncated normal requires lower < upper")
        if self.sd <= 0:
            raise ValueError("truncated normal requires sd > 0")
        if not self.lower <= self.mu <= self.upper:
            raise ValueError("truncated normal requires lower <= mu <= upper")

    def _mass(self):
        a = (self.lower - self.mu) / self.sd
        b = (self.upper - self.mu) / self.sd
        return _Phi(b) - _Phi(a)

    def pdf(self, x):
        if x < self.lower or x > self.upper:
            return 0.0
        return _phi((x - self.mu) / self.sd) / (self.sd * self._mass())

    def cdf(self, x):
        if x <= self.lower:
            return 0.0
        if x >= self.upper:
            return 1.0
        a = (self.lower - self.mu) / self.sd
        return (_Phi((x - self.mu) / self.sd) - _Phi(a)) / self._mass()

    def inv_cdf(self, p):
        if p <= 0.0:
            return self.lower
        if p >= 1.0:
            return self.upper
        # seed the bracket with the untruncated quantile, then bisect
        a = (self.lower - self.mu) / self.sd
        mass = self._mass()
        q = _Phi(a) + p * mass
        if 0.0 < q < 1.0:
            guess = self.mu + self.sd * _STD_NORMAL.inv_cdf(q)
            guess = min(max(guess, self.lower), self.upper)
        else:
            guess = 0.5 * (self.lower + self.upper)
        lo, hi = self.lower, self.upper
        if self.cdf(guess) < p:
            lo = guess
        else:
            hi = guess
        tol = 1e-12 * max(1.0, abs(self.upper - self.lower))
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if self.cdf(mid) < p:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    def inv_cdf_array(self, p):
        a = (self.lower - self.mu) / self.sd
        mass = self._mass()
        q = ndtr(a) + np.asarray(p, dtype=float) * mass
        x = self.mu + self.sd * ndtri(np.clip(q, 1e-300, 1.0 - 1e-16))
        return np.clip(x, self.lower, self.upper)

    def scaled(self, factor):
        if factor <= 0:
            raise ValueError("scale factor must be positive")
        return TruncatedNormal(
            self.mu * factor, self.sd * factor, self.lower * factor, self.upper * factor
        )


@dataclass(frozen=True)
class InputLaw:
    """Product law of independent bounded marginals."""

    marginals: tuple[Marginal, ...]

    def __post_init__(self):
        if len(self.marginals) < 1:
            raise ValueError("at least one marginal is required")
        object.__setattr__(self, "marginals", tuple(self.marginals))

    @property
    def dim(self):
        return len(self.marginals)

    def scaled(self, factors) -> "InputLaw":
        factors = np.asarray(factors, dtype=float)
        if factors.shape != (self.dim,):
            raise ValueError("one scale factor per dimension is required")
        return InputLaw(tuple(m.scaled(f) for m, f in zip(self.marginals, factors)))

    def sample_lhs(self, n_samples: int, seed: int) -> np.ndarray:
        """Latin hypercube sample: one point per equiprobable stratum per
        dimension, mapped through each marginal's inverse CDF."""
        if n_samples < 1:
            raise ValueError("n_samples must be >= 1")
        rng = np.random.default_rng(seed)
        out = np.empty((n_samples, self.dim))
        for i, m in enumerate(self.marginals):
            perm = rng.permutation(n_samples)
            jitter = rng.random(n_samples)
            probs = (perm + jitter) / n_samples
            out[:, i] = m.inv_cdf_array(probs)
        return out

    def sample_iid(self, n_samples: int, seed: int) -> np.ndarray:
        """Plain Monte Carlo sample via per-dimension inverse CDF."""
        if n_samples < 1:
            raise ValueError("n_samples must be >= 1")
        rng = np.random.default_rng(seed)
        u = rng.random((n_samples, self.dim))
        out = np.empty_like(u)
        for i, m in enumerate(self.marginals):
            out[:, i] = m.inv_cdf_array(u[:, i])
        return out
