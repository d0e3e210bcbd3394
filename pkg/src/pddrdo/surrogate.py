"""Fixed-measure surrogate: input scaling, fitting, moments, retraining.

Inputs X are scaled to Z = diag(r) X so that every scaled design variable
has unit mean; the polynomial bases live on the Z measures of the initial
design and are never rebuilt.  Changing the design only rescales sample
coordinates, which lets the surrogate synthesize outputs at a new design
from the coefficients fitted at the old one (single-pass retraining).
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DimensionMismatch, NonFiniteInput
from .measures import Marginal, TruncatedNormal, Uniform
from .orthopoly import OrthoBasis1D, build_basis
from .pdd import MultiIndexSet, build_index_set, design_matrix
from .regression import SDMorphConfig, lasso, sdmorph_fit, select_penalty


class FitMethod(Enum):
    LASSO = "lasso"
    SDMORPH = "sdmorph"


def validate_transform(r: np.ndarray) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    if r.ndim != 1 or not np.all(np.isfinite(r)) or np.any(r <= 0):
        raise ValueError("transform vector must be 1-D, finite, and positive")
    return r


def transform_x_to_z(x: np.ndarray, r: np.ndarray) -> np.ndarray:
    """Component-wise scaling z_i = r_i * x_i (rows of ``x`` if 2-D)."""
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise NonFiniteInput("non-finite input point")
    return x * validate_transform(r)


def rescale_inputs(Z: np.ndarray, r: np.ndarray, r_new: np.ndarray) -> np.ndarray:
    """Re-express samples drawn under scales ``r`` in the coordinates of
    ``r_new``: Z'[:, i] = (r_i / r_new_i) * Z[:, i]."""
    Z = np.asarray(Z, dtype=float)
    return Z * (validate_transform(r) / validate_transform(r_new))


@dataclass(frozen=True)
class TrainingSet:
    """Scaled samples with their outputs and the scales they were drawn at."""

    Z: np.ndarray
    h: np.ndarray
    r: np.ndarray

    def __post_init__(self):
        Z = np.asarray(self.Z, dtype=float)
        h = np.asarray(self.h, dtype=float)
        r = validate_transform(self.r)
        if Z.ndim != 2 or h.ndim != 1 or Z.shape[0] != h.shape[0]:
            raise DimensionMismatch("Z must be M x N with matching outputs")
        if Z.shape[1] != r.shape[0]:
            raise DimensionMismatch("transform length must match Z columns")
        if not (np.all(np.isfinite(Z)) and np.all(np.isfinite(h))):
            raise NonFiniteInput("non-finite training data")
        object.__setattr__(self, "Z", Z)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "r", r)


@dataclass(frozen=True)
class PDDSurrogate:
    """Orthonormal expansion with coefficients fitted at scales ``r``."""

    bases: tuple[OrthoBasis1D, ...]
    idx: MultiIndexSet
    c: np.ndarray
    r: np.ndarray

    def __post_init__(self):
        if len(self.c) != len(self.idx):
            raise DimensionMismatch("coefficient length must equal basis count")
        object.__setattr__(self, "c", np.asarray(self.c, dtype=float))
        object.__setattr__(self, "r", validate_transform(self.r))

    def predict(self, z: np.ndarray):
        """Surrogate value at one point (1-D ``z``) or per row (2-D)."""
        z = np.asarray(z, dtype=float)
        single = z.ndim == 1
        A = design_matrix(list(self.bases), self.idx, np.atleast_2d(z))
        out = A @ self.c
        return float(out[0]) if single else out

    def moments(self) -> tuple[float, float]:
        """(mean, variance) read off the coefficients: the constant term and
        the sum of squares of the rest."""
        return float(self.c[0]), float(self.c[1:] @ self.c[1:])

    def basis_fingerprint(self) -> str:
        """Content hash of the bases; unchanged across a whole run."""
        digest = hashlib.sha256()
        for basis in self.bases:
            digest.update(basis.recurrence_alpha.tobytes())
            digest.update(basis.recurrence_beta.tobytes())
            digest.update(basis.norms.tobytes())
        return digest.hexdigest()


def build_bases(
    marginals: list[Marginal], r: np.ndarray, m: int
) -> tuple[OrthoBasis1D, ...]:
    """One orthonormal family per dimension, on the scaled (Z) measures."""
    r = validate_transform(r)
    if len(marginals) != r.shape[0]:
        raise DimensionMismatch("one scale per marginal is required")
    return tuple(
        build_basis(marg.scaled(ri), m) for marg, ri in zip(marginals, r)
    )


def fit(
    train: TrainingSet,
    bases: tuple[OrthoBasis1D, ...],
    idx: MultiIndexSet,
    cfg: SDMorphConfig,
    method: FitMethod = FitMethod.SDMORPH,
    prior: np.ndarray | None = None,
) -> PDDSurrogate:
    """Estimate expansion coefficients from scaled input-output data."""
    if train.Z.shape[0] < 2:
        raise ValueError("at least two training samples are required")
    A = design_matrix(list(bases), idx, train.Z)
    if method is FitMethod.LASSO:
        penalty = (
            cfg.lasso_penalty
            if cfg.lasso_penalty is not None
            else select_penalty(A, train.h, cfg)
        )
        c = lasso(A, train.h, penalty)
    else:
        c = sdmorph_fit(A, train.h, cfg, prior=prior).coefficients
    return PDDSurrogate(bases=bases, idx=idx, c=c, r=train.r)


def single_pass_retrain(
    s: PDDSurrogate,
    train: TrainingSet,
    r_new: np.ndarray,
    cfg: SDMorphConfig,
    method: FitMethod = FitMethod.SDMORPH,
) -> PDDSurrogate:
    """Coefficients at new scales ``r_new`` without new model evaluations.

    Outputs at the new design are synthesized by evaluating the existing
    surrogate at rescaled sample coordinates; the refit then runs on the
    original coordinates.  The previous coefficients seed the refit, which
    makes the identity rescale an exact fixed point.
    """
    r_new = validate_transform(r_new)
    z_shifted = rescale_inputs(train.Z, s.r, r_new)
    h_synth = s.predict(z_shifted)
    synth = TrainingSet(Z=train.Z, h=h_synth, r=r_new)
    prior = s.c if method is FitMethod.SDMORPH else None
    return fit(synth, s.bases, s.idx, cfg, method, prior=prior)


# ---------------------------------------------------------------------------
# plain-text serialization (bit-exact via hexadecimal floats)


def _fmt(values):
    return " ".join(float(v).hex() for v in np.atleast_1d(values))


def _parse(text):
    return np.array([float.fromhex(tok) for tok in text.split()])


def _marginal_line(m: Marginal) -> str:
    if isinstance(m, Uniform):
        return f"uniform {_fmt([m.lower, m.upper])}"
    if isinstance(m, TruncatedNormal):
        return f"truncnormal {_fmt([m.mu, m.sd, m.lower, m.upper])}"
    raise TypeError(f"unknown marginal type {type(m)!r}")


def _marginal_from_line(line: str) -> Marginal:
    kind, rest = line.split(None, 1)
    vals = _parse(rest)
    if kind == "uniform":
        return Uniform(*vals)
    if kind == "truncnormal":
        return TruncatedNormal(*vals)
    raise ValueError(f"unknown marginal kind {kind!r}")


def serialize(s: PDDSurrogate) -> str:
    """Self-describing text form of a surrogate; round-trips bit-exactly."""
    idx = s.idx
    lines = ["pddrdo-surrogate v1", f"dims {idx.N} {idx.S} {idx.m}"]
    for basis in s.bases:
        lines.append("marginal " + _marginal_line(basis.measure))
    for basis in s.bases:
        lines.append("alpha " + _fmt(basis.recurrence_alpha))
        lines.append("beta " + _fmt(basis.recurrence_beta))
        lines.append("norms " + _fmt(basis.norms))
    for variables, degrees in idx.entries:
        lines.append(
            "entry "
            + ",".join(map(str, variables))
            + " "
            + ",".join(map(str, degrees))
        )
    lines.append("r " + _fmt(s.r))
    lines.append("c " + _fmt(s.c))
    return "\n".join(lines) + "\n"


def deserialize(text: str) -> PDDSurrogate:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != "pddrdo-surrogate v1":
        raise ValueError("not a surrogate document")
    _, n_str, s_str, m_str = lines[1].split()
    N, S, m = int(n_str), int(s_str), int(m_str)
    marginals, alphas, betas, norms, entries = [], [], [], [], []
    r = c = None
    for line in lines[2:]:
        tag, _, rest = line.partition(" ")
        if tag == "marginal":
            marginals.append(_marginal_from_line(rest))
        elif tag == "alpha":
            alphas.append(_parse(rest))
        elif tag == "beta":
            betas.append(_parse(rest))
        elif tag == "norms":
            norms.append(_parse(rest))
        elif tag == "entry":
            var_part, _, deg_part = rest.partition(" ")
            variables = tuple(int(v) for v in var_part.split(",") if v)
            degrees = tuple(int(v) for v in deg_part.split(",") if v)
            entries.append((variables, degrees))
        elif tag == "r":
            r = _parse(rest)
        elif tag == "c":
            c = _parse(rest)
        else:
            raise ValueError(f"unknown record {tag!r}")
    if len(marginals) != N or len(alphas) != N or r is None or c is None:
        raise ValueError("incomplete surrogate document")
    bases = tuple(
        OrthoBasis1D(
            max_degree=m,
            recurrence_alpha=a,
            recurrence_beta=bt,
            norms=h,
            measure=marg,
        )
        for marg, a, bt, h in zip(marginals, alphas, betas, norms)
    )
    idx = MultiIndexSet(N=N, S=S, m=m, entries=tuple(entries))
    expected = build_index_set(N, S, m)
    if idx.entries != expected.entries:
        raise ValueError("index set does not match the canonical ordering")
    return PDDSurrogate(bases=bases, idx=idx, c=c, r=r)
