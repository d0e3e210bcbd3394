"""Derivative-free robust design optimization on top of the surrogate.

The driver samples the physics model (or ingests a dataset) once at the
initial design, fits the surrogate, and then optimizes the weighted
mean/standard-deviation objective with Nelder-Mead.  Every design visited
during the optimization is evaluated by single-pass retraining of the
surrogate; the physics model is never called again.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NonPositiveMean, OutOfBounds
from .measures import InputLaw
from .pdd import build_index_set
from .qoi import Dataset
from .regression import SDMorphConfig
from .surrogate import (
    FitMethod,
    PDDSurrogate,
    TrainingSet,
    build_bases,
    fit,
    single_pass_retrain,
    transform_x_to_z,
)

PENALTY_OBJECTIVE = 1e9


@dataclass(frozen=True)
class DesignSpace:
    """Box bounds for the design variables plus the map from design
    dimension k to the input dimension whose mean it scales."""

    bounds: np.ndarray  # (n, 2)
    input_index_map: tuple[int, ...]

    def __post_init__(self):
        bounds = np.asarray(self.bounds, dtype=float)
        if bounds.ndim != 2 or bounds.shape[1] != 2:
            raise ValueError("bounds must be an (n, 2) array")
        if np.any(bounds[:, 0] >= bounds[:, 1]):
            raise ValueError("each design bound needs lower < upper")
        if len(self.input_index_map) != bounds.shape[0]:
            raise ValueError("one input index per design dimension")
        if len(set(self.input_index_map)) != len(self.input_index_map):
            raise ValueError("input indices must be distinct")
        object.__setattr__(self, "bounds", bounds)
        object.__setattr__(self, "input_index_map", tuple(self.input_index_map))

    @property
    def n(self):
        return self.bounds.shape[0]

    def contains(self, d):
        d = np.asarray(d, dtype=float)
        return bool(
            np.all(d >= self.bounds[:, 0]) and np.all(d <= self.bounds[:, 1])
        )

    def clip(self, d):
        return np.clip(np.asarray(d, dtype=float), self.bounds[:, 0], self.bounds[:, 1])


@dataclass(frozen=True)
class NelderMeadParams:
    reflection: float = 1.0
    expansion: float = 2.0
    contraction: float = 0.5
    shrink: float = 0.5
    simplex_scale: float = 0.05  # fraction of box width per dimension
    tol: float = 1e-6
    max_evals: int = 2000


@dataclass(frozen=True)
class TrajectoryPoint:
    iteration: int
    d: np.ndarray
    objective: float
    mean: float
    sd: float


@dataclass(frozen=True)
class RDOResult:
    w1: float
    w2: float
    d_star: np.ndarray
    objective_star: float
    mean_star: float
    sd_star: float
    trajectory: tuple[TrajectoryPoint, ...]
    converged: bool
    evaluations: int
    qoi_calls: int


def objective(mean, sd, w1, w2, mu0, sigma0):
    """Weighted reciprocal-mean plus normalized standard deviation."""
    if mean <= 0:
        raise NonPositiveMean(f"mean={mean}")
    if sd < 0:
        raise ValueError("sd must be non-negative")
    return w1 * mu0 / mean + w2 * sd / sigma0


def r_from_design(d, nominal_means, space: DesignSpace):
    """Transform scales: reciprocal of the design value on design dims,
    reciprocal of the nominal mean elsewhere."""
    d = np.asarray(d, dtype=float)
    if not space.contains(d):
        raise OutOfBounds(f"design {d} outside the design space")
    if np.any(d <= 0):
        raise OutOfBounds("design values must be positive")
    r = 1.0 / np.asarray(nominal_means, dtype=float)
    for k, i in enumerate(space.input_index_map):
        r[i] = 1.0 / d[k]
    return r


def evaluate_design(
    d,
    base: PDDSurrogate,
    train: TrainingSet,
    cfg: SDMorphConfig,
    nominal_means,
    space: DesignSpace,
    method: FitMethod = FitMethod.SDMORPH,
):
    """(mean, sd) of the output at design ``d`` by single-pass retraining."""
    r_new = r_from_design(d, nominal_means, space)
    retrained = single_pass_retrain(base, train, r_new, cfg, method)
    mean, var = retrained.moments()
    return mean, float(np.sqrt(var))


def nelder_mead(f, d0, space: DesignSpace, params: NelderMeadParams):
    """Simplex search with component-wise clipping to the box bounds.

    Returns ``(d_star, f_star, evaluations, converged)``.  Terminates when
    both the simplex diameter and the objective spread drop below ``tol``,
    or when the evaluation budget runs out.
    """
    d0 = space.clip(d0)
    n = space.n
    evals = 0

    def feval(x):
        nonlocal evals
        evals += 1
        return f(space.clip(x))

    simplex = [d0.astype(float)]
    widths = space.bounds[:, 1] - space.bounds[:, 0]
    for k in range(n):
        vertex = d0.copy()
        step = params.simplex_scale * widths[k]
        if vertex[k] + step > space.bounds[k, 1]:
            step = -step
        vertex[k] += step
        simplex.append(space.clip(vertex))
    values = [feval(v) for v in simplex]

    converged = False
    while evals < params.max_evals:
        order = np.argsort(values, kind="stable")
        simplex = [simplex[i] for i in order]
        values = [values[i] for i in order]

        diameter = max(
            float(np.max(np.abs(v - simplex[0]))) for v in simplex[1:]
        )
        spread = abs(values[-1] - values[0])
        if diameter < params.tol and spread < params.tol:
            converged = True
            break

        centroid = np.mean(simplex[:-1], axis=0)
        worst = simplex[-1]
        reflected = space.clip(centroid + params.reflection * (centroid - worst))
        f_ref = feval(reflected)
        if f_ref < values[0]:
            expanded = space.clip(centroid + params.expansion * (reflected - centroid))
            f_exp = feval(expanded)
            if f_exp < f_ref:
                simplex[-1], values[-1] = expanded, f_exp
            else:
                simplex[-1], values[-1] = reflected, f_ref
        elif f_ref < values[-2]:
            simplex[-1], values[-1] = reflected, f_ref
        else:
            if f_ref < values[-1]:
                contracted = space.clip(
                    centroid + params.contraction * (reflected - centroid)
                )
            else:
                contracted = space.clip(
                    centroid + params.contraction * (worst - centroid)
                )
            f_con = feval(contracted)
            if f_con < min(f_ref, values[-1]):
                simplex[-1], values[-1] = contracted, f_con
            else:
                best = simplex[0]
                for i in range(1, n + 1):
                    simplex[i] = space.clip(
                        best + params.shrink * (simplex[i] - best)
                    )
                    values[i] = feval(simplex[i])

    best_i = int(np.argmin(values))
    return simplex[best_i], values[best_i], evals, converged


@dataclass
class RunState:
    """Initial fit shared by every weight case of a sweep."""

    law: InputLaw
    space: DesignSpace
    nominal_means: np.ndarray
    d0: np.ndarray
    base: PDDSurrogate
    train: TrainingSet
    reg_cfg: SDMorphConfig
    method: FitMethod
    mu0: float
    sigma0: float
    qoi_calls: int
    training_r2: float = float("nan")
    _cache: dict = field(default_factory=dict)

    def design_moments(self, d):
        key = tuple(np.asarray(d, dtype=float))
        if key not in self._cache:
            self._cache[key] = evaluate_design(
                d, self.base, self.train, self.reg_cfg,
                self.nominal_means, self.space, self.method,
            )
        return self._cache[key]


def prepare_run(
    source,
    law: InputLaw,
    space: DesignSpace,
    nominal_means,
    d0,
    S: int,
    m: int,
    n_train: int,
    seed: int,
    reg_cfg: SDMorphConfig,
    method: FitMethod = FitMethod.SDMORPH,
) -> RunState:
    """Sample (or ingest) the training data at the initial design and fit
    the surrogate.  ``source`` is either a callable model mapping an (M, N)
    input matrix to M outputs, or a ready-made :class:`Dataset`."""
    nominal_means = np.asarray(nominal_means, dtype=float)
    d0 = np.asarray(d0, dtype=float)
    if not space.contains(d0):
        raise OutOfBounds(f"initial design {d0} outside the design space")

    if isinstance(source, Dataset):
        X, Q = source.X, source.Q
        qoi_calls = 0
    else:
        X = law.sample_lhs(n_train, seed)
        Q = np.asarray(source(X), dtype=float)
        qoi_calls = X.shape[0]

    r0 = r_from_design(d0, nominal_means, space)
    Z = transform_x_to_z(X, r0)
    bases = build_bases(list(law.marginals), r0, m)
    idx = build_index_set(law.dim, S, m)
    train = TrainingSet(Z=Z, h=Q, r=r0)
    base = fit(train, bases, idx, reg_cfg, method)

    from .regression import r_squared

    training_r2 = r_squared(base.predict(Z), Q)

    state = RunState(
        law=law, space=space, nominal_means=nominal_means, d0=d0,
        base=base, train=train, reg_cfg=reg_cfg, method=method,
        mu0=float("nan"), sigma0=float("nan"), qoi_calls=qoi_calls,
        training_r2=training_r2,
    )
    mean0, sd0 = state.design_moments(d0)
    if mean0 <= 0:
        raise NonPositiveMean(f"initial-design mean {mean0} is not positive")
    if sd0 == 0:
        raise ValueError("initial-design standard deviation is zero")
    state.mu0 = mean0
    state.sigma0 = sd0
    return state


def optimize_weights(
    state: RunState, w1: float, w2: float, nm: NelderMeadParams
) -> RDOResult:
    """Nelder-Mead on the normalized objective for one weight pair."""
    if abs(w1 + w2 - 1.0) > 1e-12 or w1 < 0 or w2 < 0:
        raise ValueError("weights must be non-negative and sum to one")

    trajectory = []

    def f(d):
        mean, sd = state.design_moments(d)
        try:
            value = objective(mean, sd, w1, w2, state.mu0, state.sigma0)
        except NonPositiveMean:
            value = PENALTY_OBJECTIVE
        trajectory.append(
            TrajectoryPoint(
                iteration=len(trajectory), d=np.array(d), objective=value,
                mean=mean, sd=sd,
            )
        )
        return value

    # first trajectory entry is the normalized initial design
    f(state.d0)
    d_star, f_star, evals, converged = nelder_mead(f, state.d0, state.space, nm)
    mean_star, sd_star = state.design_moments(d_star)
    return RDOResult(
        w1=w1, w2=w2, d_star=np.asarray(d_star), objective_star=float(f_star),
        mean_star=mean_star, sd_star=sd_star, trajectory=tuple(trajectory),
        converged=converged, evaluations=evals, qoi_calls=state.qoi_calls,
    )


def run_rdo(
    source,
    law: InputLaw,
    space: DesignSpace,
    nominal_means,
    d0,
    w1: float,
    w2: float,
    S: int,
    m: int,
    n_train: int,
    seed: int,
    reg_cfg: SDMorphConfig,
    nm: NelderMeadParams | None = None,
    method: FitMethod = FitMethod.SDMORPH,
) -> RDOResult:
    """Full pipeline for a single weight pair."""
    state = prepare_run(
        source, law, space, nominal_means, d0, S, m, n_train, seed, reg_cfg,
        method,
    )
    return optimize_weights(state, w1, w2, nm or NelderMeadParams())


def pareto_sweep(
    weights,
    source,
    law: InputLaw,
    space: DesignSpace,
    nominal_means,
    d0,
    S: int,
    m: int,
    n_train: int,
    seed: int,
    reg_cfg: SDMorphConfig,
    nm: NelderMeadParams | None = None,
    method: FitMethod = FitMethod.SDMORPH,
) -> list[RDOResult]:
    """Run every weight pair from one shared initial fit."""
    state = prepare_run(
        source, law, space, nominal_means, d0, S, m, n_train, seed, reg_cfg,
        method,
    )
    nm = nm or NelderMeadParams()
    return [optimize_weights(state, w1, w2, nm) for w1, w2 in weights]
