"""Command-line front end: reproducible batch runs emitting CSV results.

Subcommands:

* ``sample``    draw a Latin hypercube input sample at the initial design
* ``train``     fit a surrogate from a dataset CSV and serialize it
* ``optimize``  run the weighted-objective optimization per weight pair
* ``verify``    compare surrogate moments against a Monte Carlo oracle

Configuration is a TOML document; unknown keys are rejected.  Exit codes:
0 success, 2 configuration or data error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import PddRdoError, ConfigError, NonFiniteInput
from .measures import InputLaw, Marginal, TruncatedNormal, Uniform
from .qoi import (
    Dataset,
    NOMINAL_MEANS,
    SyntheticKind,
    load_dataset,
    mc_moments,
    reference_law,
    save_dataset,
    synthetic_qoi,
)
from .rdo import (
    DesignSpace,
    NelderMeadParams,
    RDOResult,
    RunState,
    optimize_weights,
    prepare_run,
    r_from_design,
)
from .regression import SDMorphConfig, r_squared
from .surrogate import (
    FitMethod,
    TrainingSet,
    deserialize,
    serialize,
    transform_x_to_z,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

DEFAULT_WEIGHTS = ((1.0, 0.0), (0.75, 0.25), (0.5, 0.5), (0.25, 0.75), (0.0, 1.0))


@dataclass(frozen=True)
class RunConfig:
    law: InputLaw
    nominal_means: np.ndarray
    space: DesignSpace
    d0: np.ndarray
    qoi_kind: str              # "poly" | "nonpoly" | "dataset"
    S: int
    m: int
    method: FitMethod
    n_train: int
    seed: int
    regression: SDMorphConfig
    weights: tuple[tuple[float, float], ...]
    nm: NelderMeadParams
    out_dir: str
    surrogate_path: str
    dataset_path: str

    def model(self):
        if self.qoi_kind == "dataset":
            return None
        kind = SyntheticKind.POLY if self.qoi_kind == "poly" else SyntheticKind.NONPOLY
        return lambda x: synthetic_qoi(x, kind, check_support=False)


def _require_keys(section, allowed, where):
    unknown = set(section) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) {sorted(unknown)} in [{where}]")


def _marginal_from_table(entry) -> Marginal:
    kind = entry.get("kind")
    if kind == "uniform":
        _require_keys(entry, {"kind", "lower", "upper"}, "problem.marginals")
        return Uniform(entry["lower"], entry["upper"])
    if kind == "truncnormal":
        _require_keys(
            entry, {"kind", "mu", "sd", "lower", "upper"}, "problem.marginals"
        )
        return TruncatedNormal(entry["mu"], entry["sd"], entry["lower"], entry["upper"])
    raise ConfigError(f"unknown marginal kind {kind!r}")


def load_config(path) -> RunConfig:
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc

    _require_keys(doc, {"problem", "surrogate", "regression", "rdo", "io"}, "root")

    prob = doc.get("problem", {})
    _require_keys(
        prob,
        {"qoi", "dataset", "marginals", "nominal_means", "design_dims",
         "design_bounds"},
        "problem",
    )
    if "marginals" in prob:
        law = InputLaw(tuple(_marginal_from_table(e) for e in prob["marginals"]))
    else:
        law = reference_law()
    nominal = np.asarray(
        prob.get("nominal_means", NOMINAL_MEANS[: law.dim]), dtype=float
    )
    if nominal.shape != (law.dim,):
        raise ConfigError("nominal_means length must match the marginal count")
    design_dims = prob.get("design_dims", [2, 3])
    index_map = tuple(int(i) - 1 for i in design_dims)
    if any(not 0 <= i < law.dim for i in index_map):
        raise ConfigError("design_dims must be 1-based input dimensions")
    bounds = np.asarray(
        prob.get("design_bounds", [[0.625, 1.025], [5.0e-4, 1.1e-3]]), dtype=float
    )
    try:
        space = DesignSpace(bounds=bounds, input_index_map=index_map)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    qoi_kind = prob.get("qoi", "poly")
    if qoi_kind not in ("poly", "nonpoly", "dataset"):
        raise ConfigError(f"unknown qoi kind {qoi_kind!r}")

    surr = doc.get("surrogate", {})
    _require_keys(surr, {"S", "m", "method", "n_train", "seed"}, "surrogate")
    method_name = surr.get("method", "sdmorph")
    try:
        method = FitMethod(method_name)
    except ValueError:
        raise ConfigError(f"unknown fit method {method_name!r}") from None

    reg = doc.get("regression", {})
    _require_keys(
        reg,
        {"lam", "epsilon", "min_iters", "max_iters", "rel_tol", "rank_tol",
         "lasso_penalty", "cv_folds", "cv_grid", "seed"},
        "regression",
    )
    try:
        reg_cfg = SDMorphConfig(
            lam=reg.get("lam", 0.2),
            epsilon=reg.get("epsilon", 1e-6),
            min_iters=reg.get("min_iters", 10),
            max_iters=reg.get("max_iters", 50),
            rel_tol=reg.get("rel_tol", 1e-6),
            rank_tol=reg.get("rank_tol", 1e-10),
            lasso_penalty=reg.get("lasso_penalty"),
            cv_folds=reg.get("cv_folds", 5),
            cv_grid=tuple(reg.get("cv_grid", SDMorphConfig().cv_grid)),
            seed=reg.get("seed", 0),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    rdo = doc.get("rdo", {})
    _require_keys(rdo, {"weights", "d0", "nelder_mead"}, "rdo")
    weights = tuple(
        (float(w[0]), float(w[1])) for w in rdo.get("weights", DEFAULT_WEIGHTS)
    )
    for w1, w2 in weights:
        if abs(w1 + w2 - 1.0) > 1e-12 or w1 < 0 or w2 < 0:
            raise ConfigError(f"weights ({w1}, {w2}) must be >= 0 and sum to 1")
    d0 = np.asarray(rdo.get("d0", [0.825, 8.0e-4]), dtype=float)
    if d0.shape != (space.n,):
        raise ConfigError("d0 length must match the design dimension")
    nm_tab = rdo.get("nelder_mead", {})
    _require_keys(
        nm_tab,
        {"reflection", "expansion", "contraction", "shrink", "simplex_scale",
         "tol", "max_evals"},
        "rdo.nelder_mead",
    )
    nm = NelderMeadParams(
        reflection=nm_tab.get("reflection", 1.0),
        expansion=nm_tab.get("expansion", 2.0),
        contraction=nm_tab.get("contraction", 0.5),
        shrink=nm_tab.get("shrink", 0.5),
        simplex_scale=nm_tab.get("simplex_scale", 0.05),
        tol=nm_tab.get("tol", 1e-6),
        max_evals=nm_tab.get("max_evals", 2000),
    )

    io = doc.get("io", {})
    _require_keys(io, {"out_dir", "surrogate_path", "dataset_path"}, "io")

    return RunConfig(
        law=law,
        nominal_means=nominal,
        space=space,
        d0=d0,
        qoi_kind=qoi_kind,
        S=surr.get("S", 2),
        m=surr.get("m", 11),
        method=method,
        n_train=surr.get("n_train", 200),
        seed=surr.get("seed", 42),
        regression=reg_cfg,
        weights=weights,
        nm=nm,
        out_dir=io.get("out_dir", "."),
        surrogate_path=io.get("surrogate_path", "surrogate.txt"),
        dataset_path=io.get("dataset_path", prob.get("dataset", "")),
    )


# ---------------------------------------------------------------------------
# subcommands


def cmd_sample(cfg: RunConfig, out_path, seed=None) -> int:
    seed = cfg.seed if seed is None else seed
    X = cfg.law.sample_lhs(cfg.n_train, seed)
    model = cfg.model()
    if model is not None:
        Q = np.asarray(model(X), dtype=float)
    else:
        Q = np.zeros(X.shape[0])
    save_dataset(out_path, Dataset(X=X, Q=Q))
    print(f"wrote {X.shape[0]} samples to {out_path}")
    return EXIT_OK


def _state_from_dataset(cfg: RunConfig, dataset: Dataset) -> RunState:
    return prepare_run(
        dataset, cfg.law, cfg.space, cfg.nominal_means, cfg.d0,
        cfg.S, cfg.m, cfg.n_train, cfg.seed, cfg.regression, cfg.method,
    )


def cmd_train(cfg: RunConfig, data_path, out_path) -> int:
    dataset = load_dataset(data_path)
    state = _state_from_dataset(cfg, dataset)
    Path(out_path).write_text(serialize(state.base), encoding="utf-8")
    mean, var = state.base.moments()
    print(f"mean {mean!r}")
    print(f"sd {float(np.sqrt(var))!r}")
    print(f"training_r2 {state.training_r2!r}")
    print(f"surrogate {out_path}")
    return EXIT_OK


def _load_state(cfg: RunConfig, surrogate_path, data_path) -> RunState:
    base = deserialize(Path(surrogate_path).read_text(encoding="utf-8"))
    dataset = load_dataset(data_path)
    r0 = r_from_design(cfg.d0, cfg.nominal_means, cfg.space)
    if not np.allclose(r0, base.r, rtol=1e-12):
        raise ConfigError(
            "surrogate was fitted at different scales than the configured d0"
        )
    Z = transform_x_to_z(dataset.X, base.r)
    train = TrainingSet(Z=Z, h=dataset.Q, r=base.r)
    state = RunState(
        law=cfg.law, space=cfg.space, nominal_means=cfg.nominal_means,
        d0=cfg.d0, base=base, train=train, reg_cfg=cfg.regression,
        method=cfg.method, mu0=float("nan"), sigma0=float("nan"),
        qoi_calls=0,
        training_r2=r_squared(base.predict(Z), dataset.Q),
    )
    mean0, sd0 = state.design_moments(cfg.d0)
    state.mu0, state.sigma0 = mean0, sd0
    return state


def _write_trajectory(path, result: RDOResult, n_design: int) -> None:
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        cols = ["iteration"] + [f"d{k + 1}" for k in range(n_design)]
        cols += ["objective", "mean", "sd"]
        fh.write(",".join(cols) + "\n")
        for p in result.trajectory:
            vals = [str(p.iteration)]
            vals += [repr(float(v)) for v in p.d]
            vals += [repr(p.objective), repr(p.mean), repr(p.sd)]
            fh.write(",".join(vals) + "\n")


def cmd_optimize(cfg: RunConfig, surrogate_path, out_dir) -> int:
    state = _load_state(cfg, surrogate_path, cfg.dataset_path)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    pareto_rows = []
    for w1, w2 in cfg.weights:
        result = optimize_weights(state, w1, w2, cfg.nm)
        traj_path = out / f"trajectory_{w1:g}_{w2:g}.csv"
        _write_trajectory(traj_path, result, cfg.space.n)
        pareto_rows.append(result)
        print(
            f"w=({w1:g},{w2:g}) d*={np.array2string(result.d_star, precision=6)} "
            f"objective={result.objective_star:.6f} evals={result.evaluations}"
        )
    with open(out / "pareto.csv", "w", newline="\n", encoding="utf-8") as fh:
        cols = ["w1", "w2"] + [f"d{k + 1}" for k in range(cfg.space.n)]
        cols += ["mean", "sd"]
        fh.write(",".join(cols) + "\n")
        for res in pareto_rows:
            vals = [repr(res.w1), repr(res.w2)]
            vals += [repr(float(v)) for v in res.d_star]
            vals += [repr(res.mean_star), repr(res.sd_star)]
            fh.write(",".join(vals) + "\n")
    print(f"results in {out}")
    return EXIT_OK


def cmd_verify(cfg: RunConfig, design, n_samples, seed) -> int:
    model = cfg.model()
    if model is None:
        raise ConfigError("verify requires a synthetic qoi, not a dataset")
    design = np.asarray(design, dtype=float)
    if not cfg.space.contains(design):
        raise ConfigError(f"design {design} outside the design space")

    # law implied at this design: design-dim marginals scaled by d / nominal
    factors = np.ones(cfg.law.dim)
    for k, i in enumerate(cfg.space.input_index_map):
        factors[i] = design[k] / cfg.nominal_means[i]
    mc = mc_moments(model, cfg.law.scaled(factors), n_samples, seed)

    if cfg.surrogate_path and Path(cfg.surrogate_path).exists():
        state = _load_state(cfg, cfg.surrogate_path, cfg.dataset_path)
    else:
        dataset = None
        if cfg.dataset_path and Path(cfg.dataset_path).exists():
            dataset = load_dataset(cfg.dataset_path)
        else:
            X = cfg.law.sample_lhs(cfg.n_train, cfg.seed)
            dataset = Dataset(X=X, Q=np.asarray(model(X), dtype=float))
        state = _state_from_dataset(cfg, dataset)
    mean_s, sd_s = state.design_moments(design)

    z_mean = (mean_s - mc.mean) / mc.se_mean if mc.se_mean > 0 else 0.0
    z_var = (
        (sd_s**2 - mc.variance) / mc.se_variance if mc.se_variance > 0 else 0.0
    )
    print(f"mc_mean {mc.mean!r} +- {mc.se_mean!r}")
    print(f"mc_sd {float(np.sqrt(mc.variance))!r}")
    print(f"surrogate_mean {mean_s!r}")
    print(f"surrogate_sd {sd_s!r}")
    print(f"z_mean {z_mean!r}")
    print(f"z_variance {z_var!r}")
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(
        prog="pddrdo",
        description="Robust design optimization with sparse polynomial surrogates",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="draw a Latin hypercube input sample")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)

    p = sub.add_parser("train", help="fit a surrogate from a dataset CSV")
    p.add_argument("--config", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("optimize", help="run the weighted-objective optimization")
    p.add_argument("--config", required=True)
    p.add_argument("--surrogate", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("verify", help="Monte Carlo check of the surrogate moments")
    p.add_argument("--config", required=True)
    p.add_argument("--design", required=True,
                   help="comma-separated design values")
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.command == "sample":
            return cmd_sample(cfg, args.out, args.seed)
        if args.command == "train":
            return cmd_train(cfg, args.data, args.out)
        if args.command == "optimize":
            return cmd_optimize(cfg, args.surrogate, args.out)
        if args.command == "verify":
            design = [float(v) for v in args.design.split(",")]
            return cmd_verify(cfg, design, args.samples, args.seed)
        raise ConfigError(f"unknown command {args.command!r}")
    except (ConfigError, NonFiniteInput) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PddRdoError as exc:
        kind = type(exc).__name__
        config_like = kind in (
            "ParseError", "SchemaError", "OutOfBounds", "OutOfSupport",
            "InvalidTruncation", "DimensionMismatch", "InsufficientRecords",
            "InsufficientData", "FractionSumViolation", "NonPositiveTemperature",
            "NonMonotoneTime", "DegreeOutOfRange",
        )
        print(f"error: {kind}: {exc}", file=sys.stderr)
        return EXIT_CONFIG if config_like else EXIT_NUMERICAL
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
