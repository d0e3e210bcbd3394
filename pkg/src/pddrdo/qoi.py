"""Output sources: thermodynamic post-processing, synthetic benchmark
models with Monte Carlo oracles, and CSV dataset handling.

The thermal-energy output is the time integral of mixture heat capacity
times outlet mass flow times outlet temperature over a 10 s window.  Heat
capacities use NASA-style fourth-order polynomials with a regime switch at
1000 K.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import (
    FractionSumViolation,
    InsufficientRecords,
    NonMonotoneTime,
    NonPositiveTemperature,
    NonFiniteInput,
    OutOfSupport,
    ParseError,
    SchemaError,
)
from .measures import InputLaw, TruncatedNormal, Uniform

R_GAS = 8.314  # J/(mol K)


@dataclass(frozen=True)
class GasSpecies:
    name: str
    molecular_weight: float  # kg/mol
    low_T_coeffs: tuple[float, float, float, float, float]
    high_T_coeffs: tuple[float, float, float, float, float]
    switch_T: float = 1000.0

    def __post_init__(self):
        if self.molecular_weight <= 0:
            raise ValueError("molecular weight must be positive")


SPECIES = {
    "O2": GasSpecies(
        "O2", 31.9988e-3,
        (3.7825, -2.9970e-3, 9.8473e-6, -9.6813e-9, 3.2437e-12),
        (3.6610, 6.5637e-4, -1.4115e-7, 2.0580e-11, -1.2991e-15),
    ),
    "N2": GasSpecies(
        "N2", 28.0134e-3,
        (3.5310, -1.2366e-4, -5.0300e-7, 2.4353e-9, -1.4088e-12),
        (2.9526, 1.3969e-3, -4.9263e-7, 7.8601e-11, -4.6076e-15),
    ),
    "CO": GasSpecies(
        "CO", 28.0104e-3,
        (3.5795, -6.1035e-4, 1.0168e-6, 9.0701e-10, -9.0442e-13),
        (3.0485, 1.3517e-3, -4.8579e-7, 7.8854e-11, -4.6981e-15),
    ),
    "CO2": GasSpecies(
        "CO2", 44.0098e-3,
        (2.3568, 8.9841e-3, -7.1221e-6, 2.4573e-9, -1.4289e-13),
        (4.6365, 2.7415e-3, -9.9590e-7, 1.6039e-10, -9.1620e-15),
    ),
    "H2O": GasSpecies(
        "H2O", 18.0153e-3,
        (4.1986, -2.0364e-3, 6.5203e-6, -5.4879e-9, 1.7720e-12),
        (2.6770, 2.9732e-3, -7.7377e-7, 9.4434e-11, -4.2690e-15),
    ),
}

SPECIES_ORDER = ("O2", "N2", "CO", "CO2", "H2O")


def cp_species(g: GasSpecies, T: float) -> float:
    """Specific heat capacity of one gas component, J/(kg K)."""
    if T <= 0:
        raise NonPositiveTemperature(f"T={T}")
    a, b, c, d, e = g.low_T_coeffs if T < g.switch_T else g.high_T_coeffs
    return R_GAS / g.molecular_weight * (a + b * T + c * T**2 + d * T**3 + e * T**4)


def cp_mixture(fractions, T: float, order=SPECIES_ORDER) -> float:
    """Mole-fraction-weighted heat capacity of the gas mixture, J/(kg K)."""
    fractions = np.asarray(fractions, dtype=float)
    if fractions.shape != (len(order),) or np.any(fractions < 0):
        raise FractionSumViolation("need one non-negative fraction per species")
    if abs(float(fractions.sum()) - 1.0) > 1e-6:
        raise FractionSumViolation(f"fractions sum to {fractions.sum()}")
    return float(
        sum(f * cp_species(SPECIES[name], T) for f, name in zip(fractions, order))
    )


@dataclass(frozen=True)
class OutletRecord:
    t: float
    T_avg: float
    mdot: float
    mole_fractions: tuple[float, float, float, float, float]

    def __post_init__(self):
        if self.T_avg <= 0:
            raise NonPositiveTemperature(f"T_avg={self.T_avg}")
        total = sum(self.mole_fractions)
        if abs(total - 1.0) > 1e-9:
            raise FractionSumViolation(f"mole fractions sum to {total}")


def thermal_energy(series: list[OutletRecord]) -> float:
    """Trapezoidal integral of Cp * mdot * T_avg over the record time grid."""
    if len(series) < 2:
        raise InsufficientRecords("need at least two outlet records")
    t = np.array([rec.t for rec in series])
    if np.any(np.diff(t) < 0):
        raise NonMonotoneTime("record times must be non-decreasing")
    power = np.array(
        [cp_mixture(rec.mole_fractions, rec.T_avg) * rec.mdot * rec.T_avg
         for rec in series]
    )
    return float(np.trapezoid(power, t))


def load_outlet_series(path) -> list[OutletRecord]:
    """Outlet time-series CSV: t,T_avg,mdot,y_O2,y_N2,y_CO,y_CO2,y_H2O."""
    header = ["t", "T_avg", "mdot", "y_O2", "y_N2", "y_CO", "y_CO2", "y_H2O"]
    rows = _read_csv(path, header)
    return [
        OutletRecord(t=row[0], T_avg=row[1], mdot=row[2],
                     mole_fractions=tuple(row[3:8]))
        for row in rows
    ]


# ---------------------------------------------------------------------------
# input law of the combustion benchmark and synthetic stand-in models

NOMINAL_MEANS = np.array([0.12, 0.825, 8.0e-4, 1.0e-3, 7.35e-6])


def reference_law() -> InputLaw:
    """The five benchmark inputs: freeboard height, air inflow, glass-bead
    diameter, char-particle diameter, char mass inflow.  Truncated normals
    carry a 10% coefficient of variation."""
    return InputLaw((
        Uniform(0.10, 0.14),
        TruncatedNormal(0.825, 0.0825, 0.425, 1.225),
        Uniform(2.0e-4, 1.4e-3),
        Uniform(5.0e-4, 1.5e-3),
        TruncatedNormal(7.35e-6, 7.35e-7, 1.35e-6, 1.35e-5),
    ))


class SyntheticKind(Enum):
    POLY = "poly"
    NONPOLY = "nonpoly"


def synthetic_qoi(x: np.ndarray, kind: SyntheticKind = SyntheticKind.POLY,
                  check_support: bool = True) -> np.ndarray:
    """Desk-scale benchmark output in normalized coordinates u_i = x_i / mean_i.

    The polynomial variant has interaction order <= 2 and total degree <= 8,
    is strictly positive on the support, increasing in u_2 and decreasing in
    u_3.  The non-polynomial variant adds a bounded sinusoid in u_2 * u_3 to
    exercise truncation error.
    """
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    x2 = np.atleast_2d(x)
    if x2.shape[1] != 5:
        raise OutOfSupport("expected 5 input columns")
    if check_support:
        law = reference_law()
        for i, marg in enumerate(law.marginals):
            lo, hi = marg.lower, marg.upper
            span = hi - lo
            if np.any(x2[:, i] < lo - 1e-12 * span) or np.any(
                x2[:, i] > hi + 1e-12 * span
            ):
                raise OutOfSupport(f"column {i} outside [{lo}, {hi}]")
    u = x2 / NOMINAL_MEANS
    u1, u2, u3, u4, u5 = (u[:, i] for i in range(5))
    q = (
        10.0
        + u1
        + 4.0 * u2
        + 0.5 * u2**2
        - 3.0 * u3
        + 0.4 * u3**2
        + 0.3 * u4
        + 0.2 * u5
        + 0.5 * u2 * u3
        + 0.3 * u1 * u4
        + 0.15 * (u5 - 1.0) ** 3
        + 0.02 * (u2 - 1.0) ** 6 * (u3 - 1.0) ** 2
    )
    if kind is SyntheticKind.NONPOLY:
        q = q + 0.3 * np.sin(2.0 * u2 * u3)
    return float(q[0]) if single else q


@dataclass(frozen=True)
class McMoments:
    mean: float
    variance: float
    se_mean: float
    se_variance: float


def mc_moments(model, law: InputLaw, n_samples: int, seed: int) -> McMoments:
    """Plain Monte Carlo mean and unbiased variance with standard errors."""
    if n_samples < 2:
        raise ValueError("n_samples must be >= 2")
    x = law.sample_iid(n_samples, seed)
    q = np.asarray(model(x), dtype=float)
    mean = float(q.mean())
    var = float(q.var(ddof=1))
    centered = q - mean
    m4 = float(np.mean(centered**4))
    se_mean = float(np.sqrt(var / n_samples))
    se_var = float(np.sqrt(max(m4 - var**2, 0.0) / n_samples))
    return McMoments(mean=mean, variance=var, se_mean=se_mean, se_variance=se_var)


# ---------------------------------------------------------------------------
# dataset CSV (header x1,x2,x3,x4,x5,Q)

DATASET_HEADER = ["x1", "x2", "x3", "x4", "x5", "Q"]


@dataclass(frozen=True)
class Dataset:
    X: np.ndarray
    Q: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        Q = np.asarray(self.Q, dtype=float)
        if X.ndim != 2 or X.shape[1] != 5 or Q.shape != (X.shape[0],):
            raise SchemaError("dataset must be M x 5 inputs with M outputs")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(Q))):
            raise NonFiniteInput("non-finite dataset values")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Q", Q)

    def __len__(self):
        return self.X.shape[0]


def _read_csv(path, header):
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            first = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file") from None
        if [h.strip() for h in first] != header:
            raise SchemaError(f"{path}: expected header {','.join(header)}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise SchemaError(
                    f"{path}: line {lineno}: expected {len(header)} columns, "
                    f"got {len(row)}"
                )
            try:
                rows.append([float(v) for v in row])
            except ValueError as exc:
                raise ParseError(f"{path}: line {lineno}: {exc}") from None
    return rows


def load_dataset(path) -> Dataset:
    """Parse and validate an input-output dataset CSV."""
    rows = _read_csv(path, DATASET_HEADER)
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    arr = np.array(rows)
    return Dataset(X=arr[:, :5], Q=arr[:, 5])


def save_dataset(path, dataset: Dataset) -> None:
    """Write a dataset CSV with shortest round-trip decimal floats."""
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write(",".join(DATASET_HEADER) + "\n")
        for xrow, q in zip(dataset.X, dataset.Q):
            fh.write(",".join(repr(float(v)) for v in xrow) + f",{float(q)!r}\n")
