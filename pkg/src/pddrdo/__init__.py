"""Limited-data robust design optimization with sparse polynomial surrogates."""

from .errors import (
    ConfigError,
    DegenerateActuals,
    DegenerateMeasure,
    DegreeOutOfRange,
    DimensionMismatch,
    FractionSumViolation,
    InsufficientData,
    InsufficientRecords,
    InvalidTruncation,
    NonFiniteInput,
    NonMonotoneTime,
    NonPositiveMean,
    NonPositiveTemperature,
    OutOfBounds,
    OutOfSupport,
    ParseError,
    PddRdoError,
    SchemaError,
    SvdFailure,
)
from .measures import InputLaw, Marginal, TruncatedNormal, Uniform
from .orthopoly import OrthoBasis1D, build_basis, eval_poly, gram_matrix
from .pdd import MultiIndexSet, build_index_set, count_L, design_matrix
from .qoi import (
    Dataset,
    GasSpecies,
    McMoments,
    NOMINAL_MEANS,
    OutletRecord,
    R_GAS,
    SPECIES,
    SPECIES_ORDER,
    SyntheticKind,
    cp_mixture,
    cp_species,
    load_dataset,
    load_outlet_series,
    mc_moments,
    reference_law,
    save_dataset,
    synthetic_qoi,
    thermal_energy,
)
from .rdo import (
    DesignSpace,
    NelderMeadParams,
    RDOResult,
    RunState,
    TrajectoryPoint,
    evaluate_design,
    nelder_mead,
    objective,
    optimize_weights,
    pareto_sweep,
    prepare_run,
    r_from_design,
    run_rdo,
)
from .regression import (
    SDMorphConfig,
    SDMorphResult,
    dmorph_init,
    lasso,
    null_projector,
    pseudoinverse,
    r_squared,
    sdmorph_fit,
    select_penalty,
)
from .surrogate import (
    FitMethod,
    PDDSurrogate,
    TrainingSet,
    build_bases,
    deserialize,
    fit,
    rescale_inputs,
    serialize,
    single_pass_retrain,
    transform_x_to_z,
)

__version__ = "1.0.0"

__all__ = [name for name in dir() if not name.startswith("_")]
