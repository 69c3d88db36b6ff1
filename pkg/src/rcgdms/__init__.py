"""Numerical thermodynamic formalism for random conformal graph directed
Markov systems: relative pressure over countable Markov shifts, Bowen
dimension of random limit sets, and Lyapunov multifractal spectra, with exact
small-instance oracles and geometric cross-checks."""

from .driving import (
    DrivingOrbit,
    DrivingSystem,
    bernoulli,
    deterministic,
    fiber_state,
    orbit_family,
    periodic,
    sample_orbit,
)
from .gdms import (
    RCGDMS,
    LimitSetSample,
    build_paper_example,
    check_rbsc,
    code_point,
    sample_limit_set,
    similarity_system,
)
from .gibbs import (
    CylinderMeasure,
    EigenvalueSequence,
    conformal_measures,
    conformality_residual,
    ladder_convergence,
)
from .oracle import (
    BoxCountEstimate,
    LevelHistogram,
    box_counting,
    level_histogram,
    local_dimension_samples,
)
from .potentials import (
    FirstSymbolPotential,
    HolderClass,
    SummabilityReport,
    geometric_potential,
    s_infinity,
    summability,
    table_potential,
    zero_potential,
)
from .shift import (
    GeometricTail,
    PrimitivityWitness,
    SubalphabetLadder,
    SymbolicSystem,
    build_ladder,
    cylinder_contains,
    count_words,
    enumerate_words,
    find_primitivity,
    from_matrix,
    full_shift,
    verify_primitivity,
)
from .spectrum import (
    PressureCurve,
    SpectrumResult,
    TemperatureCurve,
    bowen_dimension,
    cofinite_regularity,
    legendre_spectrum,
    pressure_curve,
    tq_analysis,
)
from .thermo import (
    CompactApproximation,
    GibbsReport,
    PartitionSums,
    PressureEstimate,
    SandwichReport,
    check_gibbs,
    check_sandwich,
    partition_sums,
    pressure,
    pressure_compact_approx,
)

__version__ = "0.1.0"
