"""Two-photon interference at lossy, asymmetric 2x2 optical circuits."""

from .core_matrix import (
    DEFAULT_TOL,
    AlphaWindow,
    PassivityReport,
    ScatteringMatrix,
    alpha_window,
    check_passivity,
    classical_interference,
    complex_matrix,
    noise_commutator_matrix,
    unitary_dilation,
)
from .counting import (
    HomCurve,
    NumberMoments,
    OutcomeDistribution,
    ParameterMap,
    hom_scan,
    map_at,
    max_coincidence,
    max_coincidence_map,
    number_moments,
    outcome_probabilities,
    parameter_map,
    programmability,
    programmability_map,
    symmetric_probabilities,
    tunability_map,
)
from .fock_oracle import (
    FockPattern,
    OracleDistribution,
    equivalence_sweep,
    evolve_distinguishable,
    evolve_indistinguishable,
    oracle_distribution,
    permanent,
)
from .spectral import (
    FrequencyGrid,
    GaussianSeparable,
    OverlapResult,
    SpdcSincGaussian,
    Tabulated,
    coherence_time,
    normalize,
    overlap_integral,
    overlap_scan,
    spdc_amplitude,
)

__version__ = "0.1.0"
