"""macrocoh: coherence-mode norms and macroscopicity measures.

Gap-resolved coherence decompositions, quantum Fisher information and its
relatives, effective-size searches over local observable families, covariant
channel fuzzing, and double-commutator decoherence dynamics on
finite-dimensional quantum states.
"""

from .config import TOL, Tolerances
from .states import (
    DensityMatrix,
    PureState,
    ResourceLimitError,
    ValidationError,
    phase_conjugate,
    random_density,
    spectral_decompose,
    tensor_product,
)
from .modes import (
    AmbiguousSpectrumError,
    GapSet,
    ModeComponent,
    delta_coherence_norm,
    gap_set,
    mode_component,
    mode_decompose,
    mode_norms,
    trace_norm,
)
from .measures import (
    MEASURE_IDS,
    ConvexRoofConfig,
    MeasureReport,
    compute_measure,
    convex_roof_search,
    fidelity,
    il_measure,
    qfi,
    qfi_bures_oracle,
    relative_entropy_asymmetry,
    skew_information,
    variance,
    von_neumann_entropy,
)
from .fock import (
    FockSpace,
    StateRecipe,
    TruncationHealthError,
    cat_state,
    characteristic_function,
    characteristic_grid,
    check_truncation,
    coherent_state,
    displacement_operator,
    number_state,
    squeezed_state,
    standard_state,
    truncation_health,
)
from .macroscopicity import (
    LocalObservableFamily,
    QuadraticForm,
    QuadratureFamily,
    SearchConfig,
    block_coordinate_ascent,
    m4_ordering_check,
    nf_grid_oracle,
    nf_qubits,
    nf_quadratures,
    nlj_closed_form,
    nlj_integral,
    nlj_tilde,
    qfi_quadratic_form,
    quadrature_grid_oracle,
)
from .channels import (
    MONOTONE_IDS,
    CovarianceVerdict,
    FreeChannel,
    MonotonicityReport,
    ancilla_replacement_channel,
    apply_channel,
    dephasing_channel,
    fuzz_monotonicity,
    monotonicity_report,
    random_free_channel,
    verify_covariance,
)
from .dynamics import (
    DoubleCommutatorGenerator,
    IntegrationError,
    evolve,
    nh_generator,
    purity_rate,
    theorem4a_generator,
)
from .experiments import (
    CopyProfile,
    ScalingRow,
    build_rho_N,
    collective_z,
    copy_equivalence,
    ghz_state,
    il_formula,
    qfi_formula,
    scaling_table,
)
from .formats import (
    dump_matrix,
    json_to_matrix,
    load_matrix,
    load_observable,
    load_state,
    matrix_to_json,
)
from .cli import run_cli

__version__ = "0.1.0"

__all__ = [
    "TOL",
    "Tolerances",
    "DensityMatrix",
    "PureState",
    "ResourceLimitError",
    "ValidationError",
    "phase_conjugate",
    "random_density",
    "spectral_decompose",
    "tensor_product",
    "AmbiguousSpectrumError",
    "GapSet",
    "ModeComponent",
    "delta_coherence_norm",
    "gap_set",
    "mode_component",
    "mode_decompose",
    "mode_norms",
    "trace_norm",
    "MEASURE_IDS",
    "ConvexRoofConfig",
    "MeasureReport",
    "compute_measure",
    "convex_roof_search",
    "fidelity",
    "il_measure",
    "qfi",
    "qfi_bures_oracle",
    "relative_entropy_asymmetry",
    "skew_information",
    "variance",
    "von_neumann_entropy",
    "FockSpace",
    "StateRecipe",
    "TruncationHealthError",
    "cat_state",
    "characteristic_function",
    "characteristic_grid",
    "check_truncation",
    "coherent_state",
    "displacement_operator",
    "number_state",
    "squeezed_state",
    "standard_state",
    "truncation_health",
    "LocalObservableFamily",
    "QuadraticForm",
    "QuadratureFamily",
    "SearchConfig",
    "block_coordinate_ascent",
    "m4_ordering_check",
    "nf_grid_oracle",
    "nf_qubits",
    "nf_quadratures",
    "nlj_closed_form",
    "nlj_integral",
    "nlj_tilde",
    "qfi_quadratic_form",
    "quadrature_grid_oracle",
    "MONOTONE_IDS",
    "CovarianceVerdict",
    "FreeChannel",
    "MonotonicityReport",
    "ancilla_replacement_channel",
    "apply_channel",
    "dephasing_channel",
    "fuzz_monotonicity",
    "monotonicity_report",
    "random_free_channel",
    "verify_covariance",
    "DoubleCommutatorGenerator",
    "IntegrationError",
    "evolve",
    "nh_generator",
    "purity_rate",
    "theorem4a_generator",
    "CopyProfile",
    "ScalingRow",
    "build_rho_N",
    "collective_z",
    "copy_equivalence",
    "ghz_state",
    "il_formula",
    "qfi_formula",
    "scaling_table",
    "dump_matrix",
    "json_to_matrix",
    "load_matrix",
    "load_observable",
    "load_state",
    "matrix_to_json",
    "run_cli",
    "__version__",
]
