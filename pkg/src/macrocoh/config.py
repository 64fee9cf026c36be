"""Global numeric tolerances and resource guards.

All validation thresholds used across the package live in the single
module-level instance ``TOL``.  Mutating its fields changes the behaviour
globally; individual operations also accept explicit overrides where a
per-call tolerance makes sense (gap clustering, rank cutoffs).
"""

from dataclasses import dataclass


@dataclass
class Tolerances:
    # Hermiticity check: max absolute entry of (M - M†).
    hermitian_atol: float = 1e-10
    # Unit-trace check for density matrices.
    trace_atol: float = 1e-10
    # Smallest admissible eigenvalue of a density matrix.
    eigenvalue_floor: float = -1e-10
    # Unit-norm check for pure-state amplitude vectors.
    unit_norm_atol: float = 1e-10
    # Orthonormality check for supplied spectral factors: max entry of V†V - I.
    orthonormal_atol: float = 1e-8
    # Relative reconstruction error allowed for spectral decompositions.
    reconstruction_rtol: float = 1e-8
    # Eigenvalues below this are treated as exact zeros in rank-sensitive
    # formulas (Fisher information denominators, entropies).
    rank_cutoff: float = 1e-12
    # Selective channel outcomes with probability below this are dropped.
    selective_prob_floor: float = 1e-14
    # Largest Hilbert-space dimension a tensor product is allowed to produce.
    tensor_dim_cap: int = 2**16
    # Largest dimension the copy-count comparison may request per state.
    copy_dim_cap: int = 2**14


TOL = Tolerances()
