"""Decomposition of a state into coherence modes of an observable.

Fix an observable A with eigenbasis {|i>} and eigenvalues {a_i}.  Any matrix
splits as a sum over spectral gaps delta of its "mode components"

    rho^(delta) = sum over pairs (i, j) with a_i - a_j = delta
                  of  <i|rho|j> |i><j|,

one component per distinct gap.  Under conjugation by exp(-i x A) the
component of gap delta picks up exactly the phase exp(-i x delta), which is
what makes the decomposition useful: channels that commute with all such
phase rotations act on each mode separately.

Because eigenvalues are floating-point, "distinct gap" means distinct up to
a grouping tolerance.  Gaps are clustered by single linkage; if a cluster's
spread exceeds ten times the tolerance the grouping is ambiguous and an
error is raised rather than silently merging well-separated gaps.

The zero gap is always present (diagonal pairs) and, for degenerate A,
contains the intra-eigenspace coherences as well: the gap-zero component is
the block-dephased state, not the fully dephased one.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import TOL
from .states import (
    DensityMatrix,
    HermitianObservable,
    ValidationError,
    _to_array,
    spectral_decompose,
)


class AmbiguousSpectrumError(ValueError):
    """Gap clusters are too spread out for the grouping tolerance."""


def trace_norm(M) -> float:
    """Sum of singular values."""
    mat = _to_array(M)
    if mat.size == 0:
        return 0.0
    return float(np.linalg.svd(mat, compute_uv=False).sum())


@dataclass(frozen=True)
class GapSet:
    """Clustered spectral gaps of an observable.

    gaps          sorted ascending, exactly symmetric about an exact 0.0
    group_tolerance   the linkage tolerance actually used
    labels        d x d integer array: labels[i, j] is the index into gaps
                  of the cluster containing a_i - a_j (eigenbasis order)
    eigenvalues   descending eigenvalues of A
    eigenvectors  matching eigenvector columns
    """

    gaps: np.ndarray
    group_tolerance: float
    labels: np.ndarray = field(repr=False)
    eigenvalues: np.ndarray = field(repr=False)
    eigenvectors: np.ndarray = field(repr=False)

    def gap_index(self, delta: float) -> int:
        j = int(np.argmin(np.abs(self.gaps - delta)))
        miss = abs(float(self.gaps[j]) - delta)
        if miss > max(self.group_tolerance, 1e-12 * max(1.0, abs(delta))):
            raise ValidationError(
                f"delta = {delta:.12g} is not a spectral gap "
                f"(nearest is {self.gaps[j]:.12g}, off by {miss:.3e})"
            )
        return j

    def index_pairs(self, delta: float):
        """List of eigenbasis index pairs (i, j) belonging to this gap."""
        k = self.gap_index(delta)
        rows, cols = np.nonzero(self.labels == k)
        return list(zip(rows.tolist(), cols.tolist()))


@dataclass(frozen=True)
class ModeComponent:
    """One coherence mode: the gap value and its matrix block."""

    delta: float
    matrix: np.ndarray
    basis: str  # "computational" or "observable"


def gap_set(A, group_tolerance: float | None = None) -> GapSet:
    """Cluster all eigenvalue differences of A by single linkage.

    The default tolerance is 1e-9 times the spectral range, floored at a
    tiny absolute value so exactly degenerate spectra still collapse into
    one cluster.  A cluster whose spread exceeds 10x the tolerance raises
    AmbiguousSpectrumError: the caller must pass an explicit tolerance.
    """
    if isinstance(A, HermitianObservable):
        evals, evecs = A.eigensystem()
    else:
        evals, evecs = spectral_decompose(A)
    d = evals.shape[0]
    spread = float(evals[0] - evals[-1])
    if group_tolerance is None:
        tol = 1e-9 * spread
    else:
        tol = float(group_tolerance)
        if tol < 0:
            raise ValidationError(f"group tolerance must be >= 0, got {tol}")
    tol = max(tol, 1e-14 * max(1.0, float(np.abs(evals).max(initial=0.0))))

    diffs = (evals[:, None] - evals[None, :]).ravel()
    order = np.argsort(diffs, kind="stable")
    sorted_diffs = diffs[order]
    # Single linkage: a new cluster starts wherever consecutive sorted
    # values are more than tol apart.
    breaks = np.diff(sorted_diffs) > tol
    cluster_of_sorted = np.concatenate(([0], np.cumsum(breaks)))
    n_clusters = int(cluster_of_sorted[-1]) + 1

    first = np.searchsorted(cluster_of_sorted, np.arange(n_clusters), side="left")
    last = np.searchsorted(cluster_of_sorted, np.arange(n_clusters), side="right") - 1
    spreads = sorted_diffs[last] - sorted_diffs[first]
    worst = int(np.argmax(spreads))
    if spreads[worst] > 10 * tol:
        raise AmbiguousSpectrumError(
            f"gap cluster around {sorted_diffs[first[worst]]:.12g} has spread "
            f"{spreads[worst]:.3e} > 10 x tolerance {tol:.3e}; pass an explicit "
            f"group_tolerance to disambiguate"
        )

    sums = np.bincount(cluster_of_sorted, weights=sorted_diffs, minlength=n_clusters)
    counts = np.bincount(cluster_of_sorted, minlength=n_clusters)
    reps = sums / counts
    # The diff multiset is exactly symmetric under negation and so is the
    # linkage structure, so antisymmetrizing pins the exact +/- pairing and
    # lands the middle cluster (the diagonal zeros) on exact 0.0.
    reps = (reps - reps[::-1]) / 2.0

    labels = np.empty(d * d, dtype=np.intp)
    labels[order] = cluster_of_sorted
    return GapSet(
        gaps=reps,
        group_tolerance=tol,
        labels=labels.reshape(d, d),
        eigenvalues=evals,
        eigenvectors=evecs,
    )


def _resolve(A, gaps: GapSet | None) -> GapSet:
    return gaps if gaps is not None else gap_set(A)


def _state_matrix(rho) -> np.ndarray:
    """Matrix form of a state argument; pure states become projectors."""
    amps = getattr(rho, "amplitudes", None)
    if amps is not None:
        return np.outer(amps, amps.conj())
    return _to_array(rho)


def mode_component(
    rho,
    A,
    delta: float,
    gaps: GapSet | None = None,
    observable_basis: bool = False,
) -> ModeComponent:
    """The coherence mode of ``rho`` at spectral gap ``delta``.

    Works on any matrix, not just density matrices; non-Hermitian inputs
    arise when filtering already-extracted components.
    """
    gs = _resolve(A, gaps)
    mat = _state_matrix(rho)
    if mat.shape != gs.labels.shape:
        raise ValidationError(
            f"state dimension {mat.shape} does not match observable {gs.labels.shape}"
        )
    k = gs.gap_index(delta)
    V = gs.eigenvectors
    block = (V.conj().T @ mat @ V) * (gs.labels == k)
    if observable_basis:
        return ModeComponent(float(gs.gaps[k]), block, "observable")
    return ModeComponent(float(gs.gaps[k]), V @ block @ V.conj().T, "computational")


def mode_decompose(rho, A, gaps: GapSet | None = None) -> list[ModeComponent]:
    """All coherence modes, ascending in delta.  Their sum reconstructs rho."""
    gs = _resolve(A, gaps)
    mat = _state_matrix(rho)
    if mat.shape != gs.labels.shape:
        raise ValidationError(
            f"state dimension {mat.shape} does not match observable {gs.labels.shape}"
        )
    V = gs.eigenvectors
    rotated = V.conj().T @ mat @ V
    out = []
    for k, delta in enumerate(gs.gaps):
        block = rotated * (gs.labels == k)
        out.append(ModeComponent(float(delta), V @ block @ V.conj().T, "computational"))
    return out


def delta_coherence_norm(
    rho, A, delta: float, gaps: GapSet | None = None
) -> float:
    """Trace norm of the coherence mode at the given gap.

    Evaluated on the eigenbasis block directly; the trace norm is unitarily
    invariant so the basis does not matter.
    """
    comp = mode_component(rho, A, delta, gaps=gaps, observable_basis=True)
    return trace_norm(comp.matrix)


def mode_norms(rho, A, gaps: GapSet | None = None):
    """(gaps, trace norms) for every mode in one pass, plus the residual.

    Returns (deltas, norms, reconstruction_residual) where the residual is
    the max-abs difference between the sum of all modes and the input.
    """
    gs = _resolve(A, gaps)
    mat = _state_matrix(rho)
    V = gs.eigenvectors
    rotated = V.conj().T @ mat @ V
    norms = np.empty(gs.gaps.shape[0])
    total = np.zeros_like(rotated)
    for k in range(gs.gaps.shape[0]):
        block = rotated * (gs.labels == k)
        total += block
        norms[k] = trace_norm(block)
    residual = float(np.abs(V @ total @ V.conj().T - mat).max())
    return gs.gaps.copy(), norms, residual
