"""Quantitative experiment drivers: scaling families and copy equivalence.

The scaling family rho_N mixes gap-k superpositions so that the commutator
measure I_L grows linearly in N while the Fisher information grows
quadratically; both have closed forms the numerics must hit to 1e-8.

Copy equivalence compares the gap-resolved coherence profiles of psi^(x)n and
phi^(x)m at the matched ratio m/n = V(psi)/V(phi).  Both profiles reduce to
||rho^(delta)||_1 = sum_W sqrt(p(W + delta) p(W)), with p the n-fold
convolution of the single-site eigenvalue distribution: the blocks of a pure
product state split into outer products of vectors from orthogonal collective
eigenspaces, so the singular values are the paired probability square roots.
That keeps 2^14-dimensional comparisons at polynomial cost.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import TOL
from .measures import il_measure, qfi, variance
from .states import (
    DensityMatrix,
    PureState,
    ResourceLimitError,
    ValidationError,
    _to_array,
    spectral_decompose,
)


def ghz_state(n_sites: int) -> PureState:
    """(|0...0> + |1...1>)/sqrt(2) on n qubits."""
    if not 1 <= n_sites <= 14:
        raise ValidationError("site count must lie in 1..14")
    vec = np.zeros(2**n_sites, dtype=complex)
    vec[0] = vec[-1] = 1.0 / np.sqrt(2.0)
    return PureState(vec)


def collective_z(n_sites: int) -> np.ndarray:
    """Diagonal of Z = sum_i sigma^z_i on n qubits (kept as a vector)."""
    idx = np.arange(2**n_sites)
    ones = np.array([bin(i).count("1") for i in idx])
    return (n_sites - 2 * ones).astype(float)


def build_rho_N(N: int) -> DensityMatrix:
    """Uniform weight-2/N mixture of the gap-k superpositions psi^N_k.

    psi^N_k = (|0^{N-k} 1^k> + |1^{N-k} 0^k>)/sqrt(2) for k = 0..N/2-1; the
    components carry collective-Z gaps 2(N - 2k) that shrink with k, which
    is what splits the I_L and Fisher scaling.  Stored in factored form so
    measures run on the rank-N/2 spectrum instead of the 2^N matrix.
    """
    if N % 2 or N < 2:
        raise ValidationError("N must be a positive even integer")
    if N > 14:
        raise ValidationError("N must not exceed 14 (dimension cap 2^14)")
    dim = 2**N
    vectors = np.zeros((dim, N // 2), dtype=complex)
    for k in range(N // 2):
        lo = 2**k - 1
        hi = (2 ** (N - k) - 1) * 2**k
        vectors[lo, k] = 1.0 / np.sqrt(2.0)
        vectors[hi, k] = 1.0 / np.sqrt(2.0)
    weights = np.full(N // 2, 2.0 / N)
    return DensityMatrix.from_spectrum(weights, vectors)


@dataclass
class ScalingRow:
    """One N of the scaling table, checked against the closed forms."""

    N: int
    qfi_value: float
    il_value: float
    qfi_formula: float
    il_formula: float

    def __post_init__(self):
        for value, formula, name in (
            (self.qfi_value, self.qfi_formula, "qfi"),
            (self.il_value, self.il_formula, "il"),
        ):
            if abs(value - formula) > 1e-8 * formula:
                raise ValidationError(
                    f"N={self.N}: computed {name} {value!r} deviates from the "
                    f"closed form {formula!r} beyond 1e-8 relative"
                )

    @property
    def ratio(self) -> float:
        """qfi/il, growing linearly with N."""
        return self.qfi_value / self.il_value


def qfi_formula(N: int) -> float:
    return 4.0 * (N + 1) * (N + 2) / 3.0


def il_formula(N: int) -> float:
    return sum((2.0 / N) ** 2 * (N - 2 * k) ** 2 for k in range(N // 2 + 1))


def scaling_table(N_list) -> list:
    """Compute qfi and il of rho_N against Z for each (even) N."""
    rows = []
    for N in N_list:
        N = int(N)
        rho = build_rho_N(N)
        z = collective_z(N)
        rows.append(
            ScalingRow(N, qfi(rho, z), il_measure(rho, z), qfi_formula(N), il_formula(N))
        )
    return rows


def _cluster_1d(values: np.ndarray, weights: np.ndarray, tol: float):
    """Merge sorted 1-D support points closer than tol, summing weights."""
    order = np.argsort(values)
    v = values[order]
    w = weights[order]
    if len(v) == 0:
        return v, w
    breaks = np.nonzero(np.diff(v) > tol)[0] + 1
    groups = np.concatenate([[0], breaks, [len(v)]])
    outv = np.empty(len(groups) - 1)
    outw = np.empty(len(groups) - 1)
    for g in range(len(groups) - 1):
        lo, hi = groups[g], groups[g + 1]
        seg_w = w[lo:hi]
        total = seg_w.sum()
        outv[g] = np.average(v[lo:hi], weights=seg_w) if total > 0 else v[lo:hi].mean()
        outw[g] = total
    return outv, outw


def _site_distribution(psi: PureState, A_single):
    """Eigenvalue support, outcome probabilities, mean, and variance."""
    mat = _to_array(A_single)
    if mat.ndim == 1:
        eigs = mat.real
        amps = psi.amplitudes
    else:
        eigs, U = spectral_decompose(mat)
        amps = U.conj().T @ psi.amplitudes
    probs = np.abs(amps) ** 2
    spread = float(eigs.max() - eigs.min()) if len(eigs) > 1 else 1.0
    tol = max(1e-9 * max(spread, 1.0), 1e-14)
    support, weight = _cluster_1d(np.asarray(eigs, dtype=float), probs, tol)
    mean = float(np.dot(weight, support))
    var = float(np.dot(weight, support**2) - mean**2)
    return support, weight, mean, var, tol


def _convolve_copies(support: np.ndarray, weight: np.ndarray, n: int, tol: float):
    """n-fold convolution of a discrete distribution, clustered per step."""
    total_v = np.array([0.0])
    total_w = np.array([1.0])
    for _ in range(n):
        v = (total_v[:, None] + support[None, :]).ravel()
        w = (total_w[:, None] * weight[None, :]).ravel()
        total_v, total_w = _cluster_1d(v, w, tol)
    return total_v, total_w


def _gap_profile(values: np.ndarray, probs: np.ndarray, tol: float):
    """Nonnegative gap grid and trace norms sum_W sqrt(p(W+d) p(W))."""
    diffs = values[:, None] - values[None, :]
    prods = np.sqrt(probs[:, None] * probs[None, :])
    keep = diffs >= -tol
    grid, norms = _cluster_1d(np.abs(diffs[keep]), prods[keep], tol)
    if len(grid) and grid[0] <= tol:
        grid[0] = 0.0
    return grid, norms


@dataclass
class CopyProfile:
    """Aligned gap-resolved coherence profiles of psi^n versus phi^m."""

    n: int
    m: int
    delta_grid: np.ndarray
    psi_norms: np.ndarray
    phi_norms: np.ndarray
    profile_distance: float
    x0: float = 0.0
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        grid = np.asarray(self.delta_grid, dtype=float)
        for name in ("psi_norms", "phi_norms"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != grid.shape:
                raise ValidationError(f"{name} does not match the gap grid")
            if len(arr) and arr.min() < -1e-12:
                raise ValidationError(f"{name} contains negative trace norms")
            setattr(self, name, arr)
        self.delta_grid = grid


def copy_equivalence(psi: PureState, A_single, phi: PureState, n: int) -> CopyProfile:
    """Compare delta-coherence profiles of psi^(x)n and phi^(x)m.

    m is set by the variance ratio rule m = round(n V(psi)/V(phi)).  The two
    profiles are interpolated onto the union gap grid and the distance is
    the summed absolute difference, skipping grid points where both norms
    vanish.  The mean offset X0 = n<A>_psi - m<A>_phi is reported for
    alignment bookkeeping; gap grids themselves are translation invariant,
    so X0 never moves them.  Gaps carried by (near-)zero amplitude land in
    diagnostics rather than being patched away.
    """
    if n < 1:
        raise ValidationError("n must be positive")
    sup_psi, w_psi, mean_psi, var_psi, tol = _site_distribution(psi, A_single)
    sup_phi, w_phi, mean_phi, var_phi, tol_phi = _site_distribution(phi, A_single)
    tol = max(tol, tol_phi)
    if var_phi <= tol:
        raise ValidationError("reference state has no variance along A")
    dim_site = len(psi.amplitudes)
    m = int(round(n * var_psi / var_phi))
    if m < 1:
        raise ValidationError(f"variance ratio rule gives m={m}; nothing to compare")
    for label, copies in (("psi", n), ("phi", m)):
        if dim_site**copies > TOL.copy_dim_cap:
            raise ResourceLimitError(
                f"{label} side needs dim {dim_site}^{copies}, above the cap "
                f"{TOL.copy_dim_cap}; reduce n"
            )
    vals_n, probs_n = _convolve_copies(sup_psi, w_psi, n, tol)
    vals_m, probs_m = _convolve_copies(sup_phi, w_phi, m, tol)
    grid_n, norms_n = _gap_profile(vals_n, probs_n, tol)
    grid_m, norms_m = _gap_profile(vals_m, probs_m, tol)
    union, _ = _cluster_1d(
        np.concatenate([grid_n, grid_m]), np.ones(len(grid_n) + len(grid_m)), tol
    )
    live_n = grid_n[(norms_n >= 1e-12) & (grid_n > tol)]
    live_m = grid_m[(norms_m >= 1e-12) & (grid_m > tol)]
    if len(live_n) and len(live_m):
        nearest = np.abs(live_n[:, None] - live_m[None, :]).min()
        if nearest > tol:
            raise ValidationError(
                "gap grids of the two copy states share no nonzero gap; the "
                "profiles cannot be compared along this observable"
            )
    psi_interp = np.interp(union, grid_n, norms_n, left=0.0, right=0.0)
    phi_interp = np.interp(union, grid_m, norms_m, left=0.0, right=0.0)
    alive = (psi_interp >= 1e-12) | (phi_interp >= 1e-12)
    distance = float(np.abs(psi_interp - phi_interp)[alive].sum())
    x0 = float(n * mean_psi - m * mean_phi)
    diagnostics = {
        "psi_zero_gaps": union[(psi_interp < 1e-12) & (phi_interp >= 1e-12)],
        "phi_zero_gaps": union[(phi_interp < 1e-12) & (psi_interp >= 1e-12)],
        "variance_psi": var_psi,
        "variance_phi": var_phi,
    }
    return CopyProfile(
        n, m, union, psi_interp, phi_interp, distance, x0, diagnostics
    )
