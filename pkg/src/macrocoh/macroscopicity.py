"""Effective-size measures from Fisher information over observable families.

The common engine maximizes a quadratic form v.Mv over vectors v made of
per-block unit vectors: Bloch 3-vectors for qubit sums A = sum_i n_i.sigma_i,
or (cos t, sin t) pairs for quadrature sums x^t = sum_i cos(t_i) x_i +
sin(t_i) p_i.  The Fisher information (and the Hilbert-Schmidt commutator
measure) are quadratic in the observable, so the whole family collapses to
one real PSD matrix M assembled once from the state's eigensystem.  The
maximization runs block coordinate ascent where each block update is a
sphere-constrained quadratic subproblem solved through its Lagrange secular
equation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq
from scipy.special import roots_legendre

from .config import TOL
from .fock import FockSpace, characteristic_grid, check_truncation
from .measures import MEASURE_IDS, compute_measure, il_measure, qfi
from .states import (
    DensityMatrix,
    PureState,
    ValidationError,
    _to_array,
    spectral_decompose,
)

_PAULIS = np.array(
    [
        [[0.0, 1.0], [1.0, 0.0]],
        [[0.0, -1.0j], [1.0j, 0.0]],
        [[1.0, 0.0], [0.0, -1.0]],
    ],
    dtype=complex,
)


@dataclass
class SearchConfig:
    """Knobs for the restarted block-coordinate ascent."""

    restarts: int = 20
    max_sweeps: int = 200
    convergence_tol: float = 1e-10
    seed: int = 0

    def __post_init__(self):
        if self.restarts < 1 or self.max_sweeps < 1:
            raise ValidationError("restarts and max_sweeps must be positive")
        if self.convergence_tol <= 0:
            raise ValidationError("convergence_tol must be positive")


@dataclass
class QuadraticForm:
    """v.Mv = measure(rho, A(v)) for block-structured coefficient vectors."""

    block_dim: int
    n_blocks: int
    matrix: np.ndarray

    def __post_init__(self):
        n = self.block_dim * self.n_blocks
        mat = np.asarray(self.matrix, dtype=float)
        if mat.shape != (n, n):
            raise ValidationError(
                f"form matrix shape {mat.shape} does not match {self.n_blocks} "
                f"blocks of dimension {self.block_dim}"
            )
        defect = np.abs(mat - mat.T).max() if n else 0.0
        if defect > 1e-10:
            raise ValidationError(f"form matrix not symmetric: defect {defect:.3e}")
        self.matrix = (mat + mat.T) / 2.0
        low = float(np.linalg.eigvalsh(self.matrix).min()) if n else 0.0
        if low < -1e-9:
            raise ValidationError(f"form matrix not PSD: min eigenvalue {low:.3e}")


@dataclass
class LocalObservableFamily:
    """A = sum_i n_i . (sigma^x, sigma^y, sigma^z)_i with unit Bloch vectors."""

    n_sites: int
    bloch_vectors: np.ndarray

    def __post_init__(self):
        vecs = np.asarray(self.bloch_vectors, dtype=float)
        if vecs.shape != (self.n_sites, 3):
            raise ValidationError(
                f"expected {self.n_sites} Bloch 3-vectors, got shape {vecs.shape}"
            )
        norms = np.linalg.norm(vecs, axis=1)
        if np.abs(norms - 1.0).max() > 1e-10:
            raise ValidationError("Bloch vectors must be unit norm within 1e-10")
        self.bloch_vectors = vecs

    def observable(self) -> np.ndarray:
        """Assemble the summed observable on the 2^n_sites space."""
        ops = qubit_basis_ops(self.n_sites)
        coeffs = self.bloch_vectors.ravel()
        return np.einsum("k,kij->ij", coeffs, np.array(ops))


@dataclass
class QuadratureFamily:
    """x^theta = sum_i cos(theta_i) x_i + sin(theta_i) p_i."""

    n_modes: int
    angles: np.ndarray
    fock_dim: int

    def __post_init__(self):
        ang = np.asarray(self.angles, dtype=float)
        if ang.shape != (self.n_modes,):
            raise ValidationError(
                f"expected {self.n_modes} angles, got shape {ang.shape}"
            )
        self.angles = np.mod(ang, 2.0 * np.pi)

    def observable(self, fock: FockSpace) -> np.ndarray:
        if fock.n_modes != self.n_modes or fock.dim_per_mode != self.fock_dim:
            raise ValidationError("Fock space does not match this family")
        total = np.zeros((fock.dim, fock.dim), dtype=complex)
        for i, theta in enumerate(self.angles):
            total += fock.quadrature(theta, mode=i)
        return total


def qubit_basis_ops(n_sites: int) -> list[np.ndarray]:
    """Embedded single-site Paulis, flattened site-major (x, y, z per site)."""
    ops = []
    for i in range(n_sites):
        for pauli in _PAULIS:
            factors = [np.eye(2, dtype=complex)] * n_sites
            factors[i] = pauli
            full = factors[0]
            for f in factors[1:]:
                full = np.kron(full, f)
            ops.append(full)
    return ops


def quadrature_basis_ops(fock: FockSpace) -> list[np.ndarray]:
    """Embedded (x_i, p_i) pairs, flattened mode-major."""
    ops = []
    for i in range(fock.n_modes):
        ops.append(fock.position(i))
        ops.append(fock.momentum(i))
    return ops


def _full_spectrum(state):
    """Complete eigensystem of the dense density matrix (null space included)."""
    if isinstance(state, PureState):
        mat = np.outer(state.amplitudes, state.amplitudes.conj())
    elif isinstance(state, DensityMatrix):
        mat = state.matrix
    else:
        mat = _to_array(state)
    return spectral_decompose(mat)


def _assemble_form(state, basis_ops, block_dim: int, weight_kind: str) -> QuadraticForm:
    ops = np.array(basis_ops, dtype=complex)
    if len(ops) % block_dim:
        raise ValidationError("basis operator count is not a whole number of blocks")
    lams, V = _full_spectrum(state)
    lam = np.where(lams > TOL.rank_cutoff, lams, 0.0)
    D = lam[:, None] - lam[None, :]
    if weight_kind == "qfi":
        S = lam[:, None] + lam[None, :]
        mask = S > TOL.rank_cutoff
        w = np.where(mask, 2.0 * D * D / np.where(mask, S, 1.0), 0.0)
    elif weight_kind == "il":
        w = 0.5 * D * D
    else:
        raise ValidationError(f"unknown weight kind {weight_kind!r}")
    T = np.einsum("ia,kij,jb->kab", V.conj(), ops, V)
    M = np.real(np.einsum("kab,lab,ab->kl", T, T.conj(), w))
    return QuadraticForm(block_dim, len(ops) // block_dim, M)


def qfi_quadratic_form(state, basis_ops, block_dim: int | None = None) -> QuadraticForm:
    """Fisher information of sum_k v_k B_k as the form v.Mv.

    M_(k,l) = 2 sum_{a,b} [(l_a - l_b)^2 / (l_a + l_b)] Re(T_kab conj(T_lab))
    with T_kab the basis operators in the state's eigenbasis.  block_dim
    defaults to treating every operator as its own block.
    """
    bd = len(basis_ops) if block_dim is None else block_dim
    return _assemble_form(state, basis_ops, bd, "qfi")


def _fix_sign(v: np.ndarray) -> np.ndarray:
    k = int(np.argmax(np.abs(v)))
    return -v if v[k] < 0 else v


def _sphere_max(M: np.ndarray, c: np.ndarray) -> tuple[np.ndarray, float]:
    """Maximize v.Mv + 2 v.c over the unit sphere.

    Stationary points satisfy (lam I - M) v = c with the maximizer's
    multiplier lam at or above the top eigenvalue of M; the secular equation
    |(lam I - M)^{-1} c| = 1 has its relevant root in (q_max, q_max + |c|].
    When c has no component on the top eigenspace the root can collapse onto
    q_max itself (the hard case) and the solution gains a free component
    along the top eigenvector, fixed here to the non-negative sign.
    """
    q, U = np.linalg.eigh(M)
    qmax = float(q[-1])
    ch = U.T @ c
    cnorm = float(np.linalg.norm(c))
    scale = max(1.0, abs(qmax))
    if cnorm <= 1e-15 * scale:
        v = _fix_sign(U[:, -1].copy())
        return v, float(v @ M @ v)
    top = (qmax - q) <= 1e-12 * scale
    if np.linalg.norm(ch[top]) <= 1e-13 * cnorm:
        rest = ~top
        w = ch[rest] / (qmax - q[rest])
        nperp2 = float(w @ w)
        if nperp2 <= 1.0:
            v = U[:, rest] @ w + np.sqrt(1.0 - nperp2) * _fix_sign(U[:, top][:, -1].copy())
            return v, float(v @ M @ v + 2.0 * v @ c)

    def secular(lam):
        return float(np.sum((ch / (lam - q)) ** 2)) - 1.0

    # The root lies in (q_max, q_max + |c|]; the upper end is exact when the
    # block matrix is isotropic, so nudge it outward until the sign flips.
    hi = qmax + cnorm
    for factor in (1.0, 1.0 + 1e-12, 1.0 + 1e-9, 1.0 + 1e-3, 2.0):
        hi = qmax + cnorm * factor
        if secular(hi) <= 0.0:
            break
    lo = None
    for eps in (1e-9, 1e-12, 1e-15):
        cand = qmax + eps * scale
        if cand < hi and secular(cand) > 0.0:
            lo = cand
            break
    if lo is None:
        # Root indistinguishable from q_max at working precision.
        lam_star = qmax
    else:
        lam_star = brentq(secular, lo, hi, xtol=1e-14, rtol=1e-15)
    denom = lam_star - q
    denom[np.abs(denom) < 1e-300] = 1e-300
    v = U @ (ch / denom)
    nv = np.linalg.norm(v)
    if nv > 0:
        v = v / nv
    return v, float(v @ M @ v + 2.0 * v @ c)


def block_coordinate_ascent(
    form: QuadraticForm, cfg: SearchConfig | None = None
) -> tuple[float, np.ndarray, np.ndarray]:
    """Restarted ascent of v.Mv over products of unit spheres.

    Returns (best value, best coefficient vector, objective trace of the
    winning restart).  Restarts use independently derived seeds; ties within
    1e-12 break toward the lexicographically smallest coefficient vector so
    reruns and concurrent invocations agree.
    """
    cfg = cfg or SearchConfig()
    M = form.matrix
    bd, nb = form.block_dim, form.n_blocks
    best_val = -np.inf
    best_v = None
    best_trace = None
    for restart in range(cfg.restarts):
        rng = np.random.default_rng([cfg.seed, restart])
        blocks = rng.normal(size=(nb, bd))
        blocks /= np.linalg.norm(blocks, axis=1, keepdims=True)
        v = blocks.ravel()
        obj = float(v @ M @ v)
        trace = [obj]
        for _ in range(cfg.max_sweeps):
            start = obj
            for i in range(nb):
                sl = slice(i * bd, (i + 1) * bd)
                Mii = M[sl, sl]
                c = M[sl] @ v - Mii @ v[sl]
                v[sl], _ = _sphere_max(Mii, c)
                obj = float(v @ M @ v)
                trace.append(obj)
            if obj - start < cfg.convergence_tol:
                break
        if obj > best_val + 1e-12 or (
            obj > best_val - 1e-12
            and best_v is not None
            and tuple(v) < tuple(best_v)
        ):
            best_val, best_v, best_trace = obj, v.copy(), np.array(trace)
    return best_val, best_v, best_trace


def nf_qubits(
    state, cfg: SearchConfig | None = None
) -> tuple[float, LocalObservableFamily]:
    """Effective size max_A F(rho, A) / (4N) over sums of unit local spins."""
    lams, V = _full_spectrum(state)
    dim = V.shape[0]
    n_sites = dim.bit_length() - 1
    if 2**n_sites != dim:
        raise ValidationError(f"dimension {dim} is not a power of two")
    form = qfi_quadratic_form(state, qubit_basis_ops(n_sites), block_dim=3)
    value, v, _ = block_coordinate_ascent(form, cfg)
    family = LocalObservableFamily(n_sites, v.reshape(n_sites, 3))
    return max(value, 0.0) / (4.0 * n_sites), family


def nf_quadratures(
    state, fock: FockSpace, cfg: SearchConfig | None = None, check_health: bool = True
) -> tuple[float, QuadratureFamily]:
    """Effective size max_theta F(rho, x^theta) / (4N) over quadrature sums."""
    if check_health:
        check_truncation(state, fock)
    form = qfi_quadratic_form(state, quadrature_basis_ops(fock), block_dim=2)
    value, v, _ = block_coordinate_ascent(form, cfg)
    pairs = v.reshape(fock.n_modes, 2)
    angles = np.mod(np.arctan2(pairs[:, 1], pairs[:, 0]), 2.0 * np.pi)
    family = QuadratureFamily(fock.n_modes, angles, fock.dim_per_mode)
    return max(value, 0.0) / (4.0 * fock.n_modes), family


def nlj_closed_form(state, fock: FockSpace, check_health: bool = True) -> float:
    """Phase-space size as (1/2) sum_i [I_L(rho, x_i) + I_L(rho, p_i)]."""
    if check_health:
        check_truncation(state, fock)
    total = 0.0
    for i in range(fock.n_modes):
        total += il_measure(state, fock.position(i))
        total += il_measure(state, fock.momentum(i))
    return 0.5 * total


def nlj_integral(
    state,
    fock: FockSpace,
    radius: float = 6.0,
    points: int = 200,
    tail_tol: float = 1e-4,
) -> float:
    """Phase-space size as (1/2 pi) integral of |alpha|^2 |chi(alpha)|^2.

    Tensor-product Gauss-Legendre quadrature over the square [-R, R]^2 with
    alpha = u + iv.  The neglected tail is bounded by assuming the worst
    Gaussian envelope |chi(alpha)|^2 <= m exp(-(r^2 - R^2)/2) beyond the
    grid, where m is the largest |chi|^2 on the boundary ring; integrating
    gives tail <= m (R^2 + 2).
    """
    if fock.n_modes != 1:
        raise ValidationError("the quadrature route is single mode; use additivity")
    if radius <= 0:
        raise ValidationError("radius must be positive")
    check_truncation(state, fock)
    nodes, weights = roots_legendre(points)
    us = radius * nodes
    wts = radius * weights
    chi = characteristic_grid(state, us, us, fock)
    chi2 = np.abs(chi) ** 2
    boundary = max(
        chi2[0, :].max(), chi2[-1, :].max(), chi2[:, 0].max(), chi2[:, -1].max()
    )
    r_box = float(np.abs(us).max())
    tail = boundary * (r_box**2 + 2.0)
    if tail > tail_tol:
        raise ValidationError(
            f"characteristic-function tail estimate {tail:.3e} exceeds "
            f"{tail_tol:.1e}; increase the radius"
        )
    r2 = us[:, None] ** 2 + us[None, :] ** 2
    return float(np.einsum("i,j,ij->", wts, wts, r2 * chi2)) / (2.0 * np.pi)


def nlj_tilde(
    state, fock: FockSpace, cfg: SearchConfig | None = None, check_health: bool = True
) -> tuple[float, QuadratureFamily]:
    """Refined size max_theta I_L(rho, x^theta) / N over quadrature sums."""
    if check_health:
        check_truncation(state, fock)
    form = _assemble_form(state, quadrature_basis_ops(fock), 2, "il")
    value, v, _ = block_coordinate_ascent(form, cfg)
    pairs = v.reshape(fock.n_modes, 2)
    angles = np.mod(np.arctan2(pairs[:, 1], pairs[:, 0]), 2.0 * np.pi)
    family = QuadratureFamily(fock.n_modes, angles, fock.dim_per_mode)
    return max(value, 0.0) / fock.n_modes, family


def _sphere_directions(spacing_deg: float) -> np.ndarray:
    """Polar grid of unit 3-vectors at the given angular spacing, poles once."""
    step = np.deg2rad(spacing_deg)
    thetas = np.arange(0.0, np.pi + step / 2, step)
    phis = np.arange(0.0, 2.0 * np.pi - step / 2, step)
    dirs = [np.array([0.0, 0.0, 1.0])]
    for theta in thetas:
        if theta < step / 2 or theta > np.pi - step / 2:
            continue
        st, ct = np.sin(theta), np.cos(theta)
        for phi in phis:
            dirs.append(np.array([st * np.cos(phi), st * np.sin(phi), ct]))
    dirs.append(np.array([0.0, 0.0, -1.0]))
    return np.array(dirs)


def nf_grid_oracle(
    state, spacing_deg: float = 10.0, symmetric: bool = False
) -> tuple[float, np.ndarray]:
    """Brute-force N_F over a product grid of Bloch directions.

    Exhaustive over all per-site direction combinations for up to three
    sites.  With symmetric=True all sites share one direction, which is a
    lower bound on the product-grid value for any site count (and exact for
    permutation-symmetric states whose optimum hits the F <= 4N^2 ceiling).
    """
    lams, V = _full_spectrum(state)
    dim = V.shape[0]
    n = dim.bit_length() - 1
    if 2**n != dim:
        raise ValidationError(f"dimension {dim} is not a power of two")
    form = qfi_quadratic_form(state, qubit_basis_ops(n), block_dim=3)
    M = form.matrix
    dirs = _sphere_directions(spacing_deg)
    nd = len(dirs)

    if symmetric:
        tiled = np.tile(dirs, (1, n))
        vals = np.einsum("ki,ij,kj->k", tiled, M, tiled)
        k = int(np.argmax(vals))
        return float(vals[k]) / (4.0 * n), np.tile(dirs[k], (n, 1))
    if n > 3:
        raise ValidationError(
            "product grid enumeration supports at most 3 sites; use symmetric=True"
        )

    diag = [np.einsum("ki,ij,kj->k", dirs, M[3 * i : 3 * i + 3, 3 * i : 3 * i + 3], dirs) for i in range(n)]
    cross = {}
    for i in range(n):
        for j in range(i + 1, n):
            cross[i, j] = 2.0 * dirs @ M[3 * i : 3 * i + 3, 3 * j : 3 * j + 3] @ dirs.T

    if n == 1:
        k = int(np.argmax(diag[0]))
        return float(diag[0][k]) / 4.0, dirs[k][None, :]
    if n == 2:
        table = diag[0][:, None] + diag[1][None, :] + cross[0, 1]
        a, b = np.unravel_index(int(np.argmax(table)), table.shape)
        return float(table[a, b]) / 8.0, np.array([dirs[a], dirs[b]])

    best = -np.inf
    combo = (0, 0, 0)
    base = diag[1][:, None] + diag[2][None, :] + cross[1, 2]
    for a in range(nd):
        table = base + cross[0, 1][a][:, None] + cross[0, 2][a][None, :]
        b, c = np.unravel_index(int(np.argmax(table)), table.shape)
        val = diag[0][a] + table[b, c]
        if val > best:
            best, combo = float(val), (a, b, c)
    return best / 12.0, np.array([dirs[k] for k in combo])


def quadrature_grid_oracle(
    state, fock: FockSpace, spacing_deg: float = 10.0, weight_kind: str = "qfi"
) -> tuple[float, np.ndarray]:
    """Brute-force quadrature-family value over a product grid of angles."""
    if fock.n_modes > 2:
        raise ValidationError("angle grid enumeration supports at most 2 modes")
    check_truncation(state, fock)
    form = _assemble_form(state, quadrature_basis_ops(fock), 2, weight_kind)
    M = form.matrix
    step = np.deg2rad(spacing_deg)
    angles = np.arange(0.0, 2.0 * np.pi - step / 2, step)
    circle = np.column_stack([np.cos(angles), np.sin(angles)])
    denom = 4.0 * fock.n_modes if weight_kind == "qfi" else float(fock.n_modes)
    if fock.n_modes == 1:
        vals = np.einsum("ki,ij,kj->k", circle, M, circle)
        k = int(np.argmax(vals))
        return float(vals[k]) / denom, angles[[k]]
    d1 = np.einsum("ki,ij,kj->k", circle, M[:2, :2], circle)
    d2 = np.einsum("ki,ij,kj->k", circle, M[2:, 2:], circle)
    cross = 2.0 * circle @ M[:2, 2:] @ circle.T
    table = d1[:, None] + d2[None, :] + cross
    a, b = np.unravel_index(int(np.argmax(table)), table.shape)
    return float(table[a, b]) / denom, angles[[a, b]]


def m4_ordering_check(measure_id: str, A, pair1, pair2, atol: float = 1e-9) -> dict:
    """Compare a measure on two equal-weight two-eigenvector superpositions.

    Pairs index into the descending eigenvalue list of A.  The verdict is
    "strict" when the first superposition scores higher by more than atol,
    "equal" within atol, and "reversed" otherwise.  Monotones tied to the
    eigenvalue gap order strictly; gap-blind measures such as the relative
    entropy of asymmetry come out equal.
    """
    if measure_id not in MEASURE_IDS:
        raise ValidationError(f"unknown measure id {measure_id!r}")
    mat = _to_array(A)
    eigs, vecs = spectral_decompose(mat)
    dim = len(eigs)
    for idx in (*pair1, *pair2):
        if not 0 <= int(idx) < dim:
            raise ValidationError(f"eigenvector index {idx} out of range for dim {dim}")
    values = []
    gaps = []
    for i, j in (pair1, pair2):
        if i == j:
            raise ValidationError("superposition needs two distinct eigenvectors")
        psi = PureState((vecs[:, int(i)] + vecs[:, int(j)]) / np.sqrt(2.0))
        values.append(compute_measure(psi, mat, measure_id).value)
        gaps.append(abs(float(eigs[int(i)] - eigs[int(j)])))
    if values[0] > values[1] + atol:
        verdict = "strict"
    elif abs(values[0] - values[1]) <= atol:
        verdict = "equal"
    else:
        verdict = "reversed"
    return {
        "measure_id": measure_id,
        "gap_1": gaps[0],
        "gap_2": gaps[1],
        "value_1": values[0],
        "value_2": values[1],
        "verdict": verdict,
    }
