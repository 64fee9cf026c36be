"""Scalar coherence and asymmetry measures.

Everything here quantifies how much coherence a state carries across the
spectral gaps of an observable A:

* variance          V(psi, A), pure states only
* qfi               F(rho, A) = 2 sum_{a,b} (l_a - l_b)^2 / (l_a + l_b)
                    |<psi_a|A|psi_b>|^2 over eigenvalue pairs with
                    l_a + l_b above the rank cutoff; F = 4V on pure states
* qfi_bures_oracle  8 (1 - Fid(rho, e^{-i dx A} rho e^{i dx A})) / dx^2,
                    an independent finite-difference route to the same value
* skew_information  -1/2 tr([sqrt(rho), A]^2)
* il_measure        -1/2 tr([rho, A]^2)
* relative_entropy_asymmetry   S(rho^(0)) - S(rho) in nats
* convex_roof_search  samples pure-state decompositions of rho; the minimal
                    ensemble-average variance converges to F/4 from above

The spectral sums support states stored in factored form (only the nonzero
eigenpairs): matrix elements against the absent null space are recovered
from <psi_a|A^2|psi_a> completeness, so no dense diagonalization is needed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import TOL
from .modes import gap_set, mode_component
from .states import (
    DensityMatrix,
    HermitianObservable,
    PureState,
    ValidationError,
    _to_array,
    hermiticity_defect,
    phase_conjugate,
)

MEASURE_IDS = ("variance", "qfi", "qfi_bures", "skew", "il", "rel_ent", "roof")


@dataclass
class ConvexRoofConfig:
    n_decompositions: int = 2000
    max_ensemble_size: int | None = None  # default dim * rank, resolved per state
    seed: int = 0

    def __post_init__(self):
        if self.n_decompositions <= 0:
            raise ValidationError("n_decompositions must be positive")
        if self.max_ensemble_size is not None and self.max_ensemble_size <= 0:
            raise ValidationError("max_ensemble_size must be positive")


@dataclass
class MeasureReport:
    value: float
    measure_id: str
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.measure_id not in MEASURE_IDS:
            raise ValidationError(f"unknown measure id {self.measure_id!r}")
        if self.value < -1e-9:
            raise ValidationError(
                f"measure {self.measure_id} returned {self.value:.3e} < -1e-9"
            )


def _as_density(rho) -> DensityMatrix:
    if isinstance(rho, DensityMatrix):
        return rho
    if isinstance(rho, PureState):
        return rho.density()
    return DensityMatrix(rho)


def _observable(A, dim: int) -> np.ndarray:
    """Coerce A to a dense matrix or, for 1-D input, a real diagonal.

    Diagonal observables stay as vectors so collective spin sums on large
    tensor-product spaces never materialize a dim x dim matrix.
    """
    mat = _to_array(A)
    if mat.ndim == 1:
        if mat.shape != (dim,):
            raise ValidationError(
                f"diagonal observable length {mat.shape[0]} does not match dim {dim}"
            )
        if np.abs(mat.imag).max(initial=0.0) > TOL.hermitian_atol:
            raise ValidationError("diagonal observable must be real")
        return mat.real
    if mat.shape != (dim, dim):
        raise ValidationError(f"observable shape {mat.shape} does not match dim {dim}")
    if not isinstance(A, HermitianObservable):
        defect = hermiticity_defect(mat)
        if defect > TOL.hermitian_atol:
            raise ValidationError(f"observable not Hermitian: defect {defect:.3e}")
    return mat


def _spectral_moments(rho: DensityMatrix, A):
    """(eigenvalues, A in the eigenbasis, per-vector <A^2> values, complete?).

    "complete" is True when the stored eigenvectors span the whole space;
    otherwise absent eigenvalues are exact zeros and the <A^2> column lets
    callers reconstruct the coupling into the null space.
    """
    lams, V = rho.spectrum()
    mat = _observable(A, V.shape[0])
    AV = mat[:, None] * V if mat.ndim == 1 else mat @ V
    B = V.conj().T @ AV
    diag_a2 = np.real(np.einsum("ia,ia->a", AV.conj(), AV))
    return lams, B, diag_a2, V.shape[1] == V.shape[0]


def variance(psi, A) -> float:
    """<A^2> - <A>^2 on a pure state.

    Mixed states have no canonical variance; use qfi/4, which is its convex
    roof extension.
    """
    if isinstance(psi, DensityMatrix):
        raise ValidationError(
            "variance is defined on pure states; for mixed states use qfi/4"
        )
    vec = psi.amplitudes if isinstance(psi, PureState) else np.asarray(psi, dtype=complex)
    vec = vec.reshape(-1)
    mat = _observable(A, vec.shape[0])
    Av = mat * vec if mat.ndim == 1 else mat @ vec
    mean = float(np.real(np.vdot(vec, Av)))
    second = float(np.real(np.vdot(Av, Av)))
    return second - mean * mean


def qfi(rho, A, rank_cutoff: float | None = None) -> float:
    """Fisher information of rho under rotations generated by A.

    Eigenvalues below the cutoff are treated as exact zeros, and pairs with
    l_a + l_b below the cutoff are skipped (their gap carries no metrological
    weight).  Pairs against the null space reduce to 4 l_a times the leakage
    <psi_a|A^2|psi_a> - sum_b |<psi_a|A|psi_b>|^2.
    """
    cutoff = TOL.rank_cutoff if rank_cutoff is None else float(rank_cutoff)
    dm = _as_density(rho)
    lams, B, diag_a2, complete = _spectral_moments(dm, A)
    lam = np.where(lams > cutoff, lams, 0.0)
    S = lam[:, None] + lam[None, :]
    D = lam[:, None] - lam[None, :]
    mask = S > cutoff
    W = np.where(mask, D * D / np.where(mask, S, 1.0), 0.0)
    val = 2.0 * float(np.sum(W * np.abs(B) ** 2))
    if not complete:
        leak = np.clip(diag_a2 - np.sum(np.abs(B) ** 2, axis=1), 0.0, None)
        val += 4.0 * float(np.dot(lam, leak))
    return val


def _psd_sqrt(rho: DensityMatrix) -> np.ndarray:
    lams, V = rho.spectrum()
    s = np.sqrt(np.clip(lams, 0.0, None))
    return (V * s) @ V.conj().T


def fidelity(rho, sigma) -> float:
    """Uhlmann fidelity tr sqrt(sqrt(rho) sigma sqrt(rho)), in [0, 1]."""
    r = _as_density(rho)
    s = _as_density(sigma)
    root = _psd_sqrt(r)
    inner = root @ s.matrix @ root
    eigs = np.linalg.eigvalsh((inner + inner.conj().T) / 2.0)
    return float(np.sqrt(np.clip(eigs, 0.0, None)).sum())


def qfi_bures_oracle(rho, A, dx: float = 1e-4) -> float:
    """Finite-difference Fisher information from the fidelity drop.

    A second-order-accurate probe of the same quantity as qfi: rotate by a
    small dx, measure 8 (1 - Fid) / dx^2.  Kept deliberately independent of
    the spectral formula so the two can cross-check each other.
    """
    if dx <= 0:
        raise ValidationError(f"dx must be positive, got {dx}")
    dm = _as_density(rho)
    rotated = phase_conjugate(dm, A, dx)
    fid = min(fidelity(dm, rotated), 1.0)
    return 8.0 * (1.0 - fid) / (dx * dx)


def skew_information(rho, A) -> float:
    """-1/2 tr([sqrt(rho), A]^2) = 1/2 sum_{a,b} (s_a - s_b)^2 |A_ab|^2.

    s_a are the square roots of the eigenvalues; pairs against the null
    space contribute l_a times the A^2 leakage, exactly as in qfi.
    """
    dm = _as_density(rho)
    lams, B, diag_a2, complete = _spectral_moments(dm, A)
    s = np.sqrt(np.clip(lams, 0.0, None))
    D = s[:, None] - s[None, :]
    val = 0.5 * float(np.sum(D * D * np.abs(B) ** 2))
    if not complete:
        leak = np.clip(diag_a2 - np.sum(np.abs(B) ** 2, axis=1), 0.0, None)
        val += float(np.dot(s * s, leak))
    return val


def il_measure(rho, A) -> float:
    """-1/2 tr([rho, A]^2) = 1/2 sum_{a,b} (l_a - l_b)^2 |A_ab|^2."""
    dm = _as_density(rho)
    if dm.is_factored:
        lams, B, diag_a2, complete = _spectral_moments(dm, A)
        D = lams[:, None] - lams[None, :]
        val = 0.5 * float(np.sum(D * D * np.abs(B) ** 2))
        if not complete:
            leak = np.clip(diag_a2 - np.sum(np.abs(B) ** 2, axis=1), 0.0, None)
            val += float(np.dot(lams * lams, leak))
        return val
    mat = _observable(A, dm.dim)
    if mat.ndim == 1:
        comm = dm.matrix * (mat[None, :] - mat[:, None])
    else:
        comm = dm.matrix @ mat - mat @ dm.matrix
    # [rho, A] is anti-Hermitian, so -tr(C^2) = tr(C C†) >= 0.
    return 0.5 * float(np.real(np.vdot(comm, comm)))


def von_neumann_entropy(rho) -> float:
    """S(rho) = -sum l ln l in nats, with 0 ln 0 = 0."""
    dm = _as_density(rho)
    lams, _ = dm.spectrum()
    lam = lams[lams > TOL.rank_cutoff]
    return float(-np.sum(lam * np.log(lam)))


def relative_entropy_asymmetry(rho, A) -> float:
    """S(rho^(0)) - S(rho): entropy produced by block-dephasing in A.

    Equals the relative entropy from rho to the nearest A-symmetric state.
    Depends only on which eigenspaces the coherences connect, not on the
    size of the gaps, so equal-weight two-level superpositions all score
    ln 2 regardless of their gap.
    """
    dm = _as_density(rho)
    dephased = mode_component(dm.matrix, A, 0.0).matrix
    return von_neumann_entropy(DensityMatrix(dephased, validate=False)) - von_neumann_entropy(dm)


def _haar_isometry(k: int, r: int, rng: np.random.Generator) -> np.ndarray:
    """k x r isometry, Haar-distributed (QR of a complex Gaussian)."""
    G = rng.normal(size=(k, r)) + 1j * rng.normal(size=(k, r))
    Q, R = np.linalg.qr(G)
    diag = np.diagonal(R)
    phases = np.where(np.abs(diag) > 0, diag / np.abs(np.where(diag == 0, 1, diag)), 1.0)
    return Q * phases.conj()[None, :]


def convex_roof_search(rho, A, cfg: ConvexRoofConfig | None = None, return_samples: bool = False):
    """Minimum ensemble-average variance over sampled decompositions of rho.

    Decompositions come from measuring a purification's environment in a
    rotated basis: |phi_mu> = sum_a W_mu,a sqrt(l_a) |psi_a> for a Haar
    isometry W, which enumerates all ensembles up to the environment size.
    The eigenensemble (W = identity) is always the first candidate, and the
    environment cardinality k cycles through a schedule concentrated on the
    minimal value r = rank(rho), where the sampling measure is tightest:
    k in (r, r, r, r+1, 2r), capped at max_ensemble_size.  Every sample
    upper-bounds qfi/4 (the true infimum); the returned value is the best
    (smallest) average found.

    Returns (best_average, best_ensemble) where best_ensemble is a list of
    (probability, amplitude vector) pairs.  With return_samples=True a third
    element carries every sampled average.
    """
    cfg = cfg or ConvexRoofConfig()
    dm = _as_density(rho)
    lams, V = dm.spectrum()
    keep = lams > TOL.rank_cutoff
    lam = lams[keep]
    lam = lam / lam.sum()
    Vr = V[:, keep]
    r = lam.shape[0]
    cap = cfg.max_ensemble_size if cfg.max_ensemble_size is not None else dm.dim * r
    cap = max(r, int(cap))
    schedule = [r, r, r, min(cap, r + 1), min(cap, 2 * r)]

    mat = _observable(A, dm.dim)
    base = Vr * np.sqrt(lam)  # columns sqrt(l_a)|psi_a>
    Abase = mat @ base
    A2base = mat @ Abase
    tr_rho_A2 = float(np.real(np.einsum("ia,ia->", base.conj(), A2base)))

    best = np.inf
    best_W = None
    averages = np.empty(cfg.n_decompositions)
    for idx in range(cfg.n_decompositions):
        if idx == 0:
            W = np.eye(r, dtype=complex)
        else:
            rng = np.random.default_rng([cfg.seed, idx])
            W = _haar_isometry(schedule[idx % len(schedule)], r, rng)
        Phi = base @ W.T
        APhi = Abase @ W.T
        p = np.real(np.einsum("im,im->m", Phi.conj(), Phi))
        e = np.real(np.einsum("im,im->m", Phi.conj(), APhi))
        ok = p > TOL.selective_prob_floor
        avg = tr_rho_A2 - float(np.sum(e[ok] ** 2 / p[ok]))
        averages[idx] = avg
        if avg < best:
            best = avg
            best_W = W
    Phi = base @ best_W.T
    p = np.real(np.einsum("im,im->m", Phi.conj(), Phi))
    ensemble = [
        (float(p[m]), Phi[:, m] / np.sqrt(p[m]))
        for m in range(Phi.shape[1])
        if p[m] > TOL.selective_prob_floor
    ]
    if return_samples:
        return best, ensemble, averages
    return best, ensemble


def compute_measure(state, A, measure_id: str, roof_cfg: ConvexRoofConfig | None = None) -> MeasureReport:
    """Evaluate one named measure and wrap it in a MeasureReport."""
    if measure_id not in MEASURE_IDS:
        raise ValidationError(
            f"unknown measure {measure_id!r}; choose from {MEASURE_IDS}"
        )
    diagnostics: dict = {}
    if measure_id == "variance":
        value = variance(state, A)
    elif measure_id == "qfi":
        diagnostics["rank_cutoff"] = TOL.rank_cutoff
        value = qfi(state, A)
    elif measure_id == "qfi_bures":
        value = qfi_bures_oracle(state, A)
    elif measure_id == "skew":
        value = skew_information(state, A)
    elif measure_id == "il":
        value = il_measure(state, A)
    elif measure_id == "rel_ent":
        value = relative_entropy_asymmetry(state, A)
    else:  # roof
        cfg = roof_cfg or ConvexRoofConfig()
        value, ensemble, samples = convex_roof_search(state, A, cfg, return_samples=True)
        diagnostics.update(
            n_decompositions=cfg.n_decompositions,
            seed=cfg.seed,
            ensemble_size=len(ensemble),
            sample_mean=float(samples.mean()),
            sample_min=float(samples.min()),
            qfi_quarter=qfi(state, A) / 4.0,
        )
    return MeasureReport(value=float(value), measure_id=measure_id, diagnostics=diagnostics)
