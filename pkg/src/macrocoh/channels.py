"""Covariant channels: generation, verification, and monotonicity fuzzing.

A channel is free when it commutes with every phase rotation e^{-ixA}.  In
the A-eigenbasis this forces each Kraus operator to live on a single gap:
all its entries (i, j) share one eigenvalue difference a_i - a_j.  The
generator draws Gaussian entries on an exact gap pattern, rescales, and
completes the deterministic channel with K_0 = (I - sum K'K)^{1/2}, which is
gap-0 supported because sum K'K is block diagonal across A-eigenspaces.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import TOL
from .measures import compute_measure, qfi
from .modes import delta_coherence_norm, gap_set, trace_norm
from .states import (
    DensityMatrix,
    PureState,
    ValidationError,
    _to_array,
    phase_conjugate,
    random_density,
)

#: Measures accepted by monotonicity_report; "variance" is evaluated through
#: its convex-roof extension qfi/4 so mixed channel outputs stay in-domain.
MONOTONE_IDS = ("qfi", "variance", "skew", "rel_ent", "mode_norm")


@dataclass
class FreeChannel:
    """Kraus operators, each tagged with the gap it lives on."""

    kraus_ops: list
    mode_labels: list
    trace_preserving: bool = True

    def __post_init__(self):
        ops = [np.asarray(K, dtype=complex) for K in self.kraus_ops]
        if not ops:
            raise ValidationError("channel needs at least one Kraus operator")
        dim = ops[0].shape[0]
        for K in ops:
            if K.shape != (dim, dim):
                raise ValidationError("Kraus operators must be equal square matrices")
        if len(self.mode_labels) != len(ops):
            raise ValidationError("one mode label per Kraus operator required")
        total = sum(K.conj().T @ K for K in ops)
        eigs = np.linalg.eigvalsh(total)
        if eigs.max() > 1 + 1e-9:
            raise ValidationError(
                f"sum K'K exceeds identity: max eigenvalue {eigs.max():.12f}"
            )
        if self.trace_preserving:
            defect = np.abs(total - np.eye(dim)).max()
            if defect > 1e-9:
                raise ValidationError(
                    f"trace-preserving channel incomplete: |sum K'K - I| = {defect:.3e}"
                )
        self.kraus_ops = ops
        self.mode_labels = [float(x) for x in self.mode_labels]

    @property
    def dim(self) -> int:
        return self.kraus_ops[0].shape[0]


@dataclass
class CovarianceVerdict:
    passed: bool
    support_defect: float
    conjugation_residual: float
    failures: list = field(default_factory=list)


@dataclass
class MonotonicityReport:
    """Before/after values of a measure across one channel application."""

    measure_id: str
    before: float
    deterministic_after: float
    selective: list
    average_after: float
    m2a_verdict: str
    m2b_verdict: str
    slack: float

    def __post_init__(self):
        if self.selective:
            total = sum(p for p, _ in self.selective)
            if abs(total - 1.0) > 1e-9 and self.m2b_verdict != "skipped":
                raise ValidationError(
                    f"selective probabilities sum to {total:.12f}, expected 1"
                )

    @property
    def passed(self) -> bool:
        return self.m2a_verdict == "pass" and self.m2b_verdict in ("pass", "skipped")


def random_free_channel(
    A, mode_choices, n_kraus: int = 3, scale: float = 0.5, seed: int = 0
) -> FreeChannel:
    """Random trace-preserving covariant channel for the observable A.

    Each of the n_kraus operators picks a gap from mode_choices and draws
    complex Gaussian entries on exactly that gap's index pairs (in the
    A-eigenbasis).  The batch is rescaled so sum K'K <= scale * I and then
    completed with the gap-0 operator K_0 = (I - sum K'K)^{1/2}.  n_kraus=0
    yields the identity channel.
    """
    if not 0 < scale <= 1:
        raise ValidationError("scale must lie in (0, 1]")
    if n_kraus < 0:
        raise ValidationError("n_kraus must be nonnegative")
    gaps = gap_set(A)
    V = gaps.eigenvectors
    dim = V.shape[0]
    zero_idx = gaps.gap_index(0.0)
    if n_kraus == 0:
        return FreeChannel([np.eye(dim, dtype=complex)], [0.0])
    rng = np.random.default_rng(seed)
    choices = [float(d) for d in mode_choices]
    if not choices:
        raise ValidationError("mode_choices must not be empty")
    ops_eig = []
    labels = []
    for _ in range(n_kraus):
        delta = choices[int(rng.integers(len(choices)))]
        mask = gaps.labels == gaps.gap_index(delta)
        G = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        ops_eig.append(G * mask)
        labels.append(delta)
    total = sum(K.conj().T @ K for K in ops_eig)
    top = float(np.linalg.eigvalsh(total).max())
    if top > 0:
        factor = np.sqrt(scale / top)
        ops_eig = [K * factor for K in ops_eig]
        total = total * (scale / top)
    rest = np.eye(dim) - total
    eigs, W = np.linalg.eigh((rest + rest.conj().T) / 2.0)
    K0 = (W * np.sqrt(np.clip(eigs, 0.0, None))) @ W.conj().T
    # K_0 is gap-0 supported up to rounding; zero the rest exactly.
    K0 = K0 * (gaps.labels == zero_idx)
    ops_eig.append(K0)
    labels.append(0.0)
    kraus = [V @ K @ V.conj().T for K in ops_eig]
    return FreeChannel(kraus, labels)


def _channel_map(channel: FreeChannel, mat: np.ndarray) -> np.ndarray:
    out = np.zeros_like(mat)
    for K in channel.kraus_ops:
        out += K @ mat @ K.conj().T
    return out


def verify_covariance(
    channel: FreeChannel, A, n_phase_samples: int = 5, seed: int = 0
) -> CovarianceVerdict:
    """Check gap support of every Kraus operator and channel covariance.

    Support: in the A-eigenbasis each K_a must vanish off the index pairs of
    its labeled gap (tolerance 1e-10; worst offending pair is named).
    Covariance: || E(T_x rho) - T_x(E(rho)) ||_1 <= 1e-9 for random phases
    and random full-rank states.
    """
    gaps = gap_set(A)
    V = gaps.eigenvectors
    failures = []
    support_defect = 0.0
    for a, (K, delta) in enumerate(zip(channel.kraus_ops, channel.mode_labels)):
        try:
            idx = gaps.gap_index(delta)
        except ValidationError:
            failures.append(f"kraus {a}: label {delta:g} is not a gap of A")
            support_defect = np.inf
            continue
        K_eig = V.conj().T @ K @ V
        off = np.abs(K_eig) * (gaps.labels != idx)
        worst = float(off.max())
        if worst > 1e-10:
            i, j = np.unravel_index(int(np.argmax(off)), off.shape)
            pair_gap = gaps.gaps[gaps.labels[i, j]]
            failures.append(
                f"kraus {a}: entry ({i},{j}) of size {worst:.3e} sits on gap "
                f"{pair_gap:g} but the operator is labeled {delta:g}"
            )
        support_defect = max(support_defect, worst)
    rng = np.random.default_rng(seed)
    dim = channel.dim
    residual = 0.0
    for k in range(n_phase_samples):
        x = float(rng.uniform(0.0, 2.0 * np.pi))
        rho = random_density(dim, rank=dim, seed=int(rng.integers(2**31))).matrix
        lhs = _channel_map(channel, phase_conjugate(rho, A, x))
        rhs = phase_conjugate(_channel_map(channel, rho), A, x)
        residual = max(residual, trace_norm(lhs - rhs))
    if residual > 1e-9:
        failures.append(f"conjugation residual {residual:.3e} exceeds 1e-9")
    return CovarianceVerdict(not failures, support_defect, residual, failures)


def apply_channel(channel: FreeChannel, rho, selective: bool = False):
    """Apply the channel deterministically or as a selective measurement.

    Deterministic: sum_a K_a rho K_a' (a DensityMatrix when the channel is
    trace preserving, otherwise the raw subnormalized matrix).  Selective:
    list of (p_a, normalized outcome) skipping probabilities below the
    configured floor.
    """
    if isinstance(rho, PureState):
        mat = np.outer(rho.amplitudes, rho.amplitudes.conj())
    elif isinstance(rho, DensityMatrix):
        mat = rho.matrix
    else:
        mat = _to_array(rho)
    if mat.shape != (channel.dim, channel.dim):
        raise ValidationError(
            f"state dim {mat.shape[0]} does not match channel dim {channel.dim}"
        )
    if not selective:
        out = _channel_map(channel, mat)
        return DensityMatrix(out) if channel.trace_preserving else out
    outcomes = []
    for K in channel.kraus_ops:
        sub = K @ mat @ K.conj().T
        p = float(np.real(np.trace(sub)))
        if p < TOL.selective_prob_floor:
            continue
        outcomes.append((p, DensityMatrix(sub / p)))
    return outcomes


def dephasing_channel(A) -> FreeChannel:
    """Full dephasing onto the eigenspaces of A (Kraus = eigenprojectors)."""
    gaps = gap_set(A)
    V = gaps.eigenvectors
    eigs = gaps.eigenvalues
    kraus = []
    used = np.zeros(len(eigs), dtype=bool)
    tol = gaps.group_tolerance
    for i in range(len(eigs)):
        if used[i]:
            continue
        block = np.abs(eigs - eigs[i]) <= tol
        used |= block
        P = (V[:, block] @ V[:, block].conj().T).astype(complex)
        kraus.append(P)
    return FreeChannel(kraus, [0.0] * len(kraus))


def ancilla_replacement_channel(dim_sys: int, dim_anc: int, replacement) -> FreeChannel:
    """Trace out a dim_anc ancilla and re-prepare it in a pure state.

    All Kraus operators K_k = I (x) |phi><k| carry gap 0 for any observable
    of the form A (x) I, so the channel is free; yet it can raise the
    commutator measure I_L by 1/tr(sigma^2) when the ancilla arrives mixed.
    """
    phi = np.asarray(replacement, dtype=complex).ravel()
    if phi.shape != (dim_anc,):
        raise ValidationError(f"replacement must be a length-{dim_anc} vector")
    norm = np.linalg.norm(phi)
    if abs(norm - 1.0) > TOL.unit_norm_atol:
        raise ValidationError(f"replacement vector norm {norm:.12f} is not 1")
    eye = np.eye(dim_sys, dtype=complex)
    kraus = []
    for k in range(dim_anc):
        bra = np.zeros(dim_anc, dtype=complex)
        bra[k] = 1.0
        kraus.append(np.kron(eye, np.outer(phi, bra)))
    return FreeChannel(kraus, [0.0] * dim_anc)


def _evaluate(measure_id: str, state, A, delta) -> float:
    if measure_id == "mode_norm":
        return delta_coherence_norm(state, A, delta)
    if measure_id == "variance":
        return qfi(state, A) / 4.0
    return compute_measure(state, A, measure_id).value


def monotonicity_report(
    measure_id: str,
    rho,
    A,
    channel: FreeChannel,
    delta: float | None = None,
    slack: float = 1e-8,
) -> MonotonicityReport:
    """Evaluate one measure before/after a channel (M2a) and on average (M2b).

    measure_id "mode_norm" needs the gap delta and tracks one delta-coherence
    trace norm; "variance" is evaluated as qfi/4, its convex-roof extension
    to mixed states, which coincides with the variance on pure inputs.
    """
    if measure_id not in MONOTONE_IDS:
        raise ValidationError(
            f"measure {measure_id!r} not supported; choose from {MONOTONE_IDS}"
        )
    if measure_id == "mode_norm" and delta is None:
        raise ValidationError("mode_norm requires the gap delta")
    before = _evaluate(measure_id, rho, A, delta)
    deterministic = apply_channel(channel, rho)
    det_after = _evaluate(measure_id, deterministic, A, delta)
    outcomes = apply_channel(channel, rho, selective=True)
    selective = [(p, _evaluate(measure_id, sigma, A, delta)) for p, sigma in outcomes]
    average = sum(p * v for p, v in selective)
    label = measure_id if delta is None else f"{measure_id}[{delta:g}]"
    m2a = "pass" if det_after <= before + slack else "fail"
    m2b = "pass" if average <= before + slack else "fail"
    return MonotonicityReport(
        label, before, det_after, selective, average, m2a, m2b, slack
    )


def fuzz_monotonicity(
    measure_ids,
    dim: int = 6,
    n_channels: int = 100,
    seed: int = 0,
    slack: float = 1e-8,
) -> dict:
    """Fuzz M2a/M2b over random states and generated covariant channels.

    Observables are integer-spectrum diagonals in a random eigenbasis, so
    repeated gaps occur and Kraus patterns have real block structure.
    Returns per-measure worst margins (negative margins mean slack was
    consumed; a failure flips "passed" to False) plus the worst case labels.
    """
    measure_ids = list(measure_ids)
    for mid in measure_ids:
        if mid not in MONOTONE_IDS:
            raise ValidationError(f"measure {mid!r} not supported")
    rng = np.random.default_rng(seed)
    summary = {
        mid: {"worst_m2a": np.inf, "worst_m2b": np.inf, "worst_case": None}
        for mid in measure_ids
    }
    reports = 0
    for trial in range(n_channels):
        spectrum = np.sort(rng.integers(0, max(3, dim // 2 + 1), size=dim))[::-1]
        basis = np.linalg.qr(
            rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        )[0]
        A = basis @ np.diag(spectrum.astype(float)) @ basis.conj().T
        gaps = gap_set(A)
        nonzero = [g for g in gaps.gaps if g > 0]
        choices = [0.0] + nonzero
        channel = random_free_channel(
            A,
            mode_choices=choices,
            n_kraus=int(rng.integers(1, 4)),
            scale=float(rng.uniform(0.3, 1.0)),
            seed=int(rng.integers(2**31)),
        )
        rank = int(rng.integers(1, dim + 1))
        rho = random_density(dim, rank=rank, seed=int(rng.integers(2**31)))
        for mid in measure_ids:
            deltas = [None] if mid != "mode_norm" else (nonzero or [0.0])
            for delta in deltas:
                rep = monotonicity_report(mid, rho, A, channel, delta=delta, slack=slack)
                reports += 1
                entry = summary[mid]
                m2a_margin = rep.before + slack - rep.deterministic_after
                m2b_margin = rep.before + slack - rep.average_after
                if min(m2a_margin, m2b_margin) < min(
                    entry["worst_m2a"], entry["worst_m2b"]
                ):
                    entry["worst_case"] = {
                        "trial": trial,
                        "measure": rep.measure_id,
                        "before": rep.before,
                        "deterministic_after": rep.deterministic_after,
                        "average_after": rep.average_after,
                    }
                entry["worst_m2a"] = min(entry["worst_m2a"], m2a_margin)
                entry["worst_m2b"] = min(entry["worst_m2b"], m2b_margin)
    passed = all(
        summary[mid]["worst_m2a"] >= 0 and summary[mid]["worst_m2b"] >= 0
        for mid in measure_ids
    )
    return {
        "passed": passed,
        "n_channels": n_channels,
        "n_reports": reports,
        "dim": dim,
        "seed": seed,
        "slack": slack,
        "measures": summary,
    }
