"""Acceptance gate: thirteen end-to-end checks at pinned tolerances.

Each check prints one [PASS]/[FAIL] verdict line directly to the real
stdout so the verdicts stay visible under pytest's capture; the assert
that follows makes pytest agree with the printed verdict.
"""

import sys
import time

import numpy as np
import pytest

from macrocoh.channels import (
    ancilla_replacement_channel,
    apply_channel,
    fuzz_monotonicity,
)
from macrocoh.dynamics import evolve, purity_rate, theorem4a_generator
from macrocoh.experiments import (
    build_rho_N,
    collective_z,
    copy_equivalence,
    ghz_state,
    il_formula,
    qfi_formula,
    scaling_table,
)
from macrocoh.fock import (
    FockSpace,
    cat_state,
    characteristic_function,
    coherent_state,
    number_state,
    squeezed_state,
)
from macrocoh.macroscopicity import (
    m4_ordering_check,
    nf_grid_oracle,
    nf_quadratures,
    nf_qubits,
    nlj_closed_form,
    nlj_integral,
    nlj_tilde,
)
from macrocoh.measures import (
    ConvexRoofConfig,
    convex_roof_search,
    il_measure,
    qfi,
    skew_information,
    variance,
)
from macrocoh.states import DensityMatrix, PureState, random_density, tensor_product


def _verdict(capsys, label: str, ok: bool, detail: str) -> None:
    tag = "PASS" if ok else "FAIL"
    with capsys.disabled():
        print(f"\n[{tag}] {label}: {detail}", flush=True)
    assert ok, f"{label}: {detail}"


def _random_pure(dim: int, rng) -> PureState:
    vec = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return PureState(vec / np.linalg.norm(vec))


def _random_hermitian(dim: int, rng) -> np.ndarray:
    raw = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (raw + raw.conj().T) / 2.0


def bosonic_suite(fs):
    return [
        ("vacuum", fs.vacuum()),
        ("number1", number_state(1, fs)),
        ("coherent", coherent_state(1.0, fs)),
        ("cat", cat_state(2.0, fs)),
        ("squeezed", squeezed_state(0.5, fs)),
    ]


def test_01_scaling_family_closed_forms(capsys):
    start = time.perf_counter()
    rows = scaling_table([2, 4, 6, 8, 10, 12])
    elapsed = time.perf_counter() - start
    worst = max(
        max(
            abs(row.qfi_value - qfi_formula(row.N)) / qfi_formula(row.N),
            abs(row.il_value - il_formula(row.N)) / il_formula(row.N),
        )
        for row in rows
    )
    spots = (
        abs(rows[0].qfi_value - 16.0) <= 1e-8 * 16.0
        and abs(rows[0].il_value - 4.0) <= 1e-8 * 4.0
        and abs(rows[1].qfi_value - 40.0) <= 1e-8 * 40.0
        and abs(rows[1].il_value - 5.0) <= 1e-8 * 5.0
    )
    ok = worst <= 1e-8 and spots and elapsed < 30.0
    _verdict(
        capsys,
        "01 scaling family closed forms (N=2..12, rel 1e-8, <30s)",
        ok,
        f"worst relative deviation {worst:.2e}, runtime {elapsed:.2f}s",
    )


def test_02_pure_state_fisher_equals_four_variances(capsys):
    rng = np.random.default_rng(2002)
    worst = 0.0
    for _ in range(100):
        dim = int(rng.integers(2, 17))
        psi = _random_pure(dim, rng)
        A = _random_hermitian(dim, rng)
        worst = max(worst, abs(qfi(psi, A) - 4.0 * variance(psi, A)))
    ok = worst <= 1e-9
    _verdict(
        capsys,
        "02 pure-state identity F = 4V (100 states, dim <= 16, tol 1e-9)",
        ok,
        f"worst |F - 4V| = {worst:.2e}",
    )


def test_03_two_level_superposition_gap_law(capsys):
    rng = np.random.default_rng(2003)
    worst = 0.0
    for _ in range(50):
        dim = int(rng.integers(3, 11))
        diag = rng.uniform(-2.0, 2.0, size=dim)
        i, j = rng.choice(dim, size=2, replace=False)
        vec = np.zeros(dim, dtype=complex)
        vec[i] = vec[j] = 1.0 / np.sqrt(2.0)
        expected = 0.25 * (diag[i] - diag[j]) ** 2
        worst = max(worst, abs(variance(PureState(vec), np.diag(diag)) - expected))
    ok = worst <= 1e-10
    _verdict(
        capsys,
        "03 two-level gap law V = (a_i - a_j)^2 / 4 (50 diagonals, tol 1e-10)",
        ok,
        f"worst deviation {worst:.2e}",
    )


def test_04_information_inequalities_on_mixed_states(capsys):
    # The Fisher information here is normalized so that pure states give
    # F = 4V; the skew-information sandwich in that normalization reads
    # I_sk <= F/4 <= 2 I_sk, and the commutator measure obeys I_L <= F/4.
    rng = np.random.default_rng(2004)
    worst = -np.inf
    for k in range(200):
        dim = int(rng.integers(4, 13))
        rank = int(rng.integers(2, dim + 1))
        rho = random_density(dim, rank=rank, seed=20040 + k)
        A = _random_hermitian(dim, rng)
        f4 = qfi(rho, A) / 4.0
        isk = skew_information(rho, A)
        il = il_measure(rho, A)
        worst = max(worst, isk - f4, f4 - 2.0 * isk, il - f4)
    ok = worst <= 1e-9
    _verdict(
        capsys,
        "04 sandwich I_sk <= F/4 <= 2 I_sk and I_L <= F/4 "
        "(200 mixed states, slack 1e-9, quarter-normalized Fisher)",
        ok,
        f"worst inequality violation {worst:.2e}",
    )


def test_05_monotonicity_fuzz_500_channels(capsys):
    start = time.perf_counter()
    summary = fuzz_monotonicity(
        ("qfi", "mode_norm", "rel_ent"),
        dim=6,
        n_channels=500,
        seed=0,
        slack=1e-8,
    )
    elapsed = time.perf_counter() - start
    margins = [
        min(info["worst_m2a"], info["worst_m2b"])
        for info in summary["measures"].values()
    ]
    ok = summary["passed"] and elapsed < 300.0
    _verdict(
        capsys,
        "05 monotonicity fuzz: qfi, mode norms, relative entropy "
        "(500 covariant channels, slack 1e-8, <5min)",
        ok,
        f"worst margin {min(margins):.2e}, runtime {elapsed:.1f}s",
    )


def test_06_commutator_measure_product_law_counterexample(capsys):
    rng = np.random.default_rng(2006)
    rho = random_density(3, rank=2, seed=2006)
    A = _random_hermitian(3, rng)
    sigma = DensityMatrix(np.eye(2, dtype=complex) / 2.0)
    joint = tensor_product(rho, sigma)
    A_joint = np.kron(A, np.eye(2))
    before = il_measure(joint, A_joint)
    product_dev = abs(before - il_measure(rho, A) * 0.5)

    replacement = np.array([1.0, 0.0], dtype=complex)
    channel = ancilla_replacement_channel(3, 2, replacement)
    after = il_measure(apply_channel(channel, joint), A_joint)
    ratio = after / before
    ok = product_dev <= 1e-9 and after > before and abs(ratio - 2.0) <= 1e-9
    _verdict(
        capsys,
        "06 product law I_L(rho x sigma) = I_L(rho) tr(sigma^2) and "
        "ancilla re-preparation doubles I_L",
        ok,
        f"product deviation {product_dev:.2e}, increase ratio {ratio:.12f}",
    )


def test_07_convex_roof_never_beats_quarter_fisher(capsys):
    worst_floor = np.inf
    worst_gap = 0.0
    A = np.diag(collective_z(2))
    for seed in (3, 5, 11, 17, 23):
        rho = random_density(4, rank=2, seed=seed)
        target = qfi(rho, A) / 4.0
        best, _, samples = convex_roof_search(
            rho, A, ConvexRoofConfig(n_decompositions=2000, seed=7),
            return_samples=True,
        )
        worst_floor = min(worst_floor, float(samples.min()) - target)
        worst_gap = max(worst_gap, (best - target) / target)
    ok = worst_floor >= -1e-8 and worst_gap <= 0.05
    _verdict(
        capsys,
        "07 convex roof: every sampled average >= F/4 - 1e-8, "
        "best of 2000 within 5% (rank-2 two-qubit states)",
        ok,
        f"worst floor margin {worst_floor:.2e}, worst best-gap {100 * worst_gap:.2f}%",
    )


def test_08_purity_rate_identity_and_trajectory_slope(capsys):
    fs = FockSpace(1, 40)
    L = theorem4a_generator(fs)
    worst_identity = 0.0
    worst_slope = 0.0
    for name, state in bosonic_suite(fs):
        rho0 = np.outer(state.amplitudes, state.amplitudes.conj())
        worst_identity = max(
            worst_identity,
            abs(purity_rate(rho0, L) - nlj_closed_form(state, fs)),
        )
        traj = evolve(state, L, t=0.01, steps=80)
        h = 0.01 / 80
        mid = 40
        slope = (traj[mid + 1][2] - traj[mid - 1][2]) / (2.0 * h)
        rate = nlj_closed_form(traj[mid][1], fs, check_health=False)
        worst_slope = max(worst_slope, abs(-0.5 * slope - rate))
    ok = worst_identity <= 1e-8 and worst_slope <= 1e-5
    _verdict(
        capsys,
        "08 purity-loss rate equals phase-space size (|diff| <= 1e-8) "
        "and matches the RK4 purity slope (<= 1e-5) on the bosonic suite",
        ok,
        f"worst identity {worst_identity:.2e}, worst slope gap {worst_slope:.2e}",
    )


def test_09_integral_vs_closed_form_and_unit_characteristic(capsys):
    fs = FockSpace(1, 40)
    worst_rel = 0.0
    worst_chi = 0.0
    for name, state in bosonic_suite(fs):
        closed = nlj_closed_form(state, fs)
        # radius 8 keeps the quadrature tail below its gate even for the
        # slowly decaying squeezed-state characteristic function
        integral = nlj_integral(state, fs, radius=8.0)
        tol = max(1e-3, 0.01 * closed)
        worst_rel = max(worst_rel, abs(integral - closed) / tol)
        worst_chi = max(
            worst_chi, abs(characteristic_function(state, 0.0, fs) - 1.0)
        )
    ok = worst_rel <= 1.0 and worst_chi <= 1e-10
    _verdict(
        capsys,
        "09 phase-space integral matches the commutator form within "
        "max(1e-3, 1%) and chi(0) = 1 to 1e-10",
        ok,
        f"worst tolerance fraction {worst_rel:.3f}, worst |chi(0)-1| {worst_chi:.2e}",
    )


def test_10_quadrature_variance_and_refined_size_bound(capsys):
    fs = FockSpace(1, 40)
    worst_v = max(
        abs(variance(coherent_state(alpha, fs), fs.position()) - 0.5)
        for alpha in (1.0, 1.0 + 0.5j)
    )
    worst_bound = -np.inf
    worst_pure_eq = 0.0
    for name, state in bosonic_suite(fs):
        tilde, _ = nlj_tilde(state, fs)
        nf, _ = nf_quadratures(state, fs)
        worst_bound = max(worst_bound, tilde - nf)
        worst_pure_eq = max(worst_pure_eq, abs(tilde - nf))
    # genuinely mixed states: a dephased cat and a coherent/vacuum blend
    alpha = 2.0
    plusminus = [coherent_state(alpha, fs), coherent_state(-alpha, fs)]
    mixed_states = [
        0.5 * np.outer(p.amplitudes, p.amplitudes.conj())
        + 0.5 * np.outer(m.amplitudes, m.amplitudes.conj())
        for p, m in [tuple(plusminus)]
    ]
    blend = 0.7 * np.outer(
        coherent_state(1.0, fs).amplitudes, coherent_state(1.0, fs).amplitudes.conj()
    )
    vac = fs.vacuum().amplitudes
    blend = blend + 0.3 * np.outer(vac, vac.conj())
    mixed_states.append(blend)
    for mat in mixed_states:
        rho = DensityMatrix(mat)
        tilde, _ = nlj_tilde(rho, fs)
        nf, _ = nf_quadratures(rho, fs)
        worst_bound = max(worst_bound, tilde - nf)
    ok = worst_v <= 1e-4 and worst_bound <= 1e-8 and worst_pure_eq <= 1e-8
    _verdict(
        capsys,
        "10 V(coherent, x) = 1/2 within 1e-4; refined size <= effective "
        "size always, equal on pure states within 1e-8",
        ok,
        f"worst |V-1/2| {worst_v:.2e}, worst bound excess {worst_bound:.2e}, "
        f"worst pure gap {worst_pure_eq:.2e}",
    )


def test_11_gap_ordering_of_measures(capsys):
    A = np.diag(collective_z(2).astype(float))
    verdicts = {}
    for measure in ("qfi", "variance", "skew", "rel_ent"):
        result = m4_ordering_check(measure, A, (0, 3), (0, 1))
        verdicts[measure] = result["verdict"]
    ok = (
        verdicts["qfi"] == "strict"
        and verdicts["variance"] == "strict"
        and verdicts["skew"] == "strict"
        and verdicts["rel_ent"] == "equal"
    )
    _verdict(
        capsys,
        "11 larger-gap superpositions score strictly higher for qfi, "
        "variance, skew; relative entropy ties",
        ok,
        ", ".join(f"{k}={v}" for k, v in verdicts.items()),
    )


def test_12_effective_size_optimizer_matches_grid_oracle(capsys):
    details = []
    ok = True
    for n_sites in (2, 3):
        value, _ = nf_qubits(ghz_state(n_sites))
        oracle, _ = nf_grid_oracle(ghz_state(n_sites), spacing_deg=10.0)
        ok = ok and abs(value - oracle) <= 1e-6 and abs(value - n_sites) <= 1e-6
        details.append(f"N={n_sites}: ascent {value:.9f}, oracle {oracle:.9f}")
    # At four sites the full product grid is out of reach, but the
    # symmetric sub-grid contains the angle pair achieving the theoretical
    # cap F <= (2N)^2, so its maximum IS the product-grid optimum.
    value, _ = nf_qubits(ghz_state(4))
    oracle, _ = nf_grid_oracle(ghz_state(4), spacing_deg=10.0, symmetric=True)
    ok = ok and abs(value - oracle) <= 1e-6 and abs(value - 4.0) <= 1e-6
    details.append(f"N=4: ascent {value:.9f}, symmetric oracle {oracle:.9f}")
    _verdict(
        capsys,
        "12 coordinate ascent matches the 10-degree grid oracle and "
        "equals N on N-site GHZ (N <= 4, tol 1e-6)",
        ok,
        "; ".join(details),
    )


def test_13_copy_profile_distance_shrinks_with_copies(capsys):
    start = time.perf_counter()
    z1 = np.array([1.0, -1.0])
    plus = PureState(np.array([1.0, 1.0]) / np.sqrt(2.0))
    identity_ok = all(
        copy_equivalence(plus, z1, plus, n).profile_distance == 0.0
        for n in (4, 6, 8, 10)
    )
    comparisons = 0
    violations = 0
    for v in (0.61, 0.64):
        p = 0.5 * (1.0 + np.sqrt(1.0 - v))
        psi = PureState(np.array([np.sqrt(p), np.sqrt(1.0 - p)]))
        dists = [
            copy_equivalence(psi, z1, plus, n).profile_distance
            for n in (4, 6, 8, 10)
        ]
        for a, b in zip(dists, dists[1:]):
            comparisons += 1
            if b > a + 1e-12:
                violations += 1
    elapsed = time.perf_counter() - start
    rate = violations / comparisons
    ok = identity_ok and rate <= 0.10 and elapsed < 180.0
    _verdict(
        capsys,
        "13 copy profiles: distance 0 for identical states, decreasing "
        "trend over n in {4,6,8,10} (<=10% violations, <3min)",
        ok,
        f"identity zero: {identity_ok}, violations {violations}/{comparisons}, "
        f"runtime {elapsed:.2f}s",
    )
