import numpy as np
import pytest
from scipy.linalg import expm

from macrocoh.channels import (
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
from macrocoh.measures import il_measure, qfi
from macrocoh.modes import gap_set, mode_component, trace_norm
from macrocoh.states import (
    DensityMatrix,
    PureState,
    ValidationError,
    random_density,
)


def collective_z(n):
    return np.diag([n - 2 * bin(i).count("1") for i in range(2**n)]).astype(float)


def test_free_channel_validation():
    with pytest.raises(ValidationError, match="at least one"):
        FreeChannel([], [])
    with pytest.raises(ValidationError, match="one mode label"):
        FreeChannel([np.eye(2)], [0.0, 2.0])
    with pytest.raises(ValidationError, match="exceeds identity"):
        FreeChannel([np.eye(2) * 1.2], [0.0], trace_preserving=False)
    with pytest.raises(ValidationError, match="incomplete"):
        FreeChannel([np.eye(2) * 0.5], [0.0])
    ch = FreeChannel([np.eye(3) * 0.5], [0.0], trace_preserving=False)
    assert ch.dim == 3


def test_random_channel_is_complete_and_covariant():
    A = collective_z(3)
    for seed in range(5):
        ch = random_free_channel(A, mode_choices=[0.0, 2.0, 4.0], n_kraus=3, seed=seed)
        total = sum(K.conj().T @ K for K in ch.kraus_ops)
        assert np.abs(total - np.eye(8)).max() < 1e-9
        verdict = verify_covariance(ch, A, seed=seed)
        assert verdict.passed, verdict.failures
        assert verdict.conjugation_residual < 1e-9
    with pytest.raises(ValidationError, match="scale"):
        random_free_channel(A, [0.0], scale=1.5)
    with pytest.raises(ValidationError):
        random_free_channel(A, [3.0], n_kraus=1)


def test_identity_channel_and_mode_zero_channels():
    A = collective_z(2)
    ch = random_free_channel(A, mode_choices=[0.0], n_kraus=0)
    rho = random_density(4, rank=2, seed=1)
    assert np.abs(apply_channel(ch, rho).matrix - rho.matrix).max() == 0.0
    # Mode-0 channels keep incoherent states incoherent.
    ch0 = random_free_channel(A, mode_choices=[0.0], n_kraus=2, seed=7)
    diag = DensityMatrix(np.diag([0.4, 0.3, 0.2, 0.1]).astype(complex))
    out = apply_channel(ch0, diag)
    gaps = gap_set(A)
    for delta in gaps.gaps:
        if delta != 0:
            comp = mode_component(out, A, delta)
            assert np.abs(comp.matrix).max() < 1e-12


def test_covariance_verifier_names_violating_pair():
    A = np.diag([3.0, 2.0, 1.0, 0.0])
    K = np.zeros((4, 4), dtype=complex)
    K[0, 3] = 0.7
    K[0, 1] = 0.4
    bad = FreeChannel([K], [3.0], trace_preserving=False)
    verdict = verify_covariance(bad, A)
    assert not verdict.passed
    assert any("(0,1)" in f for f in verdict.failures)
    # A label that is not a gap at all.
    odd = FreeChannel([np.eye(4) * 0.5], [0.7], trace_preserving=False)
    verdict = verify_covariance(odd, A)
    assert not verdict.passed
    assert any("not a gap" in f for f in verdict.failures)


def test_phase_unitary_is_covariant():
    A = np.diag([3.0, 2.0, 1.0, 0.0])
    ch = FreeChannel([expm(-1j * A)], [0.0])
    assert verify_covariance(ch, A).passed


def test_dephasing_channel_outcomes():
    sz = np.diag([1.0, -1.0])
    plus = PureState(np.array([1.0, 1.0]) / np.sqrt(2))
    deph = dephasing_channel(sz)
    out = apply_channel(deph, plus)
    np.testing.assert_allclose(out.matrix, np.eye(2) / 2, atol=1e-12)
    outcomes = apply_channel(deph, plus, selective=True)
    assert len(outcomes) == 2
    for p, sigma in outcomes:
        assert p == pytest.approx(0.5, abs=1e-12)
        assert sigma.purity() == pytest.approx(1.0, abs=1e-12)
    assert sum(p for p, _ in outcomes) == pytest.approx(1.0, abs=1e-12)


def test_apply_channel_rejects_dim_mismatch():
    ch = dephasing_channel(np.diag([1.0, -1.0]))
    with pytest.raises(ValidationError, match="does not match"):
        apply_channel(ch, random_density(3, rank=1, seed=0))


def test_mode_preservation_under_free_channels():
    # E(rho)^(delta) = E(rho^(delta)) for generated channels.
    A = collective_z(2)
    gaps = gap_set(A)
    rho = random_density(4, rank=4, seed=9)
    ch = random_free_channel(A, mode_choices=[0.0, 2.0], n_kraus=2, seed=4)
    out = apply_channel(ch, rho)
    for delta in gaps.gaps:
        lhs = mode_component(out, A, delta).matrix
        comp = mode_component(rho, A, delta).matrix
        rhs = sum(K @ comp @ K.conj().T for K in ch.kraus_ops)
        assert np.abs(lhs - rhs).max() < 1e-10


def test_observation2_ancilla_replacement():
    sz = np.diag([1.0, -1.0])
    A = np.kron(sz, np.eye(2))
    rho_s = random_density(2, rank=2, seed=3)
    sigma = np.eye(2) / 2
    joint = DensityMatrix(np.kron(rho_s.matrix, sigma))
    # Product law: I_L(rho x sigma, A x I) = I_L(rho, A) tr(sigma^2).
    assert il_measure(joint, A) == pytest.approx(
        il_measure(rho_s, sz) * 0.5, abs=1e-9
    )
    repl = ancilla_replacement_channel(2, 2, np.array([1.0, 0.0]))
    assert verify_covariance(repl, A).passed
    after = apply_channel(repl, joint)
    ratio = il_measure(after, A) / il_measure(joint, A)
    assert ratio == pytest.approx(2.0, abs=1e-9)
    with pytest.raises(ValidationError, match="norm"):
        ancilla_replacement_channel(2, 2, np.array([1.0, 1.0]))


def test_monotonicity_report_fields():
    A = collective_z(2)
    rho = random_density(4, rank=2, seed=5)
    ch = random_free_channel(A, mode_choices=[0.0, 2.0], n_kraus=2, seed=6)
    rep = monotonicity_report("qfi", rho, A, ch)
    assert rep.measure_id == "qfi"
    assert rep.deterministic_after <= rep.before + rep.slack
    assert rep.average_after <= rep.before + rep.slack
    assert rep.passed
    assert sum(p for p, _ in rep.selective) == pytest.approx(1.0, abs=1e-9)
    rep = monotonicity_report("mode_norm", rho, A, ch, delta=2.0)
    assert rep.measure_id == "mode_norm[2]"
    with pytest.raises(ValidationError, match="requires the gap"):
        monotonicity_report("mode_norm", rho, A, ch)
    with pytest.raises(ValidationError, match="not supported"):
        monotonicity_report("il", rho, A, ch)


def test_variance_monotone_via_roof_extension_on_pure_input():
    A = collective_z(2)
    psi = PureState(np.array([1.0, 0.0, 0.0, 1.0]) / np.sqrt(2))
    ch = random_free_channel(A, mode_choices=[0.0, 2.0, 4.0], n_kraus=3, seed=8)
    rep = monotonicity_report("variance", psi, A, ch)
    # On the pure input the roof extension is the plain variance.
    assert rep.before == pytest.approx(qfi(psi, A) / 4.0, abs=1e-10)
    assert rep.passed


def test_fuzz_monotonicity_summary():
    res = fuzz_monotonicity(["qfi", "mode_norm"], dim=5, n_channels=25, seed=11)
    assert res["passed"]
    assert res["n_channels"] == 25
    assert res["measures"]["qfi"]["worst_m2a"] >= 0
    assert res["measures"]["qfi"]["worst_m2b"] >= 0
    assert res["measures"]["qfi"]["worst_case"] is not None
    with pytest.raises(ValidationError, match="not supported"):
        fuzz_monotonicity(["roof"], n_channels=1)
