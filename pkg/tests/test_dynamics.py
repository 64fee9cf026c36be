import numpy as np
import pytest

from macrocoh.dynamics import (
    DoubleCommutatorGenerator,
    IntegrationError,
    evolve,
    nh_generator,
    purity_rate,
    theorem4a_generator,
)
from macrocoh.fock import (
    FockSpace,
    cat_state,
    coherent_state,
    number_state,
    squeezed_state,
)
from macrocoh.macroscopicity import nlj_closed_form
from macrocoh.states import ValidationError, random_density


def bosonic_suite(fs):
    return [
        ("vacuum", fs.vacuum()),
        ("number1", number_state(1, fs)),
        ("coherent", coherent_state(1.0, fs)),
        ("cat", cat_state(2.0, fs)),
        ("squeezed", squeezed_state(0.5, fs)),
    ]


def test_generator_validation():
    with pytest.raises(ValidationError, match="Hermitian"):
        DoubleCommutatorGenerator([(np.array([[0.0, 1.0], [0.0, 0.0]]), 0.5)])
    with pytest.raises(ValidationError, match="negative"):
        DoubleCommutatorGenerator([(np.eye(2), -0.1)])
    with pytest.raises(ValidationError, match="at least one"):
        DoubleCommutatorGenerator([])
    with pytest.raises(ValidationError, match="nonnegative"):
        nh_generator(-0.25, 0.25, FockSpace(1, 10))
    with pytest.raises(ValidationError, match="single mode"):
        nh_generator(0.25, 0.25, FockSpace(2, 6))


def test_generator_annihilates_trace():
    fs = FockSpace(1, 20)
    L = theorem4a_generator(fs)
    rho = random_density(20, rank=4, seed=2)
    assert abs(np.trace(L.apply(rho.matrix))) < 1e-10
    # The maximally mixed state commutes with everything.
    assert np.abs(L.apply(np.eye(20, dtype=complex) / 20)).max() < 1e-12


def test_nh_reduces_to_isotropic_at_quarter_weights():
    fs = FockSpace(1, 16)
    L1 = theorem4a_generator(fs)
    L2 = nh_generator(0.25, 0.25, fs)
    rho = random_density(16, rank=3, seed=4).matrix
    np.testing.assert_allclose(L1.apply(rho), L2.apply(rho), atol=1e-12)


def test_position_only_model_fixes_x_diagonal_states():
    fs = FockSpace(1, 30)
    L = nh_generator(0.25, 0.0, fs)
    xs, vx = np.linalg.eigh(fs.position())
    weights = np.exp(-(xs**2) / 2)
    weights /= weights.sum()
    rho = (vx * weights) @ vx.conj().T
    assert np.abs(L.apply(rho)).max() < 1e-12


def test_purity_rate_matches_closed_form():
    fs = FockSpace(1, 40)
    L = theorem4a_generator(fs)
    for name, state in bosonic_suite(fs):
        rate = purity_rate(state, L)
        closed = nlj_closed_form(state, fs)
        assert abs(rate - closed) < 1e-8, name
        assert rate >= 0


def test_purity_rate_nonnegative_for_random_generators():
    rng = np.random.default_rng(6)
    for _ in range(5):
        G = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
        B = (G + G.conj().T) / 2
        L = DoubleCommutatorGenerator([(B, float(rng.uniform(0.1, 1.0)))])
        rho = random_density(8, rank=3, seed=int(rng.integers(100)))
        assert purity_rate(rho, L) >= -1e-12


def test_evolve_trajectory_properties():
    fs = FockSpace(1, 40)
    L = theorem4a_generator(fs)
    cat = cat_state(1.5, fs)
    traj = evolve(cat, L, t=0.02, steps=40)
    assert len(traj) == 41
    times = [p[0] for p in traj]
    purity = [p[2] for p in traj]
    assert times[0] == 0.0
    assert times[-1] == pytest.approx(0.02, abs=1e-15)
    assert all(purity[i + 1] <= purity[i] + 1e-12 for i in range(40))
    for _, state, pur in traj[::10]:
        assert state.trace() == pytest.approx(1.0, abs=1e-10)
        assert pur == pytest.approx(state.purity(), abs=1e-9)
    # t=0 returns the state unchanged.
    flat = evolve(cat, L, 0.0, 3)
    dense = np.outer(cat.amplitudes, cat.amplitudes.conj())
    assert np.abs(flat[-1][1].matrix - dense).max() < 1e-14


def test_evolve_step_halving_self_consistency():
    fs = FockSpace(1, 40)
    L = theorem4a_generator(fs)
    vac = fs.vacuum()
    final_a = evolve(vac, L, t=0.02, steps=40)[-1][2]
    final_b = evolve(vac, L, t=0.02, steps=80)[-1][2]
    assert abs(final_a - final_b) < 1e-8


def test_finite_difference_slope_matches_rate():
    fs = FockSpace(1, 40)
    L = theorem4a_generator(fs)
    for name, state in bosonic_suite(fs):
        traj = evolve(state, L, t=0.01, steps=80)
        h = 0.01 / 80
        mid = 40
        slope = (traj[mid + 1][2] - traj[mid - 1][2]) / (2 * h)
        rate = purity_rate(traj[mid][1], L)
        assert abs(-0.5 * slope - rate) < 1e-5, name


def test_evolve_input_validation():
    fs = FockSpace(1, 10)
    L = theorem4a_generator(fs)
    with pytest.raises(ValidationError, match="nonnegative"):
        evolve(fs.vacuum(), L, -1.0, 10)
    with pytest.raises(ValidationError, match="positive"):
        evolve(fs.vacuum(), L, 1.0, 0)
    with pytest.raises(ValidationError, match="does not match"):
        evolve(random_density(4, rank=1, seed=0), L, 1.0, 10)


def test_integration_error_on_wild_step():
    # A huge step makes RK4 leave the density cone; the integrator reports
    # the offending step instead of silently repairing it.
    fs = FockSpace(1, 30)
    L = theorem4a_generator(fs)
    with pytest.raises(IntegrationError, match="step"):
        evolve(number_state(3, fs), L, t=50.0, steps=1)
