import numpy as np
import pytest

from macrocoh.modes import (
    AmbiguousSpectrumError,
    delta_coherence_norm,
    gap_set,
    mode_component,
    mode_decompose,
    mode_norms,
    trace_norm,
)
from macrocoh.states import (
    PureState,
    ValidationError,
    phase_conjugate,
    random_density,
    random_hermitian,
)

SZ = np.diag([1.0, -1.0]).astype(complex)


def collective_z(n):
    full = np.zeros((2**n, 2**n), dtype=complex)
    for i in range(n):
        full += np.kron(np.kron(np.eye(2**i), SZ), np.eye(2 ** (n - i - 1)))
    return full


def test_trace_norm_against_gram_oracle():
    rng = np.random.default_rng(3)
    M = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
    gram_eigs = np.linalg.eigvalsh(M.conj().T @ M)
    expect = np.sum(np.sqrt(np.clip(gram_eigs, 0.0, None)))
    assert trace_norm(M) == pytest.approx(expect, rel=1e-12)


def test_plus_state_mode_norms_oracle():
    # |+><+| against sigma_z: gaps {-2, 0, 2}; off-diagonal halves carry
    # trace norm 1/2 each and the diagonal carries 1.
    rho = PureState([1.0, 1.0], normalize=True).density()
    gs = gap_set(SZ)
    np.testing.assert_allclose(gs.gaps, [-2.0, 0.0, 2.0], atol=1e-12)
    assert delta_coherence_norm(rho, SZ, 0.0) == pytest.approx(1.0, abs=1e-12)
    assert delta_coherence_norm(rho, SZ, 2.0) == pytest.approx(0.5, abs=1e-12)
    assert delta_coherence_norm(rho, SZ, -2.0) == pytest.approx(0.5, abs=1e-12)
    assert gs.index_pairs(2.0) == [(0, 1)]


def test_ghz_collective_mode_norms():
    n = 3
    vec = np.zeros(2**n, dtype=complex)
    vec[0] = vec[-1] = 2**-0.5
    rho = PureState(vec).density()
    A = collective_z(n)
    deltas, norms, residual = mode_norms(rho, A)
    np.testing.assert_allclose(deltas, [-6, -4, -2, 0, 2, 4, 6], atol=1e-9)
    lookup = dict(zip(np.round(deltas).astype(int), norms))
    assert lookup[0] == pytest.approx(1.0, abs=1e-12)
    assert lookup[6] == pytest.approx(0.5, abs=1e-12)
    assert lookup[-6] == pytest.approx(0.5, abs=1e-12)
    for d in (-4, -2, 2, 4):
        assert lookup[d] == pytest.approx(0.0, abs=1e-12)
    assert residual < 1e-12


def test_mode_decompose_reconstructs_and_is_disjoint():
    rho = random_density(6, seed=12)
    A = random_hermitian(6, seed=13)
    comps = mode_decompose(rho, A)
    total = sum(c.matrix for c in comps)
    np.testing.assert_allclose(total, rho.matrix, atol=1e-12)
    # Filtering a component at its own gap is the identity; at another gap
    # it vanishes.
    gs = gap_set(A)
    mid = comps[len(comps) // 2]
    again = mode_component(mid.matrix, A, mid.delta, gaps=gs)
    np.testing.assert_allclose(again.matrix, mid.matrix, atol=1e-12)
    other = comps[0]
    cross = mode_component(other.matrix, A, mid.delta, gaps=gs)
    np.testing.assert_allclose(cross.matrix, 0.0, atol=1e-12)


def test_modes_pick_up_pure_phases_under_conjugation():
    rho = random_density(5, seed=20)
    A = random_hermitian(5, seed=21)
    x = 0.37
    rotated = phase_conjugate(rho, A, x)
    gs = gap_set(A)
    for comp in mode_decompose(rho, A, gaps=gs):
        got = mode_component(rotated, A, comp.delta, gaps=gs).matrix
        np.testing.assert_allclose(
            got, np.exp(-1j * x * comp.delta) * comp.matrix, atol=1e-10
        )


def test_degenerate_observable_keeps_intra_block_coherence():
    A = np.diag([1.0, 1.0, 3.0]).astype(complex)
    rho = PureState([1.0, 1.0, 1.0], normalize=True).density()
    gs = gap_set(A)
    np.testing.assert_allclose(gs.gaps, [-2.0, 0.0, 2.0], atol=1e-12)
    zero = mode_component(rho, A, 0.0, gaps=gs).matrix
    # The |0><1| coherence lives inside the degenerate eigenspace.
    assert abs(zero[0, 1] - 1.0 / 3.0) < 1e-12
    assert abs(zero[0, 2]) < 1e-14
    assert delta_coherence_norm(rho, A, 0.0) == pytest.approx(1.0, abs=1e-12)


def test_gap_symmetry_and_exact_zero():
    A = random_hermitian(7, seed=30)
    gs = gap_set(A)
    np.testing.assert_array_equal(gs.gaps, -gs.gaps[::-1])
    assert 0.0 in gs.gaps.tolist()
    k0 = gs.gap_index(0.0)
    assert gs.gaps[k0] == 0.0


def test_ambiguous_cluster_raises_until_tolerance_given():
    # Eigenvalues chained at ~0.8x the default tolerance so single linkage
    # merges them into one cluster whose spread blows past the 10x bound.
    base = 1e-9 * 0.8 * np.arange(16)
    A = np.diag(np.concatenate([base, [1.0]])).astype(complex)
    with pytest.raises(AmbiguousSpectrumError, match="spread"):
        gap_set(A)
    gs = gap_set(A, group_tolerance=1e-6)
    np.testing.assert_allclose(gs.gaps, [-1.0, 0.0, 1.0], atol=1e-7)


def test_unknown_delta_rejected():
    with pytest.raises(ValidationError, match="not a spectral gap"):
        delta_coherence_norm(np.eye(2) / 2, SZ, 1.0)


def test_mode_norms_matches_single_queries():
    rho = random_density(5, seed=40)
    A = random_hermitian(5, seed=41)
    deltas, norms, residual = mode_norms(rho, A)
    assert residual < 1e-12
    for d, n in zip(deltas, norms):
        assert delta_coherence_norm(rho, A, d) == pytest.approx(n, abs=1e-12)
    # Norm of the zero mode of a density matrix is at least its trace.
    k0 = int(np.argmin(np.abs(deltas)))
    assert norms[k0] >= 1.0 - 1e-12
