import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import brute_partial_trace
from spinphase.hilbert import (
    DensityOperator,
    PauliAxis,
    PureState,
    apply_local,
    apply_pauli,
    basis_state,
    bell_state,
    density_from_pure,
    ghz_state,
    is_positive,
    mask_sites,
    permute_spins,
    purity,
    random_density,
    random_state,
    random_unitary,
    reduced_density,
    sites_mask,
    subsystem_purity,
    tensor,
    w_state,
)

seeds = st.integers(0, 2**32 - 1)


def test_basis_state_examples():
    np.testing.assert_array_equal(basis_state(1, 0).amplitudes, [1, 0])
    np.testing.assert_array_equal(basis_state(2, 3).amplitudes, [0, 0, 0, 1])
    amps = basis_state(3, 4).amplitudes
    assert amps[4] == 1 and np.count_nonzero(amps) == 1


def test_basis_state_out_of_range():
    with pytest.raises(IndexError):
        basis_state(2, 4)


def test_tensor_examples():
    np.testing.assert_array_equal(tensor(basis_state(1, 0), basis_state(1, 1)).amplitudes,
                                  basis_state(2, 1).amplitudes)
    plus = PureState.from_amplitudes([1, 1])
    expected = np.array([1, 0, 1, 0]) / np.sqrt(2)
    np.testing.assert_allclose(tensor(plus, basis_state(1, 0)).amplitudes, expected, atol=1e-15)
    bb = tensor(bell_state(), bell_state())
    assert bb.n_spins == 4
    assert abs(np.linalg.norm(bb.amplitudes) - 1) < 1e-15


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_tensor_associative(seed):
    rng = np.random.default_rng(seed)
    a, b, c = (random_state(k, rng) for k in (1, 2, 2))
    left = tensor(tensor(a, b), c).amplitudes
    right = tensor(a, tensor(b, c)).amplitudes
    assert np.max(np.abs(left - right)) <= 1e-14


def test_pauli_examples():
    zero = basis_state(1, 0)
    np.testing.assert_allclose(apply_pauli(zero, 0, "z").amplitudes, [1, 0])
    np.testing.assert_allclose(apply_pauli(zero, 0, PauliAxis.X).amplitudes, [0, 1])
    np.testing.assert_allclose(apply_pauli(zero, 0, PauliAxis.Y).amplitudes, [0, 1j])


def test_pauli_acts_on_requested_site():
    # X on spin 2 of |00> gives |01>
    out = apply_pauli(basis_state(2, 0), 1, "x")
    np.testing.assert_allclose(out.amplitudes, basis_state(2, 1).amplitudes)


def test_pauli_site_out_of_range():
    with pytest.raises(IndexError):
        apply_pauli(basis_state(2, 0), 2, "x")


@settings(max_examples=30, deadline=None)
@given(seeds, st.integers(1, 5), st.sampled_from(list(PauliAxis)))
def test_pauli_involution(seed, n, axis):
    rng = np.random.default_rng(seed)
    psi = random_state(n, rng)
    site = int(rng.integers(n))
    twice = apply_pauli(apply_pauli(psi, site, axis), site, axis)
    assert np.max(np.abs(twice.amplitudes - psi.amplitudes)) <= 1e-14


def test_density_from_pure_examples():
    np.testing.assert_allclose(density_from_pure(basis_state(1, 0)).matrix, np.diag([1, 0]))
    plus = PureState.from_amplitudes([1, 1])
    np.testing.assert_allclose(density_from_pure(plus).matrix, np.full((2, 2), 0.5), atol=1e-15)
    rho = density_from_pure(bell_state()).matrix
    assert np.linalg.matrix_rank(rho) == 1
    assert abs(np.trace(rho) - 1) < 1e-15


def test_reduced_density_examples():
    np.testing.assert_allclose(reduced_density(bell_state(), 0b01).matrix, np.eye(2) / 2, atol=1e-15)
    np.testing.assert_allclose(reduced_density(basis_state(2, 0), 0b10).matrix, np.diag([1, 0]))
    w3 = w_state(3)
    oracle = brute_partial_trace(w3.amplitudes, 3, [0])
    np.testing.assert_allclose(oracle, np.diag([2 / 3, 1 / 3]), atol=1e-15)
    np.testing.assert_allclose(reduced_density(w3, 0b001).matrix, oracle, atol=1e-15)


@pytest.mark.parametrize("n,keep", [(3, [0, 2]), (4, [1]), (4, [3, 1]), (4, [0, 1, 3]), (5, [2, 4])])
def test_reduced_density_matches_brute_force(rng, n, keep):
    psi = random_state(n, rng)
    mask = sites_mask(keep)
    oracle = brute_partial_trace(psi.amplitudes, n, sorted(keep))
    np.testing.assert_allclose(reduced_density(psi, mask).matrix, oracle, atol=1e-14)
    # same result starting from the density operator
    np.testing.assert_allclose(reduced_density(density_from_pure(psi), mask).matrix, oracle, atol=1e-14)


def test_reduced_density_empty_mask():
    with pytest.raises(ValueError):
        reduced_density(bell_state(), 0)


def test_reduced_density_full_mask_reproduces_input(rng):
    psi = random_state(4, rng)
    rho = density_from_pure(psi)
    full = reduced_density(rho, 0b1111)
    assert np.max(np.abs(full.matrix - rho.matrix)) <= 1e-12


def test_purity_examples():
    assert purity(density_from_pure(ghz_state(3))) == pytest.approx(1, abs=1e-14)
    assert purity(DensityOperator(1, np.eye(2) / 2)) == pytest.approx(0.5)
    assert purity(reduced_density(w_state(3), 0b1)) == pytest.approx(5 / 9, abs=1e-14)


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(2, 7))
def test_schmidt_symmetry(seed, n):
    rng = np.random.default_rng(seed)
    psi = random_state(n, rng)
    mask = int(rng.integers(1, (1 << n) - 1))
    comp = ((1 << n) - 1) ^ mask
    pa = purity(reduced_density(psi, mask))
    pb = purity(reduced_density(psi, comp))
    assert abs(pa - pb) <= 1e-10
    assert abs(subsystem_purity(psi, mask) - pa) <= 1e-12


def test_pure_state_validation():
    with pytest.raises(ValueError):
        PureState(2, np.ones(3))
    with pytest.raises(ValueError):
        PureState(1, np.array([1.0, 1.0]))
    psi = bell_state()
    with pytest.raises(ValueError):
        psi.amplitudes[0] = 0


def test_density_operator_validation():
    with pytest.raises(ValueError):
        DensityOperator(1, np.array([[0.5, 0.1], [0.0, 0.5]]))
    with pytest.raises(ValueError):
        DensityOperator(1, np.eye(2))
    bad = DensityOperator(1, np.diag([1.5, -0.5]))
    assert not is_positive(bad)
    assert is_positive(random_density(2, np.random.default_rng(0)))


def test_mask_helpers():
    assert mask_sites(0b101, 3) == [0, 2]
    assert sites_mask([2, 0]) == 0b101
    with pytest.raises(ValueError):
        mask_sites(0b1000, 3)


def test_permute_and_local_unitary_preserve_norm(rng):
    psi = random_state(4, rng)
    out = apply_local(permute_spins(psi, [2, 0, 3, 1]), 2, random_unitary(rng))
    assert abs(np.linalg.norm(out.amplitudes) - 1) < 1e-14
    # permutation moves a basis label: |1000> with spin 0 -> position 1 gives |0100>
    moved = permute_spins(basis_state(4, 0b1000), [1, 0, 2, 3])
    np.testing.assert_array_equal(moved.amplitudes, basis_state(4, 0b0100).amplitudes)


def test_named_states():
    assert np.count_nonzero(ghz_state(4).amplitudes) == 2
    w = w_state(3).amplitudes
    np.testing.assert_allclose(w[[1, 2, 4]], 1 / np.sqrt(3))
