import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spinphase import entanglement as ent
from spinphase import phase_space as ps
from spinphase.hilbert import (
    PureState,
    apply_local,
    basis_state,
    bell_state,
    ghz_state,
    random_density,
    random_state,
    random_unitary,
    reduced_density,
    sites_mask,
    tensor,
    w_state,
)

seeds = st.integers(0, 2**32 - 1)
SYSY = np.kron([[0, -1j], [1j, 0]], [[0, -1j], [1j, 0]])


def wootters_oracle(rho: np.ndarray) -> float:
    """Textbook route: square roots of the eigenvalues of rho * rho~."""
    rt = rho @ SYSY @ rho.conj() @ SYSY
    lam = np.sort(np.sqrt(np.abs(np.linalg.eigvals(rt))))[::-1]
    return max(0.0, lam[0] - lam[1] - lam[2] - lam[3])


def test_concurrence_two_spin_examples():
    assert ent.concurrence_two_spin(bell_state()) == pytest.approx(1)
    assert ent.concurrence_two_spin(basis_state(2, 1)) == pytest.approx(0)
    psi = PureState(2, np.array([np.sqrt(0.5), 0, 0, np.sqrt(0.5) * 1j]))
    assert ent.concurrence_two_spin(psi) == pytest.approx(1, abs=1e-15)


def test_concurrence_two_spin_wrong_size():
    with pytest.raises(ValueError):
        ent.concurrence_two_spin(ghz_state(3))


@settings(max_examples=50, deadline=None)
@given(seeds)
def test_concurrence_closed_form(seed):
    psi = random_state(2, np.random.default_rng(seed))
    a, b, c, d = psi.amplitudes
    assert ent.concurrence_two_spin(psi) == pytest.approx(2 * abs(b * c - a * d), abs=1e-14)


def test_pair_concurrence_examples(rng):
    for i, j in itertools.combinations(range(3), 2):
        assert ent.concurrence_two_spin_pair(ghz_state(3), i, j) == pytest.approx(0, abs=1e-14)
        assert ent.concurrence_two_spin_pair(w_state(3), i, j) == pytest.approx(2 / 3, abs=1e-14)
        assert ent.concurrence_two_spin_pair(basis_state(3, 5), i, j) == pytest.approx(0, abs=1e-14)
    # brute-force oracle on the W marginal
    assert wootters_oracle(reduced_density(w_state(3), 0b011).matrix) == pytest.approx(2 / 3, abs=1e-7)


def test_pair_concurrence_errors():
    with pytest.raises(ValueError):
        ent.concurrence_two_spin_pair(ghz_state(3), 1, 1)
    with pytest.raises(IndexError):
        ent.concurrence_two_spin_pair(ghz_state(3), 0, 3)


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_pair_matches_pure_two_spin(seed):
    psi = random_state(2, np.random.default_rng(seed))
    assert abs(ent.concurrence_two_spin_pair(psi, 0, 1) - ent.concurrence_two_spin(psi)) <= 1e-10


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_wootters_mixed_matches_oracle(seed):
    rho = random_density(2, np.random.default_rng(seed), rank=2)
    assert abs(ent.wootters_concurrence(rho) - wootters_oracle(rho.matrix)) <= 1e-7


@pytest.mark.parametrize("n", [3, 4, 5])
def test_pair_ensemble_matches_hermitian_form(rng, n):
    psi = random_state(n, rng)
    for i, j in [(0, 1), (n - 1, 1)]:
        herm = ent.wootters_concurrence(reduced_density(psi, sites_mask((i, j))))
        assert abs(ent.concurrence_two_spin_pair(psi, i, j) - herm) <= 1e-7


def test_one_vs_rest_examples():
    assert ent.one_vs_rest_concurrence_sq(bell_state(), 0) == pytest.approx(1)
    for s in range(3):
        assert ent.one_vs_rest_concurrence_sq(ghz_state(3), s) == pytest.approx(1)
        assert ent.one_vs_rest_concurrence_sq(w_state(3), s) == pytest.approx(8 / 9)
    with pytest.raises(IndexError):
        ent.one_vs_rest_concurrence_sq(bell_state(), 2)


def test_three_tangle_examples(rng):
    assert ent.three_tangle(ghz_state(3)) == pytest.approx(1, abs=1e-12)
    assert ent.three_tangle(w_state(3)) == pytest.approx(0, abs=1e-12)
    prod = tensor(random_state(1, rng), random_state(1, rng), random_state(1, rng))
    assert ent.three_tangle(prod) == pytest.approx(0, abs=1e-12)
    with pytest.raises(ValueError):
        ent.three_tangle(bell_state())


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_three_tangle_bounds(seed):
    tau = ent.three_tangle(random_state(3, np.random.default_rng(seed)))
    assert 0 <= tau <= 1


def test_multipartite_examples(rng):
    for n in range(2, 9):
        assert ent.multipartite_concurrence(ghz_state(n)) == pytest.approx(np.sqrt(2 - 2.0 ** (2 - n)), abs=1e-12)
    assert ent.multipartite_concurrence(ghz_state(3)) == pytest.approx(1.22474, abs=1e-5)
    assert ent.multipartite_concurrence(bell_state()) == pytest.approx(1, abs=1e-12)
    prod = tensor(*(random_state(1, rng) for _ in range(5)))
    assert ent.multipartite_concurrence(prod) == pytest.approx(0, abs=1e-6)
    with pytest.raises(ValueError):
        ent.multipartite_concurrence(basis_state(1, 0))


def test_vector_length_examples(rng):
    assert ent.concurrence_vector_length_sq(bell_state()) == pytest.approx(1)
    assert ent.concurrence_vector_length_sq(ghz_state(3)) == pytest.approx(3)
    assert 2.0 ** (2 - 3) * 3 == pytest.approx(ent.multipartite_concurrence(ghz_state(3)) ** 2)
    prod = tensor(*(random_state(1, rng) for _ in range(4)))
    assert ent.concurrence_vector_length_sq(prod) == pytest.approx(0, abs=1e-12)


def test_bipartitions_enumerate_each_cut_once():
    for n in range(2, 7):
        masks = list(ent.bipartitions(n))
        full = (1 << n) - 1
        assert len(masks) == 2 ** (n - 1) - 1
        cuts = {frozenset((m, full ^ m)) for m in masks}
        assert len(cuts) == len(masks)
        assert all(m & 1 and m != full for m in masks)


@settings(max_examples=30, deadline=None)
@given(seeds, st.integers(2, 8))
def test_length_identities(seed, n):
    psi = random_state(n, np.random.default_rng(seed))
    c_n = ent.multipartite_concurrence(psi)
    cbar2 = ent.concurrence_vector_length_sq(psi)
    assert abs(c_n ** 2 - 2.0 ** (2 - n) * cbar2) <= 1e-10
    assert abs(ps.second_moment_projector(psi).value - (1 - cbar2 / 2 ** n)) <= 1e-10


@settings(max_examples=50, deadline=None)
@given(seeds)
def test_two_spin_relation(seed):
    psi = random_state(2, np.random.default_rng(seed))
    c = ent.concurrence_two_spin(psi)
    assert abs(ps.second_moment_projector(psi).value - (1 - c * c / 4)) <= 1e-10
    assert 0 <= c <= 1 + 1e-15


@settings(max_examples=50, deadline=None)
@given(seeds)
def test_three_spin_relations(seed):
    psi = random_state(3, np.random.default_rng(seed))
    p = ps.second_moment_projector(psi).value
    pairs = sum(ent.concurrence_two_spin_pair(psi, i, j) ** 2 for i, j in itertools.combinations(range(3), 2))
    rest = sum(ent.one_vs_rest_concurrence_sq(psi, i) for i in range(3))
    tau = ent.three_tangle(psi)
    assert abs(p - (1 - pairs / 4 - 3 * tau / 8)) <= 1e-9
    assert abs(p - (1 - rest / 8)) <= 1e-9


@settings(max_examples=25, deadline=None)
@given(seeds, st.integers(2, 5))
def test_local_unitary_invariance(seed, n):
    rng = np.random.default_rng(seed)
    psi = random_state(n, rng)
    moved = psi
    for site in range(n):
        moved = apply_local(moved, site, random_unitary(rng))
    assert abs(ent.multipartite_concurrence(psi) - ent.multipartite_concurrence(moved)) <= 1e-10
    assert abs(ent.concurrence_vector_length_sq(psi) - ent.concurrence_vector_length_sq(moved)) <= 1e-10
    for s in range(n):
        assert abs(ent.one_vs_rest_concurrence_sq(psi, s) - ent.one_vs_rest_concurrence_sq(moved, s)) <= 1e-10
    if n == 3:
        assert abs(ent.three_tangle(psi) - ent.three_tangle(moved)) <= 1e-10
