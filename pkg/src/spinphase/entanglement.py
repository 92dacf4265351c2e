"""Concurrence-type entanglement measures for pure states of spins 1/2.

Only squared lengths of concurrence vectors are computed.  For a bipartition
A|B of a pure state the squared length is ``2 (1 - Tr rho_A^2)``; the
individual vector components are basis dependent and never needed.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .hilbert import (
    DensityOperator,
    PureState,
    reduced_density,
    subsystem_purity,
)

_SYSY = np.array([[0, 0, 0, -1], [0, 0, 1, 0], [0, 1, 0, 0], [-1, 0, 0, 0]], dtype=complex)

# (<0,1| - <1,0|) on one spin and its copy, local index 2*s + s_copy
_SINGLET_BRA = np.array([0, 1, -1, 0], dtype=complex)

TANGLE_NEGATIVE_TOL = 1e-10


class ConcurrenceKind(enum.Enum):
    TWO_SPIN = "two_spin"
    ONE_VS_REST = "one_vs_rest"
    MULTIPARTITE = "multipartite"
    VECTOR_LENGTH_SQ = "vector_length_sq"


@dataclass(frozen=True)
class ConcurrenceReport:
    value: float
    kind: ConcurrenceKind
    partition: Optional[int] = None


def _require_pure(state, n=None, at_least=None):
    if not isinstance(state, PureState):
        raise TypeError("a pure state is required")
    if n is not None and state.n_spins != n:
        raise ValueError(f"expected {n} spins, got {state.n_spins}")
    if at_least is not None and state.n_spins < at_least:
        raise ValueError(f"need at least {at_least} spins, got {state.n_spins}")


def concurrence_two_spin(state: PureState) -> float:
    """Pure two-spin concurrence ``|<psi| sy x sy |psi*>|``.

    The result is cross-checked against the doubled-space contraction with
    the singlet bra on each spin/copy pair.
    """
    _require_pure(state, n=2)
    psi = state.amplitudes
    c = abs(psi.conj() @ _SYSY @ psi.conj())

    # doubled layout (s1, s1', s2, s2')
    doubled = np.einsum("ab,cd->acbd", psi.reshape(2, 2), psi.reshape(2, 2)).reshape(4, 4)
    c_doubled = abs(_SINGLET_BRA @ doubled @ _SINGLET_BRA)
    if abs(c - c_doubled) > 1e-12:
        raise ArithmeticError(f"concurrence routes disagree: {c} vs {c_doubled}")
    return float(c)


def wootters_concurrence(rho) -> float:
    """Concurrence of a (possibly mixed) two-spin density matrix.

    Uses the Hermitian form ``sqrt(sqrt(rho) rho~ sqrt(rho))``; round-off
    negative eigenvalues are clamped to zero.
    """
    m = rho.matrix if isinstance(rho, DensityOperator) else np.asarray(rho, dtype=complex)
    if m.shape != (4, 4):
        raise ValueError("Wootters concurrence needs a 4x4 density matrix")
    w, v = np.linalg.eigh(m)
    sqrt_rho = (v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T
    rho_tilde = _SYSY @ m.conj() @ _SYSY
    r = sqrt_rho @ rho_tilde @ sqrt_rho
    lam = np.sqrt(np.clip(np.linalg.eigvalsh(0.5 * (r + r.conj().T)), 0, None))[::-1]
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def wootters_from_ensemble(vectors: np.ndarray) -> float:
    """Wootters concurrence of ``rho = sum_k |v_k><v_k|`` (columns of ``vectors``).

    The decreasing lambdas are the singular values of
    ``T_kl = <v_k| sy x sy |v_l*>``, independent of the chosen ensemble.
    Avoids square roots of near-zero eigenvalues for rank-deficient rho.
    """
    v = np.asarray(vectors, dtype=complex).reshape(4, -1)
    t = v.conj().T @ _SYSY @ v.conj()
    lam = np.zeros(max(4, t.shape[0]))
    sv = np.linalg.svd(t, compute_uv=False)
    lam[:sv.size] = sv
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def concurrence_two_spin_pair(state: PureState, i: int, j: int) -> float:
    """Concurrence between spins ``i`` and ``j`` of the two-spin marginal.

    The marginal is never diagonalized: tracing out the other spins of a
    pure state gives the ensemble ``{<r|psi>}`` directly.
    """
    _require_pure(state, at_least=2)
    n = state.n_spins
    if i == j:
        raise ValueError("pair concurrence needs two distinct spins")
    for s in (i, j):
        if not 0 <= s < n:
            raise IndexError(f"site {s} out of range for {n} spins")
    rest = [k for k in range(n) if k not in (i, j)]
    ensemble = np.transpose(state.tensor(), [i, j] + rest).reshape(4, -1)
    return wootters_from_ensemble(ensemble)


def one_vs_rest_concurrence_sq(state: PureState, site: int) -> float:
    """Squared concurrence between one spin and the remaining ones."""
    _require_pure(state, at_least=2)
    if not 0 <= site < state.n_spins:
        raise IndexError(f"site {site} out of range for {state.n_spins} spins")
    rho = reduced_density(state, 1 << site).matrix
    from_purity = 2.0 * (1.0 - np.vdot(rho, rho).real)
    from_det = 4.0 * np.linalg.det(rho).real
    if abs(from_purity - from_det) > 1e-12:
        raise ArithmeticError(f"purity and determinant forms disagree: "
                              f"{from_purity} vs {from_det}")
    return float(from_purity)


def _tangle_with_focus(state: PureState, a: int) -> float:
    b, c = (s for s in range(3) if s != a)
    return (one_vs_rest_concurrence_sq(state, a)
            - concurrence_two_spin_pair(state, a, b) ** 2
            - concurrence_two_spin_pair(state, a, c) ** 2)


def three_tangle(state: PureState) -> float:
    """Residual tangle ``C^2_{A(BC)} - C^2_AB - C^2_AC`` of three spins.

    Evaluated with every spin as focus; the three values must agree.
    """
    _require_pure(state, n=3)
    taus = [_tangle_with_focus(state, a) for a in range(3)]
    if max(taus) - min(taus) > 1e-9:
        raise ArithmeticError(f"3-tangle depends on focus spin: {taus}")
    tau = taus[0]
    if tau < -TANGLE_NEGATIVE_TOL:
        raise ArithmeticError(f"monogamy violated, tau = {tau}")
    return max(tau, 0.0)


def bipartitions(n_spins: int):
    """Masks of subsystem A for every unordered bipartition, site 0 in A."""
    for rest in range((1 << (n_spins - 1)) - 1):
        yield 1 | rest << 1


def _proper_purity_sum(state: PureState) -> float:
    """Sum of ``Tr rho_A^2`` over all 2^N - 2 proper non-empty subsystems.

    Every subsystem is paired with its complement (equal purities), so only
    masks containing site 0 are evaluated.
    """
    return 2.0 * sum(subsystem_purity(state, m) for m in bipartitions(state.n_spins))


def multipartite_concurrence(state: PureState) -> float:
    """N-partite concurrence ``c_N`` of a pure state."""
    _require_pure(state, at_least=2)
    n = state.n_spins
    norm_sq = np.vdot(state.amplitudes, state.amplitudes).real
    arg = (2 ** n - 2) * norm_sq ** 2 - _proper_purity_sum(state)
    return float(2.0 ** (1 - n / 2) * np.sqrt(max(arg, 0.0)))


def concurrence_vector_length_sq(state: PureState) -> float:
    """Total squared length of the concurrence vectors of all bipartitions."""
    _require_pure(state, at_least=2)
    return float(sum(2.0 * (1.0 - subsystem_purity(state, m))
                     for m in bipartitions(state.n_spins)))
