"""Dense state vectors and density matrices for N spins 1/2.

Basis convention: spin 1 (site 0) is the most significant bit of the basis
index, so ``|s1 s2 ... sN>`` sits at index ``int("s1s2...sN", 2)``.

Subsystems are described by integer bitmasks where ``1 << site`` marks
``site`` (0-based, site 0 = spin 1).  Note this is *not* the bit position of
that spin inside a basis index.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import reduce

import numpy as np

NORM_TOL = 1e-12
HERMITIAN_TOL = 1e-12
PSD_TOL = 1e-10


class PauliAxis(enum.Enum):
    X = "x"
    Y = "y"
    Z = "z"

    @property
    def matrix(self) -> np.ndarray:
        return _PAULI[self]


_PAULI = {
    PauliAxis.X: np.array([[0, 1], [1, 0]], dtype=complex),
    PauliAxis.Y: np.array([[0, -1j], [1j, 0]], dtype=complex),
    PauliAxis.Z: np.array([[1, 0], [0, -1]], dtype=complex),
}


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


def _n_from_dim(dim: int) -> int:
    n = dim.bit_length() - 1
    if dim < 2 or 1 << n != dim:
        raise ValueError(f"dimension {dim} is not a power of two >= 2")
    return n


@dataclass(frozen=True, eq=False)
class PureState:
    """Normalized amplitude vector of ``n_spins`` spins."""

    n_spins: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = _frozen(self.amplitudes).reshape(-1)
        if self.n_spins < 1:
            raise ValueError("n_spins must be positive")
        if amps.size != 1 << self.n_spins:
            raise ValueError(
                f"expected {1 << self.n_spins} amplitudes, got {amps.size}")
        norm = np.vdot(amps, amps).real
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state not normalized (|psi|^2 = {norm!r})")
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_amplitudes(cls, amplitudes, normalize: bool = True) -> "PureState":
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        if normalize:
            norm = np.linalg.norm(amps)
            if norm == 0:
                raise ValueError("zero vector cannot be normalized")
            amps = amps / norm
        return cls(_n_from_dim(amps.size), amps)

    @property
    def dim(self) -> int:
        return 1 << self.n_spins

    def tensor(self) -> np.ndarray:
        """Amplitudes as an ``(2,)*n_spins`` array, axis i = site i."""
        return self.amplitudes.reshape((2,) * self.n_spins)

    def __repr__(self):
        return f"PureState(n_spins={self.n_spins})"


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """Hermitian, unit-trace ``2^n x 2^n`` matrix.

    Positivity is not checked on construction; see :func:`is_positive`.
    """

    n_spins: int
    matrix: np.ndarray

    def __post_init__(self):
        m = _frozen(self.matrix)
        d = 1 << self.n_spins
        if m.shape != (d, d):
            raise ValueError(f"expected a {d}x{d} matrix, got {m.shape}")
        if np.max(np.abs(m - m.conj().T)) > HERMITIAN_TOL:
            raise ValueError("density matrix is not Hermitian")
        tr = np.trace(m)
        if abs(tr - 1.0) > NORM_TOL:
            raise ValueError(f"density matrix trace is {tr!r}, expected 1")
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_matrix(cls, matrix, normalize: bool = True) -> "DensityOperator":
        m = np.asarray(matrix, dtype=complex)
        m = 0.5 * (m + m.conj().T)
        if normalize:
            m = m / np.trace(m).real
        return cls(_n_from_dim(m.shape[0]), m)

    @property
    def dim(self) -> int:
        return 1 << self.n_spins

    def __repr__(self):
        return f"DensityOperator(n_spins={self.n_spins})"


def basis_state(n_spins: int, bits: int) -> PureState:
    if n_spins < 1:
        raise ValueError("n_spins must be positive")
    if not 0 <= bits < 1 << n_spins:
        raise IndexError(f"basis index {bits} out of range for {n_spins} spins")
    amps = np.zeros(1 << n_spins, dtype=complex)
    amps[bits] = 1.0
    return PureState(n_spins, amps)


def tensor(a: PureState, *more: PureState) -> PureState:
    """Kronecker product, first argument on the most significant spins."""
    states = (a,) + more
    amps = reduce(np.kron, (s.amplitudes for s in states))
    return PureState(sum(s.n_spins for s in states), amps)


def _check_site(n_spins: int, site: int):
    if not 0 <= site < n_spins:
        raise IndexError(f"site {site} out of range for {n_spins} spins")


def apply_local(state: PureState, site: int, op) -> PureState:
    """Apply a 2x2 unitary to one spin."""
    _check_site(state.n_spins, site)
    t = state.amplitudes.reshape(1 << site, 2, -1)
    out = np.einsum("ab,ibj->iaj", np.asarray(op, dtype=complex), t)
    return PureState(state.n_spins, out.reshape(-1))


def apply_pauli(state: PureState, site: int, axis) -> PureState:
    return apply_local(state, site, PauliAxis(axis).matrix)


def permute_spins(state: PureState, perm) -> PureState:
    """Relabel spins: site ``k`` of the result holds old site ``perm[k]``."""
    perm = list(perm)
    if sorted(perm) != list(range(state.n_spins)):
        raise ValueError(f"{perm} is not a permutation of {state.n_spins} sites")
    return PureState(state.n_spins,
                     np.transpose(state.tensor(), perm).reshape(-1))


def density_from_pure(state: PureState) -> DensityOperator:
    psi = state.amplitudes
    return DensityOperator(state.n_spins, np.outer(psi, psi.conj()))


def as_density(x) -> DensityOperator:
    if isinstance(x, DensityOperator):
        return x
    return density_from_pure(x)


def mask_sites(mask: int, n_spins: int) -> list[int]:
    """Sites contained in ``mask``, ascending."""
    if mask < 0 or mask >= 1 << n_spins:
        raise ValueError(f"mask {mask:#b} does not fit {n_spins} spins")
    return [i for i in range(n_spins) if mask >> i & 1]


def sites_mask(sites) -> int:
    return sum(1 << s for s in set(sites))


def _bipartite_matrix(state: PureState, keep: list[int]) -> np.ndarray:
    n = state.n_spins
    rest = [i for i in range(n) if i not in keep]
    t = np.transpose(state.tensor(), keep + rest)
    return t.reshape(1 << len(keep), -1)


def reduced_density(x, keep: int) -> DensityOperator:
    """Partial trace over every spin not in the bitmask ``keep``.

    Kept spins retain their relative order.
    """
    n = x.n_spins
    sites = mask_sites(keep, n)
    if not sites:
        raise ValueError("cannot keep an empty subsystem")
    if isinstance(x, PureState):
        m = _bipartite_matrix(x, sites)
        return DensityOperator.from_matrix(m @ m.conj().T)
    rest = [i for i in range(n) if i not in sites]
    t = x.matrix.reshape((2,) * (2 * n))
    t = np.transpose(t, sites + rest + [n + i for i in sites] + [n + i for i in rest])
    dk, dr = 1 << len(sites), 1 << len(rest)
    t = t.reshape(dk, dr, dk, dr)
    return DensityOperator.from_matrix(np.einsum("arbr->ab", t))


def purity(rho: DensityOperator) -> float:
    m = rho.matrix
    return float(np.vdot(m, m).real)


def subsystem_purity(state: PureState, mask: int) -> float:
    """``Tr rho_A^2`` for a pure state, using the smaller side of the cut."""
    sites = mask_sites(mask, state.n_spins)
    if not sites:
        return 1.0
    m = _bipartite_matrix(state, sites)
    g = m @ m.conj().T if m.shape[0] <= m.shape[1] else m.conj().T @ m
    return float(np.vdot(g, g).real)


def is_positive(rho: DensityOperator, tol: float = PSD_TOL) -> bool:
    """Opt-in positivity diagnostic (full eigendecomposition)."""
    return bool(np.linalg.eigvalsh(rho.matrix).min() >= -tol)


# -- named states -------------------------------------------------------------

def ghz_state(n_spins: int) -> PureState:
    amps = np.zeros(1 << n_spins, dtype=complex)
    amps[0] = amps[-1] = 1 / np.sqrt(2)
    return PureState(n_spins, amps)


def w_state(n_spins: int) -> PureState:
    amps = np.zeros(1 << n_spins, dtype=complex)
    for site in range(n_spins):
        amps[1 << (n_spins - 1 - site)] = 1 / np.sqrt(n_spins)
    return PureState(n_spins, amps)


def bell_state() -> PureState:
    """``(|00> + |11>)/sqrt(2)``."""
    return ghz_state(2)


def random_state(n_spins: int, rng: np.random.Generator) -> PureState:
    """Haar-random pure state."""
    z = rng.normal(size=1 << n_spins) + 1j * rng.normal(size=1 << n_spins)
    return PureState.from_amplitudes(z)


def random_density(n_spins: int, rng: np.random.Generator, rank=None) -> DensityOperator:
    d = 1 << n_spins
    rank = d if rank is None else rank
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    return DensityOperator.from_matrix(g @ g.conj().T)


def random_unitary(rng: np.random.Generator, dim: int = 2) -> np.ndarray:
    z = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))
