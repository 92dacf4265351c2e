"""Spin-coherent states, the Husimi function and its second moment.

The second moment ``P = 3^N * int dmu H(mu)^2`` is available through four
independent routes:

* ``projector``   -- expectation of the symmetric projector on every
  spin/copy pair of the doubled state (exact);
* ``purity``      -- ``1 - c_N^2 / 4`` from subsystem purities (exact,
  pure states only);
* ``quadrature``  -- tensor-product Gauss-Legendre x trapezoid rule, exact
  for this integrand once ``nodes_theta >= 3`` and ``nodes_phi >= 5``;
* ``montecarlo``  -- sampling of the Haar measure.

Doubled-space layout: the original copy and the auxiliary copy of spin i are
adjacent, with local index ``2*s + s_copy`` on the pair.
"""
from __future__ import annotations

import enum
import itertools
import math
import os
from functools import reduce
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from . import entanglement
from .hilbert import DensityOperator, PureState, purity

StateLike = Union[PureState, DensityOperator]

PROJECTOR_PURE_CAP = 12
PROJECTOR_MIXED_CAP = 6
QUADRATURE_CAP = 4
IMAG_TOL = 1e-10
EXACTNESS_TOL = 1e-12

P_SYM = np.array([[1, 0, 0, 0],
                  [0, .5, .5, 0],
                  [0, .5, .5, 0],
                  [0, 0, 0, 1]], dtype=complex)
P_ANTI = np.eye(4, dtype=complex) - P_SYM

RNG_ALGORITHM = "PCG64"
MC_STREAM_SIZE = 1 << 16


class SizeCapError(ValueError):
    """Requested system is too large for the chosen algorithm."""


class Method(enum.Enum):
    PROJECTOR = "projector"
    PURITY = "purity"
    QUADRATURE = "quadrature"
    MONTE_CARLO = "montecarlo"


@dataclass(frozen=True)
class SecondMomentReport:
    value: float
    method: Method
    stderr: Optional[float] = None
    samples_or_nodes: int = 0


@dataclass(frozen=True, eq=False)
class PhasePoint:
    """Bloch angles ``(theta_i, phi_i)`` of every spin."""

    thetas: np.ndarray
    phis: np.ndarray

    def __post_init__(self):
        th = np.asarray(self.thetas, dtype=float).reshape(-1)
        ph = np.mod(np.asarray(self.phis, dtype=float).reshape(-1), 2 * np.pi)
        if th.shape != ph.shape or th.size == 0:
            raise ValueError("need one (theta, phi) pair per spin")
        if np.any(th < 0) or np.any(th > np.pi):
            raise ValueError("theta must lie in [0, pi]")
        object.__setattr__(self, "thetas", th)
        object.__setattr__(self, "phis", ph)

    @classmethod
    def from_pairs(cls, pairs) -> "PhasePoint":
        pairs = np.asarray(pairs, dtype=float).reshape(-1, 2)
        return cls(pairs[:, 0], pairs[:, 1])

    @property
    def n_spins(self) -> int:
        return self.thetas.size


def _spinor(theta, phi) -> np.ndarray:
    """Single-spin coherent amplitudes, last axis = (|0>, |1>)."""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    return np.stack([np.cos(theta / 2) + 0j,
                     np.sin(theta / 2) * np.exp(1j * phi)], axis=-1)


def coherent_state(point: PhasePoint) -> PureState:
    amps = np.ones(1, dtype=complex)
    for c in _spinor(point.thetas, point.phis):
        amps = np.kron(amps, c)
    return PureState.from_amplitudes(amps)


# -- Husimi function -----------------------------------------------------------

def _spectral(x: StateLike):
    """Weights and column eigenvectors so that rho = sum_k w_k |v_k><v_k|."""
    if isinstance(x, PureState):
        return np.ones(1), x.amplitudes[:, None]
    w, v = np.linalg.eigh(x.matrix)
    keep = w > 1e-15
    return w[keep], v[:, keep]


def _coherent_overlaps(spinors: np.ndarray, vecs: np.ndarray) -> np.ndarray:
    """``<mu_s | v_k>`` for a batch of product coherent states.

    ``spinors`` has shape (S, N, 2), ``vecs`` shape (2^N, r); returns (S, r).
    """
    s, n, _ = spinors.shape
    bra = spinors.conj()
    t = bra[:, 0, :] @ vecs.reshape(2, -1)             # (S, 2^(N-1) * r)
    for i in range(1, n):
        t = t.reshape(s, 2, -1)
        t = bra[:, i, 0, None] * t[:, 0] + bra[:, i, 1, None] * t[:, 1]
    return t.reshape(s, -1)


def _husimi_batch(weights, vecs, spinors) -> np.ndarray:
    ov = _coherent_overlaps(spinors, vecs)
    return (np.abs(ov) ** 2) @ weights


def husimi(x: StateLike, point: PhasePoint) -> float:
    """``H(mu) = <mu| rho |mu>``."""
    if point.n_spins != x.n_spins:
        raise ValueError(f"phase point has {point.n_spins} spins, state has {x.n_spins}")
    w, v = _spectral(x)
    sp = _spinor(point.thetas, point.phis)[None]
    return float(_husimi_batch(w, v, sp)[0])


def husimi_on_grid(x: StateLike, thetas: np.ndarray, phis: np.ndarray) -> np.ndarray:
    """Husimi values on arbitrary batches; ``thetas``/``phis`` shaped (S, N)."""
    thetas = np.asarray(thetas, dtype=float)
    phis = np.asarray(phis, dtype=float)
    if thetas.shape[-1] != x.n_spins:
        raise ValueError("angle arrays must have one column per spin")
    w, v = _spectral(x)
    return _husimi_batch(w, v, _spinor(thetas, phis))


# -- doubled space -------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DoubledState:
    """``|psi> x |psi'>`` with the two copies of each spin adjacent."""

    n_spins: int
    amplitudes: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if a.size != 4 ** self.n_spins:
            raise ValueError(f"expected {4 ** self.n_spins} amplitudes, got {a.size}")
        a.setflags(write=False)
        object.__setattr__(self, "amplitudes", a)

    @classmethod
    def from_states(cls, psi: PureState, copy: Optional[PureState] = None) -> "DoubledState":
        copy = psi if copy is None else copy
        if copy.n_spins != psi.n_spins:
            raise ValueError("both copies must have the same number of spins")
        n = psi.n_spins
        t = np.multiply.outer(psi.tensor(), copy.tensor())
        order = [k for i in range(n) for k in (i, n + i)]
        return cls(n, np.transpose(t, order).reshape(-1))

    def swap_copies(self) -> "DoubledState":
        t = self.amplitudes.reshape((2, 2) * self.n_spins)
        order = [k for i in range(self.n_spins) for k in (2 * i + 1, 2 * i)]
        return DoubledState(self.n_spins, np.transpose(t, order).reshape(-1))

    def is_copy_symmetric(self, tol: float = 1e-12) -> bool:
        return bool(np.max(np.abs(self.amplitudes - self.swap_copies().amplitudes)) <= tol)


def _apply_pair_ops(vec: np.ndarray, ops: Sequence[np.ndarray]) -> np.ndarray:
    """Apply a 4x4 operator to every spin/copy pair of a doubled vector."""
    n = len(ops)
    t = vec.reshape((4,) * n)
    for i, op in enumerate(ops):
        t = np.moveaxis(np.tensordot(op, t, axes=([1], [i])), 0, i)
    return t.reshape(-1)


def _real(z: complex, what: str) -> float:
    if abs(z.imag) > IMAG_TOL:
        raise ArithmeticError(f"{what} has imaginary residue {z.imag:.3e}")
    return float(z.real)


def _doubled_trace(rho: DensityOperator, ops: Sequence[np.ndarray]) -> complex:
    """``Tr((rho x rho) . (x)_i ops[i])`` without forming rho x rho."""
    n = rho.n_spins
    r = rho.matrix.reshape((2,) * (2 * n))
    a = list(range(n))                  # ket, original copy
    b = list(range(n, 2 * n))           # bra, original copy
    c = list(range(2 * n, 3 * n))       # ket, auxiliary copy
    d = list(range(3 * n, 4 * n))       # bra, auxiliary copy
    operands = [r, a + b, r, c + d]
    for i, op in enumerate(ops):
        # op rows (b_i, d_i), columns (a_i, c_i)
        operands += [op.reshape(2, 2, 2, 2), [b[i], d[i], a[i], c[i]]]
    return complex(np.einsum(*operands, [], optimize="greedy"))


def _pattern_ops(pattern) -> list[np.ndarray]:
    ops = []
    for p in pattern:
        p = p.upper() if isinstance(p, str) else p
        if p == "S":
            ops.append(P_SYM)
        elif p == "A":
            ops.append(P_ANTI)
        else:
            raise ValueError(f"pattern entries must be 'S' or 'A', got {p!r}")
    return ops


def symmetric_antisymmetric_split(doubled: Union[DoubledState, DensityOperator], pattern) -> float:
    """Expectation of one ordered product of P_s / P_a projectors.

    ``pattern`` holds one 'S' or 'A' per spin.  Accepts a doubled pure state
    or a density operator (then the doubled state is ``rho x rho``).
    """
    pattern = list(pattern)
    if len(pattern) != doubled.n_spins:
        raise ValueError(f"pattern length {len(pattern)} != {doubled.n_spins} spins")
    ops = _pattern_ops(pattern)
    if isinstance(doubled, DensityOperator):
        if doubled.n_spins > PROJECTOR_MIXED_CAP:
            raise SizeCapError(f"mixed doubled-space traces capped at N={PROJECTOR_MIXED_CAP}")
        return _real(_doubled_trace(doubled, ops), "pattern expectation")
    v = doubled.amplitudes
    return _real(np.vdot(v, _apply_pair_ops(v, ops)), "pattern expectation")


def antisymmetric_sector_sum(x: StateLike, k: int) -> float:
    """Sum over all orderings of ``P_s^(N-k) x P_a^k`` expectations."""
    n = x.n_spins
    target = DoubledState.from_states(x) if isinstance(x, PureState) else x
    total = 0.0
    for slots in itertools.combinations(range(n), k):
        pattern = ["A" if i in slots else "S" for i in range(n)]
        total += symmetric_antisymmetric_split(target, pattern)
    return total


def trace_ps_minus_pa(rho: StateLike, check: bool = True) -> float:
    """``Tr(rho x rho (P_s - P_a)^(x)N)``, which must equal ``Tr rho^2``.

    With ``check`` the purity is computed separately and a mismatch beyond
    1e-10 raises.
    """
    if isinstance(rho, PureState):
        rho = DensityOperator.from_matrix(np.outer(rho.amplitudes, rho.amplitudes.conj()))
    if rho.n_spins > PROJECTOR_MIXED_CAP:
        raise SizeCapError(f"mixed doubled-space traces capped at N={PROJECTOR_MIXED_CAP}")
    lhs = _real(_doubled_trace(rho, [P_SYM - P_ANTI] * rho.n_spins), "Tr(rho (Ps-Pa))")
    rhs = purity(rho) if check else lhs
    if abs(lhs - rhs) > 1e-10:
        raise ArithmeticError(f"Tr(rho (Ps-Pa)^N) = {lhs} but Tr rho^2 = {rhs}")
    return lhs


# -- second moment -------------------------------------------------------------

def second_moment_projector(x: StateLike) -> SecondMomentReport:
    n = x.n_spins
    if isinstance(x, PureState):
        if n > PROJECTOR_PURE_CAP:
            raise SizeCapError(f"projector route holds 4^N amplitudes; cap is N={PROJECTOR_PURE_CAP}")
        v = DoubledState.from_states(x).amplitudes
        value = _real(np.vdot(v, _apply_pair_ops(v, [P_SYM] * n)), "P")
    else:
        if n > PROJECTOR_MIXED_CAP:
            raise SizeCapError(f"projector route for mixed states capped at N={PROJECTOR_MIXED_CAP}")
        value = _real(_doubled_trace(x, [P_SYM] * n), "P")
    return SecondMomentReport(value, Method.PROJECTOR, None, 4 ** n)


def second_moment_purity(state: PureState) -> SecondMomentReport:
    if not isinstance(state, PureState):
        raise TypeError("the purity route applies to pure states only")
    if state.n_spins == 1:
        value = 1.0
    else:
        value = 1.0 - entanglement.multipartite_concurrence(state) ** 2 / 4
    return SecondMomentReport(value, Method.PURITY, None, (1 << state.n_spins) - 2)


def quadrature_rule(nodes_theta: int, nodes_phi: int):
    """Single-spin nodes and weights for ``sin(t) dt dphi / 4pi``.

    Returns ``(thetas, phis, weights)`` flattened over the product grid;
    the weights sum to one.
    """
    u, wu = np.polynomial.legendre.leggauss(nodes_theta)
    phi = 2 * np.pi * np.arange(nodes_phi) / nodes_phi
    th, ph = np.meshgrid(np.arccos(u), phi, indexing="ij")
    w = np.outer(wu, np.full(nodes_phi, 1.0 / nodes_phi)) / 2
    return th.ravel(), ph.ravel(), w.ravel()


def _grid_overlaps(vecs: np.ndarray, bra: np.ndarray, n: int) -> np.ndarray:
    """Overlaps with every point of a product grid, shape (K^n, r).

    ``bra`` is the (K, 2) conjugated single-spin spinor table; ``vecs`` has
    shape (2^n, r).  Grid points are ordered with the first spin slowest.
    """
    r = vecs.shape[1]
    t = vecs.reshape(1, -1)
    for _ in range(n):
        t = np.tensordot(t.reshape(t.shape[0], 2, -1), bra, axes=([1], [1]))
        t = t.transpose(0, 2, 1).reshape(-1, t.shape[1])
    return t.reshape(-1, r)


def _quadrature_moments(x: StateLike, nodes_theta: int, nodes_phi: int, power: int) -> float:
    """``int dmu H^power`` on the product grid, chunked over the first spin."""
    n = x.n_spins
    w_state, vecs = _spectral(x)
    th, ph, w = quadrature_rule(nodes_theta, nodes_phi)
    bra = _spinor(th, ph).conj()                           # (K, 2)
    head = bra @ vecs.reshape(2, -1)                       # (K, 2^(N-1) * r)
    rest_w = reduce(np.kron, [w] * (n - 1), np.ones(1))
    total = 0.0
    for j in range(w.size):
        ov = _grid_overlaps(head[j].reshape(-1, vecs.shape[1]), bra, n - 1)
        h = (np.abs(ov) ** 2) @ w_state
        total += w[j] * float(rest_w @ h ** power)
    return total


def _check_quadrature_args(x, nodes_theta, nodes_phi):
    if nodes_theta < 3 or nodes_phi < 5:
        raise ValueError("quadrature needs nodes_theta >= 3 and nodes_phi >= 5 to be exact")
    if x.n_spins > QUADRATURE_CAP:
        raise SizeCapError(f"quadrature costs (nodes)^N; cap is N={QUADRATURE_CAP}")


def second_moment_quadrature(x: StateLike, nodes_theta: int = 3, nodes_phi: int = 5,
                             verify: bool = False) -> SecondMomentReport:
    """Second moment by product quadrature.

    With ``verify=True`` the integral is repeated with doubled node counts
    and the two results must agree to 1e-12.
    """
    _check_quadrature_args(x, nodes_theta, nodes_phi)
    n = x.n_spins
    value = 3.0 ** n * _quadrature_moments(x, nodes_theta, nodes_phi, 2)
    if verify:
        finer = 3.0 ** n * _quadrature_moments(x, 2 * nodes_theta, 2 * nodes_phi, 2)
        if abs(finer - value) > EXACTNESS_TOL:
            raise ArithmeticError(f"quadrature not exact: {value} vs {finer} with doubled nodes")
    return SecondMomentReport(value, Method.QUADRATURE, None, (nodes_theta * nodes_phi) ** n)


def _default_workers() -> int:
    return max(1, int(os.environ.get("SPINPHASE_THREADS", "1")))


def _stream_rng(seed: int, stream: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(stream,))))


def haar_spinors(rng: np.random.Generator, count: int, n_spins: int) -> np.ndarray:
    """Coherent spinors for ``count`` Haar-distributed points, shape (count, N, 2).

    ``cos(theta)`` is uniform on [-1, 1] and ``phi`` uniform on [0, 2pi).
    """
    u = rng.uniform(-1.0, 1.0, size=(count, n_spins))
    phi = rng.uniform(0.0, 2 * np.pi, size=(count, n_spins))
    out = np.empty((count, n_spins, 2), dtype=complex)
    out[..., 0] = np.sqrt(0.5 * (1 + u))
    amp = np.sqrt(0.5 * (1 - u))
    out[..., 1].real = amp * np.cos(phi)
    out[..., 1].imag = amp * np.sin(phi)
    return out


def _mc_stream(weights, vecs, n, seed, stream, count, power):
    h = _husimi_batch(weights, vecs, haar_spinors(_stream_rng(seed, stream), count, n))
    f = h ** power
    return f.sum(), (f * f).sum()


def _monte_carlo(x: StateLike, samples: int, seed: int, power: int, workers=None):
    if samples < 100:
        raise ValueError("Monte Carlo needs at least 100 samples")
    weights, vecs = _spectral(x)
    counts = [MC_STREAM_SIZE] * (samples // MC_STREAM_SIZE)
    if samples % MC_STREAM_SIZE:
        counts.append(samples % MC_STREAM_SIZE)
    jobs = [(weights, vecs, x.n_spins, seed, s, c, power) for s, c in enumerate(counts)]
    workers = _default_workers() if workers is None else workers
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(lambda a: _mc_stream(*a), jobs))
    else:
        parts = [_mc_stream(*a) for a in jobs]
    s1 = math.fsum(p[0] for p in parts)
    s2 = math.fsum(p[1] for p in parts)
    mean = s1 / samples
    var = max(s2 / samples - mean * mean, 0.0) * samples / (samples - 1)
    return mean, math.sqrt(var / samples)


def second_moment_monte_carlo(x: StateLike, samples: int = 1_000_000, seed: int = 0,
                              workers: Optional[int] = None) -> SecondMomentReport:
    """Unbiased estimate ``3^N E[H^2]`` over Haar-random phase points.

    Samples are split into fixed-size streams (``MC_STREAM_SIZE``), stream
    ``s`` seeded by ``SeedSequence(seed, spawn_key=(s,))``, so the result is
    bit-identical for any ``workers``.
    """
    mean, err = _monte_carlo(x, samples, seed, 2, workers)
    scale = 3.0 ** x.n_spins
    return SecondMomentReport(scale * mean, Method.MONTE_CARLO, scale * err, samples)


def husimi_mean(x: StateLike, method: str = "quadrature", *, nodes_theta: int = 3,
                nodes_phi: int = 5, samples: int = 100_000, seed: int = 0) -> float:
    """``int dmu H(mu)``; equals ``2^-N`` for every normalized state."""
    if Method(method) is Method.QUADRATURE:
        _check_quadrature_args(x, nodes_theta, nodes_phi)
        return _quadrature_moments(x, nodes_theta, nodes_phi, 1)
    if Method(method) is Method.MONTE_CARLO:
        return _monte_carlo(x, samples, seed, 1)[0]
    raise ValueError(f"husimi_mean supports quadrature or montecarlo, not {method!r}")


def second_moment(x: StateLike, method="projector", **options) -> SecondMomentReport:
    """Dispatch to one of the second-moment routes by name."""
    method = Method(method)
    if method is Method.PROJECTOR:
        return second_moment_projector(x)
    if method is Method.PURITY:
        return second_moment_purity(x)
    if method is Method.QUADRATURE:
        return second_moment_quadrature(x, **options)
    return second_moment_monte_carlo(x, **options)
