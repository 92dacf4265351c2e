"""Ising chain in a tilted field, solved by dense exact diagonalization.

    H = -J sum_i [ sz_i sz_{i+1} + g (sz_i cos(Theta) + sx_i sin(Theta)) ]
"""
from __future__ import annotations

import enum
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import entanglement, phase_space
from .hilbert import PureState

log = logging.getLogger(__name__)

DENSE_CAP = 12
DEGENERACY_TOL = 1e-10
RESIDUAL_TOL = 1e-9
SPOT_CHECK_TOL = 1e-10

# Default field angles, in units of pi; dense near the transverse limit.
DEFAULT_THETAS_OVER_PI = (0.0, 0.42, 0.46, 0.48, 0.49, 0.495, 0.4975, 0.4995, 0.5)


def default_g_grid() -> np.ndarray:
    """g = 0.05, 0.10, ..., 3.00."""
    return np.round(0.05 * np.arange(1, 61), 12)


class Boundary(enum.Enum):
    PERIODIC = "periodic"
    OPEN = "open"


@dataclass(frozen=True)
class IsingParams:
    n_spins: int = 8
    j_coupling: float = 1.0
    g: float = 0.0
    theta: float = 0.0
    boundary: Boundary = Boundary.PERIODIC

    def __post_init__(self):
        if self.n_spins < 2:
            raise ValueError("the coupling term needs at least two spins")
        if self.g < 0:
            raise ValueError("g must be non-negative")
        if not 0.0 <= self.theta <= np.pi / 2 + 1e-12:
            raise ValueError("theta must lie in [0, pi/2]")
        object.__setattr__(self, "boundary", Boundary(self.boundary))


def bonds(n_spins: int, boundary: Boundary) -> list[tuple[int, int]]:
    """Nearest-neighbour pairs; the periodic chain includes (N-1, 0).

    For N=2 the periodic chain therefore counts the single pair twice.
    """
    if Boundary(boundary) is Boundary.PERIODIC:
        return [(i, (i + 1) % n_spins) for i in range(n_spins)]
    return [(i, i + 1) for i in range(n_spins - 1)]


def build_hamiltonian(params: IsingParams) -> np.ndarray:
    """Dense real symmetric matrix in the computational basis."""
    n = params.n_spins
    if n > DENSE_CAP:
        raise ValueError(f"dense Hamiltonian capped at N={DENSE_CAP} spins")
    dim = 1 << n
    idx = np.arange(dim)
    # sz eigenvalue of site i: +1 for |0>, -1 for |1>; site 0 is the MSB
    sz = 1 - 2 * ((idx[:, None] >> (n - 1 - np.arange(n))) & 1)
    j, g = params.j_coupling, params.g
    diag = sum(sz[:, a] * sz[:, b] for a, b in bonds(n, params.boundary)).astype(float)
    diag = diag + g * np.cos(params.theta) * sz.sum(axis=1)
    h = np.diag(-j * diag)
    hx = -j * g * np.sin(params.theta)
    if hx != 0.0:
        for site in range(n):
            h[idx, idx ^ (1 << (n - 1 - site))] += hx
    if not np.array_equal(h, h.T):
        raise ArithmeticError("Hamiltonian is not symmetric")
    return h


@dataclass(frozen=True)
class GroundStateResult:
    energy: float
    state: PureState
    gap: float
    degenerate: bool


def _phase_fixed(v: np.ndarray) -> tuple[int, np.ndarray]:
    mag = np.abs(v)
    lead = int(np.flatnonzero(mag >= mag.max() - 1e-12)[0])
    return lead, v * (abs(v[lead]) / v[lead])


def ground_state(h: np.ndarray, degeneracy_tol: float = DEGENERACY_TOL) -> GroundStateResult:
    """Lowest eigenpair of a Hermitian matrix.

    Eigenvalues within ``degeneracy_tol * ||H||`` of the minimum form the
    ground manifold.  From it, the eigenvector whose largest-magnitude
    amplitude sits at the smallest basis index is returned, with that
    amplitude made real and positive.
    """
    h = np.asarray(h)
    if h.shape[0] != h.shape[1] or not np.allclose(h, h.conj().T, atol=1e-12):
        raise ValueError("ground_state needs a Hermitian matrix")
    try:
        w, v = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        raise RuntimeError(f"eigensolver failed: {exc}") from exc
    norm = float(np.max(np.abs(w)))
    threshold = degeneracy_tol * norm
    gap = float(w[1] - w[0]) if w.size > 1 else float("inf")
    manifold = np.flatnonzero(w - w[0] <= threshold)

    candidates = [_phase_fixed(v[:, k]) for k in manifold]
    _, vec = min(candidates, key=lambda c: c[0])
    residual = np.linalg.norm(h @ vec - w[0] * vec)
    if residual > RESIDUAL_TOL * max(norm, 1.0):
        raise ArithmeticError(f"eigenvector residual {residual:.3e} too large")
    return GroundStateResult(float(w[0]), PureState.from_amplitudes(vec),
                             max(gap, 0.0), gap <= threshold)


def spin_flip_parity(state: PureState) -> float:
    """Expectation of the global spin flip (product of all sigma_x)."""
    a = state.amplitudes
    return float(np.vdot(a, a[::-1]).real)


@dataclass(frozen=True)
class SweepConfig:
    params: IsingParams = field(default_factory=IsingParams)
    g_grid: tuple = tuple(default_g_grid())
    thetas: tuple = tuple(np.pi * t for t in DEFAULT_THETAS_OVER_PI)

    def __post_init__(self):
        g = np.asarray(self.g_grid, dtype=float)
        if g.size == 0 or len(self.thetas) == 0:
            raise ValueError("sweep grids must be non-empty")
        if np.any(np.diff(g) <= 0):
            raise ValueError("g grid must be strictly increasing")


@dataclass(frozen=True)
class SweepRecord:
    theta: float
    g: float
    energy: float
    gap: float
    P: float
    cN: float
    degenerate: bool = False


class SweepError(RuntimeError):
    pass


def evaluate_point(params: IsingParams, spot_check: bool = False) -> SweepRecord:
    try:
        gs = ground_state(build_hamiltonian(params))
    except Exception as exc:
        raise SweepError(f"failed at theta={params.theta!r}, g={params.g!r}: {exc}") from exc
    p = phase_space.second_moment_purity(gs.state).value
    if spot_check:
        p_proj = phase_space.second_moment_projector(gs.state).value
        if abs(p - p_proj) > SPOT_CHECK_TOL:
            raise SweepError(f"purity and projector routes disagree at theta={params.theta!r}, "
                             f"g={params.g!r}: {p} vs {p_proj}")
    c_n = entanglement.multipartite_concurrence(gs.state)
    return SweepRecord(params.theta, params.g, gs.energy, gs.gap, p, c_n, gs.degenerate)


def sweep(config: SweepConfig, spot_check_stride: int = 10, workers=None) -> list[SweepRecord]:
    """Ground-state P and c_N on the (theta, g) grid, theta outer, g inner.

    Every ``spot_check_stride``-th point is re-evaluated with the projector
    route (0 disables).  Output order does not depend on ``workers``.
    """
    points = [replace(config.params, theta=float(t), g=float(g))
              for t in config.thetas for g in config.g_grid]
    checks = [spot_check_stride > 0 and k % spot_check_stride == 0 for k in range(len(points))]
    if workers is None:
        workers = max(1, int(os.environ.get("SPINPHASE_THREADS", "1")))
    log.info("sweeping %d points with %d worker(s)", len(points), workers)
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(evaluate_point, points, checks))
    return [evaluate_point(p, c) for p, c in zip(points, checks)]
