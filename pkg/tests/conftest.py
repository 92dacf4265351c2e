import itertools

import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20061)


def brute_partial_trace(psi: np.ndarray, n: int, keep: list[int]) -> np.ndarray:
    """Reduced density matrix by explicit summation over basis labels."""
    dk = 1 << len(keep)
    rho = np.zeros((dk, dk), dtype=complex)
    for x in range(1 << n):
        for y in range(1 << n):
            bx = [(x >> (n - 1 - i)) & 1 for i in range(n)]
            by = [(y >> (n - 1 - i)) & 1 for i in range(n)]
            if any(bx[i] != by[i] for i in range(n) if i not in keep):
                continue
            a = int("".join(str(bx[i]) for i in keep), 2)
            b = int("".join(str(by[i]) for i in keep), 2)
            rho[a, b] += psi[x] * np.conj(psi[y])
    return rho


def brute_pattern_expectation(psi: np.ndarray, n: int, local_ops) -> complex:
    """<psi psi| (x)_i O_i |psi psi> with O_i acting on (spin i, copy of spin i).

    ``local_ops[i][(s, s'), (t, t')]`` uses local index 2*s + s'.
    """
    total = 0j
    labels = list(itertools.product((0, 1), repeat=n))
    idx = {lab: int("".join(map(str, lab)), 2) for lab in labels}
    for s, sc in itertools.product(labels, repeat=2):
        bra = np.conj(psi[idx[s]] * psi[idx[sc]])
        if bra == 0:
            continue
        for t, tc in itertools.product(labels, repeat=2):
            w = 1.0
            for i in range(n):
                w *= local_ops[i][2 * s[i] + sc[i], 2 * t[i] + tc[i]]
                if w == 0:
                    break
            if w:
                total += bra * w * psi[idx[t]] * psi[idx[tc]]
    return total
