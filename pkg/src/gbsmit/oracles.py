"""Independent reference computations used to cross-check the Gaussian pipeline."""

from __future__ import annotations

import math

import numpy as np

from .distributions import DiscreteDistribution


def fock_oracle_tmsv(r: float, epsilon: float, cutoff: int, fock_cutoff: int | None = None) -> DiscreteDistribution:
    """Lossy two-mode squeezed vacuum from its Fock expansion.

    The state ``sum_n c_n |n, n>`` with ``c_n = tanh(r)^n / cosh r`` is
    mixed by independent loss on each mode, so ``P(i, j) = sum_n |c_n|^2
    B(i; n) B(j; n)`` with ``B`` the binomial survival weight. The sum is
    truncated at ``fock_cutoff`` (default: where the tail falls below 1e-17).
    """
    if cutoff < 0:
        raise ValueError("cutoff must be nonnegative")
    if not 0 <= epsilon < 1:
        raise ValueError("epsilon must lie in [0, 1)")
    chi2 = math.tanh(r) ** 2
    if fock_cutoff is None:
        fock_cutoff = cutoff
        while chi2 > 0 and chi2**fock_cutoff > 1e-17 * (1 - chi2):
            fock_cutoff += 1
    eta = 1.0 - epsilon
    weights = {}
    for i in range(cutoff + 1):
        for j in range(cutoff + 1 - i):
            total = 0.0
            for n in range(max(i, j), fock_cutoff + 1):
                pn = (1 - chi2) * chi2**n
                bi = math.comb(n, i) * eta**i * epsilon ** (n - i)
                bj = math.comb(n, j) * eta**j * epsilon ** (n - j)
                total += pn * bi * bj
            weights[(i, j)] = total
    return DiscreteDistribution(weights, 2, cutoff=cutoff, truncated=True)


def matching_hafnian(mat) -> complex:
    """Hafnian by explicit recursion over perfect matchings."""
    mat = np.asarray(mat)
    n = len(mat)
    if n == 0:
        return 1.0
    if n % 2:
        return 0.0
    total = 0.0
    rest = list(range(1, n))
    for k, j in enumerate(rest):
        others = rest[:k] + rest[k + 1 :]
        total += mat[0, j] * matching_hafnian(mat[np.ix_(others, others)])
    return total


def matching_loop_hafnian(mat) -> complex:
    """Loop hafnian by recursion: vertex 0 is either a loop or paired."""
    mat = np.asarray(mat)
    n = len(mat)
    if n == 0:
        return 1.0
    rest = list(range(1, n))
    total = mat[0, 0] * matching_loop_hafnian(mat[np.ix_(rest, rest)])
    for k, j in enumerate(rest):
        others = rest[:k] + rest[k + 1 :]
        total += mat[0, j] * matching_loop_hafnian(mat[np.ix_(others, others)])
    return total
