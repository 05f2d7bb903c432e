"""Exact click-pattern and orbit probabilities of Gaussian states."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

import numpy as np

from .distributions import DiscreteDistribution, Orbit, Pattern, as_pattern, patterns_up_to
from .gaussian import GaussianState, a_matrix
from .hafnian import hafnian, loop_hafnian

T = TypeVar("T")
R = TypeVar("R")


def parallel_map(func: Callable[[T], R], items: Iterable[T], threads: int | None = None) -> list[R]:
    """Map preserving input order; ``threads`` of ``None`` or 1 runs inline."""
    items = list(items)
    if not threads or threads <= 1 or len(items) < 2:
        return [func(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(func, items))


class _Prepared:
    """Pattern-independent pieces of the probability formula for one state."""

    def __init__(self, state: GaussianState):
        sq = state.sigma_q
        sign, logdet = np.linalg.slogdet(sq)
        self.modes = state.modes
        self.a = a_matrix(state)
        self.log_norm = -0.5 * float(np.real(logdet))
        self.displaced = state.is_displaced
        if self.displaced:
            f = np.linalg.solve(sq, state.disp)
            self.loops = f.conj()
            self.log_norm += -0.5 * float(np.real(state.disp.conj() @ f))

    def __call__(self, pattern: Pattern) -> float:
        if len(pattern) != self.modes:
            raise ValueError(f"pattern has {len(pattern)} modes, state has {self.modes}")
        idx = np.repeat(np.arange(self.modes), pattern)
        idx = np.concatenate([idx, idx + self.modes])
        sub = self.a[np.ix_(idx, idx)]
        if self.displaced:
            np.fill_diagonal(sub, self.loops[idx])
            h = loop_hafnian(sub)
        else:
            h = hafnian(sub)
        log_fact = sum(math.lgamma(c + 1) for c in pattern)
        return float(h.real) * math.exp(self.log_norm - log_fact)


def pattern_probability(state: GaussianState, pattern: Sequence[int]) -> float:
    return _Prepared(state)(as_pattern(pattern))


def pattern_probabilities(state: GaussianState, patterns: Iterable[Sequence[int]], threads: int | None = None) -> dict[Pattern, float]:
    prep = _Prepared(state)
    pats = [as_pattern(p) for p in patterns]
    return dict(zip(pats, parallel_map(prep, pats, threads)))


def orbit_probability(state: GaussianState, orbit: Orbit, threads: int | None = None) -> float:
    if orbit.modes != state.modes:
        raise ValueError(f"orbit is on {orbit.modes} modes, state has {state.modes}")
    probs = pattern_probabilities(state, orbit.members(), threads)
    return math.fsum(probs[p] for p in orbit.members())


def distribution(state: GaussianState, cutoff: int, threads: int | None = None) -> DiscreteDistribution:
    """All pattern probabilities with total photon number ``<= cutoff``."""
    if cutoff < 0:
        raise ValueError("cutoff must be nonnegative")
    probs = pattern_probabilities(state, patterns_up_to(state.modes, cutoff), threads)
    return DiscreteDistribution(probs, state.modes, cutoff=cutoff, truncated=True)


def tmsv_exact_prob(r: float, n: int) -> float:
    """Lossless two-mode squeezed vacuum probability of the pattern ``[n, n]``."""
    chi = math.tanh(r)
    return (1 - chi**2) * chi ** (2 * n)


def tmsv_lossy_prob(r: float, epsilon: float, i: int, j: int, tol: float = 1e-14) -> float:
    """Two-mode squeezed vacuum with uniform loss: probability of ``[i, j]``.

    Sums ``(1-chi^2) sum_k C(k,i) C(k,j) chi^2k eps^(2k-i-j) (1-eps)^(i+j)``
    over ``k >= max(i, j)`` until the terms drop below ``tol`` relative.
    """
    if not 0 <= epsilon < 1:
        raise ValueError(f"loss must lie in [0, 1), got {epsilon!r}")
    if i < 0 or j < 0:
        return 0.0
    chi2 = math.tanh(r) ** 2
    lo, hi = min(i, j), max(i, j)
    if epsilon == 0:
        return (1 - chi2) * chi2**lo if lo == hi else 0.0
    # log of the first term, then ratio recursion
    k = hi
    log_term = (
        math.log(math.comb(k, lo)) + k * math.log(chi2) + (2 * k - lo - hi) * math.log(epsilon) + (lo + hi) * math.log1p(-epsilon)
    ) if chi2 > 0 else None
    if log_term is None:
        return (1 - chi2) if i == j == 0 else 0.0
    term = math.exp(log_term)
    total = 0.0
    ratio_base = chi2 * epsilon**2
    while True:
        total += term
        k += 1
        term *= ratio_base * k * k / ((k - lo) * (k - hi))
        if term < tol * total and k > hi + 5:
            break
    return (1 - chi2) * total
