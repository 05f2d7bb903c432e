"""Binomial-thinning loss maps on pattern measures and their formal inverses.

``T_eps`` sends a measure over photon-number patterns through uniform loss
``eps``. The maps compose as ``T_e T_u = T_(e (+) u)`` with
``e (+) u = e + u - e u``, so ``T_(-)e`` with ``(-)e = e / (e - 1)`` undoes
the loss formally. For ``eps`` outside ``[0, 1]`` the weights are no longer
probabilities and the output can be negative.
"""

from __future__ import annotations

import math
from typing import Iterable, Sequence

import numpy as np

from .distributions import DiscreteDistribution, as_pattern, dominated_by


def oplus(eps, mu):
    """Loss of two lossy stages in sequence."""
    return eps + mu - eps * mu


def ominus(eps):
    """The loss parameter that cancels ``eps``; undefined at ``eps = 1``."""
    if eps == 1:
        raise ZeroDivisionError("loss 1 cannot be cancelled")
    return eps / (eps - 1)


def binom(n: int, k: int) -> float:
    # math.comb is exact; float() raises OverflowError rather than returning inf
    return float(math.comb(n, k))


def _thinning_weight(n: int, k: int, eps: float) -> float:
    if k > n or k < 0:
        return 0.0
    return binom(n, k) * eps ** (n - k) * (1 - eps) ** k


def conditional_loss_prob(n_out: Sequence[int], n_in: Sequence[int], epsilon: float) -> float:
    """Probability that pattern ``n_in`` becomes ``n_out`` after loss ``epsilon``.

    Evaluated for any real ``epsilon`` as a formal weight.
    """
    if len(n_out) != len(n_in):
        raise ValueError("patterns have different lengths")
    out = 1.0
    for k, n in zip(n_out, n_in):
        if k > n:
            return 0.0
        out *= _thinning_weight(n, k, epsilon)
    return out


def apply_T(dist: DiscreteDistribution, epsilon: float, cutoff: int | None = None, targets: Iterable[Sequence[int]] | None = None) -> DiscreteDistribution:
    """Push ``dist`` through uniform loss ``epsilon`` (any real value).

    Only input patterns with ``|n| <= cutoff`` contribute; if that drops part
    of the support the result is marked ``truncated``. With ``targets`` only
    those output patterns are computed.
    """
    src = dist if cutoff is None else dist.restrict(cutoff)
    truncated = src.truncated
    if targets is not None:
        wanted = [as_pattern(t) for t in targets]
        out = {t: 0.0 for t in wanted}
        wanted_set = set(wanted)
    else:
        out = {}
        wanted_set = None
    # fixed input order keeps sums reproducible
    for n in sorted(src.weights, key=lambda p: (sum(p), p)):
        w = src.weights[n]
        if w == 0:
            continue
        per_mode = [[_thinning_weight(nj, k, epsilon) for k in range(nj + 1)] for nj in n]
        if wanted_set is not None:
            for t in wanted:
                if all(tk <= nk for tk, nk in zip(t, n)):
                    out[t] += w * math.prod(per_mode[j][tk] for j, tk in enumerate(t))
            continue
        for t in dominated_by(n):
            out[t] = out.get(t, 0.0) + w * math.prod(per_mode[j][tk] for j, tk in enumerate(t))
    cut = src.cutoff if src.cutoff is not None else src.max_total()
    return DiscreteDistribution(out, dist.modes, cutoff=cut, truncated=truncated)


def cancel_loss(lossy: DiscreteDistribution, epsilon: float, cutoff: int, targets: Iterable[Sequence[int]] | None = None) -> DiscreteDistribution:
    """Estimate the lossless distribution by applying ``T_(-)eps`` below ``cutoff``.

    The weight of input ``n`` on target ``m`` is
    ``prod_j C(n_j, m_j) (-1/eps)^m_j (eps/(eps-1))^n_j``.
    """
    if not 0 <= epsilon < 1:
        raise ValueError(f"loss must lie in [0, 1), got {epsilon!r}")
    if epsilon == 0:
        out = lossy.restrict(cutoff)
        if targets is not None:
            out = DiscreteDistribution({as_pattern(t): out[t] for t in targets}, lossy.modes, cutoff=cutoff, truncated=out.truncated)
        return out
    result = apply_T(lossy, ominus(epsilon), cutoff=cutoff, targets=targets)
    result.meta.update({"cutoff": cutoff, "epsilon": epsilon})
    return result


def cancellation_report(lossy: DiscreteDistribution, epsilon: float, cutoff: int, targets=None) -> dict:
    """Cancelled distribution plus the convergence diagnostics."""
    est = cancel_loss(lossy, epsilon, cutoff, targets)
    try:
        t = decay_radius_estimate(lossy)
        lossless_t = lossless_decay_radius(t, epsilon)
        threshold = convergence_threshold(lossless_t)
    except ValueError:
        threshold = float("nan")
    return {
        "cutoff": cutoff,
        "epsilon": epsilon,
        "threshold_estimate": threshold,
        "physical": est.is_physical(),
        "distribution": est.to_records(),
    }


def maclaurin_T(dist: DiscreteDistribution, target: Sequence[int], order: int) -> np.ndarray:
    """Coefficients of ``mu^0 .. mu^order`` in ``T_mu(dist)(target)``.

    The ``mu^q`` coefficient uses only patterns with ``|n| <= |target| + q``.
    """
    if order < 0:
        raise ValueError("order must be nonnegative")
    target = as_pattern(target)
    base = sum(target)
    coeffs = np.zeros(order + 1)
    # group the multiplicity prod C(n_j, m_j) P(n) by extra photon count k
    by_extra = np.zeros(order + 1)
    for n, w in sorted(dist.weights.items()):
        k = sum(n) - base
        if 0 <= k <= order and all(a >= b for a, b in zip(n, target)):
            by_extra[k] += w * math.prod(binom(a, b) for a, b in zip(n, target))
    # (1 - mu)^|m| mu^k expanded
    for q in range(order + 1):
        coeffs[q] = sum(by_extra[k] * binom(base, q - k) * (-1) ** (q - k) for k in range(max(0, q - base), q + 1))
    return coeffs


def series_estimate(dist: DiscreteDistribution, epsilon: float, target: Sequence[int], order: int) -> float:
    """Truncated power series of ``T_mu(dist)(target)`` evaluated at ``mu = (-)eps``."""
    mu = ominus(epsilon)
    coeffs = maclaurin_T(dist, target, order)
    return float(np.polyval(coeffs[::-1], mu))


def form_aware_estimate_tmsv(dist: DiscreteDistribution, epsilon: float, chi: float, order: int = 4) -> float:
    """Estimate of the lossless ``[1, 1]`` probability of a two-mode squeezed vacuum.

    Uses that ``(1 - nu^2 chi^2)^3 T_nu(P0)([1, 1])`` is a polynomial of
    degree at most 4 in ``nu``: expand it in ``nu - eps`` from the lossy data,
    keep terms up to ``order`` and evaluate at ``nu = 0``.
    """
    if epsilon == 1:
        raise ZeroDivisionError("loss 1 cannot be cancelled")
    if dist.modes != 2:
        raise ValueError("form-aware estimate needs two-mode data")
    a = maclaurin_T(dist, (1, 1), order)
    # T_mu with mu = delta / (1 - eps), as a series in delta = nu - eps
    t_delta = a / (1 - epsilon) ** np.arange(order + 1)
    # (1 - (eps + delta)^2 chi^2)^3 as a polynomial in delta (ascending)
    inner = np.array([1 - epsilon**2 * chi**2, -2 * epsilon * chi**2, -(chi**2)])
    pole = np.array([1.0])
    for _ in range(3):
        pole = np.convolve(pole, inner)
    prod = np.convolve(pole, t_delta)[: order + 1]
    return float(np.polyval(prod[::-1], -epsilon))


def estimator_variance(lossy: DiscreteDistribution, epsilon: float, target: Sequence[int], samples: int, cutoff: int) -> float:
    """Variance of the cut-off cancellation estimate built from ``samples`` draws.

    The mean subtracted is that of the cut-off estimator itself.
    """
    if samples < 1:
        raise ValueError("need at least one sample")
    target = as_pattern(target)
    mu = ominus(epsilon) if epsilon else 0.0
    first = second = 0.0
    for n, p in sorted(lossy.weights.items()):
        if sum(n) > cutoff:
            continue
        w = conditional_loss_prob(target, n, mu)
        first += w * p
        second += w * w * p
    return (second - first**2) / samples


def decay_radius_estimate(dist: DiscreteDistribution, shells: int = 5) -> float:
    """Heuristic decay radius from a log-linear fit of the largest weight per shell.

    Fits ``log max_{|n|=k} |P(n)|`` against ``k`` over the ``shells`` highest
    nonzero shells and returns ``exp(slope)``.
    """
    best: dict[int, float] = {}
    for n, w in dist.weights.items():
        if w != 0:
            k = sum(n)
            best[k] = max(best.get(k, 0.0), abs(w))
    ks = sorted(best)
    if len(ks) < 2:
        raise ValueError("need at least two nonzero photon-number shells")
    ks = ks[-shells:]
    slope = np.polyfit(ks, [math.log(best[k]) for k in ks], 1)[0]
    return float(math.exp(slope))


def lossless_decay_radius(lossy_radius: float, epsilon: float) -> float:
    """Invert ``t' = (1-eps) t / (1 - eps t)`` for the lossless radius ``t``."""
    return lossy_radius / (1 - epsilon + epsilon * lossy_radius)


def convergence_threshold(t: float) -> float:
    """Largest loss for which cancellation converges given lossless decay radius ``t``."""
    if t <= 0:
        return math.inf
    return 1 / (2 * t)
