"""Seeded Monte Carlo experiments: pattern sampling, photon thinning, trial statistics."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .distributions import DiscreteDistribution, Pattern, as_pattern
from .extrapolation import ExtrapolationPlan, extrapolate
from .probability import parallel_map, tmsv_lossy_prob

log = logging.getLogger(__name__)

MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def child_seed(master: int, trial: int) -> int:
    """Seed of trial ``trial``: ``splitmix64(splitmix64(master) ^ trial)``."""
    return splitmix64(splitmix64(master & MASK64) ^ (trial & MASK64))


def trial_rng(master: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(child_seed(master, trial))


@dataclass
class EmpiricalDistribution:
    counts: dict[Pattern, int]
    modes: int

    @property
    def n(self) -> int:
        return sum(self.counts.values())

    def p_hat(self, pattern: Sequence[int]) -> float:
        return self.counts.get(tuple(pattern), 0) / self.n

    def to_distribution(self) -> DiscreteDistribution:
        n = self.n
        return DiscreteDistribution({p: c / n for p, c in self.counts.items()}, self.modes, cutoff=max(map(sum, self.counts), default=0))

    @classmethod
    def from_array(cls, samples: np.ndarray) -> EmpiricalDistribution:
        rows, counts = np.unique(np.asarray(samples, dtype=np.int64), axis=0, return_counts=True)
        return cls({tuple(int(v) for v in r): int(c) for r, c in zip(rows, counts)}, samples.shape[1])


@dataclass
class EstimatorReport:
    trials: np.ndarray
    config: dict = field(default_factory=dict)

    def __post_init__(self):
        self.trials = np.asarray(self.trials, dtype=float)

    @property
    def mean(self) -> float:
        return float(np.mean(self.trials))

    @property
    def std(self) -> float:
        return float(np.std(self.trials, ddof=1)) if len(self.trials) > 1 else 0.0

    @property
    def stderr(self) -> float:
        return self.std / math.sqrt(len(self.trials))

    def to_dict(self, include_trials: bool = True) -> dict:
        out = {"mean": self.mean, "std": self.std, "config": self.config}
        if include_trials:
            out["trials"] = self.trials.tolist()
        return out


def _draw(dist: DiscreteDistribution, n: int, rng: np.random.Generator) -> np.ndarray:
    if not dist.is_physical():
        raise ValueError("cannot sample from a non-physical distribution")
    pats = sorted(dist.weights)
    p = np.array([dist.weights[k] for k in pats])
    total = p.sum()
    if total <= 0:
        raise ValueError("distribution has no mass")
    if abs(total - 1) > 1e-12:
        log.debug("renormalising truncated distribution by %.3e", 1 / total)
    idx = rng.choice(len(pats), size=n, p=p / total)
    return np.array(pats, dtype=np.int64)[idx]


def sample_patterns(dist: DiscreteDistribution, n: int, seed: int) -> EmpiricalDistribution:
    """``n`` i.i.d. draws from ``dist`` after renormalising away truncated mass."""
    return EmpiricalDistribution.from_array(_draw(dist, n, np.random.default_rng(seed)))


def thin_loss(sample: Sequence[int], epsilon: float, rng: np.random.Generator) -> Pattern:
    """Keep each photon independently with probability ``1 - epsilon``."""
    if not 0 <= epsilon < 1:
        raise ValueError(f"loss must lie in [0, 1), got {epsilon!r}")
    return as_pattern(rng.binomial(np.asarray(sample, dtype=np.int64), 1 - epsilon))


def thin_array(samples: np.ndarray, epsilon: float, rng: np.random.Generator) -> np.ndarray:
    """Vectorised :func:`thin_loss` over rows of a sample array."""
    if not 0 <= epsilon < 1:
        raise ValueError(f"loss must lie in [0, 1), got {epsilon!r}")
    return rng.binomial(samples, 1 - epsilon)


def run_trials(
    trial: Callable[[np.random.Generator], float],
    trials: int,
    seed: int,
    config: dict,
    threads: int | None = None,
    first_trial: int = 0,
) -> EstimatorReport:
    """Run independent trials, trial ``t`` seeded by ``child_seed(seed, t)``.

    Trials are numbered from ``first_trial``, so any single trial can be
    re-run alone with ``trials=1, first_trial=t``.
    """
    ids = range(first_trial, first_trial + trials)
    values = parallel_map(lambda t: trial(trial_rng(seed, t)), ids, threads)
    cfg = dict(config, seed=seed, trials=trials, first_trial=first_trial, trial_seeds=[child_seed(seed, t) for t in ids])
    return EstimatorReport(np.array(values), cfg)


def tmsv_lossy_distribution(r: float, epsilon: float, cutoff: int) -> DiscreteDistribution:
    from .distributions import patterns_up_to

    return DiscreteDistribution({p: tmsv_lossy_prob(r, epsilon, *p) for p in patterns_up_to(2, cutoff)}, 2, cutoff=cutoff, truncated=True)


def run_probability_fluctuation(
    r: float,
    epsilon: float,
    c: Sequence[float],
    trials: int,
    n: int | None,
    seed: int,
    pattern=(1, 1),
    threads: int | None = None,
    first_trial: int = 0,
) -> EstimatorReport:
    """Extrapolate from binomially estimated probabilities, one estimate per loss value.

    ``n=None`` uses the exact probabilities (no sampling noise).
    """
    plan = ExtrapolationPlan(epsilon, tuple(c))
    exact = np.array([tmsv_lossy_prob(r, e, *pattern) for e in plan.losses])

    def trial(rng):
        if n is None:
            return extrapolate(exact, plan)
        return extrapolate(rng.binomial(n, exact) / n, plan)

    config = {"experiment": "probability_fluctuation", "r": r, "epsilon": epsilon, "c": list(plan.c), "N": n, "pattern": list(pattern)}
    return run_trials(trial, trials, seed, config, threads, first_trial)


def run_loss_fluctuation(
    r: float,
    epsilon: float,
    c: Sequence[float],
    loss_std: float,
    trials: int,
    seed: int,
    pattern=(1, 1),
    model: str = "attenuator",
    threads: int | None = None,
    first_trial: int = 0,
) -> EstimatorReport:
    """Extrapolate exact probabilities taken at jittered losses with the nominal plan.

    ``model="attenuator"``: the loss ``eps c_j`` is dialled by an attenuator
    of transmission ``eta_j = (1 - eps c_j) / (1 - eps)``, and each
    ``eta_j`` with ``j >= 1`` gets independent ``Normal(0, loss_std)`` noise;
    the base point has no attenuator. ``model="loss"``: every ``eps c_j``
    gets the noise directly. Draws outside the physical range are redrawn.
    """
    if model not in ("attenuator", "loss"):
        raise ValueError(f"unknown loss-noise model {model!r}")
    plan = ExtrapolationPlan(epsilon, tuple(c))

    def jitter(e: float, rng: np.random.Generator) -> float:
        if not loss_std:
            return e
        if model == "loss":
            while True:
                out = e + loss_std * rng.standard_normal()
                if 0 <= out < 1:
                    return out
                log.info("perturbed loss %.4f outside [0, 1), redrawing", out)
        if e == epsilon:
            return e
        eta = (1 - e) / (1 - epsilon)
        while True:
            out = eta + loss_std * rng.standard_normal()
            if 0 < out <= 1:
                return 1 - (1 - epsilon) * out
            log.info("perturbed transmission %.4f outside (0, 1], redrawing", out)

    def trial(rng):
        values = [tmsv_lossy_prob(r, jitter(float(e), rng), *pattern) for e in plan.losses]
        return extrapolate(values, plan)

    config = {
        "experiment": "loss_fluctuation",
        "r": r,
        "epsilon": epsilon,
        "c": list(plan.c),
        "loss_std": loss_std,
        "model": model,
        "pattern": list(pattern),
    }
    return run_trials(trial, trials, seed, config, threads, first_trial)
