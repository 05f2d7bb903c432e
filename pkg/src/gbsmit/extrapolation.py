"""Zero-loss estimates from probabilities measured at several loss values."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .gaussian import GaussianState, apply_uniform_loss, distinct_nonzero

POLE_MARGIN = 1e-6


class PoleCrossingError(ValueError):
    """A scaled loss value reached a pole ``eps * tanh r >= 1`` of the probability."""


def gamma_coefficients(c: Sequence[float]) -> np.ndarray:
    """Weights cancelling orders ``1..m`` of a series sampled at ``eps * c_j``.

    ``gamma_j = (-1)^m prod_{k != j} c_k / (c_j - c_k)``.
    """
    c = [float(x) for x in c]
    if not c:
        raise ValueError("need at least one multiplier")
    if len(set(c)) != len(c):
        raise ValueError(f"multipliers must be distinct: {c}")
    m = len(c) - 1
    out = []
    for j, cj in enumerate(c):
        prod = 1.0
        for k, ck in enumerate(c):
            if k != j:
                prod *= ck / (cj - ck)
        out.append((-1) ** m * prod)
    return np.array(out)


@dataclass(frozen=True)
class ExtrapolationPlan:
    epsilon: float
    c: tuple[float, ...]
    gamma: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        c = tuple(float(x) for x in self.c)
        if not c or c[0] != 1.0:
            raise ValueError("the first multiplier must be 1")
        if any(b <= a for a, b in zip(c, c[1:])):
            raise ValueError(f"multipliers must be strictly increasing: {c}")
        if not 0 <= self.epsilon < 1:
            raise ValueError(f"base loss must lie in [0, 1), got {self.epsilon}")
        if self.epsilon * c[-1] >= 1:
            raise ValueError(f"largest scaled loss {self.epsilon * c[-1]} is not below 1")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "gamma", gamma_coefficients(c))

    @property
    def order(self) -> int:
        return len(self.c) - 1

    @property
    def losses(self) -> np.ndarray:
        return self.epsilon * np.array(self.c)

    def to_json(self) -> str:
        return json.dumps({"epsilon": self.epsilon, "c": list(self.c)})

    @classmethod
    def from_json(cls, text: str) -> ExtrapolationPlan:
        data = json.loads(text)
        unknown = set(data) - {"epsilon", "c", "gamma"}
        if unknown:
            raise ValueError(f"unknown plan keys: {sorted(unknown)}")
        # gamma is always recomputed from c
        return cls(float(data["epsilon"]), tuple(data["c"]))


def extrapolate(values: Sequence[float], plan: ExtrapolationPlan) -> float:
    values = np.asarray(values, dtype=float)
    if values.shape != (len(plan.c),):
        raise ValueError(f"expected {len(plan.c)} values, got {values.shape}")
    return float(np.dot(plan.gamma, values))


@dataclass(frozen=True)
class PolePolynomials:
    """Pole factors of lossy probabilities for a known squeezing spectrum.

    ``Q(e) = prod_k sqrt(1 - e^2 tanh^2 r_k)`` over all modes and
    ``P(e) = prod_j (1 - e^2 tanh^2 s_j)`` over the distinct nonzero ``s_j``.
    """

    r: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "r", tuple(float(x) for x in self.r))

    @property
    def distinct(self) -> np.ndarray:
        return distinct_nonzero(self.r)

    @property
    def max_tanh(self) -> float:
        return float(np.tanh(max(self.r, default=0.0)))

    def q(self, eps: float) -> float:
        t = np.tanh(np.array(self.r))
        return float(np.prod(np.sqrt(1 - eps**2 * t**2)))

    def p(self, eps: float) -> float:
        t = np.tanh(self.distinct)
        return float(np.prod(1 - eps**2 * t**2))

    def factor(self, eps: float, total: int) -> float:
        """``Q(eps) P(eps)^N`` for a pattern with ``N`` photons."""
        return self.q(eps) * self.p(eps) ** total

    def check(self, losses) -> None:
        worst = max(losses) * self.max_tanh
        if worst >= 1 - POLE_MARGIN:
            raise PoleCrossingError(f"scaled loss reaches the pole: eps * tanh r = {worst:.6g}")


def improved_extrapolate(values: Sequence[float], plan: ExtrapolationPlan, poles: PolePolynomials, total: int) -> float:
    """Remove the pole factors from each measured value, then extrapolate."""
    poles.check(plan.losses)
    weights = [poles.factor(e, total) for e in plan.losses]
    return extrapolate(np.asarray(values, dtype=float) * weights, plan)


def lossy_series(state: GaussianState, plan: ExtrapolationPlan, evaluate) -> list[float]:
    """``evaluate(lossy_state)`` at every scaled loss of the plan."""
    return [evaluate(apply_uniform_loss(state, float(e))) for e in plan.losses]


def sigma_q_inverse_eigen(r, eps: float) -> np.ndarray:
    """Diagonal of ``sigma_Q(eps)^-1`` in the input-mode basis, ordered ``(a.., a^+..)``."""
    t = np.tanh(np.asarray(r, dtype=float))
    return np.concatenate([(1 - t) / (1 - eps * t), (1 + t) / (1 + eps * t)])


def displaced_prefactor(r, d_in, eps: float) -> float:
    """``exp(-d^+ sigma_Q(eps)^-1 d / 2)`` from the input squeezing and displacement.

    ``r`` are the input squeezing parameters, with the squeezing phase that
    makes the A-matrix ``diag(tanh r)``. ``d_in`` is the input displacement
    ``(alpha, alpha^*)`` before the interferometer and before loss. The
    value is known in closed form and is divided out before extrapolating.
    """
    r = np.asarray(r, dtype=float)
    t = np.tanh(r)
    if np.any(eps * t >= 1 - POLE_MARGIN):
        raise PoleCrossingError("scaled loss reaches the pole")
    d_in = np.asarray(d_in, dtype=complex)
    m = len(r)
    # rotate into the squeezing eigenbasis: quadrature combinations (a +- a^+)/sqrt2
    alpha = d_in[:m]
    plus = (alpha + alpha.conj()) / np.sqrt(2)
    minus = (alpha - alpha.conj()) / np.sqrt(2)
    lam = sigma_q_inverse_eigen(r, eps)
    quad = np.sum(lam[:m] * np.abs(plus) ** 2) + np.sum(lam[m:] * np.abs(minus) ** 2)
    return float(np.exp(-0.5 * (1 - eps) * quad))


def nonuniform_first_order(p_base: float, p_perturbed, c_factors) -> float:
    """First-order estimate from single-element loss perturbations.

    ``p_perturbed[k][mu]`` is the probability with only loss ``(k, mu)``
    scaled by ``c_factors[k][mu]``. Entries set to ``nan`` are skipped.
    """
    pp = np.asarray(p_perturbed, dtype=float)
    cf = np.asarray(c_factors, dtype=float)
    if pp.shape != cf.shape:
        raise ValueError("perturbed probabilities and factors must have the same shape")
    used = ~np.isnan(pp)
    if np.any(cf[used] == 1):
        raise ValueError("loss multipliers must differ from 1")
    return float(p_base - np.sum((pp[used] - p_base) / (cf[used] - 1)))


def variance_bounds(probs, gammas, v_min: float, v_max: float) -> tuple[float, float]:
    """Lower and upper bounds on the variance of the relative extrapolation error."""
    probs = np.asarray(probs, dtype=float)
    gammas = np.asarray(gammas, dtype=float)
    if np.any(probs < 0):
        raise ValueError("probabilities must be nonnegative")
    nz = probs[probs > 0]
    if nz.size == 0:
        raise ValueError("at least one probability must be nonzero")
    denom = float(np.dot(gammas, probs)) ** 2
    gamma2 = float(np.sum(gammas**2))
    return nz.min() ** 2 * v_min * gamma2 / denom, nz.max() ** 2 * v_max * gamma2 / denom


def relative_variance(probs, gammas, variances) -> float:
    """Exact variance of the relative extrapolation error for independent relative noise."""
    probs = np.asarray(probs, dtype=float)
    gammas = np.asarray(gammas, dtype=float)
    return float(np.sum(gammas**2 * probs**2 * np.asarray(variances)) / np.dot(gammas, probs) ** 2)


def required_samples(p: float, target_var: float, c2_gamma2: float) -> int:
    """Tries per loss value so that the extrapolated relative variance meets ``target_var``."""
    if not 0 < p < 1:
        raise ValueError("p must lie in (0, 1)")
    if target_var <= 0:
        raise ValueError("target variance must be positive")
    return math.ceil((1 - p) / p * c2_gamma2 / target_var)
