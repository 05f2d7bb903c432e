"""Click patterns, orbits and finite-support signed measures over patterns."""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

Pattern = tuple[int, ...]

MASS_TOL = 1e-9


def as_pattern(counts: Iterable[int]) -> Pattern:
    out = tuple(int(c) for c in counts)
    if any(c < 0 for c in out):
        raise ValueError(f"photon counts must be nonnegative: {out}")
    return out


def patterns_up_to(modes: int, cutoff: int, min_total: int = 0) -> Iterator[Pattern]:
    """All patterns on ``modes`` modes with ``min_total <= |n| <= cutoff``, by total then lexicographic."""
    for total in range(min_total, cutoff + 1):
        yield from patterns_with_total(modes, total)


def patterns_with_total(modes: int, total: int) -> Iterator[Pattern]:
    if modes == 0:
        if total == 0:
            yield ()
        return
    for first in range(total, -1, -1):
        for rest in patterns_with_total(modes - 1, total - first):
            yield (first, *rest)


def dominated_by(pattern: Sequence[int]) -> Iterator[Pattern]:
    """Every pattern ``n'`` with ``n' <= pattern`` elementwise."""
    return itertools.product(*(range(c + 1) for c in pattern))


@dataclass(frozen=True)
class Orbit:
    """All mode permutations of a click pattern, e.g. ``Orbit((1, 1, 1, 1), 8)``."""

    signature: tuple[int, ...]
    modes: int

    def __post_init__(self):
        sig = tuple(sorted((int(c) for c in self.signature if c), reverse=True))
        if any(c < 0 for c in sig) or len(sig) > self.modes:
            raise ValueError(f"invalid orbit signature {self.signature} on {self.modes} modes")
        object.__setattr__(self, "signature", sig)

    @classmethod
    def of(cls, pattern: Sequence[int]) -> Orbit:
        return cls(tuple(pattern), len(pattern))

    @property
    def total(self) -> int:
        return sum(self.signature)

    def members(self) -> list[Pattern]:
        padded = self.signature + (0,) * (self.modes - len(self.signature))
        return sorted(set(itertools.permutations(padded)), reverse=True)

    def size(self) -> int:
        counts: dict[int, int] = {}
        for c in self.signature + (0,) * (self.modes - len(self.signature)):
            counts[c] = counts.get(c, 0) + 1
        out = math.factorial(self.modes)
        for k in counts.values():
            out //= math.factorial(k)
        return out

    def label(self) -> str:
        return "[" + "".join(map(str, self.signature)) + "]" if self.signature else "[vacuum]"


@dataclass
class DiscreteDistribution:
    """Finite-support real measure on click patterns.

    Weights may be negative or exceed one after formal loss maps;
    :meth:`is_physical` tells the two apart. ``cutoff`` is the maximum total
    photon number represented, and ``truncated`` flags that mass beyond it was
    dropped.
    """

    weights: dict[Pattern, float]
    modes: int
    cutoff: int | None = None
    truncated: bool = False
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        clean: dict[Pattern, float] = {}
        for k, v in self.weights.items():
            p = as_pattern(k)
            if len(p) != self.modes:
                raise ValueError(f"pattern {p} does not have {self.modes} modes")
            clean[p] = clean.get(p, 0.0) + float(v)
        self.weights = clean

    @classmethod
    def point_mass(cls, pattern: Sequence[int]) -> DiscreteDistribution:
        p = as_pattern(pattern)
        return cls({p: 1.0}, len(p), cutoff=sum(p))

    def __getitem__(self, pattern: Sequence[int]) -> float:
        return self.weights.get(tuple(pattern), 0.0)

    def __len__(self) -> int:
        return len(self.weights)

    def __iter__(self):
        return iter(self.weights)

    def items(self):
        return self.weights.items()

    def total_mass(self) -> float:
        # fixed order keeps sums reproducible
        return math.fsum(self.weights[k] for k in sorted(self.weights))

    def max_total(self) -> int:
        return max((sum(p) for p in self.weights), default=0)

    def restrict(self, cutoff: int) -> DiscreteDistribution:
        kept = {p: w for p, w in self.weights.items() if sum(p) <= cutoff}
        dropped = len(kept) < len(self.weights)
        return DiscreteDistribution(kept, self.modes, cutoff=cutoff, truncated=self.truncated or dropped)

    def is_physical(self, tol: float = MASS_TOL) -> bool:
        return all(-tol <= w <= 1 + tol for w in self.weights.values()) and self.total_mass() <= 1 + tol

    def shell_masses(self) -> dict[int, float]:
        out: dict[int, float] = {}
        for p, w in self.weights.items():
            out[sum(p)] = out.get(sum(p), 0.0) + w
        return out

    def to_records(self) -> list[dict]:
        return [{"pattern": list(p), "p": w} for p, w in sorted(self.weights.items(), key=lambda kv: (sum(kv[0]), tuple(-c for c in kv[0])))]

    def to_json(self) -> str:
        return json.dumps(self.to_records())

    @classmethod
    def from_records(cls, records: Iterable[Mapping], cutoff: int | None = None) -> DiscreteDistribution:
        weights = {as_pattern(r["pattern"]): float(r["p"]) for r in records}
        if not weights:
            raise ValueError("empty distribution")
        modes = len(next(iter(weights)))
        return cls(weights, modes, cutoff=cutoff)

    @classmethod
    def from_json(cls, text: str, cutoff: int | None = None) -> DiscreteDistribution:
        return cls.from_records(json.loads(text), cutoff=cutoff)
