"""Seeded sampling of pipeline instances.

Uses SplitMix64 rather than ``random.Random`` so that a given seed yields
the same instances on every platform and Python version.
"""

from typing import List, Sequence, TypeVar

from ..search_space import (
    Anything,
    Categorical,
    Constant,
    FloatRange,
    HyperparamDomain,
    IntRange,
    OperatorSpec,
    PipelineInstance,
    PlannedPipeline,
    Seq,
    Step,
    Value,
)

T = TypeVar('T')

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB


class SplitMix64:
    """64-bit SplitMix generator with the usual ``random``-style helpers."""

    def __init__(self, seed: int):
        self._seed = seed
        self.state = seed & MASK64

    @property
    def seed(self) -> int:
        return self._seed

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN_GAMMA) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * MIX1) & MASK64
        z = ((z ^ (z >> 27)) * MIX2) & MASK64
        return z ^ (z >> 31)

    def randbelow(self, n: int) -> int:
        """Unbiased integer in ``[0, n)``."""
        if n <= 0:
            raise ValueError(f"randbelow needs a positive bound, got {n}")
        limit = (1 << 64) - (1 << 64) % n
        while True:
            x = self.next_u64()
            if x < limit:
                return x % n

    def random(self) -> float:
        """Float in ``[0, 1)`` from the top 53 bits."""
        return (self.next_u64() >> 11) / (1 << 53)

    def uniform(self, a: float, b: float) -> float:
        return a + (b - a) * self.random()

    def randint(self, a: int, b: int) -> int:
        return a + self.randbelow(b - a + 1)

    def choice(self, seq: Sequence[T]) -> T:
        return seq[self.randbelow(len(seq))]


def draw_value(domain: HyperparamDomain, rng: SplitMix64) -> Value:
    if isinstance(domain, Constant):
        return domain.value
    if isinstance(domain, Categorical):
        return rng.choice(domain.values)
    if isinstance(domain, IntRange):
        return rng.randint(domain.lo, domain.hi)
    if isinstance(domain, FloatRange):
        while True:
            v = rng.uniform(domain.lo, domain.hi)
            if not ((domain.open_lo and v <= domain.lo) or (domain.open_hi and v >= domain.hi)):
                return v
    raise ValueError(f"cannot draw from {domain!r}")


def _draw_step(step: Step, rng: SplitMix64, bindings: dict) -> None:
    if isinstance(step, OperatorSpec):
        for hp, domain in step.hyperparams.items():
            if not isinstance(domain, Anything):
                bindings[(step.name, hp)] = draw_value(domain, rng)
        for hp, value in step.fixed.items():
            bindings[(step.name, hp)] = value
    elif isinstance(step, Seq):
        for s in step.steps:
            _draw_step(s, rng, bindings)
    else:
        _draw_step(rng.choice(step.alternatives), rng, bindings)


def draw(pipeline: PlannedPipeline, rng: SplitMix64, inst_id: str) -> PipelineInstance:
    """One instance: a uniform choice per Choice, a uniform value per domain.

    Unconstrained hyperparameters stay unbound; fixed values are bound. The
    result is provisionally True until an oracle labels the instance.
    """
    bindings: dict = {}
    for step in pipeline.steps:
        _draw_step(step, rng, bindings)
    return PipelineInstance(inst_id, True, bindings)


def sample(pipeline: PlannedPipeline, n: int, seed: int) -> List[PipelineInstance]:
    """``n`` instances ``p0``..; a shorter run is always a prefix of a longer one."""
    if n < 1:
        raise ValueError(f"sample size must be positive, got {n}")
    rng = SplitMix64(seed)
    return [draw(pipeline, rng, f"p{i}") for i in range(n)]
