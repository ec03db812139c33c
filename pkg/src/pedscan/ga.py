"""Genetic-algorithm threshold selection for separating feet from background.

Each chromosome is an 8-bit string encoding an intensity threshold.  Pixels
strictly brighter than the threshold are foreground.  A candidate is scored by

    fitness = Num_f * Num_b * (M_f - M_b) ** 2

where ``Num`` are the class pixel counts and ``M`` the class mean intensities.
The score is zero whenever one class is empty.

:func:`exhaustive_best_threshold` scores all 256 levels and is the reference
the evolutionary search is checked against.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Any, Mapping

import numpy as np

from .errors import ConfigError
from .imaging import BinaryMask, ThermalImage

LEVELS = 256
_BIT_WEIGHTS = 1 << np.arange(8, dtype=np.int64)


@dataclass(frozen=True)
class GAConfig:
    population_size: int = 30
    cross_rate: float = 0.8
    mutation_rate: float = 0.02
    max_generations: int = 50
    rate_reduction_factor: float = 0.5
    rng_seed: int = 0
    chromosome_bits: int = 8

    def __post_init__(self) -> None:
        if self.chromosome_bits != 8:
            raise ConfigError("chromosome_bits must be 8 (one byte per intensity level)")
        if self.population_size < 2:
            raise ConfigError("population_size must be at least 2")
        if self.max_generations < 1:
            raise ConfigError("max_generations must be at least 1")
        for name in ("cross_rate", "mutation_rate"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ConfigError(f"{name} must be a probability in [0, 1], got {value}")
        if not 0.0 < self.rate_reduction_factor < 1.0:
            raise ConfigError("rate_reduction_factor must lie in (0, 1)")
        if not 0 <= self.rng_seed < 2 ** 64:
            raise ConfigError("rng_seed must be an unsigned 64-bit integer")

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "GAConfig":
        known = {k: data[k] for k in cls.__dataclass_fields__ if k in data}
        unknown = set(data) - set(known)
        if unknown:
            raise ConfigError(f"unknown GAConfig keys: {sorted(unknown)}")
        return cls(**known)


@dataclass(frozen=True)
class FitnessStats:
    threshold: int
    num_f: int
    num_b: int
    i_f: int
    i_b: int
    m_f: float
    m_b: float
    fitness: float


@dataclass(frozen=True)
class GAResult:
    threshold: int
    stats: FitnessStats
    generations_run: int
    best_fitness_history: list[float] = field(default_factory=list)

    @property
    def fitness(self) -> float:
        return self.stats.fitness


def histogram(image: ThermalImage) -> np.ndarray:
    return np.bincount(image.pixels.ravel(), minlength=LEVELS).astype(np.int64)


def _stats(threshold: int, num_f: int, num_b: int, i_f: int, i_b: int) -> FitnessStats:
    if num_f == 0 or num_b == 0:
        m_f = i_f / num_f if num_f else 0.0
        m_b = i_b / num_b if num_b else 0.0
        return FitnessStats(threshold, num_f, num_b, i_f, i_b, m_f, m_b, 0.0)
    m_f = i_f / num_f
    m_b = i_b / num_b
    diff = m_f - m_b
    # Python ints keep the count product exact before it meets the float term.
    return FitnessStats(threshold, num_f, num_b, i_f, i_b, m_f, m_b,
                        float(num_f * num_b) * (diff * diff))


def _check_level(threshold: int) -> int:
    if not 0 <= int(threshold) < LEVELS:
        raise ConfigError(f"threshold must be in [0, 255], got {threshold}")
    return int(threshold)


def fitness(image: ThermalImage, threshold: int) -> FitnessStats:
    """Score one threshold: foreground is ``intensity > threshold``."""
    threshold = _check_level(threshold)
    return _stats_table(histogram(image))[threshold]


def _stats_table(hist: np.ndarray) -> list[FitnessStats]:
    counts = [int(c) for c in hist]
    total = sum(counts)
    total_sum = sum(level * c for level, c in enumerate(counts))
    table = []
    num_b = i_b = 0
    for t in range(LEVELS):
        num_b += counts[t]
        i_b += t * counts[t]
        table.append(_stats(t, total - num_b, num_b, total_sum - i_b, i_b))
    return table


def fitness_table(image: ThermalImage) -> np.ndarray:
    """Fitness of every threshold 0..255 as a float array."""
    return np.array([s.fitness for s in _stats_table(histogram(image))])


def exhaustive_best_threshold(image: ThermalImage) -> GAResult:
    """Score all 256 thresholds; the smallest maximiser wins ties."""
    table = _stats_table(histogram(image))
    best = max(table, key=lambda s: (s.fitness, -s.threshold))
    return GAResult(best.threshold, best, generations_run=0, best_fitness_history=[])


def _roulette(rng: np.random.Generator, scores: np.ndarray, n: int) -> np.ndarray:
    total = scores.sum()
    if total <= 0.0:
        return rng.integers(0, scores.size, size=n)
    cumulative = np.cumsum(scores) / total
    picks = np.searchsorted(cumulative, rng.random(n), side="right")
    return np.minimum(picks, scores.size - 1)


def evolve(image: ThermalImage, config: GAConfig = GAConfig()) -> GAResult:
    """Search for the fitness-maximising threshold with a simple GA.

    Roulette-wheel selection, single-point crossover and per-bit mutation
    breed each generation; the best individual so far is carried over
    unchanged.  Both rates are scaled by ``rate_reduction_factor`` once the
    halfway generation has been evaluated.  The random stream depends only
    on ``config.rng_seed``.
    """
    table = _stats_table(histogram(image))
    scores_by_level = np.array([s.fitness for s in table])
    rng = np.random.default_rng(config.rng_seed)
    pop_size = config.population_size
    cross_rate = config.cross_rate
    mutation_rate = config.mutation_rate
    halfway = math.ceil(config.max_generations / 2)

    population = rng.integers(0, LEVELS, size=pop_size)
    best_level = -1
    best_score = -1.0
    history: list[float] = []
    generation = 0
    while True:
        generation += 1
        scores = scores_by_level[population]
        for level, score in zip(population.tolist(), scores.tolist()):
            if score > best_score or (score == best_score and level < best_level):
                best_level, best_score = level, score
        history.append(best_score)
        if generation >= config.max_generations:
            break
        if generation == halfway:
            cross_rate *= config.rate_reduction_factor
            mutation_rate *= config.rate_reduction_factor

        n_children = pop_size - 1
        n_pairs = (n_children + 1) // 2
        parents = population[_roulette(rng, scores, 2 * n_pairs)].reshape(n_pairs, 2)
        crossing = rng.random(n_pairs) < cross_rate
        points = rng.integers(1, 8, size=n_pairs)
        # Bits are read most-significant first; the cut keeps `point` leading bits.
        head = (0xFF << (8 - points)) & 0xFF
        tail = 0xFF ^ head
        a, b = parents[:, 0], parents[:, 1]
        child_a = np.where(crossing, (a & head) | (b & tail), a)
        child_b = np.where(crossing, (b & head) | (a & tail), b)
        children = np.column_stack([child_a, child_b]).ravel()[:n_children]
        flips = rng.random((n_children, 8)) < mutation_rate
        children = children ^ (flips.astype(np.int64) @ _BIT_WEIGHTS)
        population = np.concatenate([[best_level], children]).astype(np.int64)

    return GAResult(best_level, table[best_level], generation, history)


def segment(image: ThermalImage, threshold: int) -> BinaryMask:
    """Foreground mask of pixels strictly brighter than ``threshold``."""
    threshold = _check_level(threshold)
    return BinaryMask(image.pixels > threshold)
