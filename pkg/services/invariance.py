"""
Monte-Carlo invariance campaigns: the frequency of a cylinder event is
compared with the frequencies of its translates on one batch of samples.
"""
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache, partial
from typing import Callable, FrozenSet, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from core.exceptions import ConfigurationError, InvarianceError
from core.graphs import Edge, EdgeSet, WindowedGraph, build_grid_window, edge_key
from core.group import GroupElement, lattice
from models import InvarianceReport, TranslateResult
from services.tiling import coset_representatives, sample_tiling


logger = logging.getLogger(__name__)

Observation = Tuple[EdgeSet, FrozenSet]
Sampler = Callable[[np.random.Generator], Observation]


@dataclass(frozen=True)
class CylinderEvent:
    """All listed edges are present in the sampled edge set."""
    edges: Tuple[Edge, ...]

    @classmethod
    def of(cls, pairs: Sequence[Sequence[Sequence[int]]]) -> "CylinderEvent":
        if not pairs:
            raise ConfigurationError("an event needs at least one edge")
        return cls(tuple(sorted(edge_key(lattice(*u), lattice(*v)) for u, v in pairs)))

    @property
    def vertices(self) -> FrozenSet:
        return frozenset(x for e in self.edges for x in e)

    def translate(self, g: GroupElement) -> "CylinderEvent":
        return CylinderEvent(tuple(sorted(edge_key(u + g, v + g) for u, v in self.edges)))

    def holds(self, E: EdgeSet) -> bool:
        return all(e in E.edges for e in self.edges)

    def describe(self) -> str:
        return " & ".join(f"{u}-{v}" for u, v in self.edges)


def sample_rng(seed: int, index: int) -> np.random.Generator:
    """Generator of sample `index`: a counter-based split of the root seed."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(index,)))


@lru_cache(maxsize=8)
def plane_window(radius: int, margin: int) -> WindowedGraph:
    return build_grid_window(2, radius, margin)


@dataclass(frozen=True)
class TilingLaw:
    """Solid class of a tiling sample; `averaged=False` skips the coset shift."""
    radius: int
    margin: int
    averaged: bool = True

    def __call__(self, rng: np.random.Generator) -> Observation:
        sample = sample_tiling(plane_window(self.radius, self.margin), rng, averaged=self.averaged)
        return sample.solid, sample.trusted


@dataclass(frozen=True)
class PercolationLaw:
    """Independent Bernoulli(p) edges on a box: exactly translation invariant."""
    radius: int
    p: float = 0.5

    def __call__(self, rng: np.random.Generator) -> Observation:
        window = plane_window(self.radius, 0)
        edges = sorted(window.graph.graph.edges)
        keep = rng.random(len(edges)) < self.p
        chosen = frozenset(edge_key(*e) for e, k in zip(edges, keep) if k)
        return EdgeSet(chosen, frozenset(window.vertices)), frozenset(window.vertices)


def bernoulli_percolation_sampler(radius: int, p: float = 0.5) -> PercolationLaw:
    if not 0.0 <= p <= 1.0:
        raise ConfigurationError(f"edge probability must lie in [0, 1], got {p}")
    return PercolationLaw(radius, p)


def evaluate_sample(sampler: Sampler, seed: int, events: Sequence[CylinderEvent], index: int) -> Tuple[bool, ...]:
    edges, trusted = sampler(sample_rng(seed, index))
    for event in events:
        outside = sorted(event.vertices - trusted)
        if outside:
            raise InvarianceError(f"event {event.describe()} touches untrusted vertex {outside[0]} in sample {index}")
    return tuple(event.holds(edges) for event in events)


def two_proportion_z(hits_a: int, hits_b: int, n: int) -> float:
    """Pooled two-proportion z statistic of b against a, equal sample sizes."""
    pooled = (hits_a + hits_b) / (2 * n)
    variance = pooled * (1 - pooled) * 2 / n
    if variance == 0:
        return 0.0 if hits_a == hits_b else float(np.sign(hits_b - hits_a)) * np.inf
    return (hits_b - hits_a) / n / np.sqrt(variance)


def invariance_test(
    sampler: Sampler,
    event: CylinderEvent,
    translates: Sequence[GroupElement],
    N: int,
    alpha: float,
    seed: int = 0,
    workers: int = 1,
    law: str = "",
) -> InvarianceReport:
    """
    Test P(event + g) = P(event) for every non-identity translate g, all on the
    same N samples, at family-wise level alpha (Bonferroni).
    """
    if N < 1:
        raise ConfigurationError(f"need at least one sample, got {N}")
    if not 0 < alpha < 1:
        raise ConfigurationError(f"alpha must lie in (0, 1), got {alpha}")
    others = [g for g in translates if not g.is_zero()]
    if not others:
        raise ConfigurationError("no non-identity translate to compare against")
    events = [event] + [event.translate(g) for g in others]

    evaluate = partial(evaluate_sample, sampler, seed, events)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            outcomes = list(executor.map(evaluate, range(N), chunksize=max(1, N // (4 * workers))))
    else:
        outcomes = [evaluate(i) for i in range(N)]

    hits = np.sum(np.array(outcomes, dtype=bool), axis=0)
    baseline = int(hits[0])
    corrected = alpha / len(others)
    results: List[TranslateResult] = []
    for g, h in zip(others, hits[1:]):
        z = two_proportion_z(baseline, int(h), N)
        p_value = float(min(1.0, 2 * stats.norm.sf(abs(z))))
        results.append(TranslateResult(
            translate=g.to_json(),
            frequency=int(h) / N,
            z_score=float(z),
            p_value=p_value,
            rejected=p_value < corrected,
        ))

    rejected = any(r.rejected for r in results)
    if rejected:
        logger.warning(f"Invariance rejected for {event.describe()} under {law or 'sampler'}")
    return InvarianceReport(
        event=event.describe(),
        law=law,
        samples=N,
        alpha=alpha,
        corrected_alpha=corrected,
        baseline_frequency=baseline / N,
        translates=results,
        rejected=rejected,
        seed=seed,
    )


DEFAULT_EVENTS = (
    ((0, 0), (1, 0)),
    ((0, 0), (0, 1)),
    ((-1, 0), (0, 0)),
    ((1, 1), (2, 1)),
    ((0, 1), (0, 2)),
)


def default_events() -> List[CylinderEvent]:
    return [CylinderEvent.of([pair]) for pair in DEFAULT_EVENTS]


def default_translates() -> List[GroupElement]:
    return list(coset_representatives())


def law_for(name: str, radius: int, margin: int) -> Sampler:
    if name == "tiling":
        return TilingLaw(radius, margin, averaged=True)
    if name == "tiling-unaveraged":
        return TilingLaw(radius, margin, averaged=False)
    if name == "percolation":
        return bernoulli_percolation_sampler(radius)
    raise ConfigurationError(f"unknown law {name!r}")


def run_campaign(
    name: str,
    radius: int,
    margin: int,
    N: int,
    alpha: float,
    seed: int,
    events: Optional[Sequence[CylinderEvent]] = None,
    workers: int = 1,
) -> List[InvarianceReport]:
    sampler = law_for(name, radius, margin)
    reports = []
    for event in events or default_events():
        logger.info(f"Invariance campaign {name}: event {event.describe()}, N={N}")
        reports.append(invariance_test(sampler, event, default_translates(), N, alpha, seed, workers, law=name))
    return reports
