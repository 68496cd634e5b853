"""Reduce the number of distinct potentials in a parfactor under a distance
budget.

Two strategies are provided.  The quantile strategy sorts the potentials,
splits them into ``q`` contiguous groups for the smallest feasible ``q`` and
maps every member to its group mean.  The clustering strategy runs DBSCAN over
the potentials as 1-D points and maps every cluster member to the cluster
mean.  ``select_reduction`` runs both, discards results over budget and keeps
the one with the fewest distinct values.
"""

from __future__ import annotations

import bisect
from collections import deque
from dataclasses import dataclass
from typing import Callable, Sequence

from .metrics import distinct_count, hellinger
from .model import Parfactor, ParfactorModel

DistanceFn = Callable[[Sequence[float], Sequence[float]], float]

QUANTILE = "quantile"
CLUSTER = "cluster"
IDENTITY = "identity"

_STRATEGY_RANK = {CLUSTER: 0, QUANTILE: 1, IDENTITY: 2}


@dataclass(frozen=True)
class ReductionParams:
    """Budget and clustering knobs for the reduction step.

    ``epsilon`` caps the Hellinger distance between the original and mapped
    table; ``theta_d`` is the DBSCAN neighbor radius and ``theta_n`` the core
    threshold (counting the point itself).
    """

    epsilon: float
    theta_d: float
    theta_n: int

    def __post_init__(self) -> None:
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError(f"epsilon must lie in [0, 1], got {self.epsilon!r}")
        if not self.theta_d > 0.0:
            raise ValueError(f"theta_d must be positive, got {self.theta_d!r}")
        if int(self.theta_n) != self.theta_n or self.theta_n < 1:
            raise ValueError(f"theta_n must be an integer >= 1, got {self.theta_n!r}")
        object.__setattr__(self, "epsilon", float(self.epsilon))
        object.__setattr__(self, "theta_d", float(self.theta_d))
        object.__setattr__(self, "theta_n", int(self.theta_n))


@dataclass(frozen=True)
class ReductionResult:
    """A mapped potential table plus how it was obtained.

    ``partition`` groups row indices; every row of a group carries the group's
    representative (its arithmetic mean) in ``mapped``.  ``distance`` is the
    Hellinger distance between the original and mapped tables.
    """

    mapped: tuple[float, ...]
    partition: tuple[tuple[int, ...], ...]
    representatives: tuple[float, ...]
    strategy: str
    distance: float
    q: int | None = None


def dbscan_1d(
    values: Sequence[float], radius: float, min_pts: int
) -> tuple[tuple[int, ...], ...]:
    """Density clusters of a 1-D multiset, as groups of input indices.

    A point is core when at least ``min_pts`` points (itself included) lie
    within ``radius``, boundary inclusive.  Clusters are connected components
    of core points plus any non-core point in range of one; everything else is
    noise and comes back as a singleton group.  Points are processed in sorted
    value order, so the result does not depend on input order.
    """
    n = len(values)
    order = sorted(range(n), key=lambda i: (values[i], i))
    xs = [float(values[i]) for i in order]

    def neighborhood(k: int) -> range:
        lo = bisect.bisect_left(xs, xs[k] - radius)
        hi = bisect.bisect_right(xs, xs[k] + radius)
        return range(lo, hi)

    is_core = [len(neighborhood(k)) >= min_pts for k in range(n)]
    labels: list[int | None] = [None] * n
    groups: list[list[int]] = []
    for k in range(n):
        if labels[k] is not None or not is_core[k]:
            continue
        cid = len(groups)
        groups.append([])
        labels[k] = cid
        queue = deque([k])
        while queue:
            cur = queue.popleft()
            groups[cid].append(order[cur])
            for j in neighborhood(cur):
                if labels[j] is None:
                    labels[j] = cid
                    if is_core[j]:
                        queue.append(j)
                    else:
                        groups[cid].append(order[j])
    result = [tuple(sorted(g)) for g in groups]
    for k in range(n):
        if labels[k] is None:
            result.append((order[k],))
    return tuple(result)


def quantile_groups(values: Sequence[float], q: int) -> tuple[tuple[int, ...], ...]:
    """Split sorted positions 1..n into groups ((j-1)n/q, jn/q], then repair:
    all occurrences of one value move to the group holding most of them
    (earliest group on ties), so equal values always share a group.
    """
    n = len(values)
    order = sorted(range(n), key=lambda i: (values[i], i))
    gid = [((p + 1) * q + n - 1) // n for p in range(n)]
    start = 0
    while start < n:
        stop = start
        while stop + 1 < n and values[order[stop + 1]] == values[order[start]]:
            stop += 1
        if gid[stop] != gid[start]:
            counts: dict[int, int] = {}
            for p in range(start, stop + 1):
                counts[gid[p]] = counts.get(gid[p], 0) + 1
            best = max(sorted(counts), key=lambda g: counts[g])
            for p in range(start, stop + 1):
                gid[p] = best
        start = stop + 1
    grouped: dict[int, list[int]] = {}
    for p in range(n):
        grouped.setdefault(gid[p], []).append(order[p])
    return tuple(tuple(sorted(grouped[g])) for g in sorted(grouped))


def _from_partition(
    values: tuple[float, ...],
    partition: tuple[tuple[int, ...], ...],
    strategy: str,
    q: int | None = None,
    distance_fn: DistanceFn = hellinger,
) -> ReductionResult:
    representatives = tuple(
        sum(values[i] for i in group) / len(group) for group in partition
    )
    mapped = list(values)
    for group, rep in zip(partition, representatives):
        for i in group:
            mapped[i] = rep
    mapped_t = tuple(mapped)
    return ReductionResult(
        mapped_t, partition, representatives, strategy, distance_fn(values, mapped_t), q
    )


def identity_reduction(parfactor: Parfactor) -> ReductionResult:
    """The no-change result: every row is its own singleton group."""
    values = parfactor.potentials
    partition = tuple((i,) for i in range(len(values)))
    return ReductionResult(values, partition, values, IDENTITY, 0.0)


def reduce_quantile(
    parfactor: Parfactor, epsilon: float, distance_fn: DistanceFn = hellinger
) -> ReductionResult:
    """Smallest ``q`` in 1..size-1 whose quantile grouping stays within
    ``epsilon``; the identity result if none does.
    """
    values = parfactor.potentials
    for q in range(1, len(values)):
        result = _from_partition(
            values, quantile_groups(values, q), QUANTILE, q, distance_fn
        )
        if result.distance <= epsilon:
            return result
    return identity_reduction(parfactor)


def reduce_cluster(
    parfactor: Parfactor,
    params: ReductionParams,
    distance_fn: DistanceFn = hellinger,
) -> ReductionResult:
    """Map every DBSCAN cluster to its mean; noise points map to themselves.

    The budget is not checked here; ``select_reduction`` filters.
    """
    values = parfactor.potentials
    partition = dbscan_1d(values, params.theta_d, params.theta_n)
    return _from_partition(values, partition, CLUSTER, None, distance_fn)


def select_reduction(
    parfactor: Parfactor,
    params: ReductionParams,
    strategies: Sequence[str] = (CLUSTER, QUANTILE),
    distance_fn: DistanceFn = hellinger,
) -> ReductionResult:
    """Run the requested strategies and keep the best result within budget.

    Ranking: fewest distinct mapped values, then smaller distance, then
    cluster before quantile.  Falls back to the identity result when nothing
    survives the budget.  ``distance_fn`` swaps the distance; only the
    default normalized Hellinger distance ships.
    """
    candidates: list[ReductionResult] = []
    for strategy in strategies:
        if strategy == CLUSTER:
            candidates.append(reduce_cluster(parfactor, params, distance_fn))
        elif strategy == QUANTILE:
            candidates.append(reduce_quantile(parfactor, params.epsilon, distance_fn))
        else:
            raise ValueError(f"unknown reduction strategy {strategy!r}")
    survivors = [r for r in candidates if r.distance <= params.epsilon]
    if not survivors:
        return identity_reduction(parfactor)
    return min(
        survivors,
        key=lambda r: (distinct_count(r.mapped), r.distance, _STRATEGY_RANK[r.strategy]),
    )


def apply_reduction(
    model: ParfactorModel, results: Sequence[ReductionResult]
) -> ParfactorModel:
    """The mapped model: each parfactor's table replaced by its reduction."""
    return model.with_tables([r.mapped for r in results])
