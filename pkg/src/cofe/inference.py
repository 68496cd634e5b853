"""Exact query answering on ground factor graphs via variable elimination.

A query asks for the conditional marginal of one ground randvar event given an
assignment of other ground randvars.  Factors are multiplied and summed out
one randvar at a time along a min-degree ordering; intermediate tables are
rescaled by their maxima, which the final normalization absorbs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ModelError, TooLargeError, ZeroEvidenceError
from .model import GroundAtom, ParfactorModel, ground

DEFAULT_MAX_WIDTH = 20


@dataclass(frozen=True)
class Query:
    """A target event plus (possibly empty) evidence over ground randvars."""

    target: GroundAtom
    value: int = 1
    evidence: tuple[tuple[GroundAtom, int], ...] = ()

    def __post_init__(self) -> None:
        if self.value not in (0, 1):
            raise ModelError(f"query value must be 0 or 1, got {self.value!r}")
        evidence = tuple(sorted((a, int(v)) for a, v in dict(self.evidence).items()))
        for atom, v in evidence:
            if v not in (0, 1):
                raise ModelError(f"evidence value must be 0 or 1, got {v!r}")
            if atom == self.target:
                raise ModelError(f"query target {atom} also appears as evidence")
        object.__setattr__(self, "evidence", evidence)


class _Factor:
    """A table over distinct ground randvars; axis k belongs to vars[k]."""

    __slots__ = ("vars", "table")

    def __init__(self, vars: tuple[GroundAtom, ...], table: np.ndarray):
        self.vars = vars
        self.table = table

    @classmethod
    def from_potentials(
        cls, atoms: tuple[GroundAtom, ...], potentials: Sequence[float]
    ) -> _Factor:
        unique: list[GroundAtom] = []
        for a in atoms:
            if a not in unique:
                unique.append(a)
        if len(unique) == len(atoms):
            table = np.asarray(potentials, dtype=np.float64).reshape((2,) * len(atoms))
            return cls(tuple(atoms), table)
        # repeated randvar in one factor: keep the consistent (diagonal) entries
        n = len(atoms)
        table = np.empty((2,) * len(unique), dtype=np.float64)
        for assignment in np.ndindex(*table.shape):
            env = dict(zip(unique, assignment))
            row = 0
            for a in atoms:
                row = (row << 1) | env[a]
            table[assignment] = potentials[row]
        return cls(tuple(unique), table)

    def condition(self, atom: GroundAtom, value: int) -> _Factor:
        axis = self.vars.index(atom)
        return _Factor(
            self.vars[:axis] + self.vars[axis + 1 :],
            np.take(self.table, value, axis=axis),
        )

    def align(self, vars_out: tuple[GroundAtom, ...]) -> np.ndarray:
        perm = sorted(range(len(self.vars)), key=lambda i: vars_out.index(self.vars[i]))
        table = np.transpose(self.table, perm)
        shape = tuple(2 if v in self.vars else 1 for v in vars_out)
        return table.reshape(shape)

    def multiply(self, other: _Factor) -> _Factor:
        vars_out = self.vars + tuple(v for v in other.vars if v not in self.vars)
        return _Factor(vars_out, self.align(vars_out) * other.align(vars_out))

    def sum_out(self, atom: GroundAtom) -> _Factor:
        axis = self.vars.index(atom)
        return _Factor(
            self.vars[:axis] + self.vars[axis + 1 :], self.table.sum(axis=axis)
        )


def _eliminate(
    factors: list[_Factor],
    atom: GroundAtom,
    max_width: int,
) -> list[_Factor]:
    touching = [f for f in factors if atom in f.vars]
    rest = [f for f in factors if atom not in f.vars]
    if not touching:
        return rest
    product = touching[0]
    for f in touching[1:]:
        product = product.multiply(f)
        if len(product.vars) > max_width:
            raise TooLargeError(
                f"elimination width {len(product.vars)} exceeds cap {max_width}"
            )
    result = product.sum_out(atom)
    peak = float(result.table.max()) if result.table.size else 0.0
    if peak > 0.0:
        result.table = result.table / peak
    rest.append(result)
    return rest


def _min_degree_order(
    factors: list[_Factor], to_eliminate: set[GroundAtom]
) -> list[GroundAtom]:
    """Greedy min-degree ordering; ties break on atom sort order."""
    scopes = [set(f.vars) for f in factors]
    order: list[GroundAtom] = []
    remaining = set(to_eliminate)
    while remaining:
        def degree(v: GroundAtom) -> int:
            neighbors: set[GroundAtom] = set()
            for scope in scopes:
                if v in scope:
                    neighbors |= scope
            return len(neighbors - {v})

        pick = min(sorted(remaining), key=degree)
        merged: set[GroundAtom] = set()
        kept: list[set[GroundAtom]] = []
        for scope in scopes:
            if pick in scope:
                merged |= scope
            else:
                kept.append(scope)
        merged.discard(pick)
        if merged:
            kept.append(merged)
        scopes = kept
        order.append(pick)
        remaining.remove(pick)
    return order


def query(
    model: ParfactorModel,
    q: Query,
    max_width: int = DEFAULT_MAX_WIDTH,
    elimination_order: Sequence[GroundAtom] | None = None,
) -> float:
    """Exact P(target = value | evidence) by variable elimination.

    ``elimination_order`` overrides the min-degree ordering (used for order
    independence checks); it must cover every non-target, non-evidence
    randvar exactly once.
    """
    ground_factors = ground(model)
    known = {a for f in ground_factors for a in f.atoms}
    if q.target not in known:
        raise ModelError(f"unknown ground randvar {q.target}")
    for atom, _ in q.evidence:
        if atom not in known:
            raise ModelError(f"unknown ground randvar {atom} in evidence")

    factors = [_Factor.from_potentials(f.atoms, f.potentials) for f in ground_factors]
    evidence = dict(q.evidence)
    conditioned: list[_Factor] = []
    for f in factors:
        for atom, value in evidence.items():
            if atom in f.vars:
                f = f.condition(atom, value)
        conditioned.append(f)
    factors = conditioned

    to_eliminate = known - set(evidence) - {q.target}
    if elimination_order is None:
        order = _min_degree_order(factors, to_eliminate)
    else:
        order = list(elimination_order)
        if set(order) != to_eliminate or len(order) != len(to_eliminate):
            raise ModelError("elimination order must cover exactly the free randvars")
    for atom in order:
        factors = _eliminate(factors, atom, max_width)

    result = _Factor((q.target,), np.ones(2, dtype=np.float64))
    for f in factors:
        result = result.multiply(f)
    table = result.align((q.target,)).reshape(2)
    z = float(table.sum())
    if not np.isfinite(z) or z <= 0.0:
        raise ZeroEvidenceError("evidence has probability zero")
    return float(table[q.value] / z)


def representative_queries(model: ParfactorModel) -> list[Query]:
    """One query per randvar name: its lexicographically smallest grounding
    present in the ground model, asking for value 1 with no evidence.
    """
    atoms = sorted({a for f in ground(model) for a in f.atoms})
    first: dict[str, GroundAtom] = {}
    for atom in atoms:
        first.setdefault(atom.name, atom)
    return [Query(first[name]) for name in sorted(first)]


def mean_absolute_error(
    model_a: ParfactorModel,
    model_b: ParfactorModel,
    queries: Sequence[Query],
    max_width: int = DEFAULT_MAX_WIDTH,
) -> float:
    """Mean over queries of |P_a(q) - P_b(q)|; zero for no queries."""
    if not queries:
        return 0.0
    total = 0.0
    for q in queries:
        total += abs(query(model_a, q, max_width) - query(model_b, q, max_width))
    return total / len(queries)
