"""Canonical weighted-formula extraction from potential tables, weight
bucketing, and exact two-level Boolean minimization.

Extraction turns every table row into a full conjunction (minterm) weighted by
the natural log of its potential.  Rows sharing one mapped potential form a
bucket; each bucket is minimized into a single minimal disjunctive normal form
via prime implicant generation (Quine-McCluskey) and exact minimum cover
selection (Petrick's method).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

from .model import Parfactor, enumerate_rows

Bits = tuple[int, ...]
Implicant = tuple[int | None, ...]

MAX_MINIMIZE_ARITY = 16
MAX_PETRICK_TERMS = 1 << 16


def _implicant_key(implicant: tuple[int | None, ...]) -> tuple[int, ...]:
    # don't-cares sort after fixed bits
    return tuple(2 if b is None else b for b in implicant)


@dataclass(frozen=True)
class BoolFormula:
    """A disjunctive normal form over ``arity`` positional atoms.

    Each implicant maps positions to 0, 1 or ``None`` (don't-care).  The
    stored cover holds no duplicate and no subsumed implicant; ``minimal`` is
    False only when the greedy cover fallback was used.
    """

    arity: int
    implicants: tuple[tuple[int | None, ...], ...]
    minimal: bool = True

    def __post_init__(self) -> None:
        implicants = tuple(tuple(imp) for imp in self.implicants)
        for imp in implicants:
            if len(imp) != self.arity:
                raise ValueError(f"implicant {imp} does not match arity {self.arity}")
        if len(set(implicants)) != len(implicants):
            raise ValueError("duplicate implicants in cover")
        for a, b in itertools.permutations(implicants, 2):
            if all(x is None or x == y for x, y in zip(a, b)):
                raise ValueError(f"implicant {b} is subsumed by {a}")
        object.__setattr__(self, "implicants", implicants)

    @classmethod
    def tautology(cls, arity: int) -> BoolFormula:
        return cls(arity, ((None,) * arity,))

    @property
    def is_tautology(self) -> bool:
        return self.implicants == ((None,) * self.arity,)

    def evaluate(self, bits: Sequence[int]) -> bool:
        return any(
            all(b is None or bits[j] == b for j, b in enumerate(imp))
            for imp in self.implicants
        )

    def satisfying(self) -> list[tuple[int, ...]]:
        """All satisfying assignments; intended for small arities."""
        return [
            bits
            for bits in itertools.product((0, 1), repeat=self.arity)
            if self.evaluate(bits)
        ]


def formula_length(formula: BoolFormula) -> int:
    """Total literal occurrences over all implicants."""
    return sum(1 for imp in formula.implicants for b in imp if b is not None)


@dataclass(frozen=True)
class WeightBucket:
    """The minterms of all rows sharing one mapped potential.

    ``potential`` is the exact shared representative; ``weight`` is its
    natural log, taken once per bucket.
    """

    potential: float
    weight: float
    minterms: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        if not self.minterms:
            raise ValueError("weight bucket must be non-empty")
        arities = {len(m) for m in self.minterms}
        if len(arities) != 1:
            raise ValueError("mixed minterm arities in bucket")

    @property
    def arity(self) -> int:
        return len(self.minterms[0])


def canonical_extract(parfactor: Parfactor) -> list[tuple[tuple[int, ...], float]]:
    """One (minterm, log potential) pair per table row, in row order."""
    return [(bits, math.log(p)) for bits, p in enumerate_rows(parfactor)]


def bucket_by_weight(
    rows: Sequence[tuple[tuple[int, ...], float]]
) -> list[WeightBucket]:
    """Group (minterm, potential) rows by exact potential equality.

    Keys compare on the potential rather than its log so that equal mapped
    representatives can never drift apart through rounding.  Buckets come back
    in ascending weight order.
    """
    groups: dict[float, list[tuple[int, ...]]] = {}
    for bits, potential in rows:
        p = float(potential)
        if not p > 0.0:
            raise ValueError(f"potentials must be positive, got {p!r}")
        groups.setdefault(p, []).append(tuple(bits))
    return [WeightBucket(p, math.log(p), tuple(groups[p])) for p in sorted(groups)]


def _bits_to_int(bits: Sequence[int]) -> int:
    value = 0
    for b in bits:
        value = (value << 1) | b
    return value


def _cube_to_implicant(value: int, mask: int, arity: int) -> tuple[int | None, ...]:
    return tuple(
        ((value >> (arity - 1 - j)) & 1) if (mask >> (arity - 1 - j)) & 1 else None
        for j in range(arity)
    )


def _prime_implicants(arity: int, on_set: list[int]) -> list[tuple[int, int]]:
    """All prime implicants as (value, mask) cubes; mask bit set = fixed bit."""
    full = (1 << arity) - 1
    level: dict[int, set[int]] = {full: set(on_set)}
    primes: list[tuple[int, int]] = []
    while level:
        next_level: dict[int, set[int]] = {}
        for mask in sorted(level):
            values = level[mask]
            combined: set[int] = set()
            bits = [1 << k for k in range(arity) if mask & (1 << k)]
            for v in values:
                for bit in bits:
                    if v ^ bit in values:
                        combined.add(v)
                        combined.add(v ^ bit)
                        next_level.setdefault(mask ^ bit, set()).add(v & ~bit)
            primes.extend((v, mask) for v in sorted(values - combined))
        level = next_level
    return primes


def _greedy_cover(
    primes: list[tuple[int, int]],
    cover_sets: list[frozenset[int]],
    remaining: set[int],
    arity: int,
) -> set[int]:
    chosen: set[int] = set()
    while remaining:
        best = max(
            range(len(primes)),
            key=lambda i: (
                len(cover_sets[i] & remaining),
                tuple(-k for k in _implicant_key(_cube_to_implicant(*primes[i], arity))),
            ),
        )
        chosen.add(best)
        remaining -= cover_sets[best]
    return chosen


def _minimum_cover(
    primes: list[tuple[int, int]], on_set: list[int], arity: int
) -> tuple[set[int], bool]:
    """Indices of a minimum prime cover of the on-set.

    Essential primes are extracted first; the rest is solved exactly with
    Petrick's method (product of sums with absorption).  If the intermediate
    product grows past MAX_PETRICK_TERMS, a greedy set cover finishes the job
    and the result is flagged non-minimal.
    """
    cover_sets = [
        frozenset(m for m in on_set if (m & mask) == value) for value, mask in primes
    ]
    chosen: set[int] = set()
    remaining = set(on_set)
    while remaining:
        covering = {m: [i for i, cs in enumerate(cover_sets) if m in cs] for m in remaining}
        essentials = {idxs[0] for idxs in covering.values() if len(idxs) == 1}
        if not essentials:
            break
        chosen |= essentials
        for i in essentials:
            remaining -= cover_sets[i]
    if not remaining:
        return chosen, True

    products: list[frozenset[int]] = [frozenset()]
    for m in sorted(remaining):
        alternatives = [i for i, cs in enumerate(cover_sets) if m in cs]
        expanded = {p | {i} for p in products for i in alternatives}
        # absorption: keep only inclusion-minimal products
        minimal: list[frozenset[int]] = []
        for p in sorted(expanded, key=len):
            if not any(kept <= p for kept in minimal):
                minimal.append(p)
        products = minimal
        if len(products) > MAX_PETRICK_TERMS:
            return chosen | _greedy_cover(primes, cover_sets, remaining, arity), False

    best_size = min(len(p) for p in products)
    candidates = [chosen | p for p in products if len(p) == best_size]
    return (
        min(
            candidates,
            key=lambda c: sorted(
                _implicant_key(_cube_to_implicant(*primes[i], arity)) for i in c
            ),
        ),
        True,
    )


def minimize(bucket: WeightBucket) -> BoolFormula:
    """Minimal DNF cover of exactly the bucket's minterm set (no don't-cares).

    Among minimum covers the lexicographically smallest implicant set is
    returned, so output is deterministic.
    """
    arity = bucket.arity
    if arity > MAX_MINIMIZE_ARITY:
        raise ValueError(
            f"minimization is limited to {MAX_MINIMIZE_ARITY} atoms (got {arity}); "
            "emit the canonical formulas instead"
        )
    on_set = sorted({_bits_to_int(m) for m in bucket.minterms})
    primes = _prime_implicants(arity, on_set)
    cover, exact = _minimum_cover(primes, on_set, arity)
    implicants = sorted(
        (_cube_to_implicant(*primes[i], arity) for i in cover), key=_implicant_key
    )
    return BoolFormula(arity, tuple(implicants), minimal=exact)
