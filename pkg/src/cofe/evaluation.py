"""Evaluation harness: benchmark datasets, seeded Gaussian noise injection,
distance accounting and query error measurement.

Protocol per repetition: add zero-mean Gaussian noise to every potential of
the dataset model, run the reduce/extract/minimize pipeline on the noised
model, and record per parfactor the Hellinger distances between the original,
noised and mapped tables plus formula statistics.  The query error of a
repetition is the mean absolute deviation of representative-query answers
between the mapped model and the noised model.

Everything is deterministic given the config: repetition ``r`` draws from a
generator seeded with ``(seed, r)``.
"""

from __future__ import annotations

import csv
import io
import json
import statistics
from dataclasses import dataclass

import numpy as np

from .inference import mean_absolute_error, representative_queries
from .logic import formula_length
from .metrics import distinct_count, hellinger
from .mln import cofe
from .model import Logvar, ParfactorModel, Parfactor, PRV
from .reduction import ReductionParams, apply_reduction

NOISE_FLOOR = 1e-6

_PERSONS = ("alice", "bob", "eve")


def build_smokers(domain_size: int = 3) -> ParfactorModel:
    """The smokers model: one parfactor over friends(X, Y), smokes(X),
    smokes(Y) mapping assignment (1, 1, 1) to 7.39 and all others to 1.

    Groundings include X = Y; the persons domain grows with ``domain_size``.
    """
    if domain_size < 2:
        raise ValueError("smokers domain needs at least 2 persons")
    names = _PERSONS[:domain_size] + tuple(
        f"p{i:02d}" for i in range(len(_PERSONS), domain_size)
    )
    x = Logvar("X", names)
    y = Logvar("Y", names)
    friends = PRV("friends", (x, y))
    smokes_x = PRV("smokes", (x,))
    smokes_y = PRV("smokes", (y,))
    potentials = (1.0,) * 7 + (7.39,)
    parfactor = Parfactor("social", (friends, smokes_x, smokes_y), potentials)
    return ParfactorModel((x, y), (parfactor,))


def build_artificial() -> ParfactorModel:
    """Nine parfactors over disjoint triples of propositional randvars.

    Parfactor ``i`` (1-based) has ``i - 1`` ones followed by ``9 - i`` twos in
    canonical row order, so the two value groups sweep from 0:8 to 8:0.
    """
    parfactors = []
    for i in range(1, 10):
        prvs = tuple(PRV(f"x{i}_{j}") for j in (1, 2, 3))
        potentials = (1.0,) * (i - 1) + (2.0,) * (9 - i)
        parfactors.append(Parfactor(f"p{i}", prvs, potentials))
    return ParfactorModel((), tuple(parfactors))


def build_dataset(name: str, smokers_domain_size: int = 3) -> ParfactorModel:
    if name == "smokers":
        return build_smokers(smokers_domain_size)
    if name == "artificial":
        return build_artificial()
    raise ValueError(f"unknown dataset {name!r} (expected 'smokers' or 'artificial')")


def add_noise(model: ParfactorModel, sigma: float, seed) -> ParfactorModel:
    """Add N(0, sigma^2) noise to every potential, clamped at NOISE_FLOOR.

    Draws come from one seeded generator in canonical order: parfactors in
    model order, rows in row order.  With sigma = 0 the model is returned
    unchanged (no clamping applies).
    """
    if sigma < 0:
        raise ValueError(f"sigma must be non-negative, got {sigma!r}")
    if sigma == 0:
        return model
    rng = np.random.default_rng(seed)
    tables = []
    for pf in model.parfactors:
        noise = rng.normal(0.0, sigma, size=pf.size)
        tables.append(
            tuple(max(p + e, NOISE_FLOOR) for p, e in zip(pf.potentials, noise))
        )
    return model.with_tables(tables)


@dataclass(frozen=True)
class ExperimentConfig:
    """One evaluation setup; ``preset`` echoes the named parameter row."""

    dataset: str
    sigma: float
    params: ReductionParams
    seed: int = 0
    repetitions: int = 20
    smokers_domain_size: int = 3
    preset: str = ""

    def __post_init__(self) -> None:
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if self.sigma < 0:
            raise ValueError("sigma must be non-negative")
        if self.dataset not in ("smokers", "artificial"):
            raise ValueError(f"unknown dataset {self.dataset!r}")
        if self.dataset == "smokers" and self.smokers_domain_size < 2:
            raise ValueError("smokers domain needs at least 2 persons")


PRESETS: dict[str, ExperimentConfig] = {
    "smokers1": ExperimentConfig("smokers", 0.5, ReductionParams(0.3, 2.0, 2), preset="smokers1"),
    "smokers2": ExperimentConfig("smokers", 1.0, ReductionParams(0.3, 2.0, 2), preset="smokers2"),
    "art1": ExperimentConfig("artificial", 0.1, ReductionParams(0.05, 0.2, 2), preset="art1"),
    "art2": ExperimentConfig("artificial", 0.2, ReductionParams(0.1, 0.4, 2), preset="art2"),
}


@dataclass(frozen=True)
class ParfactorRecord:
    """Distances and formula statistics for one parfactor in one repetition."""

    repetition: int
    parfactor: str
    strategy: str
    distinct_before: int
    distinct_after: int
    formula_count: int
    formula_lengths: tuple[int, ...]
    dist_orig_noised: float
    dist_orig_mapped: float
    dist_noised_mapped: float


@dataclass(frozen=True)
class ExperimentReport:
    """All records of one experiment plus per-repetition query errors."""

    config: ExperimentConfig
    noise_floor: float
    records: tuple[ParfactorRecord, ...]
    errors: tuple[float, ...]

    @property
    def median_error(self) -> float:
        return statistics.median(self.errors)

    @property
    def error_iqr(self) -> tuple[float, float]:
        qs = statistics.quantiles(self.errors, n=4) if len(self.errors) > 1 else [
            self.errors[0]
        ] * 3
        return (qs[0], qs[2])

    def per_parfactor(self, name: str) -> list[ParfactorRecord]:
        return [r for r in self.records if r.parfactor == name]

    def parfactor_names(self) -> list[str]:
        seen: list[str] = []
        for r in self.records:
            if r.parfactor not in seen:
                seen.append(r.parfactor)
        return seen

    def to_json(self) -> str:
        data = {
            "config": {
                "dataset": self.config.dataset,
                "preset": self.config.preset,
                "sigma": self.config.sigma,
                "epsilon": self.config.params.epsilon,
                "theta_d": self.config.params.theta_d,
                "theta_n": self.config.params.theta_n,
                "seed": self.config.seed,
                "repetitions": self.config.repetitions,
                "smokers_domain_size": self.config.smokers_domain_size,
            },
            "noise_floor": self.noise_floor,
            "records": [
                {
                    "repetition": r.repetition,
                    "parfactor": r.parfactor,
                    "strategy": r.strategy,
                    "distinct_before": r.distinct_before,
                    "distinct_after": r.distinct_after,
                    "formula_count": r.formula_count,
                    "formula_lengths": list(r.formula_lengths),
                    "dist_orig_noised": r.dist_orig_noised,
                    "dist_orig_mapped": r.dist_orig_mapped,
                    "dist_noised_mapped": r.dist_noised_mapped,
                }
                for r in self.records
            ],
            "errors": list(self.errors),
            "median_error": self.median_error,
            "error_iqr": list(self.error_iqr),
        }
        return json.dumps(data, indent=2, sort_keys=True)

    def to_csv(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(
            [
                "repetition",
                "parfactor",
                "strategy",
                "distinct_before",
                "distinct_after",
                "formula_count",
                "formula_lengths",
                "dist_orig_noised",
                "dist_orig_mapped",
                "dist_noised_mapped",
                "error",
            ]
        )
        for r in self.records:
            writer.writerow(
                [
                    r.repetition,
                    r.parfactor,
                    r.strategy,
                    r.distinct_before,
                    r.distinct_after,
                    r.formula_count,
                    ";".join(str(n) for n in r.formula_lengths),
                    repr(r.dist_orig_noised),
                    repr(r.dist_orig_mapped),
                    repr(r.dist_noised_mapped),
                    repr(self.errors[r.repetition]),
                ]
            )
        return out.getvalue()

    def fig3_rows(self) -> list[tuple[str, float, float, float]]:
        """Median of the three distances per parfactor, for plotting."""
        rows = []
        for name in self.parfactor_names():
            recs = self.per_parfactor(name)
            rows.append(
                (
                    name,
                    statistics.median(r.dist_orig_noised for r in recs),
                    statistics.median(r.dist_orig_mapped for r in recs),
                    statistics.median(r.dist_noised_mapped for r in recs),
                )
            )
        return rows


def run_experiment(config: ExperimentConfig) -> ExperimentReport:
    """Run the noise/reduce/extract protocol for every repetition."""
    model = build_dataset(config.dataset, config.smokers_domain_size)
    queries = representative_queries(model)
    records: list[ParfactorRecord] = []
    errors: list[float] = []
    for rep in range(config.repetitions):
        noised = add_noise(model, config.sigma, seed=[config.seed, rep])
        mln, results = cofe(noised, config.params)
        mapped = apply_reduction(noised, results)
        formula_pos = 0
        for pf, npf, mpf, result in zip(
            model.parfactors, noised.parfactors, mapped.parfactors, results
        ):
            count = distinct_count(result.mapped)
            formulas = mln.formulas[formula_pos : formula_pos + count]
            formula_pos += count
            records.append(
                ParfactorRecord(
                    repetition=rep,
                    parfactor=pf.name,
                    strategy=result.strategy,
                    distinct_before=distinct_count(npf.potentials),
                    distinct_after=count,
                    formula_count=count,
                    formula_lengths=tuple(formula_length(f.formula) for f in formulas),
                    dist_orig_noised=hellinger(pf.potentials, npf.potentials),
                    dist_orig_mapped=hellinger(pf.potentials, mpf.potentials),
                    dist_noised_mapped=result.distance,
                )
            )
        errors.append(mean_absolute_error(mapped, noised, queries))
    return ExperimentReport(config, NOISE_FLOOR, tuple(records), tuple(errors))
