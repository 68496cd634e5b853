"""Acceptance suite: one test per release criterion.

Each test prints a single [PASS]/[FAIL] line (visible with ``pytest -s``) and
enforces the criterion's stated tolerances and runtime bound.  Statistical
criteria run over the fixed seed list: base seed 0, repetitions 0..19.
"""

import itertools
import statistics
import time

import numpy as np
import pytest

import cofe
from cofe import (
    GroundAtom,
    Parfactor,
    ParfactorModel,
    PRV,
    Query,
    ReductionParams,
    dbscan_1d,
    quantile_groups,
)
from cofe.evaluation import PRESETS, run_experiment
from cofe.logic import WeightBucket, minimize
from cofe.reduction import IDENTITY
from conftest import eight_value_parfactor, random_model

EIGHT_VALUES = (1.0, 4.7, 4.8, 4.9, 5.0, 5.1, 5.2, 5.3)


def check(cid, description, ok, elapsed, budget):
    status = "PASS" if ok and elapsed < budget else "FAIL"
    print(f"[{status}] criterion {cid}: {description} ({elapsed:.2f}s, budget {budget:.0f}s)")
    assert ok, f"criterion {cid}: {description}"
    assert elapsed < budget, f"criterion {cid}: runtime {elapsed:.2f}s over {budget}s"


@pytest.fixture(scope="module")
def preset_reports():
    start = time.perf_counter()
    reports = {name: run_experiment(PRESETS[name]) for name in PRESETS}
    reports["elapsed"] = time.perf_counter() - start
    return reports


def test_criterion_1_reduction_table():
    start = time.perf_counter()
    quartiles = quantile_groups(EIGHT_VALUES, 4)
    ok = quartiles == ((0, 1), (2, 3), (4, 5), (6, 7))
    clusters = dbscan_1d(EIGHT_VALUES, radius=1.0, min_pts=1)
    ok &= clusters == ((0,), (1, 2, 3, 4, 5, 6, 7))
    means = [sum(EIGHT_VALUES[i] for i in g) / len(g) for g in clusters]
    ok &= means[0] == 1.0 and abs(means[1] - 5.0) < 1e-12
    check(
        1,
        "quartile grouping and two DBSCAN clusters with means 1 and 5.0",
        ok,
        time.perf_counter() - start,
        1.0,
    )


def test_criterion_2_smokers_clean_extraction():
    start = time.perf_counter()
    model = cofe.build_smokers(2)
    mln, _ = cofe.cofe(model, ReductionParams(0.1, 0.1, 1))
    ok = len(mln.formulas) == 2
    if ok:
        low, high = mln.formulas
        ok &= abs(low.weight - 0.0) == 0.0
        ok &= abs(high.weight - 2.0001) <= 1e-3
        off = {b for b in itertools.product((0, 1), repeat=3) if b != (1, 1, 1)}
        ok &= set(low.formula.satisfying()) == off
        ok &= high.formula.satisfying() == [(1, 1, 1)]
    check(
        2,
        "two formulas with weights 0 and 2.0001 +/- 1e-3, matching truth tables",
        ok,
        time.perf_counter() - start,
        1.0,
    )


def test_criterion_3_canonical_round_trip():
    start = time.perf_counter()
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(200):
        model = random_model(rng, max_parfactors=3, max_args=3, max_domain=2)
        mln, _ = cofe.cofe(model, ReductionParams(0.0, 1.0, 1))
        a = cofe.joint_distribution(model)
        b = cofe.mln_joint(mln)
        assert a.atoms == b.atoms
        worst = max(worst, float(np.max(np.abs(a.probs - b.probs))))
    check(
        3,
        f"200 random models: canonical MLN joint equals model joint (max diff {worst:.2e})",
        worst <= 1e-9,
        time.perf_counter() - start,
        30.0,
    )


def test_criterion_4_minimization_oracle():
    start = time.perf_counter()
    rows = list(itertools.product((0, 1), repeat=3))
    cubes = []
    for cells in itertools.product((0, 1, None), repeat=3):
        cubes.append(
            frozenset(
                itertools.product(*(((0, 1) if c is None else (c,)) for c in cells))
            )
        )

    def brute_minimum(on):
        inside = [c for c in cubes if c <= on]
        for size in range(1, len(on) + 1):
            for combo in itertools.combinations(inside, size):
                if frozenset().union(*combo) == on:
                    return size
        raise AssertionError("uncoverable set")

    ok = True
    for bitmask in range(1, 256):
        chosen = tuple(rows[i] for i in range(8) if bitmask & (1 << i))
        formula = minimize(WeightBucket(1.5, 0.4054651081081644, chosen))
        ok &= set(formula.satisfying()) == set(chosen)
        ok &= len(formula.implicants) == brute_minimum(frozenset(chosen))
        ok &= formula.minimal
    check(
        4,
        "all 255 three-atom buckets minimize to truth-equivalent minimum covers",
        ok,
        time.perf_counter() - start,
        60.0,
    )


def test_criterion_5_budget_guarantee():
    start = time.perf_counter()
    rng = np.random.default_rng(5)
    ok = True
    for _ in range(500):
        n = int(rng.integers(1, 5))
        potentials = tuple(10.0 - rng.uniform(0.0, 10.0, size=1 << n))  # in (0, 10]
        pf = Parfactor("g", tuple(PRV(f"v{i}") for i in range(n)), potentials)
        params = ReductionParams(
            float(rng.uniform(0.0, 0.5)),
            float(rng.uniform(0.01, 5.0)),
            int(rng.integers(1, 5)),
        )
        result = cofe.select_reduction(pf, params)
        within = cofe.hellinger(pf.potentials, result.mapped) <= params.epsilon
        ok &= within or result.strategy == IDENTITY
    check(
        5,
        "500 random parfactors: selected reduction within budget or identity",
        ok,
        time.perf_counter() - start,
        10.0,
    )


def test_criterion_6_preset_statistics(preset_reports):
    start = time.perf_counter() - preset_reports["elapsed"]
    s1 = preset_reports["smokers1"]
    two_formula_runs = [r for r in s1.records if r.formula_count == 2]
    rate = len(two_formula_runs) / len(s1.records)
    ok = rate >= 0.80
    ok &= all(
        length == 3 for r in two_formula_runs for length in r.formula_lengths
    )
    ok &= s1.median_error <= 0.05

    art1 = preset_reports["art1"]
    for name in art1.parfactor_names():
        counts = [r.formula_count for r in art1.per_parfactor(name)]
        ok &= statistics.median(counts) in (1, 2)
    for record in art1.records:
        if record.formula_count == 2:
            ok &= all(1 <= length <= 4 for length in record.formula_lengths)
        if record.formula_count == 1:
            ok &= record.formula_lengths == (0,)  # the atom-free tautology
    ok &= art1.median_error <= 0.03

    ok &= preset_reports["art2"].median_error <= 0.06

    s2 = preset_reports["smokers2"]  # recorded without a pass/fail bound
    elapsed = time.perf_counter() - start
    check(
        6,
        "preset statistics: smokers1 2-formula rate "
        f"{rate:.0%}, medians E s1={s1.median_error:.3f} a1={art1.median_error:.3f} "
        f"a2={preset_reports['art2'].median_error:.3f} "
        f"(smokers2 recorded: E={s2.median_error:.3f})",
        ok,
        elapsed,
        120.0,
    )


def test_criterion_7_denoising_direction(preset_reports):
    start = time.perf_counter()
    s1 = preset_reports["smokers1"]
    s1_mapped = statistics.median(r.dist_orig_mapped for r in s1.records)
    s1_noised = statistics.median(r.dist_orig_noised for r in s1.records)
    ok = s1_mapped <= 0.05 and s1_mapped <= s1_noised

    art1 = preset_reports["art1"]
    a1_mapped = statistics.median(r.dist_orig_mapped for r in art1.records)
    a1_noised = statistics.median(r.dist_orig_noised for r in art1.records)
    ok &= a1_mapped <= 0.5 * a1_noised
    check(
        7,
        f"denoising: smokers1 mapped {s1_mapped:.4f} <= min(0.05, noised {s1_noised:.4f}); "
        f"art1 mapped {a1_mapped:.4f} <= half of noised {a1_noised:.4f}",
        ok,
        time.perf_counter() - start,
        60.0,
    )


def test_criterion_8_inference_correctness():
    start = time.perf_counter()
    rng = np.random.default_rng(8)
    ok = True
    for _ in range(100):
        model = random_model(rng, max_ground=12)
        jt = cofe.joint_distribution(model)
        target = jt.atoms[int(rng.integers(0, len(jt.atoms)))]
        q = Query(target)
        ve = cofe.query(model, q)
        ok &= abs(ve - jt.marginal({target: 1})) <= 1e-9
        scaled = model.with_tables(
            [
                tuple(p * (13.0 if i == 0 else 1.0) for p in pf.potentials)
                for i, pf in enumerate(model.parfactors)
            ]
        )
        ok &= abs(cofe.query(scaled, q) - ve) <= 1e-9
    check(
        8,
        "100 random models: VE matches brute force and is scale invariant (1e-9)",
        ok,
        time.perf_counter() - start,
        30.0,
    )


def test_criterion_9_exponential_to_linear_sparsity():
    start = time.perf_counter()
    n = 8
    prvs = tuple(PRV(f"b{i}") for i in range(n))
    potentials = tuple(10.0 if i >= 128 else 1.0 for i in range(1 << n))
    pf = Parfactor("wide", prvs, potentials)
    model = ParfactorModel((), (pf,))
    mln, _ = cofe.cofe(model, ReductionParams(0.3, 1.0, 1))
    ok = len(mln.formulas) == 2
    if ok:
        low, high = mln.formulas
        ok &= low.formula.implicants == ((0,) + (None,) * 7,)
        ok &= high.formula.implicants == ((1,) + (None,) * 7,)
    check(
        9,
        "8-argument two-valued parfactor extracts 2 formulas instead of 256",
        ok,
        time.perf_counter() - start,
        5.0,
    )
