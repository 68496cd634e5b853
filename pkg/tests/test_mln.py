import math

import numpy as np
import pytest

import cofe
from cofe import (
    Atom,
    BoolFormula,
    Logvar,
    MLN,
    MLNFormula,
    ModelError,
    Parfactor,
    ParfactorModel,
    ParseError,
    PRV,
    ReductionParams,
    cofe as run_cofe,
    mln_joint,
    mln_to_parfactor_model,
    parse_mln,
    serialize_mln,
)
from conftest import eight_value_parfactor, random_model


class TestCofe:
    def test_smokers_two_formulas(self):
        model = cofe.build_smokers(2)
        mln, results = run_cofe(model, ReductionParams(0.1, 0.1, 1))
        assert len(mln.formulas) == 2
        low, high = mln.formulas
        assert low.weight == 0.0
        assert high.weight == pytest.approx(math.log(7.39), abs=1e-12)
        assert high.weight == pytest.approx(2.0001, abs=1e-3)
        # the low-weight formula holds exactly off (1,1,1); the high one on it
        assert set(low.formula.satisfying()) == {
            b for b in np.ndindex(2, 2, 2) if b != (1, 1, 1)
        }
        assert high.formula.satisfying() == [(1, 1, 1)]
        assert [str(a) for a in high.atoms] == ["friends(X,Y)", "smokes(X)", "smokes(Y)"]
        assert len(results) == 1

    def test_identity_strategy_emits_one_formula_per_distinct_value(self):
        pf = eight_value_parfactor()
        model = ParfactorModel((), (pf,))
        mln, _ = run_cofe(model, ReductionParams(0.0, 1.0, 1), strategy="none")
        assert len(mln.formulas) == 8

    def test_formula_order_follows_parfactor_then_weight(self):
        model = cofe.build_artificial()
        mln, results = run_cofe(model, ReductionParams(0.0, 1.0, 1), strategy="none")
        weights = [f.weight for f in mln.formulas]
        # nine parfactors, ascending weights inside each
        assert len(mln.formulas) == 16  # 7 two-bucket parfactors + 2 one-bucket
        pos = 0
        for result in results:
            count = cofe.distinct_count(result.mapped)
            chunk = weights[pos : pos + count]
            assert chunk == sorted(chunk)
            pos += count

    def test_single_valued_parfactor_keeps_atoms_on_tautology(self):
        pf = Parfactor("g", (PRV("a"), PRV("b")), (3.0, 3.0, 3.0, 3.0))
        mln, _ = run_cofe(ParfactorModel((), (pf,)), ReductionParams(0.0, 1.0, 1))
        (formula,) = mln.formulas
        assert formula.formula.is_tautology
        assert formula.formula.arity == 2
        assert [a.pred for a in formula.atoms] == ["a", "b"]

    def test_drop_zero_weight(self):
        model = cofe.build_smokers(2)
        full, _ = run_cofe(model, ReductionParams(0.1, 0.1, 1))
        trimmed, _ = run_cofe(model, ReductionParams(0.1, 0.1, 1), drop_zero_weight=True)
        assert len(full.formulas) == 2
        assert len(trimmed.formulas) == 1
        assert mln_joint(full).allclose(mln_joint(trimmed), atol=1e-12)

    def test_rejects_constrained_parfactors(self):
        x = Logvar("X", ("a", "b"))
        pf = Parfactor(
            "g",
            (PRV("r", (x,)),),
            (1.0, 2.0),
            cofe.Constraint((x,), frozenset({("a",)})),
        )
        with pytest.raises(ModelError, match="TOP"):
            run_cofe(ParfactorModel((x,), (pf,)), ReductionParams(0.1, 1.0, 1))

    def test_rejects_lowercase_collisions(self):
        pf = Parfactor("g", (PRV("A"), PRV("a")), (1.0, 2.0, 3.0, 4.0))
        with pytest.raises(ModelError, match="collide"):
            run_cofe(ParfactorModel((), (pf,)), ReductionParams(0.1, 1.0, 1))

    def test_unknown_strategy_rejected(self):
        with pytest.raises(ValueError):
            run_cofe(cofe.build_smokers(2), ReductionParams(0.1, 1.0, 1), strategy="kmeans")

    def test_rejects_duplicate_argument_atoms(self):
        x = Logvar("X", ("a", "b"))
        pf = Parfactor("g", (PRV("r", (x,)), PRV("r", (x,))), (1.0, 2.0, 3.0, 4.0))
        with pytest.raises(ModelError, match="duplicate argument"):
            run_cofe(ParfactorModel((x,), (pf,)), ReductionParams(0.1, 1.0, 1))


class TestMlnJoint:
    def test_canonical_extraction_matches_model_joint(self, rng):
        for _ in range(25):
            model = random_model(rng, max_ground=10)
            mln, _ = run_cofe(model, ReductionParams(0.0, 1.0, 1), strategy="none")
            a = cofe.joint_distribution(model)
            b = mln_joint(mln)
            assert a.atoms == b.atoms
            assert float(np.max(np.abs(a.probs - b.probs))) <= 1e-9

    def test_reduced_model_equivalence(self, rng):
        for _ in range(25):
            model = random_model(rng, max_ground=10)
            params = ReductionParams(
                float(rng.uniform(0.0, 0.5)),
                float(rng.uniform(0.05, 3.0)),
                int(rng.integers(1, 4)),
            )
            mln, results = run_cofe(model, params)
            mapped = cofe.apply_reduction(model, results)
            a = cofe.joint_distribution(mapped)
            b = mln_joint(mln)
            assert a.atoms == b.atoms
            assert float(np.max(np.abs(a.probs - b.probs))) <= 1e-9

    def test_empty_mln_is_uniform(self):
        jt = mln_joint(MLN((), ()))
        assert jt.atoms == ()
        np.testing.assert_allclose(jt.probs, [1.0])

    def test_zero_weight_formula_is_uniform(self):
        f = MLNFormula(0.0, (Atom("a"), Atom("b")), BoolFormula(2, ((1, 1),)))
        jt = mln_joint(MLN((), (f,)))
        np.testing.assert_allclose(jt.probs, [0.25] * 4, atol=1e-15)

    def test_single_ground_formula_is_logistic(self):
        w = 1.25
        f = MLNFormula(w, (Atom("a"),), BoolFormula(1, ((1,),)))
        jt = mln_joint(MLN((), (f,)))
        assert jt.probs[1] == pytest.approx(math.exp(w) / (1 + math.exp(w)), abs=1e-12)

    def test_domain_override(self):
        model = cofe.build_smokers(2)
        mln, _ = run_cofe(model, ReductionParams(0.1, 0.1, 1))
        bigger = {"X": ("alice", "bob", "eve"), "Y": ("alice", "bob", "eve")}
        jt = mln_joint(mln, domains=bigger)
        assert len(jt.atoms) == 12  # 9 friendship pairs + 3 smokers

    def test_cap_enforced(self):
        model = cofe.build_smokers(3)
        mln, _ = run_cofe(model, ReductionParams(0.1, 0.1, 1))
        with pytest.raises(cofe.TooLargeError):
            mln_joint(mln, cap=5)

    def test_tautology_keeps_randvars_in_scope(self):
        pf = Parfactor("g", (PRV("a"), PRV("b")), (3.0, 3.0, 3.0, 3.0))
        mln, _ = run_cofe(ParfactorModel((), (pf,)), ReductionParams(0.0, 1.0, 1))
        jt = mln_joint(mln)
        assert len(jt.atoms) == 2
        np.testing.assert_allclose(jt.probs, [0.25] * 4, atol=1e-15)


class TestSerialization:
    def test_smokers_round_trip(self):
        mln, _ = run_cofe(cofe.build_smokers(2), ReductionParams(0.1, 0.1, 1))
        text = serialize_mln(mln)
        again = parse_mln(text)
        assert again == mln
        assert serialize_mln(again) == text

    def test_canonical_random_round_trip(self, rng):
        # canonical extractions have no vacuous atoms, so round trips are exact
        for _ in range(15):
            model = random_model(rng, max_ground=10)
            mln, _ = run_cofe(model, ReductionParams(0.0, 1.0, 1), strategy="none")
            assert parse_mln(serialize_mln(mln)) == mln

    def test_weights_round_trip_bit_exactly(self):
        weights = (0.1 + 0.2, -1.5, 2.0001277349601105, 1e-17)
        formulas = tuple(
            MLNFormula(w, (Atom("a"),), BoolFormula(1, ((1,),))) for w in weights
        )
        parsed = parse_mln(serialize_mln(MLN((), formulas)))
        assert tuple(f.weight for f in parsed.formulas) == weights

    def test_tautology_serializes_as_true(self):
        f = MLNFormula(0.5, (Atom("a"),), BoolFormula.tautology(1))
        text = serialize_mln(MLN((), (f,)))
        assert "0.5  true" in text
        parsed = parse_mln(text)
        assert parsed.formulas[0].formula.is_tautology
        assert parsed.formulas[0].atoms == ()

    def test_comments_ignored(self):
        text = "// header\ndomain X = {a, b}\n\n0.5  r(X)  // trailing comment\n"
        mln = parse_mln(text)
        assert len(mln.formulas) == 1
        assert mln.formulas[0].weight == 0.5

    def test_parse_errors_carry_line_numbers(self):
        with pytest.raises(ParseError, match="line 1"):
            parse_mln("not-a-weight r(X)\n")
        with pytest.raises(ParseError, match="line 2"):
            parse_mln("domain X = {a}\n0.5  r(X) ^\n")

    def test_contradictory_literals_rejected(self):
        with pytest.raises(ParseError, match="contradictory"):
            parse_mln("0.5  a ^ !a\n")

    def test_conflicting_arity_rejected(self):
        with pytest.raises(ParseError):
            parse_mln("domain X = {a}\n0.5  r(X)\n0.7  r\n")

    def test_undeclared_logvar_rejected(self):
        with pytest.raises(ParseError):
            parse_mln("0.5  r(X)\n")

    def test_multi_literal_conjuncts_are_parenthesized(self):
        f = MLNFormula(
            1.0,
            (Atom("a"), Atom("b")),
            BoolFormula(2, ((0, None), (1, 1))),
        )
        text = serialize_mln(MLN((), (f,)))
        assert "!a v (a ^ b)" in text
        assert parse_mln(text) == MLN((), (f,))


class TestConvertBack:
    def test_smokers_round_trip_through_mln(self):
        model = cofe.build_smokers(2)
        mln, _ = run_cofe(model, ReductionParams(0.1, 0.1, 1))
        back = mln_to_parfactor_model(mln, name="social")
        assert back.parfactors[0].potentials == pytest.approx(
            model.parfactors[0].potentials, rel=1e-12
        )
        a = cofe.joint_distribution(model)
        b = cofe.joint_distribution(back)
        assert a.atoms == b.atoms
        np.testing.assert_allclose(a.probs, b.probs, atol=1e-12)

    def test_rejects_non_partition(self):
        f1 = MLNFormula(0.5, (Atom("a"),), BoolFormula(1, ((1,),)))
        f2 = MLNFormula(0.7, (Atom("a"),), BoolFormula.tautology(1))
        with pytest.raises(ModelError, match="overlap"):
            mln_to_parfactor_model(MLN((), (f1, f2)))

    def test_rejects_partial_cover(self):
        f = MLNFormula(0.5, (Atom("a"),), BoolFormula(1, ((1,),)))
        with pytest.raises(ModelError, match="cover"):
            mln_to_parfactor_model(MLN((), (f,)))

    def test_rejects_mixed_atom_tuples(self):
        f1 = MLNFormula(0.5, (Atom("a"),), BoolFormula.tautology(1))
        f2 = MLNFormula(0.7, (Atom("b"),), BoolFormula.tautology(1))
        with pytest.raises(ModelError, match="shared atom tuple"):
            mln_to_parfactor_model(MLN((), (f1, f2)))
