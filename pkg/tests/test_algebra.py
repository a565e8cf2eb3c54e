import random

import pytest

from modalcirc import algebra as alg
from modalcirc import decision, formula as fm, kripke
from modalcirc.algebra import (
    Conjunct,
    InvalidWitnessError,
    ModalAlgebra,
    UniversalSentence,
    algebra_validates,
    complex_algebra,
    dual_frame,
    eval_universal,
    parse_sentence,
    subalgebra_generated,
    transfer_countermodel,
)
from modalcirc.formula import Box, Neg, Top, Var
from modalcirc.kripke import Frame

import helpers

p0, p1 = Var("p0"), Var("p1")

REFLEXIVE_POINT = Frame(1, [(0, 0)])
DEAD_END = Frame(1)
TWO_CLUSTER = Frame(2, [(0, 0), (0, 1), (1, 0), (1, 1)])


class TestConstruction:
    def test_complex_algebra(self):
        a = complex_algebra(REFLEXIVE_POINT)
        assert a.box_table == {0: 0, 1: 1}
        b = complex_algebra(DEAD_END)
        assert b.box_table == {0: 1, 1: 1}
        c = complex_algebra(Frame(3, [(0, 1), (1, 2), (0, 2)]))
        assert len(c.carrier) == 8

    def test_closure_validation(self):
        with pytest.raises(ValueError):
            ModalAlgebra(TWO_CLUSTER, [[], [0], [0, 1]])  # no complement of {0}
        with pytest.raises(ValueError):
            ModalAlgebra(Frame(2, [(0, 1)]), [[], [0, 1]])  # box(empty) = {1} missing
        with pytest.raises(ValueError):
            ModalAlgebra(TWO_CLUSTER, [[0, 1]])  # empty set missing

    def test_subalgebra_generated(self):
        assert subalgebra_generated(REFLEXIVE_POINT, [[]]).carrier == (0, 1)
        assert subalgebra_generated(TWO_CLUSTER, [[]]).carrier == (0, 3)
        chain = Frame(2, [(0, 1)])
        assert len(subalgebra_generated(chain, [[]]).carrier) == 4
        assert len(subalgebra_generated(chain, [[1]]).carrier) == 4
        full = subalgebra_generated(TWO_CLUSTER, [[0], [1]])
        assert len(full.carrier) == 4

    def test_generated_carrier_is_closed_under_random_combinations(self):
        rng = random.Random(2)
        frame = Frame(4, [(0, 0), (0, 1), (1, 0), (1, 1), (0, 2), (1, 2), (2, 3), (0, 3), (1, 3)])
        a = subalgebra_generated(frame, [[0, 1], [2]])
        carrier = set(a.carrier)
        elements = list(a.carrier)
        for _ in range(200):
            x = rng.choice(elements)
            y = rng.choice(elements)
            assert a.full ^ x in carrier
            assert x & y in carrier
            assert a.box_table[x] in carrier

    def test_json_round_trip(self):
        a = subalgebra_generated(TWO_CLUSTER, [[0]])
        assert ModalAlgebra.from_json(a.to_json()) == a


class TestValidity:
    def test_top_always_valid(self):
        assert algebra_validates(complex_algebra(TWO_CLUSTER), Top())

    def test_agreement_with_frame_validity(self):
        rng = random.Random(3)
        formulas = [
            fm.named_axiom(name) for name in ("k", "4", "t", "lob", "m", "e", "w4")
        ]
        formulas += [helpers.random_formula(rng, ("p0", "p1"), 2) for _ in range(5)]
        for frame in helpers.all_frames_upto_iso(3):
            a = complex_algebra(frame)
            for f in formulas:
                assert algebra_validates(a, f) == kripke.frame_valid(frame, f)

    def test_two_cluster_bounds(self):
        a = complex_algebra(TWO_CLUSTER)
        assert not algebra_validates(a, fm.bounded_cycle_axiom(1, fm.scheme_variables(1)))
        assert algebra_validates(a, fm.bounded_cycle_axiom(2, fm.scheme_variables(2)))

    def test_budget(self):
        a = complex_algebra(Frame(3, []))
        with pytest.raises(alg.BudgetExceededError):
            algebra_validates(a, fm.named_axiom("k"), cap=8)


class TestDualFrame:
    def test_identity_and_loop(self):
        two_ident = ModalAlgebra(REFLEXIVE_POINT, [[], [0]])
        assert dual_frame(two_ident) == REFLEXIVE_POINT
        two_vacuous = ModalAlgebra(DEAD_END, [[], [0]])
        assert dual_frame(two_vacuous) == DEAD_END

    def test_round_trip_on_small_frames(self):
        for frame in helpers.all_frames_upto_iso(3):
            assert dual_frame(complex_algebra(frame)) == frame

    def test_proper_subalgebra_atoms(self):
        a = ModalAlgebra(TWO_CLUSTER, [[], [0, 1]])
        dual = dual_frame(a)
        assert dual == Frame(1, [(0, 0)])
        # the powerset of the dual contains a copy of the 2-element algebra
        assert len(complex_algebra(dual).carrier) == 2

    def test_transitive_algebra_has_transitive_dual(self):
        rng = random.Random(4)
        four = fm.named_axiom("4")
        for _ in range(30):
            frame = helpers.random_transitive_frame(rng, 5, 2)
            gens = [rng.randrange(1 << frame.world_count) for _ in range(2)]
            a = subalgebra_generated(frame, gens)
            assert algebra_validates(a, four)
            assert kripke.check_property(dual_frame(a), "transitive")


class TestUniversalSentences:
    def test_parse(self):
        s = parse_sentence("forall p0 p1 . (box p0 = top | !(p0 = p1)) & (p0 = p0)")
        assert s.variables == ("p0", "p1")
        assert len(s.conjuncts) == 2
        assert s.conjuncts[0].positives == ((Box(p0), Top()),)
        assert s.conjuncts[0].negatives == ((p0, p1),)

    def test_parse_parenthesized_terms(self):
        s = parse_sentence("forall p0 p1 . ((p0 & p1) = bot)")
        assert s.conjuncts[0].positives[0][0] == fm.And(p0, p1)

    def test_unquantified_variable_rejected(self):
        with pytest.raises(ValueError):
            parse_sentence("forall p0 . (p1 = top)")
        with pytest.raises(ValueError):
            UniversalSentence(("p0",), (Conjunct(((p1, Top()),), ()),))

    def test_reflexive_equation_holds(self):
        s = parse_sentence("forall p0 . (p0 = p0)")
        for frame in helpers.all_frames_upto_iso(2):
            holds, witness = eval_universal(complex_algebra(frame), s)
            assert holds and witness is None

    def test_vacuous_box_example(self):
        s = parse_sentence("forall p0 . (box p0 = top | !(p0 = top))")
        holds, _ = eval_universal(complex_algebra(DEAD_END), s)
        assert holds
        s2 = parse_sentence("forall p0 . (box p0 = top)")
        holds, witness = eval_universal(complex_algebra(Frame(2, [(0, 1)])), s2)
        assert not holds and witness is not None

    def test_equational_sentences_match_algebra_validity(self):
        rng = random.Random(5)
        for frame in helpers.all_frames_upto_iso(2):
            a = complex_algebra(frame)
            for _ in range(4):
                f = helpers.random_formula(rng, ("p0", "p1"), 2)
                sentence = UniversalSentence(
                    ("p0", "p1"), (Conjunct(((f, Top()),), ()),)
                )
                holds, _ = eval_universal(a, sentence)
                assert holds == algebra_validates(a, f)

    def test_witness_is_deterministic_and_genuine(self):
        a = complex_algebra(TWO_CLUSTER)
        c1 = fm.bounded_cycle_axiom(1, fm.scheme_variables(1))
        sentence = UniversalSentence(("p0", "p1"), (Conjunct(((c1, Top()),), ()),))
        holds1, w1 = eval_universal(a, sentence)
        holds2, w2 = eval_universal(a, sentence)
        assert not holds1 and w1 == w2
        assignment, index = w1
        slots = {"p0": 0, "p1": 1}
        value = alg._compile_term(a, c1, slots)(assignment)
        assert value != a.full


class TestTransfer:
    def _failing_sentence(self, algebra, formula, names=("p0", "p1")):
        sentence = UniversalSentence(tuple(names), (Conjunct(((formula, Top()),), ()),))
        holds, witness = eval_universal(algebra, sentence)
        assert not holds
        return sentence, witness

    def test_t_axiom_transfer(self):
        frame = Frame(4, [(0, 0), (0, 1), (1, 0), (1, 1), (0, 2), (1, 2), (0, 3), (1, 3), (2, 3)])
        a = subalgebra_generated(frame, [[0, 1], [2]])
        sentence, witness = self._failing_sentence(a, fm.named_axiom("t"), ("p0",))
        out = transfer_countermodel(frame, a, 2, sentence, witness)
        assert kripke.validates_logic(out.frame, decision.LogicSpec(2))
        holds, _ = eval_universal(out, sentence)
        assert not holds
        assert len(out.carrier) == 1 << out.frame.world_count

    def test_transfer_from_full_powerset(self):
        frame = TWO_CLUSTER
        a = complex_algebra(frame)
        c1 = fm.bounded_cycle_axiom(1, fm.scheme_variables(1))
        sentence, witness = self._failing_sentence(a, c1)
        out = transfer_countermodel(frame, a, 2, sentence, witness)
        holds, _ = eval_universal(out, sentence)
        assert not holds
        assert kripke.validates_logic(out.frame, decision.LogicSpec(2))

    def test_transfer_with_negated_equations(self):
        # claims the box operator is injective; refuted wherever two
        # distinct sets share their box image
        sentence = parse_sentence("forall p0 p1 . (p0 = p1 | !(box p0 = box p1))")
        frame = Frame(2, [(0, 1), (1, 1)])
        a = complex_algebra(frame)
        holds, witness = eval_universal(a, sentence)
        assert not holds
        out = transfer_countermodel(frame, a, 1, sentence, witness)
        holds2, _ = eval_universal(out, sentence)
        assert not holds2

    def test_rejects_bad_witness(self):
        frame = TWO_CLUSTER
        a = complex_algebra(frame)
        c1 = fm.bounded_cycle_axiom(1, fm.scheme_variables(1))
        sentence, witness = self._failing_sentence(a, c1)
        good_assignment, index = witness
        with pytest.raises(InvalidWitnessError):
            transfer_countermodel(frame, a, 2, sentence, ((a.full, a.full), index))
        with pytest.raises(InvalidWitnessError):
            transfer_countermodel(frame, a, 2, sentence, (good_assignment[:1], index))
        with pytest.raises(InvalidWitnessError):
            transfer_countermodel(frame, a, 2, sentence, (good_assignment, 5))

    def test_rejects_non_transitive_frame(self):
        frame = Frame(2, [(0, 1), (1, 0)])
        a = complex_algebra(frame)
        sentence, witness = self._failing_sentence(a, fm.named_axiom("t"), ("p0",))
        with pytest.raises(kripke.NotTransitiveError):
            transfer_countermodel(frame, a, 2, sentence, witness)

    def test_rejects_mismatched_frame(self):
        a = complex_algebra(TWO_CLUSTER)
        c1 = fm.bounded_cycle_axiom(1, fm.scheme_variables(1))
        sentence, witness = self._failing_sentence(a, c1)
        with pytest.raises(ValueError):
            transfer_countermodel(DEAD_END, a, 2, sentence, witness)


class TestModelAlgebraAgreement:
    def test_truth_sets_match_term_values(self):
        # when variables take carrier values, term evaluation in the
        # algebra computes exactly the model truth set
        rng = random.Random(9)
        for frame in helpers.all_frames_upto_iso(3):
            a = complex_algebra(frame)
            for _ in range(4):
                f = helpers.random_formula(rng, ("p0", "p1"), 2)
                masks = (
                    rng.randrange(1 << frame.world_count),
                    rng.randrange(1 << frame.world_count),
                )
                model = kripke.Model(frame, {"p0": masks[0], "p1": masks[1]})
                term = alg._compile_term(a, f, {"p0": 0, "p1": 1})
                truth = kripke.truth_set(model, f)
                assert term(masks) == sum(1 << x for x in truth)
