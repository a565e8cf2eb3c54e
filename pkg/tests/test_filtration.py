import random

import pytest

from modalcirc import formula as fm, kripke
from modalcirc.filtration import (
    CoreTooLargeError,
    PhiNotClosedError,
    class_formula,
    critical_point,
    filter_model,
    refine,
)
from modalcirc.formula import Box, Neg, Var
from modalcirc.kripke import Frame, Model

import helpers

p0, p1 = Var("p0"), Var("p1")


def reflexive_chain(length):
    return Frame(length, [(i, j) for i in range(length) for j in range(i, length)])


def full_cluster(size):
    return Frame(size, [(i, j) for i in range(size) for j in range(size)])


def check_invariants(model, result):
    # class count bound, relation coverage, and the truth transfer
    assert len(result.classes) <= 2 ** len(result.phi)
    for x in range(model.frame.world_count):
        for y in model.frame.successors(x):
            assert result.r_phi.has_edge(result.class_of[x], result.class_of[y])
    quotient = result.filtered_model()
    for f in result.phi:
        truth = kripke.truth_set(quotient, f)
        for x in range(model.frame.world_count):
            assert (result.class_of[x] in truth) == (
                x in kripke.truth_set(model, f)
            ), fm.pretty(f)
        for idx in range(len(result.classes)):
            assert result.class_truth(idx, f) == (idx in truth)


class TestFilter:
    def test_single_reflexive_world(self):
        result = filter_model(Model(Frame(1, [(0, 0)]), {"p0": [0]}), [p0])
        assert len(result.classes) == 1
        assert result.r_phi.has_edge(0, 0)

    def test_identical_worlds_merge(self):
        result = filter_model(Model(Frame(2), {"p0": [0, 1]}), [p0])
        assert len(result.classes) == 1
        assert result.classes[0] == (0, 1)

    def test_errors(self):
        with pytest.raises(kripke.NotTransitiveError):
            filter_model(Model(Frame(2, [(0, 1), (1, 0)]), {}), [p0])
        with pytest.raises(PhiNotClosedError):
            filter_model(Model(Frame(1), {}), [Box(p0)])

    def test_class_count_bound_random(self):
        rng = random.Random(2)
        for _ in range(60):
            frame = helpers.random_transitive_frame(rng, 8, 3)
            model = helpers.random_model(rng, frame)
            phi = helpers.random_closed_set(rng)
            result = filter_model(model, phi)
            check_invariants(model, result)


class TestCriticalPoint:
    def test_degenerate_cluster_has_empty_core(self):
        model = Model(Frame(2, [(0, 1)]), {"p0": [1]})
        result = filter_model(model, fm.subformula_closure([p0]))
        dec = kripke.clusters(result.r_phi)
        for cluster in dec.clusters:
            _, core = critical_point(result, cluster, 0)
            assert core == frozenset()

    def test_reflexive_bound_one_is_virtually_last(self):
        # reflexive chain whose endpoints share a valuation collapses to
        # a two-class quotient cluster; the critical point's successors
        # inside the cluster all land in its one-class core
        model = Model(reflexive_chain(3), {"p0": [0, 2]})
        result = filter_model(model, fm.subformula_closure([p0]))
        dec = kripke.clusters(result.r_phi)
        assert dec.kinds == ("non_degenerate",)
        x_star, core = critical_point(result, dec.clusters[0], 1)
        assert len(core) == 1
        rows = model.frame.rows
        (core_class,) = core
        for y in range(model.frame.world_count):
            if rows[x_star] >> y & 1 and result.class_of[y] in dec.clusters[0]:
                assert result.class_of[y] == core_class

    def test_separated_cluster_core_is_whole_cluster(self):
        for size in (2, 3, 4):
            frame = full_cluster(size)
            model = Model(frame, {f"p{i}": [i] for i in range(size)})
            phi = fm.subformula_closure([Var(f"p{i}") for i in range(size)])
            result = filter_model(model, phi)
            cluster = tuple(range(size))
            x_star, core = critical_point(result, cluster, size)
            assert len(core) == size
            # minimality: every candidate sees the whole cluster
            for world in range(size):
                seen = {
                    a
                    for a in cluster
                    if any(frame.rows[world] >> y & 1 for y in result.classes[a])
                }
                assert len(seen) == size
            with pytest.raises(CoreTooLargeError):
                critical_point(result, cluster, size - 1)

    def test_rejects_non_cluster(self):
        # with a boxed formula in the set the quotient keeps the chain
        # shape, so the two classes do not form a cluster
        model = Model(Frame(2, [(0, 1)]), {"p0": [1]})
        result = filter_model(model, fm.subformula_closure([Box(p0)]))
        assert not result.r_phi.has_edge(1, 0) or not result.r_phi.has_edge(0, 1)
        with pytest.raises(ValueError):
            critical_point(result, (0, 1), 3)


class TestRefine:
    def test_base_bound_zero_is_irreflexive(self):
        rng = random.Random(5)
        for _ in range(30):
            frame = helpers.random_transitive_frame(rng, 7, 0)
            model = helpers.random_model(rng, frame)
            result = filter_model(model, helpers.random_closed_set(rng))
            _, refined = refine(result, 0, "base")
            assert kripke.check_property(refined.frame, "irreflexive")
            assert kripke.circumference(refined.frame) == 0

    def test_reflexive_bound_one_gives_partial_order(self):
        rng = random.Random(6)
        for _ in range(30):
            frame = helpers.random_transitive_frame(rng, 7, 1, reflexive=True)
            model = helpers.random_model(rng, frame)
            result = filter_model(model, helpers.random_closed_set(rng))
            _, refined = refine(result, 1, "reflexive")
            assert kripke.check_property(refined.frame, "reflexive")
            assert kripke.check_property(refined.frame, "antisymmetric")

    def test_linear_needs_connected(self):
        # two isolated worlds separated by boxed formulas give an
        # unrelated pair of classes
        model = Model(Frame(2), {"p0": [0], "p1": [1]})
        result = filter_model(model, fm.subformula_closure([Box(p0), Box(p1)]))
        assert result.r_phi.rows == (0, 0)
        with pytest.raises(ValueError):
            refine(result, 1, "linear")

    def test_reflexive_preconditions(self):
        # a dead end keeps "box bot" true but "bot" false, so its class
        # cannot loop in the quotient
        model = Model(Frame(1), {})
        result = filter_model(model, fm.subformula_closure([Box(fm.Bot())]))
        assert not result.r_phi.has_edge(0, 0)
        with pytest.raises(ValueError):
            refine(result, 1, "reflexive")
        model2 = Model(Frame(1, [(0, 0)]), {"p0": [0]})
        result2 = filter_model(model2, fm.subformula_closure([Box(p0)]))
        with pytest.raises(ValueError):
            refine(result2, 0, "reflexive")

    def test_linear_orders_cover_leftovers(self):
        model = Model(reflexive_chain(4), {"p0": [0, 2], "p1": [1, 2]})
        result = filter_model(model, fm.subformula_closure([p0, p1]))
        refinement, refined = refine(result, 1, "linear", seed=42)
        assert kripke.check_property(refined.frame, "connected")
        assert refinement.linear_orders is not None
        for cluster, core, order in zip(
            refinement.clusters, refinement.cores, refinement.linear_orders
        ):
            assert sorted(order) == sorted(set(cluster) - set(core))

    def test_seeded_shuffle_is_deterministic(self):
        model = Model(reflexive_chain(5), {"p0": [0, 2, 4], "p1": [1, 2]})
        result = filter_model(model, fm.subformula_closure([p0, p1]))
        a, _ = refine(result, 1, "linear", seed=7)
        b, _ = refine(result, 1, "linear", seed=7)
        assert a == b
        trace_a = a.trace_json(result)
        trace_b = b.trace_json(result)
        assert trace_a == trace_b

    def test_refinement_subrelation(self):
        rng = random.Random(8)
        for _ in range(30):
            frame = helpers.random_transitive_frame(rng, 7, 2)
            model = helpers.random_model(rng, frame)
            result = filter_model(model, helpers.random_closed_set(rng))
            refinement, _ = refine(result, 2, "base")
            for x in range(refinement.r_prime.world_count):
                assert not refinement.r_prime.rows[x] & ~result.r_phi.rows[x]

    def test_core_too_large_propagates(self):
        model = Model(full_cluster(3), {"p0": [0], "p1": [1]})
        result = filter_model(model, fm.subformula_closure([p0, p1]))
        with pytest.raises(CoreTooLargeError):
            refine(result, 1, "base")


class TestClassFormula:
    def test_examples(self):
        model = Model(Frame(2, [(0, 1)]), {"p0": [0]})
        result = filter_model(model, fm.FormulaSet([p0]))
        idx_true = result.class_of[0]
        assert class_formula(result, idx_true) == p0
        assert class_formula(result, 1 - idx_true) == Neg(p0)

    def test_box_literal(self):
        model = Model(Frame(2, [(0, 1)]), {"p0": [0]})
        phi = fm.FormulaSet([p0, Box(p0)])
        result = filter_model(model, phi)
        for idx in range(len(result.classes)):
            f = class_formula(result, idx)
            assert kripke.truth_set(model, f) == frozenset(result.classes[idx])

    def test_defining_property_random(self):
        rng = random.Random(12)
        for _ in range(40):
            frame = helpers.random_transitive_frame(rng, 7, 2)
            model = helpers.random_model(rng, frame)
            result = filter_model(model, helpers.random_closed_set(rng))
            for idx in range(len(result.classes)):
                f = class_formula(result, idx)
                assert kripke.truth_set(model, f) == frozenset(result.classes[idx])

    def test_empty_set(self):
        result = filter_model(Model(Frame(2, [(0, 1)]), {}), fm.FormulaSet())
        assert len(result.classes) == 1
        assert class_formula(result, 0) == fm.Top()
