import pytest

from helpers import fs
from pidense.formula import parse
from pidense.semantics import (
    KripkeModel,
    bounded_model_search,
    build_window_from_model,
    disjoint_union,
    gen_dense_model,
    is_dense,
    model_check,
    mono_density_report,
    sat_window,
)
from pidense.window import EMPTY, WindowContext, WindowNode, is_window


def small_model():
    return KripkeModel(
        worlds=["x", "y"],
        relations={0: {("x", "y")}, 1: {("y", "y")}},
        valuation={"p": {"y"}, "q": {"x", "y"}},
    )


class TestModelConstruction:
    def test_duplicate_worlds(self):
        with pytest.raises(ValueError):
            KripkeModel(["a", "a"], {}, {})

    def test_edge_endpoints_must_exist(self):
        with pytest.raises(ValueError):
            KripkeModel(["a"], {0: {("a", "b")}}, {})

    def test_valuation_worlds_must_exist(self):
        with pytest.raises(ValueError):
            KripkeModel(["a"], {}, {"p": {"b"}})

    def test_missing_relation_is_empty(self):
        m = KripkeModel(["a"], {}, {})
        assert m.rel(3) == frozenset()

    def test_successors_sorted_and_cached(self):
        m = KripkeModel(
            ["a", "b", "c"], {0: {("a", "c"), ("a", "b")}}, {}
        )
        assert m.successors(0, "a") == ("b", "c")
        assert m.successors(0, "a") == ("b", "c")

    def test_dict_round_trip(self):
        m = small_model()
        d = m.to_dict()
        again = KripkeModel.from_dict(d)
        assert again.to_dict() == d
        assert model_check(again, "x", parse("[0]p", pi=1))

    def test_relation_keys_coerced_to_int(self):
        m = KripkeModel.from_dict(
            {"worlds": ["a"], "relations": {"0": [["a", "a"]]}}
        )
        assert m.rel(0) == {("a", "a")}


class TestDensity:
    def test_vacuously_dense(self):
        assert is_dense(KripkeModel(["a"], {}, {}), 2).ok

    def test_missing_stopover(self):
        m = KripkeModel(["x", "t"], {0: {("x", "t")}}, {})
        report = is_dense(m, 1)
        assert not report.ok
        assert report.violations == ((0, "x", "t"),)

    def test_reflexive_upper_level(self):
        m = KripkeModel(["x", "t"], {0: {("x", "t")}, 1: {("t", "t")}}, {})
        assert is_dense(m, 1)

    def test_top_index_unconstrained(self):
        m = KripkeModel(["x", "t"], {1: {("x", "t")}}, {})
        assert is_dense(m, 1).ok

    def test_mono_violation(self):
        m = KripkeModel(["a", "b"], {0: {("a", "b")}}, {})
        report = mono_density_report(m)
        assert report.violations == ((0, "a", "b"),)

    def test_mono_reflexive_is_dense(self):
        m = KripkeModel(["a", "b"], {0: {("a", "a"), ("a", "b"), ("b", "b")}}, {})
        assert mono_density_report(m).ok

    def test_mono_chain_not_dense(self):
        m = KripkeModel(["a", "b", "c"], {0: {("a", "b"), ("b", "c")}}, {})
        assert not mono_density_report(m).ok


class TestModelCheck:
    def test_atoms_and_bottom(self):
        m = small_model()
        assert model_check(m, "y", parse("p"))
        assert not model_check(m, "x", parse("p"))
        assert not model_check(m, "x", parse("bot"))
        assert model_check(m, "x", parse("top"))

    def test_connectives(self):
        m = small_model()
        assert model_check(m, "y", parse("p & q"))
        assert not model_check(m, "x", parse("p & q"))
        assert model_check(m, "x", parse("~p"))
        assert model_check(m, "x", parse("p -> q"))

    def test_boxes(self):
        m = small_model()
        assert model_check(m, "x", parse("[0]p", pi=1))
        assert model_check(m, "y", parse("[0]p", pi=1))  # vacuous
        assert model_check(m, "y", parse("[1]p", pi=1))
        assert model_check(m, "x", parse("<0>(p & q)", pi=1))
        assert not model_check(m, "x", parse("<1>p", pi=1))

    def test_unknown_world(self):
        with pytest.raises(ValueError):
            model_check(small_model(), "zz", parse("p"))


U1 = fs("[0]p", "~[0]~p", pi=1)


def test_sat_window():
    m = small_model()
    w = WindowNode((fs("p"), fs("p")), (EMPTY,))
    ctx = WindowContext(u=U1, k=0, n=1, pi=1)
    assert sat_window(m, "x", w, ctx)
    # no world satisfies ~p along the chain
    w_bad = WindowNode((fs("~p"), fs("p")), (EMPTY,))
    assert not sat_window(m, "x", w_bad, ctx)
    assert sat_window(m, "x", EMPTY, ctx)


def test_build_window_from_model():
    m = small_model()
    w = build_window_from_model(
        m, "x", "y", U1, fs("p"), k=0, n=1, pi=1
    )
    ctx = WindowContext(u=U1, k=0, n=1, pi=1)
    assert is_window(w, ctx)
    assert sat_window(m, "x", w, ctx)
    assert w.rows[0] == fs("p")


def test_build_window_requires_the_edge():
    m = small_model()
    with pytest.raises(ValueError):
        build_window_from_model(m, "y", "x", U1, fs("p"), k=0, n=1, pi=1)


def test_build_window_reports_missing_stopovers():
    m = KripkeModel(["x", "y"], {0: {("x", "y")}}, {"p": {"y"}})
    with pytest.raises(ValueError):
        build_window_from_model(m, "x", "y", U1, fs("p"), k=0, n=1, pi=1)


class TestGeneratedModels:
    def test_indexed_models_are_dense(self):
        for seed in range(40):
            pi = 1 + seed % 2
            m = gen_dense_model(seed, pi, size=4)
            assert len(m.worlds) == 4
            assert set(m.relations) == set(range(pi + 1))
            assert is_dense(m, pi).ok

    def test_mono_models_are_dense(self):
        for seed in range(20):
            m = gen_dense_model(seed, 0, size=3, mono=True)
            assert set(m.relations) == {0}
            assert mono_density_report(m).ok

    def test_generation_is_reproducible(self):
        a = gen_dense_model(11, 1, size=5)
        b = gen_dense_model(11, 1, size=5)
        assert a.to_dict() == b.to_dict()


class TestBoundedSearch:
    def test_finds_a_dense_countermodel(self):
        f = parse("~([0]p -> [0][1]p)", pi=1)
        m = bounded_model_search(f, pi=1, max_size=2)
        assert m is not None
        assert model_check(m, "w0", f)
        assert is_dense(m, 1).ok

    def test_none_within_bound_for_a_validity(self):
        f = parse("~([0][1]p -> [0]p)", pi=1)
        assert bounded_model_search(f, pi=1, max_size=2) is None

    def test_mono_search(self):
        f = parse("~(<>p -> <><>p)", mono=True)
        assert bounded_model_search(f, pi=0, max_size=2, mono=True) is None


def test_disjoint_union():
    a = small_model()
    b = KripkeModel(["x"], {0: {("x", "x")}, 1: {("x", "x")}}, {"p": {"x"}})
    u = disjoint_union([a, b])
    assert len(u.worlds) == 3
    assert is_dense(u, 1).ok
    assert model_check(u, "0:x", parse("[0]p", pi=1))
    assert model_check(u, "1:x", parse("p"))
    with pytest.raises(ValueError):
        disjoint_union([])
