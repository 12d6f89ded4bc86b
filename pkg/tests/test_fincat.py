from itertools import product as cartesian

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import thin_categories
from symop.fincat import (
    FinCategory,
    FinFunctor,
    InvalidCategory,
    arrow_category,
    category_violations,
    chain,
    codiscrete,
    cyclic_group,
    discrete,
    dpb_along_dopfib,
    find_isomorphism,
    is_discrete_fibration,
    is_discrete_opfibration,
    is_equiv_discrete,
    is_equiv_discrete_via_pi0,
    iter_functors,
    pi0,
    probe_categories,
    product,
    pullback,
    terminal,
    validate_category,
)
from symop.operad import ass, com, operad_polynomial
from symop.poly import compose_polynomials


def one_arrow() -> FinCategory:
    return FinCategory(["a", "b"], {"f": ("a", "b")}, {}, name="arrow")


# validation


def test_terminal_is_valid():
    assert category_violations({"objects": ["*"], "arrows": [], "compose": []}) == []


def test_single_arrow_needs_no_table():
    raw = {"objects": ["a", "b"], "arrows": [{"id": "f", "src": "a", "tgt": "b"}], "compose": []}
    assert validate_category(raw).hom("a", "b") == ["f"]


def test_missing_composite_is_reported():
    raw = {
        "objects": ["a", "b"],
        "arrows": [{"id": "f", "src": "a", "tgt": "b"}, {"id": "g", "src": "b", "tgt": "a"}],
        "compose": [{"first": "f", "then": "g", "result": "1_a"}],
    }
    found = category_violations(raw)
    assert [v.kind for v in found] == ["MissingComposite"]
    assert found[0].witness == ("g", "f")
    with pytest.raises(InvalidCategory):
        validate_category(raw)


def test_non_associative_table_is_reported():
    # every product of two generators is the identity, so (e;e);z = z but e;(e;z) = e
    pairs = [("e", "e"), ("e", "z"), ("z", "e"), ("z", "z")]
    raw = {
        "objects": ["*"],
        "arrows": [{"id": "e", "src": "*", "tgt": "*"}, {"id": "z", "src": "*", "tgt": "*"}],
        "compose": [{"first": f, "then": g, "result": "1_*"} for f, g in pairs],
    }
    found = category_violations(raw)
    assert found and {v.kind for v in found} == {"NonAssociative"}
    assert ("e", "e", "z") in [v.witness for v in found]


def test_json_roundtrip_keeps_custom_identities():
    A = arrow_category(one_arrow()).arrowCat
    B = validate_category(A.to_dict())
    assert B.signature() == A.signature()


# fibrations


def test_identity_is_both_fibrations():
    F = FinFunctor.identity(chain(2))
    assert is_discrete_fibration(F) and is_discrete_opfibration(F)


def test_map_to_terminal():
    F = FinFunctor.constant(discrete(["a", "b"]), terminal(), "*")
    assert is_discrete_fibration(F) and is_discrete_opfibration(F)
    # over 1_* both 1_b and f end at b, so lifts are not unique
    G = FinFunctor.constant(one_arrow(), terminal(), "*")
    assert not is_discrete_fibration(G) and not is_discrete_opfibration(G)


def lift_counts(F: FinFunctor) -> tuple[set[int], set[int]]:
    """Numbers of lifts into (out of) each object along each arrow of the codomain, by enumeration."""
    C, D = F.dom, F.cod
    into, out = set(), set()
    for e in C.objects:
        for u in D.into(F.obj[e]):
            into.add(sum(1 for h in C.into(e) if F.arr[h] == u))
        for u in D.out_of(F.obj[e]):
            out.add(sum(1 for h in C.out_of(e) if F.arr[h] == u))
    return into, out


def test_codomain_functor_of_arrow_category():
    bundle = arrow_category(one_arrow())
    into, out = lift_counts(bundle.c)
    # 1_b has two lifts into the object 1_b: its identity and the square f => 1_b
    assert into == {1, 2} and out == {1, 2}
    assert not is_discrete_fibration(bundle.c)
    assert not is_discrete_opfibration(bundle.c)


@pytest.mark.parametrize("name", ["ass2", "com2"])
def test_lift_counts_agree_with_predicates(name):
    p = operad_polynomial({"ass2": ass(2), "com2": com(2)}[name]).poly.p
    assert lift_counts(p) == ({1}, {1})
    assert is_discrete_fibration(p) and is_discrete_opfibration(p)


# pullbacks


def test_pullback_along_identity():
    G = FinFunctor.constant(chain(2), one_arrow(), "a")
    pb = pullback(FinFunctor.identity(one_arrow()), G)
    assert find_isomorphism(pb.P, chain(2)) is not None


def test_pullback_over_discrete_is_product():
    C = discrete(["c"])
    A, B = chain(1), cyclic_group(2)
    pb = pullback(FinFunctor.constant(A, C, "c"), FinFunctor.constant(B, C, "c"))
    assert find_isomorphism(pb.P, product([A, B])) is not None


FIBRATIONS = [
    FinFunctor.constant(discrete(["a", "b"]), terminal(), "*"),
    operad_polynomial(ass(2)).poly.p,
    operad_polynomial(com(2)).poly.p,
    FinFunctor.identity(chain(2)),
]


@given(st.sampled_from(range(len(FIBRATIONS))), thin_categories(3), st.data())
def test_pullback_of_discrete_fibration_reflects_identities(k, B, data):
    F = FIBRATIONS[k]
    Gs = list(iter_functors(B, F.cod))
    G = data.draw(st.sampled_from(Gs)) if Gs else None
    if G is None:
        return
    pb = pullback(F, G)
    assert is_discrete_fibration(pb.right)
    for h in pb.P.arrows:
        if pb.left.cod.is_identity(pb.left.arr[h]) and B.is_identity(pb.right.arr[h]):
            assert pb.P.is_identity(h)
        if B.is_identity(pb.right.arr[h]):
            assert pb.P.is_identity(h)


# arrow categories


def test_arrow_category_of_discrete():
    X = discrete(["a", "b", "c"])
    bundle = arrow_category(X)
    assert find_isomorphism(bundle.arrowCat, X) is not None
    assert bundle.alpha.is_identity()


def test_arrow_category_of_one_arrow():
    bundle = arrow_category(one_arrow())
    assert sorted(bundle.arrowCat.objects) == ["1_a", "1_b", "f"]


def induced_on_arrows(F: FinFunctor):
    """``F^[1]`` between arrow categories; a square goes to the square of its images."""
    A, B = arrow_category(F.dom), arrow_category(F.cod)
    obj = {f: F.arr[f] for f in A.arrowCat.objects}
    arr = {}
    for s in A.arrowCat.arrows:
        u, v = F.arr[A.d.arr[s]], F.arr[A.c.arr[s]]
        src, tgt = obj[A.arrowCat.src(s)], obj[A.arrowCat.tgt(s)]
        (img,) = [t for t in B.arrowCat.hom(src, tgt) if B.d.arr[t] == u and B.c.arr[t] == v]
        arr[s] = img
    return FinFunctor(A.arrowCat, B.arrowCat, obj, arr)


@pytest.mark.parametrize("name", ["ass2", "com2", "ass1"])
def test_arrow_category_preserves_polynomial_middle_maps(name):
    T = {"ass2": ass(2), "com2": com(2), "ass1": ass(1)}[name]
    p = operad_polynomial(T).poly.p
    P1 = induced_on_arrows(p)
    assert P1.violations() == []
    assert is_discrete_fibration(P1) and is_discrete_opfibration(P1)


# components


def test_pi0_of_discrete_is_bijective():
    _, q = pi0(discrete(["a", "b"]))
    assert q.is_bijective()


def test_pi0_of_codiscrete():
    D, _ = pi0(codiscrete(["a", "b", "c"]))
    assert len(D.objects) == 1


def test_pi0_of_ass_shapes():
    B = operad_polynomial(ass(3)).poly.B
    D, q = pi0(B)
    # one component per arity, found by grouping arrows of each arity
    by_arity = {len(ass(3).source(a)) for a in ass(3).arrows}
    assert len(D.objects) == len(by_arity) == 4


@pytest.mark.parametrize(
    "X,expected",
    [
        (discrete(["a", "b"]), True),
        (codiscrete(["a", "b"]), True),
        (cyclic_group(2), False),
        (one_arrow(), False),
        (product([codiscrete(["a", "b"]), discrete(["c", "d"])]), True),
    ],
)
def test_is_equiv_discrete_examples(X, expected):
    assert is_equiv_discrete(X) is expected
    assert is_equiv_discrete_via_pi0(X) is expected


@given(thin_categories(4), st.integers(1, 3))
def test_is_equiv_discrete_agrees_with_oracle(X, n):
    for C in (X, product([X, cyclic_group(n)])):
        assert is_equiv_discrete(C) == is_equiv_discrete_via_pi0(C)


# distributivity pullbacks


def dpb_fixture():
    Y = one_arrow()
    X = FinCategory(["x1", "x1b", "x2"], {"u": ("x1", "x2"), "ub": ("x1b", "x2")}, {}, name="X")
    f = FinFunctor(X, Y, {"x1": "a", "x1b": "a", "x2": "b"}, {"u": "f", "ub": "f"})
    W = FinCategory(
        ["w1", "w1b", "w2", "w2b"],
        {"c": ("w1", "w2"), "cb": ("w1b", "w2"), "cc": ("w1b", "w2b")},
        {},
        name="W",
    )
    g = FinFunctor(W, X, {"w1": "x1", "w1b": "x1b", "w2": "x2", "w2b": "x2"}, {"c": "u", "cb": "ub", "cc": "ub"})
    return f, g


def terminality_failures(res, probes) -> tuple[int, list]:
    """Every pullback-around ``(Q', r', p')`` with ``Q'`` a probe maps uniquely into ``res``."""
    f, g = res.f, res.g
    W = g.dom
    seen, failures = 0, []
    for Qp in probes:
        for rp in iter_functors(Qp, f.cod):
            pbp = pullback(f, rp)
            Pp = pbp.P
            for pp in iter_functors(
                Pp,
                W,
                obj_candidates=lambda e: [w for w in W.objects if g.obj[w] == pbp.left.obj[e]],
                arrow_ok=lambda a, v: g.arr[v] == pbp.left.arr[a],
            ):
                seen += 1
                ks = []
                for k in iter_functors(
                    Qp,
                    res.Q,
                    obj_candidates=lambda z: [w for w in res.Q.objects if res.r.obj[w] == rp.obj[z]],
                    arrow_ok=lambda a, v: res.r.arr[v] == rp.arr[a],
                ):
                    obj = {e: res.pb.obj_index[(x, k.obj[z])] for e, (x, z) in pbp.obj_pairs.items()}
                    arr = {e: res.pb.arr_index[(u, k.arr[a])] for e, (u, a) in pbp.arr_pairs.items()}
                    through = FinFunctor(Pp, res.P, obj, arr).then(res.p)
                    if through.same_as(pp):
                        ks.append(k)
                if len(ks) != 1:
                    failures.append((Qp.name, len(ks)))
    return seen, failures


def test_dpb_along_identity():
    X = one_arrow()
    W = FinCategory(["p", "q", "r"], {"s": ("p", "q"), "t": ("p", "r")}, {}, name="W")
    g = FinFunctor(W, X, {"p": "a", "q": "b", "r": "b"}, {"s": "f", "t": "f"})
    res = dpb_along_dopfib(FinFunctor.identity(X), g)
    # an isomorphism Q -> W turning r into g
    isos = iter_functors(
        res.Q,
        W,
        injective=True,
        obj_candidates=lambda z: [w for w in W.objects if g.obj[w] == res.r.obj[z]],
        arrow_ok=lambda a, v: g.arr[v] == res.r.arr[a],
    )
    assert next(isos, None) is not None


def test_dpb_empty_fibre_gives_one_object():
    Y = discrete(["y", "z"])
    X = discrete(["x"])
    f = FinFunctor(X, Y, {"x": "z"})
    g = FinFunctor.identity(X)
    res = dpb_along_dopfib(f, g)
    assert [q for q in res.Q.objects if res.r.obj[q] == "y"] == ["sec(y;[])"]


def test_dpb_is_terminal_at_bounded_size():
    f, g = dpb_fixture()
    res = dpb_along_dopfib(f, g)
    seen, failures = terminality_failures(res, probe_categories(6))
    assert seen > 0
    assert failures == []


def test_composite_shapes_of_com2():
    P = operad_polynomial(com(2)).poly
    C = compose_polynomials(P, P)
    # pairs (alpha_n, (beta_m1..beta_mn)) with n, m_j <= 2, counted directly
    expected = sum(1 for n in range(3) for _ in cartesian(range(3), repeat=n))
    assert expected == 13
    assert len(C.B.objects) == expected
    res = C.build.dpb
    seen, failures = terminality_failures(res, [terminal()])
    assert seen == expected and failures == []
